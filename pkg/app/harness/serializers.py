"""
Serializers for harness run configurations.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

from django.conf import settings
from rest_framework import serializers

from app.calc import grid_steps
from core.exceptions import TableauError
from core.legendre import MAX_NODES
from core.problems import BUILTIN_PROBLEMS, builtin_problem
from harness.experiments import METHODS, MethodSpec, parse_method
from integrator.lim import SOLVER_KINDS, SolverConfig

U64_MAX = 2 ** 64 - 1


def _default(section, key):
    """Field default read from settings when the field is bound."""
    return lambda: getattr(settings, section)[key]


@dataclass(frozen=True)
class RunConfig:
    """A validated single-run configuration."""

    problem: str
    method: str
    s: int
    k: int
    h: float
    t_final: float
    n_steps: int
    solver: str
    tol: float
    max_iter: int
    constant_b: bool
    lipschitz: Optional[float]
    record_every: int
    out: str
    seed: int

    def build_problem(self):
        return builtin_problem(self.problem)

    def method_spec(self):
        return parse_method(self.method, s=self.s, k=self.k)

    def solver_config(self):
        return SolverConfig(
            kind=self.solver,
            tol=self.tol,
            max_iter=self.max_iter,
            constant_B=self.constant_b,
            lipschitz=self.lipschitz,
        )


@dataclass(frozen=True)
class ConvergeConfig(RunConfig):
    methods: Tuple[MethodSpec, ...]
    n_list: Tuple[int, ...]


@dataclass(frozen=True)
class DriftConfig(RunConfig):
    window: float


@dataclass(frozen=True)
class SymmetryConfig(RunConfig):
    trials: int


class RunConfigSerializer(serializers.Serializer):
    """Serializer for one simulation run."""

    config_class = RunConfig

    problem = serializers.ChoiceField(
        choices=sorted(BUILTIN_PROBLEMS),
        default=_default('HARNESS_DEFAULTS', 'problem'),
    )
    method = serializers.ChoiceField(
        choices=METHODS, default=_default('HARNESS_DEFAULTS', 'method'))
    s = serializers.IntegerField(
        min_value=2, default=_default('HARNESS_DEFAULTS', 's'))
    k = serializers.IntegerField(
        min_value=2, max_value=MAX_NODES, required=False, allow_null=True)
    h = serializers.FloatField(default=_default('HARNESS_DEFAULTS', 'h'))
    t_final = serializers.FloatField(
        default=_default('HARNESS_DEFAULTS', 't_final'))
    solver = serializers.ChoiceField(
        choices=SOLVER_KINDS, default=_default('LIM_SOLVER', 'kind'))
    tol = serializers.FloatField(default=_default('LIM_SOLVER', 'tol'))
    max_iter = serializers.IntegerField(
        min_value=1, default=_default('LIM_SOLVER', 'max_iter'))
    constant_b = serializers.BooleanField(default=False)
    lipschitz = serializers.FloatField(
        min_value=0, required=False, allow_null=True, default=None)
    record_every = serializers.IntegerField(
        min_value=1, default=_default('HARNESS_DEFAULTS', 'record_every'))
    out = serializers.CharField(default='-')
    seed = serializers.IntegerField(
        min_value=0, max_value=U64_MAX,
        default=_default('HARNESS_DEFAULTS', 'seed'))

    def validate_h(self, value):
        if value == 0:
            raise serializers.ValidationError('Step size must be non-zero.')
        return value

    def validate_t_final(self, value):
        if not value > 0:
            raise serializers.ValidationError('t_final must be positive.')
        return value

    def validate_tol(self, value):
        if not value > 0:
            raise serializers.ValidationError('Tolerance must be positive.')
        return value

    def validate(self, attrs):
        """Fill k = 2s and check the fixed-step grid."""
        if attrs.get('k') is None:
            attrs['k'] = 2 * attrs['s']
        if attrs['k'] < attrs['s']:
            raise serializers.ValidationError(
                {'k': f"k must be at least s={attrs['s']}."})
        if attrs['method'] != 'boris':
            try:
                attrs['method_spec'] = parse_method(
                    attrs['method'], s=attrs['s'], k=attrs['k'])
            except (TableauError, ValueError) as exc:
                raise serializers.ValidationError({'method': str(exc)})
        try:
            attrs['n_steps'] = grid_steps(attrs['t_final'], attrs['h'])
        except ValueError as exc:
            raise serializers.ValidationError({'t_final': str(exc)})
        return attrs

    def create(self, validated_data):
        """Return the immutable run configuration."""
        data = dict(validated_data)
        data.pop('method_spec', None)
        return self.config_class(**data)


def _parse_int_list(text):
    try:
        values = tuple(int(item) for item in text.split(',') if item.strip())
    except ValueError:
        raise serializers.ValidationError(
            'Expected a comma-separated list of integers.')
    if not values or min(values) < 1:
        raise serializers.ValidationError(
            'Expected at least one positive integer.')
    return values


class ConvergeSerializer(RunConfigSerializer):
    """Serializer for convergence-order studies."""

    config_class = ConvergeConfig

    problem = serializers.ChoiceField(
        choices=sorted(BUILTIN_PROBLEMS),
        default=_default('HARNESS_CONVERGE', 'problem'),
    )
    h = serializers.FloatField(default=_default('HARNESS_CONVERGE', 'h0'))
    t_final = serializers.FloatField(
        default=_default('HARNESS_CONVERGE', 't_final'))
    methods = serializers.CharField(
        default=_default('HARNESS_CONVERGE', 'methods'))
    n_list = serializers.CharField(
        default=_default('HARNESS_CONVERGE', 'n_list'))

    def validate_methods(self, value):
        try:
            return tuple(
                parse_method(item) for item in value.split(',')
                if item.strip()
            )
        except (TableauError, ValueError) as exc:
            raise serializers.ValidationError(str(exc))

    def validate_n_list(self, value):
        return tuple(sorted(set(_parse_int_list(value))))


class DriftSerializer(RunConfigSerializer):
    """Serializer for energy-drift runs."""

    config_class = DriftConfig

    t_final = serializers.FloatField(
        default=_default('HARNESS_DRIFT', 't_final'))
    window = serializers.FloatField(
        default=_default('HARNESS_DRIFT', 'window'))
    full_horizon = serializers.BooleanField(default=False, write_only=True)

    def validate(self, attrs):
        if attrs.pop('full_horizon'):
            attrs['t_final'] = settings.HARNESS_DRIFT['full_horizon']
        attrs = super().validate(attrs)
        try:
            attrs['record_every'] = grid_steps(attrs['window'], attrs['h'])
        except ValueError as exc:
            raise serializers.ValidationError({'window': str(exc)})
        return attrs


class SymmetrySerializer(RunConfigSerializer):
    """Serializer for forward/backward round-trip checks."""

    config_class = SymmetryConfig

    trials = serializers.IntegerField(
        min_value=1, default=_default('HARNESS_SYMMETRY', 'trials'))
