"""
Django command to integrate one trajectory and write its CSV.
"""
from harness.experiments import run_simulation
from harness.management.base import HarnessCommand
from harness.output import records_csv


class Command(HarnessCommand):
    """Run one simulation; one CSV row per recorded step."""

    help = 'Integrate a builtin problem with LIM(k, s) or Boris.'

    def run(self, config):
        problem, records = run_simulation(config)
        self.emit(records_csv(problem, records), config.out)
