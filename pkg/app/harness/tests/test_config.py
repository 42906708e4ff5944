"""
Tests for key=value configuration files.
"""
import os
import tempfile

from django.test import SimpleTestCase

from harness import config


class ConfigFileTests(SimpleTestCase):
    """Test parsing configuration files."""

    def test_parse_values(self):
        """Keys are normalized to serializer field names."""
        values = config.parse_config(
            '# experiment\n'
            'problem = ex2\n'
            '--tfinal=25\n'
            'max-iter = 50  # cap\n'
            '\n'
            'constant-b = true\n'
        )

        self.assertEqual(values, {
            'problem': 'ex2',
            't_final': '25',
            'max_iter': '50',
            'constant_b': 'true',
        })

    def test_missing_equals(self):
        """Lines without '=' name the line number."""
        with self.assertRaises(config.ConfigFileError) as context:
            config.parse_config('problem = ex1\nmethod lim\n',
                                source='run.cfg')

        self.assertIn('run.cfg:2', str(context.exception))

    def test_duplicate_key(self):
        """A key may only be set once."""
        with self.assertRaises(config.ConfigFileError):
            config.parse_config('h = 0.1\nh = 0.2\n')

    def test_read_file(self):
        """Files are read from disk."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'run.cfg')
            with open(path, 'w') as stream:
                stream.write('s = 3\n')

            self.assertEqual(config.read_config(path), {'s': '3'})

    def test_missing_file(self):
        """Unreadable files raise ConfigFileError."""
        with self.assertRaises(config.ConfigFileError):
            config.read_config('/nonexistent/run.cfg')
