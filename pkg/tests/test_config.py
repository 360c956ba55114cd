import logging
import unittest
from configparser import ConfigParser, DuplicateOptionError
from os import path as os_path
from unittest.mock import patch, mock_open

from src.pylocker.utils import joinPath
from src.pylocker.utils.config import Config, checkConfigPath, parseValue
from src.pylocker.utils.env import Env
from src.pylocker.version import PROJECT_NAME

_logger = logging.getLogger(__name__)

TESTS_DIR = os_path.dirname(os_path.abspath(__file__))

CONFIG_CONTENT = """
[pylocker]
family: 'bernoulli'
[benchmark]
replicates: 20
scenario: 'lsweep'
"""

DUPLICATE_OPTION_CONFIG_CONTENT = """
[pylocker]
n_basis = 13
n_basis = 20
"""


class TestConfig(unittest.TestCase):

    def setUp(self):
        self.valid_config_path = os_path.abspath(TESTS_DIR + '/test_data/pylocker.conf')
        self.invalid_config_path = os_path.abspath('/invalid/path/to/config.conf')

    @patch('os.path.exists', return_value=True)
    def test_check_valid_config_path(self, mock_exists):
        """An existing conf path passes the check."""
        self.assertTrue(checkConfigPath(self.valid_config_path))
        mock_exists.assert_called_once_with(self.valid_config_path)

    @patch('os.path.exists', return_value=False)
    def test_check_invalid_config_path(self, mock_exists):
        """A missing conf path is a FileNotFoundError."""
        with self.assertRaises(FileNotFoundError):
            checkConfigPath(self.invalid_config_path)
        mock_exists.assert_called_once_with(self.invalid_config_path)

    @patch('builtins.open', new_callable=mock_open, read_data=CONFIG_CONTENT)
    @patch('os.path.exists', return_value=True)
    def test_load_config(self, mock_exists, mock_file):
        """Model and benchmark sections are parsed into python values."""
        config = Config(self.valid_config_path)
        self.assertIsInstance(config, Config)
        self.assertEqual(config.get('pylocker'), {'family': 'bernoulli'})
        self.assertEqual(config['benchmark']['replicates'], 20)
        self.assertEqual(config['benchmark']['scenario'], "lsweep")
        self.assertIn('benchmark', config)
        self.assertEqual(str(config), "{'pylocker': {'family': 'bernoulli'}, 'benchmark': {'replicates': 20, 'scenario': 'lsweep'}}")
        self.assertEqual(repr(config), "Config({'pylocker': {'family': 'bernoulli'}, 'benchmark': {'replicates': 20, 'scenario': 'lsweep'}})")

    def test_user_config_merges_over_defaults(self):
        """Options in the user file replace packaged defaults, the rest are kept."""
        config = Config(self.valid_config_path)
        self.assertEqual(config['pylocker']['family'], 'poisson')
        self.assertEqual(config['pylocker']['n_basis'], 8)
        self.assertEqual(config['pylocker']['rho_grid'], [1e-3, 1e-2])
        self.assertEqual(config['pylocker']['degree'], 3)
        self.assertIsNone(config['pylocker']['lambda_grid'])
        self.assertTrue(config['logs']['no_logs'])
        self.assertEqual(config['benchmark']['replicates'], 20)

    def test_missing_section_falls_back(self):
        """get returns an empty dict, or the fallback, for unknown sections."""
        config = Config(self.valid_config_path)
        self.assertEqual(config.get('missing'), {})
        self.assertEqual(config.get('missing', {'a': 1}), {'a': 1})

    @patch('builtins.open', new_callable=mock_open, read_data=DUPLICATE_OPTION_CONFIG_CONTENT)
    @patch('os.path.exists', return_value=True)
    @patch('src.pylocker.utils.config._logger')
    def test_load_config_duplicate_option_error(self, mock_logger, mock_exists, mock_file):
        """A repeated option is logged and re-raised."""
        with self.assertRaises(DuplicateOptionError):
            Config(config_path="dummy_path.conf")
        mock_logger.error.assert_called_once()
        self.assertIn("Failed to parse config", mock_logger.error.call_args[0][0])

    @patch('os.path.exists', return_value=False)
    def test_load_missing_config(self, mock_exists):
        """Config refuses a user file that does not exist."""
        with self.assertRaises(FileNotFoundError):
            Config(self.invalid_config_path)

    @patch('builtins.open', new_callable=mock_open, read_data=CONFIG_CONTENT)
    @patch('src.pylocker.utils.config._logger')
    def test_save_config(self, mock_logger, mock_file):
        """Effective settings are written back with string values quoted."""
        config = Config(self.valid_config_path)
        config['pylocker'] = {'family': 'poisson'}
        config['benchmark'] = {'replicates': 5, 'scenario': 'lsweep'}

        saved_path = config.saveConfig()
        self.assertEqual(saved_path, self.valid_config_path)
        mock_logger.info.assert_called_once_with(f"Config saved to '{self.valid_config_path}'")

        mock_file.assert_called_with(self.valid_config_path, 'w', encoding='utf-8')
        handle = mock_file()

        written_content = ''.join(call[0][0] for call in handle.write.call_args_list)
        self.assertIn('[pylocker]\n', written_content)
        self.assertIn("family = 'poisson'\n", written_content)
        self.assertIn('[benchmark]\n', written_content)
        self.assertIn('replicates = 5\n', written_content)
        self.assertIn("scenario = 'lsweep'\n", written_content)

        config.filename = ''
        config.saveConfig()
        config_path = joinPath(os_path.abspath(TESTS_DIR + '/test_data'), PROJECT_NAME, ext=config.CONFIG_EXT)
        mock_logger.info.assert_any_call(f"Config saved to '{config_path}'")

    @patch('builtins.open', new_callable=mock_open, read_data=CONFIG_CONTENT)
    def test_load_section(self, mock_file):
        """Only the requested section is loaded."""
        config = Config(self.valid_config_path)
        parser = ConfigParser()
        parser.read_string(CONFIG_CONTENT)
        section_data = config.loadSection(self.valid_config_path, parser, 'benchmark')
        self.assertEqual(section_data, {'replicates': 20, 'scenario': 'lsweep'})

        config = Config(self.valid_config_path)
        loaded = config.loadConfig(sections='benchmark')
        self.assertEqual(loaded, {'benchmark': {'replicates': 20, 'scenario': 'lsweep'}})

    @patch('builtins.open', new_callable=mock_open, read_data=CONFIG_CONTENT)
    @patch('src.pylocker.utils.config._logger')
    def test_load_nonexistent_section(self, mock_logger, mock_file):
        """An unknown section loads as empty and is reported."""
        config = Config('')
        self.assertFalse(config.config_path)
        parser = ConfigParser()
        parser.read_string(CONFIG_CONTENT)
        section_data = config.loadSection(self.valid_config_path, parser, 'simulation')
        self.assertEqual(section_data, {})
        mock_logger.error.assert_called_once_with(f"Section 'simulation' not found in '{self.valid_config_path}'")

    @patch('src.pylocker.utils.env.LoggerHandler')
    @patch('builtins.open', new_callable=mock_open, read_data=CONFIG_CONTENT)
    @patch('os.path.exists', return_value=True)
    def test_load_config_with_env(self, mock_exists, mock_file, mock_logger_handler):
        """Env names the config after the project."""
        config = Env(self.valid_config_path, project_name="pylocker").config
        self.assertIsInstance(config, Config)
        self.assertEqual(config.filename, 'pylocker.conf')
        self.assertEqual(repr(config), "pylocker.Config({'pylocker': {'family': 'bernoulli'}, 'benchmark': {'replicates': 20, 'scenario': 'lsweep'}})")
        config.env.project_name_text = "PyLocker"
        self.assertEqual(repr(config), "PyLocker.Config({'pylocker': {'family': 'bernoulli'}, 'benchmark': {'replicates': 20, 'scenario': 'lsweep'}})")

    @patch('src.pylocker.utils.env.LoggerHandler')
    def test_config_with_env(self, mock_logger_handler):
        """Without a user file the packaged defaults apply."""
        config = Env('', project_name="pylocker").config
        self.assertIsInstance(config, Config)
        self.assertEqual(config.filename, 'pylocker')
        self.assertEqual(config['pylocker']['family'], 'gaussian')


class TestValidConfig(unittest.TestCase):

    @patch('builtins.open', new_callable=mock_open, read_data=CONFIG_CONTENT)
    @patch('os.path.exists', return_value=True)
    def setUp(self, mock_exists, mock_file):
        self.config_path = os_path.abspath(TESTS_DIR + '/non_existent.conf')
        self.config = Config(self.config_path)

    def test_split_path_into_dir_and_name(self):
        """A .conf path splits into directory and filename."""
        directory, filename = self.config._splitPathIntoDirAndName(self.config_path)
        self.assertEqual(directory, os_path.dirname(self.config_path))
        self.assertEqual(filename, os_path.basename(self.config_path))

    def test_split_invalid_path(self):
        """Paths without the conf extension are rejected."""
        self.assertFalse(self.config._splitPathIntoDirAndName('invalid_config.txt'))
        self.assertFalse(self.config._splitPathIntoDirAndName(''))
        self.assertFalse(self.config._splitPathIntoDirAndName(False))

    def test_set_config(self):
        """setConfig merges options into existing sections."""
        new_config = {'pylocker': {'n_basis': 13}}
        self.config.setConfig(new_config)
        self.assertEqual(self.config.get('pylocker'), {'family': 'bernoulli', 'n_basis': 13})
        self.assertEqual(str(self.config), "{'pylocker': {'family': 'bernoulli', 'n_basis': 13}, 'benchmark': {'replicates': 20, 'scenario': 'lsweep'}}")

    def test_loadSection_handles_SyntaxError(self):
        """A value that is not a python literal stays a string."""
        section_name = "benchmark"
        parser = ConfigParser()
        parser.add_section(section_name)

        parser.set(section_name, "rho_grid", "[1e-3, 1e-2')")
        result = self.config.loadSection("", parser, section_name)
        self.assertIn("rho_grid", result)
        self.assertEqual(result["rho_grid"], "[1e-3, 1e-2')")

    def test_parse_value(self):
        """Values are python literals where possible."""
        self.assertEqual(parseValue("[1e-3, 1e-2]"), [1e-3, 1e-2])
        self.assertIsNone(parseValue("None"))
        self.assertEqual(parseValue("'gaussian'"), "gaussian")
        self.assertEqual(parseValue("gaussian"), "gaussian")


if __name__ == '__main__':
    unittest.main()
