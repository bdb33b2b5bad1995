"""
Configuration handler for sygsolve
Manages configuration loading, command-line overrides and logging setup
"""

import logging
from configparser import ConfigParser, Error
from typing import Any, Dict, Optional

from pydantic import ValidationError

from models.exceptions import SygusError
from models.solver_config import SolverConfig


class ConfigError(SygusError):
    """Raised when the configuration file or an override is invalid"""


class ConfigHandler:
    def __init__(self, config_file: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration handler

        Args:
            config_file: Path to an INI file, or None for built-in defaults
            overrides: Values taken from the command line; None entries are ignored
        """
        self.config_file = config_file
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self.config = ConfigParser()
        self._load_config()

    def _load_config(self) -> None:
        """Load all configuration settings from file"""
        if self.config_file:
            try:
                found = self.config.read(self.config_file)
            except Error as error:
                raise ConfigError(f"malformed configuration file {self.config_file}: {error}") from None
            if not found:
                raise ConfigError(f"cannot read configuration file: {self.config_file}")

        self.values: Dict[str, Any] = {}
        try:
            self._load_main()
            self._load_solver()
            self._load_verification()
            self._load_enumerator()
            self._load_lia()
            self._load_rewriter()
            self._load_pbe()
            self._load_loops()
        except ValueError as error:
            raise ConfigError(f"invalid value in {self.config_file}: {error}") from None
        self.values.update(self.overrides)

        try:
            self.solver_config = SolverConfig(**self.values)
        except ValidationError as error:
            raise ConfigError(f"invalid configuration: {error}") from None

        self._setup_logging()
        logging.info(f'Configuration loaded: {self.config_file or "defaults"} - '
                     f'strategy: {self.solver_config.strategy}')

    def _setup_logging(self) -> None:
        """Configure logging based on settings"""
        cfg = self.solver_config
        log_level = (logging.ERROR if cfg.quiet else
                     logging.DEBUG if cfg.debug_log else
                     logging.INFO if cfg.verbose_log else
                     logging.WARNING)

        logging.basicConfig(
            filename=cfg.logfile or None,
            level=log_level,
            format='%(asctime)s - %(levelname)s - %(message)s',
            force=True
        )

    def _load_main(self) -> None:
        """Load logging switches"""
        self.values['debug_log'] = self.config.getboolean('main', 'debug_log', fallback=False)
        self.values['verbose_log'] = self.config.getboolean('main', 'verbose_log', fallback=False)
        self.values['logfile'] = self.config.get('main', 'logfile', fallback='')

    def _load_solver(self) -> None:
        """Load strategy and search budgets"""
        self.values['strategy'] = self.config.get('solver', 'strategy', fallback='auto')
        self.values['timeout_ms'] = self.config.getint('solver', 'timeout_ms', fallback=60_000)
        self.values['max_candidates'] = self.config.getint('solver', 'max_candidates', fallback=1_000_000)
        self.values['max_size'] = self.config.getint('solver', 'max_size', fallback=12)
        self.values['seed'] = self.config.getint('solver', 'seed', fallback=0)

    def _load_verification(self) -> None:
        """Load bounded verification domain"""
        section = 'verification'
        self.values['int_bound'] = self.config.getint(section, 'int_bound', fallback=32)
        self.values['string_max_length'] = self.config.getint(section, 'string_max_length', fallback=6)
        self.values['bv_exhaustive_width'] = self.config.getint(section, 'bv_exhaustive_width', fallback=8)
        self.values['bv_samples'] = self.config.getint(section, 'bv_samples', fallback=10_000)
        self.values['max_points'] = self.config.getint(section, 'max_points', fallback=200_000)
        self.values['accept_bounded'] = self.config.getboolean(section, 'accept_bounded', fallback=False)

    def _load_enumerator(self) -> None:
        self.values['samples_per_arg'] = self.config.getint('enumerator', 'samples_per_arg', fallback=5)
        self.values['symmetry_breaking'] = self.config.getboolean('enumerator', 'symmetry_breaking',
                                                                  fallback=True)

    def _load_lia(self) -> None:
        self.values['branch_depth'] = self.config.getint('lia', 'branch_depth', fallback=200)
        self.values['max_assignments'] = self.config.getint('lia', 'max_assignments', fallback=1 << 22)

    def _load_rewriter(self) -> None:
        self.values['rule_budget'] = self.config.getint('rewriter', 'rule_budget', fallback=10_000)

    def _load_pbe(self) -> None:
        self.values['pool_chunk'] = self.config.getint('pbe', 'pool_chunk', fallback=1_000)
        self.values['prefill_candidates'] = self.config.getint('pbe', 'prefill_candidates', fallback=2_000)

    def _load_loops(self) -> None:
        """Load inner loop limits for instantiation and constant repair"""
        self.values['max_cegqi_iterations'] = self.config.getint('cegqi', 'max_iterations', fallback=64)
        self.values['max_repair_rounds'] = self.config.getint('repair', 'max_rounds', fallback=32)

    def reload(self) -> None:
        """Reload all configuration settings"""
        self.config = ConfigParser()
        self._load_config()
