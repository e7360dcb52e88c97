"""
Centralized configuration for the correction framework.

This module provides a single source of truth for the settings shared by the
normalizer, the phonetic corrector, the corpus tools, the neural gate and the
command line interface.
"""

import os
import json
import logging
from pathlib import Path
from typing import Optional
from dataclasses import dataclass, asdict

from dotenv import load_dotenv


# Representation and selector names used in config files and on the CLI
class OptionNames:
    """Centralized option names for representations and selectors."""
    REP_PLAIN = 'plain'
    REP_IPA = 'ipa'
    REP_WBET = 'wbet'

    SEL_WIN = 'win'
    SEL_LET = 'let'

    HYP_WITH_CONTEXT = 'with_context'
    HYP_WITHOUT_CONTEXT = 'without_context'


@dataclass
class NormalizerConfig:
    """Text normalization settings."""
    abbreviations_path: Optional[str] = None  # None means the packaged default table


@dataclass
class PhoneticsConfig:
    """Grapheme-to-phoneme rule table locations."""
    ipa_rules_path: Optional[str] = None
    wbet_rules_path: Optional[str] = None


@dataclass
class CorrectorConfig:
    """Default PhoCo hyperparameters."""
    threshold: float = 0.40
    rep: str = OptionNames.REP_IPA
    selector: str = OptionNames.SEL_WIN
    window_slack: int = 1  # window widths n-slack .. n+slack tokens
    let_slack: int = 3  # extra characters grown past the phrase length


@dataclass
class SynthConfig:
    """Synthetic noisy-corpus generator settings."""
    noise_rate: float = 0.3
    seed: int = 0
    max_confusion_distance: float = 0.34


@dataclass
class TrainingConfig:
    """Neural gate architecture and optimizer settings."""
    epochs: int = 2
    batch_size: int = 64
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_seq_len: int = 64
    seed: int = 0
    embedding_dim: int = 128
    hidden_dim: int = 60
    dense_dim: int = 50
    dropout: float = 0.0


@dataclass
class LoggingConfig:
    """Logging configuration settings."""
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_path: Optional[str] = None


@dataclass
class PathsConfig:
    """Path configuration settings."""
    logs_dir: Optional[str] = None  # no log file unless set


class CorrectionFrameworkConfig:
    """
    Centralized configuration manager for the correction framework.

    Sections are read from a JSON file (one object per section), then
    environment variables override individual values.
    """

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialize the configuration manager.

        Args:
            config_file: Path to configuration file (JSON format)
        """
        self.config_file = config_file
        self._load_config()

    def _load_config(self):
        """Load configuration from file or use defaults."""
        if self.config_file and os.path.exists(self.config_file):
            with open(self.config_file, 'r', encoding='utf-8') as f:
                config_data = json.load(f)
        else:
            config_data = {}

        self.normalizer = NormalizerConfig(**config_data.get('normalizer', {}))
        self.phonetics = PhoneticsConfig(**config_data.get('phonetics', {}))
        self.corrector = CorrectorConfig(**config_data.get('corrector', {}))
        self.synth = SynthConfig(**config_data.get('synth', {}))
        self.training = TrainingConfig(**config_data.get('training', {}))
        self.logging = LoggingConfig(**config_data.get('logging', {}))
        self.paths = PathsConfig(**config_data.get('paths', {}))

        self._load_from_env()

    def _load_from_env(self):
        """Load configuration from environment variables (and a .env file)."""
        load_dotenv()

        # Logging
        if os.getenv('PHOCO_LOG_LEVEL'):
            self.logging.level = os.getenv('PHOCO_LOG_LEVEL')
        if os.getenv('PHOCO_LOG_FORMAT'):
            self.logging.format = os.getenv('PHOCO_LOG_FORMAT')

        # Paths
        if os.getenv('PHOCO_LOGS_DIR'):
            self.paths.logs_dir = os.getenv('PHOCO_LOGS_DIR')

        # Reproducibility and corrector defaults
        if os.getenv('PHOCO_SEED'):
            seed = int(os.getenv('PHOCO_SEED'))
            self.training.seed = seed
            self.synth.seed = seed
        if os.getenv('PHOCO_THRESHOLD'):
            self.corrector.threshold = float(os.getenv('PHOCO_THRESHOLD'))

    def save_config(self, config_file: Optional[str] = None):
        """Save current configuration to file."""
        if config_file is None:
            config_file = self.config_file

        if config_file:
            config_data = {
                'normalizer': asdict(self.normalizer),
                'phonetics': asdict(self.phonetics),
                'corrector': asdict(self.corrector),
                'synth': asdict(self.synth),
                'training': asdict(self.training),
                'logging': asdict(self.logging),
                'paths': asdict(self.paths),
            }

            parent = os.path.dirname(config_file)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(config_file, 'w', encoding='utf-8') as f:
                json.dump(config_data, f, indent=2)

    def get_log_file_path(self, component: str) -> Optional[str]:
        """Get log file path for a specific component, or None for stderr only."""
        if self.logging.file_path:
            return self.logging.file_path
        if not self.paths.logs_dir:
            return None

        log_dir = Path(self.paths.logs_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        return str(log_dir / f"{component}.log")

    def validate(self) -> bool:
        """Validate configuration settings."""
        problems = []
        if not 0.0 <= self.corrector.threshold <= 1.0:
            problems.append(f"corrector.threshold out of [0, 1]: {self.corrector.threshold}")
        if self.corrector.rep not in (OptionNames.REP_PLAIN, OptionNames.REP_IPA, OptionNames.REP_WBET):
            problems.append(f"corrector.rep unknown: {self.corrector.rep}")
        if self.corrector.selector not in (OptionNames.SEL_WIN, OptionNames.SEL_LET):
            problems.append(f"corrector.selector unknown: {self.corrector.selector}")
        if self.corrector.window_slack < 0 or self.corrector.let_slack < 0:
            problems.append("corrector.window_slack and corrector.let_slack must be non-negative")
        if not 0.0 <= self.synth.noise_rate <= 1.0:
            problems.append(f"synth.noise_rate out of [0, 1]: {self.synth.noise_rate}")
        for name in ('epochs', 'batch_size', 'max_seq_len', 'embedding_dim', 'hidden_dim', 'dense_dim'):
            if getattr(self.training, name) <= 0:
                problems.append(f"training.{name} must be positive")
        if self.training.learning_rate <= 0:
            problems.append("training.learning_rate must be positive")
        if not 0.0 <= self.training.dropout < 1.0:
            problems.append(f"training.dropout out of [0, 1): {self.training.dropout}")

        for problem in problems:
            logging.error(f"Invalid configuration: {problem}")
        if problems:
            return False

        if self.paths.logs_dir:
            try:
                os.makedirs(self.paths.logs_dir, exist_ok=True)
            except OSError as e:
                logging.error(f"Error creating directory {self.paths.logs_dir}: {e}")
                return False

        return True


# Global configuration instance
config = CorrectionFrameworkConfig(os.getenv('PHOCO_CONFIG_FILE'))


def get_config() -> CorrectionFrameworkConfig:
    """Get the global configuration instance."""
    return config


def set_config_file(config_file: str):
    """Set the configuration file and reload configuration."""
    global config
    config = CorrectionFrameworkConfig(config_file)
