import os
import logging
from dotenv import find_dotenv, load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = "results"
DEFAULT_DENSE_CAP = 2048
DEFAULT_RADIUS_CAP = 256
DEFAULT_WORKERS = 1


class ConfigManager:
    """
    Manages configuration settings loaded from environment variables (and a .env file if present).

    Attributes:
        output_dir (str): Default directory for experiment reports.
        dense_cap (int): Largest n accepted by dense_matrix and the dense spectral engine.
        radius_cap (int): Largest n accepted by the spectral-radius sanity path.
        workers (int): Default number of worker processes for Monte Carlo experiments.
    """
    def __init__(self):
        """
        Initializes the ConfigManager by loading environment variables and validating each setting.

        Raises:
            ValueError: If a variable is set but malformed (non-integer or non-positive).
        """
        load_dotenv(find_dotenv(usecwd=True), override=True)
        self.output_dir = self._get_output_dir()
        self.dense_cap = self._get_positive_int('SPARSE_LDP_DENSE_CAP', DEFAULT_DENSE_CAP)
        self.radius_cap = self._get_positive_int('SPARSE_LDP_RADIUS_CAP', DEFAULT_RADIUS_CAP)
        self.workers = self._get_positive_int('SPARSE_LDP_WORKERS', DEFAULT_WORKERS)

    def _get_output_dir(self) -> str:
        """
        Retrieves the default output directory.

        Returns:
            str: The directory name, DEFAULT_OUTPUT_DIR when the variable is unset.

        Raises:
            ValueError: If the value has leading/trailing whitespace.
        """
        output_dir = os.getenv('SPARSE_LDP_OUTPUT_DIR')
        if not output_dir:
            return DEFAULT_OUTPUT_DIR
        if output_dir.strip() != output_dir:
            raise ValueError(
                "SPARSE_LDP_OUTPUT_DIR has leading/trailing spaces. Please remove them in your .env file."
            )
        return output_dir

    def _get_positive_int(self, name: str, default: int) -> int:
        """
        Retrieves a positive integer setting.

        Args:
            name (str): Environment variable name.
            default (int): Value used when the variable is unset or empty.

        Returns:
            int: The parsed value.

        Raises:
            ValueError: If the value is not a positive integer.
        """
        raw = os.getenv(name)
        if raw is None or not raw.strip():
            return default
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{name} must be an integer, got {raw!r}.") from None
        if value <= 0:
            raise ValueError(f"{name} must be positive, got {value}.")
        if value != default:
            logger.debug("%s overridden to %d", name, value)
        return value


_config = None


def get_config() -> ConfigManager:
    """
    Returns a process-wide ConfigManager, creating it on first use.

    Returns:
        ConfigManager: The shared configuration.
    """
    global _config
    if _config is None:
        _config = ConfigManager()
    return _config
