"""
Structured logging utilities for lumedepth
"""
import logging
import sys
from pathlib import Path
from typing import Optional
from datetime import datetime

FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
CONSOLE_FORMAT = '%(message)s'


def setup_logger(
    name: str,
    log_file: Optional[Path] = None,
    level: int = logging.INFO,
    format_string: Optional[str] = None,
    console_level: Optional[int] = None,
) -> logging.Logger:
    """
    Set up a logger with console and optional file handlers

    Args:
        name: Logger name (typically __name__ or the package root "src")
        log_file: Optional path to log file
        level: Logging level (default: INFO)
        format_string: Optional custom format string for the file handler
        console_level: Console threshold; defaults to `level` (--quiet passes WARNING)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(min(level, console_level or level))

    # Avoid duplicate handlers
    if logger.handlers:
        for handler in logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                handler.setLevel(console_level or level)
        return logger

    # Console carries progress only; timestamps stay in the log file
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(console_level or level)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    logger.addHandler(console_handler)

    # File handler (if log file specified)
    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(format_string or FILE_FORMAT))
        logger.addHandler(file_handler)

    return logger


def get_log_file_path(project_root: Path, log_name: str = "pipeline") -> Path:
    """
    Get standard log file path

    Args:
        project_root: Project root directory
        log_name: Name of log file (without extension)

    Returns:
        Path to log file
    """
    logs_dir = project_root / "logs"
    logs_dir.mkdir(exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d")
    return logs_dir / f"{log_name}_{timestamp}.log"


class LoggerMixin:
    """Mixin class to add logging capability to any class"""

    @property
    def logger(self) -> logging.Logger:
        """Get logger for this class"""
        if not hasattr(self, '_logger'):
            self._logger = logging.getLogger(f"{self.__class__.__module__}.{self.__class__.__name__}")
        return self._logger
