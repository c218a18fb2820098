"""
Utility modules for lumedepth
"""
from .logger import setup_logger, get_log_file_path, LoggerMixin
from .history_tracker import LossHistory, HistoryEntry
from .progress_tracker import ProgressTracker

__all__ = [
    'setup_logger',
    'get_log_file_path',
    'LoggerMixin',
    'LossHistory',
    'HistoryEntry',
    'ProgressTracker',
]
