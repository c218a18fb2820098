"""
Configuration management for lumedepth
Centralizes run settings, paths and rendering defaults
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
import os

import psutil
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

THREADS_ENV_VAR = "LUMEDEPTH_THREADS"


@dataclass
class PathsConfig:
    """Configuration for file paths"""
    project_root: Path
    logs_dir: Path

    def __post_init__(self):
        """Create directories if they don't exist"""
        self.logs_dir.mkdir(parents=True, exist_ok=True)


def _default_workers() -> int:
    env_value = os.getenv(THREADS_ENV_VAR)
    if env_value:
        try:
            return int(env_value)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {env_value!r}")
    return psutil.cpu_count(logical=False) or 1


@dataclass
class ProcessingConfig:
    """Configuration for processing parameters"""
    max_workers: int = field(default_factory=_default_workers)  # --threads overrides
    quiet: bool = False  # --quiet: console shows warnings and errors only


@dataclass
class RenderDefaults:
    """Photometric defaults applied when a light JSON omits a field"""
    gamma: float = 2.2
    sigma0: float = 1.0  # arbitrary radiance scale
    gain: float = 1.0
    mu: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)  # optical axis


@dataclass
class Config:
    """Main configuration class combining all configs"""
    paths: PathsConfig
    processing: ProcessingConfig = field(default_factory=ProcessingConfig)
    render: RenderDefaults = field(default_factory=RenderDefaults)

    @classmethod
    def from_project_root(cls, project_root: Optional[Path] = None) -> "Config":
        """
        Create configuration from project root

        Args:
            project_root: Path to project root. If None, auto-detects from this file.

        Returns:
            Config instance
        """
        if project_root is None:
            # src/config.py -> src/ -> project root
            project_root = Path(__file__).parent.parent

        project_root = Path(project_root)

        paths = PathsConfig(
            project_root=project_root,
            logs_dir=project_root / "logs",
        )

        return cls(
            paths=paths,
            processing=ProcessingConfig(),
            render=RenderDefaults(),
        )

    def with_threads(self, threads: Optional[int]) -> "Config":
        """Apply a --threads override, keeping the env/default value when None"""
        if threads is not None:
            self.processing.max_workers = threads
        return self

    def validate(self) -> bool:
        """
        Validate configuration

        Returns:
            True if valid, raises ValueError if invalid
        """
        if self.processing.max_workers < 1:
            raise ValueError(
                f"max_workers must be >= 1, got {self.processing.max_workers}"
            )
        if self.render.gamma < 1:
            raise ValueError(f"default gamma must be >= 1, got {self.render.gamma}")
        return True


# Global config instance (can be overridden)
_config: Optional[Config] = None


def get_config(project_root: Optional[Path] = None) -> Config:
    """
    Get global configuration instance

    Args:
        project_root: Optional project root path

    Returns:
        Config instance
    """
    global _config
    if _config is None:
        _config = Config.from_project_root(project_root)
    return _config


def set_config(config: Config) -> None:
    """
    Set global configuration instance

    Args:
        config: Config instance to use
    """
    global _config
    _config = config
