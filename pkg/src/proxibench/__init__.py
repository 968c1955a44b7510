"""proxibench: synthetic egocentric scenes, spatial QA generation, and scoring."""

from .errors import ProxibenchError

__version__ = "0.1.0"

__all__ = ["ProxibenchError", "__version__"]
