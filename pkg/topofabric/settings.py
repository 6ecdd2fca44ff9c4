"""
Environment-backed settings.

Values come from ``FABRIC_*`` environment variables (a ``.env`` file is honoured). Library code
reads them with ``getattr(get_settings(), "FABRIC_X", default)``.
"""

import os

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

# Lazy initialization so that tests can patch the environment before first use
_settings = None


class FabricSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    FABRIC_LOG: str = Field(default="WARNING", description="Log level for the topofabric logger")
    FABRIC_PINV_RTOL: float = Field(
        default=1e-12, gt=0, description="Relative cutoff for pseudoinverse singular values"
    )
    FABRIC_PROJECTION_TOL: float = Field(
        default=1e-10, gt=0, description="Feasibility tolerance after an affine projection"
    )
    FABRIC_SAMPLING_PERIOD: float = Field(
        default=1e-3, gt=0, description="Default sampling period of simulations (s)"
    )
    FABRIC_GRID_POINTS_PER_DECADE: int = Field(
        default=400, gt=0, description="Frequency grid density for margin scans"
    )


def _prepare_settings() -> FabricSettings:
    load_dotenv()
    values = {
        name: os.environ[name] for name in FabricSettings.model_fields if name in os.environ
    }
    return FabricSettings.model_validate(values)


def get_settings() -> FabricSettings:
    """Return the process-wide settings, reading the environment on first use."""
    global _settings
    if _settings is None:
        _settings = _prepare_settings()
    return _settings


def reset_settings() -> None:
    """Forget cached settings so the next ``get_settings`` call re-reads the environment."""
    global _settings
    _settings = None
