"""
Algorithm Parameter Schemas - Validated knobs for ADMM/CG detection and ADMM beamforming.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class Regularizer(str, Enum):
    """Prior used by the ADMM s-update."""
    ZF = "zf"
    MMSE = "mmse"
    BOX = "box"
    BPSK = "bpsk"


class InverseMode(str, Enum):
    """Size of the per-cluster regularized inverse."""
    SXS = "SxS"
    UXU = "UxU"


class AdmmParams(BaseModel):
    """Parameters of decentralized ADMM data detection."""
    rho: float = Field(default=1.0, gt=0, description="ADMM penalty parameter")
    gamma: float = Field(default=1.0, gt=0, description="Dual step size")
    t_max: int = Field(default=3, ge=1, description="Number of ADMM iterations")
    regularizer: Regularizer = Field(default=Regularizer.MMSE, description="Prior applied in the s-update")
    box_radius: Optional[float] = Field(
        default=None, gt=0, description="Hypercube radius for BOX/BPSK; defaults to the constellation's"
    )
    No: float = Field(default=0.0, ge=0, description="Complex noise variance")
    Es: float = Field(default=1.0, gt=0, description="Per-user symbol energy")

    class Config:
        json_schema_extra = {
            "example": {"rho": 1.0, "gamma": 1.0, "t_max": 3, "regularizer": "mmse", "No": 0.1, "Es": 1.0}
        }


class BfParams(BaseModel):
    """Parameters of decentralized ADMM beamforming."""
    rho: float = Field(default=1.0, gt=0, description="ADMM penalty parameter")
    gamma: float = Field(default=1.0, gt=0, description="Dual step size")
    t_max: int = Field(default=3, ge=1, description="Number of ADMM iterations")
    epsilon: float = Field(default=0.0, ge=0, description="Allowed multi-user interference norm")


def preferred_mode(S: int, U: int) -> InverseMode:
    """Invert the smaller Gram matrix: ``S x S`` when ``S <= U``."""
    return InverseMode.SXS if S <= U else InverseMode.UXU
