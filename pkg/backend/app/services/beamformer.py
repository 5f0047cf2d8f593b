"""
Downlink Beamforming - Centralized zero-forcing and decentralized ADMM precoding.

Downlink blocks are the transposes of the uplink blocks, ``H_c = (H_c^u)^T``
of size ``U x S``, so the received vector at the users is
``y = sum_c H_c x_c + n``. Each cluster computes its own ``x_c``.

ADMM beamforming minimizes ``1/2 ||x||^2`` subject to ``||s - H x|| <= epsilon``:
    preprocessing  A_c^-1 = (H_c^H H_c + rho^-1 I_S)^-1   (S <= U)
                   B_c^-1 = (H_c H_c^H + rho^-1 I_U)^-1   (S >  U)
    init           z_c = max(U/B, 1/C) s, lambda_c = 0, x_c from z_c      no traffic
    iterate        m_c = H_c x_c, w_c = m_c - lambda_c
                   z_c = projection of w_c given sum_c w_c                one round
                   lambda_c -= gamma (m_c - z_c)
                   x_c = A_c^-1 H_c^H (z_c + lambda_c)  or  H_c^H B_c^-1 (z_c + lambda_c)

The projection shrinks ``s - sum_c w_c`` by ``max(0, 1 - epsilon / ||s - sum_c w_c||)``
and shares the correction equally among clusters; with ``epsilon = 0`` it reduces
to ``z_c = w_c + s/C - v``.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..core.channel import ClusteredChannel, Link
from ..core.errors import DimensionError, ParameterError
from ..core.numeric import Side, as_columns, as_complex, herm, hpd_solve, reg_inverse, restore_columns
from ..core.performance import time_operation
from ..core.runtime import ClusterContext, ConsensusRuntime
from ..schemas.params import BfParams, InverseMode, preferred_mode

logger = logging.getLogger(__name__)


def zf_centralized(H, s) -> np.ndarray:
    """Minimum-norm exact precoder ``H^H (H H^H)^-1 s`` for a ``U x B`` downlink channel."""
    H = as_complex(H)
    s_cols, vector = as_columns(H, s)
    if s_cols.shape[-2] != H.shape[-2]:
        raise DimensionError(f"symbol block of shape {s_cols.shape} does not fit channel of shape {H.shape}")
    return restore_columns(herm(H) @ hpd_solve(H @ herm(H), s_cols), vector)


@dataclass(eq=False)
class BfClusterState:
    """Local iterates of one cluster."""
    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    inv: np.ndarray
    mode: InverseMode
    H: np.ndarray


def init_scale(U: int, B: int, C: int) -> float:
    return max(U / B, 1.0 / C)


def bf_local_precode(state: BfClusterState, target: np.ndarray) -> np.ndarray:
    """``x_c`` for the local target ``z_c + lambda_c``."""
    H = state.H
    if state.mode is InverseMode.SXS:
        return state.inv @ (herm(H) @ target)
    return herm(H) @ (state.inv @ target)


def bf_preprocess(
    H_c,
    s,
    params: BfParams,
    C: int,
    B: int,
    U: int,
    mode: Optional[InverseMode] = None,
) -> BfClusterState:
    """Regularized inverse and first local precoder of one cluster."""
    if not params.rho > 0:
        raise ParameterError(f"beamforming penalty rho must be positive, got {params.rho}")
    H_c = as_complex(H_c)
    s_cols, vector = as_columns(H_c, s)
    U_c, S = H_c.shape[-2:]
    if U_c != U:
        raise DimensionError(f"downlink block has {U_c} user rows, expected {U}")
    mode = InverseMode(mode) if mode is not None else preferred_mode(S, U)

    if mode is InverseMode.SXS:
        inv = reg_inverse(H_c, 1.0 / params.rho, Side.COLS)
    else:
        inv = reg_inverse(H_c, 1.0 / params.rho, Side.ROWS)

    z = init_scale(U, B, C) * s_cols
    state = BfClusterState(x=np.empty(0), z=z, lam=np.zeros_like(z), inv=inv, mode=mode, H=H_c)
    state.x = bf_local_precode(state, z)
    if vector:
        state.x, state.z, state.lam = state.x[..., 0], state.z[..., 0], state.lam[..., 0]
    return state


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=-2, keepdims=True))


def project_local(w_c: np.ndarray, total: np.ndarray, s: np.ndarray, epsilon: float, C: int) -> np.ndarray:
    """One cluster's share of the feasibility projection, given ``total = sum_c w_c``.

    Operates on column blocks (``... x U x K``); every column is projected on its own.
    """
    gap = s - total
    norm = _norm(gap)
    if epsilon == 0:
        factor = np.ones_like(norm)
    else:
        # columns already within epsilon keep w_c unchanged
        outside = norm > epsilon
        factor = np.where(outside, 1.0 - epsilon / np.where(outside, norm, 1.0), 0.0)
    return w_c + factor * (s / C - total / C)


def consensus_project(w_list: Sequence, s, epsilon: float, C: Optional[int] = None) -> List[np.ndarray]:
    """Project the stacked ``w_c`` onto ``{z : ||s - sum_c z_c|| <= epsilon}``."""
    if epsilon < 0:
        raise ParameterError(f"epsilon must be nonnegative, got {epsilon}")
    C = len(w_list) if C is None else C
    if C != len(w_list):
        raise DimensionError(f"got {len(w_list)} local vectors for {C} clusters")
    s = as_complex(s)
    vector = s.ndim == 1
    s_cols = s[..., None] if vector else s
    w_cols = [as_complex(w)[..., None] if vector else as_complex(w) for w in w_list]
    total = w_cols[0].copy()
    for w in w_cols[1:]:
        total += w
    return [restore_columns(project_local(w, total, s_cols, epsilon, C), vector) for w in w_cols]


@time_operation("beamform.admm")
def admm_beamform(
    clusters: ClusteredChannel,
    s,
    params: BfParams,
    runtime: ConsensusRuntime,
    mode: Optional[InverseMode] = None,
) -> List[np.ndarray]:
    """Decentralized ADMM beamforming; returns the local precoders ``x_c`` in cluster order."""
    if clusters.link is not Link.DOWNLINK:
        raise DimensionError("beamforming expects downlink cluster blocks (U x S)")
    if runtime.C != clusters.C:
        raise DimensionError(f"runtime has {runtime.C} clusters, channel has {clusters.C}")
    C, U, B = clusters.C, clusters.U, clusters.B
    s_cols, vector = as_columns(as_complex(clusters[0]), s)
    if s_cols.shape[-2] != U:
        raise DimensionError(f"symbol block of shape {np.shape(s)} does not match U={U}")
    contexts = [ClusterContext(c, H=as_complex(H_c)) for c, H_c in enumerate(clusters)]

    def make_program(ctx: ClusterContext):
        def program():
            state = bf_preprocess(ctx["H"], s_cols, params, C, B, U, mode)
            ctx["state"] = state
            for _ in range(2, params.t_max + 1):
                m = state.H @ state.x
                w_c = m - state.lam
                total = yield w_c
                state.z = project_local(w_c, total, s_cols, params.epsilon, C)
                state.lam = state.lam - params.gamma * (m - state.z)
                state.x = bf_local_precode(state, state.z + state.lam)
            return state.x
        return program

    outputs = runtime.run_decentralized([make_program(ctx) for ctx in contexts])
    logger.debug(f"ADMM beamforming: C={C}, T={params.t_max}, eps={params.epsilon}")
    return [restore_columns(x, vector) for x in outputs]


def transmit(clusters: ClusteredChannel, x_parts: Sequence, noise=None) -> np.ndarray:
    """Received user signal ``y = sum_c H_c x_c + n``."""
    if clusters.link is not Link.DOWNLINK:
        raise DimensionError("transmit expects downlink cluster blocks (U x S)")
    if len(x_parts) != clusters.C:
        raise DimensionError(f"got {len(x_parts)} precoder parts for {clusters.C} clusters")
    y = None
    for H_c, x_c in zip(clusters, x_parts):
        H_c = as_complex(H_c)
        x_cols, vector = as_columns(H_c.swapaxes(-1, -2), x_c)
        part = H_c @ x_cols
        y = part if y is None else y + part
    y = restore_columns(y, vector)
    if noise is not None:
        y = y + as_complex(noise)
    return y
