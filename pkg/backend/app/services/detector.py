"""
Uplink Data Detection - Centralized baselines and decentralized ADMM / CG equalizers.

The base station receives ``y = H s + n`` with ``H`` split row-wise into ``C``
antenna clusters. Each cluster ``c`` only ever sees its own ``H_c`` and ``y_c``;
the detectors below exchange nothing but consensus vectors of length ``U``
(per subcarrier and symbol vector) through the cluster runtime.

Decentralized ADMM (consensus form):
    preprocessing  A_c^-1 = (H_c H_c^H + rho I_S)^-1  and  y_reg = H_c^H A_c^-1 y_c   (S <= U)
                   B_c^-1 = (H_c^H H_c + rho I_U)^-1  and  y_reg = B_c^-1 H_c^H y_c   (S >  U)
    init           lambda_c = 0, z_c = y_reg, s = prox(sum_c z_c / C)       one round
    iterate        lambda_c += gamma (z_c - s)
                   z_c = y_reg + rho (H_c^H H_c + rho I)^-1 (s - lambda_c)
                   s = prox(sum_c (z_c + lambda_c) / C)                     one round

    The dual update adds ``gamma (z - s)``, which is the multiplier step
    ``lambda - gamma (s - z)`` written with the opposite operand order.

Decentralized CG on (rho I + H^H H) x = H^H y:
    preprocessing  y_mrc = sum_c H_c^H y_c                                  one round
    iterate        e = rho p + sum_c H_c^H (H_c p)                          one round
                   alpha = |r|^2 / p^H e, x += alpha p, r -= alpha e
                   beta = |r_new|^2 / |r_old|^2, p = r + beta p
    Every cluster keeps its own copy of x, r, p and the scalars; all copies
    evolve identically because they are driven by the same consensus sums.

Array conventions:
    ``H_c`` is ``S x U`` or ``n_sc x S x U``. ``y_c`` is a vector (``S`` or
    ``n_sc x S``) or a block of symbol vectors (``S x K`` or ``n_sc x S x K``);
    outputs mirror the layout of ``y_c`` with ``S`` replaced by ``U``.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.channel import ClusteredChannel, Link
from ..core.errors import DimensionError, ParameterError
from ..core.numeric import Side, as_columns, as_complex, herm, hpd_solve, reg_inverse, restore_columns
from ..core.performance import time_operation
from ..core.runtime import ClusterContext, ConsensusRuntime
from ..schemas.params import AdmmParams, InverseMode, Regularizer, preferred_mode

logger = logging.getLogger(__name__)


def _check_rows(H: np.ndarray, y: np.ndarray) -> None:
    if y.shape[-2] != H.shape[-2] or y.shape[:-2] != H.shape[:-2]:
        raise DimensionError(f"receive data of shape {y.shape} does not fit channel of shape {H.shape}")


# Centralized baselines

def mmse_centralized(H, y, No: float, Es: float = 1.0) -> np.ndarray:
    """Linear MMSE estimate ``(H^H H + (No/Es) I)^-1 H^H y``."""
    H = as_complex(H)
    y_cols, vector = as_columns(H, y)
    _check_rows(H, y_cols)
    if No < 0 or not Es > 0:
        raise ParameterError(f"need No >= 0 and Es > 0, got No={No}, Es={Es}")
    U = H.shape[-1]
    system = herm(H) @ H + (No / Es) * np.eye(U, dtype=np.complex128)
    return restore_columns(hpd_solve(system, herm(H) @ y_cols), vector)


def zf_centralized_detect(H, y) -> np.ndarray:
    """Zero-forcing estimate ``(H^H H)^-1 H^H y``."""
    return mmse_centralized(H, y, No=0.0)


def mrc_centralized(H, y) -> np.ndarray:
    """Maximum-ratio combining with per-user gain normalization."""
    H = as_complex(H)
    y_cols, vector = as_columns(H, y)
    _check_rows(H, y_cols)
    gains = np.sum(np.abs(H) ** 2, axis=-2)[..., :, None]
    return restore_columns((herm(H) @ y_cols) / gains, vector)


# Proximal maps of the s-update

def prox(v, reg, C: int, rho: float, No: float = 0.0, Es: float = 1.0, r: Optional[float] = None) -> np.ndarray:
    """Apply the regularizer's proximal map to the consensus average ``v``."""
    v = as_complex(v)
    reg = Regularizer(reg)
    if reg is Regularizer.ZF:
        return v.copy()
    if reg is Regularizer.MMSE:
        return (C * rho * Es / (No + C * rho * Es)) * v
    if r is None or not r > 0:
        raise ParameterError(f"{reg.value} regularizer needs a positive box radius, got {r}")
    real = np.clip(v.real, -r, r)
    if reg is Regularizer.BPSK:
        return real.astype(np.complex128)
    return real + 1j * np.clip(v.imag, -r, r)


# Decentralized ADMM

@dataclass(eq=False)
class AdmmClusterState:
    """Local iterates of one cluster."""
    z: np.ndarray
    lam: np.ndarray
    y_reg: np.ndarray
    inv: np.ndarray
    mode: InverseMode
    H: np.ndarray
    rho: float


def admm_preprocess(H_c, y_c, rho: float, mode: Optional[InverseMode] = None) -> AdmmClusterState:
    """Regularized inverse and regularized estimate of one cluster; ``z = y_reg``, ``lambda = 0``."""
    if not rho > 0:
        raise ParameterError(f"ADMM penalty rho must be positive, got {rho}")
    H_c = as_complex(H_c)
    y_cols, vector = as_columns(H_c, y_c)
    _check_rows(H_c, y_cols)
    S, U = H_c.shape[-2:]
    mode = InverseMode(mode) if mode is not None else preferred_mode(S, U)

    if mode is InverseMode.SXS:
        inv = reg_inverse(H_c, rho, Side.ROWS)
        y_reg = herm(H_c) @ (inv @ y_cols)
    else:
        inv = reg_inverse(H_c, rho, Side.COLS)
        y_reg = inv @ (herm(H_c) @ y_cols)

    y_reg = restore_columns(y_reg, vector)
    return AdmmClusterState(
        z=y_reg.copy(),
        lam=np.zeros_like(y_reg),
        y_reg=y_reg,
        inv=inv,
        mode=mode,
        H=H_c,
        rho=rho,
    )


def admm_z_update(state: AdmmClusterState, s: np.ndarray) -> np.ndarray:
    """Local least-squares step: ``z = y_reg + rho (H^H H + rho I)^-1 (s - lambda)``."""
    d = s - state.lam
    if state.mode is InverseMode.SXS:
        H = state.H
        return state.y_reg + d - herm(H) @ (state.inv @ (H @ d))
    return state.y_reg + state.rho * (state.inv @ d)


def _resolve_box_radius(params: AdmmParams) -> Optional[float]:
    if params.regularizer in (Regularizer.BOX, Regularizer.BPSK) and params.box_radius is None:
        raise ParameterError(f"{params.regularizer.value} regularizer needs box_radius")
    return params.box_radius


def _check_clusters(clusters: ClusteredChannel, y_parts: Sequence, runtime: ConsensusRuntime, link: Link) -> None:
    if clusters.link is not link:
        raise DimensionError(f"expected {link.value} cluster blocks, got {clusters.link.value}")
    if len(y_parts) != clusters.C:
        raise DimensionError(f"got {len(y_parts)} data parts for {clusters.C} clusters")
    if runtime.C != clusters.C:
        raise DimensionError(f"runtime has {runtime.C} clusters, channel has {clusters.C}")


def _cluster_contexts(clusters: ClusteredChannel, y_parts: Sequence) -> Tuple[List[ClusterContext], bool]:
    contexts = []
    vector = False
    for c, (H_c, y_c) in enumerate(zip(clusters, y_parts)):
        H_c = as_complex(H_c)
        y_cols, vector = as_columns(H_c, y_c)
        _check_rows(H_c, y_cols)
        contexts.append(ClusterContext(c, H=H_c, y=y_cols))
    return contexts, vector


@time_operation("detect.admm")
def admm_detect(
    clusters: ClusteredChannel,
    y_parts: Sequence,
    params: AdmmParams,
    runtime: ConsensusRuntime,
    mode: Optional[InverseMode] = None,
) -> np.ndarray:
    """Decentralized ADMM detection; returns the consensus iterate after ``t_max`` iterations."""
    _check_clusters(clusters, y_parts, runtime, Link.UPLINK)
    r = _resolve_box_radius(params)
    C = clusters.C
    contexts, vector = _cluster_contexts(clusters, y_parts)

    def shrink(total: np.ndarray) -> np.ndarray:
        return prox(total / C, params.regularizer, C, params.rho, params.No, params.Es, r)

    def make_program(ctx: ClusterContext):
        def program():
            state = admm_preprocess(ctx["H"], ctx["y"], params.rho, mode)
            ctx["state"] = state
            s = shrink((yield state.z))
            for _ in range(2, params.t_max + 1):
                state.lam = state.lam + params.gamma * (state.z - s)
                state.z = admm_z_update(state, s)
                s = shrink((yield state.z + state.lam))
            return s
        return program

    outputs = runtime.run_decentralized([make_program(ctx) for ctx in contexts])
    logger.debug(
        f"ADMM detection: C={C}, T={params.t_max}, reg={params.regularizer.value}, "
        f"rounds so far={runtime.record.rounds}"
    )
    return restore_columns(outputs[0], vector)


# Decentralized conjugate gradients

@dataclass(eq=False)
class CgState:
    """One cluster's copy of the CG iterates."""
    x: np.ndarray
    r: np.ndarray
    p: np.ndarray
    e: np.ndarray
    w: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @classmethod
    def initial(cls, y_mrc: np.ndarray) -> "CgState":
        zeros = np.zeros_like(y_mrc)
        scalar = np.zeros(y_mrc.shape[:-2] + (1,) + y_mrc.shape[-1:], dtype=np.complex128)
        return cls(x=zeros, r=y_mrc.copy(), p=y_mrc.copy(), e=zeros.copy(), w=zeros.copy(),
                   alpha=scalar, beta=scalar.real.copy())


def _energy(v: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(v) ** 2, axis=-2, keepdims=True)


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(num.shape, den.shape), dtype=np.result_type(num, den))
    np.divide(num, den, out=out, where=den != 0)
    return out


def cg_step(state: CgState, rho: float, w: np.ndarray) -> CgState:
    """Advance one CG iteration given the consensus sum ``w = sum_c H_c^H H_c p``."""
    e = rho * state.p + w
    rr_old = _energy(state.r)
    alpha = _safe_ratio(rr_old.astype(np.complex128), np.sum(np.conj(state.p) * e, axis=-2, keepdims=True))
    x = state.x + alpha * state.p
    r = state.r - alpha * e
    beta = _safe_ratio(_energy(r), rr_old)
    p = r + beta * state.p
    return CgState(x=x, r=r, p=p, e=e, w=w, alpha=alpha, beta=beta)


def cg_centralized(H, y, rho: float, t_max: int) -> np.ndarray:
    """Reference CG on the full channel, ``e = rho p + H^H (H p)``."""
    if rho < 0:
        raise ParameterError(f"CG loading rho must be nonnegative, got {rho}")
    H = as_complex(H)
    y_cols, vector = as_columns(H, y)
    _check_rows(H, y_cols)
    state = CgState.initial(herm(H) @ y_cols)
    for _ in range(t_max):
        state = cg_step(state, rho, herm(H) @ (H @ state.p))
    return restore_columns(state.x, vector)


def cg_detect_states(
    clusters: ClusteredChannel,
    y_parts: Sequence,
    rho: float,
    t_max: int,
    runtime: ConsensusRuntime,
) -> List[CgState]:
    """Run decentralized CG and return every cluster's final copy of the iterates."""
    if rho < 0:
        raise ParameterError(f"CG loading rho must be nonnegative, got {rho}")
    if t_max < 1:
        raise ParameterError(f"CG needs at least one iteration, got {t_max}")
    _check_clusters(clusters, y_parts, runtime, Link.UPLINK)
    contexts, _ = _cluster_contexts(clusters, y_parts)

    def make_program(ctx: ClusterContext):
        def program():
            H_c = ctx["H"]
            state = CgState.initial((yield herm(H_c) @ ctx["y"]))
            for _ in range(t_max):
                w = yield herm(H_c) @ (H_c @ state.p)
                state = cg_step(state, rho, w)
            ctx["state"] = state
            return state
        return program

    return runtime.run_decentralized([make_program(ctx) for ctx in contexts])


@time_operation("detect.cg")
def cg_detect(
    clusters: ClusteredChannel,
    y_parts: Sequence,
    rho: float,
    t_max: int,
    runtime: ConsensusRuntime,
) -> np.ndarray:
    """Decentralized CG detection; returns cluster 0's copy of ``x`` (all copies agree)."""
    states = cg_detect_states(clusters, y_parts, rho, t_max, runtime)
    vector = np.ndim(y_parts[0]) == np.ndim(clusters[0]) - 1
    return restore_columns(states[0].x, vector)
