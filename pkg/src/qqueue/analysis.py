"""
Semistability checks, spectral classification and classical reduction.

Two convergence criteria are offered. The per-state check follows
``||p_{t} - p_{t-1}||_1`` along one trajectory. The operator-level check
follows ``||C Φ^t - C Φ^{t-1}||`` in the induced 1-norm (maximum absolute
column sum), which bounds the per-state difference for every initial state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    KrausChannel,
    SpectrumReport,
    _gate,
    apply,
    apply_adjoint,
    compose,
    jamiolkowski,
    spectrum,
    superoperator,
    superoperator_sparse,
    tp_check,
)
from .errors import NumericalError
from .evolution import REHERMITIZE_EVERY, _hermitize, measurement_map, queue_distribution
from .queue import CoinSpec, QueueDims, coin_kraus

__all__ = [
    "CONFIRMATION_WINDOW",
    "SemistabilityReport",
    "SpectrumReport",
    "StochasticMatrix",
    "check_semistability_per_state",
    "semistability_from_distributions",
    "check_semistability_operator",
    "classify_spectrum",
    "extract_stochastic_matrix",
    "total_variation",
]

CONFIRMATION_WINDOW = 10
TAIL = 20
STOCHASTIC_TOL = 1e-8


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@dataclass
class SemistabilityReport:
    """Outcome of a convergence check.

    ``norm_history`` holds ``(t, ||X_t - X_{t-1}||)`` for ``t >= 1``.
    ``t_stop`` is the first step from which ``window`` consecutive differences
    stay below ``eps``; it is ``None`` when the check did not converge.
    """

    method: str
    eps: float
    converged: bool
    t_stop: int | None
    t_final: int
    final_norm: float
    norm_history: list[tuple[int, float]] = field(default_factory=list)
    oscillatory: bool = False
    final_distribution: np.ndarray | None = None

    def norm_at(self, t: int) -> float:
        for s, v in self.norm_history:
            if s == t:
                return v
        raise KeyError(f"no norm recorded for t={t}")

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "eps": self.eps,
            "converged": self.converged,
            "t_stop": self.t_stop,
            "t_final": self.t_final,
            "final_norm": self.final_norm,
            "oscillatory": self.oscillatory,
            "norm_history": [[t, v] for t, v in self.norm_history],
        }
        if self.final_distribution is not None:
            out["final_distribution"] = [float(x) for x in self.final_distribution]
        return out


def _oscillatory(norms: list[float], eps: float) -> bool:
    # tail average rising over the preceding window signals non-convergence
    if len(norms) < 2 * TAIL:
        return False
    last = float(np.mean(norms[-TAIL:]))
    prev = float(np.mean(norms[-2 * TAIL:-TAIL]))
    return last > prev + eps


class _Tracker:
    def __init__(self, eps: float, window: int):
        self.eps, self.window = eps, window
        self.run = 0
        self.t_stop = None

    def update(self, t: int, norm: float) -> bool:
        if norm <= self.eps:
            self.run += 1
            if self.run >= self.window and self.t_stop is None:
                self.t_stop = t - self.window
        else:
            self.run = 0
            self.t_stop = None
        return self.t_stop is not None


def check_semistability_per_state(step: KrausChannel, rho0, dims: QueueDims, eps: float, t_max: int,
                                  window: int = CONFIRMATION_WINDOW,
                                  stop_on_convergence: bool = True) -> SemistabilityReport:
    """Follow one trajectory until ``||p_t - p_{t-1}||_1 <= eps`` holds for ``window`` steps.

    With ``stop_on_convergence=False`` the run continues to ``t_max`` and the
    convergence verdict reflects the final ``window`` steps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    rho = np.asarray(rho0, dtype=np.complex128)
    p_prev = queue_distribution(rho, dims).probs
    tracker = _Tracker(eps, window)
    history = []
    t = 0
    for t in range(1, t_max + 1):
        rho = apply(step, rho)
        if t % REHERMITIZE_EVERY == 0:
            rho = _hermitize(rho, t)
        p = queue_distribution(rho, dims).probs
        norm = float(np.abs(p - p_prev).sum())
        history.append((t, norm))
        p_prev = p
        if tracker.update(t, norm) and stop_on_convergence:
            break
    norms = [v for _, v in history]
    return SemistabilityReport(
        method="per-state",
        eps=eps,
        converged=tracker.t_stop is not None,
        t_stop=tracker.t_stop,
        t_final=t,
        final_norm=norms[-1] if norms else 0.0,
        norm_history=history,
        oscillatory=_oscillatory(norms, eps),
        final_distribution=p_prev,
    )


def semistability_from_distributions(probs, eps: float, window: int = CONFIRMATION_WINDOW) -> SemistabilityReport:
    """Per-state report computed from a recorded sequence ``p_0 .. p_T``."""
    probs = np.asarray(probs)
    tracker = _Tracker(eps, window)
    history = []
    for t in range(1, len(probs)):
        norm = float(np.abs(probs[t] - probs[t - 1]).sum())
        history.append((t, norm))
        tracker.update(t, norm)
    norms = [v for _, v in history]
    return SemistabilityReport(
        method="per-state",
        eps=eps,
        converged=tracker.t_stop is not None,
        t_stop=tracker.t_stop,
        t_final=len(probs) - 1,
        final_norm=norms[-1] if norms else 0.0,
        norm_history=history,
        oscillatory=_oscillatory(norms, eps),
        final_distribution=probs[-1],
    )


def _superoperator_norms(step: KrausChannel, dims: QueueDims):
    _gate(step.dim)
    s_t = superoperator_sparse(step).T.tocsr()
    m = measurement_map(dims).astype(np.complex128)
    while True:
        m_next = np.asarray(s_t @ m.T).T
        yield float(np.abs(m_next - m).sum(axis=0).max())
        m = m_next


def _heisenberg_norms(step: KrausChannel, dims: QueueDims):
    # row i of C Φ^t equals vec of (Φ^dagger)^t(P_i) transposed; the
    # transpose does not change the column-sum norm
    eye_io = np.eye(dims.coin_dim)
    obs = []
    for i in range(dims.d_q):
        q = np.zeros((dims.d_q, dims.d_q))
        q[i, i] = 1.0
        obs.append(np.kron(eye_io, q).astype(np.complex128))
    while True:
        nxt = [apply_adjoint(step, o) for o in obs]
        diff = sum(np.abs(a - b) for a, b in zip(nxt, obs))
        yield float(diff.max())
        obs = nxt


def check_semistability_operator(step: KrausChannel, dims: QueueDims, eps: float, t_max: int,
                                 window: int = CONFIRMATION_WINDOW, method: str = "superoperator",
                                 stop_on_convergence: bool = True) -> SemistabilityReport:
    """Track ``||C Φ^t - C Φ^{t-1}||`` in the induced 1-norm.

    ``method="superoperator"`` multiplies by the materialized superoperator
    and is refused above the dimension gate. ``method="heisenberg"`` evolves
    the ``d_q`` queue projectors with the adjoint channel and has no gate.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if method == "superoperator":
        gen = _superoperator_norms(step, dims)
    elif method == "heisenberg":
        gen = _heisenberg_norms(step, dims)
    else:
        raise ValueError(f"unknown method {method!r}")
    tracker = _Tracker(eps, window)
    history = []
    t = 0
    for t in range(1, t_max + 1):
        norm = next(gen)
        history.append((t, norm))
        if tracker.update(t, norm) and stop_on_convergence:
            break
    norms = [v for _, v in history]
    return SemistabilityReport(
        method=f"operator-level/{method}",
        eps=eps,
        converged=tracker.t_stop is not None,
        t_stop=tracker.t_stop,
        t_final=t,
        final_norm=norms[-1] if norms else 0.0,
        norm_history=history,
        oscillatory=_oscillatory(norms, eps),
    )


def classify_spectrum(step: KrausChannel) -> SpectrumReport:
    """Full superoperator spectrum with case1/case2 classification (gated)."""
    return spectrum(superoperator(step))


@dataclass(frozen=True)
class StochasticMatrix:
    """Classical transition matrix of a dephased coin.

    ``entries[x, i]`` is the probability of coin outcome ``x`` given classical
    input ``i``; every column sums to one.
    """

    entries: np.ndarray
    tp_verified: bool
    per_register: bool

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "per_register": self.per_register,
            "tp_verified": self.tp_verified,
            "column_sums": [float(s) for s in self.entries.sum(axis=0)],
            "entries": [[float(v) for v in row] for row in self.entries],
        }


def extract_stochastic_matrix(coin: CoinSpec, dims: QueueDims, joint: bool | None = None) -> StochasticMatrix:
    """Read ``c_{i,i,x,x}`` off the superoperator of dephasing ∘ coin.

    Works on a single coin register when the coin is applied per register
    (and ``joint`` is not set), otherwise on the joint ``d_i * d_o`` space.
    The trace-preservation identity of the Jamiołkowski matrix is checked and
    the column sums are verified.
    """
    if joint is None:
        joint = not coin.per_register or (dims.d_i != dims.d_o and coin.kind != "identity")
    if joint:
        ops = coin_kraus(coin, dims)
    elif coin.kind == "identity":
        ops = [np.eye(dims.d_i, dtype=np.complex128)]
    else:
        ops = coin.register_operators(dims)
    d = ops[0].shape[0]
    coin_ch = KrausChannel(ops)
    dephase = KrausChannel([np.diag(np.eye(d)[x]).astype(np.complex128) for x in range(d)])
    s = superoperator(compose(dephase, coin_ch)).mat
    tp_ok = tp_check(jamiolkowski(s))
    diag_idx = np.arange(d) * (d + 1)
    c = s[np.ix_(diag_idx, diag_idx)]
    if np.max(np.abs(c.imag)) > STOCHASTIC_TOL or c.real.min() < -STOCHASTIC_TOL:
        raise NumericalError("extracted transition matrix is not real and non-negative")
    entries = np.clip(c.real, 0.0, None)
    col_err = np.max(np.abs(entries.sum(axis=0) - 1.0))
    if not tp_ok or col_err > STOCHASTIC_TOL:
        raise NumericalError(f"stochasticity check failed (tp_check={tp_ok}, column error {col_err:.2e})")
    return StochasticMatrix(entries, tp_ok, not joint)
