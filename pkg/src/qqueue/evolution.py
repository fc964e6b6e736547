"""Time stepping of the queue and extraction of queue-length distributions."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import KrausChannel, apply
from .errors import InvalidDimsError
from .io import write_csv
from .qcore import matrix_to_json, partial_trace
from .queue import QueueDims

__all__ = [
    "NumericalDegradationWarning",
    "QueueLengthDistribution",
    "Trajectory",
    "evolve",
    "queue_distribution",
    "queue_probabilities",
    "measurement_map",
    "run_trajectory",
]

REHERMITIZE_EVERY = 100
DRIFT_WARN = 1e-8
RENORMALIZE_TOL = 1e-10


class NumericalDegradationWarning(RuntimeWarning):
    """Hermiticity drift of an evolved state exceeded the warning threshold."""


@dataclass(frozen=True)
class QueueLengthDistribution:
    probs: np.ndarray
    renormalized: bool = False

    def __len__(self):
        return len(self.probs)


def _hermitize(rho: np.ndarray, t: int) -> np.ndarray:
    drift = np.max(np.abs(rho - rho.conj().T))
    if drift > DRIFT_WARN:
        warnings.warn(f"Hermiticity drift {drift:.2e} at step {t}", NumericalDegradationWarning, stacklevel=3)
    return (rho + rho.conj().T) / 2


def evolve(step: KrausChannel, rho0, t: int) -> np.ndarray:
    """Apply ``step`` to ``rho0`` ``t`` times."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.shape != (step.dim, step.dim):
        raise InvalidDimsError(f"state shape {rho.shape} does not match channel dimension {step.dim}")
    for s in range(1, t + 1):
        rho = apply(step, rho)
        if s % REHERMITIZE_EVERY == 0:
            rho = _hermitize(rho, s)
    return rho


def queue_probabilities(rho, dims: QueueDims) -> np.ndarray:
    """Raw ``<i| tr_IO(rho) |i>`` without clamping."""
    rho = np.asarray(rho)
    if rho.shape != (dims.total, dims.total):
        raise InvalidDimsError(f"state shape {rho.shape} does not match dims {dims.subsystems}")
    reduced = partial_trace(rho, dims.subsystems, [0, 1])
    return np.real(np.diagonal(reduced)).copy()


def queue_distribution(rho, dims: QueueDims) -> QueueLengthDistribution:
    """Queue-length distribution of ``rho``, clamped at zero.

    Renormalizes (and flags it) only when the total drifts from 1 by more
    than 1e-10.
    """
    p = np.clip(queue_probabilities(rho, dims), 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > RENORMALIZE_TOL:
        return QueueLengthDistribution(p / total, renormalized=True)
    return QueueLengthDistribution(p)


def measurement_map(dims: QueueDims) -> np.ndarray:
    """Real ``d_q x N^2`` matrix ``C`` with ``C vec(rho) = p``.

    Row ``i`` sums the diagonal entries ``<n,m,i|rho|n,m,i>`` over all coin
    basis states.
    """
    n = dims.total
    c = np.zeros((dims.d_q, n * n))
    for x in range(dims.coin_dim):
        for i in range(dims.d_q):
            a = x * dims.d_q + i
            c[i, a * n + a] = 1.0
    return c


@dataclass
class Trajectory:
    """Distributions ``p_0 .. p_{t_max}`` plus state checkpoints."""

    dims: QueueDims
    times: np.ndarray
    probs: np.ndarray
    states: dict[int, np.ndarray] = field(default_factory=dict)
    final_state: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    def distribution(self, t: int) -> np.ndarray:
        return self.probs[t]

    def csv_rows(self):
        return [[int(t)] + list(p) for t, p in zip(self.times, self.probs)]

    def to_csv(self, path) -> None:
        header = ["t"] + [f"p{i}" for i in range(self.dims.d_q)]
        write_csv(path, header, self.csv_rows())

    def to_json(self, path, metadata: dict | None = None) -> None:
        doc = {
            "metadata": {"dims": self.dims.to_dict(), **(metadata or {})},
            "t": [int(t) for t in self.times],
            "probs": [[float(x) for x in p] for p in self.probs],
            "states": {str(t): matrix_to_json(r) for t, r in sorted(self.states.items())},
        }
        Path(path).write_text(json.dumps(doc, indent=1))


def run_trajectory(step: KrausChannel, rho0, dims: QueueDims, t_max: int,
                   state_every: int | None = 50) -> Trajectory:
    """Evolve for ``t_max`` steps, recording the distribution at every step.

    Full states are kept every ``state_every`` steps (``None`` disables
    checkpoints); the last state is always kept as ``final_state``.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    rho = np.asarray(rho0, dtype=np.complex128)
    if rho.shape != (step.dim, step.dim) or step.dim != dims.total:
        raise InvalidDimsError("state, channel and queue dims disagree")
    probs = np.empty((t_max + 1, dims.d_q))
    states = {}
    probs[0] = queue_distribution(rho, dims).probs
    if state_every:
        states[0] = rho.copy()
    for t in range(1, t_max + 1):
        rho = apply(step, rho)
        if t % REHERMITIZE_EVERY == 0:
            rho = _hermitize(rho, t)
        probs[t] = queue_distribution(rho, dims).probs
        if state_every and t % state_every == 0:
            states[t] = rho.copy()
    return Trajectory(dims, np.arange(t_max + 1), probs, states, rho)
