"""
Hilbert-Schmidt random states and Monte Carlo mean distributions.

Reproducibility: sample ``i`` of a run with seed ``s`` draws from
``numpy.random.Generator(PCG64(SeedSequence(s, spawn_key=(i,))))``. Results
are collected by sample index and reduced in that order, so they do not depend
on the number of worker processes.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import CONFIRMATION_WINDOW, check_semistability_per_state
from .channels import KrausChannel
from .errors import NumericalError
from .io import write_csv
from .queue import QueueDims

__all__ = [
    "GENERATOR",
    "SampleConfig",
    "MonteCarloSummary",
    "ginibre",
    "hs_random_state",
    "sample_rng",
    "summarize",
    "monte_carlo_mean",
]

GENERATOR = "numpy PCG64 + SeedSequence(seed, spawn_key=(i,)); Gaussian: numpy ziggurat"
STATE_KINDS = ("full-system", "queue-basis-product")


def ginibre(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n x n`` matrix with i.i.d. standard normal real and imaginary parts."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    re = rng.standard_normal((n, n))
    im = rng.standard_normal((n, n))
    return re + 1j * im


def hs_random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Density matrix ``A A^† / tr(A A^†)`` with ``A`` Ginibre, i.e. HS-distributed."""
    for _ in range(2):
        a = ginibre(n, rng)
        w = a @ a.conj().T
        tr = np.trace(w).real
        if tr > 0:
            rho = w / tr
            return (rho + rho.conj().T) / 2
    raise NumericalError("degenerate Ginibre sample: tr(A A^dagger) = 0 twice")


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass(frozen=True)
class SampleConfig:
    """Monte Carlo settings.

    ``state_kind="queue-basis-product"`` draws the coin registers at random
    and fixes the queue in basis state ``queue_length`` (default ``d_q // 2``).
    """

    n_samples: int = 1000
    seed: int = 0
    eps: float = 1e-6
    t_max: int = 5000
    window: int = CONFIRMATION_WINDOW
    state_kind: str = "full-system"
    queue_length: int | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.state_kind not in STATE_KINDS:
            raise ValueError(f"state_kind must be one of {STATE_KINDS}")


@dataclass
class MonteCarloSummary:
    mean: np.ndarray
    stddev: np.ndarray
    n_samples: int
    n_converged: int
    seed: int
    config: SampleConfig
    t_stop: list = field(default_factory=list, repr=False)
    final_norms: list = field(default_factory=list, repr=False)

    def metadata(self) -> dict:
        return {
            "seed": self.seed,
            "generator": GENERATOR,
            "n_samples": self.n_samples,
            "n_converged": self.n_converged,
            "config": asdict(self.config),
        }

    def to_csv(self, path) -> None:
        write_csv(path, ["bin", "mean", "stddev"],
                  [[i, m, s] for i, (m, s) in enumerate(zip(self.mean, self.stddev))])

    def to_json(self, path, extra: dict | None = None) -> None:
        doc = {
            "metadata": {**self.metadata(), **(extra or {})},
            "mean": [float(x) for x in self.mean],
            "stddev": [float(x) for x in self.stddev],
            "t_stop": self.t_stop,
            "final_norms": self.final_norms,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)


def draw_initial_state(dims: QueueDims, cfg: SampleConfig, index: int) -> np.ndarray:
    rng = sample_rng(cfg.seed, index)
    if cfg.state_kind == "full-system":
        return hs_random_state(dims.total, rng)
    j = dims.d_q // 2 if cfg.queue_length is None else cfg.queue_length
    q = np.zeros((dims.d_q, dims.d_q), dtype=np.complex128)
    q[j, j] = 1.0
    return np.kron(hs_random_state(dims.coin_dim, rng), q)


def _run_sample(step: KrausChannel, dims: QueueDims, cfg: SampleConfig, index: int):
    rho0 = draw_initial_state(dims, cfg, index)
    rep = check_semistability_per_state(step, rho0, dims, cfg.eps, cfg.t_max, window=cfg.window)
    return rep.final_distribution, rep.converged, rep.t_stop, rep.final_norm


_WORKER_ARGS = None


def _init_worker(step, dims, cfg):
    global _WORKER_ARGS
    _WORKER_ARGS = (step, dims, cfg)


def _worker(index: int):
    return _run_sample(*_WORKER_ARGS, index)


def summarize(finals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-bin mean and sample standard deviation (``n-1`` denominator; zero for one sample)."""
    finals = np.asarray(finals, dtype=float)
    mean = finals.mean(axis=0)
    if len(finals) < 2:
        return mean, np.zeros_like(mean)
    return mean, finals.std(axis=0, ddof=1)


def monte_carlo_mean(step: KrausChannel, dims: QueueDims, cfg: SampleConfig, workers: int = 1) -> MonteCarloSummary:
    """Mean stationary queue-length distribution over random initial states.

    Each sample is evolved until the per-state criterion holds for
    ``cfg.window`` steps or ``cfg.t_max`` is reached. Non-converged samples are
    excluded from the statistics with a warning.
    """
    indices = range(cfg.n_samples)
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(step, dims, cfg)) as ex:
            results = list(ex.map(_worker, indices, chunksize=max(1, cfg.n_samples // (4 * workers))))
    else:
        results = [_run_sample(step, dims, cfg, i) for i in indices]
    converged = [r for r in results if r[1]]
    if not converged:
        norms = [r[3] for r in results]
        raise NumericalError(
            f"no sample converged within t_max={cfg.t_max} (eps={cfg.eps}); "
            f"final norms min {min(norms):.3e}, max {max(norms):.3e}"
        )
    if len(converged) < len(results):
        warnings.warn(f"{len(results) - len(converged)} of {len(results)} samples did not converge and were excluded",
                      RuntimeWarning, stacklevel=2)
    mean, std = summarize(np.array([r[0] for r in converged]))
    return MonteCarloSummary(
        mean=mean,
        stddev=std,
        n_samples=cfg.n_samples,
        n_converged=len(converged),
        seed=cfg.seed,
        config=cfg,
        t_stop=[r[2] for r in results],
        final_norms=[r[3] for r in results],
    )
