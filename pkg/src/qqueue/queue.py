"""
Channels of the quantum queue.

The system is ``I ⊗ O ⊗ Q``: input-job register of dimension ``d_i``,
output-job register ``d_o`` and queue-length register ``d_q``. One step is the
coin channel on ``I ⊗ O`` followed by the queue update ``Φ_K`` whose Kraus
operators shift the queue length by ``n - m`` and clamp at the barriers
``0`` and ``d_q - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .channels import KrausChannel, compose
from .errors import InvalidChannelError, InvalidDimsError
from .qcore import as_matrix, matrix_to_json, projector

__all__ = [
    "COIN_KINDS",
    "QueueDims",
    "CoinSpec",
    "coin_matrix",
    "coin_kraus",
    "build_queue_channel",
    "build_coin_channel",
    "build_dephasing_channel",
    "build_reset_channel",
    "build_step_channel",
    "initial_state",
    "INITIAL_STATE_PRESETS",
]

COIN_KINDS = ("identity", "hadamard", "walsh_hadamard", "grover", "dft", "custom_unitary", "custom_kraus")
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class QueueDims:
    """Register dimensions ``(d_i, d_o, d_q)``.

    ``d_q >= d_i + d_o - 1`` keeps the three Kraus regimes (lower barrier,
    bulk, upper barrier) disjoint and exhaustive.
    """

    d_i: int
    d_o: int
    d_q: int

    def __post_init__(self):
        for name in ("d_i", "d_o", "d_q"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 2:
                raise InvalidDimsError(f"{name} must be an integer >= 2, got {v!r}")
        if self.d_q < self.d_i + self.d_o - 1:
            raise InvalidDimsError(
                f"d_q={self.d_q} must be at least d_i + d_o - 1 = {self.d_i + self.d_o - 1}"
            )

    @property
    def coin_dim(self) -> int:
        return self.d_i * self.d_o

    @property
    def total(self) -> int:
        return self.d_i * self.d_o * self.d_q

    @property
    def subsystems(self) -> list[int]:
        return [self.d_i, self.d_o, self.d_q]

    def index(self, n: int, m: int, j: int) -> int:
        """Flat basis index of ``|n> ⊗ |m> ⊗ |j>``."""
        return (n * self.d_o + m) * self.d_q + j

    def to_dict(self) -> dict:
        return {"d_i": self.d_i, "d_o": self.d_o, "d_q": self.d_q}


def coin_matrix(kind: str, n: int | None = None, d: int | None = None) -> np.ndarray:
    """Named unitary coin.

    ``hadamard`` is 2x2; ``walsh_hadamard`` is ``H^{⊗n}``; ``grover`` has
    ``2/d - 1`` on the diagonal and ``2/d`` elsewhere; ``dft`` has entries
    ``ω^{jk}/√d`` with ``ω = exp(2πi/d)``; ``identity`` is ``I_d``.
    """
    if kind == "hadamard":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    if kind == "walsh_hadamard":
        if n is None or n < 1:
            raise InvalidDimsError(f"walsh_hadamard needs n >= 1, got {n}")
        h = coin_matrix("hadamard")
        return reduce(np.kron, [h] * n)
    if d is None or d < 1:
        raise InvalidDimsError(f"{kind} coin needs a dimension d >= 1, got {d}")
    if kind == "grover":
        return np.full((d, d), 2.0 / d, dtype=np.complex128) - np.eye(d)
    if kind == "dft":
        jk = np.outer(np.arange(d), np.arange(d))
        return np.exp(2j * np.pi * jk / d) / np.sqrt(d)
    if kind == "identity":
        return np.eye(d, dtype=np.complex128)
    raise ValueError(f"unknown coin kind {kind!r}")


@dataclass(frozen=True)
class CoinSpec:
    """Description of the coin acting on ``I ⊗ O``.

    With ``per_register=True`` the same operator(s) act on each register,
    giving ``U ⊗ U`` (or the product Kraus set). Otherwise the operator acts
    jointly on the ``d_i * d_o`` coin space. ``reset_state`` is the basis index
    of the coin state re-prepared each step in classical mode.
    """

    kind: str
    n: int | None = None
    d: int | None = None
    matrix: np.ndarray | None = field(default=None, compare=False)
    operators: tuple | None = field(default=None, compare=False)
    per_register: bool = True
    reset_state: int = 0

    def __post_init__(self):
        if self.kind not in COIN_KINDS:
            raise ValueError(f"unknown coin kind {self.kind!r}; expected one of {COIN_KINDS}")
        if self.kind == "custom_unitary":
            if self.matrix is None:
                raise ValueError("custom_unitary coin needs a matrix")
            u = as_matrix(self.matrix, "coin matrix")
            if u.shape[0] != u.shape[1]:
                raise InvalidDimsError(f"coin matrix must be square, got {u.shape}")
            err = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
            if err > UNITARY_TOL:
                raise InvalidChannelError(f"custom coin is not unitary (max |U^dag U - I| = {err:.3e})")
            object.__setattr__(self, "matrix", u)
        if self.kind == "custom_kraus":
            if not self.operators:
                raise ValueError("custom_kraus coin needs a non-empty operator list")
            # validates completeness
            KrausChannel(list(self.operators))
            object.__setattr__(self, "operators", tuple(as_matrix(k) for k in self.operators))

    @property
    def is_unitary(self) -> bool:
        return self.kind != "custom_kraus"

    def local_operators(self, dim: int) -> list[np.ndarray]:
        """Kraus operators on a space of dimension ``dim`` (one register or the joint space)."""
        if self.kind == "custom_kraus":
            ops = list(self.operators)
        elif self.kind == "custom_unitary":
            ops = [self.matrix]
        elif self.kind == "identity":
            ops = [np.eye(dim, dtype=np.complex128)]
        else:
            ops = [coin_matrix(self.kind, n=self.n, d=self.d if self.d is not None else dim)]
        if ops[0].shape[0] != dim:
            where = "each register" if self.per_register else "the joint coin space"
            raise InvalidDimsError(f"{self.kind} coin has dimension {ops[0].shape[0]}, {where} has {dim}")
        return ops

    def register_operators(self, dims: QueueDims) -> list[np.ndarray]:
        """Single-register operators; only defined for per-register coins with ``d_i == d_o``."""
        if not self.per_register:
            raise InvalidDimsError("coin acts jointly; it has no single-register form")
        if self.kind != "identity" and dims.d_i != dims.d_o:
            raise InvalidDimsError(f"per-register coin needs d_i == d_o, got {dims.d_i}, {dims.d_o}")
        return self.local_operators(dims.d_i)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "per_register": self.per_register, "reset_state": self.reset_state}
        if self.n is not None:
            out["n"] = self.n
        if self.d is not None:
            out["d"] = self.d
        if self.matrix is not None:
            out["matrix"] = matrix_to_json(self.matrix)
        if self.operators is not None:
            out["operators"] = [matrix_to_json(k) for k in self.operators]
        return out


def coin_kraus(spec: CoinSpec, dims: QueueDims) -> list[np.ndarray]:
    """Kraus operators of the coin on the joint ``d_i * d_o`` space (no queue factor)."""
    if not spec.per_register:
        return spec.local_operators(dims.coin_dim)
    if spec.kind == "identity":
        return [np.eye(dims.coin_dim, dtype=np.complex128)]
    ops = spec.register_operators(dims)
    return [np.kron(a, b) for a in ops for b in ops]


def build_queue_channel(dims: QueueDims) -> KrausChannel:
    """Queue-update channel ``Φ_K``.

    One bulk operator ``K_s`` on queue lengths ``d_o-1 .. d_q-d_i``, one
    lower-barrier operator per ``l in 0 .. d_o-2`` (target clamped at 0) and
    one upper-barrier operator per ``u in d_q-d_i+1 .. d_q-1`` (target clamped
    at ``d_q-1``). Each is a 0/1 partial isometry; their column supports
    partition the basis.
    """
    d_i, d_o, d_q = dims.d_i, dims.d_o, dims.d_q
    n_tot = dims.total

    def op(pairs):
        rows, cols = zip(*pairs)
        return sp.csr_array(
            (np.ones(len(rows), dtype=np.complex128), (np.array(rows), np.array(cols))), shape=(n_tot, n_tot)
        )

    bulk = []
    for n in range(d_i):
        for m in range(d_o):
            for j in range(d_o - 1, d_q - d_i + 1):
                target = j + n - m
                if not 0 <= target < d_q:
                    raise AssertionError(f"bulk target {target} out of range for j={j}, n={n}, m={m}")
                bulk.append((dims.index(n, m, target), dims.index(n, m, j)))
    ops = [op(bulk)]
    for l in range(d_o - 1):
        ops.append(op([(dims.index(n, m, max(l + n - m, 0)), dims.index(n, m, l))
                       for n in range(d_i) for m in range(d_o)]))
    for u in range(d_q - d_i + 1, d_q):
        ops.append(op([(dims.index(n, m, min(u + n - m, d_q - 1)), dims.index(n, m, u))
                       for n in range(d_i) for m in range(d_o)]))
    return KrausChannel(ops)


def _with_queue_identity(ops: Sequence[np.ndarray], d_q: int) -> list[sp.csr_array]:
    eye = sp.identity(d_q, dtype=np.complex128, format="csr")
    return [sp.kron(sp.csr_array(c), eye, format="csr") for c in ops]


def build_coin_channel(spec: CoinSpec, dims: QueueDims) -> KrausChannel:
    """``Φ_C`` with Kraus operators ``C_i ⊗ I_Q``."""
    return KrausChannel(_with_queue_identity(coin_kraus(spec, dims), dims.d_q))


def build_dephasing_channel(dims: QueueDims) -> KrausChannel:
    """Coin-register dephasing ``sum_x |x><x| ρ |x><x|`` tensored with ``I_Q``."""
    d = dims.coin_dim
    projs = [np.diag(np.eye(d)[x]).astype(np.complex128) for x in range(d)]
    return KrausChannel(_with_queue_identity(projs, dims.d_q))


def build_reset_channel(dims: QueueDims, state: int = 0) -> KrausChannel:
    """Discard the coin registers and re-prepare basis state ``|state>``."""
    d = dims.coin_dim
    if not 0 <= state < d:
        raise InvalidDimsError(f"reset state {state} out of range for coin dimension {d}")
    ops = []
    for x in range(d):
        k = np.zeros((d, d), dtype=np.complex128)
        k[state, x] = 1.0
        ops.append(k)
    return KrausChannel(_with_queue_identity(ops, dims.d_q))


def build_step_channel(dims: QueueDims, coin: CoinSpec, classical: bool = False) -> KrausChannel:
    """One time step.

    Quantum mode: ``Φ_K ∘ Φ_C``. Classical mode: ``Φ_K ∘ Φ_D ∘ Φ_C ∘ Φ_reset``,
    so each step starts from a fresh coin uncorrelated with the queue.
    """
    queue = build_queue_channel(dims)
    coin_ch = build_coin_channel(coin, dims)
    if not classical:
        return compose(queue, coin_ch)
    inner = compose(build_dephasing_channel(dims),
                    compose(coin_ch, build_reset_channel(dims, coin.reset_state)))
    return compose(queue, inner)


def _initial_coin_factor(d: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[0], v[1] = 1.0, -1j
    return projector(v) / 2


def initial_state(name: str, dims: QueueDims, rng: np.random.Generator | None = None,
                  queue_length: int | None = None) -> np.ndarray:
    """Named initial state on ``I ⊗ O ⊗ Q``.

    ``paper-initial``
        ``|c><c| ⊗ |c><c| ⊗ |j><j|`` with ``|c> = (|0> - i|1>)/√2`` and the
        queue half filled.
    ``half-filled-basis``
        ``|0><0| ⊗ |0><0| ⊗ |j><j|``.
    ``maximally-mixed``
        ``I / (d_i d_o d_q)``.
    ``hs-random``
        Hilbert-Schmidt random state on the full system (needs ``rng``).
    """
    j = dims.d_q // 2 if queue_length is None else queue_length
    if not 0 <= j < dims.d_q:
        raise InvalidDimsError(f"queue length {j} out of range")
    q = np.zeros((dims.d_q, dims.d_q), dtype=np.complex128)
    q[j, j] = 1.0
    if name == "paper-initial":
        return np.kron(np.kron(_initial_coin_factor(dims.d_i), _initial_coin_factor(dims.d_o)), q)
    if name == "half-filled-basis":
        c = np.zeros((dims.coin_dim, dims.coin_dim), dtype=np.complex128)
        c[0, 0] = 1.0
        return np.kron(c, q)
    if name == "maximally-mixed":
        return np.eye(dims.total, dtype=np.complex128) / dims.total
    if name == "hs-random":
        if rng is None:
            raise ValueError("hs-random initial state needs an rng")
        from .randstates import hs_random_state

        return hs_random_state(dims.total, rng)
    raise ValueError(f"unknown initial state preset {name!r}; expected one of {INITIAL_STATE_PRESETS}")


INITIAL_STATE_PRESETS = ("paper-initial", "half-filled-basis", "maximally-mixed", "hs-random")
