"""
Kraus-form quantum channels.

A :class:`KrausChannel` holds square Kraus operators that may be dense
``ndarray`` objects or ``scipy.sparse`` arrays; the queue operators are 0/1
partial isometries and stay sparse. Application is matrix-free. The
superoperator ``sum_k K ⊗ conj(K)`` is only materialized on request and only
up to :data:`MAX_SUPEROPERATOR_DIM`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CapabilityError, InvalidChannelError, InvalidDimsError, NumericalError
from .qcore import as_matrix, devectorize, matrix_from_json, matrix_to_json, partial_trace, vectorize

__all__ = [
    "COMPLETENESS_TOL",
    "UNIT_EIGENVALUE_TOL",
    "UNIT_MODULUS_TOL",
    "MAX_SUPEROPERATOR_DIM",
    "KrausChannel",
    "Superoperator",
    "SpectrumReport",
    "InvariantState",
    "identity_channel",
    "unitary_channel",
    "random_channel",
    "extend_with_identity",
    "apply",
    "apply_adjoint",
    "compose",
    "superoperator",
    "superoperator_sparse",
    "spectrum",
    "leading_eigenvalues",
    "invariant_state",
    "jamiolkowski",
    "tp_check",
]

COMPLETENESS_TOL = 1e-10
# eigenvalues closer than this to 1 count as fixed-point eigenvalues
UNIT_EIGENVALUE_TOL = 1e-6
# moduli above 1 - UNIT_MODULUS_TOL count as peripheral
UNIT_MODULUS_TOL = 1e-9
MAX_SUPEROPERATOR_DIM = 64


def _as_operator(op, name):
    if sp.issparse(op):
        op = sp.csr_array(op, dtype=np.complex128)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise InvalidDimsError(f"{name} must be square, got {op.shape}")
        if not np.all(np.isfinite(op.data)):
            raise ValueError(f"{name} contains NaN or infinite entries")
        return op
    op = as_matrix(op, name)
    if op.shape[0] != op.shape[1]:
        raise InvalidDimsError(f"{name} must be square, got {op.shape}")
    return op


def _dense(op) -> np.ndarray:
    return op.toarray() if sp.issparse(op) else op


class KrausChannel:
    """CPTP map ``rho -> sum_k K_k rho K_k^dagger``.

    Parameters
    ----------
    kraus_ops : sequence
        Non-empty list of square matrices (dense or scipy sparse) of equal size.
    check : bool
        Verify the completeness relation on construction.
    """

    __slots__ = ("_ops", "dim")

    def __init__(self, kraus_ops: Sequence, *, check: bool = True, tol: float = COMPLETENESS_TOL):
        ops = [_as_operator(k, f"kraus_ops[{i}]") for i, k in enumerate(kraus_ops)]
        if not ops:
            raise InvalidChannelError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise InvalidDimsError("Kraus operators have mismatched shapes")
        self._ops = tuple(ops)
        self.dim = dim
        if check:
            err = self.completeness_error()
            if err > tol:
                raise InvalidChannelError(f"completeness relation violated: |sum K^dag K - I|_F = {err:.3e}")

    @property
    def kraus_ops(self) -> tuple:
        return self._ops

    def __len__(self) -> int:
        return len(self._ops)

    def __repr__(self) -> str:
        return f"KrausChannel(dim={self.dim}, n_kraus={len(self)})"

    def dense_ops(self) -> list[np.ndarray]:
        return [_dense(k) for k in self._ops]

    def completeness_error(self) -> float:
        """Frobenius norm of ``sum_k K_k^dagger K_k - I``."""
        total = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for k in self._ops:
            total += _dense(k.conj().T @ k)
        total -= np.eye(self.dim)
        return float(np.linalg.norm(total))

    def to_json(self) -> list[dict]:
        return [matrix_to_json(k) for k in self.dense_ops()]

    @classmethod
    def from_json(cls, obj: list[dict]) -> "KrausChannel":
        return cls([matrix_from_json(m) for m in obj])


@dataclass(frozen=True)
class Superoperator:
    """Matrix ``sum_k K_k ⊗ conj(K_k)`` acting on row-stacked ``vec(rho)``."""

    dim: int
    mat: np.ndarray


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    n_unit_modulus: int
    classification: str
    partial: bool = False

    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(z.real), float(z.imag), float(abs(z))) for z in self.eigenvalues]

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "n_unit_modulus": self.n_unit_modulus,
            "partial": self.partial,
            "eigenvalues": [[re, im, mod] for re, im, mod in self.rows()],
        }


@dataclass(frozen=True)
class InvariantState:
    sigma: np.ndarray
    unique: bool
    multiplicity: int


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel([sp.identity(dim, dtype=np.complex128, format="csr")])


def unitary_channel(u) -> KrausChannel:
    return KrausChannel([u])


def random_channel(dim: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """Random channel from a Ginibre-derived isometry ``C^dim -> C^(n_kraus*dim)``."""
    g = rng.standard_normal((n_kraus * dim, dim)) + 1j * rng.standard_normal((n_kraus * dim, dim))
    q, _ = np.linalg.qr(g)
    return KrausChannel([q[i * dim:(i + 1) * dim] for i in range(n_kraus)])


def extend_with_identity(ch: KrausChannel, ancilla_dim: int) -> KrausChannel:
    """``ch ⊗ id`` on a system extended by an ancilla of dimension ``ancilla_dim``."""
    eye = sp.identity(ancilla_dim, dtype=np.complex128, format="csr")
    return KrausChannel([sp.kron(k, eye, format="csr") for k in ch.kraus_ops])


def _check_operand(ch: KrausChannel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (ch.dim, ch.dim):
        raise InvalidDimsError(f"operand shape {x.shape} does not match channel dimension {ch.dim}")
    return x


def apply(ch: KrausChannel, rho) -> np.ndarray:
    """Matrix-free ``sum_k K rho K^dagger``.

    Valid for any square operand, Hermitian or not.
    """
    rho = _check_operand(ch, rho)
    out = np.zeros_like(rho)
    rho_h = rho.conj().T
    for k in ch.kraus_ops:
        # K (K rho^dag)^dag == K rho K^dag
        out += k @ np.asarray(k @ rho_h).conj().T
    return out


def apply_adjoint(ch: KrausChannel, x) -> np.ndarray:
    """Heisenberg-picture map ``sum_k K^dagger x K``."""
    x = _check_operand(ch, x)
    out = np.zeros_like(x)
    x_h = x.conj().T
    for k in ch.kraus_ops:
        kh = k.conj().T
        out += kh @ np.asarray(kh @ x_h).conj().T
    return out


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """Channel ``outer ∘ inner`` with Kraus set ``{A_i B_j}`` (no rank reduction)."""
    if outer.dim != inner.dim:
        raise InvalidDimsError(f"cannot compose channels of dims {outer.dim} and {inner.dim}")
    return KrausChannel([a @ b for a in outer.kraus_ops for b in inner.kraus_ops])


def _gate(dim: int) -> None:
    if dim > MAX_SUPEROPERATOR_DIM:
        raise CapabilityError(
            f"state dimension {dim} exceeds the superoperator gate ({MAX_SUPEROPERATOR_DIM}); "
            "use matrix-free methods (leading_eigenvalues, per-state semistability)"
        )


def superoperator_sparse(ch: KrausChannel) -> sp.csr_array:
    """Sparse superoperator, with no dimension gate."""
    total = None
    for k in ch.kraus_ops:
        ks = sp.csr_array(k)
        term = sp.kron(ks, ks.conj(), format="csr")
        total = term if total is None else total + term
    return sp.csr_array(total)


def superoperator(ch: KrausChannel) -> Superoperator:
    """Dense superoperator; refused above :data:`MAX_SUPEROPERATOR_DIM`."""
    _gate(ch.dim)
    mat = np.zeros((ch.dim**2, ch.dim**2), dtype=np.complex128)
    for k in ch.dense_ops():
        mat += np.kron(k, k.conj())
    return Superoperator(ch.dim, mat)


def _classify(eigs: np.ndarray) -> tuple[int, str]:
    n_unit = int(np.sum(np.abs(eigs) > 1 - UNIT_MODULUS_TOL))
    return n_unit, ("case1" if n_unit == 1 else "case2")


def spectrum(s: Superoperator) -> SpectrumReport:
    """Eigenvalues sorted by descending modulus, with case classification.

    ``case1``: a single eigenvalue on the unit circle, so every initial state
    converges to the invariant state. ``case2``: degenerate or peripheral
    spectrum, where the limit may fail to exist.
    """
    try:
        eigs = np.linalg.eigvals(s.mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    eigs = eigs[np.argsort(-np.abs(eigs), kind="stable")]
    n_unit, case = _classify(eigs)
    return SpectrumReport(eigs, n_unit, case)


def leading_eigenvalues(ch: KrausChannel, k: int = 6, tol: float = 1e-10) -> SpectrumReport:
    """Largest-modulus eigenvalues via ARPACK on the matrix-free channel.

    The classification only reflects the ``k`` eigenvalues found, so the
    report is marked ``partial``.
    """
    n = ch.dim
    k = min(k, n * n - 2)

    def matvec(v):
        return vectorize(apply(ch, devectorize(v)))

    op = spla.LinearOperator((n * n, n * n), matvec=matvec, dtype=np.complex128)
    v0 = vectorize(np.eye(n) / n)
    try:
        eigs = spla.eigs(op, k=k, which="LM", v0=v0, tol=tol, return_eigenvectors=False)
    except spla.ArpackError as exc:
        raise NumericalError(f"ARPACK failed: {exc}") from exc
    eigs = eigs[np.argsort(-np.abs(eigs), kind="stable")]
    n_unit, case = _classify(eigs)
    return SpectrumReport(eigs, n_unit, case, partial=True)


def invariant_state(s: Superoperator) -> InvariantState:
    """Fixed point of the channel.

    The maximally mixed state is projected onto the eigenvalue-1 eigenspace with
    the spectral projector built from left and right eigenvectors. This equals
    the normalized eigenvector when the fixed point is unique and still returns
    a density matrix when it is not.
    """
    n = s.dim
    try:
        w, vl, vr = scipy.linalg.eig(s.mat, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    sel = np.abs(w - 1.0) <= UNIT_EIGENVALUE_TOL
    mult = int(sel.sum())
    if mult == 0:
        raise InvalidChannelError(
            f"no eigenvalue within {UNIT_EIGENVALUE_TOL} of 1 (closest {w[np.argmin(np.abs(w - 1))]})"
        )
    r, l = vr[:, sel], vl[:, sel]
    x = vectorize(np.eye(n) / n)
    coeffs = np.linalg.solve(l.conj().T @ r, l.conj().T @ x)
    sigma = devectorize(r @ coeffs)
    sigma = (sigma + sigma.conj().T) / 2
    tr = np.trace(sigma)
    if abs(tr) < 1e-12:
        raise NumericalError("fixed-point projection has vanishing trace")
    sigma = sigma / tr
    return InvariantState(sigma, mult == 1, mult)


def jamiolkowski(s) -> np.ndarray:
    """Reshuffle ``S[(k,l),(i,j)] -> J[(k,i),(l,j)]``.

    With ``S = sum c_{ijkl} |k><i| ⊗ |l><j|`` this gives
    ``J = sum c_{ijkl} |k><l| ⊗ |i><j|``; the first factor is the output space.
    """
    mat = s.mat if isinstance(s, Superoperator) else as_matrix(s)
    n = int(round(np.sqrt(mat.shape[0])))
    if n * n != mat.shape[0] or mat.shape[0] != mat.shape[1]:
        raise InvalidDimsError(f"superoperator shape {mat.shape} is not N^2 x N^2")
    return mat.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)


def tp_check(j, tol: float = 1e-10) -> bool:
    """True iff tracing out the first factor of ``j`` yields the identity."""
    j = as_matrix(j)
    n = int(round(np.sqrt(j.shape[0])))
    reduced = partial_trace(j, [n, n], [0])
    return bool(np.max(np.abs(reduced - np.eye(n))) <= tol)
