"""
Dense complex matrix algebra and density-matrix primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. Density
matrices are ordinary square arrays that pass :func:`validate_density_matrix`.

Conventions
-----------
- Tensor factors are ordered left to right; subsystem 0 is the slowest-varying
  index, so a state on ``I ⊗ O ⊗ Q`` has flat index ``(n * d_o + m) * d_q + j``.
- Vectorization stacks rows: ``vec(a)[i * cols + j] = a[i, j]``. With this
  convention ``vec(E ρ E†) = (E ⊗ conj(E)) vec(ρ)``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidDimsError, InvalidStateError

__all__ = [
    "HERMITIAN_TOL",
    "TRACE_TOL",
    "PSD_TOL",
    "as_matrix",
    "kron",
    "dagger",
    "partial_trace",
    "vectorize",
    "devectorize",
    "eigenvalues",
    "is_hermitian",
    "validate_density_matrix",
    "is_density_matrix",
    "ket",
    "projector",
    "matrix_to_json",
    "matrix_from_json",
]

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array.

    Raises
    ------
    InvalidDimsError
        If ``a`` is not two-dimensional or has an empty axis.
    ValueError
        If any entry is NaN or infinite.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or 0 in m.shape:
        raise InvalidDimsError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return m


def kron(a, b, *more) -> np.ndarray:
    """Kronecker product of two or more matrices, left factor slowest."""
    out = np.kron(as_matrix(a), as_matrix(b))
    for c in more:
        out = np.kron(out, as_matrix(c))
    return out


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def _check_dims(n: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InvalidDimsError(f"subsystem dims must be positive integers, got {dims}")
    if int(np.prod(dims)) != n:
        raise InvalidDimsError(f"product of dims {dims} is {int(np.prod(dims))}, matrix dimension is {n}")
    return dims


def partial_trace(rho, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Trace out the subsystems listed in ``traced``.

    Parameters
    ----------
    rho : array_like
        Square matrix on the composite space.
    dims : sequence of int
        Subsystem dimensions; their product must equal ``rho.shape[0]``.
    traced : iterable of int
        Indices of subsystems to discard. Must be a proper subset.

    Returns
    -------
    numpy.ndarray
        Reduced matrix on the kept subsystems, in their original order.
    """
    rho = as_matrix(rho, "rho")
    if rho.shape[0] != rho.shape[1]:
        raise InvalidDimsError(f"partial trace needs a square matrix, got {rho.shape}")
    dims = _check_dims(rho.shape[0], dims)
    traced = sorted(set(int(i) for i in traced))
    if any(i < 0 or i >= len(dims) for i in traced):
        raise InvalidDimsError(f"traced indices {traced} out of range for {len(dims)} subsystems")
    if len(traced) >= len(dims):
        raise InvalidDimsError("cannot trace out every subsystem")
    t = rho.reshape(dims + dims)
    k = len(dims)
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + k)
        k -= 1
    kept = int(np.prod([d for i, d in enumerate(dims) if i not in traced]))
    return t.reshape(kept, kept)


def vectorize(a) -> np.ndarray:
    """Row-stacking vectorization, returned as a 1-D array."""
    return as_matrix(a).reshape(-1)


def devectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize` for square matrices."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise InvalidDimsError(f"length {v.size} is not a perfect square")
    return v.reshape(n, n)


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues of a square matrix, with multiplicity, unordered."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise InvalidDimsError(f"eigenvalues need a square matrix, got {a.shape}")
    return np.linalg.eigvals(a)


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T)) <= tol)


def validate_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array, raising if it is not a valid state.

    Checks Hermiticity (entrywise), unit trace and eigenvalues above ``-tol``.
    """
    rho = as_matrix(rho, "rho")
    if rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {rho.shape}")
    herm_err = np.max(np.abs(rho - rho.conj().T))
    if herm_err > tol:
        raise InvalidStateError(f"not Hermitian: max |rho - rho^dagger| = {herm_err:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace is {tr}, expected 1")
    lam_min = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam_min < -PSD_TOL:
        raise InvalidStateError(f"not positive semidefinite: min eigenvalue {lam_min:.3e}")
    return rho


def is_density_matrix(rho, tol: float = HERMITIAN_TOL) -> bool:
    try:
        validate_density_matrix(rho, tol)
    except (InvalidStateError, InvalidDimsError, ValueError):
        return False
    return True


def ket(index: int, dim: int) -> np.ndarray:
    """Computational basis column vector |index> of length ``dim``."""
    if not 0 <= index < dim:
        raise InvalidDimsError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros((dim, 1), dtype=np.complex128)
    v[index, 0] = 1.0
    return v


def projector(vec) -> np.ndarray:
    """|v><v| for a column (or flat) vector ``vec``; no normalization."""
    v = np.asarray(vec, dtype=np.complex128).reshape(-1, 1)
    return v @ v.conj().T


def matrix_to_json(a) -> dict:
    """Serialize as ``{rows, cols, entries: [[re, im], ...]}`` in row-major order."""
    a = as_matrix(a)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidDimsError(f"malformed matrix object: {exc}") from exc
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise InvalidDimsError(f"expected {rows}x{cols} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return as_matrix(flat.reshape(rows, cols))
