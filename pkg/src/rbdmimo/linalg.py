"""Dense complex linear algebra primitives and the exact Cholesky solver.

Vectors are 1-D complex128 ndarrays and matrices are 2-D complex128
ndarrays throughout the package.  The serialization order for the text
fixture format is column-major; in-memory layout is whatever numpy uses.

All functions are pure; the optional `counter` arguments only accumulate
operation tallies on the caller's object (see `rbdmimo.complexity`).
"""

from __future__ import annotations

import math

import numpy as np

HERMITIAN_TOL = 1e-12
CHOLESKY_PIVOT_TOL = 1e-14
JACOBI_OFFDIAG_TOL = 1e-12


class NotPositiveDefiniteError(ArithmeticError):
    """Raised when a factorization hits a non-positive pivot.

    Attributes
    ----------
    pivot_index : int
        Zero-based index of the failing pivot.
    pivot_value : float
        The offending (real) pivot value.
    """

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} = {pivot_value:.6g}"
        )


def as_complex_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def as_complex_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got ndim={v.ndim}")
    return v


def hermitian_defect(a: np.ndarray) -> float:
    """max_ij |A(i,j) - conj(A(j,i))|, zero for exactly Hermitian input."""
    a = as_complex_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: {a.shape}")
    return float(np.abs(a - a.conj().T).max()) if a.size else 0.0


def require_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_complex_matrix(a)
    defect = hermitian_defect(a)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian within {tol:g} (defect {defect:.3g})")
    return a


def matvec(a: np.ndarray, x: np.ndarray, counter=None) -> np.ndarray:
    """Matrix-vector product A @ x with dimension checking."""
    a = as_complex_matrix(a)
    x = as_complex_vector(x)
    if a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: A is {a.shape}, x has length {len(x)}")
    if counter is not None:
        counter.tally_matvec(a.shape[0], a.shape[1])
    return a @ x


def inner_hermitian(x: np.ndarray, y: np.ndarray, counter=None) -> complex:
    """Hermitian inner product x^H y (first argument conjugated)."""
    x = as_complex_vector(x)
    y = as_complex_vector(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if counter is not None:
        counter.tally(mults=len(x), adds=max(len(x) - 1, 0))
    return complex(np.vdot(x, y))


def norm2(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def cholesky_factor(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L^H = A for Hermitian positive definite A.

    Raises NotPositiveDefiniteError (carrying the failing pivot index) when
    a pivot falls below CHOLESKY_PIVOT_TOL.
    """
    a = require_hermitian(a)
    n = a.shape[0]
    low = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        pivot = a[j, j].real - float(np.real(np.vdot(low[j, :j], low[j, :j])))
        if pivot <= CHOLESKY_PIVOT_TOL:
            raise NotPositiveDefiniteError(j, pivot)
        diag = math.sqrt(pivot)
        low[j, j] = diag
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j].conj()) / diag
    return low


def cholesky_solve(low: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve (L L^H) s = y by forward then backward substitution."""
    low = as_complex_matrix(low)
    y = as_complex_vector(y)
    n = low.shape[0]
    if low.shape[1] != n or y.shape[0] != n:
        raise ValueError(f"dimension mismatch: L is {low.shape}, y has length {len(y)}")
    z = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        z[i] = (y[i] - low[i, :i] @ z[:i]) / low[i, i]
    s = np.zeros(n, dtype=np.complex128)
    for i in range(n - 1, -1, -1):
        s[i] = (z[i] - low[i + 1:, i].conj() @ s[i + 1:]) / low[i, i].conj()
    return s


def hermitian_eigen_extrema(a: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues (lambda_min, lambda_max) of a Hermitian matrix.

    Cyclic Jacobi iteration with complex plane rotations; intended for the
    small matrices (dimension <= 64) used in diagnostics and convergence
    bounds.  Sweeps stop once the off-diagonal Frobenius norm drops below
    JACOBI_OFFDIAG_TOL relative to the matrix scale.
    """
    a = require_hermitian(a)
    n = a.shape[0]
    if n == 1:
        v = a[0, 0].real
        return v, v
    w = a.copy()
    scale = max(1.0, float(np.linalg.norm(w)))
    tol = JACOBI_OFFDIAG_TOL * scale
    for _ in range(60):
        off = math.sqrt(max(float(np.sum(np.abs(w) ** 2) - np.sum(np.abs(np.diag(w)) ** 2)), 0.0))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= 1e-300:
                    continue
                phase = apq / abs(apq)
                app = w[p, p].real
                aqq = w[q, q].real
                tau = (aqq - app) / (2.0 * abs(apq))
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                # columns: [p q] <- [p q] @ [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                col_p = c * w[:, p] - (s * np.conj(phase)) * w[:, q]
                col_q = s * w[:, p] + (c * np.conj(phase)) * w[:, q]
                w[:, p] = col_p
                w[:, q] = col_q
                # rows: apply the conjugate transpose rotation from the left
                row_p = c * w[p, :] - (s * phase) * w[q, :]
                row_q = s * w[p, :] + (c * phase) * w[q, :]
                w[p, :] = row_p
                w[q, :] = row_q
                w[p, q] = 0.0
                w[q, p] = 0.0
    eigs = np.real(np.diag(w))
    return float(eigs.min()), float(eigs.max())


def save_matrix(path, a: np.ndarray) -> None:
    """Write a matrix in the text fixture format.

    Header line `rows cols`, then one `re im` pair per entry in
    column-major order, 17 significant digits (lossless for float64).
    """
    a = as_complex_matrix(a)
    rows, cols = a.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{rows} {cols}\n")
        for z in a.flatten(order="F"):
            fh.write(f"{z.real:.17g} {z.imag:.17g}\n")


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by save_matrix."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != 2 * rows * cols:
        raise ValueError(
            f"{path}: expected {2 * rows * cols} numbers for a {rows}x{cols} matrix, got {len(values)}"
        )
    re = np.array(values[0::2], dtype=np.float64)
    im = np.array(values[1::2], dtype=np.float64)
    return (re + 1j * im).reshape((rows, cols), order="F")


def save_vector(path, x: np.ndarray) -> None:
    """Write a vector as a single-column matrix in the text fixture format."""
    save_matrix(path, as_complex_vector(x)[:, None])


def load_vector(path) -> np.ndarray:
    m = load_matrix(path)
    if m.shape[1] != 1:
        raise ValueError(f"{path}: expected a single-column matrix, got {m.shape}")
    return m[:, 0]
