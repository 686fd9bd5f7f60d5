"""Dense matrix kernels: spectra of leading submatrices, matrix powers with
explicit branch tracking, unpivoted LDU, and exponential-dominance orderings.

All routines work on small dense complex matrices.  Eigenvalues are always
reported sorted lexicographically by (real part, imaginary part) so that
results are reproducible across runs and platforms.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AntiStokesDirection,
    InputError,
    NearDefective,
    NonConvergence,
    SingularMinor,
)

__all__ = [
    "EigenDecomposition",
    "SpectrumLadder",
    "eigen",
    "leading_spectra",
    "matrix_power",
    "matrix_exp_log",
    "unit_lu",
    "dominance_permutation",
    "permutation_matrix",
    "delta_truncate",
    "diag_part",
    "sort_complex",
]


def _as_square(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    return A


def sort_complex(values) -> np.ndarray:
    """Sort complex numbers lexicographically by (real, imaginary) part."""
    v = np.asarray(values, dtype=complex).ravel()
    order = np.lexsort((v.imag, v.real))
    return v[order]


def diag_part(M) -> np.ndarray:
    """Diagonal part of M as a full matrix."""
    A = _as_square(M)
    return np.diag(np.diag(A))


def delta_truncate(M, k: int) -> np.ndarray:
    """Keep the leading k-by-k block and the diagonal; zero everything else.

    For k = 1 this is the diagonal part; for k = n it is M itself.
    """
    A = _as_square(M)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise InputError(f"truncation level {k} outside 1..{n}")
    out = np.diag(np.diag(A)).astype(complex)
    out[:k, :k] = A[:k, :k]
    return out


# ---------------------------------------------------------------------------
# eigen decomposition
# ---------------------------------------------------------------------------

@dataclass
class EigenDecomposition:
    """Eigenvalues (sorted), matching eigenvector columns, and the condition
    number of the eigenvector matrix."""

    values: np.ndarray
    vectors: np.ndarray
    condition: float


def eigen(M, tol: float = 1e-8) -> EigenDecomposition:
    """Eigendecomposition with deterministic ordering.

    Eigenvalues are sorted by (real, imaginary) lexicographic order and the
    eigenvector columns are permuted to match.  Raises ``NearDefective`` when
    the eigenvector matrix has condition number above ``1/tol`` and
    ``NonConvergence`` if the underlying QR iteration fails.
    """
    A = _as_square(M)
    try:
        values, vectors = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    condition = float(np.linalg.cond(vectors))
    threshold = 1.0 / tol
    if not np.isfinite(condition) or condition > threshold:
        raise NearDefective(condition, threshold)
    return EigenDecomposition(values=values, vectors=vectors, condition=condition)


# ---------------------------------------------------------------------------
# spectra of leading principal submatrices
# ---------------------------------------------------------------------------

@dataclass
class SpectrumLadder:
    """Eigenvalues of every leading principal submatrix, level by level.

    ``levels[k-1]`` holds the k sorted eigenvalues of the leading k-by-k
    block.  Three diagnostic flags summarize the admissibility of the ladder:

    * ``sum_rule_ok``  -- each level sums to the trace of its block;
    * ``shrinking``    -- within every level, real parts differ by less
                          than 1 in absolute value (strictly);
    * ``non_resonant`` -- no difference between an eigenvalue of one level
                          and an eigenvalue of the next is a nonzero integer.
    """

    n: int
    levels: list[np.ndarray] = field(default_factory=list)
    sum_rule_ok: bool = True
    shrinking: bool = True
    non_resonant: bool = True

    @property
    def top(self) -> np.ndarray:
        return self.levels[-1]

    def level(self, k: int) -> np.ndarray:
        """Eigenvalues of the leading k-by-k block (1-based level index)."""
        return self.levels[k - 1]


def _ladder_flags(levels: list[np.ndarray], traces: list[complex], tol: float):
    sum_rule_ok = all(
        abs(lv.sum() - tr) <= tol * max(1.0, abs(tr)) for lv, tr in zip(levels, traces)
    )
    shrinking = True
    for lv in levels:
        re = lv.real
        if re.size and (re.max() - re.min()) >= 1.0 - tol:
            shrinking = False
            break
    non_resonant = True
    for lo, hi in zip(levels[:-1], levels[1:]):
        diff = hi[:, None] - lo[None, :]
        nearest = np.round(diff.real)
        is_integer = (np.abs(diff.real - nearest) <= tol) & (np.abs(diff.imag) <= tol)
        nonzero = np.abs(nearest) >= 0.5
        if np.any(is_integer & nonzero):
            non_resonant = False
            break
    return sum_rule_ok, shrinking, non_resonant


def leading_spectra(M, tol: float = 1e-8) -> SpectrumLadder:
    """Sorted eigenvalues of all leading principal submatrices of M."""
    A = _as_square(M)
    n = A.shape[0]
    levels = [sort_complex(np.linalg.eigvals(A[:k, :k])) for k in range(1, n + 1)]
    traces = [complex(np.trace(A[:k, :k])) for k in range(1, n + 1)]
    flags = _ladder_flags(levels, traces, tol)
    return SpectrumLadder(n=n, levels=levels, sum_rule_ok=flags[0],
                          shrinking=flags[1], non_resonant=flags[2])


def ladder_from_levels(levels: list[np.ndarray], tol: float = 1e-8) -> SpectrumLadder:
    """Assemble a ladder from externally chosen level spectra."""
    levels = [np.asarray(lv, dtype=complex).ravel() for lv in levels]
    n = len(levels)
    for k, lv in enumerate(levels, start=1):
        if lv.size != k:
            raise InputError(f"level {k} must hold {k} values, got {lv.size}")
    traces = [lv.sum() for lv in levels]
    flags = _ladder_flags(levels, traces, tol)
    return SpectrumLadder(n=n, levels=levels, sum_rule_ok=flags[0],
                          shrinking=flags[1], non_resonant=flags[2])


# ---------------------------------------------------------------------------
# matrix powers with explicit branch
# ---------------------------------------------------------------------------

#: eigenvector condition number beyond which the eigenbasis route is abandoned
_DEFECTIVE_LIMIT = 1e8


def matrix_exp_log(log_t: complex, M) -> np.ndarray:
    """exp(log_t * M), preferring an eigenbasis; falls back to a dense
    scaling-and-squaring exponential when M is close to defective."""
    A = _as_square(M)
    try:
        dec = eigen(A, tol=1.0 / _DEFECTIVE_LIMIT)
    except NearDefective:
        return scipy.linalg.expm(log_t * A)
    core = np.exp(log_t * dec.values)
    return (dec.vectors * core) @ np.linalg.inv(dec.vectors)


def matrix_power(t: complex, M, branch: int = 0) -> np.ndarray:
    """t**M = exp((ln|t| + i(Arg t + 2*pi*branch)) * M).

    ``Arg`` is the principal argument in (-pi, pi]; ``branch`` selects the
    winding explicitly so callers can track analytic continuation.
    """
    t = complex(t)
    if t == 0:
        raise InputError("matrix_power of t = 0 is undefined")
    log_t = cmath.log(t) + 2j * cmath.pi * branch
    return matrix_exp_log(log_t, M)


# ---------------------------------------------------------------------------
# unpivoted LDU
# ---------------------------------------------------------------------------

def unit_lu(M, tol: float = 1e-13) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor M = L @ D @ U with L unit lower, D diagonal, U unit upper.

    No pivoting is performed: the factorization exists exactly when all
    leading principal minors are nonzero, and ``SingularMinor(k)`` reports
    the first level at which it breaks down.
    """
    A = _as_square(M).copy()
    n = A.shape[0]
    scale = max(float(np.max(np.abs(A))), 1.0)
    L = np.eye(n, dtype=complex)
    U = np.eye(n, dtype=complex)
    D = np.zeros(n, dtype=complex)
    for k in range(n):
        pivot = A[k, k]
        if abs(pivot) <= tol * scale:
            raise SingularMinor(k + 1)
        D[k] = pivot
        L[k + 1:, k] = A[k + 1:, k] / pivot
        U[k, k + 1:] = A[k, k + 1:] / pivot
        A[k + 1:, k + 1:] -= np.outer(L[k + 1:, k], A[k, k + 1:])
    return L, np.diag(D), U


# ---------------------------------------------------------------------------
# dominance ordering along a ray
# ---------------------------------------------------------------------------

def dominance_permutation(u, d: float, tol: float = 1e-12) -> np.ndarray:
    """Rank the entries of u by Im(u_i * e^{i d}), most dominant first.

    Returns sigma with sigma[i] = rank of index i (0-based); rank 0 is the
    entry with the largest Im(u_i e^{i d}).  Raises ``AntiStokesDirection``
    when two entries tie, i.e. when d lies on the anti-Stokes set of u.
    """
    u = np.asarray(u, dtype=complex).ravel()
    keys = (u * cmath.exp(1j * d)).imag
    scale = max(float(np.max(np.abs(u))), 1.0)
    n = u.size
    for i in range(n):
        for j in range(i + 1, n):
            if abs(keys[i] - keys[j]) <= tol * scale:
                raise AntiStokesDirection((i, j), d)
    order = np.argsort(-keys, kind="stable")
    sigma = np.empty(n, dtype=int)
    sigma[order] = np.arange(n)
    return sigma


def permutation_matrix(sigma) -> np.ndarray:
    """Matrix P with P[sigma[i], i] = 1, so that (P M P^{-1}) reindexes M by rank."""
    sigma = np.asarray(sigma, dtype=int).ravel()
    n = sigma.size
    P = np.zeros((n, n), dtype=complex)
    P[sigma, np.arange(n)] = 1.0
    return P
