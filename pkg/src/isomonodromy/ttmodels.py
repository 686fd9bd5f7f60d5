"""Special families of boundary data with extra symmetry.

Two families of boundary data whose monodromy this package can cross-check
in closed form are built here:

* the 2x2 sine-Gordon family (:func:`piii_boundary`), parametrised by a
  complex pair ``(r, s)``;
* the cyclic Toda family (:func:`toda_boundary`), parametrised by a real
  anti-symmetric exponent vector ``m`` and a positive reciprocal weight
  vector ``l``.

Both families produce :class:`~isomonodromy.closedform.BoundaryDatum`
objects that feed directly into the closed-form monodromy constructors.
The module also provides the rank-4 braid move that renormalises a pair of
Stokes matrices into the standard dominance chamber
(:func:`braid_conjugate`), a grid scanner that classifies the Toda family
over a square of parameters (:func:`toda_scan`), and a report-only checker
for the four symmetry identities satisfied by anti-symmetric frames
(:func:`general_tt_symmetry_check`).
"""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import jsonio
from .closedform import (
    BoundaryDatum,
    Chamber,
    MonodromyData,
    boundary_datum,
    monodromy_from_boundary,
)
from .errors import (
    DomainError,
    InputError,
    NonConvergence,
    SpreadTooLarge,
    TabulatedFileMissing,
    UnsupportedRank,
)
from .flow import classify_log_confined

__all__ = [
    "ScanRecord",
    "SymmetryReport",
    "TodaConfig",
    "braid_conjugate",
    "build_omega_d",
    "bundled_order4_example",
    "general_tt_symmetry_check",
    "piii_boundary",
    "piii_symmetric_frame",
    "scan_csv_text",
    "toda_boundary",
    "toda_scan",
    "toda_symmetric_frame",
    "write_scan_csv",
]

_RECIPROCAL_TOL = 1e-12


# ---------------------------------------------------------------------------
# configuration containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TodaConfig:
    """Parameters of one member of the cyclic Toda family.

    ``m`` is a real vector ``(m_0, ..., m_n)`` that must be anti-symmetric
    under index reversal (``m_i + m_{n-i} = 0``); ``l`` is a positive real
    vector satisfying the reciprocal condition ``l_i * l_{n-i} = 1`` to
    1e-12.  For orders 4 and 5 the scan plane uses the coordinates
    ``(gamma, delta) = (2 m_0, 2 m_1)``.
    """

    n_plus_1: int
    m: tuple[float, ...]
    l: tuple[float, ...]

    def __post_init__(self):
        if self.n_plus_1 < 2:
            raise InputError("matrix order must be at least 2")
        m = tuple(float(x) for x in self.m)
        l = tuple(float(x) for x in self.l)
        if len(m) != self.n_plus_1 or len(l) != self.n_plus_1:
            raise InputError(
                f"m and l must both have length {self.n_plus_1}, "
                f"got {len(m)} and {len(l)}"
            )
        n = self.n_plus_1 - 1
        for i in range(self.n_plus_1):
            if abs(m[i] + m[n - i]) > _RECIPROCAL_TOL:
                raise InputError(
                    f"m is not anti-symmetric: m[{i}] + m[{n - i}] = "
                    f"{m[i] + m[n - i]:.3e}"
                )
            if l[i] <= 0.0:
                raise InputError("weights l must be positive")
            if abs(l[i] * l[n - i] - 1.0) > _RECIPROCAL_TOL:
                raise InputError(
                    f"weights are not reciprocal: l[{i}]*l[{n - i}] - 1 = "
                    f"{l[i] * l[n - i] - 1.0:.3e}"
                )
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "l", l)

    @property
    def gamma_delta(self) -> tuple[float, float]:
        """The scan-plane coordinates ``(2 m_0, 2 m_1)``."""
        return (2.0 * self.m[0], 2.0 * self.m[1])

    @classmethod
    def from_gamma_delta(cls, gamma: float, delta: float, n_plus_1: int = 4,
                         l: tuple[float, ...] | None = None) -> "TodaConfig":
        """Build the order-4 or order-5 configuration with the given
        scan-plane coordinates; ``m`` is anti-symmetric by construction and
        ``l`` defaults to the all-ones vector."""
        gamma = float(gamma)
        delta = float(delta)
        if n_plus_1 == 4:
            m = (gamma / 2.0, delta / 2.0, -delta / 2.0, -gamma / 2.0)
        elif n_plus_1 == 5:
            m = (gamma / 2.0, delta / 2.0, 0.0, -delta / 2.0, -gamma / 2.0)
        else:
            raise InputError(
                "scan-plane coordinates are defined for orders 4 and 5 only"
            )
        if l is None:
            l = (1.0,) * n_plus_1
        return cls(n_plus_1=n_plus_1, m=m, l=tuple(float(x) for x in l))


@dataclass(frozen=True)
class ScanRecord:
    """Classification outcome at one scan-grid point.

    ``verdict`` is True when the monodromy data at ``(gamma, delta)`` is
    strictly log-confined at every level; otherwise ``failing_levels``
    lists the offending block sizes, ``eigen_pairs`` the paired monodromy
    eigenvalues behind each flag, and ``cause`` a semicolon-joined summary
    (``diameter`` for a unit real-part gap within a level, ``resonance``
    for an integer cross-level difference, ``error:<Name>`` when the point
    could not be classified).
    """

    gamma: float
    delta: float
    verdict: bool
    failing_levels: tuple[int, ...] = ()
    eigen_pairs: tuple[tuple[complex, complex], ...] = ()
    cause: str = ""


# ---------------------------------------------------------------------------
# cyclic Toda structures
# ---------------------------------------------------------------------------

def build_omega_d(n_plus_1: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the symmetric discrete-Fourier matrix and the root-of-unity
    diagonal of the given order.

    ``Omega[k, j] = exp(2*pi*i*k*j/(n+1))`` and ``D`` is the diagonal of
    the (n+1)-th roots of unity in order.  Two structural identities are
    verified before returning: ``Omega @ conj(Omega)`` equals ``(n+1)`` times
    the identity, and ``Omega @ Omega`` equals ``(n+1)`` times the
    index-reversal permutation ``k -> -k (mod n+1)``.
    """
    if n_plus_1 < 2:
        raise InputError("matrix order must be at least 2")
    k = np.arange(n_plus_1)
    Omega = np.exp(2j * math.pi * np.outer(k, k) / n_plus_1)
    D = np.diag(np.exp(2j * math.pi * k / n_plus_1))
    reversal = np.zeros((n_plus_1, n_plus_1))
    reversal[k, (-k) % n_plus_1] = 1.0
    gap = max(
        float(np.max(np.abs(Omega @ np.conj(Omega) - n_plus_1 * np.eye(n_plus_1)))),
        float(np.max(np.abs(Omega @ Omega - n_plus_1 * reversal))),
    )
    if gap > 1e-10 * n_plus_1:
        raise NonConvergence(
            f"Fourier-matrix structural identities violated by {gap:.3e}"
        )
    return Omega, D


def toda_boundary(cfg: TodaConfig) -> BoundaryDatum:
    """Boundary datum of the cyclic Toda family member ``cfg``.

    The residue anchor is ``-Omega @ diag(m) @ inv(Omega)`` and the frame
    anchor is ``Omega @ c**diag(m) @ diag(l) @ Omega`` where ``c`` is the
    square of the first root-of-unity difference, negated.  The exponent
    spread ``max|m_i - m_j|`` must be strictly below 1.
    """
    m = np.asarray(cfg.m, dtype=float)
    spread = float(m.max() - m.min())
    if spread >= 1.0:
        raise SpreadTooLarge(spread)
    n1 = cfg.n_plus_1
    Omega, _ = build_omega_d(n1)
    # inv(Omega) = conj(Omega)/(n+1) exactly, by the verified DFT identity.
    Omega_inv = np.conj(Omega) / n1
    A_hat0 = -Omega @ np.diag(m.astype(complex)) @ Omega_inv
    c = -((1.0 - cmath.exp(-2j * math.pi / n1)) ** 2)
    factor = np.power(c, m) * np.asarray(cfg.l, dtype=float)
    G0 = Omega @ np.diag(factor) @ Omega
    return boundary_datum(A_hat0, G0)


# ---------------------------------------------------------------------------
# sine-Gordon family
# ---------------------------------------------------------------------------

def piii_boundary(r: complex, s: complex) -> BoundaryDatum:
    """Boundary datum of the 2x2 sine-Gordon family.

    The residue anchor has off-diagonal entries ``-i*r/4`` and the frame
    anchor conjugates ``diag(exp(i*s/2)*2**(i*r/2), reciprocal)`` by the
    fixed eigenvector frame of the residue.  The exponent spread
    ``|Im r| / 2`` must be strictly below 1.  The induced residue at the
    other pole is verified to be the negated anchor.
    """
    r = complex(r)
    s = complex(s)
    spread = abs(r.imag) / 2.0
    if spread >= 1.0:
        raise SpreadTooLarge(spread)
    A_hat0 = np.array([[0.0, -0.25j * r], [-0.25j * r, 0.0]], dtype=complex)
    Q = np.array([[1.0, 1.0], [-1.0, 1.0]], dtype=complex)
    Q_inv = 0.5 * np.array([[1.0, -1.0], [1.0, 1.0]], dtype=complex)
    h = cmath.exp(0.5j * s) * 2.0 ** (0.5j * r)
    G0 = Q @ np.diag([h, 1.0 / h]) @ Q_inv
    bd = boundary_datum(A_hat0, G0)
    residual = float(np.max(np.abs(bd.A_til0 + A_hat0)))
    if residual > 1e-10 * max(1.0, float(np.max(np.abs(A_hat0)))):
        raise NonConvergence(
            f"zero-side residue is not the negated anchor (gap {residual:.3e})"
        )
    return bd


# ---------------------------------------------------------------------------
# the rank-4 braid move
# ---------------------------------------------------------------------------

def braid_conjugate(S1, S2, m0: float, m1: float
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Renormalise a rank-4 Stokes pair by the elementary braid move.

    With ``s1 = 2*exp(3*pi*i/4)*(cos(pi/4*(1+2*m0)) + cos(pi/4*(3+2*m1)))``
    the unipotent factors are ``B1 = Id + s1*E21`` and
    ``B2 = Id - conj(s1)*E12``; the move returns
    ``(inv(B1) @ S1 @ B2, inv(B2) @ S2 @ B1)`` together with the inverse of
    their product, whose leading principal blocks drive the log-confinement
    test.  The move preserves the conjugacy class of the product, so the
    eigenvalues of ``inv(S1 @ S2)`` are unchanged.
    """
    S1 = np.asarray(S1, dtype=complex)
    S2 = np.asarray(S2, dtype=complex)
    if S1.shape != (4, 4) or S2.shape != (4, 4):
        raise UnsupportedRank(
            f"the braid move is defined for 4x4 matrices, got shapes "
            f"{S1.shape} and {S2.shape}"
        )
    s1 = 2.0 * cmath.exp(0.75j * math.pi) * (
        math.cos(0.25 * math.pi * (1.0 + 2.0 * float(m0)))
        + math.cos(0.25 * math.pi * (3.0 + 2.0 * float(m1)))
    )
    B1 = np.eye(4, dtype=complex)
    B1[1, 0] = s1
    B2 = np.eye(4, dtype=complex)
    B2[0, 1] = -s1.conjugate()
    S1p = np.linalg.solve(B1, S1) @ B2
    S2p = np.linalg.solve(B2, S2) @ B1
    nu = np.linalg.inv(S1p @ S2p)
    return S1p, S2p, nu


# ---------------------------------------------------------------------------
# the grid scan
# ---------------------------------------------------------------------------

def bundled_order4_example() -> Path:
    """Path of the bundled tabulated fixture holding the order-4 worked
    example (one record at ``gamma = 0.8, delta = -1.1``)."""
    return Path(resources.files("isomonodromy").joinpath(
        "data/order4_example.json"))


def _grid_axis(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0.0:
        raise InputError("grid step must be positive")
    if hi < lo:
        raise InputError("grid range must be increasing")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def _wrap_nu(nu: np.ndarray) -> MonodromyData:
    """Wrap a single monodromy matrix for the two-sided classifier.

    Tabulated scan points carry only the infinity-side matrix; the zero
    side is filled with the identity (which classifies trivially) and the
    diagonal trace targets vanish because the underlying exponent vector is
    anti-symmetric.
    """
    n = nu.shape[0]
    return MonodromyData(
        deltaA=np.zeros(n, dtype=complex),
        deltaGAG=np.zeros(n, dtype=complex),
        nu_inf=nu,
        nu_zero=np.eye(n, dtype=complex),
        C=np.eye(n, dtype=complex),
        direction=0.0,
        chamber=Chamber.standard(n),
    )


def _record_from_result(gamma: float, delta: float, res) -> ScanRecord:
    levels = tuple(sorted({int(f[1]) for f in res.failing}))
    pairs = []
    for side, level, j1, j2, _kind in res.failing:
        lams = (res.sigma_inf if side == "infinity" else res.sigma_zero)[level - 1]
        pairs.append((
            cmath.exp(2j * math.pi * lams[j1]),
            cmath.exp(2j * math.pi * lams[j2]),
        ))
    causes = sorted({f[4] for f in res.failing})
    return ScanRecord(
        gamma=gamma,
        delta=delta,
        verdict=bool(res.verdict),
        failing_levels=levels,
        eigen_pairs=tuple(pairs),
        cause=";".join(causes),
    )


def _classify_synthetic(gamma: float, delta: float, n_plus_1: int,
                        tol: float) -> ScanRecord:
    # Coincident exponents (gamma = +-delta on the grid diagonals) make the
    # eigenvalue ladders collide; an asymmetric jitter resolves these
    # measure-zero ties.  Its size is chosen so that products of the split
    # eigenvalue gaps clear the closed-form collision guards (which compare
    # against 1e-10) while moving the exponent real parts by well under the
    # distance of any grid point to the confinement boundary.
    jitters = ((0.0, 0.0), (3e-4, 6e-4))
    last: DomainError | None = None
    for dg, dd in jitters:
        try:
            cfg = TodaConfig.from_gamma_delta(gamma + dg, delta + dd, n_plus_1)
            bd = toda_boundary(cfg)
            res = classify_log_confined(monodromy_from_boundary(bd), tol=tol)
            return _record_from_result(gamma, delta, res)
        except DomainError as exc:
            last = exc
    return ScanRecord(
        gamma=gamma,
        delta=delta,
        verdict=False,
        cause=f"error:{type(last).__name__}",
    )


def _classify_tabulated(record: dict) -> ScanRecord:
    gamma = float(record["gamma"])
    delta = float(record["delta"])
    S1 = jsonio.decode_matrix(record["S1"])
    S2 = jsonio.decode_matrix(record["S2"])
    try:
        _, _, nu = braid_conjugate(S1, S2, gamma / 2.0, delta / 2.0)
        res = classify_log_confined(_wrap_nu(nu))
        return _record_from_result(gamma, delta, res)
    except DomainError as exc:
        return ScanRecord(
            gamma=gamma,
            delta=delta,
            verdict=False,
            cause=f"error:{type(exc).__name__}",
        )


def scan_csv_text(records: list[ScanRecord]) -> str:
    """Render scan records as CSV text with columns gamma, delta, verdict,
    failing_levels (semicolon-joined), cause."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["gamma", "delta", "verdict", "failing_levels", "cause"])
    for rec in records:
        writer.writerow([
            repr(rec.gamma),
            repr(rec.delta),
            "true" if rec.verdict else "false",
            ";".join(str(k) for k in rec.failing_levels),
            rec.cause,
        ])
    return buf.getvalue()


def write_scan_csv(records: list[ScanRecord], path) -> None:
    """Write scan records as CSV (see ``scan_csv_text`` for the columns)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(scan_csv_text(records))


def toda_scan(grid=((-0.95, 0.95), (-0.95, 0.95), 0.1),
              stokes_source: str = "synthetic",
              n_plus_1: int = 4,
              tol: float = 1e-6,
              csv_path=None) -> list[ScanRecord]:
    """Classify the Toda family over a rectangular grid of ``(gamma, delta)``.

    ``grid`` is ``((gamma_lo, gamma_hi), (delta_lo, delta_hi), step)``.  In
    synthetic mode each grid point is classified from its closed-form
    monodromy data (the point must satisfy the exponent-spread bound); with
    ``stokes_source`` naming a tabulated JSON file, each stored record
    ``{gamma, delta, S1, S2}`` is braided into the standard chamber first,
    which also covers points outside the spread bound.  Grid points are
    mutually independent (the scan is trivially parallelisable); failures
    at individual points are recorded in the output rather than raised.
    Records are returned in row-major grid order (tabulated records in file
    order) and optionally written to ``csv_path``.
    """
    records: list[ScanRecord] = []
    if stokes_source == "synthetic":
        (g_lo, g_hi), (d_lo, d_hi), step = grid
        for gamma in _grid_axis(float(g_lo), float(g_hi), float(step)):
            for delta in _grid_axis(float(d_lo), float(d_hi), float(step)):
                records.append(_classify_synthetic(gamma, delta, n_plus_1, tol))
    else:
        path = Path(stokes_source)
        if not path.is_file():
            raise TabulatedFileMissing(f"tabulated Stokes file not found: {path}")
        doc = jsonio.load(str(path))
        stored = jsonio.require(doc, "records")
        if not isinstance(stored, list):
            raise InputError("'records' must be a list of scan-point records")
        for record in stored:
            records.append(_classify_tabulated(record))
    if csv_path is not None:
        write_scan_csv(records, csv_path)
    return records


# ---------------------------------------------------------------------------
# anti-symmetric frames
# ---------------------------------------------------------------------------

def piii_symmetric_frame(r: complex, s: complex
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the sine-Gordon boundary pair into its anti-symmetric frame.

    Conjugating by ``diag(1, i)`` turns the residue anchor into a real
    anti-symmetric matrix and the frame anchor into a real reflection; for
    real ``(r, s)`` the returned pair satisfies all four identities of
    :func:`general_tt_symmetry_check`.
    """
    bd = piii_boundary(r, s)
    T = np.diag([1.0 + 0.0j, 1.0j])
    T_inv = np.diag([1.0 + 0.0j, -1.0j])
    return T @ bd.A_hat0 @ T_inv, T @ bd.G0 @ T


def toda_symmetric_frame(cfg: TodaConfig) -> tuple[np.ndarray, np.ndarray]:
    """Rotate the Toda residue anchor into its anti-symmetric frame.

    Returns ``(A, m)`` where ``A`` conjugates the residue anchor by the
    half-step phase diagonal ``diag(exp(i*pi*k/(n+1)))`` — exactly
    anti-symmetric whenever the exponent vector is anti-symmetric — and
    ``m`` is the orthogonal pairing of the family: the same rotation of the
    modulus-normalised frame anchor, twisted by the sign-reversal pairing
    that anti-commutes with ``A``.  For every real anti-symmetric exponent
    vector the pair satisfies the anti-symmetry, orthogonality and
    conjugation identities of :func:`general_tt_symmetry_check`; the
    Hermiticity identity is particular to the sine-Gordon frame of
    :func:`piii_symmetric_frame`.  The pairing does not depend on the
    weights ``l``.
    """
    n1 = cfg.n_plus_1
    m = np.asarray(cfg.m, dtype=float)
    Omega, _ = build_omega_d(n1)
    Omega_inv = np.conj(Omega) / n1
    A_hat0 = -Omega @ np.diag(m.astype(complex)) @ Omega_inv
    T = np.diag(np.exp(1j * math.pi * np.arange(n1) / n1))
    T_inv = np.diag(np.exp(-1j * math.pi * np.arange(n1) / n1))
    c = -((1.0 - cmath.exp(-2j * math.pi / n1)) ** 2)
    phase = np.power(c / abs(c), m)
    pairing_raw = Omega @ np.diag(phase) @ Omega / n1
    K = np.zeros((n1, n1))
    K[0, 0] = 1.0
    K[np.arange(1, n1), n1 - np.arange(1, n1)] = -1.0
    return T @ A_hat0 @ T_inv, T @ pairing_raw @ T @ K


# ---------------------------------------------------------------------------
# symmetry report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    """Residuals of the four anti-symmetric-frame identities.

    ``antisymmetry`` measures ``A + A^T``, ``orthogonality`` measures
    ``m @ m^T - Id``, ``reality`` measures ``m @ conj(A) + A @ conj(m)``
    (the conjugation identity in product form), and ``hermiticity``
    measures ``conj(m)^T - m``; ``passed`` is True when all four are
    strictly below ``tol``.
    """

    antisymmetry: float
    orthogonality: float
    reality: float
    hermiticity: float
    tol: float
    passed: bool

    @property
    def residuals(self) -> tuple[float, float, float, float]:
        return (self.antisymmetry, self.orthogonality, self.reality,
                self.hermiticity)


def general_tt_symmetry_check(A, m, tol: float = 1e-10) -> SymmetryReport:
    """Report how far ``(A, m)`` is from an anti-symmetric frame pair.

    The four identities checked are ``-A^T = A``, ``inv(m^T) = m``,
    ``-m @ conj(A) @ inv(conj(m)) = A`` and ``conj(m)^T = m``.  This is a
    report-only check: it never raises on failure, it returns the maximal
    entry-wise residual of each identity (the conjugation identity is
    evaluated in the inversion-free product form) and the verdict.
    """
    A = np.asarray(A, dtype=complex)
    m = np.asarray(m, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != m.shape:
        raise InputError("A and m must be square matrices of the same order")
    n = A.shape[0]
    r_anti = float(np.max(np.abs(A + A.T)))
    r_orth = float(np.max(np.abs(m @ m.T - np.eye(n))))
    r_real = float(np.max(np.abs(m @ np.conj(A) + A @ np.conj(m))))
    r_herm = float(np.max(np.abs(np.conj(m).T - m)))
    residuals = (r_anti, r_orth, r_real, r_herm)
    return SymmetryReport(
        antisymmetry=r_anti,
        orthogonality=r_orth,
        reality=r_real,
        hermiticity=r_herm,
        tol=float(tol),
        passed=bool(all(r < tol for r in residuals)),
    )
