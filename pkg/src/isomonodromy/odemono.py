"""Ground-truth numerical monodromy for the meromorphic linear systems.

Integrates the systems

    dF/dxi = (U + A/xi) F                      (irregular pole at infinity)
    dF/dxi = (U + A/xi + G V G^{-1}/xi^2) F    (irregular poles at 0 and infinity)

with U, V diagonal, builds sector-normalized fundamental solutions by
anchoring a truncated formal series on the bisecting ray of each sector,
and extracts Stokes, connection, and monodromy matrices by transporting
the solutions to common rays and matching.

Near infinity the gauge-transformed unknown Y = F e^{-xi U} is integrated
so that no exponential factor enters the state; near zero the substitution
eta = 1/xi turns the second-order pole into a system of the same shape
with weights -V, and the same machinery serves both singularities.  All
angles are tracked on the universal cover (as real numbers, never reduced
mod 2*pi), since solutions at directions d and d + 2*pi differ.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .closedform import Chamber, MonodromyData, similarity_residual
from .errors import (
    AnchorUnstable,
    InputError,
    NonFiniteState,
    ResonantResidue,
    StepUnderflow,
    TriangularityViolated,
)
from .linalg import dominance_permutation, eigen, permutation_matrix

__all__ = [
    "LinearSystemSpec",
    "SectorSolution",
    "integrate",
    "sector_solution",
    "numeric_stokes",
    "numeric_connection",
    "monodromy",
    "numeric_monodromy_data",
]

DEFAULT_TOL = 1e-10

_MAX_SERIES_ORDER = 40
_MIN_ANCHOR_RADIUS = 20.0
_SAMPLE_COUNT = 6
_LOOP_SEGMENTS = 8
_DISTINCT_TOL = 1e-12
_SAFE_EXPONENT = 200.0


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

def _as_diag_vector(M, name: str) -> np.ndarray:
    """Accept a diagonal matrix or a 1-d vector of diagonal entries."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim == 1:
        return arr.copy()
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        off = arr - np.diag(np.diag(arr))
        scale = max(float(np.max(np.abs(arr))), 1.0)
        if np.max(np.abs(off)) > 1e-13 * scale:
            raise InputError(f"{name} must be diagonal")
        return np.diag(arr).copy()
    raise InputError(f"{name} must be a vector or a square diagonal matrix")


def _require_distinct(vec: np.ndarray, name: str) -> None:
    n = vec.size
    scale = max(float(np.max(np.abs(vec))), 1.0)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(vec[i] - vec[j]) <= _DISTINCT_TOL * scale:
                raise InputError(
                    f"diagonal entries of {name} must be pairwise distinct; "
                    f"entries {i} and {j} coincide"
                )


@dataclass(frozen=True, eq=False)
class LinearSystemSpec:
    """A one- or two-pole linear system, pinned by its diagonal exponential
    weights and residue data.

    ``u`` and ``v`` hold the diagonals of U and V; ``A`` is the first-order
    residue.  For two-pole systems the coefficient of ``1/xi**2`` is
    ``G @ diag(v) @ inv(G)`` by construction.
    """

    u: np.ndarray
    A: np.ndarray
    v: np.ndarray | None = None
    G: np.ndarray | None = None

    def __post_init__(self):
        u = _as_diag_vector(self.u, "U")
        A = np.asarray(self.A, dtype=complex).copy()
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != u.size:
            raise InputError("A must be square and match the size of U")
        _require_distinct(u, "U")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "A", A)
        if (self.v is None) != (self.G is None):
            raise InputError("two-pole systems need both V and G")
        if self.v is not None:
            v = _as_diag_vector(self.v, "V")
            G = np.asarray(self.G, dtype=complex).copy()
            if v.size != u.size or G.shape != A.shape:
                raise InputError("V and G must match the size of U and A")
            _require_distinct(v, "V")
            try:
                np.linalg.inv(G)
            except np.linalg.LinAlgError as exc:
                raise InputError("G must be invertible") from exc
            object.__setattr__(self, "v", v)
            object.__setattr__(self, "G", G)

    @staticmethod
    def one_pole(U, A) -> "LinearSystemSpec":
        return LinearSystemSpec(u=U, A=A)

    @staticmethod
    def two_pole(U, V, A, G) -> "LinearSystemSpec":
        return LinearSystemSpec(u=U, A=A, v=V, G=G)

    @property
    def kind(self) -> str:
        return "one-pole" if self.v is None else "two-pole"

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def U(self) -> np.ndarray:
        return np.diag(self.u)

    @property
    def V(self) -> np.ndarray:
        if self.v is None:
            raise InputError("one-pole system has no V")
        return np.diag(self.v)

    @property
    def B2(self) -> np.ndarray:
        """Coefficient of 1/xi**2: G diag(v) G^{-1} (zero for one-pole)."""
        if self.v is None:
            return np.zeros((self.n, self.n), dtype=complex)
        return self.G @ np.diag(self.v) @ np.linalg.inv(self.G)

    @property
    def delta_A(self) -> np.ndarray:
        return np.diag(self.A).copy()

    @property
    def delta_GAG(self) -> np.ndarray:
        if self.v is None:
            raise InputError("one-pole system has no zero-side residue frame")
        return np.diag(np.linalg.solve(self.G, self.A @ self.G)).copy()

    @property
    def is_diagonal(self) -> bool:
        """True when A (and G) are diagonal, so everything is closed-form."""
        def diag_only(M):
            off = M - np.diag(np.diag(M))
            return float(np.max(np.abs(off))) == 0.0
        if not diag_only(self.A):
            return False
        if self.G is not None and not diag_only(self.G):
            return False
        return True

    def zero_side_system(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Weights and residues of the eta = 1/xi form of a two-pole system:
        Psi' = (-V - G^{-1}AG/eta - G^{-1}UG/eta^2) Psi with F = G Psi."""
        if self.v is None:
            raise InputError("one-pole system has no second pole at zero")
        Ginv = np.linalg.inv(self.G)
        return (-self.v, -(Ginv @ self.A @ self.G), -(Ginv @ self.U @ self.G))


@dataclass
class SectorSolution:
    """A sector-normalized fundamental solution, anchored and transported
    down to the matching circle |xi| = 1.

    ``samples`` holds ``(radius, theta, F)`` triples of raw fundamental-
    solution values along the anchor ray (theta on the universal cover);
    ``F_end`` is the value at ``(1, end_theta)``.  ``anchor_shift`` is the
    a-posteriori stability estimate obtained by doubling the anchor radius
    and re-transporting.
    """

    spec: LinearSystemSpec
    direction: float
    at: str
    anchor_radius: float
    anchor_theta: float
    anchor_shift: float
    series_order: int
    series_error: float
    tol: float
    samples: tuple
    end_theta: float
    F_end: np.ndarray

    def model(self, radius: float, theta: float) -> np.ndarray:
        """The asymptotic normalization at the point ``radius * e^{i theta}``:
        ``e^{xi U} xi^{diag A}`` at infinity, ``G e^{-V/xi} xi^{diag G^{-1}AG}``
        at zero (theta taken on the universal cover)."""
        xi = radius * cmath.exp(1j * theta)
        log_xi = math.log(radius) + 1j * theta
        if self.at == "infinity":
            core = np.exp(xi * self.spec.u + log_xi * self.spec.delta_A)
            return np.diag(core)
        core = np.exp(-self.spec.v / xi + log_xi * self.spec.delta_GAG)
        return self.spec.G @ np.diag(core)


# ---------------------------------------------------------------------------
# geometry: anti-Stokes directions and sector bisectors
# ---------------------------------------------------------------------------

def _anti_stokes_angles(weights: np.ndarray) -> list[float]:
    """Representatives in [0, 2*pi) of the directions where two exponential
    weights exchange dominance (the set is pi-periodic by pair symmetry)."""
    two_pi = 2.0 * math.pi
    raw = []
    n = weights.size
    for i in range(n):
        for j in range(n):
            if i != j:
                raw.append((-cmath.phase(weights[i] - weights[j])) % two_pi)
    raw.sort()
    merged: list[float] = []
    for a in raw:
        if not merged or abs(a - merged[-1]) > 1e-12:
            merged.append(a)
    return merged


def _sector_bisector(weights: np.ndarray, d: float) -> float:
    """Bisecting direction (on the cover) of the dominance sector containing
    d, i.e. the midpoint of the two anti-Stokes directions bracketing d."""
    dominance_permutation(weights, d)  # raises AntiStokesDirection on ties
    angles = _anti_stokes_angles(weights)
    if not angles:
        return float(d)
    two_pi = 2.0 * math.pi
    below = -math.inf
    above = math.inf
    for a in angles:
        k = math.floor((d - a) / two_pi)
        for kk in (k - 1, k, k + 1):
            c = a + two_pi * kk
            if c < d and c > below:
                below = c
            if c > d and c < above:
                above = c
    return 0.5 * (below + above)


# ---------------------------------------------------------------------------
# formal series at infinity and anchoring
# ---------------------------------------------------------------------------

def _series_coeffs(u: np.ndarray, A: np.ndarray, B: np.ndarray,
                   max_order: int) -> list[np.ndarray]:
    """Coefficients F_m of the formal solution (sum_m F_m xi^{-m}) e^{xi U}
    xi^{diag A}, from the recursion

        F_m U - U F_m = A F_{m-1} + B F_{m-2} + (m-1) F_{m-1} - F_{m-1} diag A

    whose diagonal part at order m+1 pins diag(F_m)."""
    n = u.size
    denom = np.subtract.outer(u, u)
    dA = np.diag(np.diag(A))
    off = ~np.eye(n, dtype=bool)
    zeros = np.zeros((n, n), dtype=complex)
    Fs = [np.eye(n, dtype=complex)]

    def fix_diagonal(m: int) -> None:
        # diagonal of F_{m-1}, from the order-m diagonal constraint
        Fm1 = Fs[m - 1]
        BF = B @ Fs[m - 2] if m >= 2 else zeros
        for i in range(n):
            acc = BF[i, i]
            for k in range(n):
                if k != i:
                    acc += A[i, k] * Fm1[k, i]
            Fm1[i, i] = -acc / (m - 1)

    for m in range(1, max_order + 1):
        if m >= 2:
            fix_diagonal(m)
        Fm1 = Fs[m - 1]
        Fm2 = Fs[m - 2] if m >= 2 else zeros
        rhs = A @ Fm1 + B @ Fm2 + (m - 1) * Fm1 - Fm1 @ dA
        Fm = np.zeros((n, n), dtype=complex)
        Fm[off] = rhs[off] / (-denom[off])
        Fs.append(Fm)
    fix_diagonal(max_order + 1)
    return Fs


def _truncation_at(norms: np.ndarray, R: float) -> tuple[float, int]:
    """Smallest term of the (asymptotic) series at radius R and its index."""
    vals = [norms[m] / R ** m for m in range(1, len(norms))]
    m_star = int(np.argmin(vals)) + 1
    return vals[m_star - 1], m_star


def _anchor_plan(u, A, B, R_user, tol):
    """Series coefficients plus an anchor radius: at least the radius where
    the order-2 correction drops below sqrt(tol), then grown until the
    smallest series term is safely below tol."""
    Fs = _series_coeffs(u, A, B, _MAX_SERIES_ORDER)
    norms = np.array([float(np.max(np.abs(F))) if F.size else 0.0 for F in Fs])
    if R_user is not None:
        R = float(R_user)
        if R <= 0:
            raise InputError("anchor radius must be positive")
    else:
        R = _MIN_ANCHOR_RADIUS
        if norms[2] > 0:
            R = max(R, math.sqrt(norms[2] / math.sqrt(tol)))
        target = max(0.05 * tol, 1e-13)
        for _ in range(80):
            err, _ = _truncation_at(norms, R)
            if err <= target:
                break
            R *= 1.5
    err, order = _truncation_at(norms, R)
    return Fs, R, order, err


def _anchor_value(Fs, order, a_diag, r, theta):
    """Gauged anchor Y = (sum_{m<=order} F_m xi^{-m}) xi^{diag A} at the
    point r e^{i theta} (the e^{xi U} factor cancels against the gauge)."""
    xi = r * cmath.exp(1j * theta)
    S = Fs[0].astype(complex).copy()
    for m in range(1, order + 1):
        S += Fs[m] * xi ** (-m)
    power = np.exp((math.log(r) + 1j * theta) * a_diag)
    return S * power[np.newaxis, :]


# ---------------------------------------------------------------------------
# transport (gauged and raw)
# ---------------------------------------------------------------------------

def _solve(fun, t0: float, t1: float, Y0: np.ndarray, tol: float,
           t_eval=None):
    n = Y0.shape[0]
    y0 = np.ascontiguousarray(Y0, dtype=complex).ravel().view(float).copy()
    sol = solve_ivp(fun, (t0, t1), y0, method="DOP853",
                    rtol=tol, atol=tol, t_eval=t_eval)
    if not sol.success:
        raise StepUnderflow(f"transport stopped early: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise NonFiniteState("transported solution left finite range")
    frames = [sol.y[:, k].copy().view(complex).reshape(n, n)
              for k in range(sol.y.shape[1])]
    return sol.t, frames


def _gauged_ray(u, A, B, Y0, theta, r0, r1, tol, r_eval=None):
    """Transport the gauged unknown Y = F e^{-xi U} along the ray of
    direction theta from radius r0 to r1."""
    n = u.size
    U = np.diag(u)
    e = cmath.exp(1j * theta)

    def fun(r, y):
        Y = y.view(complex).reshape(n, n)
        xi = r * e
        C = U + A / xi + B / (xi * xi)
        return (e * (C @ Y - Y @ U)).ravel().view(float)

    ts, frames = _solve(fun, r0, r1, Y0, tol, t_eval=r_eval)
    return ts, frames


def _gauged_arc(u, A, B, Y0, radius, th0, th1, tol):
    """Transport the gauged unknown along the arc |xi| = radius from angle
    th0 to th1 (angles on the cover; direction of travel is their order)."""
    if th0 == th1:
        return Y0.copy()
    n = u.size
    U = np.diag(u)

    def fun(th, y):
        Y = y.view(complex).reshape(n, n)
        xi = radius * cmath.exp(1j * th)
        C = U + A / xi + B / (xi * xi)
        return (1j * xi * (C @ Y - Y @ U)).ravel().view(float)

    _, frames = _solve(fun, th0, th1, Y0, tol)
    return frames[-1]


# ---------------------------------------------------------------------------
# sector engine (shared by the infinity and zero sides)
# ---------------------------------------------------------------------------

@dataclass
class _EngineResult:
    bisector: float
    radius: float
    order: int
    series_error: float
    anchor_shift: float
    Y_end: np.ndarray
    samples: list  # (radius, gauged Y) pairs along the bisector ray
    a_diag: np.ndarray


def _sector_engine(u, A, B, d, R_user, tol, want_samples=True) -> _EngineResult:
    """Anchor the sector solution at direction d and bring it (gauged) to
    the matching circle |xi| = 1 along the bisecting ray."""
    b = _sector_bisector(u, d)
    Fs, R, order, err = _anchor_plan(u, A, B, R_user, tol)
    a_diag = np.diag(A).copy()
    Y_R = _anchor_value(Fs, order, a_diag, R, b)

    r_eval = None
    if want_samples:
        growth = float(np.max(np.abs((np.exp(1j * b) * u).real)))
        r_safe = R if growth * R <= _SAFE_EXPONENT else max(
            1.0, _SAFE_EXPONENT / growth)
        r_eval = np.unique(np.concatenate([
            np.geomspace(min(r_safe, R), 1.0, _SAMPLE_COUNT), [1.0, R]]))[::-1]
        r_eval = r_eval[r_eval <= R]
    ts, frames = _gauged_ray(u, A, B, Y_R, b, R, 1.0, tol, r_eval=r_eval)
    Y_end = frames[-1]

    samples = []
    if want_samples:
        growth = float(np.max(np.abs((np.exp(1j * b) * u).real)))
        r_safe = R if growth * R <= _SAFE_EXPONENT else max(
            1.0, _SAFE_EXPONENT / growth)
        for r_k, Y_k in zip(ts, frames):
            if r_k <= r_safe + 1e-9:
                samples.append((float(r_k), Y_k))

    # a-posteriori stability: anchor at 2R, transport down to R, compare
    Y_2R = _anchor_value(Fs, order, a_diag, 2.0 * R, b)
    _, back = _gauged_ray(u, A, B, Y_2R, b, 2.0 * R, R, tol)
    scale = max(float(np.max(np.abs(Y_R))), 1.0)
    shift = float(np.max(np.abs(back[-1] - Y_R))) / scale
    if shift > 10.0 * tol:
        raise AnchorUnstable(shift, 10.0 * tol)

    return _EngineResult(bisector=b, radius=R, order=order, series_error=err,
                         anchor_shift=shift, Y_end=Y_end, samples=samples,
                         a_diag=a_diag)


def _ungauge(u, Y, r, theta):
    """Recover F = Y e^{xi U} at the point r e^{i theta}."""
    xi = r * cmath.exp(1j * theta)
    return Y * np.exp(xi * u)[np.newaxis, :]


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _check_at(at: str) -> str:
    table = {"infinity": "infinity", "inf": "infinity",
             "zero": "zero", "0": "zero"}
    if at not in table:
        raise InputError(f"'at' must be 'infinity' or 'zero', got {at!r}")
    return table[at]


def integrate(spec: LinearSystemSpec, path, F_start, tol: float = DEFAULT_TOL):
    """Raw transport of a fundamental-solution value along a piecewise path.

    Each path segment is either ``("line", z0, z1)`` (straight segment
    between two complex points, staying away from 0) or
    ``("arc", radius, theta0, theta1)`` with angles on the universal cover.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    F = np.asarray(F_start, dtype=complex).copy()
    if F.shape != (spec.n, spec.n):
        raise InputError("F_start must match the system size")
    n = spec.n
    U = spec.U
    A = spec.A
    B = spec.B2

    for seg in path:
        if not seg:
            raise InputError("empty path segment")
        kind = seg[0]
        if kind in ("line", "ray"):
            _, z0, z1 = seg
            z0 = complex(z0)
            z1 = complex(z1)
            dz = z1 - z0
            if dz == 0:
                continue
            # closest approach of the segment to the singular point 0
            s_star = min(max(-(z0.conjugate() * dz).real / abs(dz) ** 2, 0.0), 1.0)
            if abs(z0 + s_star * dz) < 1e-12 * max(abs(z0), abs(z1)):
                raise InputError("path passes through the singular point 0")

            def fun(s, y, z0=z0, dz=dz):
                Fm = y.view(complex).reshape(n, n)
                xi = z0 + s * dz
                C = U + A / xi + B / (xi * xi)
                return (dz * (C @ Fm)).ravel().view(float)

            _, frames = _solve(fun, 0.0, 1.0, F, tol)
            F = frames[-1]
        elif kind == "arc":
            _, radius, th0, th1 = seg
            radius = float(radius)
            if radius <= 0:
                raise InputError("arc radius must be positive")
            if th0 == th1:
                continue

            def fun(th, y, radius=radius):
                Fm = y.view(complex).reshape(n, n)
                xi = radius * cmath.exp(1j * th)
                C = U + A / xi + B / (xi * xi)
                return (1j * xi * (C @ Fm)).ravel().view(float)

            _, frames = _solve(fun, float(th0), float(th1), F, tol)
            F = frames[-1]
        else:
            raise InputError(f"unknown path segment kind {kind!r}")
    return F


def _diagonal_sector_solution(spec, d, at, R, tol):
    n = spec.n
    if at == "infinity":
        weights = spec.u
    else:
        weights = -spec.v
    b = _sector_bisector(weights, d if at == "infinity" else -d)
    if at == "zero":
        b = -b  # report the ray in the xi-plane
    radius = float(R) if R is not None else (
        _MIN_ANCHOR_RADIUS if at == "infinity" else 1.0 / _MIN_ANCHOR_RADIUS)

    v = spec.v if spec.v is not None else np.zeros(n, dtype=complex)
    g = np.diag(spec.G).copy() if spec.G is not None else np.ones(n, dtype=complex)
    a = spec.delta_A

    def value(r, theta):
        xi = r * cmath.exp(1j * theta)
        log_xi = math.log(r) + 1j * theta
        core = np.exp(spec.u * xi + log_xi * a - v / xi)
        if at == "zero":
            core = core * g
        return np.diag(core)

    radii = (np.geomspace(radius, 1.0, _SAMPLE_COUNT)
             if at == "infinity" else np.geomspace(radius, 1.0, _SAMPLE_COUNT))
    samples = tuple((float(r), b, value(float(r), b)) for r in radii)
    return SectorSolution(
        spec=spec, direction=float(d), at=at, anchor_radius=radius,
        anchor_theta=b, anchor_shift=0.0, series_order=0, series_error=0.0,
        tol=tol, samples=samples, end_theta=b, F_end=value(1.0, b))


def sector_solution(spec: LinearSystemSpec, d: float, at: str = "infinity",
                    R: float | None = None,
                    tol: float = DEFAULT_TOL) -> SectorSolution:
    """Fundamental solution normalized in the dominance sector at direction
    d, anchored by the truncated formal series at the anchor radius and
    transported to the matching circle |xi| = 1.

    For ``at="zero"`` (two-pole only) ``R`` is the anchor radius near 0 in
    the xi-plane; internally the system is rewritten in eta = 1/xi.
    """
    at = _check_at(at)
    if tol <= 0:
        raise InputError("tol must be positive")
    if spec.kind == "one-pole" and at == "zero":
        raise InputError(
            "the pole at zero of a one-pole system is regular-singular; "
            "sector solutions live at infinity (see numeric_connection)")
    if spec.is_diagonal:
        return _diagonal_sector_solution(spec, d, at, R, tol)

    if at == "infinity":
        res = _sector_engine(spec.u, spec.A, spec.B2, d, R, tol)
        samples = tuple(
            (r, res.bisector, _ungauge(spec.u, Y, r, res.bisector))
            for r, Y in res.samples)
        F_end = _ungauge(spec.u, res.Y_end, 1.0, res.bisector)
        return SectorSolution(
            spec=spec, direction=float(d), at=at, anchor_radius=res.radius,
            anchor_theta=res.bisector, anchor_shift=res.anchor_shift,
            series_order=res.order, series_error=res.series_error, tol=tol,
            samples=samples, end_theta=res.bisector, F_end=F_end)

    u0, A0, B0 = spec.zero_side_system()
    R_eta = None if R is None else 1.0 / float(R)
    res = _sector_engine(u0, A0, B0, -d, R_eta, tol)
    samples = []
    for r_eta, Y in res.samples:
        F_eta = _ungauge(u0, Y, r_eta, res.bisector)
        samples.append((1.0 / r_eta, -res.bisector, spec.G @ F_eta))
    F_end = spec.G @ _ungauge(u0, res.Y_end, 1.0, res.bisector)
    return SectorSolution(
        spec=spec, direction=float(d), at=at, anchor_radius=1.0 / res.radius,
        anchor_theta=-res.bisector, anchor_shift=res.anchor_shift,
        series_order=res.order, series_error=res.series_error, tol=tol,
        samples=tuple(samples), end_theta=-res.bisector, F_end=F_end)


def _stokes_core(u, A, B, base, R, tol):
    """Sector solutions at base and base +/- pi, with the two Stokes factors
    matched on the bisecting ray of the base sector."""
    res0 = _sector_engine(u, A, B, base, R, tol, want_samples=False)
    resP = _sector_engine(u, A, B, base + math.pi, R, tol, want_samples=False)
    resM = _sector_engine(u, A, B, base - math.pi, R, tol, want_samples=False)
    YP = _gauged_arc(u, A, B, resP.Y_end, 1.0, resP.bisector, res0.bisector, tol)
    YM = _gauged_arc(u, A, B, resM.Y_end, 1.0, resM.bisector, res0.bisector, tol)
    xi_c = cmath.exp(1j * res0.bisector)
    Einv = np.exp(-xi_c * u)
    E = np.exp(xi_c * u)

    def match(Y_other):
        S = np.linalg.solve(Y_other, res0.Y_end)
        return (Einv[:, np.newaxis] * S) * E[np.newaxis, :]

    S_plus = match(YP)
    S_minus = match(YM)

    sigma = dominance_permutation(u, base)
    P = permutation_matrix(sigma).real
    Tp = P @ S_plus @ P.T
    Tm = P @ S_minus @ P.T
    n = u.size
    resid = 0.0
    for T, lower in ((Tp, True), (Tm, False)):
        resid = max(resid, float(np.max(np.abs(np.diag(T) - 1.0))))
        mask = np.tril(np.ones((n, n), dtype=bool), -1)
        if not lower:
            mask = mask.T
        if mask.any():
            resid = max(resid, float(np.max(np.abs(T[mask]))))
    # The guard exists to catch a wrong chamber ordering (an order-one
    # violation); transport noise itself is bounded below by the integrator's
    # practical accuracy floor even at very tight tolerances.
    allowed = max(10.0 * tol, 1e-9)
    if resid > allowed:
        raise TriangularityViolated(resid, allowed)
    return res0, S_plus, S_minus


def numeric_stokes(spec: LinearSystemSpec, d: float, at: str = "infinity",
                   R: float | None = None,
                   tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Stokes factors at direction d: ``S_plus = F_{d+pi}^{-1} F_d`` and
    ``S_minus = F_{d-pi}^{-1} F_d``, matched on a common ray.

    For ``at="zero"`` these are the zero-side factors of a two-pole system,
    obtained from the eta = 1/xi form (whose own direction label is d).
    """
    at = _check_at(at)
    if spec.kind == "one-pole" and at == "zero":
        raise InputError("one-pole systems have Stokes factors at infinity only")
    if spec.is_diagonal:
        eye = np.eye(spec.n, dtype=complex)
        return eye.copy(), eye.copy()
    if at == "infinity":
        u, A, B = spec.u, spec.A, spec.B2
        base = float(d)
    else:
        u, A, B = spec.zero_side_system()
        R = None if R is None else 1.0 / float(R)
        base = float(d)
    _, S_plus, S_minus = _stokes_core(u, A, B, base, R, tol)
    return S_plus, S_minus


def _loop(u, A, B, res0, tol):
    """Continue the gauged solution once counter-clockwise around 0 along
    the matching circle and return the loop matrix in the F-frame."""
    Y = res0.Y_end
    step = 2.0 * math.pi / _LOOP_SEGMENTS
    for k in range(_LOOP_SEGMENTS):
        Y = _gauged_arc(u, A, B, Y, 1.0,
                        res0.bisector + k * step,
                        res0.bisector + (k + 1) * step, tol)
    xi_c = cmath.exp(1j * res0.bisector)
    M = np.linalg.solve(res0.Y_end, Y)
    return (np.exp(-xi_c * u)[:, np.newaxis] * M) * np.exp(xi_c * u)[np.newaxis, :]


def monodromy(spec: LinearSystemSpec, d: float, at: str = "infinity",
              tol: float = DEFAULT_TOL) -> np.ndarray:
    """Monodromy of the sector solution at direction d.

    At infinity this is ``F_d(xi)^{-1} F_d(xi e^{2 pi i})``; at zero it is
    ``F_d(xi)^{-1} F_d(xi e^{-2 pi i})`` (the loop that is positive around
    the pole at 0), computed in the eta = 1/xi frame.
    """
    at = _check_at(at)
    if spec.kind == "one-pole" and at == "zero":
        raise InputError("use at='infinity' for the one-pole loop")
    if spec.is_diagonal:
        if at == "infinity":
            return np.diag(np.exp(2j * math.pi * spec.delta_A))
        return np.diag(np.exp(-2j * math.pi * spec.delta_GAG))
    if at == "infinity":
        u, A, B = spec.u, spec.A, spec.B2
        base = float(d)
    else:
        u, A, B = spec.zero_side_system()
        base = float(-d)
    res0 = _sector_engine(u, A, B, base, None, tol, want_samples=False)
    return _loop(u, A, B, res0, tol)


def _frobenius_value(u, Phi, r, theta, tol):
    """Value at r e^{i theta} of the solution F = H(xi) xi^{Phi} of the
    one-pole system that is holomorphically framed at 0 (H(0) = Id),
    via the everywhere-convergent recursion H_m (Phi + m) - Phi H_m =
    U H_{m-1}."""
    n = u.size
    dec = eigen(Phi)
    lam = dec.values
    W = dec.vectors
    Winv = np.linalg.inv(W)
    # refuse resonant residues: eigenvalues differing by a nonzero integer
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            diff = lam[i] - lam[j]
            k = round(diff.real)
            if k != 0 and abs(diff - k) < 1e-8:
                raise ResonantResidue(abs(k), abs(diff - k))
    U = np.diag(u)
    xi = r * cmath.exp(1j * theta)
    H = np.eye(n, dtype=complex)
    total = H.copy()
    shift = np.subtract.outer(-lam, -lam)  # shift[i, j] = lam_j - lam_i
    converged = False
    for m in range(1, 400):
        R_m = Winv @ (U @ H) @ W
        H = W @ (R_m / (m + shift)) @ Winv
        term = H * xi ** m
        total += term
        if m >= 8 and float(np.max(np.abs(term))) < 1e-16 * max(
                1.0, float(np.max(np.abs(total)))):
            converged = True
            break
    if not converged:
        raise NonFiniteState(
            "power series at the regular-singular point failed to converge")
    log_xi = math.log(r) + 1j * theta
    vals = np.exp(log_xi * lam)
    return total @ ((W * vals[np.newaxis, :]) @ Winv)


def numeric_connection(spec: LinearSystemSpec, d: float = 0.0,
                       R0: float | None = None, Rinf: float | None = None,
                       tol: float = DEFAULT_TOL) -> np.ndarray:
    """Connection matrix between the zero-framed and the infinity-normalized
    solutions, matched on the ray of direction d.

    One-pole: ``C = F_d(xi)^{-1} F0(xi)`` with F0 the xi^{Phi}-framed
    solution at 0 (Phi must be non-resonant).  Two-pole: ``C =
    Finf_d(xi)^{-1} F0_{-d}(xi)`` with both sector solutions continued to
    the common point e^{i d}.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    if spec.is_diagonal:
        if spec.kind == "one-pole":
            return np.eye(spec.n, dtype=complex)
        return spec.G.copy()

    # infinity side: anchor, come down the bisector, swing to the d-ray
    res_inf = _sector_engine(spec.u, spec.A, spec.B2, d, Rinf, tol,
                             want_samples=False)
    Y_inf = _gauged_arc(spec.u, spec.A, spec.B2, res_inf.Y_end, 1.0,
                        res_inf.bisector, float(d), tol)
    F_inf = _ungauge(spec.u, Y_inf, 1.0, float(d))

    if spec.kind == "one-pole":
        r0 = 0.5 if R0 is None else float(R0)
        if r0 <= 0:
            raise InputError("R0 must be positive")
        F0 = _frobenius_value(spec.u, spec.A, r0, float(d), tol)
        F0 = integrate(spec, [("line", r0 * cmath.exp(1j * d),
                               cmath.exp(1j * d))], F0, tol)
        return np.linalg.solve(F_inf, F0)

    # two-pole zero side: the solution labelled -d lives at eta-direction d
    u0, A0, B0 = spec.zero_side_system()
    R_eta = None if R0 is None else 1.0 / float(R0)
    res0 = _sector_engine(u0, A0, B0, float(d), R_eta, tol, want_samples=False)
    Y0 = _gauged_arc(u0, A0, B0, res0.Y_end, 1.0, res0.bisector, float(-d), tol)
    F0 = spec.G @ _ungauge(u0, Y0, 1.0, float(-d))
    return np.linalg.solve(F_inf, F0)


def numeric_monodromy_data(spec: LinearSystemSpec, d: float = 0.0,
                           tol: float = DEFAULT_TOL,
                           R: float | None = None):
    """Full numerically-computed monodromy data of a two-pole system at
    direction d, with shared transports, plus a diagnostics record.

    Returns ``(MonodromyData, diagnostics)``.  The stored zero-side
    monodromy is the one at the mirrored direction label, which is the
    orientation entering the similarity relation with the connection
    matrix.  ``R`` overrides the automatic anchor radius of the sector
    solves on both sides.  Diagnostics: unit-triangular LU residuals on
    both sides, the similarity residual, and the Stokes factors themselves.
    """
    if spec.kind != "two-pole":
        raise InputError("numeric_monodromy_data needs a two-pole system")
    at_inf_u, at_inf_A, at_inf_B = spec.u, spec.A, spec.B2
    u0, A0, B0 = spec.zero_side_system()
    deltaA = spec.delta_A
    deltaGAG = spec.delta_GAG

    if spec.is_diagonal:
        nu_inf = np.diag(np.exp(2j * math.pi * deltaA))
        nu_zero = np.diag(np.exp(-2j * math.pi * deltaGAG))
        C = spec.G.copy()
        S_eye = np.eye(spec.n, dtype=complex)
        chamber = Chamber(
            u_order=tuple(int(k) for k in dominance_permutation(spec.u, d)),
            v_order=tuple(int(k) for k in dominance_permutation(-spec.v, d)))
        md = MonodromyData(deltaA=deltaA, deltaGAG=deltaGAG, nu_inf=nu_inf,
                           nu_zero=nu_zero, C=C, direction=float(d),
                           chamber=chamber)
        diag = {"lu_infinity": 0.0, "lu_zero": 0.0,
                "similarity": similarity_residual(nu_inf, nu_zero, C),
                "anchor_shift": 0.0,
                "S_inf": (S_eye.copy(), S_eye.copy()),
                "S_zero": (S_eye.copy(), S_eye.copy())}
        return md, diag

    # infinity side: Stokes at d plus the loop, sharing the base sector
    res_inf, Sp_inf, Sm_inf = _stokes_core(at_inf_u, at_inf_A, at_inf_B,
                                           float(d), R, tol)
    nu_inf = _loop(at_inf_u, at_inf_A, at_inf_B, res_inf, tol)

    # zero side: everything lives at eta-direction d
    res_z, Sp_z, Sm_z = _stokes_core(u0, A0, B0, float(d), R, tol)
    nu_zero = _loop(u0, A0, B0, res_z, tol)

    # connection on the d-ray, reusing both base sectors
    Y_inf = _gauged_arc(at_inf_u, at_inf_A, at_inf_B, res_inf.Y_end, 1.0,
                        res_inf.bisector, float(d), tol)
    F_inf = _ungauge(at_inf_u, Y_inf, 1.0, float(d))
    Y0 = _gauged_arc(u0, A0, B0, res_z.Y_end, 1.0, res_z.bisector,
                     float(-d), tol)
    F0 = spec.G @ _ungauge(u0, Y0, 1.0, float(-d))
    C = np.linalg.solve(F_inf, F0)

    lu_inf = float(np.max(np.abs(
        nu_inf - np.linalg.solve(Sm_inf, np.diag(np.exp(2j * math.pi * deltaA))
                                 @ Sp_inf))))
    lu_zero = float(np.max(np.abs(
        nu_zero - np.linalg.solve(Sm_z, np.diag(np.exp(-2j * math.pi * deltaGAG))
                                  @ Sp_z))))
    chamber = Chamber(
        u_order=tuple(int(k) for k in dominance_permutation(spec.u, d)),
        v_order=tuple(int(k) for k in dominance_permutation(-spec.v, d)))
    md = MonodromyData(deltaA=deltaA, deltaGAG=deltaGAG, nu_inf=nu_inf,
                       nu_zero=nu_zero, C=C, direction=float(d),
                       chamber=chamber)
    diag = {
        "lu_infinity": lu_inf,
        "lu_zero": lu_zero,
        "similarity": similarity_residual(nu_inf, nu_zero, C),
        "anchor_shift": max(res_inf.anchor_shift, res_z.anchor_shift),
        "S_inf": (Sp_inf, Sm_inf),
        "S_zero": (Sp_z, Sm_z),
    }
    return md, diag
