"""Isomonodromic flow of the two-pole family, driven from its small-time anchor.

The deformation family keeps the irregular direction matrix ``U = diag(u)``
at infinity fixed and moves the second-order pole at zero through
``V(t) = w0*Id + t*diag(c)`` with a constant direction vector ``c``
(normalized so ``c[0] = 0``).  A solution ``(A(t), G(t))`` of the deformation
equations is pinned down by its behaviour as ``t -> 0``: a residue anchor
``A_hat`` (limit of a diagonal-power conjugation of ``A``) and a frame anchor
``G_hat``.  This module provides

* :class:`Coordinates` -- the ratio coordinates ``(z, t, w)`` used to
  parametrize pole configurations, with conversion to and from the raw
  ``(u, v)`` tuples;
* :func:`picard_flow` -- fixed-point integration of the deformation
  equations from the anchor ``(A_hat, G_hat)`` to a target ``t``;
* :func:`boundary_to_hat` / :func:`decoupled_tail_hat` -- assembly of the
  flow anchor from a boundary datum once the pole configuration is chosen;
* :func:`lambda_adjust` -- integer-shift normalization of logarithm
  exponents subject to a trace constraint;
* :func:`classify_log_confined` -- the spectral confinement test on
  monodromy data that characterizes anchored (shrinking) solutions;
* :func:`inverse_monodromy` -- reconstruction of the boundary datum from
  strictly confined monodromy data (closed form at rank 2, damped Newton
  at ranks 3 and 4).

The fixed-point integrals run over the straight segment from 0 to ``t`` and
carry integrable endpoint singularities ``s**(-sigma)`` with ``sigma < 1``;
they are evaluated on geometrically graded panels with Gauss--Legendre nodes
and a spectral cumulative-integration matrix, so every iterate is available
at all quadrature nodes simultaneously.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .closedform import (
    BoundaryDatum,
    MonodromyData,
    boundary_datum,
    connection_chain,
    monodromy_from_boundary,
    nu_from_boundary,
    stokes_full,
)
from .errors import (
    ChamberMismatch,
    DegenerateAlphaBeta,
    DivergentIteration,
    InconsistentTrace,
    InputError,
    NewtonStall,
    NonConvergence,
    NonFiniteState,
    NotLogConfined,
    QuadratureFailure,
    SpreadTooLarge,
    StepUnderflow,
    UnsupportedRank,
)
from .linalg import eigen, leading_spectra, matrix_exp_log, matrix_power

__all__ = [
    "AdjustedExponents",
    "ClassificationResult",
    "Coordinates",
    "FlowState",
    "boundary_to_hat",
    "classify_log_confined",
    "decoupled_tail_hat",
    "inverse_monodromy",
    "lambda_adjust",
    "picard_flow",
]

#: default tolerance for the fixed-point flow
DEFAULT_TOL = 1e-10

#: Gauss--Legendre nodes per quadrature panel
_GL_NODES = 12

#: iterations before divergence detection is armed
_WARMUP = 4

#: maximum number of target halvings when the fixed-point map fails to contract
_MAX_HALVINGS = 20

#: slack around 1 when deciding whether a real-part diameter is strictly below 1
_STRICT_SLACK = 1e-9


# ---------------------------------------------------------------------------
# ratio coordinates for the pole configuration
# ---------------------------------------------------------------------------

def _distinct(values: tuple, label: str) -> None:
    vals = np.asarray(values, dtype=complex)
    n = vals.size
    for i in range(n):
        for j in range(i + 1, n):
            if abs(vals[i] - vals[j]) <= 1e-13 * max(1.0, abs(vals[i]), abs(vals[j])):
                raise InputError(
                    f"{label} entries {i} and {j} coincide ({vals[i]} vs {vals[j]})"
                )


@dataclass(frozen=True)
class Coordinates:
    """Ratio coordinates ``(z, t, w)`` of a two-pole configuration.

    ``z = (z0, z1, ..., z_{n-1})`` encodes the infinity-side positions:
    ``u1 = z0`` and ``u_k = z0 + z1*...*z_{k-1}`` for ``k >= 2``.  ``w``
    stores the zero-side ratios in descending order followed by the offset,
    ``w = (w_{n-1}, ..., w_2, w0)``: the zero-side positions are ``v1 = w0``,
    ``v_n = w0 + t/(z1*...*z_{n-1})`` and
    ``v_k = w0 + (v_n - w0)/(w_{n-1}*...*w_k)`` for ``2 <= k <= n-1``.
    The remaining ratio ``w1 = v2 - v1`` is derived:
    ``w1 = t/(z1*...*z_{n-1} * w_{n-1}*...*w_2)``.
    """

    z: tuple
    t: complex
    w: tuple

    def __post_init__(self) -> None:
        z = tuple(complex(x) for x in self.z)
        w = tuple(complex(x) for x in self.w)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", complex(self.t))
        object.__setattr__(self, "w", w)
        n = len(z)
        if n < 2:
            raise InputError("at least two pole positions are required")
        if len(w) != n - 1:
            raise InputError(
                f"w must hold {n - 1} entries (descending ratios then offset), got {len(w)}"
            )
        if self.t == 0:
            raise InputError("the flow time t must be nonzero")
        if any(x == 0 for x in z[1:]):
            raise InputError("all ratio entries z1..z_{n-1} must be nonzero")
        if any(x == 0 for x in w[:-1]):
            raise InputError("all ratio entries w_{n-1}..w_2 must be nonzero")
        _distinct(self.u, "u")
        _distinct(self.v, "v")

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def u(self) -> tuple:
        base = self.z[0]
        out = [base]
        prod = 1.0 + 0.0j
        for zk in self.z[1:]:
            prod *= zk
            out.append(base + prod)
        return tuple(out)

    @property
    def v(self) -> tuple:
        n = self.n
        w0 = self.w[-1]
        chain = self.w[:-1]  # (w_{n-1}, ..., w_2)
        span = self.t / math.prod(self.z[1:]) if n > 1 else 0.0
        # span = v_n - w0
        out = [w0]
        for k in range(2, n):
            denom = math.prod(chain[: n - k])
            out.append(w0 + span / denom)
        out.append(w0 + span)
        return tuple(out)

    @property
    def w1(self) -> complex:
        return self.t / (math.prod(self.z[1:]) * math.prod(self.w[:-1]))

    @classmethod
    def from_uv(cls, u, v) -> "Coordinates":
        u = tuple(complex(x) for x in u)
        v = tuple(complex(x) for x in v)
        n = len(u)
        if len(v) != n:
            raise InputError("u and v must have equal length")
        if n < 2:
            raise InputError("at least two pole positions are required")
        z = [u[0], u[1] - u[0]]
        for k in range(2, n):
            z.append((u[k] - u[0]) / (u[k - 1] - u[0]))
        t = (v[n - 1] - v[0]) * (u[n - 1] - u[0])
        chain = [(v[k] - v[0]) / (v[k - 1] - v[0]) for k in range(n - 1, 1, -1)]
        return cls(z=tuple(z), t=t, w=tuple(chain) + (v[0],))


# ---------------------------------------------------------------------------
# graded panel quadrature
# ---------------------------------------------------------------------------

def _reference_panel():
    """Nodes, weights and the cumulative-integration matrix on [-1, 1].

    The cumulative matrix ``C`` maps samples at the Gauss--Legendre nodes to
    the integrals of their polynomial interpolant from -1 to each node; it is
    assembled from the antiderivatives of the Legendre basis.
    """
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    vand = np.polynomial.legendre.legvander(x, _GL_NODES - 1)
    ext = np.polynomial.legendre.legvander(x, _GL_NODES)
    phi = np.empty((_GL_NODES, _GL_NODES))
    phi[:, 0] = x + 1.0
    for j in range(1, _GL_NODES):
        phi[:, j] = (ext[:, j + 1] - ext[:, j - 1]) / (2 * j + 1)
    cum = phi @ np.linalg.inv(vand)
    return x, w, cum


_X_REF, _W_REF, _CUM_REF = _reference_panel()


@dataclass
class _PanelGrid:
    sigma: np.ndarray  # all nodes, ascending in (0, 1)
    half: np.ndarray   # panel half-widths, one per panel (ascending panels)


def _graded_grid(panel_count: int) -> _PanelGrid:
    """Geometrically graded panels on (0, 1], refined toward 0."""
    edges = [(0.0, 2.0 ** -panel_count)]
    edges += [(2.0 ** -(m + 1), 2.0 ** -m) for m in reversed(range(panel_count))]
    sigma = np.empty(_GL_NODES * len(edges))
    half = np.empty(len(edges))
    for p, (a, b) in enumerate(edges):
        half[p] = 0.5 * (b - a)
        sigma[p * _GL_NODES:(p + 1) * _GL_NODES] = 0.5 * (a + b) + half[p] * _X_REF
    return _PanelGrid(sigma=sigma, half=half)


def _cumulative(grid: _PanelGrid, values: np.ndarray):
    """Integrals of sampled kernel values from 0 to every node, plus the total.

    ``values`` has shape (N, n, n) with N the total node count; the result is
    the same shape (cumulative integrals at the nodes) together with the
    (n, n) integral over the whole interval.
    """
    pcount = grid.half.size
    n = values.shape[-1]
    blocks = values.reshape(pcount, _GL_NODES, n, n)
    local = np.einsum("qk,pkij->pqij", _CUM_REF, blocks)
    local *= grid.half[:, None, None, None]
    totals = np.einsum("k,pkij->pij", _W_REF, blocks)
    totals *= grid.half[:, None, None]
    prefix = np.cumsum(totals, axis=0)
    exclusive = prefix - totals
    out = (exclusive[:, None, :, :] + local).reshape(values.shape)
    return out, prefix[-1]


def _quadrature_selftest(grid: _PanelGrid, exponent: float) -> None:
    """Verify the grid integrates its worst-case endpoint singularity.

    Compared on the geometric panels, where the rule must be accurate; the
    closing panel next to 0 carries the residual power of the singular weight
    and is bounded by the depth rule, not by polynomial exactness.
    """
    samples = (grid.sigma ** (-exponent))[:, None, None].astype(complex)
    blocks = samples.reshape(grid.half.size, _GL_NODES, 1, 1)
    totals = np.einsum("k,pkij->pij", _W_REF, blocks) * grid.half[:, None, None]
    quad = complex(totals[1:].sum(axis=0)[0, 0])
    sigma_min = 2.0 ** (1 - grid.half.size)  # top edge of the closing panel
    exact = (1.0 - sigma_min ** (1.0 - exponent)) / (1.0 - exponent)
    residual = abs(quad - exact) / abs(exact)
    if residual > 1e-7:
        raise QuadratureFailure(residual, 1e-7)


# ---------------------------------------------------------------------------
# the fixed-point flow
# ---------------------------------------------------------------------------

@dataclass
class FlowState:
    """Converged state of the deformation flow at one target time.

    ``A`` and ``G`` are the deformed residue and frame; ``B`` is the
    second-order coefficient ``G @ diag(v) @ inv(G)`` reconstructed from the
    renormalized iterate.  ``G_tilde`` and ``B_tilde`` are the renormalized
    unknowns actually iterated: ``G = t**A_hat @ G_tilde @ w1**(-delta_GAG)``
    and ``B = t * t**A_hat @ B_tilde @ t**(-A_hat) + w0*Id``.  ``sigma1`` is
    the real-part spread of the anchor spectrum and ``K`` the fitted constant
    in the departure bound ``|A(t) - A_hat| <= K * |t|**(1 - sigma1)``.
    ``b_residual`` is the relative gap between the two routes to ``B`` at the
    fixed-point stage; ``anchor_t`` is the time at which the fixed-point
    iteration itself converged (smaller than ``t`` only when the target was
    reached by continuation after halvings), and ``residuals`` lists the
    per-sweep iterate movements of that stage.
    """

    t: complex
    A: np.ndarray
    G: np.ndarray
    B: np.ndarray
    G_tilde: np.ndarray
    B_tilde: np.ndarray
    w1: complex
    delta_GAG: np.ndarray
    sigma1: float
    K: float
    b_residual: float
    iteration: int
    residuals: tuple
    anchor_t: complex
    A_hat: np.ndarray
    G_hat: np.ndarray


def _diag_vec(M, label: str) -> np.ndarray:
    arr = np.asarray(M, dtype=complex)
    if arr.ndim == 1:
        return arr.copy()
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        off = arr - np.diag(np.diag(arr))
        if np.max(np.abs(off)) > 1e-13 * max(1.0, float(np.max(np.abs(arr)))):
            raise InputError(f"{label} must be diagonal")
        return np.diag(arr).copy()
    raise InputError(f"{label} must be a vector or a square diagonal matrix")


def _picard_core(u, c, A_hat, G_hat, B_hat, t, tol, max_iter, mu, Q, Qinv):
    """One fixed-point solve anchored at 0 with target time ``t``.

    Iterates the integral form of the deformation equations for
    ``(A, G_tilde, B_tilde)`` on graded quadrature nodes along the segment
    from 0 to ``t``.  Returns the endpoint iterates, the sweep count and the
    per-sweep movements.
    """
    n = u.size
    spread = float(mu.real.max() - mu.real.min())
    sigma2 = min(spread + 0.05, 0.9)
    panels_trunc = math.ceil(math.log2(10.0 / tol) / (1.0 - sigma2))
    # The conjugation by s**(-A_hat) amplifies the relative roundoff floor of
    # the residue departure (which itself decays like |s|**(1-sigma2)) by
    # |s|**(-sigma2); for spreads above 1/2 the grid must not reach depths
    # where the product |s|**(1-2*sigma2) lifts that floor above the budget.
    panels = panels_trunc
    if 2.0 * sigma2 - 1.0 > 0.05:
        noise_room = 0.1 * tol / 1e-16
        panels_noise = math.floor(
            math.log2(abs(t)) + math.log2(noise_room) / (2.0 * sigma2 - 1.0)
        ) if noise_room > 1.0 else 12
        panels = min(panels_trunc, panels_noise)
    panels = int(np.clip(panels, 12, 600))
    grid = _graded_grid(panels)
    _quadrature_selftest(grid, sigma2)

    count = grid.sigma.size
    log_t = cmath.log(t)
    ls = np.log(grid.sigma) + log_t
    dmu = mu[:, None] - mu[None, :]
    powers_plus = np.exp(ls[:, None, None] * dmu[None, :, :])    # s**A_hat conj factors
    powers_minus = np.exp(-ls[:, None, None] * dmu[None, :, :])  # s**(-A_hat) conj factors
    inv_sigma = (1.0 / grid.sigma)[:, None, None]

    # The residue iterate is stored as its departure from the anchor: adding
    # the anchor would round the departure's small deep-node values down to
    # the anchor's absolute floating floor, which the s**(-A_hat) conjugation
    # then amplifies catastrophically.
    dA_nodes = np.zeros((count, n, n), dtype=complex)
    G_nodes = np.tile(G_hat, (count, 1, 1))
    B_nodes = np.tile(B_hat, (count, 1, 1))
    dA_end = np.zeros((n, n), dtype=complex)
    G_end, B_end = G_hat.copy(), B_hat.copy()

    scale = max(
        1.0,
        float(np.max(np.abs(A_hat))),
        float(np.max(np.abs(G_hat))),
        float(np.max(np.abs(B_hat))),
    )
    deltas: list[float] = []
    for sweep in range(1, max_iter + 1):
        # residue update from the previous second-order iterate
        conj_b = np.matmul(np.matmul(Qinv, B_nodes), Q)
        dressed_b = np.matmul(np.matmul(Q, powers_plus * conj_b), Qinv)
        kernel_a = u[None, :, None] * dressed_b - dressed_b * u[None, None, :]
        cum_a, tot_a = _cumulative(grid, kernel_a)
        dA_new = t * cum_a
        dA_end_new = t * tot_a

        # frame and second-order updates from the previous residue iterate
        conj_da = np.matmul(np.matmul(Qinv, dA_nodes), Q)
        dressed_da = np.matmul(np.matmul(Q, powers_minus * conj_da), Qinv)
        kernel_g = inv_sigma * np.matmul(dressed_da, G_nodes)
        cum_g, tot_g = _cumulative(grid, kernel_g)
        G_new = G_hat[None, :, :] + cum_g
        G_end_new = G_hat + tot_g

        kernel_b = inv_sigma * (
            np.matmul(dressed_da, B_nodes) - np.matmul(B_nodes, dressed_da)
        )
        cum_b, tot_b = _cumulative(grid, kernel_b)
        B_new = B_hat[None, :, :] + cum_b
        B_end_new = B_hat + tot_b

        delta = max(
            float(np.max(np.abs(dA_new - dA_nodes))),
            float(np.max(np.abs(G_new - G_nodes))),
            float(np.max(np.abs(B_new - B_nodes))),
            float(np.max(np.abs(dA_end_new - dA_end))),
            float(np.max(np.abs(G_end_new - G_end))),
            float(np.max(np.abs(B_end_new - B_end))),
        ) / scale
        deltas.append(delta)
        dA_nodes, G_nodes, B_nodes = dA_new, G_new, B_new
        dA_end, G_end, B_end = dA_end_new, G_end_new, B_end_new

        if not np.isfinite(delta):
            raise DivergentIteration(float("inf"), sweep)
        if delta <= 1e-15:
            return A_hat + dA_end, G_end, B_end, sweep, deltas
        if delta < tol and (len(deltas) < 2 or delta < 0.9 * deltas[-2]):
            return A_hat + dA_end, G_end, B_end, sweep, deltas
        if (
            sweep > _WARMUP
            and len(deltas) >= 3
            and deltas[-1] >= deltas[-2] >= deltas[-3]
            and delta > max(100.0 * tol, 1e-8)
        ):
            raise DivergentIteration(delta, sweep)

    raise NonConvergence(
        f"fixed-point sweep stalled: movement {deltas[-1]:.3e} after "
        f"{max_iter} sweeps (target {tol:g})"
    )


def _ode_continue(u, c, A0, G0, t0, t1, tol):
    """Continue ``(A, G)`` from ``t0`` to ``t1`` along the segment between them.

    Integrates the differentiated fixed-point equations
    ``dA/dt = [diag(u), G diag(c) inv(G)]`` and
    ``dG/dt = (A G - G diag(D))/t`` with the conjugated-residue diagonal ``D``
    frozen at its (flow-invariant) starting value.
    """
    n = u.size
    D = np.diag(np.linalg.solve(G0, A0 @ G0)).copy()
    span = t1 - t0

    def rhs(s, y):
        state = y.view(complex)
        A = state[: n * n].reshape(n, n)
        G = state[n * n:].reshape(n, n)
        t = t0 + s * span
        X = np.linalg.solve(G.T, (G * c[None, :]).T).T  # G diag(c) inv(G)
        dA = u[:, None] * X - X * u[None, :]
        dG = (A @ G - G * D[None, :]) / t
        out = np.concatenate([dA.ravel(), dG.ravel()]) * span
        return out.view(float)

    y0 = np.concatenate([A0.ravel(), G0.ravel()]).view(float)
    # the integrator's global error exceeds its local tolerance; leave margin
    step_tol = max(tol * 1e-2, 1e-13)
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853",
                    rtol=step_tol, atol=step_tol)
    if not sol.success:
        raise StepUnderflow(f"continuation from {t0} to {t1} failed: {sol.message}")
    y_end = sol.y[:, -1].copy().view(complex)
    if not np.all(np.isfinite(y_end)):
        raise NonFiniteState("continuation produced non-finite values")
    return y_end[: n * n].reshape(n, n), y_end[n * n:].reshape(n, n)


def picard_flow(A_hat, G_hat, U, V, t_target, tol: float = DEFAULT_TOL,
                max_iter: int = 200) -> FlowState:
    """Flow the anchored solution ``(A_hat, G_hat)`` out to time ``t_target``.

    ``U`` and ``V`` are the diagonal pole data at the target time; the family
    moves ``V`` along ``w0*Id + t*diag(c)`` with ``c = (V - V[0])/t_target``
    held fixed.  The fixed-point iteration contracts for small targets; when
    it fails to contract the target is halved (up to 20 times), the anchored
    solve is run at the smaller time, and the result is continued to the
    target by direct integration of the differentiated equations, which is
    legitimate because the anchored solution is unique.
    """
    A_hat = np.asarray(A_hat, dtype=complex)
    G_hat = np.asarray(G_hat, dtype=complex)
    if A_hat.ndim != 2 or A_hat.shape[0] != A_hat.shape[1]:
        raise InputError("A_hat must be square")
    if G_hat.shape != A_hat.shape:
        raise InputError("G_hat must match A_hat in shape")
    n = A_hat.shape[0]
    u = _diag_vec(U, "U")
    v = _diag_vec(V, "V")
    if u.size != n or v.size != n:
        raise InputError("U and V must match the rank of the anchor matrices")
    t_target = complex(t_target)
    if t_target == 0:
        raise InputError("t_target must be nonzero")
    try:
        G_hat_inv = np.linalg.inv(G_hat)
    except np.linalg.LinAlgError as exc:
        raise InputError("G_hat must be invertible") from exc

    w0 = v[0]
    c = (v - w0) / t_target
    B_hat = G_hat @ (c[:, None] * G_hat_inv)

    dec = eigen(A_hat)
    mu, Q = dec.values, dec.vectors
    Qinv = np.linalg.inv(Q)
    sigma1 = float(mu.real.max() - mu.real.min())
    if sigma1 >= 1.0:
        raise SpreadTooLarge(sigma1)

    last_exc: DivergentIteration | None = None
    for halving in range(_MAX_HALVINGS + 1):
        t_anchor = t_target / (2 ** halving)
        try:
            A_end, G_end, B_end, sweeps, deltas = _picard_core(
                u, c, A_hat, G_hat, B_hat, t_anchor, tol, max_iter, mu, Q, Qinv
            )
            break
        except DivergentIteration as exc:
            last_exc = exc
    else:
        raise last_exc  # type: ignore[misc]

    # recover the raw (A, G, B) at the anchor time
    t_pow = matrix_power(t_anchor, A_hat)
    dressed_frame = t_pow @ G_end
    d_vec = np.diag(np.linalg.solve(dressed_frame, A_end @ dressed_frame)).copy()
    v_anchor = w0 + t_anchor * c
    w1_anchor = (v_anchor[1] - v_anchor[0]) if n >= 2 else 1.0 + 0.0j
    G_at = dressed_frame @ np.diag(np.exp(-cmath.log(w1_anchor) * d_vec))
    B_at = t_anchor * (t_pow @ B_end @ np.linalg.inv(t_pow)) + w0 * np.eye(n)
    B_target_route = G_at @ (v_anchor[:, None] * np.linalg.inv(G_at))
    b_residual = float(
        np.max(np.abs(B_at - B_target_route))
        / max(1.0, float(np.max(np.abs(B_target_route))))
    )
    if b_residual > 1e-6:
        raise QuadratureFailure(b_residual, 1e-6)

    A_t, G_t = A_end, G_at
    if t_anchor != t_target:
        A_t, G_t = _ode_continue(u, c, A_end, G_at, t_anchor, t_target, tol)
        t_pow = matrix_power(t_target, A_hat)
        d_vec = np.diag(np.linalg.solve(G_t, A_t @ G_t)).copy()
        B_full = G_t @ (v[:, None] * np.linalg.inv(G_t))
        w1 = (v[1] - v[0]) if n >= 2 else 1.0 + 0.0j
        G_tilde = np.linalg.solve(t_pow, G_t) @ np.diag(
            np.exp(cmath.log(w1) * d_vec)
        )
        B_tilde = np.linalg.solve(t_pow, (B_full - w0 * np.eye(n)) @ t_pow) / t_target
    else:
        w1 = w1_anchor
        G_tilde = G_end
        B_tilde = B_end
        B_full = B_at

    departure = float(np.max(np.abs(A_t - A_hat)))
    K = departure / (abs(t_target) ** (1.0 - sigma1))

    return FlowState(
        t=t_target,
        A=A_t,
        G=G_t,
        B=B_full,
        G_tilde=G_tilde,
        B_tilde=B_tilde,
        w1=complex(w1),
        delta_GAG=d_vec,
        sigma1=sigma1,
        K=K,
        b_residual=b_residual,
        iteration=sweeps,
        residuals=tuple(deltas),
        anchor_t=t_anchor,
        A_hat=A_hat.copy(),
        G_hat=G_hat.copy(),
    )


# ---------------------------------------------------------------------------
# anchors from boundary data
# ---------------------------------------------------------------------------

def _diag_conjugate(A0: np.ndarray, factor: complex) -> np.ndarray:
    """Conjugate by the diagonal power of ``factor`` with exponents diag(A0)."""
    d0 = np.diag(A0)
    lf = cmath.log(factor)
    return A0 * np.exp(lf * (d0[None, :] - d0[:, None]))


def boundary_to_hat(bd: BoundaryDatum, coords: Coordinates,
                    tol: float = 1e-10):
    """Assemble the rank-2 flow anchor from a boundary datum.

    Returns ``(A_hat, G_hat)`` for the configuration ``coords``: the residue
    anchor is the boundary residue conjugated by the diagonal power of the
    ratio ``z1``, and the frame anchor is the same diagonal power applied to
    the boundary frame.  The zero-side residue of the assembled anchor is
    checked against the boundary datum's own zero-side residue.
    """
    if bd.n != 2:
        raise UnsupportedRank(
            f"the direct anchor assembly handles rank 2 only, got rank {bd.n}"
        )
    if coords.n != 2:
        raise InputError("coordinate rank must match the boundary datum")
    top = bd.ladder_hat.top
    spread = float(top.real.max() - top.real.min())
    if spread >= 1.0:
        raise SpreadTooLarge(spread)
    z1 = coords.z[1]
    d0 = np.diag(bd.A_hat0)
    A_hat = _diag_conjugate(bd.A_hat0, z1)
    G_hat = np.diag(np.exp(-cmath.log(z1) * d0)) @ bd.G0
    residual = float(
        np.max(np.abs(bd.A_til0 + np.linalg.solve(G_hat, A_hat @ G_hat)))
        / max(1.0, float(np.max(np.abs(bd.A_til0))))
    )
    if residual > tol:
        raise InputError(
            f"assembled anchor fails the zero-side consistency identity "
            f"(residual {residual:.3e})"
        )
    return A_hat, G_hat


def decoupled_tail_hat(bd: BoundaryDatum, coords: Coordinates,
                       tol: float = 1e-10):
    """Flow anchor for boundary data whose couplings sit in the leading block.

    When every off-diagonal entry of the boundary residue outside the leading
    2-by-2 block vanishes and the boundary frame is that block plus a diagonal
    tail, the ratio limits beyond ``z1`` are exact: the anchor is the rank-2
    assembly extended by the scalar power
    ``(z2*...*z_{n-1}*w_{n-1}*...*w_2)**(-A_hat)``.  Returns
    ``(A_hat, G_hat)``.
    """
    n = bd.n
    if coords.n != n:
        raise InputError("coordinate rank must match the boundary datum")
    scale_a = max(1.0, float(np.max(np.abs(bd.A_hat0))))
    scale_g = max(1.0, float(np.max(np.abs(bd.G0))))
    mask = np.ones((n, n), dtype=bool)
    mask[:2, :2] = False
    np.fill_diagonal(mask, False)
    if float(np.max(np.abs(bd.A_hat0[mask]), initial=0.0)) > 1e-12 * scale_a:
        raise InputError(
            "boundary residue couples entries outside the leading 2-by-2 block"
        )
    if float(np.max(np.abs(bd.G0[mask]), initial=0.0)) > 1e-12 * scale_g:
        raise InputError(
            "boundary frame couples entries outside the leading 2-by-2 block"
        )
    top = bd.ladder_hat.top
    spread = float(top.real.max() - top.real.min())
    if spread >= 1.0:
        raise SpreadTooLarge(spread)
    z1 = coords.z[1]
    d0 = np.diag(bd.A_hat0)
    A_hat = _diag_conjugate(bd.A_hat0, z1)
    G_block = np.diag(np.exp(-cmath.log(z1) * d0)) @ bd.G0
    log_scalar = sum(cmath.log(zk) for zk in coords.z[2:])
    log_scalar += sum(cmath.log(wk) for wk in coords.w[:-1])
    G_hat = matrix_exp_log(-log_scalar, A_hat) @ G_block
    residual = float(
        np.max(np.abs(bd.A_til0 + np.linalg.solve(G_hat, A_hat @ G_hat)))
        / max(1.0, float(np.max(np.abs(bd.A_til0))))
    )
    if residual > tol:
        raise InputError(
            f"assembled anchor fails the zero-side consistency identity "
            f"(residual {residual:.3e})"
        )
    return A_hat, G_hat


# ---------------------------------------------------------------------------
# integer-shift normalization of logarithm exponents
# ---------------------------------------------------------------------------

class AdjustedExponents(list):
    """Logarithm exponents after integer redistribution.

    A plain list of the adjusted exponents (in the input order), carrying the
    outcome of the confinement search: ``diameter`` is the spread of real
    parts achieved, ``strict`` tells whether it is strictly below 1,
    ``tight_pair`` names the offending index pair when the best achievable
    window is exactly closed (length 1), ``shifts`` records the integers
    added to the principal exponents, and ``trace_defect`` the (tiny) gap
    between the requested and achieved sums.
    """

    strict: bool = True
    diameter: float = 0.0
    tight_pair: tuple | None = None
    shifts: tuple = ()
    trace_defect: complex = 0.0


def _greedy_shifts(re0: np.ndarray, total: int) -> np.ndarray:
    """Fallback redistribution for large sets: round, fix the sum, then
    transfer units between the extremes while this shrinks the spread."""
    k = re0.size
    center = (re0.sum() + total) / k
    shifts = np.round(center - re0).astype(int)
    gap = total - int(shifts.sum())
    order = np.argsort(re0 + shifts)
    i = 0
    while gap != 0:
        j = order[i % k] if gap > 0 else order[-1 - (i % k)]
        shifts[j] += 1 if gap > 0 else -1
        gap += -1 if gap > 0 else 1
        i += 1
    while True:
        re = re0 + shifts
        lo, hi = int(np.argmin(re)), int(np.argmax(re))
        if re[hi] - re[lo] <= 1.0:
            break
        trial = shifts.copy()
        trial[lo] += 1
        trial[hi] -= 1
        re_t = re0 + trial
        if re_t.max() - re_t.min() < re[hi] - re[lo] - 1e-15:
            shifts = trial
        else:
            break
    return shifts


def lambda_adjust(eigen_exponentials, trace_target, tol: float = 1e-6
                  ) -> AdjustedExponents:
    """Choose logarithm exponents of unit-circle-scale multipliers.

    Each input value ``m_j`` is written ``m_j = exp(2*pi*i*lam_j)``; the
    returned exponents satisfy ``sum(lam_j) == trace_target`` exactly (the
    principal exponents are shifted by integers) and their real parts are
    confined to the shortest achievable interval.  The sum constraint must be
    attainable: the defect between ``trace_target`` and the principal-branch
    sum has to be an integer up to ``tol``, else :class:`InconsistentTrace`
    is raised.  Adjusting an already strictly confined set reproduces it.
    """
    vals = np.asarray(list(eigen_exponentials), dtype=complex).ravel()
    if vals.size == 0:
        raise InputError("at least one multiplier is required")
    if not np.all(np.isfinite(vals)) or np.any(vals == 0):
        raise InputError("multipliers must be finite and nonzero")
    k = vals.size
    lam0 = np.angle(vals) / (2 * math.pi) - 1j * np.log(np.abs(vals)) / (2 * math.pi)
    total = complex(trace_target)
    gap = total - lam0.sum()
    nearest = round(gap.real)
    defect = gap - nearest
    if abs(defect) > tol * max(1.0, abs(total)):
        raise InconsistentTrace(complex(defect))

    re0 = lam0.real
    if k <= 7:
        center = (re0.sum() + nearest) / k
        ranges = [
            range(int(math.ceil(center - r - 2.0)), int(math.floor(center - r + 2.0)) + 1)
            for r in re0
        ]
        best_shifts = None
        best_diam = math.inf
        for combo in itertools.product(*ranges):
            if sum(combo) != nearest:
                continue
            re = re0 + np.asarray(combo)
            diam = float(re.max() - re.min())
            if diam < best_diam - 1e-15 or (
                abs(diam - best_diam) <= 1e-15
                and best_shifts is not None
                and combo < best_shifts
            ):
                best_diam = diam
                best_shifts = combo
        if best_shifts is None:
            shifts = _greedy_shifts(re0, nearest)
        else:
            shifts = np.asarray(best_shifts, dtype=int)
    else:
        shifts = _greedy_shifts(re0, nearest)

    lam = lam0 + shifts
    re = lam.real
    diameter = float(re.max() - re.min())
    out = AdjustedExponents(complex(x) for x in lam)
    out.shifts = tuple(int(s) for s in shifts)
    out.diameter = diameter
    out.trace_defect = complex(defect)
    out.strict = diameter < 1.0 - _STRICT_SLACK
    out.tight_pair = None
    if not out.strict:
        hi = int(np.argmax(re))
        lo = int(np.argmin(re))
        out.tight_pair = (lo, hi)
    return out


# ---------------------------------------------------------------------------
# the spectral confinement test
# ---------------------------------------------------------------------------

@dataclass
class ClassificationResult:
    """Outcome of the confinement test on one set of monodromy data.

    ``sigma_inf[k-1]`` / ``sigma_zero[k-1]`` hold the adjusted exponents of
    the leading k-by-k blocks of the infinity / zero monodromy matrices.
    ``shrinking`` requires every level of both matrices to confine strictly
    (real-part diameter below 1); ``non_resonant`` forbids nonzero-integer
    differences between exponents of consecutive levels.  ``nonstrict`` marks
    the borderline case where some level only achieves a closed window of
    length exactly 1.  ``failing`` lists ``(side, level, j1, j2, kind)`` for
    every violation, with ``kind`` one of ``"diameter"`` or ``"resonance"``.
    """

    verdict: bool
    shrinking: bool
    non_resonant: bool
    nonstrict: bool
    sigma_inf: list = field(default_factory=list)
    sigma_zero: list = field(default_factory=list)
    failing: list = field(default_factory=list)


def classify_log_confined(md: MonodromyData, tol: float = 1e-6
                          ) -> ClassificationResult:
    """Test whether monodromy data is strictly confined at every level.

    Runs the leading-block spectra of both monodromy matrices through
    :func:`lambda_adjust` with the trace targets induced by the diagonal
    data (partial sums of ``deltaA`` at infinity, negated partial sums of
    ``deltaGAG`` at zero), then checks strict real-part confinement within
    each level and integer-difference freedom between consecutive levels.
    The test is defined on the standard chamber; other chambers raise
    :class:`ChamberMismatch`.
    """
    if not md.chamber.is_standard:
        raise ChamberMismatch(
            f"confinement test requires the standard dominance chamber, got "
            f"{md.chamber}"
        )
    n = md.n
    shrinking = True
    non_resonant = True
    nonstrict = False
    failing: list = []
    sides = (
        ("infinity", md.nu_inf, np.cumsum(md.deltaA)),
        ("zero", md.nu_zero, -np.cumsum(md.deltaGAG)),
    )
    collected = {}
    for side, M, targets in sides:
        levels = []
        for k in range(1, n + 1):
            ev = np.linalg.eigvals(np.asarray(M, dtype=complex)[:k, :k])
            adj = lambda_adjust(ev, targets[k - 1], tol)
            levels.append(adj)
            if not adj.strict:
                shrinking = False
                if adj.diameter <= 1.0 + _STRICT_SLACK:
                    nonstrict = True
                re = np.asarray([x.real for x in adj])
                for j1 in range(k):
                    for j2 in range(j1 + 1, k):
                        if abs(re[j1] - re[j2]) >= 1.0 - _STRICT_SLACK:
                            failing.append((side, k, j1, j2, "diameter"))
        for k in range(n - 1):
            lower = np.asarray(levels[k], dtype=complex)
            upper = np.asarray(levels[k + 1], dtype=complex)
            diff = upper[:, None] - lower[None, :]
            near = np.round(diff.real)
            integral = (np.abs(diff.real - near) <= 1e-8) & (np.abs(diff.imag) <= 1e-8)
            nonzero = np.abs(near) >= 0.5
            for j1, j2 in zip(*np.nonzero(integral & nonzero)):
                non_resonant = False
                failing.append((side, k + 2, int(j1), int(j2), "resonance"))
        collected[side] = levels
    return ClassificationResult(
        verdict=shrinking and non_resonant,
        shrinking=shrinking,
        non_resonant=non_resonant,
        nonstrict=nonstrict,
        sigma_inf=collected["infinity"],
        sigma_zero=collected["zero"],
        failing=failing,
    )


# ---------------------------------------------------------------------------
# inverse problem: boundary datum from monodromy data
# ---------------------------------------------------------------------------

def _is_near_diagonal(A: np.ndarray) -> bool:
    off = A - np.diag(np.diag(A))
    return float(np.max(np.abs(off))) <= 1e-14 * max(1.0, float(np.max(np.abs(A))))


def _invert_rank2(nu_target: np.ndarray, diag_vec: np.ndarray, top_level,
                  side: str):
    """Closed-form rank-2 residue from one monodromy matrix.

    The diagonal is given; the off-diagonal product is fixed by the adjusted
    exponents through the determinant, and each individual entry follows from
    one triangular-factor corner entry, whose coefficient is calibrated on a
    trial matrix carrying the same spectral ladder.
    """
    lam = np.asarray(top_level, dtype=complex)
    d = np.asarray(diag_vec, dtype=complex)
    product = d[0] * d[1] - lam[0] * lam[1]
    s_plus, s_minus = stokes_full(nu_target, d, tol=1e-6)

    trial_up = np.array([[d[0], 1.0], [product, d[1]]], dtype=complex)
    coef_up = stokes_full(nu_from_boundary(trial_up, side), d, tol=1e-6)[0][0, 1]
    trial_lo = np.array([[d[0], product], [1.0, d[1]]], dtype=complex)
    coef_lo = stokes_full(nu_from_boundary(trial_lo, side), d, tol=1e-6)[1][1, 0]
    if abs(coef_up) < 1e-12 or abs(coef_lo) < 1e-12:
        raise DegenerateAlphaBeta(
            "triangular-factor coefficients degenerate; the corner entries "
            "cannot be calibrated"
        )
    a12 = s_plus[0, 1] / coef_up
    a21 = s_minus[1, 0] / coef_lo
    consistency = abs(a12 * a21 - product) / max(1.0, abs(product))
    A0 = np.array([[d[0], a12], [a21, d[1]]], dtype=complex)
    return A0, float(consistency)


def _invert_newton(nu_target: np.ndarray, diag_vec: np.ndarray, side: str,
                   tol: float):
    """Damped Newton solve of the off-diagonal residue entries.

    The forward map is the closed-form monodromy of a candidate residue; the
    residue diagonal is held at the given data so the diagonal consistency is
    built in.  The Jacobian is formed by complex finite differences.
    """
    n = nu_target.shape[0]
    d = np.asarray(diag_vec, dtype=complex)
    off_idx = [(i, j) for i in range(n) for j in range(n) if i != j]

    values, vectors = np.linalg.eig(nu_target)
    lam = lambda_adjust(values, complex(d.sum()))
    seed = vectors @ np.diag(np.asarray(lam, dtype=complex)) @ np.linalg.inv(vectors)
    x = np.array([seed[i, j] for i, j in off_idx], dtype=complex)

    def build(vec: np.ndarray) -> np.ndarray:
        A = np.diag(d).astype(complex)
        for val, (i, j) in zip(vec, off_idx):
            A[i, j] = val
        return A

    scale = max(1.0, float(np.max(np.abs(nu_target))))

    def residual(vec: np.ndarray) -> np.ndarray:
        nu = nu_from_boundary(build(vec), side)
        return (nu - nu_target).ravel()

    r = residual(x)
    best = float(np.max(np.abs(r)))
    for _ in range(60):
        if best <= tol * scale:
            break
        m = x.size
        J = np.empty((r.size, m), dtype=complex)
        for j in range(m):
            h = 1e-6 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += h
            try:
                J[:, j] = (residual(xp) - r) / h
            except Exception:
                J[:, j] = 0.0
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        accepted = False
        for damping in (1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625):
            x_try = x + damping * step
            try:
                r_try = residual(x_try)
            except Exception:
                continue
            if float(np.max(np.abs(r_try))) < best * (1.0 - 0.2 * damping):
                x, r = x_try, r_try
                best = float(np.max(np.abs(r)))
                accepted = True
                break
        if not accepted:
            break
    if best > 1e-6 * scale:
        raise NewtonStall(best / scale, 1e-6)
    return build(x), best / scale


def inverse_monodromy(md: MonodromyData, tol: float = 1e-8) -> BoundaryDatum:
    """Reconstruct the boundary datum behind strictly confined monodromy data.

    The residue at infinity is recovered from the infinity monodromy matrix,
    the zero-side residue from the zero monodromy matrix (closed form at rank
    2, damped Newton at ranks 3 and 4), and the boundary frame from the
    connection matrix stripped of both closed-form factor chains.  The
    returned datum carries ``roundtrip_residual`` (forward map vs. input) and
    ``til_consistency`` (independently solved zero-side residue vs. the one
    induced by the recovered frame) as extra attributes.
    """
    n = md.n
    if n > 4:
        raise UnsupportedRank(
            f"inverse reconstruction handles rank <= 4, got rank {n}"
        )
    outcome = classify_log_confined(md)
    if not outcome.verdict:
        raise NotLogConfined(
            "monodromy data is not strictly confined: " + (
                ", ".join(
                    f"{side} level {k} ({kind} at {j1},{j2})"
                    for side, k, j1, j2, kind in outcome.failing
                ) or "trace targets inconsistent"
            )
        )
    deltaA = np.asarray(md.deltaA, dtype=complex)
    diag_til = -np.asarray(md.deltaGAG, dtype=complex)

    if n == 1:
        A_hat0 = np.diag(deltaA)
        bd = boundary_datum(A_hat0, np.asarray(md.C, dtype=complex))
        bd.roundtrip_residual = 0.0
        bd.til_consistency = 0.0
        return bd

    nu_inf = np.asarray(md.nu_inf, dtype=complex)
    nu_zero = np.asarray(md.nu_zero, dtype=complex)
    if n == 2:
        A_hat0, res_hat = _invert_rank2(
            nu_inf, deltaA, outcome.sigma_inf[-1], "hat"
        )
        A_til0, res_til = _invert_rank2(
            nu_zero, diag_til, outcome.sigma_zero[-1], "til"
        )
    else:
        A_hat0, res_hat = _invert_newton(nu_inf, deltaA, "hat", tol)
        A_til0, res_til = _invert_newton(nu_zero, diag_til, "til", tol)

    chain_hat = (
        np.eye(n, dtype=complex) if _is_near_diagonal(A_hat0)
        else connection_chain(leading_spectra(A_hat0), A_hat0, "hat")
    )
    chain_til = (
        np.eye(n, dtype=complex) if _is_near_diagonal(A_til0)
        else connection_chain(leading_spectra(A_til0), A_til0, "til")
    )
    G0 = np.linalg.solve(chain_hat, np.asarray(md.C, dtype=complex) @ chain_til)
    bd = boundary_datum(A_hat0, G0)

    til_gap = float(
        np.max(np.abs(bd.A_til0 - A_til0))
        / max(1.0, float(np.max(np.abs(A_til0))))
    )
    forward = monodromy_from_boundary(bd, md.direction)
    roundtrip = max(
        float(np.max(np.abs(forward.nu_inf - nu_inf)))
        / max(1.0, float(np.max(np.abs(nu_inf)))),
        float(np.max(np.abs(forward.nu_zero - nu_zero)))
        / max(1.0, float(np.max(np.abs(nu_zero)))),
        float(np.max(np.abs(forward.C - md.C)))
        / max(1.0, float(np.max(np.abs(md.C)))),
    )
    bd.roundtrip_residual = roundtrip
    bd.til_consistency = til_gap
    bd.side_residuals = (res_hat, res_til)
    return bd
