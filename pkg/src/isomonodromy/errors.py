"""Exception hierarchy for the package.

Three base classes partition failures by how a caller (and the command-line
driver) should react:

* ``InputError``      -- malformed or inconsistent caller-supplied data,
* ``DomainError``     -- mathematically inadmissible configuration (poles,
                         resonances, degenerate spectra, ...),
* ``ToleranceError``  -- a numerical procedure could not reach the requested
                         accuracy.
"""
from __future__ import annotations


class IsomonodromyError(Exception):
    """Base class of all package-specific errors."""


class InputError(IsomonodromyError):
    """Caller-supplied data is malformed or internally inconsistent."""


class DomainError(IsomonodromyError):
    """The requested computation is outside its mathematical domain."""


class ToleranceError(IsomonodromyError):
    """A numerical routine failed to meet the requested tolerance."""


# ---------------------------------------------------------------------------
# matrix core
# ---------------------------------------------------------------------------

class NonConvergence(ToleranceError):
    """An iterative numerical kernel (eigensolver, fixed point) did not converge."""


class NearDefective(DomainError):
    """Eigenvector matrix is too ill-conditioned to use an eigenbasis route."""

    def __init__(self, condition: float, threshold: float):
        self.condition = condition
        self.threshold = threshold
        super().__init__(
            f"eigenvector condition number {condition:.3e} exceeds {threshold:.3e}"
        )


class SingularMinor(DomainError):
    """A leading principal minor vanishes, so the unpivoted LDU does not exist."""

    def __init__(self, level: int):
        self.level = level
        super().__init__(f"leading principal minor of order {level} is singular")


class AntiStokesDirection(DomainError):
    """Two exponential weights tie along the chosen ray; the dominance order is undefined."""

    def __init__(self, pair: tuple[int, int], direction: float):
        self.pair = pair
        self.direction = direction
        super().__init__(
            f"indices {pair} tie along direction d={direction!r}; "
            "perturb d away from the anti-Stokes set"
        )


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

class PoleAt(DomainError):
    """The Gamma function was evaluated at a non-positive integer."""

    def __init__(self, where: complex):
        self.where = where
        super().__init__(f"Gamma pole at z={where!r}")


class UncancelledPole(DomainError):
    """A Gamma-product ratio retains a pole after exact-argument cancellation."""

    def __init__(self, where: complex, side: str):
        self.where = where
        self.side = side
        super().__init__(f"uncancelled Gamma pole at z={where!r} in {side}")


# ---------------------------------------------------------------------------
# closed-form monodromy
# ---------------------------------------------------------------------------

class RepeatedEigenvalue(DomainError):
    """A spectrum that must be simple contains a repeated eigenvalue."""

    def __init__(self, level: int, value: complex):
        self.level = level
        self.value = value
        super().__init__(f"repeated eigenvalue {value!r} at level {level}")


class LadderCollision(DomainError):
    """An eigenvalue of a leading submatrix coincides with one of the next level."""

    def __init__(self, level: int, value: complex):
        self.level = level
        self.value = value
        super().__init__(
            f"eigenvalue {value!r} shared between levels {level} and {level + 1}; "
            "closed-form factors are singular there"
        )


class DiagonalMismatch(ToleranceError):
    """The diagonal of an LDU factorization disagrees with the predicted exponentials."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"LDU diagonal deviates from exp(2*pi*i*delta) by {residual:.3e} "
            f"(tolerance {tolerance:.3e})"
        )


class DegenerateAlphaBeta(DomainError):
    """The two Gamma-weighted parameters cancel; p and q are undefined."""


# ---------------------------------------------------------------------------
# ODE-based monodromy
# ---------------------------------------------------------------------------

class ResonantResidue(DomainError):
    """Residue exponents differ by a nonzero integer; the power-series recursion is singular."""

    def __init__(self, order=None, margin: float | None = None):
        if isinstance(order, str) and margin is None:
            self.order = None
            self.margin = None
            super().__init__(order)
            return
        self.order = order
        self.margin = margin
        super().__init__(
            f"resonance at series order {order}: divisor margin {margin:.3e}"
        )


class AnchorUnstable(ToleranceError):
    """Doubling the anchor radius moved the transported solution by more than allowed."""

    def __init__(self, shift: float, allowed: float):
        self.shift = shift
        self.allowed = allowed
        super().__init__(
            f"anchor instability {shift:.3e} exceeds {allowed:.3e}; "
            "increase the anchor radius or loosen the tolerance"
        )


class StepUnderflow(ToleranceError):
    """The adaptive integrator stalled before reaching the end of a segment."""


class NonFiniteState(ToleranceError):
    """The transported solution left the range of finite floating-point numbers."""


class TriangularityViolated(DomainError):
    """Computed Stokes factors are not unit triangular in the dominance ordering."""

    def __init__(self, residual: float, allowed: float):
        self.residual = residual
        self.allowed = allowed
        super().__init__(
            f"Stokes factor deviates from unit-triangular shape by {residual:.3e} "
            f"(allowed {allowed:.3e}); check the direction and orderings"
        )


# ---------------------------------------------------------------------------
# isomonodromic flow / inverse problem
# ---------------------------------------------------------------------------

class DivergentIteration(ToleranceError):
    """Successive integral-equation iterates grew instead of contracting."""

    def __init__(self, delta: float, iteration: int):
        self.delta = delta
        self.iteration = iteration
        super().__init__(
            f"iterate {iteration} moved by {delta:.3e}; the fixed-point map "
            "is not contracting at this flow time"
        )


class QuadratureFailure(ToleranceError):
    """Panel quadrature of the flow integrals failed its self-consistency check."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"quadrature residual {residual:.3e} exceeds {tolerance:.3e}"
        )


class UnsupportedRank(InputError):
    """The requested closed-form construction is only implemented for rank 2."""


class InconsistentTrace(DomainError):
    """No integer shifts of the log-eigenvalues can meet the required trace."""

    def __init__(self, defect: complex):
        self.defect = defect
        super().__init__(
            f"trace constraint misses an integer by {defect!r}; data inconsistent"
        )


class NonStrict(DomainError):
    """Only a closed unit window (not an open one) can hold the shifted exponents."""

    def __init__(self, lambdas, pair: tuple[int, int]):
        self.lambdas = lambdas
        self.pair = pair
        super().__init__(
            f"exponent real parts {pair} sit at distance exactly 1; "
            "the strict window condition fails"
        )


class ChamberMismatch(DomainError):
    """Monodromy data was recorded in a chamber the classification does not cover."""


class NotLogConfined(DomainError):
    """The monodromy data fails the log-confinement criterion; no inverse is attempted."""


class NewtonStall(ToleranceError):
    """The Newton refinement of the inverse construction stopped making progress."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"Newton residual stalled at {residual:.3e} (tolerance {tolerance:.3e})"
        )


# ---------------------------------------------------------------------------
# model catalogue
# ---------------------------------------------------------------------------

class SpreadTooLarge(DomainError):
    """Asymptotic exponents spread over a unit interval or more; outside the admissible polytope."""

    def __init__(self, spread: float):
        self.spread = spread
        super().__init__(
            f"exponent spread {spread:.6g} is not strictly below 1"
        )


class TabulatedFileMissing(InputError):
    """A scan in tabulated mode needs a fixture file that was not found."""
