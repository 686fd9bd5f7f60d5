"""Complex Gamma function and safe Gamma-product ratios.

The Gamma function is computed by the 9-term Lanczos approximation (g = 7)
together with the reflection identity for Re z < 1/2; the log-sine term of
the reflection is evaluated in a form that stays bounded for large |Im z|.

``gamma_product_ratio`` evaluates products of Gamma values divided by
products of Gamma values through summed logarithms, after first cancelling
arguments that coincide exactly (within 1e-12).  Any pole argument that
survives the cancellation is an error rather than silently producing
0, inf, or nan.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import PoleAt, UncancelledPole

__all__ = ["GammaValue", "gamma", "log_gamma", "gamma_product_ratio", "is_gamma_pole"]

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_POLE_TOL = 1e-12
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def is_gamma_pole(z: complex, tol: float = _POLE_TOL) -> bool:
    """True when z lies within ``tol`` of a non-positive integer."""
    z = complex(z)
    if abs(z.imag) > tol:
        return False
    nearest = round(z.real)
    return nearest <= 0 and abs(z.real - nearest) <= tol


def _lanczos_log_gamma(z: complex) -> complex:
    """Lanczos series, valid for Re z >= 1/2."""
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z - 1.0 + i)
    t = z + _LANCZOS_G - 0.5
    return _HALF_LOG_TWO_PI + (z - 0.5) * cmath.log(t) - t + cmath.log(acc)


def _log_sin_pi(z: complex) -> complex:
    """log(sin(pi z)) without overflow for large |Im z|.

    The branch is chosen per half-plane; only exp() of the result is
    guaranteed, which is all the reflection identity needs.
    """
    if z.imag >= 0.0:
        return (
            -1j * cmath.pi * z
            + cmath.log(cmath.exp(2j * cmath.pi * z) - 1.0)
            - cmath.log(2j)
        )
    return (
        1j * cmath.pi * z
        + cmath.log(cmath.exp(-2j * cmath.pi * z) - 1.0)
        - cmath.log(-2j)
    )


def log_gamma(z: complex) -> complex:
    """Logarithm of Gamma(z); exp(log_gamma(z)) is always Gamma(z).

    For Re z >= 1/2 this is the standard analytic branch; in the reflection
    region the branch may differ from the principal one by multiples of
    2*pi*i, which drop out on exponentiation.
    """
    z = complex(z)
    if is_gamma_pole(z):
        raise PoleAt(z)
    if z.real < 0.5:
        return math.log(math.pi) - _log_sin_pi(z) - _lanczos_log_gamma(1.0 - z)
    return _lanczos_log_gamma(z)


@dataclass
class GammaValue:
    """Gamma(z) together with its logarithm (overflow-safe form)."""

    value: complex
    log_value: complex


def gamma(z: complex) -> GammaValue:
    """Gamma(z) as a value/log pair; raises ``PoleAt`` on non-positive integers."""
    lg = log_gamma(z)
    return GammaValue(value=cmath.exp(lg), log_value=lg)


def _match_and_cancel(
    numer: Sequence[complex], denom: Sequence[complex], tol: float
) -> tuple[list[complex], list[complex]]:
    """Remove numerator/denominator argument pairs that agree within ``tol``."""
    remaining_denom = list(denom)
    kept_numer: list[complex] = []
    for a in numer:
        matched = None
        for idx, b in enumerate(remaining_denom):
            if abs(a - b) <= tol * max(1.0, abs(a), abs(b)):
                matched = idx
                break
        if matched is None:
            kept_numer.append(a)
        else:
            remaining_denom.pop(matched)
    return kept_numer, remaining_denom


def gamma_product_ratio(
    numer: Iterable[complex],
    denom: Iterable[complex] = (),
    match_tol: float = _POLE_TOL,
) -> complex:
    """prod Gamma(numer_i) / prod Gamma(denom_j), via summed logarithms.

    Arguments appearing (within ``match_tol``) in both lists cancel exactly
    before evaluation, so shared poles are removed symbolically.  A pole
    argument remaining on either side raises ``UncancelledPole``.
    """
    numer = [complex(z) for z in numer]
    denom = [complex(z) for z in denom]
    numer, denom = _match_and_cancel(numer, denom, match_tol)
    for z in numer:
        if is_gamma_pole(z):
            raise UncancelledPole(z, "numerator")
    for z in denom:
        if is_gamma_pole(z):
            raise UncancelledPole(z, "denominator")
    total = sum(log_gamma(z) for z in numer) - sum(log_gamma(z) for z in denom)
    return cmath.exp(total)
