"""
Scalar numerical kernels.

Bracketed root finding (Brent's method: bisection safeguarding inverse
quadratic and secant steps), composite Simpson quadrature refined by interval
doubling, and central finite differences. Every kernel is a pure function of
its inputs and a Tolerances record; iteration caps raise instead of
truncating.
"""

import math
import sys
from typing import Callable, Optional

from app.config import settings
from app.exceptions import BracketError, DomainError, NoConvergence
from app.schemas.substances import Tolerances

logger = settings.get_logger(__name__)

EPS = sys.float_info.epsilon

ScalarFunction = Callable[[float], float]

DEFAULT_TOLERANCES = settings.default_tolerances()

# Simpson estimates are not compared before this many intervals
MIN_INTERVALS = 16


def find_root(
    f: ScalarFunction,
    lo: float,
    hi: float,
    tol: Optional[Tolerances] = None,
) -> float:
    """Find x in [lo, hi] with f(x) = 0.

    The bracket is shrunk until its width is below
    root_rel * max(1, |x|). Deterministic for identical inputs.

    Raises:
        BracketError: f(lo) and f(hi) have the same strict sign.
        NoConvergence: the iteration cap was reached.
    """
    tol = tol or DEFAULT_TOLERANCES
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(
            f"No sign change on [{a:.6g}, {b:.6g}]: "
            f"f(lo)={fa:.6g}, f(hi)={fb:.6g}",
            parameters={"lo": a, "hi": b, "f_lo": fa, "f_hi": fb},
        )

    c, fc = a, fa
    d = e = b - a
    for iteration in range(settings.ROOT_MAX_ITER):
        if fb * fc > 0.0:
            # Keep the root between b and c
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb

        tol1 = 2.0 * EPS * abs(b) + 0.5 * tol.root_rel * max(1.0, abs(b))
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            logger.debug("find_root converged after %d steps", iteration)
            return b

        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                # Secant step
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                # Inverse quadratic interpolation
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            # Bisection
            d = xm
            e = d

        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)

    raise NoConvergence(
        f"find_root hit the cap of {settings.ROOT_MAX_ITER} iterations "
        f"on [{lo:.6g}, {hi:.6g}]",
        iterations=settings.ROOT_MAX_ITER,
        parameters={"lo": lo, "hi": hi},
    )


def integrate(
    f: ScalarFunction,
    a: float,
    b: float,
    tol: Optional[Tolerances] = None,
    scale: float = 0.0,
) -> float:
    """Signed integral of f over [a, b] by composite Simpson.

    The interval count doubles (reusing earlier samples) until two
    successive estimates agree to quad_rel relative, or to quad_rel * scale
    absolute when the caller knows the magnitude of the problem and the
    integral itself may vanish.

    Raises:
        NoConvergence: estimates still disagree after the allowed doublings.
    """
    tol = tol or DEFAULT_TOLERANCES
    if a == b:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol, scale)

    n = 2
    h = (b - a) / n
    ends = f(a) + f(b)
    even = 0.0
    odd = f(a + h)
    estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
    change = math.inf

    for doubling in range(settings.QUAD_MAX_DOUBLINGS):
        n *= 2
        h *= 0.5
        even += odd
        odd = math.fsum(f(a + (2 * k + 1) * h) for k in range(n // 2))
        refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even)
        change = abs(refined - estimate)
        if n >= MIN_INTERVALS and change <= tol.quad_rel * max(
            abs(refined), scale
        ):
            return refined
        estimate = refined

    raise NoConvergence(
        f"integrate did not settle after {settings.QUAD_MAX_DOUBLINGS} "
        f"doublings on [{a:.6g}, {b:.6g}]",
        iterations=settings.QUAD_MAX_DOUBLINGS,
        parameters={"a": a, "b": b, "last_change": change},
    )


def central_diff(
    f: ScalarFunction, x: float, tol: Optional[Tolerances] = None
) -> float:
    """Central difference (f(x+h) - f(x-h)) / 2h, h = fd_step * max(1, |x|).

    Meant for oracles; closed-form quantities never go through it.

    Raises:
        DomainError: f is undefined at x - h or x + h.
    """
    tol = tol or DEFAULT_TOLERANCES
    h = tol.fd_step * max(1.0, abs(x))
    try:
        forward = f(x + h)
        backward = f(x - h)
    except (ValueError, ArithmeticError) as exc:
        raise DomainError(
            f"central_diff: f is undefined near x={x:.6g} (h={h:.3g}): {exc}",
            quantity="x",
            value=x,
        ) from exc
    if math.isnan(forward) or math.isnan(backward):
        raise DomainError(
            f"central_diff: f is undefined near x={x:.6g} (h={h:.3g})",
            quantity="x",
            value=x,
        )
    return (forward - backward) / (2.0 * h)
