"""Scalar special functions shared by the rest of the package.

Scalars go through :mod:`math` (fast inside the constant optimizer); arrays
go through :mod:`scipy.special`.  Both routes are accurate to well below
1e-12 absolute for the normal functions.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)

# Knot of the two-branch envelope used for x * Psi(x).
PSI_STAR_KNOT = 0.752
PSI_STAR_LEVEL = 0.17


def _is_array(x):
    return np.ndim(x) > 0


def normal_pdf(x):
    if _is_array(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) / SQRT2PI
    return math.exp(-0.5 * x * x) / SQRT2PI


def normal_cdf(x):
    """Standard normal distribution function, accepting +-inf."""
    if _is_array(x):
        return special.ndtr(np.asarray(x, dtype=float))
    return 0.5 * math.erfc(-x / SQRT2)


def normal_tail(x):
    """``1 - normal_cdf(x)`` without cancellation for large positive x."""
    if _is_array(x):
        return special.ndtr(-np.asarray(x, dtype=float))
    return 0.5 * math.erfc(x / SQRT2)


def student_cdf(x, df):
    """Distribution function of Student's t with ``df`` degrees of freedom.

    ``df`` may be any positive real; evaluated through the regularized
    incomplete beta function.
    """
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    out = special.stdtr(df, x)
    return out if _is_array(x) else float(out)


def student_tail(x, df):
    return student_cdf(-np.asarray(x, dtype=float) if _is_array(x) else -x, df)


def psi_cantelli(u, v):
    """Hybrid Chebyshev/Cantelli factor ``min(u, v) / (v**2 + min(u, v)**2)``."""
    if not (u > 0 and v > 0):
        raise DomainError(f"psi_cantelli needs positive arguments, got ({u}, {v})")
    m = u if u < v else v
    return m / (v * v + m * m)


def psi_star(x):
    """Envelope of ``sup{y * Psi(y) : y >= x}``.

    Constant 0.17 on (0, 0.752), and ``x * Psi(x)`` from the knot on
    (the knot itself belongs to the second branch).
    """
    if not x > 0:
        raise DomainError(f"psi_star is defined for x > 0, got {x}")
    if x < PSI_STAR_KNOT:
        return PSI_STAR_LEVEL
    return x * normal_tail(x)


def phi_n(z, n):
    """Improper distribution function ``Phi(z / sqrt(1 + (z**2 - 1)/n))``.

    Infinite ``z`` maps to ``Phi(+-sqrt(n))``.
    """
    if n < 2:
        raise DomainError(f"phi_n needs n >= 2, got {n}")
    if _is_array(z):
        z = np.asarray(z, dtype=float)
        with np.errstate(invalid="ignore", over="ignore"):
            arg = z / np.sqrt(1.0 + (z * z - 1.0) / n)
        inf = np.isinf(z)
        arg[inf] = np.sign(z[inf]) * math.sqrt(n)
        return normal_cdf(arg)
    if math.isinf(z):
        return normal_cdf(math.copysign(math.sqrt(n), z))
    return normal_cdf(z / math.sqrt(1.0 + (z * z - 1.0) / n))


def x_of_t(t):
    """Maximizer in x > 0 of ``Phi(x) - Phi((1 - t) x)``."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"x_of_t needs t in (0, 1), got {t}")
    return math.sqrt(-2.0 * math.log1p(-t) / (t * (2.0 - t)))


def big_r(eps4):
    """``sup_x (Phi(x) - Phi((1 - eps4) x)) / eps4``, attained at ``x_of_t(eps4)``.

    The closed endpoint 1/2 is accepted because one published parameter
    row sits exactly there.
    """
    if not 0.0 < eps4 <= 0.5:
        raise DomainError(f"big_r needs eps4 in (0, 1/2], got {eps4}")
    x = x_of_t(eps4)
    diff = 0.5 * (math.erf(x / SQRT2) - math.erf((1.0 - eps4) * x / SQRT2))
    return diff / eps4
