"""Moment functionals of the input laws, with and without truncation.

Every summary is formed after rescaling to unit variance, so only
scale-free quantities are reported:

    rho3 = E|X|^3,  rho4 = sqrt(E(X^2 - 1)^2),  rho6 = E|X^2 - 1|^3 / E|X|^3
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import optimize

from .distributions import (
    DistributionSpec,
    MomentsOnly,
    Pareto,
    Sample,
    TwoPoint,
)
from .errors import (
    ContractError,
    DegenerateMomentsError,
    InfeasibleTruncationError,
    MomentDivergenceError,
    UnsupportedSpecError,
)

ZERO_MEAN_RTOL = 1e-9


@dataclass(frozen=True)
class MomentSummary:
    """Sums of moments over the n summands together with their reduced forms.

    ``r3, r4, r6`` are the quantities multiplying (A3, A4, A6) once the sum
    of variances is normalized to one.  The ``rho`` fields are filled for
    i.i.d. summaries only.
    """

    beta2: float
    beta3: float
    tbeta4: float
    tbeta6: float
    r3: float
    r4: float
    r6: float
    n: int = None
    rho3: float = None
    rho4: float = None
    rho6: float = None

    @classmethod
    def from_rhos(cls, rho3, rho4, rho6, n=1):
        """i.i.d. summary for n copies of a unit-variance law."""
        if not rho3 > 0:
            raise DegenerateMomentsError("rho3 must be positive")
        rn = math.sqrt(n)
        return cls(
            beta2=float(n),
            beta3=n * rho3,
            tbeta4=n * rho4 ** 2,
            tbeta6=n * rho6 * rho3,
            r3=rho3 / rn,
            r4=rho4 / rn,
            r6=rho6 / (rho3 ** 2 * rn),
            n=n,
            rho3=rho3,
            rho4=rho4,
            rho6=rho6,
        )

    @classmethod
    def from_betas(cls, beta2, beta3, tbeta4, tbeta6):
        """Summary of non-identical summands given the four moment sums."""
        if not (beta2 > 0 and beta3 > 0):
            raise DegenerateMomentsError("beta2 and beta3 must be positive")
        # rescale each X_i by beta2**-0.5
        b3 = beta3 / beta2 ** 1.5
        return cls(
            beta2=beta2,
            beta3=beta3,
            tbeta4=tbeta4,
            tbeta6=tbeta6,
            r3=b3,
            r4=math.sqrt(tbeta4) / beta2,
            r6=(tbeta6 / beta2 ** 3) / b3 ** 3,
        )

    def iid(self, n):
        return MomentSummary.from_rhos(self.rho3, self.rho4, self.rho6, n)

    @property
    def ex4(self):
        """``E X**4`` of the unit-variance law."""
        return self.rho4 ** 2 + 1.0

    @property
    def e_abs_sq_minus_one_cubed(self):
        """``E|X**2 - 1|**3`` of the unit-variance law."""
        return self.rho6 * self.rho3


@dataclass(frozen=True)
class GammaFunctionals:
    gamma2: float
    gamma3: float


def _summary_from_raw(m2, m3, m4, e6):
    """Unit-variance rho's from raw window moments.

    ``m2, m3, m4`` are ``E X^2, E|X|^3, E X^4`` and ``e6`` is ``E|X^2 - m2|^3``.
    """
    if not m2 > 0:
        raise DegenerateMomentsError("variance is zero")
    rho3 = m3 / m2 ** 1.5
    rho4 = math.sqrt(max(m4 / (m2 * m2) - 1.0, 0.0))
    rho6 = (e6 / m2 ** 3) / rho3
    return MomentSummary.from_rhos(rho3, rho4, rho6)


def two_point_moments(b):
    """Closed-form rho's of the unit-variance law on {-1/b, b}."""
    TwoPoint(b)  # validates b >= 1
    rho3 = (b ** 4 + 1.0) / (b * (b * b + 1.0))
    rho4 = b - 1.0 / b
    rho6 = rho4 ** 3
    return MomentSummary.from_rhos(rho3, rho4, rho6)


def _check_tail(law, orders=(3, 4, 6)):
    for k in (2, *orders):
        if not law.tail_order > k:
            raise MomentDivergenceError(k, law)


def _raw_moments(law, lo=-math.inf, hi=math.inf):
    m2 = law.expect(lambda x: x * x, lo, hi)
    m3 = law.expect(lambda x: abs(x) ** 3, lo, hi)
    m4 = law.expect(lambda x: x ** 4, lo, hi)
    e6 = law.expect(lambda x: abs(x * x - m2) ** 3, lo, hi)
    return m2, m3, m4, e6


@lru_cache(maxsize=256)
def _analytic(law):
    if isinstance(law, MomentsOnly):
        return MomentSummary.from_rhos(law.rho3, law.rho4, law.rho6)
    if isinstance(law, TwoPoint):
        return two_point_moments(law.b)
    _check_tail(law)
    return _summary_from_raw(*_raw_moments(law))


def analytic_moments(spec):
    """Unit-variance rho's of an untruncated law.

    Raises :class:`MomentDivergenceError` naming the smallest infinite
    order among 2, 3, 4, 6.
    """
    law = spec.law if isinstance(spec, DistributionSpec) else spec
    if isinstance(spec, DistributionSpec) and spec.truncated:
        raise ContractError("analytic_moments takes an untruncated spec")
    return _analytic(law)


def empirical_moments(values):
    """Plug-in rho's of a sample after centring and scaling to unit variance."""
    law = Sample(tuple(values))
    if not law.expect(lambda x: x * x) > 0:
        raise DegenerateMomentsError("sample variance is zero")
    return _summary_from_raw(*_raw_moments(law))


def zero_mean_truncation_find_a(spec, b):
    """Left cut ``a`` making ``X 1{-a < X < b}`` zero-mean."""
    law = spec.law if isinstance(spec, DistributionSpec) else spec
    if not b > 0:
        raise InfeasibleTruncationError(f"b must be positive, got {b}")
    if math.isinf(b):
        return math.inf
    if law.symmetric:
        return b
    if isinstance(law, Pareto):
        # beyond |support bottom| the left cut removes nothing
        a_max = 1.0 / (law.s - 1.0)
        eps = 1e-12
        lo, hi = eps, a_max - eps
        f_lo, f_hi = law.windowed_mean(lo, b), law.windowed_mean(hi, b)
        if f_lo * f_hi > 0:
            raise InfeasibleTruncationError(f"no zero-mean left cut for b={b} in {law}")
        return optimize.brentq(lambda a: law.windowed_mean(a, b), lo, hi,
                               xtol=1e-15, maxiter=200)
    raise UnsupportedSpecError(
        f"zero-mean truncation needs a continuous or symmetric law, got {law}")


@lru_cache(maxsize=4096)
def _truncated(law, a, b):
    keep = law.prob(-a, b)
    scale = law.scale
    mean = law.expect(lambda x: x, -a, b)
    if abs(mean) > ZERO_MEAN_RTOL * scale:
        raise ContractError(f"window (-{a}, {b}) is not zero-mean for {law}: mean={mean:.3g}")
    m2, m3, m4, e6 = _raw_moments(law, -a, b)
    # the removed mass sits at 0, where |X^2 - m2|^3 = m2^3
    e6 += (1.0 - keep) * m2 ** 3
    return _summary_from_raw(m2, m3, m4, e6), keep


def truncated_moments(spec, a, b):
    """Unit-variance rho's of ``X 1{-a < X < b}`` and ``P(-a < X < b)``."""
    law = spec.law if isinstance(spec, DistributionSpec) else spec
    if math.isinf(a) and math.isinf(b):
        return analytic_moments(law), 1.0
    if isinstance(law, MomentsOnly):
        raise UnsupportedSpecError("a moments-only spec cannot be truncated")
    return _truncated(law, float(a), float(b))


def gamma_functionals(spec, n, window=None):
    """Truncated second/third moment functionals at threshold ``sqrt(beta2)/2``.

    For i.i.d. summands of variance ``v`` (the windowed variance when
    ``window=(a, b)`` is given) the threshold is ``sqrt(n v)/2``.
    """
    law = spec.law if isinstance(spec, DistributionSpec) else spec
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    a, b = window if window is not None else (math.inf, math.inf)
    if isinstance(law, MomentsOnly):
        raise UnsupportedSpecError("gamma functionals need a full distribution")
    if not (math.isinf(a) and math.isinf(b)):
        truncated_moments(law, a, b)  # enforces the zero-mean contract
    elif law.tail_order <= 2:
        raise MomentDivergenceError(2, law)
    var = law.expect(lambda x: x * x, -a, b)
    if not var > 0:
        raise DegenerateMomentsError("variance is zero")
    t = math.sqrt(n * var) / 2.0
    lo, hi = max(-a, -t), min(b, t)
    lo_closed, hi_closed = -t > -a, t < b
    inner2 = law.expect(lambda x: x * x, lo, hi, lo_closed, hi_closed)
    inner3 = law.expect(lambda x: abs(x) ** 3, lo, hi, lo_closed, hi_closed)
    gamma2 = max(var - inner2, 0.0) / var
    gamma3 = inner3 / (var ** 1.5 * math.sqrt(n))
    return GammaFunctionals(gamma2, gamma3)


def window_for(spec):
    """Resolve the spec's truncation window to an explicit ``(a, b)``."""
    if not spec.truncated:
        return math.inf, math.inf
    a = spec.trunc_a
    if a is None:
        a = zero_mean_truncation_find_a(spec, spec.trunc_b)
    return a, spec.trunc_b


def spec_moments(spec):
    """Moments and keep-probability of a spec, honouring its truncation."""
    a, b = window_for(spec)
    return truncated_moments(spec.law, a, b)

