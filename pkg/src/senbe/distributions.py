"""Zero-mean input laws and the textual distribution-spec grammar.

Grammar::

    two-point:b=<real>
    student:d=<real>
    pareto:s=<real>
    sample:<path>                 (one real per line)
    moments:rho3=..,rho4=..,rho6=..

optionally followed by ``|trunc:b=<real>`` or ``|trunc:a=<real>,b=<real>``.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import integrate

from . import specfun
from .errors import ConfigurationError, DomainError, DegenerateMomentsError

QUAD_EPSREL = 1e-11
QUAD_LIMIT = 400


def integrate_pieces(fn, lo, hi, breaks=()):
    """Adaptive Gauss-Kronrod integral of ``fn`` over (lo, hi), split at ``breaks``."""
    if not lo < hi:
        return 0.0
    knots = sorted({lo, hi, *(x for x in breaks if lo < x < hi)})
    total = 0.0
    for left, right in zip(knots[:-1], knots[1:]):
        val, _ = integrate.quad(fn, left, right, epsabs=0.0, epsrel=QUAD_EPSREL,
                                limit=QUAD_LIMIT)
        total += val
    return total


def _in_window(x, lo, hi, lo_closed, hi_closed):
    above = x >= lo if lo_closed else x > lo
    below = x <= hi if hi_closed else x < hi
    return above and below


class Law:
    """Common interface: ``expect``, ``prob``, ``variance`` and tail order."""

    symmetric = False
    continuous = False
    # supremum of p with E|X|^p finite
    tail_order = math.inf

    def expect(self, g, lo=-math.inf, hi=math.inf, lo_closed=False, hi_closed=False):
        """``E[g(X); lo < X < hi]`` (endpoints optionally included)."""
        raise NotImplementedError

    def prob(self, lo=-math.inf, hi=math.inf):
        """``P(lo < X < hi)``."""
        return self.expect(lambda x: 1.0, lo, hi)

    @property
    def variance(self):
        if self.tail_order <= 2:
            return math.inf
        return self.expect(lambda x: x * x)

    @property
    def scale(self):
        """A length scale for grids: standard deviation, or 1 when it is infinite."""
        v = self.variance
        return math.sqrt(v) if math.isfinite(v) else 1.0

    def breakpoints(self):
        return (0.0,)


class DiscreteLaw(Law):
    def atoms(self):
        raise NotImplementedError

    def expect(self, g, lo=-math.inf, hi=math.inf, lo_closed=False, hi_closed=False):
        return sum(p * g(x) for x, p in self.atoms() if _in_window(x, lo, hi, lo_closed, hi_closed))


@dataclass(frozen=True)
class TwoPoint(DiscreteLaw):
    """Zero-mean law on {-1/b, b}, normalized so that ``E X**2 = 1``."""

    b: float

    def __post_init__(self):
        if not self.b >= 1.0:
            raise DomainError(f"two-point law needs b >= 1, got {self.b}")

    @property
    def symmetric(self):
        return self.b == 1.0

    @property
    def a(self):
        return 1.0 / self.b

    @property
    def p_up(self):
        """``P(X = b) = a / (a + b)``."""
        return 1.0 / (1.0 + self.b * self.b)

    def atoms(self):
        return ((-self.a, 1.0 - self.p_up), (self.b, self.p_up))

    @property
    def variance(self):
        return 1.0

    def __str__(self):
        return f"two-point:b={self.b:g}"


@dataclass(frozen=True)
class Sample(DiscreteLaw):
    """Empirical law of observed values, recentred to mean zero."""

    values: tuple

    def __post_init__(self):
        if len(self.values) == 0:
            raise ConfigurationError("sample must be nonempty")
        arr = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", tuple((arr - arr.mean()).tolist()))

    @cached_property
    def array(self):
        return np.asarray(self.values)

    @property
    def symmetric(self):
        s = np.sort(self.array)
        return bool(np.allclose(s, -s[::-1], rtol=0, atol=1e-12 * (1 + np.abs(s).max())))

    def atoms(self):
        w = 1.0 / len(self.values)
        return ((x, w) for x in self.values)

    def expect(self, g, lo=-math.inf, hi=math.inf, lo_closed=False, hi_closed=False):
        x = self.array
        mask = (x >= lo if lo_closed else x > lo) & (x <= hi if hi_closed else x < hi)
        if not mask.any():
            return 0.0
        vals = np.array([g(v) for v in x[mask]], dtype=float)
        return float(vals.sum() / len(x))

    def __str__(self):
        return f"sample:<{len(self.values)} values>"


class ContinuousLaw(Law):
    continuous = True
    support = (-math.inf, math.inf)

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def prob(self, lo=-math.inf, hi=math.inf):
        return max(0.0, self.cdf(hi) - self.cdf(lo))

    def expect(self, g, lo=-math.inf, hi=math.inf, lo_closed=False, hi_closed=False):
        lo = max(lo, self.support[0])
        hi = min(hi, self.support[1])
        return integrate_pieces(lambda x: g(x) * self.pdf(x), lo, hi, self.breakpoints())


@dataclass(frozen=True)
class Student(ContinuousLaw):
    """Student's t law with ``d`` degrees of freedom (not variance-normalized)."""

    d: float
    symmetric = True

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError(f"student law needs d > 0, got {self.d}")

    @property
    def tail_order(self):
        return self.d

    @property
    def variance(self):
        return self.d / (self.d - 2.0) if self.d > 2 else math.inf

    @cached_property
    def _log_norm(self):
        d = self.d
        return math.lgamma((d + 1) / 2) - math.lgamma(d / 2) - 0.5 * math.log(d * math.pi)

    def pdf(self, x):
        d = self.d
        return math.exp(self._log_norm - (d + 1) / 2 * math.log1p(x * x / d))

    def cdf(self, x):
        if math.isinf(x):
            return 1.0 if x > 0 else 0.0
        return specfun.student_cdf(x, self.d)

    def breakpoints(self):
        return (-1.0, 0.0, 1.0)

    def __str__(self):
        return f"student:d={self.d:g}"


@dataclass(frozen=True)
class Pareto(ContinuousLaw):
    """Centred Pareto law with density ``s (x + s/(s-1))**(-s-1)`` for ``x > -1/(s-1)``."""

    s: float

    def __post_init__(self):
        if not self.s > 1:
            raise DomainError(f"pareto law needs s > 1, got {self.s}")

    @property
    def shift(self):
        return self.s / (self.s - 1.0)

    @property
    def support(self):
        return (-1.0 / (self.s - 1.0), math.inf)

    @property
    def tail_order(self):
        return self.s

    @property
    def variance(self):
        s = self.s
        return s / ((s - 2.0) * (s - 1.0) ** 2) if s > 2 else math.inf

    def pdf(self, x):
        y = x + self.shift
        return self.s * y ** (-self.s - 1.0) if y > 1.0 else 0.0

    def cdf(self, x):
        y = x + self.shift
        if y <= 1.0:
            return 0.0
        return 1.0 if math.isinf(y) else -math.expm1(-self.s * math.log(y))

    def windowed_mean(self, a, b):
        """Closed form of ``E[X; -a < X < b]``."""
        s, c = self.s, self.shift

        def antideriv(y):
            if math.isinf(y):
                return 0.0
            return s * y ** (1.0 - s) / (1.0 - s) + c * y ** (-s)

        lo = max(c - a, 1.0)
        hi = b + c
        if hi <= lo:
            return 0.0
        return antideriv(hi) - antideriv(lo)

    def breakpoints(self):
        return (0.0, 1.0)

    def __str__(self):
        return f"pareto:s={self.s:g}"


@dataclass(frozen=True)
class MomentsOnly(Law):
    """A law known only through its unit-variance moment triple."""

    rho3: float
    rho4: float
    rho6: float

    def expect(self, g, lo=-math.inf, hi=math.inf, lo_closed=False, hi_closed=False):
        raise ConfigurationError("a moments-only spec has no distribution to integrate")

    @property
    def variance(self):
        return 1.0

    def __str__(self):
        return f"moments:rho3={self.rho3:g},rho4={self.rho4:g},rho6={self.rho6:g}"


@dataclass(frozen=True)
class DistributionSpec:
    """A law plus an optional truncation window ``(-a, b)``.

    ``trunc_a`` left as None means "choose a so the truncation is zero-mean".
    """

    law: Law
    trunc_a: float = None
    trunc_b: float = None

    @property
    def truncated(self):
        return self.trunc_b is not None

    def __str__(self):
        out = str(self.law)
        if self.truncated:
            out += "|trunc:"
            if self.trunc_a is not None:
                out += f"a={self.trunc_a:g},"
            out += f"b={self.trunc_b:g}"
        return out


def _parse_kv(body, allowed):
    out = {}
    for item in filter(None, body.split(",")):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ConfigurationError(f"bad field {item!r}; expected one of {allowed}")
        out[key] = float(val)
    return out


def read_sample(path):
    values = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.append(float(line))
    return Sample(tuple(values))


def parse_spec(text):
    """Parse a distribution spec string into a :class:`DistributionSpec`."""
    main, _, trunc = text.partition("|")
    kind, _, body = main.strip().partition(":")
    kind = kind.strip().lower()
    try:
        if kind in ("two-point", "twopoint", "two_point"):
            law = TwoPoint(**_parse_kv(body, ("b",)))
        elif kind == "student":
            law = Student(**_parse_kv(body, ("d",)))
        elif kind == "pareto":
            law = Pareto(**_parse_kv(body, ("s",)))
        elif kind == "sample":
            law = read_sample(body.strip())
        elif kind == "moments":
            law = MomentsOnly(**_parse_kv(body, ("rho3", "rho4", "rho6")))
        else:
            raise ConfigurationError(f"unknown distribution kind {kind!r}")
    except TypeError as exc:
        raise ConfigurationError(f"incomplete spec {text!r}: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, (ConfigurationError, DomainError, DegenerateMomentsError)):
            raise
        raise ConfigurationError(f"bad number in spec {text!r}") from None

    if not trunc:
        return DistributionSpec(law)
    tkind, _, tbody = trunc.strip().partition(":")
    if tkind.strip() != "trunc":
        raise ConfigurationError(f"unknown spec suffix {trunc!r}")
    fields = _parse_kv(tbody, ("a", "b"))
    if "b" not in fields:
        raise ConfigurationError("truncation needs b")
    a, b = fields.get("a"), fields["b"]
    if not b > 0 or (a is not None and not a > 0):
        raise ConfigurationError("truncation bounds must be positive")
    return DistributionSpec(law, a, b)
