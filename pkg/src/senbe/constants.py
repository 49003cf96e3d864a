"""Case constants of the self-normalized Berry-Esseen bound and their minimization.

The bound ``A3*r3 + A4*r4 + A6*r6`` is proved by splitting into three cases
("small n", "large deviations", "moderate deviations"), each yielding
closed-form coefficients in seven free parameters.  The usable coefficient
for each moment term is the maximum over the three cases.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, astuple
from decimal import Decimal, ROUND_CEILING

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from . import tables
from .errors import ConfigurationError, ParameterRangeError
from .specfun import big_r, psi_cantelli, psi_star

ADMISSIBLE_BE = (tables.BE_NONIID, tables.BE_IID)

# sup_{v>0} v**j * phi(v) for j = 2, 3
S2 = (2.0 / math.e) / math.sqrt(2.0 * math.pi)
S3 = (3.0 / math.e) ** 1.5 / math.sqrt(2.0 * math.pi)

# (lower, upper) for each parameter; eps4's upper end is closed for evaluation
BOUNDS = {
    "alpha": (0.0, 1.0),
    "eps4": (0.0, 0.5),
    "eps3": (0.0, math.inf),
    "eps2": (0.0, 1.0),
    "kappa": (0.0, math.inf),
    "theta3": (0.0, 1.0),
    "theta4": (0.0, math.inf),
}
BOUNDARY_MARGIN = 1e-9


@dataclass(frozen=True)
class ParameterVector:
    alpha: float
    eps4: float
    eps3: float
    eps2: float
    kappa: float
    theta3: float
    theta4: float

    @classmethod
    def from_row(cls, row):
        return cls(*(float(p) for p in row.params))

    @classmethod
    def from_sequence(cls, values):
        return cls(*(float(v) for v in values))

    def as_tuple(self):
        return astuple(self)

    def validate(self):
        """Raise :class:`ParameterRangeError` naming the first violated bound."""
        for name, value in zip(tables.PARAM_NAMES, self.as_tuple()):
            lo, hi = BOUNDS[name]
            if not math.isfinite(value) or value <= lo:
                raise ParameterRangeError(f"{name}={value} must exceed {lo}")
            closed = name == "eps4"
            if value > hi or (value == hi and not closed):
                bracket = "]" if closed else ")"
                raise ParameterRangeError(f"{name}={value} must lie in ({lo}, {hi}{bracket}")
        return self


@dataclass(frozen=True)
class DerivedParams:
    teps4: float
    teps2: float
    ttheta3: float
    ttheta4: float
    rho_star: float
    rho_ss2: float
    rho_ss3: float
    sigma_star: float
    s2: float
    s3: float
    r_eps4: float
    be_const: float


def derived_params(p, be_const=tables.BE_NONIID):
    sig = math.sqrt(1.0 + p.theta3 + p.theta4 ** 2 / 4.0)
    return DerivedParams(
        teps4=p.eps4 / p.kappa,
        teps2=p.eps2 * (2.0 - p.eps2),
        ttheta3=(1.0 - p.eps2) * p.theta3,
        ttheta4=(1.0 - p.eps2) * p.theta4,
        rho_star=1.0 / ((1.0 - p.theta3) + math.sqrt(1.0 - p.theta3)),
        rho_ss2=1.0 / (sig ** -1 + 1.0),
        rho_ss3=1.0 / (sig ** -2 + sig ** -1),
        sigma_star=sig,
        s2=S2,
        s3=S3,
        r_eps4=big_r(p.eps4),
        be_const=be_const,
    )


@dataclass(frozen=True)
class ConstantTriple:
    """Coefficients (A3, A4, A6).

    ``breakdown[p][j]`` holds case ``j+1``'s value for moment order ``p``
    when the triple was computed from parameters; published triples carry
    none.  ``iid`` selects the i.i.d. form of the bound.
    """

    a3: float
    a4: float
    a6: float
    breakdown: dict = field(default=None, compare=False)
    name: str = None
    iid: bool = False

    def as_tuple(self):
        return (self.a3, self.a4, self.a6)

    def attained_by(self):
        """Case number (1-3) attaining each maximum; first one on ties."""
        if self.breakdown is None:
            return None
        return {p: 1 + int(np.argmax(vals)) for p, vals in self.breakdown.items()}


def _check_be(be_const):
    if be_const not in ADMISSIBLE_BE:
        raise ConfigurationError(f"be_const must be one of {ADMISSIBLE_BE}, got {be_const}")


def case1_constants(p):
    p.validate()
    return 1.0 / p.eps3, p.kappa / p.eps4, 0.0


def case2_constants(p):
    p.validate()
    d = derived_params(p)
    a32 = max(psi_cantelli(p.eps3, d.ttheta3), psi_star(p.theta3 / p.eps3) / p.theta3)
    a42 = max(
        psi_cantelli(d.teps4, d.ttheta4) + psi_cantelli(d.teps4, d.teps2),
        psi_star(p.theta4 / d.teps4) / p.theta4,
    )
    return a32, a42, 0.0


def case3_constants(p, be_const):
    _check_be(be_const)
    p.validate()
    d = derived_params(p, be_const)
    a33 = (be_const / ((1.0 - p.theta3) ** 1.5 * (1.0 - p.alpha) ** 2)
           + d.s2 * max(d.rho_star, d.rho_ss2) / (1.0 - p.eps4))
    a43 = ((1.0 + 4.0 * p.kappa ** 2) / (8.0 * p.kappa)
           + d.teps4 * d.s3 * max(d.rho_star, d.rho_ss3) / (4.0 * (1.0 - p.eps4) ** 2)
           + d.r_eps4 * p.kappa)
    # be_const / 8 is the 0.07 of the non-i.i.d. case
    a63 = (be_const / 8.0) / p.alpha ** 2 * (p.theta3 ** 2 / (1.0 - p.theta3)) ** 1.5
    return a33, a43, a63


def combined_constants(p, be_const=tables.BE_NONIID):
    cases = (case1_constants(p), case2_constants(p), case3_constants(p, be_const))
    breakdown = {order: tuple(c[k] for c in cases) for k, order in enumerate((3, 4, 6))}
    return ConstantTriple(
        a3=max(breakdown[3]),
        a4=max(breakdown[4]),
        a6=max(breakdown[6]),
        breakdown=breakdown,
        iid=be_const == tables.BE_IID,
    )


def published_triple(name):
    """The published triple ``name`` (e.g. ``"t2"``, ``"t4iid"``) as floats."""
    row = tables.get_row(name)
    a3, a4, a6 = (float(Decimal(x)) for x in row.triple)
    return ConstantTriple(a3, a4, a6, name=name, iid=row.iid)


def row_constants(name):
    """Recompute the triple of a published row from its parameters."""
    row = tables.get_row(name)
    t = combined_constants(ParameterVector.from_row(row), row.be_const)
    return ConstantTriple(t.a3, t.a4, t.a6, t.breakdown, name=name, iid=row.iid)


def ceil_at_precision(value, published):
    """Round ``value`` up to the last displayed digit of the string ``published``."""
    quantum = Decimal(1).scaleb(Decimal(published).as_tuple().exponent)
    return Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_CEILING)


def weighted_objective(triple, weights):
    w3, w4, w6 = weights
    return max(w3 * triple.a3, w4 * triple.a4, w6 * triple.a6)


# --- minimization -----------------------------------------------------------

def _to_free(p):
    out = []
    for name, x in zip(tables.PARAM_NAMES, p.as_tuple()):
        lo, hi = BOUNDS[name]
        if math.isinf(hi):
            out.append(math.log(x - lo))
        else:
            u = (x - lo) / (hi - lo)
            out.append(math.log(u) - math.log1p(-u))
    return np.array(out)


def _from_free(y):
    vals = []
    for name, v in zip(tables.PARAM_NAMES, y):
        lo, hi = BOUNDS[name]
        if math.isinf(hi):
            x = lo + math.exp(min(v, 700.0))
            x = max(x, lo + BOUNDARY_MARGIN)
        else:
            u = 0.5 * (1.0 + math.tanh(0.5 * v))
            x = lo + (hi - lo) * u
            x = min(max(x, lo + BOUNDARY_MARGIN), hi - BOUNDARY_MARGIN)
        vals.append(x)
    return ParameterVector(*vals)


def _clip_interior(p):
    vals = []
    for name, x in zip(tables.PARAM_NAMES, p.as_tuple()):
        lo, hi = BOUNDS[name]
        vals.append(min(max(x, lo + BOUNDARY_MARGIN), hi - BOUNDARY_MARGIN))
    return ParameterVector(*vals)


def _objective(p, weights, be_const):
    try:
        t = combined_constants(p, be_const)
    except (ArithmeticError, ValueError):
        return math.inf, None
    val = weighted_objective(t, weights)
    return (val if math.isfinite(val) else math.inf), t


def default_seeds(n_quasi=32):
    """All distinct published parameter rows plus deterministic Halton points."""
    seeds, seen = [], set()
    for row in tables.ROWS:
        if row.params not in seen:
            seen.add(row.params)
            seeds.append(ParameterVector.from_row(row))
    # box on which quasi-random seeds are spread; log scale for the unbounded ones
    lo = np.array([0.01, 0.01, math.log(0.1), 0.01, math.log(0.01), 0.01, math.log(0.1)])
    hi = np.array([0.99, 0.49, math.log(20.0), 0.99, math.log(5.0), 0.99, math.log(20.0)])
    pts = qmc.Halton(d=7, scramble=False).random(n_quasi + 1)[1:]
    for u in pts:
        v = lo + u * (hi - lo)
        for k in (2, 4, 6):
            v[k] = math.exp(v[k])
        seeds.append(ParameterVector.from_sequence(v))
    return seeds


def _local_search(start, weights, be_const, maxfev):
    def f(y):
        return _objective(_from_free(y), weights, be_const)[0]

    res = optimize.minimize(
        f, _to_free(start), method="Nelder-Mead",
        options={"maxfev": maxfev, "xatol": 1e-10, "fatol": 1e-13, "adaptive": True},
    )
    p = _from_free(res.x)
    return _objective(p, weights, be_const)[0], p


def _key(item):
    obj, p = item
    return (obj, p.as_tuple())


def _worker_count():
    env = os.environ.get("SENBE_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def optimize_constants(weights=(1.0, 1.0, 1.0), be_const=tables.BE_NONIID, seeds=None,
                       budget=40000, n_starts=8):
    """Multi-start Nelder-Mead minimization of ``max(w3*A3, w4*A4, w6*A6)``.

    Works in logit/log coordinates so every simplex vertex is feasible.
    ``budget`` caps the number of objective evaluations spent in local
    search; seeds are always evaluated.  Returns ``(params, triple)``.
    The result depends only on the seeds and budget, never on thread count.
    """
    _check_be(be_const)
    if any(not w > 0 for w in weights):
        raise ConfigurationError(f"weights must be positive, got {weights}")
    if seeds is None:
        seeds = default_seeds()
    seeds = list(seeds)
    if not seeds:
        raise ConfigurationError("optimize_constants needs at least one seed")
    if budget < 1:
        raise ConfigurationError(f"budget must be >= 1, got {budget}")

    scored = []
    for s in seeds:
        s = _clip_interior(s.validate())
        scored.append((_objective(s, weights, be_const)[0], s))
    scored.sort(key=_key)
    best = scored[0]

    n_dim = len(tables.PARAM_NAMES)
    starts = [s for _, s in scored[:n_starts]]
    per_start = budget // (len(starts) + 1)
    if per_start >= n_dim + 2:
        with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
            results = list(pool.map(
                lambda s: _local_search(s, weights, be_const, per_start), starts))
        best = min([best, *results], key=_key)
        # polish the winner with the remaining share
        best = min([best, _local_search(best[1], weights, be_const, per_start)], key=_key)

    params = best[1]
    return params, combined_constants(params, be_const)
