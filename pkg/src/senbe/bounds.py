"""Berry-Esseen bounds for the self-normalized sum and their truncated versions.

Families:

* ``thm1`` -- ``A3 r3 + A4 r4 + A6 r6`` for independent summands,
* ``thm2`` -- ``(A3 rho3 + A4 rho4 + A6 rho6) / sqrt(n)`` for i.i.d. summands,
* ``shao`` -- ``10.2 gamma2 + 25 gamma3``,
* ``nagaev`` / ``nagaev_crude`` -- published comparators whose proof is disputed,
* ``*_truncated`` -- failure mass of a zero-mean truncation plus the bound
  for the truncated summands.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .constants import ConstantTriple
from .errors import (
    DegenerateMomentsError,
    DomainError,
    LyapunovError,
    MomentDivergenceError,
    SenbeError,
)
from .moments import (
    analytic_moments,
    gamma_functionals,
    truncated_moments,
    zero_mean_truncation_find_a,
)

SHAO_GAMMA2 = 10.2
SHAO_GAMMA3 = 25.0
NAGAEV_NOTE = "comparator; source proof disputed"

GRID_POINTS = 64
GRID_SPAN = (0.1, 1e4)
B_RTOL = 1e-6


def fmt(x):
    """Ten significant digits, the package-wide output precision."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


@dataclass(frozen=True)
class Truncation:
    a: float
    b: float
    keep_prob: float
    failure_mass: float


@dataclass(frozen=True)
class BoundReport:
    family: str
    value: float
    components: dict
    n: int = None
    triple: ConstantTriple = None
    truncation: Truncation = None
    dist: str = None
    b_star: float = None
    notes: tuple = field(default=())

    @property
    def vacuous(self):
        return self.value > 1.0

    def with_b_star(self, b_star):
        return BoundReport(self.family, self.value, self.components, self.n, self.triple,
                           self.truncation, self.dist, b_star, self.notes)

    def to_text(self):
        lines = [f"family = {self.family}"]
        if self.dist is not None:
            lines.append(f"dist = {self.dist}")
        if self.n is not None:
            lines.append(f"n = {self.n}")
        if self.triple is not None:
            if self.triple.name:
                lines.append(f"triple = {self.triple.name}")
            lines.append("A = " + ",".join(fmt(x) for x in self.triple.as_tuple()))
        for name, val in self.components.items():
            lines.append(f"{name} = {fmt(val)}")
        if self.truncation is not None:
            tr = self.truncation
            lines += [f"a = {fmt(tr.a)}", f"b = {fmt(tr.b)}",
                      f"keep_prob = {fmt(tr.keep_prob)}"]
        if self.b_star is not None:
            lines.append(f"b_star = {fmt(self.b_star)}")
        lines.append(f"value = {fmt(self.value)}")
        lines.append(f"vacuous = {fmt(self.vacuous)}")
        lines += [f"note = {note}" for note in self.notes]
        return "\n".join(lines)

    def csv_row(self):
        t = self.triple.as_tuple() if self.triple is not None else (None, None, None)
        tr = self.truncation
        comps = ";".join(f"{k}={fmt(v)}" for k, v in self.components.items())
        row = [
            self.family, fmt(self.n), self.dist or "",
            (self.triple.name or "") if self.triple is not None else "",
            *(fmt(x) for x in t),
            fmt(tr.a) if tr else "", fmt(tr.b) if tr else "",
            fmt(self.value), comps, fmt(self.b_star),
            fmt(tr.keep_prob) if tr else "", fmt(tr.failure_mass) if tr else "",
            fmt(self.vacuous),
        ]
        return ",".join(row)


CSV_COLUMNS = ("family", "n", "dist", "triple", "A3", "A4", "A6", "a", "b", "value",
               "components", "b_star", "keep_prob", "failure_mass", "vacuous")
CSV_HEADER = ",".join(CSV_COLUMNS)


def _sum_report(family, components, **kw):
    return BoundReport(family, math.fsum(components.values()), components, **kw)


def bound_noniid(m, t):
    """``A3 r3 + A4 r4 + A6 r6`` with the r's taken at unit total variance."""
    if not (m.beta2 > 0 and m.beta3 > 0):
        raise DegenerateMomentsError("beta2 and beta3 must be positive")
    comps = {"A3*r3": t.a3 * m.r3, "A4*r4": t.a4 * m.r4, "A6*r6": t.a6 * m.r6}
    return _sum_report("thm1", comps, n=m.n, triple=t)


def bound_iid(m, t):
    """``(A3 rho3 + A4 rho4 + A6 rho6) / sqrt(n)`` for n i.i.d. unit-variance summands."""
    if m.n is None or m.n < 1 or m.rho3 is None:
        raise DomainError("bound_iid needs an i.i.d. summary with n >= 1")
    if m.rho3 < 1.0 - 1e-12:
        raise LyapunovError(f"rho3={m.rho3} < 1 is impossible at unit variance")
    rn = math.sqrt(m.n)
    comps = {"A3*rho3/sqrt(n)": t.a3 * m.rho3 / rn,
             "A4*rho4/sqrt(n)": t.a4 * m.rho4 / rn,
             "A6*rho6/sqrt(n)": t.a6 * m.rho6 / rn}
    return _sum_report("thm2", comps, n=m.n, triple=t)


def triple_bound(m, t):
    """Dispatch on the triple: i.i.d. triples use the i.i.d. form."""
    return bound_iid(m, t) if t.iid else bound_noniid(m, t)


def shao_bound(g, n=None):
    comps = {"10.2*gamma2": SHAO_GAMMA2 * g.gamma2, "25*gamma3": SHAO_GAMMA3 * g.gamma3}
    return _sum_report("shao", comps, n=n)


def nagaev_bounds(rho3, ex4, rho6rho3, n):
    """The two published i.i.d. comparators; returned even when vacuous.

    ``rho3 = E|X|^3``, ``ex4 = E X^4``, ``rho6rho3 = E|X^2 - 1|^3``.
    """
    rn = math.sqrt(n)
    fine = _sum_report(
        "nagaev",
        {"4.4*E|X|^3/sqrt(n)": 4.4 * rho3 / rn,
         "EX^4/E|X|^3/sqrt(n)": ex4 / rho3 / rn,
         "E|X^2-1|^3/sqrt(n)": rho6rho3 / rn},
        n=n, notes=(NAGAEV_NOTE,))
    crude = _sum_report(
        "nagaev_crude",
        {"36*E|X|^3/sqrt(n)": 36.0 * rho3 / rn, "9/sqrt(n)": 9.0 / rn},
        n=n, notes=(NAGAEV_NOTE,))
    return fine, crude


def failure_mass(keep_prob, n):
    """``1 - keep_prob**n`` without cancellation."""
    if keep_prob >= 1.0:
        return 0.0
    if keep_prob <= 0.0:
        return 1.0
    return -math.expm1(n * math.log1p(keep_prob - 1.0))


def _window(spec, b, a=None):
    if a is None:
        a = zero_mean_truncation_find_a(spec, b)
    return a, b


def truncated_bound(spec, n, b, t, a=None):
    """Failure mass plus the moment-triple bound for the truncation window ``(-a, b)``.

    ``a`` defaults to the left cut that keeps the mean at zero.
    """
    a, b = _window(spec, b, a)
    m, keep = truncated_moments(spec, a, b)
    inner = triple_bound(m.iid(n), t)
    fm = failure_mass(keep, n)
    comps = {"failure_mass": fm, **inner.components}
    family = "thm2_truncated" if t.iid else "thm1_truncated"
    return _sum_report(family, comps, n=n, triple=t, dist=str(spec),
                       truncation=Truncation(a, b, keep, fm))


def truncated_shao_bound(spec, n, b, a=None):
    """Failure mass plus Shao's bound with gamma's of the truncated law."""
    a, b = _window(spec, b, a)
    _, keep = truncated_moments(spec, a, b)
    g = gamma_functionals(spec, n, window=(a, b))
    fm = failure_mass(keep, n)
    comps = {"failure_mass": fm, "10.2*gamma2": SHAO_GAMMA2 * g.gamma2,
             "25*gamma3": SHAO_GAMMA3 * g.gamma3}
    return _sum_report("shao_truncated", comps, n=n, dist=str(spec),
                       truncation=Truncation(a, b, keep, fm))


def untruncated_bound(spec, n, t=None, family="thm"):
    """Moment-triple bound (``family='thm'``) or Shao bound of the untruncated law.

    Infinite required moments give an infinite value instead of an error.
    """
    try:
        if family == "thm":
            rep = triple_bound(analytic_moments(spec).iid(n), t)
        else:
            rep = shao_bound(gamma_functionals(spec, n), n=n)
    except MomentDivergenceError as exc:
        name = "thm2" if family == "thm" and t.iid else ("thm1" if family == "thm" else "shao")
        return BoundReport(name, math.inf, {}, n=n, triple=t, dist=str(spec),
                           notes=(str(exc),))
    return BoundReport(rep.family, rep.value, rep.components, n, rep.triple, None,
                       str(spec), None, rep.notes)


def _evaluate(spec, n, b, t, family):
    if math.isinf(b):
        return untruncated_bound(spec, n, t, family)
    if family == "thm":
        return truncated_bound(spec, n, b, t)
    return truncated_shao_bound(spec, n, b)


def _safe_value(spec, n, b, t, family):
    try:
        return _evaluate(spec, n, b, t, family)
    except (SenbeError, ArithmeticError, ValueError):
        return None


def minimize_truncated_bound(spec, n, t=None, family="thm"):
    """Minimize the truncated bound over the right cut ``b``.

    A 64-point log grid over ``[0.1, 1e4]`` times the law's scale, plus
    ``b = inf``, is refined by bounded golden-section search on log b around
    the best grid point.  Returns ``(b_star, report)``.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if family not in ("thm", "shao"):
        raise DomainError(f"family must be 'thm' or 'shao', got {family!r}")
    law = spec.law if hasattr(spec, "law") else spec
    scale = law.scale
    grid = list(np.geomspace(GRID_SPAN[0] * scale, GRID_SPAN[1] * scale, GRID_POINTS))
    probes = []
    for b in grid + [math.inf]:
        rep = _safe_value(spec, n, b, t, family)
        probes.append((rep.value if rep is not None else math.inf, b, rep))

    best = min(probes, key=lambda item: (item[0], item[1]))
    k = next(i for i, p in enumerate(probes) if p[1] == best[1])
    if k < len(grid) and math.isfinite(best[0]):
        lo = math.log(grid[max(k - 1, 0)])
        hi = math.log(grid[min(k + 1, len(grid) - 1)])

        def objective(logb):
            rep = _safe_value(spec, n, math.exp(logb), t, family)
            return rep.value if rep is not None else math.inf

        res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                       options={"xatol": B_RTOL})
        b_ref = math.exp(res.x)
        rep = _safe_value(spec, n, b_ref, t, family)
        if rep is not None and rep.value < best[0]:
            best = (rep.value, b_ref, rep)

    value, b_star, rep = best
    if rep is None:
        rep = BoundReport(family, math.inf, {}, n=n, triple=t, dist=str(spec))
    return b_star, rep.with_b_star(b_star)


def student_stat_transform(T, n):
    """Student's t as a function of the self-normalized sum ``T`` (|T| <= sqrt(n))."""
    rn = math.sqrt(n)
    if np.ndim(T):
        T = np.asarray(T, dtype=float)
        if np.any(np.abs(T) > rn * (1 + 1e-15)):
            raise DomainError("|T| must not exceed sqrt(n)")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.sqrt((n - 1) / n) * T / np.sqrt(np.maximum(1.0 - T * T / n, 0.0))
        edge = np.abs(T) >= rn
        out[edge] = np.sign(T[edge]) * math.inf
        return out
    if abs(T) > rn:
        raise DomainError(f"|T|={abs(T)} exceeds sqrt(n)={rn}")
    if abs(T) == rn:
        return math.copysign(math.inf, T)
    return math.sqrt((n - 1) / n) * T / math.sqrt(1.0 - T * T / n)


def student_stat_inverse(t, n):
    """Inverse of :func:`student_stat_transform`."""
    q = (n - 1) / n
    if np.ndim(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            big = np.abs(t) > 1.0
            out = np.where(big, np.sign(t) / np.sqrt(q / (t * t) + 1.0 / n),
                           t / np.sqrt(q + t * t / n))
        return out
    if abs(t) > 1.0:
        return math.copysign(1.0 / math.sqrt(q / (t * t) + 1.0 / n), t)
    return t / math.sqrt(q + t * t / n)
