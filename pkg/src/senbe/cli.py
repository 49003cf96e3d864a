"""Command-line front end.

Every subcommand is a thin adapter over a library call; numbers are printed
with 10 significant digits.  Exit status: 0 on success, 2 on usage errors,
1 on computation errors (and on a failed ``selfcheck``).
"""

import argparse
import sys

import numpy as np

from . import bounds, constants, tables, verify
from .constants import ConstantTriple, ParameterVector, published_triple
from .distributions import Pareto, Student, DistributionSpec, parse_spec
from .errors import ConfigurationError, SenbeError
from .moments import analytic_moments

GRAMMAR = """\
subcommands:
  constants [--weights w3,w4,w6] [--be 0.56|0.4785] [--budget N] [--seed-table]
  bound     --dist SPEC --n N (--triple NAME | --A a3,a4,a6 [--iid])
  truncate  --dist SPEC --n N --triple NAME [--family thm|shao]
  compare   --dist student|pareto --param-range lo:hi:points --n list --out csv [--triple NAME]
  tails     --n N --z lo:hi:points
  verify    --dist SPEC --n N --samples M --seed S --triple NAME
  selfcheck

SPEC:  two-point:b=B | student:d=D | pareto:s=S | sample:PATH
       | moments:rho3=R3,rho4=R4,rho6=R6
       optionally followed by |trunc:b=B or |trunc:a=A,b=B
NAME:  t1 t2 t3 t4 t1iid t1iid2 t2iid2 t21iid t3iid t4iid

CSV columns:
  constants  source,alpha,eps4,eps3,eps2,kappa,theta3,theta4,A3,A4,A6,A3_ceil,A4_ceil,A6_ceil,objective
  compare    dist,param,n,shao,shao_trunc_min,shao_b_star,thm,thm_trunc_min,thm_b_star
  tails      z,log_ratio_phi,log_ratio_phi_scaled,log_ratio_phi_n
  verify     n,samples,seed,sup_delta_T,sup_delta_t,mc_half_width,passed,vacuous,bound,family,margin

Set SENBE_THREADS to cap worker threads; results do not depend on it.
"""

CONSTANTS_COLUMNS = ("source", *tables.PARAM_NAMES, "A3", "A4", "A6",
                     "A3_ceil", "A4_ceil", "A6_ceil", "objective")
COMPARE_COLUMNS = ("dist", "param", "n", "shao", "shao_trunc_min", "shao_b_star",
                   "thm", "thm_trunc_min", "thm_b_star")
VERIFY_COLUMNS = ("n", "samples", "seed", "sup_delta_T", "sup_delta_t", "mc_half_width",
                  "passed", "vacuous", "bound", "family", "margin")
# displayed precision for optimized triples without a published counterpart
DEFAULT_CEIL = "0.01"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- argument types -------------------------------------------------------

def _floats(text, count=None):
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {text!r}")
    return vals


def _pos_int(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return val


def _triple_arg(text):
    return tuple(_floats(text, 3))


def _int_list(text):
    return [_pos_int(x) for x in text.split(",")]


def _range_arg(text):
    parts = text.split(":")
    try:
        lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"expected lo:hi:points, got {text!r}")
    if len(parts) != 3 or points < 1 or (points > 1 and not hi > lo):
        raise argparse.ArgumentTypeError(f"expected lo < hi and points >= 1, got {text!r}")
    return lo, hi, points


def _spec_arg(text):
    try:
        return parse_spec(text)
    except (ConfigurationError, OSError, SenbeError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _be_arg(text):
    val = float(text)
    if val not in constants.ADMISSIBLE_BE:
        raise argparse.ArgumentTypeError(f"--be must be 0.56 or 0.4785, got {text}")
    return val


def _seed_arg(text):
    val = int(text)
    if not 0 <= val < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return val


def _name_arg(text):
    if text not in tables.ROWS_BY_NAME:
        raise argparse.ArgumentTypeError(
            f"unknown triple {text!r}; known: {', '.join(tables.ROWS_BY_NAME)}")
    return text


def build_parser():
    p = _Parser(prog="senbe", description="Explicit Berry-Esseen bounds for self-normalized sums.",
                epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("constants", help="minimize the constant triple")
    c.add_argument("--weights", type=_triple_arg, default=(1.0, 1.0, 1.0))
    c.add_argument("--be", type=_be_arg, default=tables.BE_NONIID)
    c.add_argument("--budget", type=_pos_int, default=40000)
    c.add_argument("--seed-table", action="store_true",
                   help="also print the published rows with these weights")

    b = sub.add_parser("bound", help="evaluate a bound")
    b.add_argument("--dist", type=_spec_arg, required=True)
    b.add_argument("--n", type=_pos_int, required=True)
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--triple", type=_name_arg)
    g.add_argument("--A", type=_triple_arg, dest="A")
    b.add_argument("--iid", action="store_true", help="use the i.i.d. form with --A")

    t = sub.add_parser("truncate", help="minimize a truncated bound over the cut")
    t.add_argument("--dist", type=_spec_arg, required=True)
    t.add_argument("--n", type=_pos_int, required=True)
    t.add_argument("--triple", type=_name_arg)
    t.add_argument("--family", choices=("thm", "shao"), default="thm")

    m = sub.add_parser("compare", help="bound comparison over a parameter range (CSV)")
    m.add_argument("--dist", choices=("student", "pareto"), required=True)
    m.add_argument("--param-range", type=_range_arg, required=True)
    m.add_argument("--n", type=_int_list, required=True)
    m.add_argument("--out", choices=("csv",), default="csv")
    m.add_argument("--triple", type=_name_arg, default="t2")

    r = sub.add_parser("tails", help="log tail ratios against Student's law (CSV)")
    r.add_argument("--n", type=_pos_int, required=True)
    r.add_argument("--z", type=_range_arg, required=True)

    v = sub.add_parser("verify", help="Monte Carlo check of a bound (CSV)")
    v.add_argument("--dist", type=_spec_arg, required=True)
    v.add_argument("--n", type=_pos_int, required=True)
    v.add_argument("--samples", type=_pos_int, required=True)
    v.add_argument("--seed", type=_seed_arg, required=True)
    v.add_argument("--triple", type=_name_arg, required=True)

    sub.add_parser("selfcheck", help="reproduce the published constants and checks")
    return p


# --- subcommands ----------------------------------------------------------

def _constants_row(source, params, triple, weights, ceil_like=None):
    ceil_like = ceil_like or (DEFAULT_CEIL,) * 3
    ceils = [constants.ceil_at_precision(v, s) for v, s in zip(triple.as_tuple(), ceil_like)]
    return ",".join([
        source,
        *(bounds.fmt(x) for x in params.as_tuple()),
        *(bounds.fmt(x) for x in triple.as_tuple()),
        *(str(c) for c in ceils),
        bounds.fmt(constants.weighted_objective(triple, weights)),
    ])


def cmd_constants(args):
    weights = tuple(args.weights)
    if any(not w > 0 for w in weights):
        raise UsageError("--weights must be positive")
    lines = [",".join(CONSTANTS_COLUMNS)]
    if args.seed_table:
        for row in tables.ROWS:
            if row.weights == weights and row.be_const == args.be:
                params = ParameterVector.from_row(row)
                lines.append(_constants_row(f"table:{row.name}", params,
                                            constants.row_constants(row.name), weights,
                                            row.triple))
    params, triple = constants.optimize_constants(weights, args.be, budget=args.budget)
    lines.append(_constants_row("optimized", params, triple, weights))
    return "\n".join(lines)


def _resolve_triple(args):
    if args.triple is not None:
        return published_triple(args.triple)
    return ConstantTriple(*args.A, iid=args.iid)


def cmd_bound(args):
    spec, t = args.dist, _resolve_triple(args)
    if spec.truncated:
        rep = bounds.truncated_bound(spec, args.n, spec.trunc_b, t, a=spec.trunc_a)
    else:
        rep = bounds.triple_bound(analytic_moments(spec).iid(args.n), t)
        rep = bounds.BoundReport(rep.family, rep.value, rep.components, rep.n, rep.triple,
                                 dist=str(spec))
    return rep.to_text()


def cmd_truncate(args):
    if args.family == "thm" and args.triple is None:
        raise UsageError("truncate --family thm needs --triple")
    if args.dist.truncated:
        raise UsageError("truncate takes an untruncated --dist")
    t = published_triple(args.triple) if args.triple else None
    _, rep = bounds.minimize_truncated_bound(args.dist, args.n, t, args.family)
    return rep.to_text()


def _param_values(lo, hi, points):
    return np.linspace(lo, hi, points) if points > 1 else np.array([lo])


def compare_rows(dist, values, ns, triple_name="t2"):
    """Rows of the comparison table; the library side of ``compare``."""
    t = published_triple(triple_name)
    make = Student if dist == "student" else Pareto
    rows = []
    for param in values:
        spec = DistributionSpec(make(float(param)))
        for n in ns:
            shao = bounds.untruncated_bound(spec, n, family="shao").value
            shao_b, shao_min = bounds.minimize_truncated_bound(spec, n, None, "shao")
            thm = bounds.untruncated_bound(spec, n, t, "thm").value
            thm_b, thm_min = bounds.minimize_truncated_bound(spec, n, t, "thm")
            rows.append((dist, float(param), n, shao, shao_min.value, shao_b,
                         thm, thm_min.value, thm_b))
    return rows


def cmd_compare(args):
    values = _param_values(*args.param_range)
    rows = compare_rows(args.dist, values, args.n, args.triple)
    lines = [",".join(COMPARE_COLUMNS)]
    lines += [",".join([r[0], *(bounds.fmt(x) for x in r[1:])]) for r in rows]
    return "\n".join(lines)


def cmd_tails(args):
    lo, hi, points = args.z
    table = verify.tail_ratio_data(args.n, _param_values(lo, hi, points))
    for note in table.notes:
        print(f"note: {note}", file=sys.stderr)
    return table.to_csv()


def cmd_verify(args):
    sim = verify.simulate_delta(args.dist, args.n, args.samples, args.seed)
    chk = verify.check_bound_holds(args.dist, args.n, args.triple, sim=sim)
    row = [*(bounds.fmt(x) for x in (sim.n, sim.samples, sim.seed, sim.sup_delta_T,
                                     sim.sup_delta_t, sim.mc_half_width,
                                     chk.passed, chk.vacuous, chk.bound)),
           chk.family, bounds.fmt(chk.margin)]
    return ",".join(VERIFY_COLUMNS) + "\n" + ",".join(row)


def selfcheck_results():
    """``[(label, ok, detail)]`` for every built-in reproduction check."""
    out = []
    C, sup2C = verify.normal_gap_constants()
    out.append(("normal gap: sup = 2C", abs(sup2C - 2 * C) <= 1e-9,
                f"C={bounds.fmt(C)} sup={bounds.fmt(sup2C)}"))
    for n in (2, 10, 100, 10 ** 4):
        gap = verify.normal_gap_sup(n)
        out.append((f"normal gap: n={n} below C/(n-1)", gap < C / (n - 1),
                    f"(n-1)*gap={bounds.fmt((n - 1) * gap)}"))
    gap = verify.normal_gap_sup(10 ** 4)
    out.append(("normal gap: sharp at n=10000", (10 ** 4 - 1) * gap >= 0.995 * C,
                f"ratio={bounds.fmt((10 ** 4 - 1) * gap / C)}"))
    lem = verify.tail_envelope_checks()
    for label, ok in lem.checks.items():
        out.append((f"tail envelope: {label}", ok, ""))
    for row in tables.ROWS:
        ok, detail = verify.table_row_matches(row.name)
        out.append((f"table {row.name}", ok, detail))
    return out


def cmd_selfcheck(args):
    results = selfcheck_results()
    lines = [f"{'PASS' if ok else 'FAIL'} {label}" + (f"  {detail}" if detail else "")
             for label, ok, detail in results]
    failed = sum(not ok for _, ok, _ in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines), 1 if failed else 0


COMMANDS = {
    "constants": cmd_constants,
    "bound": cmd_bound,
    "truncate": cmd_truncate,
    "compare": cmd_compare,
    "tails": cmd_tails,
    "verify": cmd_verify,
    "selfcheck": cmd_selfcheck,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        print(parser.format_usage() + "\n" + GRAMMAR, file=sys.stderr)
        return 2
    except (SenbeError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text, code = result if isinstance(result, tuple) else (result, 0)
    print(text)
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
