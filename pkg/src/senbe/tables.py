"""Published parameter rows and constant triples.

Parameters are kept as the exact rationals (or verbatim decimals) in which
they were published; triples are kept as decimal strings so the displayed
precision survives for the ceiling comparison.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigurationError

BE_NONIID = 0.56
BE_IID = 0.4785

PARAM_NAMES = ("alpha", "eps4", "eps3", "eps2", "kappa", "theta3", "theta4")


@dataclass(frozen=True)
class PublishedRow:
    name: str
    label: str
    weights: tuple
    params: tuple  # seven Fractions in PARAM_NAMES order
    be_const: float
    triple: tuple  # three decimal strings
    iid: bool


def _row(name, label, weights, params, be_const, triple, iid):
    return PublishedRow(
        name=name,
        label=label,
        weights=tuple(float(Fraction(w)) for w in weights),
        params=tuple(Fraction(p) for p in params),
        be_const=be_const,
        triple=triple,
        iid=iid,
    )


_TAU1 = ("2/25", "123/1000", "2703/1000", "22/125", "43/250", "377/1000", "5407/1000")
_TAU2 = ("27/200", "363/1000", "1401/1000", "19/50", "91/250", "413/1000", "3167/1000")

ROWS = (
    _row("t1", "tau_1", ("1", "1", "1"), _TAU1, BE_NONIID, ("1.61", "1.60", "1.20"), False),
    _row("t2", "tau_2", ("1", "2", "1"), _TAU2, BE_NONIID, ("2.01", "1.02", "0.61"), False),
    _row(
        "t3", "tau_3", ("1", "1", "1000000"),
        ("381/500", "471/1000", "6927/1000", "23/1000", "79/50", "9/200", "3809/1000"),
        BE_NONIID, ("11.38", "11.02", "11.78e-6"), False,
    ),
    _row(
        "t4", "tau_4", ("1", "1/100000", "1/1000000"),
        ("8.39e-5", "3.17e-5", "1.32", "3.49e-5", "9.97e-7", "0.3738", "2.69"),
        BE_NONIID, ("1.34", "125377", "1.049e6"), False,
    ),
    _row(
        "t1iid", "tau~_{1,1}", ("1", "1", "1"),
        ("41/500", "113/500", "277/100", "39/200", "83/500", "409/1000", "4467/1000"),
        BE_IID, ("1.53", "1.52", "1.34"), True,
    ),
    _row("t1iid2", "tau~_{1,2}", ("1", "1", "1"), _TAU1, BE_IID, ("1.61", "1.60", "1.02"), True),
    _row("t2iid2", "tau~_{2,2}", ("1", "2", "1"), _TAU2, BE_IID, ("1.96", "1.02", "0.52"), True),
    _row(
        "t21iid", "tau~_{2.1,1}", ("1", "2.1", "1"),
        ("0.14", "275/1000", "6.7", "0.42", "0.27", "0.44", "3.2"),
        BE_IID, ("1.96", "0.99", "0.63"), True,
    ),
    _row(
        "t3iid", "tau~_{3,1}", ("1", "1", "1000000"),
        ("777/1000", "1/2", "1381/500", "27/1000", "451/1000", "47/1000", "4569/500"),
        BE_IID, ("10.94", "9.40", "11.06e-6"), True,
    ),
    _row(
        "t4iid", "tau~_{4,1}", ("1", "1/100000", "1/1000000"),
        ("3/10000", "43/100000", "10.3", "13/10000", "3.5", "0.401", "1.6"),
        BE_IID, ("1.25", "8140", "92437"), True,
    ),
)

ROWS_BY_NAME = {row.name: row for row in ROWS}
NONIID_ROWS = tuple(r for r in ROWS if not r.iid)
IID_ROWS = tuple(r for r in ROWS if r.iid)


def get_row(name):
    try:
        return ROWS_BY_NAME[name]
    except KeyError:
        known = ", ".join(ROWS_BY_NAME)
        raise ConfigurationError(f"unknown triple {name!r}; known: {known}") from None
