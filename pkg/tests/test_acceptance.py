"""Acceptance checks, one PASS/FAIL line each (also listed in the pytest summary)."""

import math
import time
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from scipy import optimize

from senbe import tables, verify
from senbe.bounds import (
    bound_iid,
    bound_noniid,
    minimize_truncated_bound,
    shao_bound,
    untruncated_bound,
)
from senbe.constants import (
    ConstantTriple,
    ParameterVector,
    ceil_at_precision,
    combined_constants,
    optimize_constants,
    published_triple,
    weighted_objective,
)
from senbe.distributions import parse_spec
from senbe.moments import gamma_functionals, two_point_moments
from senbe.specfun import normal_pdf

NONIID = ("t1", "t2", "t3", "t4")
IID = ("t1iid", "t21iid", "t3iid", "t4iid", "t1iid2", "t2iid2")
# published entries checked by relative error rather than by the ceiling
RELATIVE = {("t4", 1), ("t4", 2)}


def recompute(name):
    row = tables.get_row(name)
    return combined_constants(ParameterVector.from_row(row), row.be_const), row


def ceiling_mismatches(names):
    bad = []
    for name in names:
        t, row = recompute(name)
        for k, (val, pub) in enumerate(zip(t.as_tuple(), row.triple)):
            if (name, k) in RELATIVE:
                ok = abs(val / float(pub) - 1) <= 0.005
            else:
                ok = ceil_at_precision(val, pub) == Decimal(pub)
            if not ok:
                bad.append(f"{name}[A{(3, 4, 6)[k]}]={val:.6g} vs {pub}")
    return bad


class TestTables:
    def test_01_noniid_ceilings(self, acceptance):
        start = time.perf_counter()
        bad = ceiling_mismatches(NONIID)
        elapsed = time.perf_counter() - start
        ok = not bad and elapsed < 1.0
        acceptance("1  non-iid rows: 2-decimal ceilings (t4 last two within 0.5%)", ok,
                   "; ".join(bad) or f"{elapsed:.3f}s")
        assert ok

    def test_01_noniid_raw_within_one_percent_below(self, acceptance):
        bad = []
        for name in NONIID:
            t, row = recompute(name)
            for k, (val, pub) in enumerate(zip(t.as_tuple(), row.triple)):
                if (name, k) in RELATIVE:
                    continue
                pub = float(pub)
                if not 0.99 * pub <= val <= pub:
                    bad.append(f"{name}[A{(3, 4, 6)[k]}]={val:.6g} is "
                               f"{100 * (1 - val / pub):.2f}% below {pub:g}")
        acceptance("1  non-iid rows: each raw component within 1% below published",
                   not bad, "; ".join(bad))
        assert not bad

    def test_02_iid_ceilings(self, acceptance):
        start = time.perf_counter()
        bad = ceiling_mismatches(IID)
        elapsed = time.perf_counter() - start
        ok = not bad and elapsed < 1.0
        acceptance("2  iid rows reproduce under the ceiling rule", ok,
                   "; ".join(bad) or f"{elapsed:.3f}s")
        assert ok


def test_03_optimizer_non_regression(acceptance):
    seeds = [ParameterVector.from_row(r) for r in tables.ROWS]
    seed_obj = weighted_objective(combined_constants(seeds[0], 0.56), (1, 1, 1))
    start = time.perf_counter()
    _, t = optimize_constants((1, 1, 1), 0.56, seeds=seeds)
    elapsed = time.perf_counter() - start
    obj = weighted_objective(t, (1, 1, 1))
    ok = obj <= seed_obj and obj <= 1.6094 and elapsed < 120
    acceptance("3  optimizer objective <= t1 seed objective", ok,
               f"objective={obj:.6f} seed={seed_obj:.6f} {elapsed:.1f}s")
    assert ok


class TestNormalGap:
    def test_04_constant_literal(self, acceptance):
        C, _ = verify.prop1_constants()
        ok = abs(C - 0.16206) <= 5e-4
        acceptance("4  C = 0.16206 +- 5e-4", ok, f"C={C:.7f}")
        assert ok

    def test_04_constant_leading_digits(self, acceptance):
        C, _ = verify.prop1_constants()
        ok = f"{C:.6f}".startswith("0.162")
        acceptance("4  C agrees with 0.162...", ok, f"C={C:.7f}")
        assert ok

    def test_04_supremum_is_twice_c(self, acceptance):
        C, sup2C = verify.prop1_constants()
        ok = abs(sup2C - 2 * C) <= 1e-9
        # independent check of the supremum: stationary point u^2 = 2 + sqrt(3)
        u = math.sqrt(2 + math.sqrt(3))
        ok &= abs(u * (u * u - 1) * normal_pdf(u) - 2 * C) <= 1e-12
        acceptance("4  sup|u(1-u^2)phi(u)| = 2C within 1e-9", ok, f"|diff|={abs(sup2C - 2 * C):.2e}")
        assert ok

    def test_04_gap_bounds(self, acceptance):
        start = time.perf_counter()
        C, _ = verify.prop1_constants()
        gaps = {n: verify.prop1_gap(n) for n in (2, 10, 100, 10 ** 4)}
        below = all(g < C / (n - 1) for n, g in gaps.items())
        sharp = (10 ** 4 - 1) * gaps[10 ** 4] >= 0.995 * C
        elapsed = time.perf_counter() - start
        ok = below and sharp and elapsed < 5
        detail = " ".join(f"n={n}:(n-1)gap={(n - 1) * g:.6f}" for n, g in gaps.items())
        acceptance("4  gap < C/(n-1) and (n-1)gap >= 0.995C at n=10^4", ok,
                   f"{detail} {elapsed:.2f}s")
        assert ok


def test_05_tail_envelope(acceptance):
    start = time.perf_counter()
    rep = verify.lemma2_proof_checks()
    elapsed = time.perf_counter() - start
    ok = (rep.slope_left > 0 > rep.slope_right and rep.tangent_value < math.log(0.17)
          and elapsed < 1)
    acceptance("5  L'(0.751) > 0 > L'(0.752), tangent < ln 0.17", ok,
               f"L'={rep.slope_left:.5f},{rep.slope_right:.5f} "
               f"tangent={rep.tangent_value:.6f} {elapsed:.3f}s")
    assert ok


def test_06_two_point_crossover(acceptance):
    start = time.perf_counter()
    # published t3 constants applied to n i.i.d. copies: (A3 rho3 + A4 rho4 + A6 rho6)/sqrt(n)
    t3 = published_triple("t3")
    t3 = ConstantTriple(t3.a3, t3.a4, t3.a6, name="t3", iid=True)

    def excess(b, n=10 ** 6):
        m = two_point_moments(b)
        ours = bound_iid(m.iid(n), t3).value
        return ours - 25 * m.rho3 / math.sqrt(n)

    b_star = optimize.brentq(excess, 100.0, 1000.0, xtol=1e-12)
    n_star = (2 * b_star) ** 2
    elapsed = time.perf_counter() - start
    ok = 469 < b_star <= 470 and n_star > 879844 and excess(469.0) < 0 < excess(470.0) \
        and elapsed < 1
    acceptance("6  two-point crossover b in (469, 470], (2b)^2 > 879844", ok,
               f"b*={b_star:.4f} (2b*)^2={n_star:.0f}")
    assert ok


def test_07_symmetric_two_point_ratio(acceptance):
    n = 400
    shao = shao_bound(gamma_functionals(parse_spec("two-point:b=1"), n), n=n).value
    ours = bound_noniid(two_point_moments(1.0).iid(n), published_triple("t4")).value
    ratio = shao / ours
    ok = abs(ratio - 25 / 1.34) < 1e-12 and ratio > 18 and round(ratio, 2) == 18.66
    acceptance("7  Shao / t4 bound for Rademacher = 18.66 > 18", ok, f"ratio={ratio:.6f}")
    assert ok


def test_08_student_anchor(acceptance):
    start = time.perf_counter()
    spec, n, t2 = parse_spec("student:d=20"), 10 ** 4, published_triple("t2")
    shao = untruncated_bound(spec, n, family="shao").value
    _, shao_min = minimize_truncated_bound(spec, n, None, "shao")
    thm = untruncated_bound(spec, n, t2).value
    _, thm_min = minimize_truncated_bound(spec, n, t2)
    elapsed = time.perf_counter() - start
    ok = (all(0.412 <= v <= 0.422 for v in (shao, shao_min.value))
          and all(0.063 <= v <= 0.073 for v in (thm, thm_min.value)) and elapsed < 30)
    acceptance("8  student d=20, n=10^4: Shao ~ 0.417, t2 ~ 0.068 (plain and truncated)", ok,
               f"shao={shao:.6f}/{shao_min.value:.6f} t2={thm:.6f}/{thm_min.value:.6f} "
               f"{elapsed:.2f}s")
    assert ok


class TestMonteCarlo:
    @pytest.mark.parametrize("text, n, name", [("two-point:b=1", 100, "t4iid"),
                                               ("two-point:b=2", 400, "t1")])
    def test_09_bound_holds(self, acceptance, text, n, name):
        start = time.perf_counter()
        spec = parse_spec(text)
        sim = verify.simulate_delta(spec, n, 10 ** 6, 20240901)
        again = verify.simulate_delta(spec, n, 10 ** 6, 20240901)
        chk = verify.check_bound_holds(spec, n, name, sim=sim)
        elapsed = time.perf_counter() - start
        ok = (sim.sup_delta_T + sim.mc_half_width <= chk.bound and chk.passed
              and sim == again and elapsed < 60)
        acceptance(f"9  {text}, n={n}: sup + DKW <= {name} bound, deterministic", ok,
                   f"sup={sim.sup_delta_T:.5f} hw={sim.mc_half_width:.5f} "
                   f"bound={chk.bound:.5f} {elapsed:.1f}s")
        assert ok


class TestOracles:
    def test_10_two_point_pmf(self, acceptance):
        worst = 0.0
        for b in (1, 1.5, 2, 10, 469):
            fb = Fraction(b)
            atoms = [(-1 / fb, fb * fb / (1 + fb * fb)), (fb, 1 / (1 + fb * fb))]
            E = lambda g: sum(p * g(x) for x, p in atoms)
            rho3 = float(E(lambda x: abs(x) ** 3))
            rho4 = math.sqrt(float(E(lambda x: x ** 4) - 1))
            rho6 = float(E(lambda x: abs(x * x - 1) ** 3)) / rho3
            m = two_point_moments(float(b))
            for got, want in ((m.rho3, rho3), (m.rho4, rho4), (m.rho6, rho6)):
                if want:
                    worst = max(worst, abs(got / want - 1))
                else:
                    worst = max(worst, abs(got))
        ok = worst <= 1e-12
        acceptance("10 two_point_moments = brute-force pmf expectation", ok, f"max rel err={worst:.1e}")
        assert ok

    def test_10_rademacher_dkw(self, acceptance):
        start = time.perf_counter()
        n = 100
        exact = verify.rademacher_exact_sup(n)
        hits = 0
        for seed in range(100):
            sim = verify.simulate_delta(parse_spec("two-point:b=1"), n, 10 ** 4, seed)
            hits += abs(sim.sup_delta_T - exact) <= sim.mc_half_width
        elapsed = time.perf_counter() - start
        ok = hits >= 99 and elapsed < 120
        acceptance("10 Rademacher simulated sup within DKW of exact in >= 99/100 seeds", ok,
                   f"{hits}/100 {elapsed:.1f}s")
        assert ok


def test_11_tail_ratio_order(acceptance):
    tab = verify.tail_ratio_data(10, np.linspace(1.5, 3.0, 61))
    bad = [row[0] for row in tab.rows if not abs(row[3]) <= abs(row[1])]
    acceptance("11 n=10, z in [1.5, 3]: Phi_n tail closer to Student's than Phi's", not bad,
               f"violations at z={bad}" if bad else "61 grid points")
    assert not bad
