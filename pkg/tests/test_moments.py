import math

import mpmath as mp
import numpy as np
import pytest

from senbe.distributions import (
    DistributionSpec,
    Pareto,
    Student,
    TwoPoint,
    parse_spec,
)
from senbe.errors import (
    ConfigurationError,
    ContractError,
    DegenerateMomentsError,
    DomainError,
    InfeasibleTruncationError,
    MomentDivergenceError,
    UnsupportedSpecError,
)
from senbe.moments import (
    MomentSummary,
    analytic_moments,
    empirical_moments,
    gamma_functionals,
    spec_moments,
    truncated_moments,
    two_point_moments,
    zero_mean_truncation_find_a,
)

mp.mp.dps = 30


def brute_two_point(b):
    """Moments straight from the pmf on {-1/b, b}, in exact-ish arithmetic."""
    b = mp.mpf(b)
    atoms = [(-1 / b, b * b / (1 + b * b)), (b, 1 / (1 + b * b))]
    E = lambda g: sum(p * g(x) for x, p in atoms)
    m2 = E(lambda x: x ** 2)
    rho3 = E(lambda x: abs(x) ** 3) / m2 ** 1.5
    rho4 = mp.sqrt(E(lambda x: x ** 4) / m2 ** 2 - 1)
    rho6 = E(lambda x: abs(x * x / m2 - 1) ** 3) / rho3
    return float(rho3), float(rho4), float(rho6)


def student_oracle(d):
    """Unit-variance rho's of Student's law by mpmath quadrature."""
    c = mp.gamma((d + 1) / 2) / (mp.sqrt(d * mp.pi) * mp.gamma(d / 2))
    f = lambda x: c * (1 + x * x / d) ** (-(d + 1) / 2)
    E = lambda g: 2 * mp.quad(lambda x: g(x) * f(x), [0, 1, mp.inf])
    v = mp.mpf(d) / (d - 2)
    rho3 = E(lambda x: x ** 3) / v ** 1.5
    rho4 = mp.sqrt(E(lambda x: x ** 4) / v ** 2 - 1)
    rho6 = E(lambda x: abs(x * x / v - 1) ** 3) / rho3
    return float(rho3), float(rho4), float(rho6)


class TestTwoPoint:
    @pytest.mark.parametrize("b", [1, 1.5, 2, 10, 469])
    def test_closed_form_matches_pmf(self, b):
        m = two_point_moments(b)
        for got, want in zip((m.rho3, m.rho4, m.rho6), brute_two_point(b)):
            assert got == pytest.approx(want, rel=1e-12, abs=1e-300)

    def test_rademacher(self):
        m = two_point_moments(1.0)
        assert (m.rho3, m.rho4, m.rho6) == (1.0, 0.0, 0.0)

    def test_b_below_one(self):
        with pytest.raises(DomainError):
            two_point_moments(0.9)

    def test_general_path_agrees(self):
        # the generic expectation route over atoms gives the same numbers
        m = analytic_moments(DistributionSpec(TwoPoint(3.0)))
        got = empirical_moments([-1 / 3] * 9 + [3.0])
        assert got.rho3 == pytest.approx(m.rho3, rel=1e-12)
        assert got.rho6 == pytest.approx(m.rho6, rel=1e-12)


class TestContinuous:
    @pytest.mark.parametrize("d", [7.5, 20.0])
    def test_student_against_mpmath(self, d):
        m = analytic_moments(parse_spec(f"student:d={d}"))
        for got, want in zip((m.rho3, m.rho4, m.rho6), student_oracle(d)):
            assert got == pytest.approx(want, rel=1e-8)

    def test_student_tends_to_normal(self):
        m = analytic_moments(parse_spec("student:d=1e6"))
        assert m.rho3 == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-5)
        assert m.rho4 == pytest.approx(math.sqrt(2), rel=1e-5)

    def test_pareto_mean_and_variance(self):
        law = Pareto(8.0)
        assert law.expect(lambda x: x) == pytest.approx(0.0, abs=1e-12)
        assert law.expect(lambda x: x * x) == pytest.approx(law.variance, rel=1e-10)

    @pytest.mark.parametrize("text, order", [("student:d=5", 6), ("pareto:s=3.5", 4),
                                             ("student:d=2.5", 3), ("pareto:s=1.5", 2)])
    def test_divergence_names_smallest_order(self, text, order):
        with pytest.raises(MomentDivergenceError) as err:
            analytic_moments(parse_spec(text))
        assert err.value.order == order


class TestSummary:
    def test_from_betas_reduces_to_rhos(self):
        m = MomentSummary.from_rhos(1.3, 0.8, 2.0, n=50)
        b = MomentSummary.from_betas(m.beta2, m.beta3, m.tbeta4, m.tbeta6)
        assert (b.r3, b.r4, b.r6) == pytest.approx((m.r3, m.r4, m.r6), rel=1e-14)

    def test_scale_free(self):
        x = np.array([-2.0, -0.5, 0.1, 0.4, 2.0])
        a, b = empirical_moments(x), empirical_moments(7.0 * x + 3.0)
        assert (a.rho3, a.rho4, a.rho6) == pytest.approx((b.rho3, b.rho4, b.rho6), rel=1e-12)

    def test_empirical_against_numpy(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(500)
        y = (x - x.mean()) / x.std()
        m = empirical_moments(x)
        assert m.rho3 == pytest.approx(np.mean(np.abs(y) ** 3), rel=1e-12)
        assert m.rho4 == pytest.approx(math.sqrt(np.mean(y ** 4) - 1), rel=1e-12)
        assert m.rho6 * m.rho3 == pytest.approx(np.mean(np.abs(y ** 2 - 1) ** 3), rel=1e-12)

    def test_constant_sample(self):
        with pytest.raises(DegenerateMomentsError):
            empirical_moments([2.0, 2.0, 2.0])


class TestTruncation:
    def test_symmetric_cut(self):
        assert zero_mean_truncation_find_a(parse_spec("student:d=4"), 3.0) == 3.0
        assert zero_mean_truncation_find_a(parse_spec("student:d=4"), math.inf) == math.inf

    @pytest.mark.parametrize("s, b", [(3.0, 10.0), (1.5, 2.0), (8.0, 0.3)])
    def test_pareto_cut_has_zero_mean(self, s, b):
        law = Pareto(s)
        a = zero_mean_truncation_find_a(DistributionSpec(law), b)
        c = law.shift
        lo = max(c - a, 1.0)
        mean = mp.quad(lambda y: (y - c) * s * y ** (-s - 1), [lo, b + c])
        assert abs(float(mean)) < 1e-12
        assert 0 < a < 1 / (s - 1)

    def test_pareto_windowed_mean_closed_form(self):
        law = Pareto(3.0)
        num = law.expect(lambda x: x, -0.4, 5.0)
        assert law.windowed_mean(0.4, 5.0) == pytest.approx(num, rel=1e-10)

    def test_nonpositive_cut(self):
        with pytest.raises(InfeasibleTruncationError):
            zero_mean_truncation_find_a(parse_spec("pareto:s=3"), 0.0)

    def test_asymmetric_discrete_unsupported(self):
        with pytest.raises(UnsupportedSpecError):
            zero_mean_truncation_find_a(parse_spec("two-point:b=2"), 1.0)

    def test_nonzero_mean_window_rejected(self):
        with pytest.raises(ContractError):
            truncated_moments(parse_spec("pareto:s=3"), 0.1, 5.0)

    def test_removed_mass_enters_sixth_moment(self):
        law = Student(5.0)
        m, keep = truncated_moments(DistributionSpec(law), 2.0, 2.0)
        m2 = law.expect(lambda x: x * x, -2.0, 2.0)
        e6 = law.expect(lambda x: abs(x * x - m2) ** 3, -2.0, 2.0) + (1 - keep) * m2 ** 3
        assert m.rho6 * m.rho3 == pytest.approx(e6 / m2 ** 3, rel=1e-10)
        assert keep == pytest.approx(1 - 2 * float(mp.betainc(2.5, 0.5, 0, 5 / 9, regularized=True)) / 2,
                                     rel=1e-10)

    def test_spec_suffix(self):
        m, keep = spec_moments(parse_spec("student:d=3|trunc:b=4"))
        assert keep < 1 and m.rho3 > 1


class TestGamma:
    def test_two_point_boundary_is_included(self):
        # threshold sqrt(1)/2 = 0.5 equals the lower atom, which stays inside
        g = gamma_functionals(parse_spec("two-point:b=2"), 1)
        assert (g.gamma2, g.gamma3) == pytest.approx((0.8, 0.1), rel=1e-14)

    def test_rademacher_large_n(self):
        g = gamma_functionals(parse_spec("two-point:b=1"), 100)
        assert (g.gamma2, g.gamma3) == pytest.approx((0.0, 0.1))

    def test_student_against_quadrature(self):
        d, n = 6.0, 30
        spec = parse_spec(f"student:d={d}")
        v = d / (d - 2)
        t = math.sqrt(n * v) / 2
        c = mp.gamma((d + 1) / 2) / (mp.sqrt(d * mp.pi) * mp.gamma(d / 2))
        f = lambda x: c * (1 + x * x / d) ** (-(d + 1) / 2)
        tail2 = 2 * mp.quad(lambda x: x * x * f(x), [t, mp.inf])
        in3 = 2 * mp.quad(lambda x: x ** 3 * f(x), [0, 1, t])
        g = gamma_functionals(spec, n)
        assert g.gamma2 == pytest.approx(float(tail2 / v), rel=1e-8)
        assert g.gamma3 == pytest.approx(float(in3 / (v ** 1.5 * math.sqrt(n))), rel=1e-8)

    def test_moments_only_unsupported(self):
        with pytest.raises(UnsupportedSpecError):
            gamma_functionals(parse_spec("moments:rho3=1,rho4=0,rho6=0"), 10)


class TestParse:
    def test_round_trip(self):
        for text in ("two-point:b=2", "student:d=20", "pareto:s=3|trunc:b=10",
                     "student:d=4|trunc:a=2,b=3"):
            assert str(parse_spec(text)) == text

    def test_sample_file(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("# data\n1\n2\n\n6\n")
        spec = parse_spec(f"sample:{path}")
        assert spec.law.values == (-2.0, -1.0, 3.0)

    @pytest.mark.parametrize("text", ["cauchy:x=1", "student:q=3", "student:d=abc",
                                      "student:d=5|trunc:a=1", "student:d=5|clip:b=1",
                                      "student:d=5|trunc:b=-1", "moments:rho3=1"])
    def test_rejects(self, text):
        with pytest.raises(ConfigurationError):
            parse_spec(text)

    def test_domain_of_parameters(self):
        with pytest.raises(DomainError):
            parse_spec("pareto:s=1")
