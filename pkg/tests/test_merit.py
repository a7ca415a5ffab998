import math

import numpy as np
import pytest

from logds.errors import DomainError, InvalidConfig
from logds.merit import (FINITE, LOG_BOUNDARY, OUTSIDE_X, MeritParams,
                         constraint_violation, g_min, merit_components,
                         merit_value, multiplier_estimates,
                         partition_inequalities)
from logds.problems import Evaluation

from oracles import merit_reference


def make_eval(f=0.0, g=(), h=(), in_X=True, x=None):
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    x = np.zeros(2) if x is None else np.asarray(x, dtype=float)
    return Evaluation(x=x, f=f, g=g, h=h, in_X=in_X, eval_index=1)


def params_for(g_log, g_ext, rho_log=0.1, rho_ext=0.1, nu=2.0):
    return MeritParams(g_log=frozenset(g_log), g_ext=frozenset(g_ext),
                       rho_log=rho_log, rho_ext=rho_ext, nu=nu)


class TestPartition:
    def test_strict_negative_goes_to_barrier(self):
        g_log, g_ext = partition_inequalities(np.array([-1.0, 0.0, 2.0]))
        assert g_log == {0}
        assert g_ext == {1, 2}

    def test_empty(self):
        g_log, g_ext = partition_inequalities(np.zeros(0))
        assert g_log == frozenset() and g_ext == frozenset()

    def test_all_strict(self):
        g_log, g_ext = partition_inequalities(np.array([-0.5, -10.0]))
        assert g_log == {0, 1} and g_ext == frozenset()


class TestMeritValue:
    def test_circle_center(self):
        mv = merit_value(make_eval(f=0.0, g=[-1.0]), params_for({0}, set()))
        assert mv.value == 0.0 and mv.finite_reason == FINITE

    def test_circle_off_center(self):
        mv = merit_value(make_eval(f=0.5, g=[-0.75]), params_for({0}, set()))
        assert mv.value == pytest.approx(0.5 - 0.1 * math.log(0.75), rel=1e-12)

    def test_barrier_boundary_is_infinite(self):
        mv = merit_value(make_eval(f=1.0, g=[0.0]), params_for({0}, set()))
        assert mv.value == np.inf and mv.finite_reason == LOG_BOUNDARY

    def test_equality_penalty(self):
        # f=2, g=(-1) in barrier, h=(1), nu=2, rho_ext=0.1: 2 - 0.1 ln 1 + 10
        mv = merit_value(make_eval(f=2.0, g=[-1.0], h=[1.0]),
                         params_for({0}, set()))
        assert mv.value == pytest.approx(12.0, rel=1e-12)

    def test_outside_x(self):
        mv = merit_value(make_eval(f=0.0, g=[-1.0], in_X=False),
                         params_for({0}, set()))
        assert mv.value == np.inf and mv.finite_reason == OUTSIDE_X

    def test_underflow_slack_counts_as_boundary(self):
        mv = merit_value(make_eval(g=[-1e-310]), params_for({0}, set()))
        assert mv.value == np.inf and mv.finite_reason == LOG_BOUNDARY

    def test_infinite_exactly_when_reason_not_finite(self):
        rng = np.random.default_rng(7)
        p = params_for({0, 2}, {1}, rho_log=0.05, rho_ext=0.2)
        for _ in range(500):
            ev = make_eval(f=rng.normal(), g=rng.normal(size=3),
                           h=rng.normal(size=1), in_X=bool(rng.integers(2)))
            mv = merit_value(ev, p)
            assert (mv.value == np.inf) == (mv.finite_reason != FINITE)
            expect_finite = ev.in_X and ev.g[0] < 0 and ev.g[2] < 0
            assert mv.finite == expect_finite

    def test_alignment_with_objective(self):
        # inactive exterior block and h = 0 leave only f and the barrier
        rng = np.random.default_rng(8)
        p = params_for({0}, {1}, rho_log=0.3)
        for _ in range(100):
            g = np.array([-rng.uniform(0.1, 2.0), -rng.uniform(0.1, 2.0)])
            f = rng.normal()
            mv = merit_value(make_eval(f=f, g=g, h=[0.0]), p)
            assert mv.value - f == pytest.approx(-0.3 * math.log(-g[0]), rel=1e-12)

    def test_monotone_blowup_near_boundary(self):
        p = params_for({0}, set())
        values = [merit_components(0.0, np.array([-(10.0 ** -k)]), np.zeros(0),
                                   True, p).value
                  for k in range(1, 12)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert values[-1] > 2.0

    def test_matches_straight_line_reference(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            m = int(rng.integers(0, 4))
            p_eq = int(rng.integers(0, 3))
            g = rng.normal(size=m)
            h = rng.normal(size=p_eq)
            log_mask = rng.integers(2, size=m).astype(bool)
            p = params_for(set(np.nonzero(log_mask)[0]),
                           set(np.nonzero(~log_mask)[0]),
                           rho_log=10.0 ** rng.uniform(-6, 0),
                           rho_ext=10.0 ** rng.uniform(-6, 0),
                           nu=rng.uniform(1.0 + 1e-9, 2.0))
            in_x = bool(rng.integers(2))
            f = rng.normal()
            got = merit_components(f, g, h, in_x, p).value
            want = merit_reference(f, g, h, in_x,
                                   sorted(p.g_log), sorted(p.g_ext),
                                   p.rho_log, p.rho_ext, p.nu)
            if math.isinf(want):
                assert got == want
            else:
                assert got == pytest.approx(want, rel=1e-12)


class TestViolation:
    def test_hand_example(self):
        assert constraint_violation(make_eval(g=[0.5, -0.3], h=[-0.2])) == \
            pytest.approx(0.7)

    def test_feasible_is_zero(self):
        assert constraint_violation(make_eval(g=[-1.0, 0.0], h=[0.0])) == 0.0

    def test_unconstrained_is_zero(self):
        assert constraint_violation(make_eval()) == 0.0

    def test_nonnegative_and_additive(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            g = rng.normal(size=3)
            h = rng.normal(size=2)
            c = constraint_violation(make_eval(g=g, h=h))
            assert c >= 0.0
            assert c == pytest.approx(
                constraint_violation(make_eval(g=g))
                + constraint_violation(make_eval(h=h)))
            assert (c == 0.0) == (np.all(g <= 0) and np.all(h == 0))


class TestGMin:
    def test_hand_min(self):
        assert g_min(make_eval(g=[-0.2, -1.5]), {0, 1}) == pytest.approx(0.2)

    def test_empty_group_is_inf(self):
        assert g_min(make_eval(g=[-0.2]), set()) == np.inf

    def test_absolute_value(self):
        assert g_min(make_eval(g=[-0.2, 3.0]), {1}) == pytest.approx(3.0)


class TestMultipliers:
    def test_barrier_multiplier(self):
        lam, mu = multiplier_estimates(make_eval(g=[-0.5]), params_for({0}, set()))
        assert lam.tolist() == [pytest.approx(0.2)]
        assert mu.size == 0

    def test_inactive_exterior_is_zero(self):
        lam, _ = multiplier_estimates(make_eval(g=[-3.0]), params_for(set(), {0}))
        assert lam.tolist() == [0.0]

    def test_equality_magnitude(self):
        _, mu = multiplier_estimates(make_eval(g=[], h=[0.25]),
                                     params_for(set(), set()))
        assert mu.tolist() == [pytest.approx(5.0)]

    def test_domain_error_on_active_barrier(self):
        with pytest.raises(DomainError):
            multiplier_estimates(make_eval(g=[0.0]), params_for({0}, set()))

    def test_nonnegative_and_complementary(self):
        rng = np.random.default_rng(12)
        p = params_for({0}, {1, 2}, nu=1.5)
        for _ in range(200):
            g = np.concatenate([[-rng.uniform(0.01, 3.0)], rng.normal(size=2)])
            lam, mu = multiplier_estimates(make_eval(g=g, h=rng.normal(size=1)), p)
            assert np.all(lam >= 0) and np.all(mu >= 0)
            for l in (1, 2):
                if g[l] <= 0:
                    assert lam[l] == 0.0


class TestParamsValidation:
    def test_overlap_rejected(self):
        with pytest.raises(InvalidConfig):
            params_for({0}, {0, 1})

    def test_gap_rejected(self):
        with pytest.raises(InvalidConfig):
            MeritParams(g_log=frozenset({0}), g_ext=frozenset({2}),
                        rho_log=0.1, rho_ext=0.1)

    def test_bad_nu(self):
        with pytest.raises(InvalidConfig):
            params_for({0}, set(), nu=1.0)

    def test_bad_rho(self):
        with pytest.raises(InvalidConfig):
            params_for({0}, set(), rho_log=0.0)
