import math

import numpy as np
import pytest

from ivsolve import intervals
from ivsolve.checks import (
    check_containment,
    check_isotonicity,
    check_laplace_recurrence,
    check_solver_soundness,
    parameter_samples,
    real_root_oracle,
    run_checks,
)
from ivsolve.intervals import Interval
from ivsolve.systems import hill_network, sqrt_two, sum_product_example


def test_containment_passes():
    result = check_containment(np.random.default_rng(0), trials=10_000)
    assert result.passed, result.detail
    assert result.name == 'containment'


def test_containment_catches_a_narrowed_multiplication(monkeypatch):
    exact_mul = intervals.mul

    def shrunk_mul(a, b):
        lo, hi = exact_mul(a, b)
        if hi - lo <= 0.0:
            return Interval(lo, hi)
        # drop the outer tenth on both sides
        return Interval(lo + (hi - lo) / 10, hi - (hi - lo) / 10)

    monkeypatch.setattr(intervals, 'mul', shrunk_mul)
    result = check_containment(np.random.default_rng(0))
    assert not result.passed
    assert 'mul' in result.detail


def test_isotonicity_passes():
    result = check_isotonicity(np.random.default_rng(1), trials=1000)
    assert result.passed, result.detail


def test_laplace_recurrence_passes():
    assert check_laplace_recurrence(seed=2).passed


def test_solver_soundness_passes():
    assert check_solver_soundness().passed


def test_run_checks_is_deterministic():
    first = run_checks(seed=7)
    second = run_checks(seed=7)
    assert [r.name for r in first] == ['containment', 'isotonicity', 'laplace_recurrence', 'solver_soundness']
    assert all(r.passed for r in first)
    assert first == second


def test_parameter_samples_cover_corners():
    model = hill_network(2)
    samples = parameter_samples(model, np.random.default_rng(0), count=2)
    assert len(samples) == 5
    assert samples[1] == tuple(c.lo for c in model.U)
    assert samples[2] == tuple(c.hi for c in model.U)
    assert all(model.U.contains_point(u) for u in samples)
    assert parameter_samples(sqrt_two(), np.random.default_rng(0)) == [()]


def test_oracle_finds_square_root():
    roots = real_root_oracle(sqrt_two(), starts=20)
    assert len(roots) == 1
    (x,), u = roots[0]
    assert x == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert u == ()


def test_oracle_finds_both_sumprod_roots():
    roots = sorted(x for x, _ in real_root_oracle(sum_product_example(), starts=100))
    assert len(roots) == 2
    assert roots[0] == pytest.approx((0.0, 0.0), abs=1e-9)
    assert roots[1] == pytest.approx((1.0, -1.0), abs=1e-9)
