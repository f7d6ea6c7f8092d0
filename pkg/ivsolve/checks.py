"""
Fast invariant battery behind ``manage.py ivsolve check``, plus a multi-start
real Newton root finder used as an oracle by tests.

Interval operations are looked up on the ``intervals`` module at call time so
a patched operation is what gets checked.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import intervals
from .bench import factorial_growth_check
from .exceptions import DivByZero
from .expressions import eval_interval, eval_jacobian_real, eval_system_real
from .intervals import EMPTY, Box, Interval
from .solvers import Method, SolverConfig, solve
from .systems import hill_network, known_root_suite, sum_product_example, wta_network

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ''


# ==================== Sampling helpers ====================

def _random_interval(rng, scale=10.0, sign=None):
    a, b = sorted(rng.uniform(-scale, scale, size=2))
    if sign == 'positive':
        a, b = abs(a) + 1e-3, abs(a) + abs(b - a) + 1e-3
    elif sign == 'negative':
        a, b = -(abs(a) + abs(b - a) + 1e-3), -(abs(a) + 1e-3)
    elif sign == 'straddle':
        a, b = -abs(a) - 1e-3, abs(b) + 1e-3
    return Interval(float(a), float(b))


def _sample(rng, iv):
    return float(rng.uniform(iv.lo, iv.hi))


def _inside(value, iv):
    """Exact membership of a rational value."""
    if iv is EMPTY:
        return False
    return Fraction(iv.lo) <= value <= Fraction(iv.hi)


def check_containment(rng, trials=1000):
    """x o y lies in A o B for sampled x in A, y in B, with an exact rational oracle."""
    failures = []
    binary = {
        'add': lambda x, y: Fraction(x) + Fraction(y),
        'sub': lambda x, y: Fraction(x) - Fraction(y),
        'mul': lambda x, y: Fraction(x) * Fraction(y),
        'div': lambda x, y: Fraction(x) / Fraction(y),
    }
    for name, exact in binary.items():
        op = getattr(intervals, name)
        for _ in range(trials):
            a = _random_interval(rng)
            b = _random_interval(rng, sign=rng.choice(['positive', 'negative']) if name == 'div' else None)
            x, y = _sample(rng, a), _sample(rng, b)
            if not _inside(exact(x, y), op(a, b)):
                failures.append(f"{name}: {x!r} o {y!r} not in {op(a, b)!r}")
                break

    extended_div = intervals.extended_div
    for _ in range(trials):
        a = _random_interval(rng)
        b = _random_interval(rng, sign='straddle')
        x, y = _sample(rng, a), _sample(rng, b)
        if y == 0.0:
            continue
        pieces = extended_div(a, b)
        if not any(_inside(Fraction(x) / Fraction(y), piece) for piece in pieces):
            failures.append(f"extended_div: {x!r} / {y!r} not in {pieces!r}")
            break

    intersect = intervals.intersect
    for _ in range(trials):
        a, b = _random_interval(rng), _random_interval(rng)
        x = _sample(rng, a)
        if b.lo <= x <= b.hi and not _inside(Fraction(x), intersect(a, b)):
            failures.append(f"intersect: {x!r} missing from {a!r} & {b!r}")
            break

    return CheckResult('containment', not failures, '; '.join(failures))


def _random_subbox(rng, box):
    parts = []
    for c in box:
        a, b = sorted(rng.uniform(c.lo, c.hi, size=2))
        parts.append(Interval(float(a), float(b)))
    return Box(parts)


def check_isotonicity(rng, trials=200):
    """Y within Z implies F(Y) within F(Z), and sampled real values lie in F(Y)."""
    failures = []
    models = [hill_network(2), wta_network(2), sum_product_example()]
    for model in models:
        for _ in range(trials):
            Z = _random_subbox(rng, model.X0)
            Y = _random_subbox(rng, Z)
            x = [_sample(rng, c) for c in Y]
            u = [_sample(rng, c) for c in model.U]
            for i, eq in enumerate(model.equations):
                fy = eval_interval(eq, Y, model.U)
                fz = eval_interval(eq, Z, model.U)
                if fy not in fz:
                    failures.append(f"{model.name} f{i + 1}: F(Y)={fy!r} not within F(Z)={fz!r}")
                    break
                try:
                    value = eq.real(x, u)
                except DivByZero:
                    continue
                if not fy.lo <= value <= fy.hi:
                    failures.append(f"{model.name} f{i + 1}: f(x)={value!r} outside F(Y)={fy!r}")
                    break
            if failures:
                break
    return CheckResult('isotonicity', not failures, '; '.join(failures))


def check_laplace_recurrence(seed=0, max_n=5):
    rows = factorial_growth_check(max_n=max_n, seed=seed)
    bad = [f"n={r['n']}: {r['measured_muls']} != {r['expected_muls']}" for r in rows if not r['matches']]
    return CheckResult('laplace_recurrence', not bad, '; '.join(bad))


SOUNDNESS_CONFIGS = {
    Method.BISECTION: {'epsilon': 1e-2},
    Method.SUBDIVISION: {'m': 8},
    Method.ICP: {'m': 8, 'n_it': 5},
    Method.NEWTON: {'epsilon': 1e-2},
    Method.KRAWCZYK: {'epsilon': 1e-2},
}


def check_solver_soundness(seed=0):
    """Every analytic root of the known-root systems lies in the retained union."""
    failures = []
    for model in known_root_suite():
        for method, settings in SOUNDNESS_CONFIGS.items():
            report = solve(model, SolverConfig(method=method, seed=seed, **settings))
            for root in model.known_roots:
                if not report.union_contains(root):
                    failures.append(f"{method.value} lost root {root} of {model.name}")
    return CheckResult('solver_soundness', not failures, '; '.join(failures))


def run_checks(seed=0):
    rng = np.random.default_rng(seed)
    results = [
        check_containment(rng),
        check_isotonicity(rng),
        check_laplace_recurrence(seed=seed),
        check_solver_soundness(seed=seed),
    ]
    for result in results:
        status = '✓' if result.passed else '✗'
        logger.info(f"{status} {result.name}{': ' + result.detail if result.detail else ''}")
    return results


# ==================== Root oracle ====================

def parameter_samples(model, rng, count=4):
    """Midpoint, the two extreme corners and ``count`` random points of U."""
    if model.p == 0:
        return [()]
    samples = [
        tuple(c.lo + 0.5 * (c.hi - c.lo) for c in model.U),
        tuple(c.lo for c in model.U),
        tuple(c.hi for c in model.U),
    ]
    for _ in range(count):
        samples.append(tuple(_sample(rng, c) for c in model.U))
    return samples


def real_root_oracle(model, starts=200, seed=0, u_samples=None, max_iter=50, residual=1e-12):
    """
    Roots of f(., u) inside X0 found by damped-free real Newton from random starts.

    Returns a list of (x, u) pairs; duplicates (within 1e-8) are merged.
    """
    rng = np.random.default_rng(seed)
    if u_samples is None:
        u_samples = parameter_samples(model, rng)
    lo = np.array([c.lo for c in model.X0])
    hi = np.array([c.hi for c in model.X0])
    found = []
    for u in u_samples:
        for x in rng.uniform(lo, hi, size=(starts, model.n)):
            root = _newton_polish(model, x, u, max_iter, residual)
            if root is None or np.any(root < lo) or np.any(root > hi):
                continue
            if any(np.max(np.abs(root - np.array(r))) < 1e-8 and q == u for r, q in found):
                continue
            found.append((tuple(float(v) for v in root), tuple(u)))
    return found


def _newton_polish(model, x, u, max_iter, residual):
    x = np.array(x, dtype=float)
    for _ in range(max_iter):
        try:
            f = np.array(eval_system_real(model, x, u))
            if np.max(np.abs(f)) < residual:
                return x
            J = np.array(eval_jacobian_real(model, x, u))
            x = x - np.linalg.solve(J, f)
        except (DivByZero, np.linalg.LinAlgError, OverflowError, ZeroDivisionError):
            return None
        if not np.all(np.isfinite(x)):
            return None
    f = np.array(eval_system_real(model, x, u))
    return x if np.max(np.abs(f)) < residual else None
