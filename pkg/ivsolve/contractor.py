"""
HC4 forward-backward contraction of a box against the constraints f_i(x, u) = 0.

The forward pass evaluates every node of an equation on the current box; the
backward pass seeds the root with the target interval and pushes inverse
projections down to the variables. Parameter intervals are read, never
narrowed.
"""
import logging
import math
from dataclasses import dataclass

from .expressions import Add, Const, DecimalConst, Div, IntPow, Mul, Neg, ParamVar, StateVar, Sub
from .intervals import (
    EMPTY,
    INF,
    Box,
    Interval,
    _box,
    _iv,
    _pow_down,
    _pow_up,
    active_counters,
    add,
    box_diam,
    contains_zero,
    empty_box,
    extended_div,
    hull,
    int_pow,
    intersect,
    mul,
    neg,
    sub,
)

logger = logging.getLogger(__name__)

_ZERO = Interval(0.0)


class _Infeasible(Exception):
    pass


@dataclass(frozen=True)
class ContractionResult:
    box: Box
    changed: bool
    width_reduction: float

    @property
    def is_empty(self):
        return self.box.is_empty


class _Node:
    __slots__ = ('expr', 'value', 'children')

    def __init__(self, expr, value, children=()):
        self.expr = expr
        self.value = value
        self.children = children


# ==================== Forward pass ====================

def _forward(e, X, U):
    if isinstance(e, (Const, DecimalConst, StateVar, ParamVar)):
        return _Node(e, e.interval(X, U))
    children = tuple(_forward(child, X, U) for child in e.children())
    values = [child.value for child in children]
    if isinstance(e, Neg):
        value = neg(values[0])
    elif isinstance(e, Add):
        value = add(*values)
    elif isinstance(e, Sub):
        value = sub(*values)
    elif isinstance(e, Mul):
        value = mul(*values)
    elif isinstance(e, Div):
        value = _divide_hull(*values)
    elif isinstance(e, IntPow):
        value = int_pow(values[0], e.exponent)
    else:
        raise TypeError(f"Unsupported node {type(e).__name__}")
    return _Node(e, value, children)


def _divide_hull(a, b):
    if a is EMPTY or b is EMPTY:
        return EMPTY
    result = EMPTY
    for piece in extended_div(a, b):
        result = hull(result, piece)
    return result


# ==================== Backward projections ====================

def _narrow(current, candidate):
    narrowed = intersect(current, candidate)
    if narrowed is EMPTY:
        raise _Infeasible
    return narrowed


def _solve_factor(current, product, other):
    """Narrow ``current`` to {x : x * y in product for some y in other}."""
    if contains_zero(product) and contains_zero(other):
        return current
    result = EMPTY
    for piece in extended_div(product, other):
        result = hull(result, intersect(current, piece))
    if result is EMPTY:
        raise _Infeasible
    return result


def _root_down(y, k):
    """Largest-safe lower bound of y ** (1/k) for y >= 0."""
    if y <= 0.0:
        return 0.0
    if y == INF:
        return INF
    r = y ** (1.0 / k)
    while r > 0.0 and _pow_up(r, k) > y:
        r = math.nextafter(r, -INF)
    return r


def _root_up(y, k):
    if y <= 0.0:
        return 0.0
    if y == INF:
        return INF
    r = y ** (1.0 / k)
    while _pow_down(r, k) < y:
        r = math.nextafter(r, INF)
    return r


def _signed_root(y, k, upward):
    if y >= 0.0:
        return _root_up(y, k) if upward else _root_down(y, k)
    return -(_root_down(-y, k) if upward else _root_up(-y, k))


def _project_power(current, target, k):
    if k == 0:
        if not contains_zero(sub(target, _iv(1.0, 1.0))):
            raise _Infeasible
        return current
    if k & 1:
        return _narrow(current, _iv(_signed_root(target[0], k, False), _signed_root(target[1], k, True)))
    nonneg = intersect(target, _iv(0.0, INF))
    if nonneg is EMPTY:
        raise _Infeasible
    root = _iv(_root_down(nonneg[0], k), _root_up(nonneg[1], k))
    result = hull(intersect(current, root), intersect(current, neg(root)))
    if result is EMPTY:
        raise _Infeasible
    return result


def _backward(node, target, X, U):
    value = _narrow(node.value, target)
    e = node.expr
    if isinstance(e, (Const, DecimalConst)):
        return
    if isinstance(e, StateVar):
        X[e.index] = _narrow(X[e.index], value)
        return
    if isinstance(e, ParamVar):
        _narrow(U[e.index], value)
        return
    if isinstance(e, Neg):
        _backward(node.children[0], neg(value), X, U)
        return
    if isinstance(e, IntPow):
        child = node.children[0]
        _backward(child, _project_power(child.value, value, e.exponent), X, U)
        return

    left, right = node.children
    lv, rv = left.value, right.value
    if isinstance(e, Add):
        lv = _narrow(lv, sub(value, rv))
        rv = _narrow(rv, sub(value, lv))
    elif isinstance(e, Sub):
        lv = _narrow(lv, add(value, rv))
        rv = _narrow(rv, sub(lv, value))
    elif isinstance(e, Mul):
        lv = _solve_factor(lv, value, rv)
        rv = _solve_factor(rv, value, lv)
    elif isinstance(e, Div):
        # value = l / r with r != 0, hence l = value * r and r solves r * value = l
        lv = _narrow(lv, mul(value, rv))
        rv = _solve_factor(rv, lv, value)
    _backward(left, lv, X, U)
    _backward(right, rv, X, U)


def hc4_revise(e, target, X, U=Box()):
    """One forward-backward sweep of ``e`` in ``target``; returns the narrowed state box."""
    if X.is_empty:
        return X
    components = list(X)
    try:
        root = _forward(e, X, U)
        _backward(root, target, components, U)
    except _Infeasible:
        return empty_box(len(X))
    return _box(components)


def contract_system(m, X, U=None):
    """One contractor call: hc4_revise for every equation in model order."""
    U = m.U if U is None else U
    counters = active_counters()
    if counters is not None:
        counters.contractor_calls += 1
    box = X
    for eq in m.equations:
        box = hc4_revise(eq, _ZERO, box, U)
        if box.is_empty:
            return ContractionResult(box=box, changed=True, width_reduction=box_diam(X))
    changed = box != X
    reduction = box_diam(X) - box_diam(box) if changed else 0.0
    return ContractionResult(box=box, changed=changed, width_reduction=reduction if reduction > 0.0 else 0.0)
