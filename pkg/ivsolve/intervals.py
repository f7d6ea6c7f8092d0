"""
Outward-rounded interval arithmetic, boxes and primitive-operation counters.

Endpoints are IEEE doubles. Every endpoint operation is checked with an
error-free transformation (TwoSum, Dekker's TwoProduct, remainder-checked
division); an inexact lower endpoint is moved one ulp toward -inf and an
inexact upper endpoint one ulp toward +inf. Exactly representable results
are therefore returned exactly.

Counters are attached to the current execution context with ``counting()``;
when no counter is active, the operations only compute.
"""
import itertools
import math
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from operator import itemgetter

from .exceptions import DegenerateAxis, EmptyBoxError, EmptyIntervalError, ZeroInDivisor

INF = math.inf
MAX_FLOAT = 1.7976931348623157e308
_nextafter = math.nextafter

# Veltkamp splitter for doubles (2**27 + 1)
_SPLITTER = 134217729.0
_SPLIT_SAFE = 1e290
_UNDERFLOW_SAFE = 1e-280


# ==================== Operation counters ====================

@dataclass
class OpCounters:
    """Per-run accumulators. Real-endpoint counts follow the interval cost table."""
    adds: int = 0
    subs: int = 0
    muls: int = 0
    divs: int = 0
    comparisons: int = 0
    F_evals: int = 0
    J_evals: int = 0
    inversions: int = 0
    contractor_calls: int = 0
    interval_ops: int = 0
    hulled_divisions: int = 0

    def reset(self):
        for f in fields(self):
            setattr(self, f.name, 0)

    def merge(self, other):
        """Sum of two counter sets (used when runs are split across workers)."""
        return OpCounters(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    def copy(self):
        return OpCounters(**asdict(self))

    def as_dict(self):
        return asdict(self)

    @property
    def endpoint_ops(self):
        return self.adds + self.subs + self.muls + self.divs + self.comparisons


_ACTIVE = ContextVar('ivsolve_op_counters', default=None)


@contextmanager
def counting(counters=None):
    """Activate ``counters`` (a fresh OpCounters by default) for the enclosed block."""
    counters = counters if counters is not None else OpCounters()
    token = _ACTIVE.set(counters)
    try:
        yield counters
    finally:
        _ACTIVE.reset(token)


@contextmanager
def suspended():
    """Run the enclosed block without counting."""
    token = _ACTIVE.set(None)
    try:
        yield
    finally:
        _ACTIVE.reset(token)


def active_counters():
    return _ACTIVE.get()


# ==================== Directed endpoint rounding ====================

def _sum_down(x, y):
    s = x + y
    if s != s:
        return -INF
    if s == INF or s == -INF:
        if x == s or y == s:
            return s
        return _nextafter(s, -INF)
    bb = s - x
    err = (x - (s - bb)) + (y - bb)
    if err < 0.0:
        return _nextafter(s, -INF)
    return s


def _sum_up(x, y):
    s = x + y
    if s != s:
        return INF
    if s == INF or s == -INF:
        if x == s or y == s:
            return s
        return _nextafter(s, INF)
    bb = s - x
    err = (x - (s - bb)) + (y - bb)
    if err > 0.0:
        return _nextafter(s, INF)
    return s


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _prod_err(x, y, p):
    """Exact error p - x*y sign carrier: returns e with x*y = p + e, or NaN if unknown."""
    if p == INF or p == -INF:
        if x == INF or x == -INF or y == INF or y == -INF:
            return 0.0
        return math.nan
    ax = abs(x)
    ay = abs(y)
    if ax > _SPLIT_SAFE or ay > _SPLIT_SAFE or abs(p) < _UNDERFLOW_SAFE:
        return math.nan
    xh, xl = _split(x)
    yh, yl = _split(y)
    return xl * yl - (((p - xh * yh) - xl * yh) - xh * yl)


def _prod_down(x, y):
    if x == 0.0 or y == 0.0:
        return 0.0
    p = x * y
    err = _prod_err(x, y, p)
    if err >= 0.0:
        return p
    return _nextafter(p, -INF)


def _prod_up(x, y):
    if x == 0.0 or y == 0.0:
        return 0.0
    p = x * y
    err = _prod_err(x, y, p)
    if err <= 0.0:
        return p
    return _nextafter(p, INF)


def _quot_residual_sign(x, y, q):
    """Sign of x/y - q, or None when it cannot be decided."""
    p = q * y
    err = _prod_err(q, y, p)
    if err != err:
        return None
    residual = (x - p) - err
    if residual == 0.0:
        return 0
    return 1 if (residual > 0.0) == (y > 0.0) else -1


def _quot_down(x, y):
    if x == 0.0:
        return 0.0
    if y == INF or y == -INF:
        if x == INF or x == -INF:
            return -INF
        return 0.0
    q = x / y
    if q == INF or q == -INF:
        if x == INF or x == -INF:
            return q
        return _nextafter(q, -INF)
    if q == 0.0:
        return 0.0 if (x > 0.0) == (y > 0.0) else _nextafter(0.0, -INF)
    sign = _quot_residual_sign(x, y, q)
    if sign is None or sign < 0:
        return _nextafter(q, -INF)
    return q


def _quot_up(x, y):
    if x == 0.0:
        return 0.0
    if y == INF or y == -INF:
        if x == INF or x == -INF:
            return INF
        return 0.0
    q = x / y
    if q == INF or q == -INF:
        if x == INF or x == -INF:
            return q
        return _nextafter(q, INF)
    if q == 0.0:
        return _nextafter(0.0, INF) if (x > 0.0) == (y > 0.0) else 0.0
    sign = _quot_residual_sign(x, y, q)
    if sign is None or sign > 0:
        return _nextafter(q, INF)
    return q


def _pow_down(x, k):
    """Lower bound of x**k for x >= 0 by repeated squaring."""
    result = 1.0
    base = x
    while k:
        if k & 1:
            result = _prod_down(result, base)
        k >>= 1
        if k:
            base = _prod_down(base, base)
    return result


def _pow_up(x, k):
    result = 1.0
    base = x
    while k:
        if k & 1:
            result = _prod_up(result, base)
        k >>= 1
        if k:
            base = _prod_up(base, base)
    return result


def _decimal_down(text):
    value = float(text)
    if Fraction(value) > Fraction(str(text)):
        value = _nextafter(value, -INF)
    return value


def _decimal_up(text):
    value = float(text)
    if Fraction(value) < Fraction(str(text)):
        value = _nextafter(value, INF)
    return value


# ==================== Interval ====================

class Interval(tuple):
    """
    Closed real interval [lo, hi], immutable.

    ``Interval.EMPTY`` is a dedicated sentinel; it is the only interval whose
    ``is_empty`` is true.
    """
    __slots__ = ()
    is_empty = False

    def __new__(cls, lo, hi=None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if lo != lo or hi != hi:
            raise ValueError('Interval endpoints must not be NaN')
        if lo > hi:
            raise ValueError(f"Lower endpoint {lo} exceeds upper endpoint {hi}")
        return tuple.__new__(cls, (lo, hi))

    lo = property(itemgetter(0))
    hi = property(itemgetter(1))

    @classmethod
    def point(cls, x):
        return cls(x, x)

    @classmethod
    def whole(cls):
        return _iv(-INF, INF)

    @classmethod
    def from_decimal(cls, lo_text, hi_text=None):
        """Smallest double interval enclosing the decimal literals."""
        hi_text = lo_text if hi_text is None else hi_text
        return cls(_decimal_down(lo_text), _decimal_up(hi_text))

    def __repr__(self):
        return f"[{self[0]!r}, {self[1]!r}]"

    __str__ = __repr__

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return int_pow(self, k)

    def __and__(self, other):
        return intersect(self, _coerce(other))

    def __or__(self, other):
        return hull(self, _coerce(other))

    def __contains__(self, x):
        if isinstance(x, Interval):
            return is_subset(x, self)
        return contains_point(self, x)

    def __getnewargs__(self):
        return tuple(self)


class _EmptyInterval(Interval):
    __slots__ = ()
    is_empty = True

    def __new__(cls):
        return tuple.__new__(cls, (math.nan, math.nan))

    def __repr__(self):
        return 'Interval.EMPTY'

    __str__ = __repr__

    def __reduce__(self):
        return (_empty, ())


EMPTY = _EmptyInterval()
Interval.EMPTY = EMPTY


def _empty():
    return EMPTY


def _iv(lo, hi):
    return tuple.__new__(Interval, (lo, hi))


def _coerce(value):
    if isinstance(value, Interval):
        return value
    return Interval(value)


# ==================== Arithmetic ====================

def add(a, b):
    if a is EMPTY or b is EMPTY:
        return EMPTY
    alo, ahi = a
    blo, bhi = b
    c = _ACTIVE.get()
    if c is not None:
        c.adds += 2
        c.interval_ops += 1
    return _iv(_sum_down(alo, blo), _sum_up(ahi, bhi))


def sub(a, b):
    if a is EMPTY or b is EMPTY:
        return EMPTY
    alo, ahi = a
    blo, bhi = b
    c = _ACTIVE.get()
    if c is not None:
        c.subs += 2
        c.interval_ops += 1
    return _iv(_sum_down(alo, -bhi), _sum_up(ahi, -blo))


def neg(a):
    if a is EMPTY:
        return EMPTY
    return _iv(-a[1], -a[0])


def _mul_endpoints(alo, ahi, blo, bhi):
    if alo >= 0.0:
        if blo >= 0.0:
            return _prod_down(alo, blo), _prod_up(ahi, bhi)
        if bhi <= 0.0:
            return _prod_down(ahi, blo), _prod_up(alo, bhi)
        return _prod_down(ahi, blo), _prod_up(ahi, bhi)
    if ahi <= 0.0:
        if blo >= 0.0:
            return _prod_down(alo, bhi), _prod_up(ahi, blo)
        if bhi <= 0.0:
            return _prod_down(ahi, bhi), _prod_up(alo, blo)
        return _prod_down(alo, bhi), _prod_up(alo, blo)
    if blo >= 0.0:
        return _prod_down(alo, bhi), _prod_up(ahi, bhi)
    if bhi <= 0.0:
        return _prod_down(ahi, blo), _prod_up(alo, blo)
    lo = min(_prod_down(alo, bhi), _prod_down(ahi, blo))
    hi = max(_prod_up(alo, blo), _prod_up(ahi, bhi))
    return lo, hi


def mul(a, b):
    if a is EMPTY or b is EMPTY:
        return EMPTY
    c = _ACTIVE.get()
    if c is not None:
        c.muls += 4
        c.comparisons += 6
        c.interval_ops += 1
    lo, hi = _mul_endpoints(a[0], a[1], b[0], b[1])
    return _iv(lo, hi)


def div(a, b):
    """a / b for 0 not in b, as a times the reciprocal interval."""
    if a is EMPTY or b is EMPTY:
        return EMPTY
    blo, bhi = b
    if blo <= 0.0 <= bhi:
        raise ZeroInDivisor(f"Divisor {b!r} contains zero")
    c = _ACTIVE.get()
    if c is not None:
        c.divs += 2
        c.muls += 4
        c.comparisons += 6
        c.interval_ops += 1
    rlo = _quot_down(1.0, bhi)
    rhi = _quot_up(1.0, blo)
    lo, hi = _mul_endpoints(a[0], a[1], rlo, rhi)
    return _iv(lo, hi)


def extended_div(a, b):
    """
    Division allowing 0 in b. Returns a tuple of one or two intervals whose
    union encloses {x/y : x in a, y in b, y != 0}.
    """
    if a is EMPTY or b is EMPTY:
        return (EMPTY,)
    blo, bhi = b
    if not (blo <= 0.0 <= bhi):
        return (div(a, b),)
    alo, ahi = a
    c = _ACTIVE.get()
    if c is not None:
        c.divs += 2
        c.comparisons += 4
        c.interval_ops += 1
    if alo == 0.0 and ahi == 0.0:
        return (_iv(0.0, 0.0),) if (blo < 0.0 or bhi > 0.0) else (EMPTY,)
    if alo <= 0.0 <= ahi:
        return (Interval.whole(),)
    if blo == 0.0 and bhi == 0.0:
        return (EMPTY,)
    if ahi < 0.0:
        if bhi == 0.0:
            return (_iv(_quot_down(ahi, blo), INF),)
        if blo == 0.0:
            return (_iv(-INF, _quot_up(ahi, bhi)),)
        return (_iv(-INF, _quot_up(ahi, bhi)), _iv(_quot_down(ahi, blo), INF))
    if bhi == 0.0:
        return (_iv(-INF, _quot_up(alo, blo)),)
    if blo == 0.0:
        return (_iv(_quot_down(alo, bhi), INF),)
    return (_iv(-INF, _quot_up(alo, blo)), _iv(_quot_down(alo, bhi), INF))


def hull_pieces(pieces):
    result = EMPTY
    for piece in pieces:
        result = hull(result, piece)
    return result


def int_pow(a, k):
    """Tight enclosure of {x**k : x in a} for an integer k >= 0."""
    k = int(k)
    if k < 0:
        raise ValueError('Only non-negative integer exponents are supported')
    if a is EMPTY:
        return EMPTY
    steps = (k - 1).bit_length() if k > 1 else 0
    c = _ACTIVE.get()
    if c is not None and steps:
        c.muls += 4 * steps
        c.comparisons += 6 * steps
        c.interval_ops += steps
    if k == 0:
        return _iv(1.0, 1.0)
    if k == 1:
        return a
    alo, ahi = a
    if k & 1:
        lo = _pow_down(alo, k) if alo >= 0.0 else -_pow_up(-alo, k)
        hi = _pow_up(ahi, k) if ahi >= 0.0 else -_pow_down(-ahi, k)
        return _iv(lo, hi)
    if alo >= 0.0:
        return _iv(_pow_down(alo, k), _pow_up(ahi, k))
    if ahi <= 0.0:
        return _iv(_pow_down(-ahi, k), _pow_up(-alo, k))
    return _iv(0.0, _pow_up(max(-alo, ahi), k))


def sqr(a):
    return int_pow(a, 2)


# ==================== Set operations and measures ====================

def intersect(a, b):
    if a is EMPTY or b is EMPTY:
        return EMPTY
    lo = a[0] if a[0] >= b[0] else b[0]
    hi = a[1] if a[1] <= b[1] else b[1]
    if lo > hi:
        return EMPTY
    return _iv(lo, hi)


def hull(a, b):
    if a is EMPTY:
        return b
    if b is EMPTY:
        return a
    return _iv(min(a[0], b[0]), max(a[1], b[1]))


def is_subset(a, b):
    if a is EMPTY:
        return True
    if b is EMPTY:
        return False
    return b[0] <= a[0] and a[1] <= b[1]


def mid(a):
    if a is EMPTY:
        raise EmptyIntervalError('mid of an empty interval')
    lo, hi = a
    if lo == -INF:
        return 0.0 if hi == INF else -MAX_FLOAT
    if hi == INF:
        return MAX_FLOAT
    m = (lo + hi) * 0.5
    if m == INF or m == -INF:
        m = lo * 0.5 + hi * 0.5
    if m < lo:
        return lo
    if m > hi:
        return hi
    return m


def diam(a):
    if a is EMPTY:
        raise EmptyIntervalError('diam of an empty interval')
    return _sum_up(a[1], -a[0])


def rad(a):
    if a is EMPTY:
        raise EmptyIntervalError('rad of an empty interval')
    half = diam(a) * 0.5
    return half


def mag(a):
    if a is EMPTY:
        raise EmptyIntervalError('mag of an empty interval')
    return max(abs(a[0]), abs(a[1]))


def mig(a):
    """Mignitude: smallest absolute value in a (0 when a contains 0)."""
    if a is EMPTY:
        raise EmptyIntervalError('mig of an empty interval')
    lo, hi = a
    if lo <= 0.0 <= hi:
        return 0.0
    return min(abs(lo), abs(hi))


def contains_zero(a):
    return a is not EMPTY and a[0] <= 0.0 <= a[1]


def contains_point(a, x):
    return a is not EMPTY and a[0] <= x <= a[1]


# ==================== Box ====================

class Box(tuple):
    """
    Immutable interval vector. A box is empty iff one of its components is.

    A box with zero components is only used as the parameter box of a
    parameter-free system.
    """
    __slots__ = ()

    def __new__(cls, components=()):
        items = tuple(c if isinstance(c, Interval) else Interval(*c) for c in components)
        return tuple.__new__(cls, items)

    @classmethod
    def point(cls, xs):
        return _box(_iv(float(x), float(x)) for x in xs)

    @classmethod
    def uniform(cls, lo, hi, n):
        component = Interval(lo, hi)
        return _box((component,) * n)

    @property
    def n(self):
        return len(self)

    @property
    def is_empty(self):
        return any(c is EMPTY for c in self)

    def volume(self):
        if self.is_empty:
            return 0.0
        v = 1.0
        for c in self:
            v *= diam(c)
        return v

    def midpoint(self):
        return tuple(mid(c) for c in self)

    def lower_corner(self):
        return tuple(c[0] for c in self)

    def widths(self):
        return tuple(diam(c) for c in self)

    def widest_axis(self):
        """Index of the widest component, ties to the lowest index."""
        best, best_width = 0, -1.0
        for i, c in enumerate(self):
            w = diam(c)
            if w > best_width:
                best, best_width = i, w
        return best

    def intersect(self, other):
        return _box(intersect(a, b) for a, b in zip(self, other))

    def hull(self, other):
        return _box(hull(a, b) for a, b in zip(self, other))

    def is_subset(self, other):
        return all(is_subset(a, b) for a, b in zip(self, other))

    def contains_point(self, xs):
        return all(contains_point(c, x) for c, x in zip(self, xs))

    def replace(self, axis, component):
        items = list(self)
        items[axis] = component
        return _box(items)

    def __repr__(self):
        return ' x '.join(repr(c) for c in self) if self else 'Box()'

    __str__ = __repr__


def _box(items):
    return tuple.__new__(Box, tuple(items))


def empty_box(n):
    return _box((EMPTY,) * n)


def box_diam(X):
    """Maximum component diameter: n subtractions and n - 1 comparisons."""
    n = len(X)
    if n == 0 or X.is_empty:
        raise EmptyBoxError('diam of an empty box')
    c = _ACTIVE.get()
    if c is not None:
        c.subs += n
        c.comparisons += n - 1
    widest = diam(X[0])
    for comp in X[1:]:
        w = diam(comp)
        if w > widest:
            widest = w
    return widest


def bisect(X, axis):
    """Split X at the midpoint of component ``axis``."""
    comp = X[axis]
    if comp is EMPTY:
        raise EmptyBoxError('cannot bisect an empty box')
    lo, hi = comp
    m = mid(comp)
    if not (lo < m < hi):
        raise DegenerateAxis(f"Component {axis} ({comp!r}) cannot be split further")
    left = list(X)
    right = list(X)
    left[axis] = _iv(lo, m)
    right[axis] = _iv(m, hi)
    return _box(left), _box(right)


def _grid_points(component, m):
    lo, hi = component
    width = hi - lo
    if not math.isfinite(width):
        raise ValueError(f"Cannot grid an unbounded component {component!r}")
    points = [lo + k * width / m for k in range(m)]
    points.append(hi)
    for k in range(1, m + 1):
        if points[k] < points[k - 1]:
            points[k] = points[k - 1]
    return [_iv(points[k], points[k + 1]) for k in range(m)]


def iter_subdivision(X, m):
    """Lazily yield the m**n grid boxes tiling X, lexicographic by axis index."""
    if m < 1:
        raise ValueError('m must be a positive integer')
    if X.is_empty:
        raise EmptyBoxError('cannot subdivide an empty box')
    if m == 1:
        yield X
        return
    axes = [_grid_points(c, m) for c in X]
    for combo in itertools.product(*axes):
        yield _box(combo)


def subdivide_uniform(X, m):
    return list(iter_subdivision(X, m))
