"""
Expression trees for f(x, u), the model DSL, and their real / interval evaluation.

Nodes are immutable and compare structurally. They are normally built through
the Python operators (``0.5 + a / (1 + x ** 10) - g * x``) or the DSL parser;
both go through the same folding constructors, so a model survives
``parse_system(print_system(m)) == m``.
"""
import logging
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import cached_property

from .exceptions import (
    ArityError,
    DimensionMismatch,
    DivByZero,
    EmptyBoxError,
    ModelSyntaxError,
    UnknownIdentifier,
)
from .intervals import (
    EMPTY,
    Box,
    Interval,
    active_counters,
    add,
    contains_zero,
    div,
    extended_div,
    hull_pieces,
    int_pow,
    mul,
    neg,
    sub,
)

logger = logging.getLogger(__name__)


# ==================== Nodes ====================

class Expr:
    """Base class for expression nodes."""
    arity = 0

    def children(self):
        return ()

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()

    # Operator overloading builds folded trees
    def __add__(self, other):
        return make_add(self, as_expr(other))

    def __radd__(self, other):
        return make_add(as_expr(other), self)

    def __sub__(self, other):
        return make_sub(self, as_expr(other))

    def __rsub__(self, other):
        return make_sub(as_expr(other), self)

    def __mul__(self, other):
        return make_mul(self, as_expr(other))

    def __rmul__(self, other):
        return make_mul(as_expr(other), self)

    def __truediv__(self, other):
        return make_div(self, as_expr(other))

    def __rtruediv__(self, other):
        return make_div(as_expr(other), self)

    def __neg__(self):
        return make_neg(self)

    def __pow__(self, k):
        if not isinstance(k, int) or isinstance(k, bool):
            raise TypeError('Only integer exponents are supported')
        return make_pow(self, k)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float
    _point: Interval = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'value', float(self.value))
        object.__setattr__(self, '_point', Interval(self.value))

    def real(self, x, u):
        return self.value

    def interval(self, X, U):
        return self._point

    def d(self, i):
        return ZERO


@dataclass(frozen=True, eq=True)
class DecimalConst(Expr):
    """
    A decimal literal with no exact double, such as 0.1.

    Interval evaluation uses the tightest double interval around the decimal
    value; real evaluation uses the nearest double. Never folded.
    """
    text: str = field(compare=False)
    exact: Fraction = field(init=False, repr=False)
    value: float = field(init=False, repr=False, compare=False)
    _enclosure: Interval = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'exact', Fraction(self.text))
        object.__setattr__(self, 'value', float(self.text))
        object.__setattr__(self, '_enclosure', Interval.from_decimal(self.text))

    def real(self, x, u):
        return self.value

    def interval(self, X, U):
        return self._enclosure

    def d(self, i):
        return ZERO


def literal(text):
    """Const when the decimal text is an exact double, DecimalConst otherwise."""
    value = float(text)
    if Fraction(value) == Fraction(text):
        return Const(value)
    return DecimalConst(text)


@dataclass(frozen=True, eq=True)
class StateVar(Expr):
    index: int

    def real(self, x, u):
        return x[self.index]

    def interval(self, X, U):
        return X[self.index]

    def d(self, i):
        return ONE if i == self.index else ZERO


@dataclass(frozen=True, eq=True)
class ParamVar(Expr):
    index: int

    def real(self, x, u):
        return u[self.index]

    def interval(self, X, U):
        return U[self.index]

    def d(self, i):
        return ZERO


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr
    arity = 1

    def children(self):
        return (self.arg,)

    def real(self, x, u):
        return -self.arg.real(x, u)

    def interval(self, X, U):
        return neg(self.arg.interval(X, U))

    def d(self, i):
        return make_neg(self.arg.d(i))


@dataclass(frozen=True, eq=True)
class _Binary(Expr):
    left: Expr
    right: Expr
    arity = 2

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Add(_Binary):
    symbol = '+'

    def real(self, x, u):
        return self.left.real(x, u) + self.right.real(x, u)

    def interval(self, X, U):
        return add(self.left.interval(X, U), self.right.interval(X, U))

    def d(self, i):
        return make_add(self.left.d(i), self.right.d(i))


@dataclass(frozen=True, eq=True)
class Sub(_Binary):
    symbol = '-'

    def real(self, x, u):
        return self.left.real(x, u) - self.right.real(x, u)

    def interval(self, X, U):
        return sub(self.left.interval(X, U), self.right.interval(X, U))

    def d(self, i):
        return make_sub(self.left.d(i), self.right.d(i))


@dataclass(frozen=True, eq=True)
class Mul(_Binary):
    symbol = '*'

    def real(self, x, u):
        return self.left.real(x, u) * self.right.real(x, u)

    def interval(self, X, U):
        return mul(self.left.interval(X, U), self.right.interval(X, U))

    def d(self, i):
        return make_add(make_mul(self.left.d(i), self.right), make_mul(self.left, self.right.d(i)))


@dataclass(frozen=True, eq=True)
class Div(_Binary):
    symbol = '/'

    def real(self, x, u):
        denominator = self.right.real(x, u)
        if denominator == 0.0:
            raise DivByZero(f"Denominator of {self} vanishes")
        return self.left.real(x, u) / denominator

    def interval(self, X, U):
        numerator = self.left.interval(X, U)
        denominator = self.right.interval(X, U)
        if numerator is EMPTY or denominator is EMPTY:
            return EMPTY
        if contains_zero(denominator):
            # two-piece results are hulled; solvers see the count in their report
            counters = active_counters()
            if counters is not None:
                counters.hulled_divisions += 1
            return hull_pieces(extended_div(numerator, denominator))
        return div(numerator, denominator)

    def d(self, i):
        dl = self.left.d(i)
        dr = self.right.d(i)
        if dr == ZERO:
            return make_div(dl, self.right)
        numerator = make_sub(make_mul(dl, self.right), make_mul(self.left, dr))
        return make_div(numerator, make_pow(self.right, 2))


@dataclass(frozen=True, eq=True)
class IntPow(Expr):
    arg: Expr
    exponent: int
    arity = 1

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ArityError(f"IntPow needs a non-negative integer exponent, got {self.exponent!r}")

    def children(self):
        return (self.arg,)

    def real(self, x, u):
        return self.arg.real(x, u) ** self.exponent

    def interval(self, X, U):
        return int_pow(self.arg.interval(X, U), self.exponent)

    def d(self, i):
        inner = self.arg.d(i)
        outer = make_mul(Const(self.exponent), make_pow(self.arg, self.exponent - 1))
        return make_mul(outer, inner)


ZERO = Const(0.0)
ONE = Const(1.0)


# ==================== Folding constructors ====================

def as_expr(value):
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return Const(value)
    raise TypeError(f"Cannot use {value!r} in an expression")


def _exact(value, exact):
    """Folded constant, or None if the double result is not the exact value."""
    if value != value or Fraction(value) != exact:
        return None
    return Const(value)


def make_neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def make_add(a, b):
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _exact(a.value + b.value, Fraction(a.value) + Fraction(b.value))
        if folded is not None:
            return folded
    return Add(a, b)


def make_sub(a, b):
    if b == ZERO:
        return a
    if a == ZERO:
        return make_neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _exact(a.value - b.value, Fraction(a.value) - Fraction(b.value))
        if folded is not None:
            return folded
    return Sub(a, b)


def make_mul(a, b):
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _exact(a.value * b.value, Fraction(a.value) * Fraction(b.value))
        if folded is not None:
            return folded
    return Mul(a, b)


def make_div(a, b):
    if b == ONE:
        return a
    if a == ZERO and not (isinstance(b, Const) and b.value == 0.0):
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        folded = _exact(a.value / b.value, Fraction(a.value) / Fraction(b.value))
        if folded is not None:
            return folded
    return Div(a, b)


def make_pow(a, k):
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Const):
        try:
            folded = _exact(a.value ** k, Fraction(a.value) ** k)
        except OverflowError:
            folded = None
        if folded is not None:
            return folded
    return IntPow(a, k)


def build(kind, *children):
    """Arity-checked generic constructor used by the parser's functional forms."""
    expected = {'neg': 1, 'sqr': 1, 'pow': 2}
    if kind not in expected:
        raise UnknownIdentifier(f"Unknown function '{kind}'")
    if len(children) != expected[kind]:
        raise ArityError(f"'{kind}' takes {expected[kind]} argument(s), got {len(children)}")
    if kind == 'neg':
        return make_neg(children[0])
    if kind == 'sqr':
        return make_pow(children[0], 2)
    exponent = children[1]
    if not isinstance(exponent, Const) or exponent.value != int(exponent.value) or exponent.value < 0:
        raise ArityError("'pow' needs a non-negative integer literal exponent")
    return make_pow(children[0], int(exponent.value))


# ==================== Evaluation ====================

def eval_real(e, x, u=()):
    return e.real(x, u)


def eval_interval(e, X, U=Box()):
    return e.interval(X, U)


def op_count(e, convention='weighted'):
    """
    Number of elementary interval operations in ``e``.

    ``weighted`` counts x**k as ceil(log2 k) operations (repeated squaring);
    ``uniform`` counts every non-leaf node as one operation.
    """
    if convention not in ('weighted', 'uniform'):
        raise ValueError(f"Unknown op-count convention '{convention}'")
    total = 0
    for node in e.walk():
        if node.arity == 0:
            continue
        if isinstance(node, IntPow) and convention == 'weighted':
            total += (node.exponent - 1).bit_length() if node.exponent > 1 else 0
        else:
            total += 1
    return total


def derivative(e, state_index):
    return e.d(state_index)


# ==================== Systems ====================

@dataclass(frozen=True, eq=True)
class SystemModel:
    """f(x, u) = 0 with x in X0 and u in U."""
    name: str
    states: tuple
    params: tuple
    equations: tuple
    X0: Box
    U: Box = Box()
    known_roots: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'states', tuple(self.states))
        object.__setattr__(self, 'params', tuple(self.params))
        object.__setattr__(self, 'equations', tuple(self.equations))
        object.__setattr__(self, 'X0', Box(self.X0))
        object.__setattr__(self, 'U', Box(self.U))
        n, p = len(self.states), len(self.params)
        if n < 1:
            raise DimensionMismatch('A system needs at least one state')
        if len(self.equations) != n:
            raise DimensionMismatch(f"{len(self.equations)} equation(s) for {n} declared state(s)")
        if len(self.X0) != n:
            raise DimensionMismatch(f"X0 has {len(self.X0)} component(s), expected {n}")
        if len(self.U) != p:
            raise DimensionMismatch(f"U has {len(self.U)} component(s), expected {p}")
        if self.X0.is_empty or self.U.is_empty:
            raise EmptyBoxError('X0 and U must be non-empty')
        for eq in self.equations:
            for node in eq.walk():
                if isinstance(node, StateVar) and not 0 <= node.index < n:
                    raise UnknownIdentifier(f"State index {node.index} out of range for n={n}")
                if isinstance(node, ParamVar) and not 0 <= node.index < p:
                    raise UnknownIdentifier(f"Parameter index {node.index} out of range for p={p}")

    @property
    def n(self):
        return len(self.states)

    @property
    def p(self):
        return len(self.params)

    @cached_property
    def jacobian_exprs(self):
        return tuple(tuple(derivative(eq, j) for j in range(self.n)) for eq in self.equations)

    def op_count(self, convention='weighted'):
        return sum(op_count(eq, convention) for eq in self.equations)

    def with_domain(self, X0, name=None):
        return SystemModel(
            name=name or self.name,
            states=self.states,
            params=self.params,
            equations=self.equations,
            X0=Box(X0),
            U=self.U,
            known_roots=self.known_roots,
        )


def eval_system(m, X, U=None):
    """Natural interval extension F(X, U); one F evaluation."""
    U = m.U if U is None else U
    counters = active_counters()
    if counters is not None:
        counters.F_evals += 1
    return tuple(eq.interval(X, U) for eq in m.equations)


def eval_system_real(m, x, u):
    return tuple(eq.real(x, u) for eq in m.equations)


def zero_in(values):
    """True when 0 lies in every component (a root needs all of them to vanish)."""
    for v in values:
        if not contains_zero(v):
            return False
    return True


def eval_jacobian(m, X, U=None):
    from .linalg import IntervalMatrix

    U = m.U if U is None else U
    counters = active_counters()
    if counters is not None:
        counters.J_evals += 1
    return IntervalMatrix([[entry.interval(X, U) for entry in row] for row in m.jacobian_exprs])


def eval_jacobian_real(m, x, u):
    return [[entry.real(x, u) for entry in row] for row in m.jacobian_exprs]


# ==================== DSL ====================

_TOKEN_PATTERNS = [
    ('COMMENT', r'#[^\n]*'),
    ('NEWLINE', r'\n'),
    ('SKIP', r'[ \t\r]+'),
    ('RANGE', r'\.\.'),
    ('NUMBER', r'(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?'),
    ('IDENT', r'[A-Za-z_][A-Za-z0-9_]*'),
    ('TIMES', r'×'),
    ('OP', r'[+\-*/^(),;:\[\]]'),
]
_TOKEN_RE = re.compile('|'.join(f'(?P<{name}>{pattern})' for name, pattern in _TOKEN_PATTERNS))
_KEYWORDS = {'states', 'params', 'eq', 'X0', 'U', 'name'}


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ModelSyntaxError(f"Unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = match.lastgroup
        if kind == 'NEWLINE':
            line += 1
            line_start = match.end()
        elif kind not in ('SKIP', 'COMMENT'):
            tokens.append(_Token(kind, match.group(), line, match.start() - line_start + 1))
        pos = match.end()
    tokens.append(_Token('EOF', '', line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.name = 'model'
        self.states = None
        self.params = ()
        self.equations = []
        self.X0 = None
        self.U = None

    # -- token helpers --
    @property
    def current(self):
        return self.tokens[self.pos]

    def error(self, message, token=None):
        token = token or self.current
        return ModelSyntaxError(message, token.line, token.column)

    def accept(self, text):
        if self.current.text == text and self.current.kind in ('OP', 'IDENT', 'RANGE', 'TIMES'):
            self.pos += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.current.text or 'end of input'
            raise self.error(f"Expected '{text}' but found '{found}'")

    def expect_kind(self, kind):
        token = self.current
        if token.kind != kind:
            found = token.text or 'end of input'
            raise self.error(f"Expected {kind.lower()} but found '{found}'")
        self.pos += 1
        return token

    # -- statements --
    def parse(self):
        while self.current.kind != 'EOF':
            token = self.current
            if token.kind != 'IDENT' or token.text not in _KEYWORDS:
                raise self.error(f"Expected a statement keyword but found '{token.text}'")
            self.pos += 1
            getattr(self, f"_statement_{token.text.lower()}")(token)
        if self.states is None:
            raise ModelSyntaxError('Missing states declaration', self.current.line, self.current.column)
        if self.X0 is None:
            raise ModelSyntaxError('Missing X0 declaration', self.current.line, self.current.column)
        if self.U is None:
            if self.params:
                raise ModelSyntaxError('Missing U declaration', self.current.line, self.current.column)
            self.U = Box()
        return SystemModel(
            name=self.name,
            states=self.states,
            params=self.params,
            equations=tuple(self.equations),
            X0=self.X0,
            U=self.U,
        )

    def _statement_name(self, token):
        self.expect(':')
        self.name = self.expect_kind('IDENT').text
        self.expect(';')

    def _statement_states(self, token):
        if self.states is not None:
            raise self.error('Duplicate states declaration', token)
        self.states = self._name_list()
        self.expect(';')

    def _statement_params(self, token):
        self.params = self._name_list() if self.current.text != ';' else ()
        self.expect(';')

    def _statement_eq(self, token):
        if self.states is None:
            raise self.error('Equations must follow the states declaration', token)
        self.expect(':')
        self.equations.append(self._expr())
        self.expect(';')

    def _statement_x0(self, token):
        self.expect(':')
        self.X0 = self._box()
        self.expect(';')

    def _statement_u(self, token):
        self.expect(':')
        self.U = self._box()
        self.expect(';')

    def _name_list(self):
        names = []
        while True:
            first = self.expect_kind('IDENT')
            if self.accept('..'):
                last = self.expect_kind('IDENT')
                names.extend(self._expand_range(first, last))
            else:
                names.append(first.text)
            if not self.accept(','):
                break
        duplicates = {n for n in names if names.count(n) > 1}
        if duplicates:
            raise self.error(f"Duplicate name(s): {', '.join(sorted(duplicates))}")
        return tuple(names)

    def _expand_range(self, first, last):
        a = re.fullmatch(r'([A-Za-z_]+)(\d+)', first.text)
        b = re.fullmatch(r'([A-Za-z_]+)(\d+)', last.text)
        if not a or not b or a.group(1) != b.group(1) or int(a.group(2)) > int(b.group(2)):
            raise self.error(f"Invalid name range {first.text}..{last.text}", first)
        prefix = a.group(1)
        return [f"{prefix}{i}" for i in range(int(a.group(2)), int(b.group(2)) + 1)]

    def _signed_number(self):
        sign = -1.0 if self.accept('-') else 1.0
        token = self.expect_kind('NUMBER')
        text = token.text if sign > 0 else f"-{token.text}"
        return text

    def _box(self):
        components = []
        while True:
            self.expect('[')
            lo = self._signed_number()
            self.expect(',')
            hi = self._signed_number()
            closing = self.current
            self.expect(']')
            try:
                component = Interval.from_decimal(lo, hi)
            except ValueError as exc:
                raise self.error(str(exc), closing)
            repeat = 1
            if self.accept('^'):
                repeat = int(self.expect_kind('NUMBER').text)
            components.extend([component] * repeat)
            if not (self.accept('x') or self.accept('×')):
                break
        return Box(components)

    # -- expressions --
    def _expr(self):
        node = self._term()
        while self.current.text in ('+', '-') and self.current.kind == 'OP':
            op = self.current.text
            self.pos += 1
            rhs = self._term()
            node = make_add(node, rhs) if op == '+' else make_sub(node, rhs)
        return node

    def _term(self):
        node = self._unary()
        while self.current.text in ('*', '/') and self.current.kind == 'OP':
            op = self.current.text
            self.pos += 1
            rhs = self._unary()
            node = make_mul(node, rhs) if op == '*' else make_div(node, rhs)
        return node

    def _unary(self):
        if self.accept('-'):
            return make_neg(self._unary())
        if self.accept('+'):
            return self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        if self.accept('^'):
            token = self.current
            if token.kind != 'NUMBER' or not token.text.isdigit():
                raise self.error('Exponent must be a non-negative integer literal')
            self.pos += 1
            base = make_pow(base, int(token.text))
            if self.current.text == '^':
                raise self.error('Chained exponents need parentheses')
        return base

    def _atom(self):
        token = self.current
        if token.kind == 'NUMBER':
            self.pos += 1
            if not math.isfinite(float(token.text)):
                raise self.error(f"Number '{token.text}' is out of range", token)
            return literal(token.text)
        if token.kind == 'IDENT':
            self.pos += 1
            if self.accept('('):
                args = [self._expr()]
                while self.accept(','):
                    args.append(self._expr())
                self.expect(')')
                try:
                    return build(token.text, *args)
                except (UnknownIdentifier, ArityError) as exc:
                    raise type(exc)(f"{exc} (line {token.line}, column {token.column})")
            return self._variable(token)
        if self.accept('('):
            node = self._expr()
            self.expect(')')
            return node
        found = token.text or 'end of input'
        raise self.error(f"Unexpected '{found}' in expression")

    def _variable(self, token):
        if token.text in self.states:
            return StateVar(self.states.index(token.text))
        if token.text in self.params:
            return ParamVar(self.params.index(token.text))
        raise UnknownIdentifier(
            f"Unknown identifier '{token.text}' (line {token.line}, column {token.column})"
        )


def parse_system(text):
    """Parse model DSL text into a SystemModel."""
    model = _Parser(text).parse()
    logger.debug(f"Parsed model {model.name}: n={model.n}, p={model.p}")
    return model


def _format_expr(e, states, params):
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 or e.value != e.value else f"(-{repr(-e.value)})"
    if isinstance(e, DecimalConst):
        return e.text
    if isinstance(e, StateVar):
        return states[e.index]
    if isinstance(e, ParamVar):
        return params[e.index]
    if isinstance(e, Neg):
        return f"(-{_format_expr(e.arg, states, params)})"
    if isinstance(e, IntPow):
        return f"({_format_expr(e.arg, states, params)} ^ {e.exponent})"
    left = _format_expr(e.left, states, params)
    right = _format_expr(e.right, states, params)
    return f"({left} {e.symbol} {right})"


def format_expr(e, m):
    return _format_expr(e, m.states, m.params)


def _format_endpoint(value):
    """Decimal text that parses back to exactly ``value``."""
    text = repr(value)
    if Fraction(text) != Fraction(value):
        text = str(Decimal(value))
    return text


def _format_box(box):
    return ' x '.join(f"[{_format_endpoint(c.lo)}, {_format_endpoint(c.hi)}]" for c in box)


def print_system(m):
    """Canonical DSL text for ``m``."""
    lines = [f"name: {m.name};", f"states {', '.join(m.states)};"]
    if m.params:
        lines.append(f"params {', '.join(m.params)};")
    for eq in m.equations:
        lines.append(f"eq: {_format_expr(eq, m.states, m.params)};")
    lines.append(f"X0: {_format_box(m.X0)};")
    if m.params:
        lines.append(f"U: {_format_box(m.U)};")
    return '\n'.join(lines) + '\n'
