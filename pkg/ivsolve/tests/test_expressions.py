import functools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ivsolve.exceptions import (
    ArityError,
    DimensionMismatch,
    DivByZero,
    ModelSyntaxError,
    UnknownIdentifier,
)
from ivsolve.expressions import (
    ONE,
    ZERO,
    Add,
    Const,
    DecimalConst,
    Div,
    IntPow,
    Mul,
    Neg,
    ParamVar,
    StateVar,
    Sub,
    SystemModel,
    build,
    derivative,
    eval_interval,
    eval_jacobian,
    eval_jacobian_real,
    eval_real,
    eval_system,
    format_expr,
    op_count,
    parse_system,
    print_system,
    zero_in,
)
from ivsolve.intervals import Box, Interval, counting, diam, hull, is_subset, iter_subdivision
from ivsolve.systems import hill_network, linear_pair, sum_product_example, wta_network
from ivsolve.tests.strategies import point_in, sub_boxes

EXAMPLE = """
# the two-equation example system
name: example;
states x1, x2;
eq: x1 + x2;
eq: x1 * (1 + x2);
X0: [1, 2] x [3, 4];
"""


@pytest.fixture
def example():
    return parse_system(EXAMPLE)


# ==================== Parsing ====================

def test_parse_example(example):
    x1, x2 = StateVar(0), StateVar(1)
    assert example.name == 'example'
    assert example.states == ('x1', 'x2')
    assert example.params == ()
    assert example.equations == (Add(x1, x2), Mul(x1, Add(Const(1.0), x2)))
    assert example.X0 == Box([(1, 2), (3, 4)])
    assert example.U == Box()


def test_parse_ranges_repeats_and_params():
    model = parse_system("""
        states x1..x3;
        params a, b;
        eq: a * x1 - b;   eq: x2 ^ 3 - a;
        eq: -x3^2 + b;
        X0: [0, 1]^3;
        U: [1, 2] × [0.5, 0.75];
    """)
    assert model.states == ('x1', 'x2', 'x3')
    assert model.p == 2
    assert model.X0 == Box.uniform(0, 1, 3)
    assert model.U == Box([(1, 2), (0.5, 0.75)])
    # unary minus binds looser than ^
    assert model.equations[2] == Add(Neg(IntPow(StateVar(2), 2)), ParamVar(1))


def test_parse_functional_forms():
    model = parse_system("states x; eq: sqr(x) - pow(x, 3) + neg(x); X0: [0, 1];")
    x = StateVar(0)
    assert model.equations[0] == Add(Sub(IntPow(x, 2), IntPow(x, 3)), Neg(x))


def test_parse_folds_constants():
    model = parse_system("states x; eq: 2 * 3 + 0 * x + 1 * x; X0: [0, 1];")
    assert model.equations[0] == Add(Const(6.0), StateVar(0))


def test_inexact_decimal_literals_are_enclosed():
    model = parse_system("states x; eq: x - 0.1 + 0.5; X0: [0, 1];")
    tenth = DecimalConst('0.1')
    assert model.equations[0] == Add(Sub(StateVar(0), tenth), Const(0.5))
    lo, hi = eval_interval(tenth, Box())
    assert lo < hi
    assert Fraction(lo) <= Fraction(1, 10) <= Fraction(hi)
    assert eval_real(tenth, ()) == 0.1
    assert DecimalConst('0.10') == tenth


def test_decimal_literals_survive_printing():
    model = parse_system("states x; params g; eq: g * x - 0.19; X0: [0, 1]; U: [0.95, 1.05];")
    assert '0.19' in print_system(model)
    assert parse_system(print_system(model)) == model


@pytest.mark.parametrize('text, error', [
    ("states x; X0: [0, 1];", DimensionMismatch),
    ("states x; eq: (x + 1; X0: [0, 1];", ModelSyntaxError),
    ("states x; eq: x ^ 2 ^ 3; X0: [0, 1];", ModelSyntaxError),
    ("states x; eq: x ^ 1.5; X0: [0, 1];", ModelSyntaxError),
    ("states x; eq: x + y; X0: [0, 1];", UnknownIdentifier),
    ("states x; eq: sin(x); X0: [0, 1];", UnknownIdentifier),
    ("states x; eq: sqr(x, x); X0: [0, 1];", ArityError),
    ("states x; eq: x;", ModelSyntaxError),
    ("states x; params a; eq: a * x; X0: [0, 1];", ModelSyntaxError),
    ("states x, x; eq: x; eq: x; X0: [0, 1]^2;", ModelSyntaxError),
    ("states x; eq: x; X0: [2, 1];", ModelSyntaxError),
    ("states x; eq: x; X0: [0, 1] x [0, 1];", DimensionMismatch),
    ("states x; eq: x $ 1; X0: [0, 1];", ModelSyntaxError),
    ("states x; eq: x - 1e400; X0: [0, 1];", ModelSyntaxError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_system(text)


def test_syntax_error_position():
    with pytest.raises(ModelSyntaxError) as excinfo:
        parse_system("states x;\neq: x +;\nX0: [0, 1];")
    assert excinfo.value.line == 2
    assert excinfo.value.column == 8


@pytest.mark.parametrize('model', [hill_network(3), wta_network(2), linear_pair()], ids=lambda m: m.name)
def test_print_parse_round_trip(model):
    assert parse_system(print_system(model)) == model


def test_format_expr_parenthesizes(example):
    assert format_expr(example.equations[1], example) == '(x1 * (1.0 + x2))'


# ==================== Evaluation ====================

def test_eval_real_examples(example):
    assert eval_real(example.equations[0], (1.0, 3.0)) == 4.0
    assert eval_real(example.equations[1], (2.0, 4.0)) == 10.0


def test_hill_component_eval_real():
    model = hill_network(2)
    # x1 = 2 is the state, x2 = 1 its ring predecessor
    assert eval_real(model.equations[0], (2.0, 1.0), (4.0, 4.0, 1.0)) == 0.5


def test_eval_interval_example(example):
    assert eval_system(example, example.X0) == (Interval(4, 6), Interval(4, 10))


def test_constant_and_dependency_witness():
    X = Box([(0, 1)])
    assert eval_interval(Const(2.5), X) == Interval(2.5, 2.5)
    x = StateVar(0)
    assert eval_interval(x - x, X) == Interval(-1, 1)


def test_division_by_zero_containing_interval_is_hulled():
    x = StateVar(0)
    e = Div(ONE, x)
    with counting() as c:
        value = eval_interval(e, Box([(-1, 1)]))
    assert value == Interval.whole()
    assert c.hulled_divisions == 1
    with pytest.raises(DivByZero):
        eval_real(e, (0.0,))


def test_eval_system_counts_and_zero_in(example):
    with counting() as c:
        values = eval_system(example, Box([(-1, 1), (-1, 1)]))
    assert c.F_evals == 1
    assert zero_in(values)
    assert not zero_in(eval_system(example, example.X0))


# ==================== Op counts and derivatives ====================

def test_op_count_examples(example):
    assert example.op_count() == 3
    assert op_count(Const(1.0)) == 0
    assert op_count(example.equations[0]) == 1


def test_op_count_conventions():
    e = StateVar(0) ** 10
    assert op_count(e, 'weighted') == 4
    assert op_count(e, 'uniform') == 1
    with pytest.raises(ValueError):
        op_count(e, 'bogus')


def test_derivative_examples(example):
    assert derivative(example.equations[0], 0) == ONE
    assert derivative(example.equations[1], 1) == StateVar(0)
    assert derivative(Const(3.0), 0) == ZERO


def test_hill_derivative_matches_closed_form():
    y, alpha = StateVar(0), ParamVar(0)
    e = alpha / (1 + y ** 10)
    d = derivative(e, 0)
    for value in (0.3, 0.9, 1.2):
        expected = -10 * 4.0 * value ** 9 / (1 + value ** 10) ** 2
        assert eval_real(d, (value,), (4.0,)) == pytest.approx(expected, rel=1e-12)


def test_jacobian_examples(example):
    J = eval_jacobian(example, example.X0)
    assert J.rows == (
        (Interval(1, 1), Interval(1, 1)),
        (Interval(4, 5), Interval(1, 2)),
    )
    J = eval_jacobian(linear_pair(), Box.uniform(-1, 1, 2))
    assert J.rows == (
        (Interval(2, 2), Interval(1, 1)),
        (Interval(1, 1), Interval(-1, -1)),
    )


SAMPLED_MODELS = [hill_network(2), wta_network(2), sum_product_example()]


def nearly_within(interval, value, tol=1e-9):
    slack = tol * (1.0 + abs(value))
    return interval.lo - slack <= value <= interval.hi + slack


@pytest.mark.parametrize('model', SAMPLED_MODELS, ids=lambda m: m.name)
@given(data=st.data())
def test_jacobian_encloses_real_jacobian(model, data):
    X = data.draw(sub_boxes(model.X0))
    x = data.draw(point_in(X))
    u = data.draw(point_in(model.U))
    J = eval_jacobian(model, X)
    real = eval_jacobian_real(model, x, u)
    for i in range(model.n):
        for j in range(model.n):
            assert nearly_within(J[i, j], real[i][j])


@pytest.mark.parametrize('model', SAMPLED_MODELS, ids=lambda m: m.name)
@given(data=st.data())
def test_derivatives_match_central_differences(model, data):
    x = data.draw(point_in(model.X0))
    u = data.draw(point_in(model.U))
    h = 1e-6
    for eq in model.equations:
        for j in range(model.n):
            forward = list(x)
            backward = list(x)
            forward[j] += h
            backward[j] -= h
            estimate = (eval_real(eq, forward, u) - eval_real(eq, backward, u)) / (2 * h)
            assert eval_real(derivative(eq, j), x, u) == pytest.approx(estimate, rel=1e-5, abs=1e-8)


@pytest.mark.parametrize('model', SAMPLED_MODELS, ids=lambda m: m.name)
def test_subdivision_refines_the_range_enclosure(model):
    # X0 endpoints are dyadic, so the grids for m = 1, 2, 4, 8 nest exactly
    previous = None
    for m in (1, 2, 4, 8):
        pieces = [eval_system(model, Y) for Y in iter_subdivision(model.X0, m)]
        enclosure = tuple(functools.reduce(hull, column) for column in zip(*pieces))
        if previous is not None:
            for fine, coarse in zip(enclosure, previous):
                assert is_subset(fine, coarse)
                assert diam(fine) <= diam(coarse)
        previous = enclosure


# ==================== Nodes and models ====================

def test_operator_overloading_folds():
    x = StateVar(0)
    assert x + 0 == x
    assert 1 * x == x
    assert x ** 1 == x
    assert x ** 0 == ONE
    assert -(-x) == x
    assert Const(0.1) + Const(0.2) == Add(Const(0.1), Const(0.2))
    with pytest.raises(TypeError):
        x ** 0.5


def test_build_checks_arity():
    x = StateVar(0)
    assert build('neg', x) == Neg(x)
    with pytest.raises(ArityError):
        build('pow', x)
    with pytest.raises(ArityError):
        build('pow', x, Const(1.5))
    with pytest.raises(UnknownIdentifier):
        build('exp', x)


def test_system_model_validation():
    x = StateVar(0)
    with pytest.raises(DimensionMismatch):
        SystemModel('bad', ('x',), (), (x, x), Box([(0, 1)]))
    with pytest.raises(DimensionMismatch):
        SystemModel('bad', ('x',), ('a',), (x,), Box([(0, 1)]))
    with pytest.raises(UnknownIdentifier):
        SystemModel('bad', ('x',), (), (StateVar(1),), Box([(0, 1)]))
    with pytest.raises(UnknownIdentifier):
        SystemModel('bad', ('x',), (), (ParamVar(0) * x,), Box([(0, 1)]))


def test_with_domain_keeps_equations():
    model = hill_network(2)
    wider = model.with_domain(Box.uniform(0, 20, 2), name='hill_2_v2')
    assert wider.equations == model.equations
    assert wider.X0.volume() == 400
    assert wider.name == 'hill_2_v2'
