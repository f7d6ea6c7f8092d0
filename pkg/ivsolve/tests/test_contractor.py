import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ivsolve.contractor import contract_system, hc4_revise
from ivsolve.expressions import ParamVar, StateVar, parse_system
from ivsolve.intervals import Box, Interval, counting
from ivsolve.systems import hill_network, sqrt_two, sum_product_example, wta_network
from ivsolve.tests.strategies import sub_boxes

x1, x2 = StateVar(0), StateVar(1)
ZERO = Interval(0.0)


def test_sum_constraint_infeasible_box_is_emptied():
    result = hc4_revise(x1 + x2, ZERO, Box([(0, 5), (-10, -8)]))
    assert result.is_empty


def test_sum_constraint_narrows_both_sides():
    result = hc4_revise(x1 + x2, ZERO, Box([(0, 5), (-3, -1)]))
    assert result == Box([(1, 3), (-3, -1)])


def test_point_component_is_kept():
    result = hc4_revise(x1 + x2, ZERO, Box([(1, 1), (-5, 5)]))
    assert result == Box([(1, 1), (-1, -1)])


def test_division_projection():
    result = hc4_revise(x1 / x2, Interval(2.0), Box([(0, 10), (1, 2)]))
    assert result == Box([(2, 4), (1, 2)])


def test_even_power_projection_keeps_both_branches():
    result = hc4_revise(x1 ** 2, Interval(4.0), Box([(-3, 3)]))
    assert result == Box([(-2, 2)])
    result = hc4_revise(x1 ** 2, Interval(4.0), Box([(0.5, 3)]))
    assert result == Box([(2, 2)])


def test_square_root_is_enclosed_tightly():
    model = sqrt_two()
    result = contract_system(model, model.X0).box
    (component,) = result
    assert component.lo <= math.sqrt(2.0) <= component.hi
    assert component.hi - component.lo <= 4 * math.ulp(math.sqrt(2.0))


def test_parameters_are_read_not_narrowed():
    a = ParamVar(0)
    U = Box([(1, 2)])
    result = hc4_revise(a * x1 - 2, ZERO, Box([(0, 10)]), U)
    assert result == Box([(1, 2)])
    assert hc4_revise(a - 5, ZERO, Box([(0, 1)]), U).is_empty


def test_unchanged_box_reports_no_change():
    model = sum_product_example()
    X = Box.uniform(-1, 1, 2)
    with counting() as c:
        result = contract_system(model, X)
    assert result.box == X
    assert not result.changed
    assert result.width_reduction == 0.0
    assert c.contractor_calls == 1


def test_empty_result_reports_full_reduction():
    model = sum_product_example()
    X = Box([(1.5, 2), (1.5, 2)])
    result = contract_system(model, X)
    assert result.is_empty
    assert result.changed
    assert result.width_reduction == pytest.approx(0.5)


CONTRACTED_MODELS = [hill_network(2), wta_network(2), sum_product_example()]


@pytest.mark.parametrize('model', CONTRACTED_MODELS, ids=lambda m: m.name)
@given(data=st.data())
def test_contraction_never_grows_the_box(model, data):
    X = data.draw(sub_boxes(model.X0))
    result = contract_system(model, X).box
    assert result.is_subset(X)
    if not result.is_empty:
        # a second pass may only shrink further
        assert contract_system(model, result).box.is_subset(result)


@pytest.mark.parametrize('model', CONTRACTED_MODELS, ids=lambda m: m.name)
@given(data=st.data())
def test_contraction_is_monotone(model, data):
    outer = data.draw(sub_boxes(model.X0))
    inner = data.draw(sub_boxes(outer))
    assert contract_system(model, inner).box.is_subset(contract_system(model, outer).box)


@given(X=sub_boxes(sum_product_example().X0))
def test_contraction_keeps_roots_of_any_sub_box(X):
    model = sum_product_example()
    result = contract_system(model, X).box
    for root in model.known_roots:
        if X.contains_point(root):
            assert result.contains_point(root)


def test_inexact_constant_keeps_its_root():
    model = parse_system("states x; eq: x - 0.1; X0: [0, 1];")
    (component,) = hc4_revise(model.equations[0], ZERO, model.X0, model.U)
    assert component.lo < component.hi
    assert Fraction(component.lo) <= Fraction(1, 10) <= Fraction(component.hi)


def test_contraction_keeps_known_roots():
    model = sum_product_example()
    result = contract_system(model, model.X0).box
    for root in model.known_roots:
        assert result.contains_point(root)
