import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ivsolve.exceptions import UnknownModel
from ivsolve.expressions import eval_real, eval_system_real, print_system
from ivsolve.intervals import Box, Interval
from ivsolve.systems import (
    MODEL_REGISTRY,
    WTA_PARAMETERS,
    decoupled_quadratics,
    get_model,
    hill_network,
    known_root_suite,
    load_model,
    wta_network,
)
from ivsolve.tests.strategies import point_in


# ==================== Hill ring ====================

def test_hill_shape():
    model = hill_network(2)
    assert model.n == 2
    assert model.p == 3
    assert model.X0.volume() == 100
    assert model.U[0] == Interval.from_decimal('3.8', '4.2')
    assert model.U[2] == Interval.from_decimal('0.95', '1.05')


def test_hill_component_value():
    model = hill_network(2)
    assert eval_real(model.equations[0], (1.0, 1.0), (4.0, 4.0, 1.0)) == 1.5


def test_hill_ring_predecessor():
    model = hill_network(3)
    # f1 only depends on x3 through the repression term
    low = eval_real(model.equations[0], (1.0, 5.0, 0.0), (4.0, 4.0, 4.0, 1.0))
    high = eval_real(model.equations[0], (1.0, 0.0, 5.0), (4.0, 4.0, 4.0, 1.0))
    assert low == pytest.approx(3.5)
    assert high < low


@pytest.mark.parametrize('n', [2, 3, 5])
@given(data=st.data())
def test_hill_is_cyclic_shift_symmetric(n, data):
    model = hill_network(n)
    x = np.array(data.draw(point_in(Box.uniform(0.0, 10.0, n))))
    alpha = np.array(data.draw(point_in(Box.uniform(3.8, 4.2, n))))
    u = tuple(alpha) + (1.0,)
    rotated_x = np.roll(x, 1)
    rotated_u = tuple(np.roll(alpha, 1)) + (1.0,)
    original = eval_system_real(model, x, u)
    shifted = eval_system_real(model, rotated_x, rotated_u)
    assert shifted == pytest.approx(tuple(np.roll(original, 1)))


def test_hill_diagonal_residuals_agree():
    model = hill_network(4)
    u = (4.0,) * 4 + (1.0,)
    for value in (0.0, 0.7, 1.1, 3.0):
        residuals = eval_system_real(model, (value,) * 4, u)
        assert len(set(residuals)) == 1


def test_hill_needs_two_states():
    with pytest.raises(UnknownModel):
        hill_network(1)


def test_hill_custom_domain():
    assert hill_network(2, 0.0, 20.0).X0 == Box.uniform(0.0, 20.0, 2)


# ==================== WTA ====================

def test_wta_shape():
    model = wta_network(2)
    assert model.X0 == Box.uniform(0.0, 2.0, 2)
    assert model.params == tuple(name for name, _, _ in WTA_PARAMETERS)
    assert model.U[model.params.index('KA')] == Interval.from_decimal('0.99', '1.01')


def test_wta_production_is_positive_at_origin():
    for n in (1, 2, 5):
        model = wta_network(n)
        u = model.U.midpoint()
        for value in eval_system_real(model, (0.0,) * n, u):
            assert value > 0.0


def test_wta_is_symmetric_in_its_states():
    model = wta_network(3)
    u = model.U.midpoint()
    x = (0.2, 0.9, 1.7)
    values = eval_system_real(model, x, u)
    swapped = eval_system_real(model, (x[1], x[0], x[2]), u)
    assert swapped == pytest.approx((values[1], values[0], values[2]))


# ==================== Known-root systems ====================

def test_known_roots_are_roots():
    for model in known_root_suite():
        assert model.known_roots
        for root in model.known_roots:
            assert model.X0.contains_point(root)
            assert eval_system_real(model, root, ()) == pytest.approx((0.0,) * model.n, abs=1e-12)


def test_quadratics_keep_roots_inside_domain():
    model = decoupled_quadratics()
    assert sorted(model.known_roots) == [(-1.0, 2.0, 3.0), (1.0, 2.0, 3.0)]


# ==================== Registry ====================

@pytest.mark.parametrize('name', sorted(MODEL_REGISTRY))
def test_every_registered_model_builds(name):
    model = get_model(name)
    assert model.n == len(model.equations)


def test_get_model_with_dimension_and_domain():
    model = get_model('wta', n=3, domain=(0.0, 1.0))
    assert model.n == 3
    assert model.X0 == Box.uniform(0.0, 1.0, 3)
    narrowed = get_model('sumprod', domain=(-1.0, 1.0))
    assert narrowed.X0 == Box.uniform(-1.0, 1.0, 2)


def test_unknown_model():
    with pytest.raises(UnknownModel):
        get_model('lorenz')
    with pytest.raises(UnknownModel):
        load_model('definitely/not/a/file.ivs')


def test_load_model_from_file(tmp_path):
    path = tmp_path / 'ring.ivs'
    path.write_text(print_system(hill_network(3)), encoding='utf-8')
    assert load_model(str(path)) == hill_network(3)
    widened = load_model(str(path), domain=(0.0, 20.0))
    assert widened.X0 == Box.uniform(0.0, 20.0, 3)
