import numpy as np
import pytest

from ergolab.maps import (MapPower, PerturbedMap, cat_map, default_bump,
                          make_map)


def test_cat_map_matrix_action():
    f = cat_map()
    x = np.array([[0.2, 0.7]])
    y = f.step(x)
    assert np.allclose(y, np.mod(x @ np.array([[2, 1], [1, 1]]).T, 1.0))


def test_registry_families_step_and_invert():
    rng = np.random.default_rng(3)
    for name, params in [("cat", {}), ("standard", {"kick": 1.0}),
                         ("perturbed_cat", {"t": 0.05}),
                         ("cat_x_rotation", {"rho": 0.3}),
                         ("plastic3", {}), ("plastic3_inverse", {}),
                         ("identity", {"dim": 2})]:
        f = make_map(name, **params)
        x = f.space.sample(rng, 20)
        y = f.step(x)
        back = f.inverse_step(y)
        assert np.max(f.space.distance(back, x)) < 1e-9, name


def test_unknown_family_raises():
    with pytest.raises(ValueError):
        make_map("nope")


def test_jacobian_against_finite_differences():
    for name, params in [("standard", {"kick": 1.3}), ("henon", {}),
                         ("perturbed_cat", {"t": 0.1})]:
        f = make_map(name, **params)
        x = f.space.sample(np.random.default_rng(5), 4) * 0.2
        jac = f.jacobian(x)
        h = 1e-7
        for j in range(f.space.dim):
            e = np.zeros(f.space.dim)
            e[j] = h
            fd = (f.step(x + e) - f.step(x - e)) / (2 * h)
            assert np.allclose(jac[:, :, j], fd, atol=1e-5), name


def test_deriv_stack_symmetry_and_order():
    f = make_map("standard", kick=0.8)
    x = np.array([[0.3, 0.6]])
    stack = f.deriv_stack(x, 3)
    assert len(stack) == 3
    d2 = stack[1][0]
    assert np.allclose(d2, np.swapaxes(d2, 1, 2))  # symmetric in the two slots


def test_perturbed_map_reduces_to_base_at_zero():
    base = cat_map()
    f = PerturbedMap(base, 0.0)
    x = base.space.sample(np.random.default_rng(0), 10)
    assert np.allclose(f.step(x), base.step(x))
    assert np.allclose(f.jacobian(x), base.jacobian(x))


def test_perturbed_map_rejects_non_diffeomorphism_size():
    bump = default_bump(2)
    with pytest.raises(ValueError):
        PerturbedMap(cat_map(), 0.9 / bump.lip + 0.05, bump)


def test_bump_field_derivative_consistency():
    bump = default_bump(2)
    x = np.array([[0.21, 0.43]])
    h = 1e-6
    d1 = bump.deriv(x, 1)[0]
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (bump.value(x + e) - bump.value(x - e))[0] / (2 * h)
        assert np.allclose(d1[:, j], fd, atol=1e-8)


def test_map_power_tracks_stepwise_orbit():
    f = cat_map()
    g = MapPower(f, 3)
    x = np.array([[0.11, 0.29]])
    y = x
    for _ in range(3):
        y = f.space.wrap(f.step(y))
    assert np.allclose(f.space.wrap(g.step(x)), y)


def test_norm_cap_dominates_sampled_jacobians():
    for name, params in [("cat", {}), ("standard", {"kick": 1.2}),
                         ("perturbed_cat", {"t": 0.05})]:
        f = make_map(name, **params)
        x = f.space.sample(np.random.default_rng(1), 200)
        norms = np.linalg.norm(f.jacobian(x), 2, axis=(1, 2))
        assert norms.max() <= f.norm_cap + 1e-9, name
