import numpy as np
import pytest

import quantlat as ql
from quantlat.geometry import Box, JordanSet
from quantlat.numutil import frac_unit, rng_from_seed
from quantlat.quasiperiodic import (
    QuasiperiodicSet,
    fragment_frequency,
    irrational_matrix_2x2,
    power_stack,
    resonance_search,
    slab_window,
    stack_event,
    theoretical_frequency,
)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


def small_window():
    return JordanSet(2, (Box((0.0, 0.0), (0.5, 0.7)),))


def test_zero_matrix_membership():
    q = QuasiperiodicSet(np.zeros((1, 2)), JordanSet(1, (Box((0.0,), (0.25,)),)))
    rng = rng_from_seed(21)
    pts = rng.integers(-100, 100, (200, 2))
    assert np.all(q.contains_many(pts))


def test_golden_ratio_membership():
    q = QuasiperiodicSet(np.array([[GOLDEN]]), JordanSet(1, (Box((0.0,), (0.5,)),)))
    assert q.member((1,)) is False  # frac(phi) = 0.618 falls outside [0, 1/2)
    assert q.member((2,)) is True  # frac(2 phi) = 0.236


def test_translation_law():
    # the translated set is the original shifted by z: it holds x+z exactly
    # when the original holds x
    q = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    rng = rng_from_seed(22)
    for _ in range(1000):
        x = rng.integers(-500, 500, 2)
        z = rng.integers(-500, 500, 2)
        assert q.translated(z).member(x + z) == q.member(x)


def test_complement_twice_is_identity():
    q = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    rng = rng_from_seed(23)
    pts = rng.integers(-300, 300, (1000, 2))
    np.testing.assert_array_equal(
        q.complement().complement().contains_many(pts), q.contains_many(pts)
    )


def test_stack_with_full_cube_is_identity():
    q = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    full = QuasiperiodicSet(np.array([[np.sqrt(7.0), np.pi]]), JordanSet.full(1))
    rng = rng_from_seed(24)
    pts = rng.integers(-300, 300, (1000, 2))
    np.testing.assert_array_equal(
        q.stack(full).contains_many(pts), q.contains_many(pts)
    )


def test_stack_membership_is_conjunction():
    a = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    b = QuasiperiodicSet(
        np.array([[np.sqrt(7.0) - 2.0, np.pi - 3.0]]), JordanSet(1, (Box((0.2,), (0.9,)),))
    )
    rng = rng_from_seed(25)
    pts = rng.integers(-300, 300, (1000, 2))
    np.testing.assert_array_equal(
        a.stack(b).contains_many(pts), a.contains_many(pts) & b.contains_many(pts)
    )


def test_de_morgan_pointwise():
    lam = irrational_matrix_2x2()
    a = QuasiperiodicSet(lam, small_window())
    b = QuasiperiodicSet(lam, JordanSet(2, (Box((0.3, 0.1), (0.9, 0.6)),)))
    rng = rng_from_seed(26)
    pts = rng.integers(-200, 200, (1000, 2))
    lhs = a.union(b).complement().contains_many(pts)
    rhs = a.complement().intersect(b.complement()).contains_many(pts)
    np.testing.assert_array_equal(lhs, rhs)


def test_same_matrix_required_for_algebra():
    a = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    b = QuasiperiodicSet(irrational_matrix_2x2() + 0.1, small_window())
    with pytest.raises(ValueError):
        a.union(b)


def test_fractional_part_decomposition():
    lam = irrational_matrix_2x2()
    rng = rng_from_seed(27)
    for _ in range(300):
        x = rng.integers(-400, 400, 2).astype(float)
        z = rng.integers(-400, 400, 2).astype(float)
        lhs = frac_unit(lam @ (x + z))
        rhs = frac_unit(frac_unit(lam @ x) + frac_unit(lam @ z))
        assert np.max(np.abs(lhs - rhs)) < 1e-12 or np.max(np.abs(np.abs(lhs - rhs) - 1.0)) < 1e-12


def test_theoretical_frequency_values():
    full = QuasiperiodicSet(irrational_matrix_2x2(), JordanSet.full(2))
    assert theoretical_frequency(full) == 1.0
    grid = QuasiperiodicSet(
        irrational_matrix_2x2(), JordanSet(2, (Box((0.0, 0.0), (0.25, 1 / 3)),))
    )
    assert theoretical_frequency(grid) == pytest.approx(1 / 12, abs=1e-15)


def test_empirical_frequency_approaches_window_measure():
    q = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    vals = [fragment_frequency(q, ql.Fragment.centered(e, 2)).value for e in (100, 300, 1000)]
    spreads = [abs(v - 0.35) for v in vals]
    assert spreads[-1] < 0.01
    assert max(vals) - min(vals) < 0.01


def test_frequency_sweep_of_quasiperiodic_membership():
    q = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    sweep = ql.frequency_sweep(q.contains_many, ql.centered_sweep(100, 2), batch=True)
    assert sweep.spread < 0.01
    assert abs(sweep.values[-1] - theoretical_frequency(q)) < 0.01


def test_fragment_frequency_matches_generic_scan():
    q = QuasiperiodicSet(irrational_matrix_2x2(), small_window())
    frag = ql.Fragment((-40, 17), (75, 59))
    kernel = fragment_frequency(q, frag)
    generic = ql.frequency(q.contains_many, frag, batch=True)
    assert kernel.hits == generic.hits


def test_power_stack_forward_is_matrix():
    L = ql.rotation_matrix(0.7)
    st = power_stack(L, 1, "forward")
    np.testing.assert_array_equal(st.stacked, L)


def test_power_stack_rotation_blocks():
    theta = 0.9
    st = power_stack(ql.rotation_matrix(theta), 6, "forward")
    for k in range(1, 7):
        np.testing.assert_allclose(st.block(k), ql.rotation_matrix(k * theta), atol=1e-10)


def test_power_stack_both_shape_and_order():
    L = ql.rotation_matrix(1.2)
    st = power_stack(L, 3, "both")
    assert st.stacked.shape == (12, 2)
    assert st.exponents == (-3, -2, -1, 1, 2, 3)
    np.testing.assert_allclose(st.block(-2), np.linalg.matrix_power(np.linalg.inv(L), 2), atol=1e-10)


def test_power_stack_residual_guard():
    L = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-13]])
    with pytest.raises(ValueError, match="residual"):
        power_stack(L, 6)


def test_resonance_found_for_rational_row():
    lam = np.array([[0.5, 0.0], [np.sqrt(2.0), np.e]])
    u = resonance_search(lam, 2, 1e-9)
    assert u is not None and np.max(np.abs(u)) <= 2
    assert np.max(np.abs(lam.T @ u - np.round(lam.T @ u))) < 1e-9


def test_resonance_found_for_integer_matrix():
    u = resonance_search(np.array([[2.0, 3.0]]), 3, 1e-9)
    assert u is not None and abs(int(u[0])) == 1


def test_no_resonance_for_irrational_generators():
    assert resonance_search(irrational_matrix_2x2(), 50, 1e-9) is None


def test_randomized_resonance_search_high_dim():
    # 5 rows forces the randomized mode; an exactly rational row is found
    lam = np.vstack([irrational_matrix_2x2(), irrational_matrix_2x2() * np.pi, [[0.5, 0.5]]])
    u = resonance_search(lam, 2, 1e-9, draws=300_000, seed=3)
    assert u is not None
    img = lam.T @ u
    assert np.max(np.abs(img - np.round(img))) < 1e-9


def test_stack_event_and_slab_window():
    L = ql.rotation_matrix(1.0)
    ev = stack_event(L, 2, slab_window(4, 0.3, 0))
    assert ev.m == 4 and ev.G.measure == pytest.approx(0.3, abs=1e-15)
    # membership equals the defining condition on the first stacked row block
    rng = rng_from_seed(28)
    pts = rng.integers(-50, 50, (200, 2))
    w = frac_unit(pts.astype(float) @ ev.Lambda.T)
    np.testing.assert_array_equal(ev.contains_many(pts), w[:, 0] < 0.3)
