import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sctb
from sctb.circuit import potential_gradient, potential_hessian
from sctb.exceptions import NoMinimaFound
from sctb.minima import SearchOptions, canonicalize, find_minima

from .conftest import fig3a_spec
from .oracles import grid_scan_minima_2d


def test_canonicalize_fixed_point():
    assert canonicalize([0.0, 0.0]) == pytest.approx([0.0, 0.0])


def test_canonicalize_wrap_rule_half_open():
    out = canonicalize([np.pi, -np.pi - 0.1])
    assert out == pytest.approx([-np.pi, np.pi - 0.1])


def test_canonicalize_idempotent(rng):
    theta = rng.uniform(-20, 20, 7)
    once = canonicalize(theta)
    assert np.all(once >= -np.pi) and np.all(once < np.pi)
    assert canonicalize(once) == pytest.approx(once)


@settings(max_examples=50, deadline=None)
@given(
    theta=st.lists(st.floats(-30, 30), min_size=3, max_size=3),
    shift=st.lists(st.integers(-4, 4), min_size=3, max_size=3),
)
def test_canonicalize_periodicity(theta, shift):
    moved = np.array(theta) + 2 * np.pi * np.array(shift)
    assert canonicalize(moved) == pytest.approx(canonicalize(theta), abs=1e-9)


def test_flux_qubit_zero_flux_single_minimum():
    mins = find_minima(fig3a_spec(flux_frac=0.0))
    assert len(mins) == 1
    assert mins[0].theta == pytest.approx(np.zeros(2), abs=1e-10)
    assert mins[0].value == pytest.approx(0.0, abs=1e-12)


def test_flux_qubit_half_flux_two_minima():
    mins = find_minima(fig3a_spec(flux_frac=0.5))
    assert len(mins) == 2
    # degenerate pair at (+-c, -+c) with cos(c) = 1 / (2 alpha)
    c = np.arccos(1 / 1.6)
    assert mins[0].theta == pytest.approx([-c, c], abs=1e-9)
    assert mins[1].theta == pytest.approx([c, -c], abs=1e-9)
    assert mins[0].value == pytest.approx(mins[1].value, abs=1e-12)


def test_minima_match_grid_scan_oracle():
    spec = fig3a_spec(flux_frac=0.5)
    scan = grid_scan_minima_2d(spec, points=400)
    mins = find_minima(spec)
    assert len(scan) == len(mins)
    spacing = 2 * np.pi / 400
    for m in mins:
        dist = np.linalg.norm(canonicalize(scan - m.theta), axis=1)
        assert dist.min() < 2 * spacing


def test_minima_are_verified(cm3_spec, cm3_minima):
    opts = SearchOptions()
    for m in cm3_minima:
        assert np.linalg.norm(potential_gradient(cm3_spec, m.theta)) < opts.grad_tol
        assert np.linalg.eigvalsh(m.hessian).min() > opts.hess_floor
        assert np.allclose(m.hessian, potential_hessian(cm3_spec, m.theta))
    for a in cm3_minima:
        for b in cm3_minima:
            if a.index != b.index:
                assert np.linalg.norm(canonicalize(a.theta - b.theta)) > opts.dedup_tol


def test_current_mirror_minima_structure(cm3_minima):
    # global minimum at the origin plus the degenerate pair at +-pi/3 along the diagonal
    assert len(cm3_minima) == 3
    assert cm3_minima[0].theta == pytest.approx(np.zeros(5), abs=1e-10)
    assert cm3_minima[0].value == pytest.approx(0.0, abs=1e-10)
    for m in cm3_minima[1:]:
        assert np.abs(np.abs(m.theta) - np.pi / 3).max() < 1e-9


def test_sorted_by_value_then_lexicographic():
    mins = find_minima(fig3a_spec(flux_frac=0.47))
    values = [m.value for m in mins]
    assert values == sorted(values)
    assert mins[0].index == 0


def test_deterministic_across_extra_seeds(rng):
    spec = fig3a_spec(flux_frac=0.5)
    base = find_minima(spec)
    seeded = find_minima(
        spec, SearchOptions(extra_seeds=tuple(rng.uniform(-np.pi, np.pi, (20, 2))))
    )
    assert len(base) == len(seeded)
    for a, b in zip(base, seeded):
        assert a.theta == pytest.approx(b.theta, abs=1e-9)


def test_no_minima_when_no_descent_converges():
    # offset well, all seeds frozen on non-stationary points
    spec = sctb.CircuitSpec(
        1, [[0.5]], (sctb.CosineTerm(1.0, (1,), 0.4),), energy_shift=1.0
    )
    assert len(find_minima(spec)) == 1
    with pytest.raises(NoMinimaFound):
        find_minima(
            spec,
            SearchOptions(grid_points=1, diagonal_points=1, descent_iterations=0),
        )
