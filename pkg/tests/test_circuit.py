import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import sctb
from sctb.circuit import (
    CosineTerm,
    load_circuit,
    potential,
    potential_gradient,
    potential_hessian,
    spec_from_dict,
    spec_to_dict,
)

from .conftest import fig3a_spec, fig3b_spec, transmon_spec
from .oracles import fd_gradient, fd_hessian


def test_flux_qubit_potential_zero_flux_at_origin():
    spec = fig3a_spec(flux_frac=0.0)
    assert potential(spec, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-14)


def test_flux_qubit_potential_half_flux_at_origin():
    # shift - 2 EJ + alpha EJ = 2 alpha EJ = 1.6 EJ at the origin
    spec = fig3a_spec(flux_frac=0.5)
    assert potential(spec, [0.0, 0.0]) == pytest.approx(1.6, rel=1e-12)


def test_potential_periodicity_random_shifts(rng):
    spec = fig3a_spec(flux_frac=0.3)
    for _ in range(50):
        phi = rng.uniform(-np.pi, np.pi, 2)
        shift = rng.integers(-3, 4, 2)
        assert potential(spec, phi + 2 * np.pi * shift) == pytest.approx(
            potential(spec, phi), rel=1e-12, abs=1e-12
        )


def test_gradient_zero_at_verified_minimum():
    spec = fig3a_spec()
    for m in sctb.find_minima(spec):
        assert np.linalg.norm(potential_gradient(spec, m.theta)) < 1e-9


def test_gradient_zero_at_origin_zero_flux():
    spec = fig3a_spec(flux_frac=0.0)
    assert potential_gradient(spec, [0.0, 0.0]) == pytest.approx(np.zeros(2), abs=1e-15)


@pytest.mark.parametrize("factory", [fig3a_spec, fig3b_spec])
def test_gradient_matches_finite_differences(factory, rng):
    spec = factory(flux_frac=0.31)
    for _ in range(100):
        phi = rng.uniform(-np.pi, np.pi, spec.n_nodes)
        exact = potential_gradient(spec, phi)
        approx = fd_gradient(spec, phi)
        assert np.abs(exact - approx).max() <= 1e-6 * max(1.0, np.abs(exact).max())


@pytest.mark.parametrize("factory", [fig3a_spec, fig3b_spec])
def test_hessian_matches_finite_differences(factory, rng):
    spec = factory(flux_frac=0.31)
    for _ in range(100):
        phi = rng.uniform(-np.pi, np.pi, spec.n_nodes)
        exact = potential_hessian(spec, phi)
        approx = fd_hessian(spec, phi)
        assert np.abs(exact - approx).max() <= 1e-5 * max(1.0, np.abs(exact).max())


def test_current_mirror_derivatives_match_finite_differences(cm3_spec, rng):
    for _ in range(100):
        phi = rng.uniform(-np.pi, np.pi, cm3_spec.n_nodes)
        grad = potential_gradient(cm3_spec, phi)
        assert np.abs(grad - fd_gradient(cm3_spec, phi)).max() <= 1e-6 * max(
            1.0, np.abs(grad).max()
        )
        hess = potential_hessian(cm3_spec, phi)
        assert np.abs(hess - fd_hessian(cm3_spec, phi)).max() <= 1e-5 * max(
            1.0, np.abs(hess).max()
        )


def test_transmon_hessian_at_origin():
    spec = transmon_spec(ej=7.25)
    assert potential_hessian(spec, [0.0]) == pytest.approx(np.array([[7.25]]))


def test_hessian_psd_at_minima():
    spec = fig3a_spec()
    for m in sctb.find_minima(spec):
        assert np.linalg.eigvalsh(potential_hessian(spec, m.theta)).min() > 0


@pytest.mark.parametrize(
    "factory", [fig3a_spec, lambda: sctb.current_mirror_spec(3, 0.2, 35.0, 45.0, 10.0)]
)
def test_factory_potentials_nonnegative(factory, rng):
    spec = factory()
    phi = rng.uniform(-np.pi, np.pi, (10_000, spec.n_nodes))
    assert potential(spec, phi).min() > -1e-12


def test_flux_qubit_capacitance_structure():
    # E_C inverts the reduced capacitance matrix built from 1/ECJ and 1/ECg
    ej, ecj, ecg, alpha = 1.0, 1 / 60, 50 / 60, 0.8
    spec = sctb.flux_qubit_spec(ej, ecj, ecg, alpha)
    k = np.array(
        [
            [(1 + alpha) / ecj + 1 / ecg, -alpha / ecj],
            [-alpha / ecj, (1 + alpha) / ecj + 1 / ecg],
        ]
    )
    assert np.allclose(spec.ec_matrix @ k, np.eye(2), atol=1e-12)


def test_flux_qubit_large_ground_capacitance_kills_charging():
    spec = sctb.flux_qubit_spec(1.0, 1 / 60, 1e-9, 0.8)
    assert np.abs(spec.ec_matrix).max() < 1e-8


def test_flux_qubit_rejects_bad_inputs():
    with pytest.raises(ValueError):
        sctb.flux_qubit_spec(-1.0, 0.1, 0.1, 0.8)
    with pytest.raises(ValueError):
        sctb.flux_qubit_spec(1.0, 0.1, 0.1, 1.5)


def test_current_mirror_counts():
    spec3 = sctb.current_mirror_spec(3, 0.2, 35.0, 45.0, 10.0)
    assert spec3.n_nodes == 5
    assert len(spec3.cosine_terms) == 6
    spec5 = sctb.current_mirror_spec(5, 0.2, 35.0, 45.0, 10.0)
    assert spec5.n_nodes == 9
    assert len(spec5.cosine_terms) == 10
    with pytest.raises(ValueError):
        sctb.current_mirror_spec(1, 0.2, 35.0, 45.0, 10.0)


def test_current_mirror_zero_flux_origin_value():
    spec = sctb.current_mirror_spec(3, 0.2, 35.0, 45.0, 10.0)
    assert potential(spec, np.zeros(5)) == pytest.approx(0.0, abs=1e-12)


def test_cosine_term_validation():
    with pytest.raises(ValueError):
        CosineTerm(1.0, (0, 0))
    with pytest.raises(ValueError):
        CosineTerm(-1.0, (1, 0))
    with pytest.raises(ValueError):
        CosineTerm(1.0, (0.5, 1.0))


def test_spec_validation_rejects_asymmetric_ec():
    with pytest.raises(ValueError):
        sctb.CircuitSpec(2, [[1.0, 0.2], [0.1, 1.0]], (CosineTerm(1.0, (1, 0)),))
    with pytest.raises(ValueError):
        sctb.CircuitSpec(2, [[1.0, 2.0], [2.0, 1.0]], (CosineTerm(1.0, (1, 0)),))


def test_config_roundtrip(tmp_path):
    spec = fig3a_spec(flux_frac=0.4, ng1=0.1)
    path = tmp_path / "circuit.json"
    path.write_text(json.dumps(spec_to_dict(spec)), encoding="utf-8")
    loaded = load_circuit(path)
    assert loaded.n_nodes == spec.n_nodes
    assert np.allclose(loaded.ec_matrix, spec.ec_matrix)
    assert loaded.cosine_terms == spec.cosine_terms
    assert np.allclose(loaded.offset_charges, spec.offset_charges)
    assert loaded.energy_shift == spec.energy_shift


def test_config_preset(tmp_path):
    path = tmp_path / "preset.json"
    path.write_text(
        json.dumps({"preset": "flux_qubit", "parameters": {
            "ej": 1.0, "ecj": 0.2, "ecg": 10.0, "alpha": 0.8, "flux_frac": 0.5}}),
        encoding="utf-8",
    )
    spec = load_circuit(path)
    assert spec.name == "flux_qubit"
    assert spec.n_nodes == 2


def test_config_errors():
    with pytest.raises(ValueError):
        spec_from_dict({"preset": "not_a_circuit"})
    with pytest.raises(ValueError):
        spec_from_dict({"n_nodes": 1})


@settings(max_examples=30, deadline=None)
@given(
    phi=st.lists(st.floats(-10, 10), min_size=2, max_size=2),
    shift=st.lists(st.integers(-3, 3), min_size=2, max_size=2),
)
def test_periodicity_property(phi, shift):
    spec = fig3b_spec(flux_frac=0.21)
    base = potential(spec, phi)
    moved = potential(spec, np.array(phi) + 2 * np.pi * np.array(shift))
    assert moved == pytest.approx(base, rel=1e-12, abs=1e-12)
