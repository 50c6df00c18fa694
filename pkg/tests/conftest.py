import numpy as np
import pytest

import sctb


def fig3a_spec(flux_frac=0.5, ng1=0.0, ng2=0.0):
    ej = 1.0
    ecj = ej / 60.0
    return sctb.flux_qubit_spec(ej, ecj, 50 * ecj, 0.8, flux_frac=flux_frac, ng1=ng1, ng2=ng2)


def fig3b_spec(flux_frac=0.5, ng1=0.0, ng2=0.0):
    ej = 1.0
    ecj = ej / 5.0
    return sctb.flux_qubit_spec(ej, ecj, 50 * ecj, 0.8, flux_frac=flux_frac, ng1=ng1, ng2=ng2)


def transmon_spec(ec=0.25, ej=12.5, ng=0.0):
    return sctb.CircuitSpec(
        1, [[ec]], (sctb.CosineTerm(ej, (1,)),), offset_charges=[ng], energy_shift=ej,
        name="transmon",
    )


@pytest.fixture(scope="session")
def cm3_spec():
    return sctb.current_mirror_spec(3, 0.2, 35.0, 45.0, 10.0)


@pytest.fixture(scope="session")
def cm2_spec():
    return sctb.current_mirror_spec(2, 0.2, 35.0, 45.0, 10.0)


@pytest.fixture(scope="session")
def cm3_minima(cm3_spec):
    return sctb.find_minima(cm3_spec)


@pytest.fixture(scope="session")
def fig3a_minima():
    return sctb.find_minima(fig3a_spec())


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
