"""Shared small fixtures: a bistatic pair of 3x3 half-wavelength UPAs and a
two-target scene sized so every unit test runs in well under a second."""

import numpy as np
import pytest

from nfmimo import ArrayGeometry, CarrierSpec, TargetScene, build_upa, isotropic_waveform


@pytest.fixture(scope="session")
def carrier():
    return CarrierSpec(3e9)


@pytest.fixture(scope="session")
def small_geometry(carrier):
    s = carrier.wavelength / 2
    tx = build_upa(3, 3, s, center=(1.0, 0.0, 0.0))
    rx = build_upa(3, 3, s, center=(-1.0, 0.0, 0.0))
    return ArrayGeometry(tx, rx)


@pytest.fixture(scope="session")
def one_target(carrier):
    return TargetScene(np.array([[0.3, -0.2, 2.0]]), [1.0 + 0.5j], carrier)


@pytest.fixture(scope="session")
def two_targets(carrier):
    return TargetScene(
        np.array([[0.3, -0.2, 2.0], [-0.5, 0.4, 1.5]]),
        [1.0 + 0.5j, 0.8 - 0.3j],
        carrier,
    )


@pytest.fixture(scope="session")
def small_waveform(small_geometry):
    return isotropic_waveform(small_geometry.n_tx, 12, seed=7)
