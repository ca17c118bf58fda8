import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from bathsynth.lanczos import synthesize_bath
from bathsynth.network import (ChainHamiltonian, DimerSpec, StarBathSpec, build_coupler)
from bathsynth.propagator import (IntensityTrace, Propagator, dimer_propagator, fit_decay,
                                  site_intensities, transfer_length, transfer_matrix)


def random_symmetric(m, seed):
    A = np.random.default_rng(seed).normal(size=(m, m))
    return (A + A.T) / 2


def test_identity_at_zero():
    U = transfer_matrix(random_symmetric(5, 0), 0.0)
    np.testing.assert_array_equal(U.U, np.eye(5))


def test_scalar_phase():
    U = transfer_matrix(ChainHamiltonian([0.7], []), 2.0)
    assert U.U[0, 0] == pytest.approx(np.exp(-1j * 0.7 * 2.0), abs=1e-15)


def test_full_transfer_in_coupler():
    z = math.pi / (2 * 0.3)
    assert z == pytest.approx(5.236, abs=1e-3)
    U = transfer_matrix(build_coupler(0.3), z).U
    assert abs(U[1, 0]) ** 2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(4))
def test_matches_expm(seed):
    H = random_symmetric(12, seed)
    for z in (0.3, 2.0, 7.5):
        np.testing.assert_allclose(transfer_matrix(H, z).U, scipy.linalg.expm(-1j * H * z),
                                   atol=1e-11)


def test_chain_and_dense_paths_agree():
    chain = synthesize_bath(StarBathSpec(0.11, 0.16, 21))
    a = transfer_matrix(chain, 3.3).U
    b = transfer_matrix(chain.matrix(), 3.3).U
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        transfer_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]), 1.0)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 30), seed=st.integers(0, 2 ** 31),
       z1=st.floats(0, 30), z2=st.floats(0, 30))
def test_unitarity_and_group_property(m, seed, z1, z2):
    prop = Propagator(random_symmetric(m, seed))
    U1, U2 = prop.transfer_matrix(z1).U, prop.transfer_matrix(z2).U
    U12 = prop.transfer_matrix(z1 + z2).U
    assert np.abs(U1.conj().T @ U1 - np.eye(m)).max() < 1e-10
    assert np.abs(U1 @ U2 - U12).max() < 1e-9


def test_coupler_intensity_is_cos_squared():
    z = np.linspace(0, 25, 501)
    tr = site_intensities(build_coupler(0.3), 0, z)
    np.testing.assert_allclose(tr.site(0), np.cos(0.3 * z) ** 2, atol=1e-12)


def test_probability_conserved(pt_network):
    tr = site_intensities(pt_network, 0, np.linspace(0, 25, 251))
    assert np.abs(tr.intensities.sum(axis=1) - 1).max() < 1e-10
    assert tr.intensities.min() >= 0 and tr.intensities.max() <= 1 + 1e-12


def test_site_intensity_errors(pt_network):
    with pytest.raises(IndexError):
        site_intensities(pt_network, 99, [0, 1])
    with pytest.raises(ValueError):
        site_intensities(pt_network, 0, [1, 0.5])


# --- closed-form lossy dimer -------------------------------------------------

def test_dimer_hermitian_limit():
    J = 0.3
    for z in (0.0, 1.3, 4.0):
        G = dimer_propagator(DimerSpec(J, 0.0), z)
        expected = [[math.cos(J * z), -1j * math.sin(J * z)],
                    [-1j * math.sin(J * z), math.cos(J * z)]]
        np.testing.assert_allclose(G, expected, atol=1e-14)


def test_dimer_decoupled_limit():
    # J0 must be positive, so approach J0 -> 0 from above
    G = dimer_propagator(DimerSpec(1e-12, 0.25), 3.0)
    np.testing.assert_allclose(G, np.diag([1, math.exp(-0.75)]), atol=1e-10)


@pytest.mark.parametrize("gamma", [0.0, 0.1, 0.25, 0.6, 0.59999999, 1.5])
def test_dimer_matches_expm(gamma):
    spec = DimerSpec(0.3, gamma)
    for z in (0.0, 0.5, 4.0, 12.0):
        np.testing.assert_allclose(dimer_propagator(spec, z),
                                   scipy.linalg.expm(-1j * spec.h_eff() * z), atol=1e-12)


def _dimer_trace(spec, col, z):
    G = np.array([dimer_propagator(spec, zz) for zz in z])
    return IntensityTrace(z, np.abs(G[:, :, col]) ** 2, col)


def test_dimer_transfer_lengths_reported_values():
    # gamma = 0.25 cm^-1, J0 = 0.3 cm^-1: reported 7.3 cm (neutral A) and 4.1 cm (lossy B)
    z = np.arange(0, 12, 0.01)
    spec = DimerSpec(0.3, 0.25)
    assert transfer_length(_dimer_trace(spec, 0, z), 1, normalize=True) == \
        pytest.approx(7.3, abs=0.1)
    assert transfer_length(_dimer_trace(spec, 1, z), 0, normalize=True) == \
        pytest.approx(4.1, abs=0.1)


def test_transfer_length_coupler():
    tr = site_intensities(build_coupler(0.3), 0, np.arange(0, 10, 0.01))
    assert transfer_length(tr, 1) == pytest.approx(math.pi / 0.6, abs=1e-4)


def test_transfer_length_needs_interior_max():
    tr = site_intensities(build_coupler(0.3), 0, np.arange(0, 3, 0.01))
    with pytest.raises(ValueError):
        transfer_length(tr, 1)


# --- decay fitting -----------------------------------------------------------

def test_fit_exact_exponential():
    z = np.linspace(0, 12, 121)
    tr = IntensityTrace(z, np.exp(-2 * 0.25 * z)[:, None], 0)
    fit = fit_decay(tr, 0, (3, 10))
    assert fit.gamma_fit == pytest.approx(0.25, abs=1e-12)
    assert fit.rms_residual < 1e-12


def test_fit_errors():
    z = np.linspace(0, 10, 11)
    with pytest.raises(ValueError):
        fit_decay(IntensityTrace(z, np.ones((11, 1)), 0), 0, (3.5, 4.5))
    I = np.exp(-z)[:, None]
    I[5] = 0
    with pytest.raises(ValueError):
        fit_decay(IntensityTrace(z, I, 0), 0, (3, 10))


@pytest.fixture(scope="module")
def decay_trace(design_bath):
    return site_intensities(design_bath, 0, np.arange(0, 10.001, 0.01))


def test_bath_decay_matches_wigner_weisskopf(decay_trace):
    fit = fit_decay(decay_trace, 0, (3, 10))
    assert fit.gamma_fit == pytest.approx(math.pi * 0.11 ** 2 / 0.16, rel=0.07)


def test_zeno_window_fits_worse():
    # untruncated wide ladder: no truncation ripple to mask the short-z curvature
    chain = synthesize_bath(StarBathSpec(0.11, 0.16, 501))
    tr = site_intensities(chain, 0, np.arange(0, 10.001, 0.01))
    good = fit_decay(tr, 0, (3, 10))
    zeno = fit_decay(tr, 0, (0, 2))
    assert good.gamma_fit == pytest.approx(math.pi * 0.11 ** 2 / 0.16, rel=1e-2)
    assert zeno.rms_residual > 5 * good.rms_residual


def test_zeno_derivative_vanishes(design_bath):
    prop = Propagator(design_bath)
    slopes = []
    for h in (1e-2, 1e-3, 1e-4):
        I = np.abs(prop.column([0.0, h], 0)[:, 0]) ** 2
        slopes.append((I[1] - I[0]) / h)
    # quadratic onset: one-sided slope shrinks linearly with the step
    assert abs(slopes[2]) < abs(slopes[1]) < abs(slopes[0])
    assert abs(slopes[2]) < 1e-2 * abs(slopes[0]) * 1.01
    assert abs(slopes[2]) < 1e-3


def test_bath_dimer_matches_closed_form(pt_network, pt_spec):
    z = np.arange(0, 10.001, 0.01)
    for col in (0, 1):
        bath = site_intensities(pt_network, col, z).normalized((0, 1))
        ref = _dimer_trace(pt_spec, col, z).normalized((0, 1))
        assert np.abs(bath - ref).max() < 2e-2


def test_pt_dimer_damped_oscillation(pt_network):
    z = np.arange(0, 10.001, 0.05)
    tr = site_intensities(pt_network, 0, z)
    sub = tr.intensities[:, :2].sum(axis=1)
    assert np.all(np.diff(sub) <= 1e-9)
    assert sub[-1] < 0.15
    # site B fills and empties again: an interior maximum well inside the range
    assert 0 < tr.site(1).argmax() < len(z) - 1
