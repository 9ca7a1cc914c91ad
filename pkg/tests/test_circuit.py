"""Static circuit: spectra, matrix elements, and limiting cases."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqlux import (
    CircuitParams,
    DiagnosticError,
    FluxBias,
    build_hamiltonian,
    charge_operator,
    diagonalize_static,
    dispersion_sweep,
    phase_operator,
    transition_spline,
)


def test_reference_transitions(spec_half, spec_451):
    # frozen values of the reference circuit (e_c=1.17, e_j=2.65, e_l=0.54)
    assert spec_half.transition(0, 1) == pytest.approx(0.722016997578, abs=1e-9)
    assert spec_451.transition(0, 1) == pytest.approx(1.013950289332, abs=1e-9)
    assert abs(spec_451.phi_elements[0, 1]) == pytest.approx(1.620561611908, abs=1e-9)
    assert abs(spec_451.n_elements[0, 1]) == pytest.approx(0.17555223, abs=1e-7)


def test_harmonic_limit_is_plasma_ladder():
    # e_j = 0 leaves a displaced oscillator: uniform spacing sqrt(8 e_c e_l)
    p = CircuitParams(e_j=0.0, n_levels=6)
    spec = diagonalize_static(p, FluxBias(0.37))
    gaps = np.diff(spec.energies)
    assert gaps == pytest.approx(np.full(5, p.plasma_frequency), rel=1e-10)
    # ground-state phase expectation sits at the displaced minimum
    assert spec.phi_elements[0, 0] == pytest.approx(2 * math.pi * 0.37, rel=1e-9)


def test_operator_structure(params):
    phi = phase_operator(params)
    n = charge_operator(params)
    assert np.allclose(phi, phi.T)
    assert np.allclose(n, n.conj().T)
    # canonical commutator holds away from the truncation edge
    comm = phi @ n - n @ phi
    d = params.basis_dim
    inner = comm[: d - 1, : d - 1]
    assert np.allclose(inner, 1j * np.eye(d - 1), atol=1e-12)
    assert params.phi_zpf * params.n_zpf == pytest.approx(0.5, rel=1e-12)


def test_hamiltonian_hermitian_and_real_spectrum(params):
    h = build_hamiltonian(params, FluxBias(0.42))
    assert np.allclose(h, h.conj().T)
    spec = diagonalize_static(params, FluxBias(0.42))
    assert np.all(np.diff(spec.energies) >= 0)
    assert np.all(np.isfinite(spec.energies))


def test_element_symmetries(spec_451):
    # phi real symmetric, n Hermitian with imaginary off-diagonals
    assert np.allclose(spec_451.phi_elements, spec_451.phi_elements.T)
    n = spec_451.n_elements
    assert np.allclose(n, n.conj().T)
    off = n - np.diag(np.diag(n))
    assert np.allclose(off.real, 0.0, atol=1e-10)


def test_mirror_symmetry_about_half(params):
    a = diagonalize_static(params, FluxBias(0.5 + 0.03))
    b = diagonalize_static(params, FluxBias(0.5 - 0.03))
    assert a.energies == pytest.approx(b.energies, abs=1e-10)
    assert np.abs(a.n_elements) == pytest.approx(np.abs(b.n_elements), abs=1e-8)


def test_basis_truncation_converged(params):
    wide = CircuitParams(basis_dim=140, n_levels=params.n_levels)
    a = diagonalize_static(params, FluxBias(0.451)).energies
    b = diagonalize_static(wide, FluxBias(0.451)).energies
    assert a == pytest.approx(b, abs=1e-10)


def test_param_validation():
    with pytest.raises(ValueError):
        CircuitParams(e_c=0.0)
    with pytest.raises(ValueError):
        CircuitParams(e_j=-0.1)
    with pytest.raises(ValueError):
        CircuitParams(n_levels=0)
    with pytest.raises(ValueError):
        CircuitParams(basis_dim=1)


def test_dispersion_sweep_matches_pointwise(params):
    biases = np.linspace(0.44, 0.56, 7)
    table = dispersion_sweep(params, biases)
    direct = [diagonalize_static(params, FluxBias(b)).transition(0, 1) for b in biases]
    assert table.transition(0, 1) == pytest.approx(direct, rel=1e-12)


def test_transition_spline_interpolates(params):
    spline = transition_spline(params, 0, 1, 0.46, 0.54, num=31)
    probe = 0.4817
    exact = diagonalize_static(params, FluxBias(probe)).transition(0, 1)
    assert float(spline(probe)) == pytest.approx(exact, abs=5e-9)


@settings(max_examples=20, deadline=None)
@given(
    e_c=st.floats(0.5, 2.0),
    e_l=st.floats(0.2, 1.5),
    e_j=st.floats(0.0, 6.0),
    phi=st.floats(0.0, 1.0),
)
def test_spectrum_properties_random_circuits(e_c, e_l, e_j, phi):
    p = CircuitParams(e_c=e_c, e_l=e_l, e_j=e_j, basis_dim=60, n_levels=4)
    spec = diagonalize_static(p, FluxBias(phi))
    assert np.all(np.diff(spec.energies) >= -1e-12)
    assert np.allclose(spec.phi_elements, spec.phi_elements.T, atol=1e-9)
    # eigenvectors orthonormal
    g = spec.eigenvectors.T @ spec.eigenvectors
    assert np.allclose(g, np.eye(4), atol=1e-9)


def test_diagonalize_rejects_bad_input(params):
    with pytest.raises((DiagnosticError, ValueError, TypeError)):
        diagonalize_static(params, FluxBias(float("nan")))
