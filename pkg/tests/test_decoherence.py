"""Noise spectral densities, golden-rule rates, and sweet-spot location."""

from __future__ import annotations

import math

import numpy as np
import pytest

from floqlux import (
    CircuitParams,
    DriveParams,
    FluxBias,
    GridSpec,
    InfraredDivergenceError,
    NoiseModel,
    SambeConfig,
    coherence_rates,
    depolarization_rates,
    filter_weights,
    find_sweet_spots,
    fourier_matrix_elements,
    pure_dephasing_rate,
    quasienergy_derivatives,
    s_ac,
    s_dc,
    s_diel,
    solve_floquet,
    two_level_reduction,
)

HBAR = 1.054571817e-34
KB = 1.380649e-23


def test_one_over_f_scaling(noise):
    assert s_dc(0.8, noise) == pytest.approx(0.5 * s_dc(0.4, noise), rel=1e-12)
    assert s_dc(-0.4, noise) == pytest.approx(s_dc(0.4, noise), rel=1e-12)
    assert s_ac(0.8, noise) == pytest.approx(0.5 * s_ac(0.4, noise), rel=1e-12)
    # reduced form absorbs the (2 pi)^2 flux-to-phase conversion
    assert s_dc(0.4, noise, reduced=True) == pytest.approx(
        (2 * math.pi) ** 2 * s_dc(0.4, noise), rel=1e-12)
    with pytest.raises(InfraredDivergenceError):
        s_dc(0.0, noise)
    with pytest.raises(InfraredDivergenceError):
        s_ac(0.0, noise)


def test_dielectric_detailed_balance(params, noise):
    w = 0.9
    ratio = s_diel(-w, params, noise) / s_diel(w, params, noise)
    boltz = math.exp(-HBAR * 2 * math.pi * w * 1e9 / (KB * noise.temperature))
    assert ratio == pytest.approx(boltz, rel=1e-9)
    assert s_diel(0.0, params, noise) == 0.0
    cold = NoiseModel(temperature=0.0)
    assert s_diel(-w, params, cold) == 0.0
    assert s_diel(w, params, cold) > 0.0


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(a_dc=-1e-6)
    with pytest.raises(ValueError):
        NoiseModel(omega_ir=0.0)
    with pytest.raises(ValueError):
        NoiseModel(t_m=0.0)
    # ir cutoff and measurement time must keep the 1/f log factor real
    with pytest.raises(ValueError):
        NoiseModel(omega_ir=1.0, t_m=1.0)
    assert NoiseModel().ir_log_factor == pytest.approx(3.93, abs=0.01)


def test_fourier_elements_conjugation(spot_solution):
    elems = fourier_matrix_elements(spot_solution)
    for k in (-3, -1, 0, 2):
        assert elems.get(0, 1, k) == pytest.approx(
            np.conj(elems.get(1, 0, -k)), abs=1e-12)


def test_undriven_t1_reference(params, noise, spec_451):
    # frozen: T1 of the reference circuit at phi_dc = 0.451, drive off
    sol = solve_floquet(params, DriveParams(FluxBias(0.451), 0.0, 0.7743211),
                        SambeConfig(), spectrum=spec_451)
    elems = fourier_matrix_elements(sol)
    depol = depolarization_rates(elems, sol, noise, params)
    assert depol.t1 == pytest.approx(2.728117e-05, rel=1e-5)
    assert depol.gamma_up < depol.gamma_down  # thermal asymmetry at 85 mK
    up = sum(v["up"] for v in depol.breakdown.values())
    assert up == pytest.approx(depol.gamma_up, rel=1e-12)


def test_coherence_rates_composition(params, noise, spot_drive, spot_solution):
    rates = coherence_rates(params, spot_drive, noise, sol=spot_solution)
    assert 1.0 / rates.t2r == pytest.approx(0.5 / rates.t1 + rates.gamma_phi, rel=1e-12)
    assert rates.tphi == pytest.approx(1.0 / rates.gamma_phi, rel=1e-12)
    assert rates.gamma_up > 0 and rates.gamma_down > 0 and rates.gamma_phi > 0


def test_dephasing_positive_when_detuned(params, noise):
    # away from any sweet spot the 1/f first-order term dominates dephasing
    sol = solve_floquet(params, DriveParams(FluxBias(0.43), 0.0, 0.5), SambeConfig())
    elems = fourier_matrix_elements(sol)
    deph = pure_dephasing_rate(elems, sol, noise, params)
    assert deph.gamma_phi > 0
    assert deph.tphi == pytest.approx(1.0 / deph.gamma_phi, rel=1e-12)


def test_derivative_forms_agree_at_one_point():
    # a taller level stack keeps the perturbative identities tight
    deep = CircuitParams(n_levels=10)
    drive = DriveParams(FluxBias(0.451), 0.05, 0.6)
    sol = solve_floquet(deep, drive, SambeConfig(n_levels=9), check_convergence=False)
    elems = fourier_matrix_elements(sol)
    d = quasienergy_derivatives(sol, elems, deep, fd=True)
    assert not d.tracking_break
    assert d.flux_fd == pytest.approx(d.flux_me, rel=1e-6, abs=1e-9)
    assert d.xi_fd == pytest.approx(d.xi_me, rel=1e-6, abs=1e-9)


def test_filter_weights_conservation(params, spec_451):
    red = two_level_reduction(params, DriveParams(FluxBias(0.451), 0.07, 0.5),
                              spectrum=spec_451)
    fw = filter_weights(red)
    assert fw.total == pytest.approx(fw.reference_total, rel=1e-9)
    assert abs(fw.leakage) < 1e-9 * fw.reference_total


def test_flux_sweet_spot_at_symmetry_point(params):
    grid = GridSpec(phi_dc=tuple(np.linspace(0.48, 0.52, 5)), xi=(0.0,), omega=(0.5,))
    scan = find_sweet_spots(params, None, grid)
    flux_spots = [s for s in scan.spots if s.kind == "flux"]
    assert flux_spots
    assert flux_spots[0].phi_dc == pytest.approx(0.5, abs=1e-6)
    assert abs(flux_spots[0].d_flux) < 1e-4


def test_double_sweet_spot_location(params, noise):
    grid = GridSpec(phi_dc=(0.451,), xi=(0.0, 0.06, 0.12), omega=(0.7, 0.8))
    scan = find_sweet_spots(params, noise, grid)
    doubles = [s for s in scan.spots if s.kind == "double"]
    assert doubles
    spot = doubles[0]
    assert spot.xi == pytest.approx(0.0855831, abs=2e-4)
    assert spot.omega == pytest.approx(0.7743211, abs=2e-4)
    assert abs(spot.d_flux) < 1e-4 and abs(spot.d_xi) < 1e-4
    assert spot.rates is not None and spot.rates.tphi > 0
