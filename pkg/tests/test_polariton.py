"""Cavity sideband couplings: rotating-wave coefficients and manifold fits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import jv

from floqlux import (
    CavityParams,
    DriveParams,
    FitError,
    FluxBias,
    OutOfWindowError,
    RWAParams,
    fit_polariton,
    floquet_dipole_coupling,
    polariton_manifold_eigs,
    rwa_coupling,
    rwa_params_from_circuit,
    rwa_phase_coefficients,
    synth_polariton_data,
    transition_spline,
)

CROSSING_PHI = 0.303146  # bias where the 0 -> 3 transition meets the cavity


def _linear_rwa(slope: float) -> RWAParams:
    return RWAParams(omega3=7.3, g=0.02, g_prime=0.0,
                     zeta=lambda d: slope * np.asarray(d))


def test_bessel_limit():
    # linear dispersion turns the phase factor into the Bessel generating
    # function: A_n = J_n(slope * xi / Omega)
    slope, xi, omega = 12.0, 0.05, 0.3
    drive = DriveParams(FluxBias(0.5), xi, omega)
    co = rwa_phase_coefficients(_linear_rwa(slope), drive)
    arg = slope * xi / omega
    for n in range(-10, 11):
        assert co.get(n) == pytest.approx(jv(n, arg), abs=1e-10)


def test_completeness_and_parseval():
    drive = DriveParams(FluxBias(0.5), 0.08, 0.25)
    co = rwa_phase_coefficients(_linear_rwa(30.0), drive)
    total = sum(abs(co.get(n)) ** 2 for n in co.n_values)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert co.completeness >= 1 - 1e-8
    with pytest.raises(OutOfWindowError):
        co.get(max(co.n_values) + 1)


def test_coefficients_depend_only_on_excursion_waveform():
    # halving the drive amplitude while doubling the dispersion slope leaves
    # the frequency-excursion waveform, hence every A_n, unchanged
    omega = 0.3
    a = rwa_phase_coefficients(_linear_rwa(10.0), DriveParams(FluxBias(0.5), 0.06, omega))
    b = rwa_phase_coefficients(_linear_rwa(20.0), DriveParams(FluxBias(0.5), 0.03, omega))
    for n in range(-6, 7):
        assert b.get(n) == pytest.approx(a.get(n), abs=1e-12)


def test_phase_integral_against_quadrature():
    # independent eta(t): direct numerical integration of the detuning
    slope, quad_c = 8.0, 150.0
    xi, omega = 0.06, 0.35

    def zeta(d):
        d = np.asarray(d)
        return slope * d + quad_c * d * d

    rwa = RWAParams(omega3=7.3, g=0.02, g_prime=0.0, zeta=zeta)
    drive = DriveParams(FluxBias(0.5), xi, omega)
    co = rwa_phase_coefficients(rwa, drive)
    mean = quad_c * xi * xi / 2.0  # time average of zeta(xi cos)
    assert co.mean_detuning == pytest.approx(mean, rel=1e-9)

    def eta(t):
        val, _ = quad(
            lambda tau: float(zeta(xi * math.cos(2 * math.pi * omega * tau))) - mean,
            0.0, t, limit=400)
        return 2 * math.pi * val

    period = 1.0 / omega
    for n in (-2, 0, 1, 3):
        re, _ = quad(lambda t: math.cos(eta(t) - 2 * math.pi * n * omega * t),
                     0.0, period, limit=400)
        im, _ = quad(lambda t: math.sin(eta(t) - 2 * math.pi * n * omega * t),
                     0.0, period, limit=400)
        want = (re + 1j * im) / period
        assert co.get(n) == pytest.approx(want, abs=1e-8)


def test_rwa_coupling_composition():
    drive = DriveParams(FluxBias(0.5), 0.05, 0.3)
    rwa = RWAParams(omega3=7.3, g=0.02, g_prime=0.004,
                    zeta=lambda d: 10.0 * np.asarray(d))
    co = rwa_phase_coefficients(rwa, drive)
    for n in (-1, 0, 2):
        want = 0.5 * rwa.g * co.get(n) + 0.25 * rwa.g_prime * (co.get(n - 1) + co.get(n + 1))
        assert rwa_coupling(rwa, co, n) == pytest.approx(want, abs=1e-15)


def test_rwa_params_validation():
    with pytest.raises(ValueError):
        RWAParams(omega3=-1.0, g=0.01, g_prime=0.0, zeta=lambda d: 0.0 * np.asarray(d))
    with pytest.raises(ValueError):
        RWAParams(omega3=7.3, g=0.01, g_prime=0.0,
                  zeta=lambda d: np.asarray(d) + 1.0)


def test_model_conventions_cancel_under_normalization(params):
    # undriven: the Floquet dipole coupling is g_cap |n_03|; the two-mode
    # rotating-wave form carries an extra factor 2, which normalized
    # comparisons divide out
    from floqlux import SambeConfig, solve_floquet

    cavity = CavityParams()
    drive0 = DriveParams(FluxBias(CROSSING_PHI), 1e-9, 0.2)
    sol = solve_floquet(params, drive0, SambeConfig())
    g_f = abs(floquet_dipole_coupling(sol, None, cavity, 0))
    rwa = rwa_params_from_circuit(params, CROSSING_PHI, cavity, drive0.xi)
    co = rwa_phase_coefficients(rwa, drive0)
    g_r = abs(rwa_coupling(rwa, co, 0))
    assert g_f / g_r == pytest.approx(2.0, rel=1e-6)
    assert g_f == pytest.approx(0.0198990, abs=2e-6)


def test_manifold_eigs_limits():
    cavity = CavityParams(omega_c=7.3, g_cap=0.15)
    bare = polariton_manifold_eigs(cavity, 7.25, 0.2, {m: 0.0 for m in range(-2, 4)})
    want = sorted([7.3] + [7.25 + m * 0.2 for m in range(-2, 4)])
    assert bare == pytest.approx(want, abs=1e-12)
    # a single coupling opens a symmetric 2g gap at its crossing
    g = {m: 0.0 for m in range(-2, 4)}
    g[0] = 0.01
    eigs = polariton_manifold_eigs(cavity, 7.3, 0.2, g)
    near = np.sort(np.abs(eigs - 7.3))
    assert near[:2] == pytest.approx([0.01, 0.01], abs=1e-9)


def test_synth_data_within_branch_window():
    cavity = CavityParams()
    data = synth_polariton_data(cavity, lambda p: 7.3 + 5.0 * (p - 0.3), 0.2,
                                {0: 0.02}, None, np.linspace(0.29, 0.31, 21),
                                branch_window=0.25)
    assert data.shape[1] == 2
    assert np.all(np.abs(data[:, 1] - cavity.omega_c) <= 0.25)
    jittered = synth_polariton_data(cavity, lambda p: 7.3 + 5.0 * (p - 0.3), 0.2,
                                    {0: 0.02}, None, np.linspace(0.29, 0.31, 21),
                                    sigma=1e-3, rng=np.random.default_rng(7))
    assert jittered.shape[1] == 3
    assert np.all(jittered[:, 2] == 1e-3)


def _crossing_data(params, cavity, g_true, omega, n_each=15, span=3e-3):
    curve = transition_spline(params, 0, 3, 0.28, 0.33, 61)
    phis = []
    from scipy.optimize import brentq

    for m, g in g_true.items():
        target = cavity.omega_c - m * omega
        lo, hi = 0.281, 0.329
        f = lambda p: float(curve(p)) + 0.0 - target  # noqa: E731
        if (f(lo)) * (f(hi)) < 0:
            star = brentq(f, lo, hi)
            phis.append(np.linspace(star - span, star + span, n_each))
    phis = np.concatenate(phis)
    data = synth_polariton_data(cavity, curve, omega, g_true, None, phis)
    return curve, data


def test_fit_roundtrip_noiseless(params):
    cavity = CavityParams()
    g_true = {-2: 0.005, -1: 0.010, 0: 0.0199, 1: 0.010, 2: 0.005, 3: 0.0025}
    curve, data = _crossing_data(params, cavity, g_true, 0.2)
    fit = fit_polariton(data, cavity, curve, 0.2)
    assert fit.success
    for m, g in g_true.items():
        if m in fit.unidentifiable:
            continue
        assert fit.g_m[m] == pytest.approx(g, rel=1e-2)


def test_fit_pins_unidentifiable_sidebands(params):
    cavity = CavityParams()
    g_true = {0: 0.0199}
    curve, data = _crossing_data(params, cavity, g_true, 0.2)
    fit = fit_polariton(data, cavity, curve, 0.2)
    assert fit.success
    assert fit.g_m[0] == pytest.approx(0.0199, rel=1e-2)
    for m in (-2, -1, 1, 2, 3):
        assert m in fit.unidentifiable
        assert fit.g_m[m] == 0.0
        assert math.isinf(fit.g_err[m])


def test_fit_rejects_malformed_data():
    cavity = CavityParams()
    with pytest.raises(ValueError):
        fit_polariton(np.ones((4, 5)), cavity, lambda p: 7.3, 0.2)
    with pytest.raises((ValueError, FitError)):
        fit_polariton(np.ones((2, 2)), cavity, lambda p: 7.3, 0.2)
