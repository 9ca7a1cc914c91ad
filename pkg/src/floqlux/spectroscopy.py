"""Steady-state two-tone spectroscopy maps and Ramsey-type signal analysis.

The map replaces a full driven master equation with a documented
rate-equation model: golden-rule excitation rates through each sideband,
Gamma_k = (1/2) * Omega_k^2 * L(omega_p - (eps_01 + k*Omega)), with
Omega_k the probe Rabi rate scaled by the charge Fourier element |n_01^(k)|
and L a unit-area Lorentzian, balanced against the thermal rates
gamma_up/gamma_down into the two-state steady state

    P1 = (gamma_up + sum Gamma_k) / (gamma_up + gamma_down + 2 sum Gamma_k).

This reproduces peak positions and relative visibility of the transitions,
which is what the maps are read for; coherent probe effects and cavity
pull are outside the model boundary.

Ramsey signals beat at (eps_01 + n*Omega - omega_0): the quasienergy
splitting ladder displaced by the demodulation reference omega_0.  The
estimator fits a shared-frequency sinusoid inside each dense delay window
and an exponential to the per-window amplitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar

from .circuit import CircuitParams
from .decoherence import (
    FourierMatrixElements,
    NoiseModel,
    charge_fourier_elements,
    depolarization_rates,
    fourier_matrix_elements,
)
from .errors import AliasingError, DiagnosticError, FitError
from .floquet import DriveParams, SambeConfig, solve_floquet
from .units import GHZ_TO_ANGULAR, TWO_PI, ghz_to_angular

__all__ = [
    "ProbeParams",
    "ProbeRates",
    "RamseyConfig",
    "RamseySignal",
    "T2REstimate",
    "SpectroscopyMap",
    "probe_transition_rates",
    "steady_state_population",
    "spectroscopy_map",
    "synth_ramsey_signal",
    "extract_t2r",
]


@dataclass(frozen=True)
class ProbeParams:
    """Weak spectroscopy tone: frequency, Rabi amplitude, and linewidth (GHz).

    ``linewidth`` is the phenomenological Lorentzian FWHM of each sideband
    transition (default 5 MHz).
    """

    omega_p: float
    rabi: float = 1e-4
    linewidth: float = 5e-3

    def __post_init__(self) -> None:
        if self.rabi < 0:
            raise ValueError("rabi must be non-negative")
        if not self.linewidth > 0:
            raise ValueError("linewidth must be positive")


@dataclass(frozen=True, eq=False)
class ProbeRates:
    """Per-sideband excitation rates (1/s) and their resonance positions."""

    k_values: np.ndarray
    rates: np.ndarray
    peak_freqs: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.k_values, self.rates, self.peak_freqs):
            arr.setflags(write=False)

    @property
    def total(self) -> float:
        return float(np.sum(self.rates))


def probe_transition_rates(sol, elems: FourierMatrixElements, probe: ProbeParams) -> ProbeRates:
    """Golden-rule rates for probe-driven 0 -> 1 sideband transitions.

    Gamma_k = (1/2) * (2*pi*1e9 * rabi * |n_01^(k)|)^2 * L(delta_k) where
    L is a unit-area Lorentzian (angular frequency) of FWHM ``linewidth``
    centered at the natural-branch resonance eps_01 + k*Omega.
    """
    eps01 = sol.splitting(1, 0, branch="natural")
    kmax = int(elems.k_values[-1])
    ks = np.arange(-kmax, kmax + 1)
    hw = 0.5 * ghz_to_angular(probe.linewidth)
    rates = np.empty(ks.size)
    peaks = np.empty(ks.size)
    for i, k in enumerate(ks):
        n01 = abs(elems.get(0, 1, int(k)))
        peaks[i] = eps01 + k * sol.drive.omega
        delta = ghz_to_angular(probe.omega_p - peaks[i])
        lor = hw / math.pi / (delta * delta + hw * hw)
        amp = ghz_to_angular(probe.rabi) * n01
        rates[i] = 0.5 * amp * amp * lor
    return ProbeRates(k_values=ks, rates=rates, peak_freqs=peaks)


def steady_state_population(rates: ProbeRates, coherence) -> float:
    """Two-state steady state under probe excitation and thermal rates.

    ``coherence`` provides gamma_up/gamma_down (CoherenceRates or
    DepolarizationRates both work).

    Raises:
        DiagnosticError: every rate vanishes, the balance is undefined.
    """
    g_up = coherence.gamma_up
    g_down = coherence.gamma_down
    total = rates.total
    denom = g_up + g_down + 2.0 * total
    if denom == 0.0:
        raise DiagnosticError("steady state undefined: all rates are zero")
    return (g_up + total) / denom


@dataclass(frozen=True, eq=False)
class SpectroscopyMap:
    """P1 over a (bias-or-amplitude) x (probe frequency) grid.

    ``branches`` holds the overlay traces eps_01 + k*Omega per sweep point;
    failed points are masked with a reason string.
    """

    sweep_name: str
    sweep_values: np.ndarray
    probe_freqs: np.ndarray
    population: np.ndarray
    branches: np.ndarray
    branch_k: np.ndarray
    mask: np.ndarray
    failures: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for arr in (self.sweep_values, self.probe_freqs, self.population,
                    self.branches, self.branch_k, self.mask):
            arr.setflags(write=False)


def spectroscopy_map(
    params: CircuitParams,
    noise: NoiseModel,
    drive_template: DriveParams,
    sweep_name: str,
    sweep_values,
    probe_freqs,
    probe: ProbeParams | None = None,
    config: SambeConfig | None = None,
    branch_k: int = 4,
) -> SpectroscopyMap:
    """Steady-state population map over phi_dc or xi versus probe frequency.

    ``sweep_name`` is "phi_dc" or "xi"; the other drive parameters come from
    ``drive_template``.  Solver failures at a sweep point mask its column
    and record the reason.
    """
    if sweep_name not in ("phi_dc", "xi"):
        raise ValueError("sweep_name must be 'phi_dc' or 'xi'")
    if probe is None:
        probe = ProbeParams(omega_p=0.0)
    if config is None:
        config = SambeConfig()
    sweep_values = np.asarray(sweep_values, dtype=float)
    probe_freqs = np.asarray(probe_freqs, dtype=float)
    n_s, n_p = sweep_values.size, probe_freqs.size
    pop = np.full((n_s, n_p), np.nan)
    ks = np.arange(-branch_k, branch_k + 1)
    branches = np.full((n_s, ks.size), np.nan)
    mask = np.zeros(n_s, dtype=bool)
    failures: dict = {}

    for i, val in enumerate(sweep_values):
        try:
            # invalid sweep values (rejected by the dataclass validators)
            # mask the cell like any other per-point failure
            if sweep_name == "phi_dc":
                drive = DriveParams(
                    bias=type(drive_template.bias)(phi_dc=float(val)),
                    xi=drive_template.xi,
                    omega=drive_template.omega,
                )
            else:
                drive = DriveParams(
                    bias=drive_template.bias, xi=float(val), omega=drive_template.omega
                )
            sol = solve_floquet(params, drive, config, check_convergence=False)
            elems = charge_fourier_elements(sol)
            eps01 = sol.splitting(1, 0, branch="natural")
            pol = depolarization_rates(fourier_matrix_elements(sol), sol, noise, params)
            branches[i] = eps01 + ks * drive.omega
            # vectorized golden-rule balance over all probe frequencies
            kk = np.arange(-int(elems.k_values[-1]), int(elems.k_values[-1]) + 1)
            n01 = np.array([abs(elems.get(0, 1, int(k))) for k in kk])
            peaks = eps01 + kk * drive.omega
            hw = 0.5 * ghz_to_angular(probe.linewidth)
            delta = GHZ_TO_ANGULAR * (probe_freqs[:, None] - peaks[None, :])
            lor = hw / math.pi / (delta * delta + hw * hw)
            amp2 = (ghz_to_angular(probe.rabi) * n01) ** 2
            tot = 0.5 * lor @ amp2
            pop[i] = (pol.gamma_up + tot) / (pol.gamma_up + pol.gamma_down + 2.0 * tot)
        except Exception as exc:  # masked cell, not a crash: maps keep going
            mask[i] = True
            failures[int(i)] = f"{type(exc).__name__}: {exc}"
    return SpectroscopyMap(
        sweep_name=sweep_name,
        sweep_values=sweep_values,
        probe_freqs=probe_freqs,
        population=pop,
        branches=branches,
        branch_k=ks,
        mask=mask,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# Ramsey-type signals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RamseyConfig:
    """Windowed Ramsey sampling plan (times in seconds, frequencies GHz).

    ``delays`` are the window offsets; within each window the delay is swept
    densely with ``step`` over ``window``.  ``omega0`` is the demodulation
    reference (the bare qubit frequency set by the pulse carrier);
    ``t2r_true`` is the decay constant used for synthesis.
    """

    omega0: float
    delays: tuple
    window: float = 20e-9
    step: float = 1e-9
    t2r_true: float = 23e-6

    def __post_init__(self) -> None:
        if not self.step < self.window:
            raise ValueError("step must be smaller than window")
        d = np.asarray(self.delays, dtype=float)
        if d.size < 1 or np.any(np.diff(d) <= 0):
            raise ValueError("delays must be non-empty and strictly ascending")
        if not self.t2r_true > 0:
            raise ValueError("t2r_true must be positive")


@dataclass(frozen=True, eq=False)
class RamseySignal:
    """Synthesized (or measured) windowed Ramsey samples.

    ``times`` is (n_windows, n_samples) in seconds; ``values`` matches.
    ``dominant_beat`` is the strongest component's |eps_01 + n*Omega -
    omega0| in Hz, used by the aliasing guard.
    """

    times: np.ndarray
    values: np.ndarray
    window_offsets: np.ndarray
    step: float
    dominant_beat: float
    component_freqs: np.ndarray
    component_weights: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.times, self.values, self.window_offsets,
                    self.component_freqs, self.component_weights):
            arr.setflags(write=False)


def synth_ramsey_signal(sol, config: RamseyConfig, weights=None, offset: float = 0.0) -> RamseySignal:
    """Deterministic Ramsey signal from the solved quasienergy ladder.

    V(dt) = exp(-dt/t2r_true) * sum_n c_n cos(2*pi*(eps01 + n*Omega -
    omega0)*1e9*dt) + offset, with c_n defaulting to the excited-branch
    sideband weights.  The weight ladder is aligned so the peak weight sits
    on the ladder point nearest omega0: the demodulated measurement keeps
    the beats relative to the reference, and the adiabatically prepared
    branch (continuously connected to the static transition the reference
    tracks) carries the dominant weight.  At xi = 0 this reduces to a single
    component at |omega01 - omega0|.  ``t2r_true = math.inf`` gives an
    undamped signal; explicit ``weights`` (a mapping n -> c_n on the
    eps01 + n*Omega ladder) bypass the alignment.
    """
    eps01 = sol.splitting(1, 0, branch="natural")
    if weights is None:
        w = sol.sideband_weights(1)
        full_ns = np.arange(-(w.size // 2), w.size // 2 + 1)
        ladder = eps01 + full_ns * sol.drive.omega
        n_near = int(full_ns[np.argmin(np.abs(ladder - config.omega0))])
        n_peak = int(full_ns[np.argmax(w)])
        shift = n_peak - n_near  # weight index that lands on the near point
        keep = w > 1e-12
        src = full_ns[keep]
        ns = src - shift
        w = w[keep]
        inside = np.abs(ns) <= full_ns[-1]
        ns, w = ns[inside], w[inside]
    else:
        ns = np.asarray(sorted(weights), dtype=int)
        w = np.array([weights[int(n)] for n in ns], dtype=float)
    freqs_hz = (eps01 + ns * sol.drive.omega - config.omega0) * 1e9
    dom = float(abs(freqs_hz[np.argmax(w)]))

    offs = np.asarray(config.delays, dtype=float)
    n_samp = int(round(config.window / config.step))
    t = offs[:, None] + np.arange(n_samp)[None, :] * config.step
    decay = np.exp(-t / config.t2r_true) if math.isfinite(config.t2r_true) else np.ones_like(t)
    v = decay * np.sum(w[None, None, :] * np.cos(TWO_PI * freqs_hz[None, None, :] * t[:, :, None]), axis=2)
    return RamseySignal(
        times=t,
        values=v + offset,
        window_offsets=offs,
        step=config.step,
        dominant_beat=dom,
        component_freqs=freqs_hz,
        component_weights=w,
    )


@dataclass(frozen=True)
class T2REstimate:
    """Windowed-Ramsey decay estimate (seconds) with fit diagnostics."""

    t2r: float
    t2r_stderr: float
    rate: float
    rate_stderr: float
    frequency: float
    window_offsets: np.ndarray
    window_amplitudes: np.ndarray


def _window_lsq(t: np.ndarray, v: np.ndarray, f: float):
    """Exact linear fit of a*cos + b*sin + c at fixed frequency f (Hz)."""
    basis = np.column_stack([
        np.cos(TWO_PI * f * t),
        np.sin(TWO_PI * f * t),
        np.ones_like(t),
    ])
    coef, res, *_ = np.linalg.lstsq(basis, v, rcond=None)
    resid = v - basis @ coef
    return coef, float(resid @ resid)


def extract_t2r(signal: RamseySignal, f_beat: float | None = None) -> T2REstimate:
    """Shared-frequency windowed amplitude fit, then exponential decay fit.

    The beat frequency is refined once over all windows (per-window fits are
    linear at fixed frequency), each window then contributes an oscillation
    amplitude, and the amplitudes versus offset are fit with A0*exp(-r*t).

    Args:
        signal: windowed samples.
        f_beat: expected dominant beat in Hz; defaults to the signal's own.

    Raises:
        AliasingError: sampling step too coarse for the beat (step must be
            at most 1/(4*f_beat)).
        FitError: the amplitude decay fit failed.
    """
    if f_beat is None:
        f_beat = signal.dominant_beat
    if signal.times.shape[0] < 3:
        raise ValueError("need at least 3 windows")
    if f_beat > 0:
        required = 1.0 / (4.0 * f_beat)
        if signal.step > required:
            raise AliasingError(
                f"sampling step {signal.step:.3e} s cannot resolve a "
                f"{f_beat:.3e} Hz beat; step <= {required:.3e} s required"
            )

    nyquist = 0.5 / signal.step

    def total_residual(f: float) -> float:
        return sum(
            _window_lsq(signal.times[i], signal.values[i], f)[1]
            for i in range(signal.times.shape[0])
        )

    if f_beat > 0:
        span = max(0.02 * f_beat, 1.0 / (signal.times.shape[1] * signal.step) * 0.5)
        lo, hi = max(f_beat - span, 0.0), min(f_beat + span, nyquist)
        res = minimize_scalar(total_residual, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-4 * max(f_beat, 1.0)})
        f_hat = float(res.x)
    else:
        f_hat = 0.0

    amps = np.empty(signal.times.shape[0])
    for i in range(signal.times.shape[0]):
        coef, _ = _window_lsq(signal.times[i], signal.values[i], f_hat)
        amps[i] = math.hypot(coef[0], coef[1])

    offs = signal.window_offsets
    scale = float(np.max(amps))
    if scale <= 0:
        raise FitError("all window amplitudes are zero")

    def model(t, a0, r):
        return a0 * np.exp(-r * t)

    try:
        popt, pcov = curve_fit(
            model, offs, amps / scale, p0=(1.0, 1.0 / max(offs[-1], 1e-12)),
            maxfev=10000,
        )
    except Exception as exc:
        raise FitError(f"amplitude decay fit failed: {exc}") from exc
    a0, rate = popt
    rate_err = float(np.sqrt(max(pcov[1, 1], 0.0)))
    if rate > 0:
        t2r = 1.0 / rate
        t2r_err = rate_err / rate**2
    else:
        t2r = math.inf
        t2r_err = math.inf
    return T2REstimate(
        t2r=float(t2r),
        t2r_stderr=float(t2r_err),
        rate=float(rate),
        rate_stderr=rate_err,
        frequency=f_hat,
        window_offsets=offs,
        window_amplitudes=amps,
    )
