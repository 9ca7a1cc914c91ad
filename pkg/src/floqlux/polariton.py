"""Cavity-qubit sideband couplings: Floquet dipole elements, rotating-wave
phase coefficients, and polariton manifold fits.

Two routes to the drive-induced sideband couplings of the 0 -> 3 transition
near its crossing with the cavity:

* exact: the m-th harmonic dipole element of the Floquet states,
  g_m = g_cap * <phi_3^(m)| n |phi_0^(0)>, using the dominant (n = 0) block
  of the ground Floquet state as reference;

* rotating-wave: the modulated transition accumulates the phase
  eta(t) = 2*pi * int_0^t [zeta(xi*cos(2*pi*Om*tau)) - zeta_bar] dtau,
  whose harmonic content A_n = (1/T) int e^{-i n 2*pi*Om*t} e^{i eta} dt
  redistributes a static coupling over sidebands,
  g_n = (g/2) A_n + (g'/4)(A_{n-1} + A_{n+1}).

The mean transition shift zeta_bar is removed from the integrand (it would
otherwise grow a nonperiodic phase ramp) and reported separately.  For a
linear dispersion zeta = lam*dphi the coefficients are exactly Bessel,
A_n = J_n(lam*xi/Om).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .circuit import CircuitParams, FluxBias, diagonalize_static, transition_spline
from .errors import ConvergenceError, FitError, OutOfWindowError
from .floquet import FloquetSolution
from .units import TWO_PI

__all__ = [
    "CavityParams",
    "RWAParams",
    "PhaseCoefficients",
    "PolaritonFit",
    "floquet_dipole_coupling",
    "rwa_phase_coefficients",
    "rwa_coupling",
    "rwa_params_from_circuit",
    "polariton_manifold_eigs",
    "fit_polariton",
    "synth_polariton_data",
]


@dataclass(frozen=True)
class CavityParams:
    """Readout cavity: frequency and capacitive coupling strength (GHz).

    ``g_cap`` multiplies the charge matrix element; its default is a
    placeholder of the right order (tens of MHz m = 0 splitting near the
    0 -> 3 crossing), not a measured device value, and should be calibrated
    against data when available.
    """

    omega_c: float = 7.30
    g_cap: float = 0.15

    def __post_init__(self) -> None:
        if not (self.omega_c > 0 and self.g_cap >= 0):
            raise ValueError("omega_c must be positive and g_cap non-negative")


def floquet_dipole_coupling(
    sol: FloquetSolution, spectrum, cavity: CavityParams, m: int, level: int = 3
) -> complex:
    """Sideband coupling g_m = g_cap * <phi_level^(m)| n |phi_0^(0)>.

    ``spectrum`` supplies the charge matrix elements (pass None to reuse the
    one the solution was built from).  The modulus is gauge independent; the
    phase depends on the eigenvector gauge.

    Raises:
        OutOfWindowError: when |m| exceeds the solution's sideband window.
        ValueError: when the solution does not hold ``level``.
    """
    if level >= sol.n_levels:
        raise ValueError(f"solution holds levels < {sol.n_levels}, asked for {level}")
    if spectrum is None:
        spectrum = sol.spectrum
    d = sol.n_levels
    n_op = spectrum.n_elements[:d, :d]
    bra = sol.block(level, m)
    ket = sol.block(0, 0)
    return complex(cavity.g_cap * (bra.conj() @ n_op @ ket))


@dataclass(frozen=True)
class RWAParams:
    """Rotating-wave model of the modulated 0 -> 3 transition.

    The model and the exact Floquet dipole elements use different overall
    conventions (the rotating-frame derivation halves the cosine coupling),
    so cross-model comparisons are made on couplings normalized by their
    own zero-modulation m = 0 value, where the convention factor cancels.

    Attributes:
        omega3: static transition frequency at the bias point, GHz.
        g: static dipole coupling g_cap * <3|n|0>, GHz.
        g_prime: amplitude of the drive-induced coupling modulation, GHz.
        zeta: transition-frequency shift in GHz as a function of the flux
            excursion dphi (Phi_0 units); must vanish at dphi = 0.
    """

    omega3: float
    g: float
    g_prime: float
    zeta: object

    def __post_init__(self) -> None:
        if not self.omega3 > 0:
            raise ValueError("omega3 must be positive")
        z0 = float(self.zeta(0.0))
        if abs(z0) > 1e-9:
            raise ValueError(f"zeta(0) must vanish, got {z0!r}")


@dataclass(frozen=True, eq=False)
class PhaseCoefficients:
    """Harmonic coefficients A_n of the accumulated-phase factor e^{i eta(t)}.

    The stored window is at least the requested range and wide enough to hold
    all non-negligible weight; ``completeness`` is sum |A_n|^2 over it.
    ``mean_detuning`` is the period average of zeta removed before
    integration (an effective static shift of the transition).
    """

    n_values: np.ndarray
    coefficients: np.ndarray
    mean_detuning: float
    completeness: float

    def __post_init__(self) -> None:
        self.n_values.setflags(write=False)
        self.coefficients.setflags(write=False)

    def get(self, n: int) -> complex:
        kmax = int(self.n_values[-1])
        if abs(n) > kmax:
            raise OutOfWindowError(f"A_{n} outside the stored window |n| <= {kmax}")
        return complex(self.coefficients[n + kmax])


def _zeta_samples(zeta, dphi: np.ndarray) -> np.ndarray:
    vals = zeta(dphi)
    vals = np.asarray(vals, dtype=float)
    if vals.shape != dphi.shape:  # scalar-only callable: sample pointwise
        vals = np.array([float(zeta(x)) for x in dphi])
    return vals


def rwa_phase_coefficients(rwa: RWAParams, drive, n_range: int = 10) -> PhaseCoefficients:
    """Phase-factor harmonics A_n by spectrally accurate periodic quadrature.

    zeta is sampled on a uniform grid over one drive period and integrated
    through its Fourier series (exact for the trigonometric interpolant, with
    the grid doubled until the coefficients stabilize), which for smooth
    periodic integrands converges faster than any power of the step.

    Raises:
        ConvergenceError: grid doubling failed to stabilize, or the stored
            window cannot reach completeness 1 - 1e-8.
    """
    omega = drive.omega
    xi = drive.xi
    m = 1024
    prev = None
    mean_shift = 0.0
    for _ in range(8):
        t = np.arange(m) / (m * omega)
        z = _zeta_samples(rwa.zeta, xi * np.cos(TWO_PI * omega * t))
        mean_shift = float(np.mean(z))
        c = np.fft.fft(z - mean_shift) / m
        k = np.rint(np.fft.fftfreq(m) * m).astype(int)
        d = np.zeros(m, dtype=complex)
        nz = k != 0
        d[nz] = c[nz] / (1j * k[nz] * omega)
        eta = m * np.fft.ifft(d) - np.sum(d)
        if float(np.max(np.abs(eta.imag))) > 1e-9:
            raise ConvergenceError("phase integral developed an imaginary part")
        a = np.fft.fft(np.exp(1j * eta.real)) / m
        if prev is not None and prev.size <= a.size:
            half = prev.size // 2
            common_prev = np.concatenate([prev[:half], prev[-half:]])
            common_cur = np.concatenate([a[:half], a[-half:]])
            if float(np.max(np.abs(common_prev - common_cur))) < 1e-13:
                break
        prev = a
        m *= 2
    else:
        raise ConvergenceError("phase-coefficient quadrature did not stabilize")

    # choose the stored window: requested range, widened until the missing
    # weight drops below 1e-12 (capped well inside the alias-free region)
    mm = a.size
    kmax = n_range
    cap = mm // 4
    def window_weight(kk):
        idx = np.r_[0 : kk + 1, mm - kk : mm] if kk > 0 else np.array([0])
        return float(np.sum(np.abs(a[idx]) ** 2))
    while kmax < cap and 1.0 - window_weight(kmax) > 1e-12:
        kmax += 5
    weight = window_weight(kmax)
    if weight < 1.0 - 1e-8:
        raise ConvergenceError(
            f"phase coefficients reach completeness {weight:.12f} < 1 - 1e-8 "
            f"within |n| <= {kmax}; modulation too strong for the window"
        )
    coeffs = np.concatenate([a[mm - kmax :], a[: kmax + 1]])
    return PhaseCoefficients(
        n_values=np.arange(-kmax, kmax + 1),
        coefficients=coeffs,
        mean_detuning=mean_shift,
        completeness=weight,
    )


def rwa_coupling(rwa: RWAParams, coeffs: PhaseCoefficients, n: int) -> complex:
    """Sideband coupling g_n = (g/2) A_n + (g'/4)(A_{n-1} + A_{n+1})."""
    return 0.5 * rwa.g * coeffs.get(n) + 0.25 * rwa.g_prime * (
        coeffs.get(n - 1) + coeffs.get(n + 1)
    )


def rwa_params_from_circuit(
    params: CircuitParams,
    bias0: float,
    cavity: CavityParams,
    xi: float,
    span: float = 0.04,
    num: int = 41,
) -> RWAParams:
    """Build the rotating-wave model of the 0 -> 3 transition at ``bias0``.

    omega3 and zeta come from a cubic-spline dispersion of the transition
    over ``bias0 +/- span``; g = g_cap * |n_03| at the bias point, and
    g' is the flux derivative of that coupling times the drive amplitude.
    """
    spline = transition_spline(params, 0, 3, bias0 - span, bias0 + span, num)
    omega3 = float(spline(bias0))

    def zeta(dphi):
        return spline(bias0 + np.asarray(dphi)) - omega3

    def g_of(phi: float) -> float:
        spec = diagonalize_static(params, FluxBias(phi))
        return cavity.g_cap * abs(spec.n_elements[0, 3])

    h = 1e-4
    g0 = g_of(bias0)
    dg = (g_of(bias0 - 2 * h) - 8 * g_of(bias0 - h) + 8 * g_of(bias0 + h) - g_of(bias0 + 2 * h)) / (12 * h)
    return RWAParams(omega3=omega3, g=g0, g_prime=xi * dg, zeta=zeta)


# ---------------------------------------------------------------------------
# polariton manifold and fits
# ---------------------------------------------------------------------------

_FIT_M_VALUES = tuple(range(-2, 4))


def polariton_manifold_eigs(
    cavity: CavityParams,
    omega3: float,
    drive_omega: float,
    fit,
    delta_m=None,
) -> np.ndarray:
    """Sorted eigenvalues of the one-excitation cavity/sideband manifold.

    The 7x7 matrix couples the bare cavity at omega_c to the sideband images
    of the 0 -> 3 transition at omega3 + m*Omega + delta_m for m = -2..3,
    with coupling |g_m| between the cavity and image m.  ``fit`` is either a
    PolaritonFit or a mapping m -> g_m (then ``delta_m`` maps m -> shift).
    """
    if isinstance(fit, PolaritonFit):
        g_m, delta_m = fit.g_m, fit.delta_m
    else:
        g_m = fit
    size = 1 + len(_FIT_M_VALUES)
    h = np.zeros((size, size))
    h[0, 0] = cavity.omega_c
    for i, m in enumerate(_FIT_M_VALUES, start=1):
        gm = abs(g_m.get(m, 0.0)) if hasattr(g_m, "get") else abs(g_m[m])
        dm = 0.0
        if delta_m is not None:
            dm = float(delta_m.get(m, 0.0)) if hasattr(delta_m, "get") else float(delta_m[m])
        h[i, i] = omega3 + m * drive_omega + dm
        h[0, i] = h[i, 0] = gm
    return np.linalg.eigvalsh(h)


@dataclass(frozen=True, eq=False)
class PolaritonFit:
    """Result of fitting sideband couplings to avoided-crossing data.

    ``g_m``/``delta_m`` map each sideband index to its fitted coupling and
    detuning; unidentifiable sidebands (no data near their crossing) are
    pinned to zero, listed in ``unidentifiable``, and carry infinite error.
    """

    g_m: dict
    delta_m: dict
    g_err: dict
    residual: float
    unidentifiable: tuple[int, ...]
    n_evaluations: int
    success: bool


def synth_polariton_data(
    cavity: CavityParams,
    omega3_curve,
    drive_omega: float,
    g_m,
    delta_m,
    phis,
    sigma: float = 0.0,
    rng: np.random.Generator | None = None,
    branch_window: float = 0.25,
):
    """Simulated transmission-peak data (phi, freq[, sigma]) near the cavity.

    For each flux the manifold eigenvalues within ``branch_window`` of the
    cavity are emitted, optionally jittered by gaussian noise of scale
    ``sigma`` (GHz).
    """
    rows = []
    for phi in np.atleast_1d(phis):
        eigs = polariton_manifold_eigs(cavity, float(omega3_curve(phi)), drive_omega, g_m, delta_m)
        for e in eigs:
            if abs(e - cavity.omega_c) <= branch_window:
                rows.append((float(phi), float(e)))
    data = np.array(rows)
    if sigma > 0:
        if rng is None:
            rng = np.random.default_rng(0)
        data = np.column_stack([data[:, 0], data[:, 1] + rng.normal(0, sigma, data.shape[0]),
                                np.full(data.shape[0], sigma)])
    return data


def fit_polariton(
    data: np.ndarray,
    cavity: CavityParams,
    omega3_curve,
    drive_omega: float,
    capture_window: float = 0.12,
    max_restarts: int = 4,
) -> PolaritonFit:
    """Fit sideband couplings g_m (m = -2..3) and detunings to peak data.

    ``data`` is an (N, 2) or (N, 3) array of (phi, freq_ghz[, sigma_ghz]);
    each point contributes the distance to the nearest manifold eigenvalue.
    A sideband is identifiable only when some data point lies within
    ``capture_window`` (GHz) of its bare crossing; the rest are pinned at
    g_m = 0, delta_m = 0.  Initialization and restarts are deterministic, so
    the fit is reproducible for fixed data.

    Raises:
        FitError: when every restart fails to converge.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] not in (2, 3):
        raise ValueError("data must be (N, 2) or (N, 3): phi, freq[, sigma]")
    if data.shape[0] < 5:
        raise ValueError("need at least 5 data points")
    phis = data[:, 0]
    freqs = data[:, 1]
    sigmas = data[:, 2] if data.shape[1] == 3 else np.ones_like(freqs)
    if np.any(sigmas <= 0):
        raise ValueError("sigmas must be positive")
    omega3s = np.array([float(omega3_curve(p)) for p in phis])

    active = []
    for m in _FIT_M_VALUES:
        gap = np.abs(omega3s + m * drive_omega - cavity.omega_c)
        if np.any(gap < capture_window):
            active.append(m)
    pinned = tuple(m for m in _FIT_M_VALUES if m not in active)
    if not active:
        raise FitError("no sideband crossing is covered by the data")

    n_act = len(active)

    def unpack(x):
        g = {m: 0.0 for m in _FIT_M_VALUES}
        d = {m: 0.0 for m in _FIT_M_VALUES}
        for i, m in enumerate(active):
            g[m] = abs(x[i])
            d[m] = x[n_act + i]
        return g, d

    # batched manifold: one 7x7 per data point, eigendecomposed together
    size = 1 + len(_FIT_M_VALUES)
    base = np.zeros((freqs.size, size, size))
    base[:, 0, 0] = cavity.omega_c
    for j, m in enumerate(_FIT_M_VALUES, start=1):
        base[:, j, j] = omega3s + m * drive_omega

    def residuals(x):
        g, d = unpack(x)
        h = base.copy()
        for j, m in enumerate(_FIT_M_VALUES, start=1):
            h[:, j, j] += d[m]
            h[:, 0, j] = h[:, j, 0] = g[m]
        eigs = np.linalg.eigvalsh(h)
        return np.min(np.abs(eigs - freqs[:, None]), axis=1) / sigmas

    starts = []
    for g0 in (0.005, 0.02, 0.05, 0.1)[: max_restarts + 1]:
        starts.append(np.concatenate([np.full(n_act, g0), np.zeros(n_act)]))

    best = None
    n_eval = 0
    best_failed = None
    for x0 in starts:
        try:
            res = least_squares(
                residuals,
                x0,
                bounds=(
                    np.concatenate([np.zeros(n_act), np.full(n_act, -0.2)]),
                    np.concatenate([np.full(n_act, 0.5), np.full(n_act, 0.2)]),
                ),
                method="trf",
                xtol=1e-14,
                ftol=1e-14,
                gtol=1e-14,
            )
        except Exception:
            continue
        n_eval += res.nfev
        if res.status > 0 and (best is None or res.cost < best.cost):
            best = res
        elif best_failed is None or res.cost < best_failed.cost:
            best_failed = res
    if best is None:
        err = FitError("polariton fit failed to converge from every start")
        if best_failed is not None:
            g_bad, d_bad = unpack(best_failed.x)
            err.best_g_m = g_bad
            err.best_delta_m = d_bad
            err.residual = float(np.sqrt(np.mean((best_failed.fun * sigmas) ** 2)))
        raise err

    g_fit, d_fit = unpack(best.x)
    dof = max(freqs.size - 2 * n_act, 1)
    var = 2.0 * best.cost / dof
    jtj = best.jac.T @ best.jac
    try:
        cov = var * np.linalg.pinv(jtj)
        perr = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        perr = np.full(2 * n_act, np.inf)
    g_err = {m: math.inf for m in _FIT_M_VALUES}
    for i, m in enumerate(active):
        g_err[m] = float(perr[i])
    rms = float(np.sqrt(np.mean((best.fun * sigmas) ** 2)))
    return PolaritonFit(
        g_m=g_fit,
        delta_m=d_fit,
        g_err=g_err,
        residual=rms,
        unidentifiable=pinned,
        n_evaluations=n_eval,
        success=True,
    )
