"""Decoherence of the driven qubit: noise spectra, filter weights, rates.

Rates are computed in 1/s from golden-rule sums over the drive harmonics.
With eps01 the natural quasienergy splitting (difference of representative
Sambe eigenvalues, GHz) and phi_ab^(k) the Fourier matrix elements of the
phase operator between Floquet states,

    gamma_-/+ = sum_k |phi_01^(k)|^2 [ S_diel(k*Om +/- eps01)
                                       + E_L^2 * S~_dc(k*Om +/- eps01) ]
              + sum_k (1/4)|phi_01^(k+1) + phi_01^(k-1)|^2
                                         E_L^2 * S~_ac(k*Om +/- eps01)

    gamma_phi = sqrt|ln(w_ir t_m)| * sqrt( A_dc^2 (d eps01 / d phi_dc)^2
                                         + A_ac^2 (d eps01 / d xi)^2 )
              + sum_{k!=0} (1/2)|phi_11^(k) - phi_00^(k)|^2
                                 [ S_diel(k*Om) + E_L^2 S~_dc(k*Om) ]
              + sum_{k!=0} (1/8)|phi_00^(k+1) + phi_00^(k-1)
                                 - phi_11^(k+1) - phi_11^(k-1)|^2
                                 E_L^2 S~_ac(k*Om)

where every frequency is converted to rad/s before hitting a spectral
density, E_L enters as an angular energy, and the derivatives in the 1/f
term are angular (rad/s per flux quantum).  gamma_- relaxes (its k = 0 term
samples the spectra at +eps01), gamma_+ excites.

The quasienergy derivatives come in two flavors that must agree: closed
matrix-element forms

    d eps01 / d phi_dc = -2*pi*E_L * (phi_11^(0) - phi_00^(0))        [GHz/Phi_0]
    d eps01 / d xi     = -pi*E_L  * (phi_11^(1) + phi_11^(-1)
                                     - phi_00^(1) - phi_00^(-1))      [GHz/Phi_0]

(the minus signs follow from perturbing the inductive term, whose linear
piece is -2*pi*E_L*phi*delta_phi), and five-point central finite
differences of the tracked splitting with Richardson step control.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar, k as k_boltzmann
from scipy.optimize import brentq, root

from .circuit import CircuitParams, FluxBias, StaticSpectrum, diagonalize_static
from .errors import (
    ConvergenceError,
    InfraredDivergenceError,
    OutOfWindowError,
    TrackingBreakError,
)
from .floquet import (
    DriveParams,
    FloquetSolution,
    SambeConfig,
    _shifted_overlap,
    solve_floquet,
)
from .units import ghz_to_angular

__all__ = [
    "NoiseModel",
    "FourierMatrixElements",
    "QuasienergyDerivatives",
    "DepolarizationRates",
    "DephasingRate",
    "CoherenceRates",
    "FilterWeights",
    "TwoLevelReduction",
    "SweetSpot",
    "SweetSpotScan",
    "s_dc",
    "s_ac",
    "s_diel",
    "fourier_matrix_elements",
    "charge_fourier_elements",
    "depolarization_rates",
    "pure_dephasing_rate",
    "quasienergy_derivatives",
    "coherence_rates",
    "find_sweet_spots",
    "two_level_reduction",
    "filter_weights",
]


@dataclass(frozen=True)
class NoiseModel:
    """Noise amplitudes and environment parameters.

    Attributes:
        a_dc: 1/f flux-noise amplitude, units of Phi_0.
        a_ac: 1/f drive-amplitude-noise amplitude, units of Phi_0.
        tan_delta_c: capacitive dielectric loss tangent.
        temperature: bath temperature in kelvin.
        omega_ir: infrared cutoff of the 1/f integrals, ordinary GHz.
        t_m: dephasing measurement timescale in seconds.

    The infrared pair must satisfy omega_ir_angular * t_m < 1 so the
    logarithm in the Gaussian 1/f dephasing envelope is negative; the
    defaults (1 Hz cutoff, 30 ns) give sqrt|ln| = 3.93.
    """

    a_dc: float = 7.5e-6
    a_ac: float = 6.0e-6
    tan_delta_c: float = 2.8e-6
    temperature: float = 0.085
    omega_ir: float = 1e-9
    t_m: float = 3e-8

    def __post_init__(self) -> None:
        for name in ("a_dc", "a_ac", "tan_delta_c", "temperature"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not (self.omega_ir > 0 and self.t_m > 0):
            raise ValueError("omega_ir and t_m must be strictly positive")
        if ghz_to_angular(self.omega_ir) * self.t_m >= 1.0:
            raise ValueError(
                "omega_ir (angular) * t_m must be < 1 for the 1/f log factor"
            )

    @property
    def ir_log_factor(self) -> float:
        """sqrt|ln(omega_ir_angular * t_m)|, the 1/f dephasing envelope factor."""
        return math.sqrt(abs(math.log(ghz_to_angular(self.omega_ir) * self.t_m)))


def s_dc(omega: float, model: NoiseModel, reduced: bool = False) -> float:
    """1/f flux-noise spectral density 2*pi*A_dc^2/|omega_angular| (units s).

    ``omega`` is an ordinary frequency in GHz; ``reduced=True`` multiplies by
    (2*pi)^2, absorbing the flux-to-phase conversion at Phi_0 = 1.

    Raises:
        InfraredDivergenceError: at omega == 0 (the 1/f divergence there is
            handled by the dedicated low-frequency dephasing term).
    """
    if omega == 0.0:
        raise InfraredDivergenceError(
            "1/f spectral density sampled at zero frequency; the divergent "
            "low-frequency content belongs to the ir-cutoff dephasing term"
        )
    val = 2.0 * math.pi * model.a_dc**2 / abs(ghz_to_angular(omega))
    return val * (2.0 * math.pi) ** 2 if reduced else val


def s_ac(omega: float, model: NoiseModel, reduced: bool = False) -> float:
    """1/f drive-amplitude-noise spectral density 2*pi*A_ac^2/|omega_angular|."""
    if omega == 0.0:
        raise InfraredDivergenceError(
            "1/f spectral density sampled at zero frequency; the divergent "
            "low-frequency content belongs to the ir-cutoff dephasing term"
        )
    val = 2.0 * math.pi * model.a_ac**2 / abs(ghz_to_angular(omega))
    return val * (2.0 * math.pi) ** 2 if reduced else val


def _thermal_bracket(w_ang: float, temperature: float) -> float:
    """|coth(hbar*w/2kT) + 1| with the detailed-balance continuation.

    For w > 0 this is coth + 1 = 2/(1 - e^{-x}); for w < 0 the magnitude
    2/(e^{|x|} - 1) = 2*n_bose, so S(-w)/S(w) = e^{-hbar*w/kT} holds with a
    positive density on both sides.
    """
    if temperature == 0.0:
        return 2.0 if w_ang > 0 else 0.0
    x = hbar * w_ang / (k_boltzmann * temperature)
    if x > 0:
        return 2.0 / (-math.expm1(-x))
    return 2.0 * math.exp(x) / (-math.expm1(x))


def s_diel(omega: float, params: CircuitParams, model: NoiseModel) -> float:
    """Dielectric-loss spectral density (1/s) at ordinary frequency omega (GHz).

    S(omega) = omega_ang^2 * tan_delta_c / (8 * E_C_ang) * |coth(x) + 1|,
    x = hbar*omega_ang / (2 k_B T).  omega = 0 returns the finite limit 0
    (the omega^2 * coth product scales as 2 k_B T * omega / hbar there).
    """
    if omega == 0.0:
        return 0.0
    w = ghz_to_angular(omega)
    ec = ghz_to_angular(params.e_c)
    return w * w * model.tan_delta_c / (8.0 * ec) * _thermal_bracket(w, model.temperature)


# ---------------------------------------------------------------------------
# Fourier matrix elements between Floquet states
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FourierMatrixElements:
    """Harmonic-resolved operator elements O_ab^(k) between Floquet states.

    O_ab^(k) = sum_n <phi_a^(n)| O |phi_b^(n-k)>, the coefficient of
    e^{i k Omega t} in <Phi_a(t)| O |Phi_b(t)>.  Conjugation symmetry
    O_ab^(k) = conj(O_ba^(-k)) holds by construction.
    """

    levels: tuple[int, ...]
    k_values: np.ndarray
    table: np.ndarray  # (n_lev, n_lev, n_k) complex, indexed by level position
    omega: float

    def __post_init__(self) -> None:
        self.k_values.setflags(write=False)
        self.table.setflags(write=False)

    def _pos(self, a: int) -> int:
        try:
            return self.levels.index(a)
        except ValueError:
            raise KeyError(f"level {a} not tabulated (have {self.levels})") from None

    def get(self, a: int, b: int, k: int) -> complex:
        """O_ab^(k); raises OutOfWindowError beyond the tabulated harmonics."""
        kmax = int(self.k_values[-1])
        if abs(k) > kmax:
            raise OutOfWindowError(
                f"harmonic k={k} beyond the tabulated window |k| <= {kmax}"
            )
        return complex(self.table[self._pos(a), self._pos(b), k + kmax])

    def get_or_zero(self, a: int, b: int, k: int) -> complex:
        """Like ``get`` but out-of-window harmonics count as zero.

        Used for the k +/- 1 neighbors in amplitude-noise sums, whose
        edge-of-window content is below truncation error anyway.
        """
        kmax = int(self.k_values[-1])
        if abs(k) > kmax:
            return 0.0 + 0.0j
        return complex(self.table[self._pos(a), self._pos(b), k + kmax])


def fourier_operator_elements(
    sol: FloquetSolution, op: np.ndarray, levels: tuple[int, ...] = (0, 1)
) -> FourierMatrixElements:
    """Tabulate O_ab^(k) for the given operator (static-eigenbasis matrix)."""
    d = sol.n_levels
    op = np.asarray(op)[:d, :d]
    nb = sol.fourier_blocks.shape[1]
    kmax = nb - 1
    nk = 2 * kmax + 1
    table = np.zeros((len(levels), len(levels), nk), dtype=complex)
    transformed = {b: sol.fourier_blocks[b] @ op.T for b in levels}
    for ia, a in enumerate(levels):
        blocks_a = sol.fourier_blocks[a].conj()
        for ib, b in enumerate(levels):
            ob = transformed[b]
            for j, k in enumerate(range(-kmax, kmax + 1)):
                if k >= 0:
                    table[ia, ib, j] = np.sum(blocks_a[k:] * ob[: nb - k])
                else:
                    table[ia, ib, j] = np.sum(blocks_a[: nb + k] * ob[-k:])
    return FourierMatrixElements(
        levels=tuple(levels),
        k_values=np.arange(-kmax, kmax + 1),
        table=table,
        omega=sol.drive.omega,
    )


def fourier_matrix_elements(
    sol: FloquetSolution, spectrum: StaticSpectrum | None = None
) -> FourierMatrixElements:
    """Phase-operator elements phi_ab^(k) for the qubit pair (0, 1)."""
    spectrum = spectrum if spectrum is not None else sol.spectrum
    return fourier_operator_elements(sol, spectrum.phi_elements, (0, 1))


def charge_fourier_elements(
    sol: FloquetSolution, spectrum: StaticSpectrum | None = None
) -> FourierMatrixElements:
    """Charge-operator elements n_ab^(k) for the qubit pair (0, 1)."""
    spectrum = spectrum if spectrum is not None else sol.spectrum
    return fourier_operator_elements(sol, spectrum.n_elements, (0, 1))


# ---------------------------------------------------------------------------
# golden-rule rates
# ---------------------------------------------------------------------------


def _check_sampling(freq: float, coeff: float) -> bool:
    """True when the term contributes; exact zero-frequency sampling with a
    nonzero coefficient is an infrared divergence of the 1/f spectra."""
    if coeff == 0.0:
        return False
    if freq == 0.0:
        raise InfraredDivergenceError(
            "rate sum hit a 1/f spectral density at exactly zero frequency "
            "(quasienergy resonant with a drive harmonic)"
        )
    return True


@dataclass(frozen=True)
class DepolarizationRates:
    """Golden-rule excitation/relaxation rates (1/s) and their channel split."""

    gamma_up: float
    gamma_down: float
    breakdown: dict

    @property
    def t1(self) -> float:
        tot = self.gamma_up + self.gamma_down
        return math.inf if tot == 0 else 1.0 / tot


def depolarization_rates(
    elems: FourierMatrixElements,
    sol: FloquetSolution,
    model: NoiseModel,
    params: CircuitParams,
) -> DepolarizationRates:
    """Sideband-summed depolarization rates of the Floquet qubit."""
    eps01 = sol.splitting(1, 0, branch="natural")
    omega = sol.drive.omega
    el_ang = ghz_to_angular(params.e_l)
    chans = {"dielectric": [0.0, 0.0], "dc_flux": [0.0, 0.0], "ac_amplitude": [0.0, 0.0]}
    for k in elems.k_values:
        k = int(k)
        w01 = abs(elems.get(0, 1, k)) ** 2
        pair = elems.get_or_zero(0, 1, k + 1) + elems.get_or_zero(0, 1, k - 1)
        wac = 0.25 * abs(pair) ** 2
        # index 0: excitation (gamma_+, spectra at k*Om - eps01)
        # index 1: relaxation (gamma_-, spectra at k*Om + eps01)
        for idx, freq in ((0, k * omega - eps01), (1, k * omega + eps01)):
            if _check_sampling(freq, w01):
                chans["dielectric"][idx] += w01 * s_diel(freq, params, model)
                chans["dc_flux"][idx] += w01 * el_ang**2 * s_dc(freq, model, reduced=True)
            if _check_sampling(freq, wac):
                chans["ac_amplitude"][idx] += (
                    wac * el_ang**2 * s_ac(freq, model, reduced=True)
                )
    gamma_up = sum(v[0] for v in chans.values())
    gamma_down = sum(v[1] for v in chans.values())
    breakdown = {name: {"up": v[0], "down": v[1]} for name, v in chans.items()}
    return DepolarizationRates(gamma_up=gamma_up, gamma_down=gamma_down, breakdown=breakdown)


@dataclass(frozen=True)
class DephasingRate:
    """Pure dephasing rate (1/s) with the low-frequency and sideband parts."""

    gamma_phi: float
    breakdown: dict

    @property
    def tphi(self) -> float:
        return math.inf if self.gamma_phi == 0 else 1.0 / self.gamma_phi


def pure_dephasing_rate(
    elems: FourierMatrixElements,
    sol: FloquetSolution,
    model: NoiseModel,
    params: CircuitParams,
    derivatives: "QuasienergyDerivatives | None" = None,
    derivative_method: str = "matrix_element",
) -> DephasingRate:
    """Pure dephasing from 1/f flux and amplitude noise plus sideband terms.

    The low-frequency term needs the quasienergy derivatives; by default the
    closed matrix-element forms are evaluated from ``elems`` directly.  Pass
    a ``QuasienergyDerivatives`` and ``derivative_method="finite_difference"``
    to use the tracked finite-difference values instead.
    """
    if derivative_method == "matrix_element":
        if derivatives is None:
            derivatives = quasienergy_derivatives(sol, elems, params, fd=False)
        d_flux, d_xi = derivatives.flux_me, derivatives.xi_me
    elif derivative_method == "finite_difference":
        if derivatives is None or derivatives.flux_fd is None or derivatives.xi_fd is None:
            raise ValueError("finite-difference derivatives not available")
        d_flux, d_xi = derivatives.flux_fd, derivatives.xi_fd
    else:
        raise ValueError(f"unknown derivative_method {derivative_method!r}")
    first = model.ir_log_factor * math.sqrt(
        model.a_dc**2 * ghz_to_angular(d_flux) ** 2
        + model.a_ac**2 * ghz_to_angular(d_xi) ** 2
    )
    omega = sol.drive.omega
    el_ang = ghz_to_angular(params.e_l)
    diel_sum = dc_sum = ac_sum = 0.0
    for k in elems.k_values:
        k = int(k)
        if k == 0:
            continue
        wz = 0.5 * abs(elems.get(1, 1, k) - elems.get(0, 0, k)) ** 2
        pair = (
            elems.get_or_zero(0, 0, k + 1)
            + elems.get_or_zero(0, 0, k - 1)
            - elems.get_or_zero(1, 1, k + 1)
            - elems.get_or_zero(1, 1, k - 1)
        )
        wac = abs(pair) ** 2 / 8.0
        freq = k * omega
        if _check_sampling(freq, wz):
            diel_sum += wz * s_diel(freq, params, model)
            dc_sum += wz * el_ang**2 * s_dc(freq, model, reduced=True)
        if _check_sampling(freq, wac):
            ac_sum += wac * el_ang**2 * s_ac(freq, model, reduced=True)
    total = first + diel_sum + dc_sum + ac_sum
    return DephasingRate(
        gamma_phi=total,
        breakdown={
            "low_frequency": first,
            "dielectric": diel_sum,
            "dc_flux": dc_sum,
            "ac_amplitude": ac_sum,
        },
    )


# ---------------------------------------------------------------------------
# quasienergy derivatives: matrix-element forms and tracked finite differences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasienergyDerivatives:
    """d eps01 / d phi_dc and d eps01 / d xi, in GHz per flux quantum.

    ``*_me`` are the closed matrix-element forms; ``*_fd`` the Richardson-
    extrapolated five-point finite differences with error estimates, or None
    when not requested or when branch tracking broke inside the stencil.
    """

    flux_me: float
    xi_me: float
    flux_fd: float | None = None
    flux_fd_err: float | None = None
    xi_fd: float | None = None
    xi_fd_err: float | None = None
    tracking_break: bool = False


def _matrix_element_derivatives(elems: FourierMatrixElements, params: CircuitParams):
    d00 = elems.get(0, 0, 0).real
    d11 = elems.get(1, 1, 0).real
    flux = -2.0 * math.pi * params.e_l * (d11 - d00)
    x11 = (elems.get(1, 1, 1) + elems.get(1, 1, -1)).real
    x00 = (elems.get(0, 0, 1) + elems.get(0, 0, -1)).real
    xi = -math.pi * params.e_l * (x11 - x00)
    return flux, xi


def _matched_eps01(
    params: CircuitParams,
    drive: DriveParams,
    config: SambeConfig,
    ref: FloquetSolution,
) -> float:
    """eps01 at a shifted parameter point, branch-matched to ``ref``.

    Floquet representatives at the shifted point are matched to the
    reference levels 0 and 1 through block overlaps (including harmonic
    translations and the change of static eigenbasis), so the returned
    splitting continues the reference branch instead of jumping zones.
    """
    sol = solve_floquet(params, drive, config, check_convergence=False)
    rot = ref.spectrum.eigenvectors[:, : config.n_levels].T @ sol.spectrum.eigenvectors[
        :, : config.n_levels
    ]
    matched = []
    for a in (0, 1):
        ref_blocks = ref.fourier_blocks[a] @ rot
        best, best_k, best_b = 0.0, 0, -1
        for b in range(sol.n_levels):
            for k in range(-3, 4):
                o = abs(_shifted_overlap(ref_blocks, sol.fourier_blocks[b], k))
                if o > best:
                    best, best_k, best_b = o, k, b
        if best <= 0.5:
            raise TrackingBreakError(
                f"branch tracking lost level {a} at drive={drive!r} (best overlap {best:.3f})"
            )
        matched.append(sol.rep_energies[best_b] - best_k * drive.omega)
    return float(matched[1] - matched[0])


def _five_point(f, x0: float, h: float) -> float:
    return (f(x0 - 2 * h) - 8 * f(x0 - h) + 8 * f(x0 + h) - f(x0 + 2 * h)) / (12.0 * h)


def _adaptive_fd(f, x0: float, h0: float, max_halvings: int = 5, rtol: float = 1e-8):
    """Five-point derivative with step halving and Richardson combination.

    Quasienergy branches can wiggle on fine parameter scales near sideband
    anticrossings, so the truncation error of a fixed step is untrustworthy;
    halve until consecutive estimates agree (or stop improving) and return
    the best Richardson pair with |D(h/2) - D(h)|/15 as the error estimate.
    """
    cache: dict[float, float] = {}

    def fc(x: float) -> float:
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    h = h0
    d_prev = _five_point(fc, x0, h)
    best_val, best_err = d_prev, math.inf
    for _ in range(max_halvings):
        h *= 0.5
        d_cur = _five_point(fc, x0, h)
        diff = abs(d_cur - d_prev)
        if diff / 15.0 < best_err:
            best_val = (16.0 * d_cur - d_prev) / 15.0
            best_err = diff / 15.0
        if diff <= rtol * max(abs(d_cur), 1e-30):
            break
        d_prev = d_cur
    return best_val, best_err


def quasienergy_derivatives(
    sol: FloquetSolution,
    elems: FourierMatrixElements | None = None,
    params: CircuitParams | None = None,
    fd: bool = False,
    fd_step: float = 1e-4,
) -> QuasienergyDerivatives:
    """Quasienergy-splitting derivatives at the solution's drive point.

    The matrix-element forms are always computed.  With ``fd=True`` the
    five-point central differences are evaluated at steps h and h/2 and
    Richardson-combined; a branch-tracking break inside either stencil
    leaves the finite-difference fields None and sets ``tracking_break``.
    """
    if params is None:
        params = sol.spectrum.params
    if elems is None:
        elems = fourier_matrix_elements(sol, sol.spectrum)
    flux_me, xi_me = _matrix_element_derivatives(elems, params)
    if not fd:
        return QuasienergyDerivatives(flux_me=flux_me, xi_me=xi_me)

    drive = sol.drive
    cfg = sol.config

    def eps_flux(x: float) -> float:
        return _matched_eps01(
            params, DriveParams(FluxBias(x), drive.xi, drive.omega), cfg, sol
        )

    def eps_xi(x: float) -> float:
        # eps01 is even in xi; reflect so DriveParams stays in its domain
        return _matched_eps01(
            params, DriveParams(drive.bias, abs(x), drive.omega), cfg, sol
        )

    flux_fd = flux_err = xi_fd = xi_err = None
    broke = False
    try:
        flux_fd, flux_err = _adaptive_fd(eps_flux, drive.bias.phi_dc, fd_step)
    except TrackingBreakError:
        broke = True
    try:
        if drive.xi == 0.0:
            xi_fd, xi_err = 0.0, 0.0  # even function: exact at xi = 0
        else:
            h = min(fd_step, 0.45 * drive.xi)  # keep the stencil at xi > 0
            xi_fd, xi_err = _adaptive_fd(eps_xi, drive.xi, h)
    except TrackingBreakError:
        broke = True
    return QuasienergyDerivatives(
        flux_me=flux_me,
        xi_me=xi_me,
        flux_fd=flux_fd,
        flux_fd_err=flux_err,
        xi_fd=xi_fd,
        xi_fd_err=xi_err,
        tracking_break=broke,
    )


# ---------------------------------------------------------------------------
# combined coherence summary
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoherenceRates:
    """Rates in 1/s and times in s for one drive point."""

    gamma_up: float
    gamma_down: float
    gamma_phi: float
    t1: float
    t2r: float
    tphi: float
    breakdown: dict
    derivatives: QuasienergyDerivatives


def coherence_rates(
    params: CircuitParams,
    drive: DriveParams,
    model: NoiseModel,
    config: SambeConfig = SambeConfig(),
    sol: FloquetSolution | None = None,
    fd: bool = False,
) -> CoherenceRates:
    """Solve (or reuse) the Floquet problem and assemble all rates."""
    if sol is None:
        sol = solve_floquet(params, drive, config)
    elems = fourier_matrix_elements(sol, sol.spectrum)
    derivs = quasienergy_derivatives(sol, elems, params, fd=fd)
    depol = depolarization_rates(elems, sol, model, params)
    deph = pure_dephasing_rate(elems, sol, model, params, derivatives=derivs)
    t1 = depol.t1
    inv_t2r = (0.0 if t1 == math.inf else 0.5 / t1) + deph.gamma_phi
    return CoherenceRates(
        gamma_up=depol.gamma_up,
        gamma_down=depol.gamma_down,
        gamma_phi=deph.gamma_phi,
        t1=t1,
        t2r=math.inf if inv_t2r == 0 else 1.0 / inv_t2r,
        tphi=deph.tphi,
        breakdown={"depolarization": depol.breakdown, "dephasing": deph.breakdown},
        derivatives=derivs,
    )


# ---------------------------------------------------------------------------
# sweet-spot location
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweetSpot:
    """A refined zero of one or both quasienergy derivatives."""

    kind: str  # "flux" | "amplitude" | "double"
    phi_dc: float
    xi: float
    omega: float
    d_flux: float
    d_xi: float
    rates: CoherenceRates | None = None


@dataclass(frozen=True)
class SweetSpotScan:
    """Refined sweet spots plus scan diagnostics (sign-change bookkeeping)."""

    spots: tuple[SweetSpot, ...]
    diagnostics: dict


def _derivative_field(params, grid_phi, grid_xi, grid_omega, config):
    """Matrix-element derivative tables over the cartesian grid."""
    spectra: dict[float, StaticSpectrum] = {}
    shape = (len(grid_phi), len(grid_xi), len(grid_omega))
    d1 = np.empty(shape)
    d2 = np.empty(shape)
    for i, phi in enumerate(grid_phi):
        spec = spectra.setdefault(phi, diagonalize_static(params, FluxBias(phi)))
        for j, xi in enumerate(grid_xi):
            for l, om in enumerate(grid_omega):
                drive = DriveParams(FluxBias(phi), xi, om)
                sol = solve_floquet(params, drive, config, spectrum=spec, check_convergence=False)
                elems = fourier_matrix_elements(sol, spec)
                d1[i, j, l], d2[i, j, l] = _matrix_element_derivatives(elems, params)
    return d1, d2


def find_sweet_spots(
    params: CircuitParams,
    noise: NoiseModel | None,
    grid,
    config: SambeConfig = SambeConfig(),
    tol_d: float = 1e-4,
    refine: bool = True,
) -> SweetSpotScan:
    """Locate sweet spots of the driven qubit on a (phi_dc, xi, omega) grid.

    ``grid`` provides the three axes (each a scalar or 1D sequence).  Axes of
    length > 1 are scanned for sign changes of the matrix-element derivative
    field; 1D scans are refined by bracketing (flux-sweet spots along phi_dc,
    amplitude-sweet spots along xi), and when both xi and omega vary, cells
    where both derivatives change sign seed a joint two-dimensional root
    refinement (double sweet spots).  A refined spot is classified "double"
    only if the drive is actually on (xi > 0) and both residual derivatives
    are below ``tol_d`` (GHz per flux quantum).

    With no sign change anywhere the result has no spots and the diagnostics
    say what was scanned.  When ``noise`` is given, full coherence rates are
    attached to each refined spot.
    """
    grid_phi = tuple(np.atleast_1d(np.asarray(grid.phi_dc, dtype=float)))
    grid_xi = tuple(np.atleast_1d(np.asarray(grid.xi, dtype=float)))
    grid_om = tuple(np.atleast_1d(np.asarray(grid.omega, dtype=float)))
    d1, d2 = _derivative_field(params, grid_phi, grid_xi, grid_om, config)
    spectra: dict[float, StaticSpectrum] = {}

    def derivs_at(phi: float, xi: float, om: float):
        spec = spectra.setdefault(phi, diagonalize_static(params, FluxBias(phi)))
        sol = solve_floquet(
            params, DriveParams(FluxBias(phi), xi, om), config, spectrum=spec, check_convergence=False
        )
        elems = fourier_matrix_elements(sol, spec)
        return _matrix_element_derivatives(elems, params)

    spots: list[SweetSpot] = []
    diags = {
        "grid_shape": (len(grid_phi), len(grid_xi), len(grid_om)),
        "flux_brackets": 0,
        "amplitude_brackets": 0,
        "double_seeds": 0,
        "refine_failures": 0,
    }

    def classify(phi, xi, om):
        df, dx = derivs_at(phi, xi, om)
        both = abs(df) < tol_d and abs(dx) < tol_d and xi > 0
        if both:
            kind = "double"
        elif abs(df) < tol_d:
            kind = "flux"
        elif abs(dx) < tol_d:
            kind = "amplitude"
        else:
            return None
        rates = None
        if noise is not None:
            spec = spectra.setdefault(phi, diagonalize_static(params, FluxBias(phi)))
            drv = DriveParams(FluxBias(phi), xi, om)
            sol = solve_floquet(params, drv, config, spectrum=spec, check_convergence=False)
            rates = coherence_rates(params, drv, noise, config, sol=sol)
        return SweetSpot(kind=kind, phi_dc=phi, xi=xi, omega=om, d_flux=df, d_xi=dx, rates=rates)

    # 1D flux scans
    if len(grid_phi) > 1:
        for j, xi in enumerate(grid_xi):
            for l, om in enumerate(grid_om):
                col = d1[:, j, l]
                for i in range(len(grid_phi) - 1):
                    if col[i] == 0.0 or col[i] * col[i + 1] >= 0:
                        continue
                    diags["flux_brackets"] += 1
                    if not refine:
                        continue
                    phi_star = brentq(
                        lambda x: derivs_at(x, xi, om)[0],
                        grid_phi[i],
                        grid_phi[i + 1],
                        xtol=1e-12,
                    )
                    spot = classify(float(phi_star), float(xi), float(om))
                    if spot is not None:
                        spots.append(spot)
                    else:
                        diags["refine_failures"] += 1

    # 1D amplitude scans
    if len(grid_xi) > 1:
        for i, phi in enumerate(grid_phi):
            for l, om in enumerate(grid_om):
                col = d2[i, :, l]
                for j in range(len(grid_xi) - 1):
                    if col[j] == 0.0 or col[j] * col[j + 1] >= 0:
                        continue
                    diags["amplitude_brackets"] += 1
                    if not refine:
                        continue
                    xi_star = brentq(
                        lambda x: derivs_at(phi, x, om)[1],
                        grid_xi[j],
                        grid_xi[j + 1],
                        xtol=1e-12,
                    )
                    spot = classify(float(phi), float(xi_star), float(om))
                    if spot is not None:
                        spots.append(spot)
                    else:
                        diags["refine_failures"] += 1

    # joint refinement over (xi, omega) cells
    if len(grid_xi) > 1 and len(grid_om) > 1:
        for i, phi in enumerate(grid_phi):
            for j in range(len(grid_xi) - 1):
                for l in range(len(grid_om) - 1):
                    c1 = d1[i, j : j + 2, l : l + 2]
                    c2 = d2[i, j : j + 2, l : l + 2]
                    if not (c1.min() < 0 < c1.max() and c2.min() < 0 < c2.max()):
                        continue
                    diags["double_seeds"] += 1
                    if not refine:
                        continue
                    x0 = [
                        0.5 * (grid_xi[j] + grid_xi[j + 1]),
                        0.5 * (grid_om[l] + grid_om[l + 1]),
                    ]
                    res = root(
                        lambda v: derivs_at(phi, abs(v[0]), abs(v[1])),
                        x0,
                        method="hybr",
                        tol=1e-12,
                    )
                    if not res.success:
                        diags["refine_failures"] += 1
                        continue
                    xi_star, om_star = abs(res.x[0]), abs(res.x[1])
                    # a root that escaped its seeding cell belongs to some
                    # other basin; discard rather than report a stray point
                    wx = grid_xi[j + 1] - grid_xi[j]
                    wo = grid_om[l + 1] - grid_om[l]
                    if not (
                        grid_xi[j] - wx <= xi_star <= grid_xi[j + 1] + wx
                        and grid_om[l] - wo <= om_star <= grid_om[l + 1] + wo
                    ):
                        diags["refine_failures"] += 1
                        continue
                    if any(
                        s.kind == "double"
                        and abs(s.xi - xi_star) < 1e-6
                        and abs(s.omega - om_star) < 1e-6
                        for s in spots
                    ):
                        continue
                    spot = classify(float(phi), float(xi_star), float(om_star))
                    if spot is not None and spot.kind == "double":
                        spots.append(spot)
                    else:
                        diags["refine_failures"] += 1

    spots.sort(key=lambda s: (s.phi_dc, s.omega, s.xi))
    return SweetSpotScan(spots=tuple(spots), diagnostics=diags)


# ---------------------------------------------------------------------------
# two-level reduction and filter weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TwoLevelReduction:
    """Floquet solution of the driven problem projected onto levels {0, 1}.

    ``u[t, j, s]`` holds u_{j,s}(t) = <s|Phi_j(t)> on a uniform one-period
    time grid; rows form a unitary 2x2 at every time (checked to 1e-10).
    """

    solution: FloquetSolution
    phi_bar: np.ndarray
    times: np.ndarray
    u: np.ndarray
    elems: FourierMatrixElements
    max_unitarity_defect: float

    def __post_init__(self) -> None:
        self.phi_bar.setflags(write=False)
        self.times.setflags(write=False)
        self.u.setflags(write=False)


def two_level_reduction(
    params: CircuitParams,
    drive: DriveParams,
    sideband_cutoff: int = 40,
    n_times: int = 256,
    spectrum: StaticSpectrum | None = None,
) -> TwoLevelReduction:
    """Solve the two-level projected model and tabulate its Floquet frame."""
    cfg = SambeConfig(n_levels=2, sideband_cutoff=sideband_cutoff)
    sol = solve_floquet(params, drive, cfg, spectrum=spectrum, check_convergence=False)
    phi_bar = sol.spectrum.phi_elements[:2, :2].copy()
    ns = cfg.sideband_cutoff
    times = np.linspace(0.0, drive.period, n_times, endpoint=False)
    harmonics = np.arange(-ns, ns + 1)
    phases = np.exp(2j * math.pi * drive.omega * np.outer(times, harmonics))
    u = np.einsum("tn,jns->tjs", phases, sol.fourier_blocks)
    eye = np.eye(2)
    defect = max(
        float(np.max(np.abs(u[t].conj().T @ u[t] - eye))) for t in range(n_times)
    )
    if defect > 1e-10:
        raise ConvergenceError(
            f"two-level Floquet frame not unitary to 1e-10 (defect {defect:.3e}); "
            "increase sideband_cutoff"
        )
    elems = fourier_operator_elements(sol, phi_bar, (0, 1))
    return TwoLevelReduction(
        solution=sol,
        phi_bar=phi_bar,
        times=times,
        u=u,
        elems=elems,
        max_unitarity_defect=defect,
    )


@dataclass(frozen=True)
class FilterWeights:
    """Sideband-summed noise filter weights and their conservation check.

    total = 2 * depolarization + dephasing; in the two-level model this
    equals the static reference 2|phi_bar_01|^2 + |phi_bar_11 - phi_bar_00|^2/2
    exactly, so ``leakage`` (total - reference) measures multi-level mixing.
    """

    dephasing: float
    depolarization: float
    total: float
    reference_total: float
    leakage: float


def filter_weights(obj) -> FilterWeights:
    """Filter weights of a ``TwoLevelReduction`` or a full ``FloquetSolution``."""
    if isinstance(obj, TwoLevelReduction):
        elems = obj.elems
        phi_bar = obj.phi_bar
    elif isinstance(obj, FloquetSolution):
        elems = fourier_matrix_elements(obj, obj.spectrum)
        phi_bar = obj.spectrum.phi_elements[:2, :2]
    else:
        raise TypeError("filter_weights expects a TwoLevelReduction or FloquetSolution")
    kmax = int(elems.k_values[-1])
    depol = sum(abs(elems.get(0, 1, k)) ** 2 for k in range(-kmax, kmax + 1))
    deph = sum(
        0.5 * abs(elems.get(1, 1, k) - elems.get(0, 0, k)) ** 2
        for k in range(-kmax, kmax + 1)
    )
    total = 2.0 * depol + deph
    ref = 2.0 * abs(phi_bar[0, 1]) ** 2 + 0.5 * abs(phi_bar[1, 1] - phi_bar[0, 0]) ** 2
    return FilterWeights(
        dephasing=deph,
        depolarization=depol,
        total=total,
        reference_total=ref,
        leakage=total - ref,
    )
