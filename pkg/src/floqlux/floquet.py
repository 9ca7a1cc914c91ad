"""Floquet analysis of the flux-modulated circuit in the extended-zone picture.

The external flux is modulated as phi_ext(t) = phi_dc + xi*cos(2*pi*Omega*t)
(t in ns, Omega in GHz).  Expanding the inductive term of the static
Hamiltonian around phi_dc gives, in the static eigenbasis,

    H(t) = diag(E_a) - E_L*(2*pi*xi)*cos(2*pi*Omega*t)*PHI
           + (E_L/4)*(2*pi*xi)^2 * (1 + cos(4*pi*Omega*t)) * 1

with PHI the matrix of phi between static eigenstates.  The
identity-proportional second-harmonic piece shifts nothing and is dropped;
the constant (E_L/4)*(2*pi*xi)^2 is kept on the diagonal.  The
time-independent eigenproblem lives in Sambe space: ``n_levels`` circuit
levels times 2*N_s + 1 harmonic blocks, with block structure

    (H_F)_{n,n}   = diag(E_a) + n*Omega + (E_L/4)*(2*pi*xi)^2
    (H_F)_{n,n±1} = -(E_L/2)*(2*pi*xi) * PHI.

Eigenvectors come in copies translated by Omega; one representative per
physical level is selected by Fourier-weight centroid, deduplicated by
translated overlap, and labeled against the static levels by maximum
weight assignment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .circuit import CircuitParams, FluxBias, StaticSpectrum, diagonalize_static
from .errors import ConvergenceError, DiagnosticError, FloqluxError, OutOfWindowError

__all__ = [
    "DriveParams",
    "SambeConfig",
    "FloquetSolution",
    "SpectralFunction",
    "TrackingResult",
    "fold_quasienergy",
    "build_sambe",
    "solve_floquet",
    "spectral_function",
    "monodromy_oracle",
    "track_states",
]

# Sambe matrices beyond this size indicate a runaway configuration
_MAX_SAMBE_DIM = 20000


@dataclass(frozen=True)
class DriveParams:
    """Flux-modulation drive: bias point, amplitude xi (Phi_0), frequency Omega (GHz)."""

    bias: FluxBias
    xi: float
    omega: float

    def __post_init__(self) -> None:
        if self.xi < 0:
            raise ValueError("drive amplitude xi must be non-negative")
        if not self.omega > 0:
            raise ValueError("drive frequency omega must be strictly positive")

    @property
    def period(self) -> float:
        """Drive period in ns."""
        return 1.0 / self.omega


@dataclass(frozen=True)
class SambeConfig:
    """Truncation of the Sambe-space eigenproblem.

    Attributes:
        n_levels: circuit levels retained in the driven problem.
        sideband_cutoff: N_s; harmonic blocks n = -N_s..N_s are kept.
    """

    n_levels: int = 5
    sideband_cutoff: int = 20

    def __post_init__(self) -> None:
        if self.n_levels < 2:
            raise ValueError("need at least two circuit levels")
        if self.sideband_cutoff < 1:
            raise ValueError("sideband_cutoff must be at least 1")

    @property
    def n_blocks(self) -> int:
        return 2 * self.sideband_cutoff + 1


def fold_quasienergy(eps, omega: float):
    """Fold energies into the first zone (-Omega/2, Omega/2]."""
    eps = np.asarray(eps, dtype=float)
    folded = eps - omega * np.round(eps / omega)
    # np.round sends exact half-integers to the even side; pull the low edge up
    folded = np.where(folded <= -0.5 * omega, folded + omega, folded)
    return folded if folded.ndim else float(folded)


def _zone_distance(a, b, omega: float):
    """Distance between quasienergies modulo the zone width."""
    return np.abs(fold_quasienergy(np.asarray(a) - np.asarray(b), omega))


def _assemble_sambe(
    energies: np.ndarray, phi_op: np.ndarray, e_l: float, xi: float, omega: float, n_side: int
) -> np.ndarray:
    d = energies.size
    nb = 2 * n_side + 1
    dim = d * nb
    if dim > _MAX_SAMBE_DIM:
        raise DiagnosticError(
            f"Sambe dimension {dim} exceeds the safety cap {_MAX_SAMBE_DIM}; "
            "reduce n_levels or sideband_cutoff"
        )
    coupling = -0.5 * e_l * (2.0 * math.pi * xi) * phi_op
    shift = 0.25 * e_l * (2.0 * math.pi * xi) ** 2
    h = np.zeros((dim, dim))
    for j, n in enumerate(range(-n_side, n_side + 1)):
        rows = slice(j * d, (j + 1) * d)
        h[rows, rows] = np.diag(energies + n * omega + shift)
        if j + 1 < nb:
            nxt = slice((j + 1) * d, (j + 2) * d)
            h[rows, nxt] = coupling
            h[nxt, rows] = coupling.T
    if not np.array_equal(h, h.T):
        raise DiagnosticError("Sambe assembly produced a non-symmetric matrix")
    return h


def build_sambe(
    params: CircuitParams,
    drive: DriveParams,
    config: SambeConfig = SambeConfig(),
    spectrum: StaticSpectrum | None = None,
) -> np.ndarray:
    """Assemble the Sambe-space matrix (GHz) in the static eigenbasis.

    Block order runs n = -N_s..N_s, each block of size ``config.n_levels``.
    """
    spectrum = _resolve_spectrum(params, drive, spectrum, config)
    d = config.n_levels
    return _assemble_sambe(
        spectrum.energies[:d],
        spectrum.phi_elements[:d, :d],
        params.e_l,
        drive.xi,
        drive.omega,
        config.sideband_cutoff,
    )


def _resolve_spectrum(params, drive, spectrum, config) -> StaticSpectrum:
    if spectrum is None:
        if params.n_levels < config.n_levels:
            raise ValueError(
                f"CircuitParams.n_levels={params.n_levels} < SambeConfig.n_levels={config.n_levels}"
            )
        spectrum = diagonalize_static(params, drive.bias)
    if spectrum.energies.size < config.n_levels:
        raise ValueError("static spectrum holds fewer levels than the Sambe config needs")
    return spectrum


@dataclass(frozen=True, eq=False)
class FloquetSolution:
    """Representative Floquet states of the driven circuit.

    Attributes:
        quasienergies: folded to (-Omega/2, Omega/2], ordered by level label.
        rep_energies: raw Sambe eigenvalues of the chosen representatives;
            differences of these are the natural (unfolded) quasienergy
            splittings that the rate formulas use.
        fourier_blocks: complex array (n_levels, 2*N_s+1, n_levels); entry
            [a, j, :] is the Fourier component |phi_a^(n)> with n = j - N_s,
            expressed in the static eigenbasis.  Blocks of one state are
            jointly normalized to 1.
        dominant_weights: per label, the assignment weight onto its static
            level (1 at xi=0; smaller as sidebands mix levels).
        centroids: Fourier-weight centroid of each representative.
        converged: True when doubling-checked against N_s + 2 (see
            ``solve_floquet(check_convergence=...)``); None when unchecked.
        convergence_delta: max zone-distance change under N_s -> N_s + 2.
    """

    drive: DriveParams
    config: SambeConfig
    quasienergies: np.ndarray
    rep_energies: np.ndarray
    fourier_blocks: np.ndarray
    labels: np.ndarray
    static_energies: np.ndarray
    spectrum: StaticSpectrum
    dominant_weights: np.ndarray
    centroids: np.ndarray
    converged: bool | None = None
    convergence_delta: float | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for arr in (
            self.quasienergies,
            self.rep_energies,
            self.fourier_blocks,
            self.labels,
            self.static_energies,
            self.dominant_weights,
            self.centroids,
        ):
            arr.setflags(write=False)

    @property
    def n_levels(self) -> int:
        return self.config.n_levels

    @property
    def sideband_cutoff(self) -> int:
        return self.config.sideband_cutoff

    def block(self, alpha: int, n: int) -> np.ndarray:
        """Fourier component |phi_alpha^(n)> in the static eigenbasis.

        Raises:
            OutOfWindowError: when |n| exceeds the sideband cutoff.
        """
        ns = self.config.sideband_cutoff
        if abs(n) > ns:
            raise OutOfWindowError(
                f"Fourier block n={n} outside truncation window |n| <= {ns}"
            )
        return self.fourier_blocks[alpha, n + ns]

    def sideband_weights(self, alpha: int) -> np.ndarray:
        """Weights <phi_a^(n)|phi_a^(n)> over n = -N_s..N_s (sum to 1)."""
        b = self.fourier_blocks[alpha]
        return np.real(np.sum(b * b.conj(), axis=1))

    def splitting(self, alpha: int = 1, beta: int = 0, branch: str = "natural") -> float:
        """Quasienergy difference eps_alpha - eps_beta in GHz.

        branch="natural" (default) differences the representative Sambe
        eigenvalues, which is the branch the matrix-element sums are built
        on; "folded" folds that difference into the first zone.
        """
        raw = float(self.rep_energies[alpha] - self.rep_energies[beta])
        if branch == "natural":
            return raw
        if branch == "folded":
            return float(fold_quasienergy(raw, self.drive.omega))
        raise ValueError(f"unknown branch {branch!r}")


def _select_representatives(evals, blocks_all, weights_all, omega, n_side, n_states):
    """Pick one interior eigenvector per physical state.

    Candidates are ordered by |centroid| then |eigenvalue|; a candidate is a
    translated copy of an accepted state when its eigenvalue matches modulo
    Omega *and* the block-shifted overlap exceeds 0.5 (the overlap test keeps
    accidental quasienergy coincidences of distinct states apart).
    """
    centroids = weights_all @ np.arange(-n_side, n_side + 1)
    dominant = np.argmax(weights_all, axis=1) - n_side
    interior = np.abs(dominant) < n_side - 1
    order = np.lexsort((np.abs(evals), np.abs(centroids)))
    accepted: list[int] = []
    shifts_tol = 1e-6 * omega
    for idx in order:
        if not interior[idx]:
            continue
        is_copy = False
        for acc in accepted:
            k = int(round((evals[idx] - evals[acc]) / omega))
            if abs(evals[idx] - evals[acc] - k * omega) > shifts_tol:
                continue
            if abs(_shifted_overlap(blocks_all[acc], blocks_all[idx], k)) > 0.5:
                is_copy = True
                break
        if not is_copy:
            accepted.append(int(idx))
            if len(accepted) == n_states:
                break
    if len(accepted) < n_states:
        raise ConvergenceError(
            f"found only {len(accepted)} of {n_states} interior Floquet representatives; "
            "increase sideband_cutoff"
        )
    return accepted, centroids, dominant


def _shifted_overlap(blocks_a: np.ndarray, blocks_b: np.ndarray, k: int) -> complex:
    """sum_n <a^(n)|b^(n+k)> with out-of-window blocks treated as zero."""
    nb = blocks_a.shape[0]
    if k >= 0:
        if k >= nb:
            return 0.0
        return complex(np.sum(blocks_a[: nb - k].conj() * blocks_b[k:]))
    return complex(np.sum(blocks_a[-k:].conj() * blocks_b[: nb + k]))


def _solve_sambe(energies, phi_op, e_l, drive, n_side, n_states):
    """Core Sambe diagonalization; returns representative data in label order."""
    h = _assemble_sambe(energies, phi_op, e_l, drive.xi, drive.omega, n_side)
    try:
        evals, evecs = scipy.linalg.eigh(h)
    except scipy.linalg.LinAlgError as exc:
        raise DiagnosticError(f"Sambe eigensolver failed for drive={drive!r}: {exc}") from exc
    d = energies.size
    nb = 2 * n_side + 1
    blocks_all = evecs.T.reshape(evals.size, nb, d)
    weights_all = np.sum(blocks_all * blocks_all, axis=2)
    accepted, centroids, dominant = _select_representatives(
        evals, blocks_all, weights_all, drive.omega, n_side, n_states
    )
    # label against static levels by total weight per circuit level
    level_w = np.zeros((n_states, d))
    for row, idx in enumerate(accepted):
        level_w[row] = np.sum(blocks_all[idx] * blocks_all[idx], axis=0)
    rows, cols = linear_sum_assignment(-level_w[:, :n_states])
    by_label = np.empty(n_states, dtype=int)
    for r, c in zip(rows, cols):
        by_label[c] = accepted[r]
    rep_energies = evals[by_label]
    blocks = blocks_all[by_label].astype(complex)
    # gauge: largest-|.| component of each representative made real positive
    for a in range(n_states):
        flat = blocks[a].ravel()
        lead = np.argmax(np.abs(flat))
        phase = flat[lead] / abs(flat[lead])
        blocks[a] = blocks[a] / phase
    dom_w = np.array([level_w[accepted.index(i), lab] for lab, i in enumerate(by_label)])
    return rep_energies, blocks, dom_w, centroids[by_label]


def solve_floquet(
    params: CircuitParams,
    drive: DriveParams,
    config: SambeConfig = SambeConfig(),
    spectrum: StaticSpectrum | None = None,
    check_convergence: bool = True,
) -> FloquetSolution:
    """Solve the driven problem and return labeled representative states.

    When ``check_convergence`` is set the solve is repeated with the sideband
    window widened by 2 and the folded quasienergies compared (zone distance);
    the flag and the observed delta land on the returned solution.
    """
    spectrum = _resolve_spectrum(params, drive, spectrum, config)
    d = config.n_levels
    energies = spectrum.energies[:d]
    phi_op = spectrum.phi_elements[:d, :d]
    rep_e, blocks, dom_w, cents = _solve_sambe(
        energies, phi_op, params.e_l, drive, config.sideband_cutoff, d
    )
    converged = None
    delta = None
    warnings: tuple[str, ...] = ()
    if check_convergence:
        rep_e2, _, _, _ = _solve_sambe(
            energies, phi_op, params.e_l, drive, config.sideband_cutoff + 2, d
        )
        delta = float(np.max(_zone_distance(rep_e, rep_e2, drive.omega)))
        converged = delta < 1e-8
        if not converged:
            warnings = (
                f"quasienergies moved by {delta:.3e} GHz under sideband_cutoff + 2; "
                "increase sideband_cutoff",
            )
    return FloquetSolution(
        drive=drive,
        config=config,
        quasienergies=np.asarray(fold_quasienergy(rep_e, drive.omega)),
        rep_energies=rep_e,
        fourier_blocks=blocks,
        labels=np.arange(d),
        static_energies=energies.copy(),
        spectrum=spectrum,
        dominant_weights=dom_w,
        centroids=cents,
        converged=converged,
        convergence_delta=delta,
        warnings=warnings,
    )


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Sideband-resolved spectral weights of the Floquet states.

    Peak alpha, harmonic n carries weight <phi_a^(n)|phi_a^(n)> at frequency
    rep_energies[alpha] + n*Omega (GHz).
    """

    frequencies: np.ndarray  # (n_levels, 2*N_s+1)
    weights: np.ndarray
    omega: float

    def __post_init__(self) -> None:
        self.frequencies.setflags(write=False)
        self.weights.setflags(write=False)

    def peaks(self, alpha: int, threshold: float = 0.0):
        """(frequency, weight) arrays for level alpha above the threshold."""
        keep = self.weights[alpha] > threshold
        return self.frequencies[alpha, keep], self.weights[alpha, keep]


def spectral_function(sol: FloquetSolution) -> SpectralFunction:
    """Spectral weights of each representative over its sideband ladder."""
    ns = sol.config.sideband_cutoff
    harmonics = np.arange(-ns, ns + 1)
    freqs = sol.rep_energies[:, None] + harmonics[None, :] * sol.drive.omega
    weights = np.stack([sol.sideband_weights(a) for a in range(sol.n_levels)])
    return SpectralFunction(frequencies=freqs, weights=weights, omega=sol.drive.omega)


# ---------------------------------------------------------------------------
# time-domain oracle: quasienergies from the monodromy matrix
# ---------------------------------------------------------------------------

# fourth-order commutator-free scheme: two exponentials per step with
# Gauss-node Hamiltonians; coefficients from the standard CF4 tableau
_CF4_A1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
_CF4_A2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0
_GAUSS_C1 = 0.5 - math.sqrt(3.0) / 6.0
_GAUSS_C2 = 0.5 + math.sqrt(3.0) / 6.0


def _expm_herm(mat: np.ndarray, scale: float) -> np.ndarray:
    """exp(1j*scale*mat) for real-symmetric mat via eigendecomposition."""
    w, q = np.linalg.eigh(mat)
    return (q * np.exp(1j * scale * w)) @ q.T


def _propagate_period(energies, phi_op, e_l, drive, n_steps):
    """Monodromy matrix U(T) of the projected model via the CF4 integrator."""
    d = energies.size
    shift = 0.25 * e_l * (2.0 * math.pi * drive.xi) ** 2
    h_static = np.diag(energies + shift)
    amp = -e_l * (2.0 * math.pi * drive.xi)

    def h_of(t):
        return h_static + (amp * math.cos(2.0 * math.pi * drive.omega * t)) * phi_op

    period = drive.period
    dt = period / n_steps
    u = np.eye(d, dtype=complex)
    for j in range(n_steps):
        t0 = j * dt
        h1 = h_of(t0 + _GAUSS_C1 * dt)
        h2 = h_of(t0 + _GAUSS_C2 * dt)
        # -i * 2*pi converts GHz*ns phase; right factor acts first
        first = _expm_herm(_CF4_A2 * h1 + _CF4_A1 * h2, -2.0 * math.pi * dt)
        second = _expm_herm(_CF4_A1 * h1 + _CF4_A2 * h2, -2.0 * math.pi * dt)
        u = second @ (first @ u)
    return u


def monodromy_oracle(
    params: CircuitParams,
    drive: DriveParams,
    n_steps: int = 2048,
    n_levels: int = 5,
    spectrum: StaticSpectrum | None = None,
    max_refinements: int = 3,
) -> np.ndarray:
    """Quasienergies from time integration over one period (sorted, folded).

    Integrates the same projected model the Sambe matrix represents (the
    identity-proportional second-harmonic drive term is dropped there, so it
    is dropped here too): this pits the two numerical routes against each
    other without a modeling difference.  The integrator is a fourth-order
    commutator-free exponential scheme; results are accepted only once
    doubling the step count moves the quasienergies by < 1e-9 GHz.

    Raises:
        DiagnosticError: if the propagator drifts from unitarity beyond 1e-8.
        ConvergenceError: if step doubling fails to stabilize the result.
    """
    if n_steps < 16:
        raise ValueError("n_steps too small for the integrator to mean anything")
    cfg = SambeConfig(n_levels=n_levels, sideband_cutoff=1)
    spectrum = _resolve_spectrum(params, drive, spectrum, cfg)
    energies = spectrum.energies[:n_levels]
    phi_op = spectrum.phi_elements[:n_levels, :n_levels]

    def quasi(steps):
        u = _propagate_period(energies, phi_op, params.e_l, drive, steps)
        drift = np.linalg.norm(u.conj().T @ u - np.eye(n_levels), 2)
        if drift > 1e-8:
            raise DiagnosticError(
                f"monodromy propagator non-unitary (drift {drift:.3e}) at n_steps={steps}"
            )
        lam = np.linalg.eigvals(u)
        eps = -np.angle(lam) / (2.0 * math.pi * drive.period)
        return np.sort(fold_quasienergy(eps, drive.omega))

    prev = quasi(n_steps)
    for _ in range(max_refinements):
        n_steps *= 2
        cur = quasi(n_steps)
        if float(np.max(_zone_distance(prev, cur, drive.omega))) < 1e-9:
            return cur
        prev = cur
    raise ConvergenceError(
        f"monodromy quasienergies did not stabilize to 1e-9 GHz by n_steps={n_steps}"
    )


# ---------------------------------------------------------------------------
# branch tracking across a parameter sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrackingResult:
    """Relabeled solutions plus the overlap diagnostics of each sweep step."""

    solutions: tuple[FloquetSolution, ...]
    min_overlaps: tuple[float, ...]
    break_indices: tuple[int, ...]


def _translate_blocks(blocks: np.ndarray, k: int) -> np.ndarray:
    """New blocks b'[n] = b[n+k]; content leaving the window is dropped."""
    if k == 0:
        return blocks.copy()
    out = np.zeros_like(blocks)
    nb = blocks.shape[0]
    if k > 0:
        out[: nb - k] = blocks[k:]
    else:
        out[-k:] = blocks[: nb + k]
    return out


def track_states(
    solutions, shift_range: int = 2, break_threshold: float = 0.5
) -> TrackingResult:
    """Relabel a sweep of solutions so each branch follows by max overlap.

    Consecutive solutions are compared through the translated Fourier-block
    overlap max_k |sum_n <a^(n)|b^(n+k)>| with |k| <= shift_range; labels are
    reassigned by maximum-weight matching and blocks re-translated so branch
    quantities (representative energies in particular) vary continuously.
    A best overlap at or below ``break_threshold`` flags a tracking break at
    that grid index; labels there are still the best available matching.
    """
    sols = list(solutions)
    if not sols:
        return TrackingResult((), (), ())
    d = sols[0].n_levels
    tracked = [sols[0]]
    min_overlaps: list[float] = []
    breaks: list[int] = []
    shifts = range(-shift_range, shift_range + 1)
    for i in range(1, len(sols)):
        prev, cur = tracked[-1], sols[i]
        omega = cur.drive.omega
        best = np.zeros((d, d))
        best_k = np.zeros((d, d), dtype=int)
        for a in range(d):
            for b in range(d):
                vals = [abs(_shifted_overlap(prev.fourier_blocks[a], cur.fourier_blocks[b], k)) for k in shifts]
                j = int(np.argmax(vals))
                best[a, b] = vals[j]
                best_k[a, b] = shifts[j]
        rows, cols = linear_sum_assignment(-best)
        perm = np.empty(d, dtype=int)
        kshift = np.empty(d, dtype=int)
        for a, b in zip(rows, cols):
            perm[a] = b
            kshift[a] = best_k[a, b]
        matched = best[rows, cols]
        step_min = float(np.min(matched))
        min_overlaps.append(step_min)
        if step_min <= break_threshold:
            breaks.append(i)
        new_blocks = np.stack(
            [_translate_blocks(cur.fourier_blocks[perm[a]], int(kshift[a])) for a in range(d)]
        )
        new_rep = np.array(
            [cur.rep_energies[perm[a]] - kshift[a] * omega for a in range(d)]
        )
        tracked.append(
            replace(
                cur,
                quasienergies=np.asarray(fold_quasienergy(new_rep, omega)),
                rep_energies=new_rep,
                fourier_blocks=new_blocks,
                dominant_weights=cur.dominant_weights[perm],
                centroids=cur.centroids[perm] - kshift,
            )
        )
    return TrackingResult(tuple(tracked), tuple(min_overlaps), tuple(breaks))
