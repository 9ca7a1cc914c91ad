"""Static fluxonium circuit: Hamiltonian assembly and spectra.

The circuit Hamiltonian, with all energies expressed as E/h in GHz and the
node phase ``phi`` in radians, is

    H = 4 E_C n^2 - E_J cos(phi) + (E_L / 2) (phi - 2*pi*phi_dc)^2

where ``phi_dc`` is the external flux in units of the flux quantum.  The
matrix representation uses the number basis of the harmonic part
(4 E_C n^2 + E_L phi^2 / 2), whose plasma frequency is sqrt(8 E_C E_L).
``cos(phi)`` is filled from the exact displacement-operator matrix elements
(associated Laguerre polynomials), so the assembled matrix is the exact
projection of H onto the truncated basis and eigenvalues converge
variationally from above as ``basis_dim`` grows.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import eval_genlaguerre, gammaln

from .errors import DiagnosticError

__all__ = [
    "CircuitParams",
    "FluxBias",
    "StaticSpectrum",
    "DispersionTable",
    "build_hamiltonian",
    "diagonalize_static",
    "dispersion_sweep",
]


@dataclass(frozen=True)
class CircuitParams:
    """Fluxonium circuit energies (GHz) and basis truncation.

    Attributes:
        e_c: charging energy E_C/h in GHz, strictly positive.
        e_j: junction energy E_J/h in GHz.  Zero is allowed (harmonic limit);
            negative values are rejected.
        e_l: inductive energy E_L/h in GHz, strictly positive.
        basis_dim: number of oscillator basis states kept when assembling H.
        n_levels: number of eigenstates retained by diagonalization.
    """

    e_c: float = 1.17
    e_j: float = 2.65
    e_l: float = 0.54
    basis_dim: int = 80
    n_levels: int = 6

    def __post_init__(self) -> None:
        if not (self.e_c > 0 and self.e_l > 0):
            raise ValueError("e_c and e_l must be strictly positive")
        if self.e_j < 0:
            raise ValueError("e_j must be non-negative")
        if self.basis_dim < 2:
            raise ValueError("basis_dim must be at least 2")
        if not (1 <= self.n_levels <= self.basis_dim):
            raise ValueError("n_levels must lie in [1, basis_dim]")

    @property
    def plasma_frequency(self) -> float:
        """Harmonic-part level spacing sqrt(8 E_C E_L) in GHz."""
        return float(np.sqrt(8.0 * self.e_c * self.e_l))

    @property
    def phi_zpf(self) -> float:
        """Zero-point phase spread (2 E_C / E_L)**0.25 in radians."""
        return float((2.0 * self.e_c / self.e_l) ** 0.25)

    @property
    def n_zpf(self) -> float:
        """Zero-point charge spread (E_L / (32 E_C))**0.25."""
        return float((self.e_l / (32.0 * self.e_c)) ** 0.25)


@dataclass(frozen=True)
class FluxBias:
    """Static external flux in units of the flux quantum."""

    phi_dc: float = 0.5

    def __post_init__(self) -> None:
        if not np.isfinite(self.phi_dc):
            raise ValueError("phi_dc must be finite")


def _cos_phi_matrix(dim: int, lam: float) -> np.ndarray:
    """Exact matrix of cos(phi) in the oscillator basis, phi = lam*(a + a†).

    <m| e^{i lam (a+a†)} |n> = i^{m-n} e^{-lam^2/2} sqrt(n!/m!) lam^{m-n}
                               L_n^{(m-n)}(lam^2)   for m >= n,
    so cos(phi) connects only states of equal parity with a (-1)^{k/2} sign
    on the k-th even diagonal.
    """
    if lam <= 0:
        raise ValueError("phase zero-point spread must be positive")
    x = lam * lam
    mat = np.zeros((dim, dim))
    for k in range(0, dim, 2):
        n = np.arange(dim - k)
        # log-space prefactor keeps the factorial ratio finite at large m - n
        logpref = 0.5 * (gammaln(n + 1) - gammaln(n + k + 1)) + k * np.log(lam) - 0.5 * x
        sign = -1.0 if (k // 2) % 2 else 1.0
        vals = sign * np.exp(logpref) * eval_genlaguerre(n, k, x)
        mat[n + k, n] = vals
        mat[n, n + k] = vals
    return mat


def phase_operator(params: CircuitParams) -> np.ndarray:
    """phi = phi_zpf (a + a†) in the oscillator basis (real symmetric)."""
    dim = params.basis_dim
    off = params.phi_zpf * np.sqrt(np.arange(1, dim))
    return np.diag(off, 1) + np.diag(off, -1)


def charge_operator(params: CircuitParams) -> np.ndarray:
    """n = i n_zpf (a† - a) in the oscillator basis (Hermitian, imaginary)."""
    dim = params.basis_dim
    off = params.n_zpf * np.sqrt(np.arange(1, dim))
    return 1j * (np.diag(off, -1) - np.diag(off, 1))


def build_hamiltonian(params: CircuitParams, bias: FluxBias) -> np.ndarray:
    """Assemble the static Hamiltonian matrix (GHz) at the given flux bias.

    The harmonic part is diagonal by construction of the basis; the flux
    enters through the exact linear term -E_L*(2 pi phi_dc)*phi plus the
    scalar offset E_L*(2 pi phi_dc)^2 / 2, and the junction through the
    exact cos(phi) matrix.  The result is real symmetric.
    """
    dim = params.basis_dim
    wp = params.plasma_frequency
    h = np.diag(wp * (np.arange(dim) + 0.5))
    delta = 2.0 * np.pi * bias.phi_dc
    h -= params.e_l * delta * phase_operator(params)
    h += 0.5 * params.e_l * delta * delta * np.eye(dim)
    if params.e_j != 0.0:
        h -= params.e_j * _cos_phi_matrix(dim, params.phi_zpf)
    return h


@dataclass(frozen=True, eq=False)
class StaticSpectrum:
    """Lowest eigenstates of the static circuit at one flux bias.

    Attributes:
        energies: eigenvalues in GHz, ascending, length ``n_levels``.
        eigenvectors: basis_dim x n_levels matrix of real eigenvectors; the
            largest-magnitude component of each column is made positive.
        phi_elements: <a|phi|b> in radians (real symmetric).
        n_elements: <a|n|b> (Hermitian, purely imaginary off-diagonals).
        degenerate_pairs: adjacent level pairs closer than ``degeneracy_tol``;
            matrix elements within such pairs have gauge-arbitrary mixing.
    """

    params: CircuitParams
    bias: FluxBias
    energies: np.ndarray
    eigenvectors: np.ndarray
    phi_elements: np.ndarray
    n_elements: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = ()
    degeneracy_tol: float = 1e-9

    def __post_init__(self) -> None:
        for arr in (self.energies, self.eigenvectors, self.phi_elements, self.n_elements):
            arr.setflags(write=False)

    def transition(self, a: int = 0, b: int = 1) -> float:
        """Transition frequency E_b - E_a in GHz."""
        return float(self.energies[b] - self.energies[a])


def diagonalize_static(params: CircuitParams, bias: FluxBias) -> StaticSpectrum:
    """Diagonalize the static circuit and return the lowest ``n_levels`` states.

    Raises:
        DiagnosticError: if the eigensolver fails or returns non-finite data.
    """
    h = build_hamiltonian(params, bias)
    try:
        energies, vecs = scipy.linalg.eigh(h, subset_by_index=[0, params.n_levels - 1])
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise DiagnosticError(
            f"static eigensolver failed at phi_dc={bias.phi_dc!r} for {params!r}: {exc}"
        ) from exc
    if not (np.all(np.isfinite(energies)) and np.all(np.isfinite(vecs))):
        raise DiagnosticError(
            f"static eigensolver returned non-finite values at phi_dc={bias.phi_dc!r}"
        )
    # fix each eigenvector's sign so its largest-|.| component is positive
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs
    phi_el = vecs.T @ phase_operator(params) @ vecs
    phi_el = 0.5 * (phi_el + phi_el.T)
    n_el = vecs.conj().T @ charge_operator(params) @ vecs
    n_el = 0.5 * (n_el + n_el.conj().T)
    gaps = np.diff(energies)
    tol = 1e-9
    pairs = tuple((int(i), int(i + 1)) for i in np.nonzero(gaps < tol)[0])
    return StaticSpectrum(
        params=params,
        bias=bias,
        energies=energies,
        eigenvectors=vecs,
        phi_elements=phi_el,
        n_elements=n_el,
        degenerate_pairs=pairs,
        degeneracy_tol=tol,
    )


@dataclass(frozen=True, eq=False)
class DispersionTable:
    """Energies vs flux, rows in the order the biases were given."""

    params: CircuitParams
    biases: np.ndarray
    energies: np.ndarray  # (n_biases, n_levels)

    def __post_init__(self) -> None:
        self.biases.setflags(write=False)
        self.energies.setflags(write=False)

    def transition(self, a: int = 0, b: int = 1) -> np.ndarray:
        return self.energies[:, b] - self.energies[:, a]


def dispersion_sweep(params: CircuitParams, biases) -> DispersionTable:
    """Energies of the lowest ``n_levels`` states over a list of flux biases."""
    biases = np.atleast_1d(np.asarray(biases, dtype=float))
    out = np.empty((biases.size, params.n_levels))
    for i, phi in enumerate(biases):
        try:
            out[i] = diagonalize_static(params, FluxBias(float(phi))).energies
        except DiagnosticError:
            raise
        except Exception as exc:  # defensive: annotate the offending bias
            raise DiagnosticError(f"dispersion sweep failed at phi_dc={phi!r}: {exc}") from exc
    return DispersionTable(params=params, biases=biases, energies=out)


def transition_spline(
    params: CircuitParams,
    level_a: int,
    level_b: int,
    phi_min: float,
    phi_max: float,
    num: int = 41,
):
    """Cubic-spline interpolant of the a->b transition frequency vs flux.

    Used where a smooth, differentiable frequency curve is needed (dispersive
    shifts of the drive, flux-to-frequency conversion for the rotating-wave
    model).  The spline is built on a uniform grid; callers should keep their
    evaluations inside [phi_min, phi_max].
    """
    from scipy.interpolate import CubicSpline

    grid = np.linspace(phi_min, phi_max, num)
    table = dispersion_sweep(params, grid)
    freq = table.energies[:, level_b] - table.energies[:, level_a]
    return CubicSpline(grid, freq)
