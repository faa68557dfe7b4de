"""Quasistatic multipole response of a Drude nanosphere.

Provides the Drude permittivity, per-multipole polarizabilities, the
radial-radial imaginary Green function used for emitter/mode couplings,
per-mode coupling spectra with Lorentzian resonance fits, the normalized
partial local density of states, and the mode-truncation rule.

Conventions: mode index n >= 1 (n = 1 dipolar), radially oriented dipoles,
energies in eV, lengths in nm.  The scattered Green function for
radial-radial components is

    G_n(r1, r2) = (c/w)^2 (n+1)^2 alpha_n(w) P_n(cos g) / (4 pi eps_b (r1 r2)^(n+2))

which fixes the partial LDOS normalization to the standard decay-rate
enhancement (vacuum reference w / 6 pi c).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.special import eval_legendre

from .errors import FitError, FitWindowError, GeometryError, SingularityError
from .units import COUPLING_PREFACTOR_EV, HBAR_C_EV_NM


@dataclass(frozen=True)
class NanoparticleModel:
    """Metal nanosphere with a Drude permittivity in a host medium."""

    radius_nm: float
    eps_inf: float = 4.0
    omega_p_ev: float = 9.0
    gamma_p_ev: float = 0.002
    eps_background: float = 1.0

    def __post_init__(self):
        if self.radius_nm <= 0:
            raise ValueError(f"radius_nm must be positive, got {self.radius_nm}")
        if self.omega_p_ev <= 0:
            raise ValueError(f"omega_p_ev must be positive, got {self.omega_p_ev}")
        if self.gamma_p_ev < 0:
            raise ValueError(f"gamma_p_ev must be non-negative, got {self.gamma_p_ev}")
        if self.eps_inf < 1:
            raise ValueError(f"eps_inf must be >= 1, got {self.eps_inf}")
        if self.eps_background < 1:
            raise ValueError(f"eps_background must be >= 1, got {self.eps_background}")


@dataclass(frozen=True)
class EmitterSpec:
    """Three-level emitter at distance d from the sphere surface.

    The dipole is radially oriented; ``polar_angle_rad`` locates the emitter
    on the sphere so that angles between emitters set their mode overlaps.
    """

    distance_nm: float
    polar_angle_rad: float = 0.0
    dipole_debye: float = 10.0
    omega_eg_ev: float = 3.67
    omega_fg_ev: float = 0.5

    def __post_init__(self):
        if self.distance_nm <= 0:
            raise ValueError(f"distance_nm must be positive, got {self.distance_nm}")
        if self.dipole_debye <= 0:
            raise ValueError(f"dipole_debye must be positive, got {self.dipole_debye}")
        if not 0 <= self.omega_fg_ev < self.omega_eg_ev:
            raise ValueError(
                f"need 0 <= omega_fg < omega_eg, got {self.omega_fg_ev}, {self.omega_eg_ev}"
            )

    def radial_position_nm(self, model: NanoparticleModel) -> float:
        return model.radius_nm + self.distance_nm


@dataclass(frozen=True)
class CouplingSpectrum:
    """|kappa_{w,n}(r)| sampled on an increasing frequency grid (phase fixed real)."""

    mode_n: int
    emitter_index: int
    omega_ev: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega_ev, dtype=float)
        if omega.ndim != 1 or omega.size == 0:
            raise ValueError("omega grid must be a non-empty 1-d array")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        if not np.all(np.isfinite(self.kappa)):
            raise ValueError("kappa samples must be finite")


@dataclass(frozen=True)
class ModeResonance:
    """Lorentzian parameters of one plasmonic mode and per-emitter amplitudes."""

    mode_n: int
    omega_n_ev: float
    gamma_n_ev: float
    g_amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rel_rms_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.omega_n_ev <= 0 or self.gamma_n_ev <= 0:
            raise ValueError("resonance frequency and width must be positive")
        if np.any(np.asarray(self.g_amplitudes) < 0):
            raise ValueError("g amplitudes are non-negative by phase convention")


def drude_permittivity(model: NanoparticleModel, omega_ev):
    """Drude permittivity eps_inf - wp^2 / (w^2 + i gamma w) at energy omega (eV)."""
    omega = np.asarray(omega_ev, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    w = omega.astype(complex)
    eps = model.eps_inf - model.omega_p_ev**2 / (w**2 + 1j * model.gamma_p_ev * w)
    return eps if eps.shape else complex(eps)


def mode_polarizability(model: NanoparticleModel, n: int, omega_ev):
    """Multipole polarizability alpha_n = R^(2n+1) n (eps_m - eps_b) / (n eps_m + (n+1) eps_b).

    Units nm^(2n+1).  Raises SingularityError on an exact lossless pole.
    """
    _check_mode_index(n)
    eps_m = drude_permittivity(model, omega_ev)
    eps_b = model.eps_background
    denom = n * eps_m + (n + 1) * eps_b
    if np.any(np.abs(denom) == 0.0):
        raise SingularityError(
            f"mode n={n} evaluated exactly on its lossless resonance pole"
        )
    return model.radius_nm ** (2 * n + 1) * n * (eps_m - eps_b) / denom


def mode_resonance_frequency(model: NanoparticleModel, n: int) -> float:
    """Frequency where Re[n eps_m + (n+1) eps_b] = 0 (exact for the Drude form)."""
    _check_mode_index(n)
    rad = (
        n * model.omega_p_ev**2 / (n * model.eps_inf + (n + 1) * model.eps_background)
        - model.gamma_p_ev**2
    )
    if rad <= 0:
        raise SingularityError(f"mode n={n} has no real resonance for these parameters")
    return float(np.sqrt(rad))


def im_green_radial(model, n, omega_ev, r1_nm, r2_nm, gamma_angle_rad=0.0):
    """Im of the radial-radial scattered Green function, 1/nm.

    Both positions must lie outside the sphere; ``gamma_angle_rad`` is the
    angle between them as seen from the center.
    """
    _check_outside(model, r1_nm)
    _check_outside(model, r2_nm)
    alpha = mode_polarizability(model, n, omega_ev)
    omega = np.asarray(omega_ev, dtype=float)
    prefactor = (HBAR_C_EV_NM / omega) ** 2 * (n + 1) ** 2 / (
        4.0 * np.pi * model.eps_background
    )
    radial = (r1_nm * r2_nm) ** (n + 2)
    value = prefactor * np.imag(alpha) * eval_legendre(n, np.cos(gamma_angle_rad)) / radial
    return value if np.ndim(value) else float(value)


def coupling_spectrum(model, emitter, n, omega_grid_ev) -> CouplingSpectrum:
    """Emitter/mode coupling |kappa_{w,n}(r)| over a frequency grid.

    |kappa|^2 = (1 / hbar pi eps0) (w/c)^2 |d|^2 Im G_n(r, r); the phase is
    fixed real non-negative.  Units sqrt(eV).
    """
    r = emitter.radial_position_nm(model)
    _check_outside(model, r)
    omega = np.asarray(omega_grid_ev, dtype=float)
    kappa_sq = (
        COUPLING_PREFACTOR_EV
        * emitter.dipole_debye**2
        * (n + 1) ** 2
        * np.imag(mode_polarizability(model, n, omega))
        / (model.eps_background * r ** (2 * n + 4))
    )
    kappa = np.sqrt(np.maximum(kappa_sq, 0.0))
    return CouplingSpectrum(mode_n=n, emitter_index=0, omega_ev=omega, kappa=kappa)


def lorentzian_amplitude(omega_ev, g_ev, omega_n_ev, gamma_n_ev):
    """|g L_n(w)| with L_n(w) = sqrt(gamma/2pi) / (w - w_n + i gamma)."""
    return (
        g_ev
        * np.sqrt(gamma_n_ev / (2.0 * np.pi))
        / np.sqrt((omega_ev - omega_n_ev) ** 2 + gamma_n_ev**2)
    )


def fit_lorentzian(spectrum: CouplingSpectrum):
    """Least-squares fit of |kappa| to |g L_n(w)|.

    Returns (g_ev, omega_n_ev, gamma_n_ev, rel_rms_residual).  Seeded from the
    peak location, the half width at half maximum of |kappa|^2, and the
    peak-matched amplitude.
    """
    omega = np.asarray(spectrum.omega_ev, dtype=float)
    kappa = np.abs(np.asarray(spectrum.kappa))
    peak = int(np.argmax(kappa))
    if peak == 0 or peak == omega.size - 1:
        raise FitWindowError(
            f"mode n={spectrum.mode_n}: spectrum peak sits on the grid boundary"
        )
    if kappa[peak] <= 0:
        raise FitError(f"mode n={spectrum.mode_n}: spectrum is identically zero")

    omega_seed = omega[peak]
    gamma_seed = _half_width_seed(omega, kappa, peak)
    g_seed = kappa[peak] * np.sqrt(2.0 * np.pi * gamma_seed)

    def residual(x):
        g, w0, gam = x
        return lorentzian_amplitude(omega, g, w0, gam) - kappa

    span = omega[-1] - omega[0]
    result = least_squares(
        residual,
        x0=np.array([g_seed, omega_seed, gamma_seed]),
        bounds=([0.0, omega[0], 1e-12], [np.inf, omega[-1], 10.0 * span]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    if not result.success:
        raise FitError(
            f"mode n={spectrum.mode_n}: fit did not converge "
            f"(residual {np.linalg.norm(result.fun):.3e})"
        )
    g, omega_n, gamma_n = result.x
    rel_rms = float(
        np.sqrt(np.mean(result.fun**2)) / np.sqrt(np.mean(kappa**2))
    )
    return float(g), float(omega_n), float(gamma_n), rel_rms


def default_fit_grid(model, n, halfwidths=6.0, points=1201):
    """Frequency window around the mode-n resonance sized in Lorentzian widths."""
    omega_n = mode_resonance_frequency(model, n)
    gamma_guess = max(model.gamma_p_ev / 2.0, 1e-6)
    lo = max(omega_n - halfwidths * gamma_guess, 1e-6)
    return np.linspace(lo, omega_n + halfwidths * gamma_guess, points)


def mode_resonance(model, emitters, n, halfwidths=6.0, points=1201,
                   coupling_scale=1.0) -> ModeResonance:
    """Fit mode n for every emitter and collect the shared resonance parameters.

    The line shape is emitter-independent in the quasistatic form, so the
    first emitter fixes (omega_n, gamma_n) and the remaining amplitudes are
    matched by linear least squares on the same shape.
    """
    if model.gamma_p_ev <= 0:
        raise FitError("Lorentzian reduction requires gamma_p > 0")
    grid = default_fit_grid(model, n, halfwidths=halfwidths, points=points)
    first = coupling_spectrum(model, emitters[0], n, grid)
    g0, omega_n, gamma_n, rms0 = fit_lorentzian(first)

    shape = lorentzian_amplitude(grid, 1.0, omega_n, gamma_n)
    shape_norm = float(np.dot(shape, shape))
    gs = [g0]
    residuals = [rms0]
    for emitter in emitters[1:]:
        spec = coupling_spectrum(model, emitter, n, grid)
        g = float(np.dot(np.abs(spec.kappa), shape) / shape_norm)
        fit = g * shape
        residuals.append(
            float(np.sqrt(np.mean((fit - np.abs(spec.kappa)) ** 2))
                  / np.sqrt(np.mean(np.abs(spec.kappa) ** 2)))
        )
        gs.append(g)
    return ModeResonance(
        mode_n=n,
        omega_n_ev=omega_n,
        gamma_n_ev=gamma_n,
        g_amplitudes=coupling_scale * np.asarray(gs),
        rel_rms_residuals=np.asarray(residuals),
    )


def partial_ldos(model, emitter, n, omega_ev):
    """Per-mode LDOS enhancement at the emitter, normalized to w / 6 pi c."""
    r = emitter.radial_position_nm(model)
    _check_outside(model, r)
    omega = np.asarray(omega_ev, dtype=float)
    value = (
        1.5
        * (HBAR_C_EV_NM / omega) ** 3
        * (n + 1) ** 2
        * np.imag(mode_polarizability(model, n, omega))
        / (model.eps_background * r ** (2 * n + 4))
    )
    return value if np.ndim(value) else float(value)


def peak_partial_ldos(model, emitter, n) -> float:
    """Partial LDOS evaluated at the mode resonance."""
    return float(partial_ldos(model, emitter, n, mode_resonance_frequency(model, n)))


def select_modes(model, emitters, threshold=0.002, n_max=40) -> int:
    """Smallest truncation index n' so every discarded mode is weak everywhere.

    A mode n > n' must have peak partial LDOS below ``threshold`` times the
    strongest mode of each emitter.  The result is clamped to ``n_max``.
    """
    if not 0 < threshold < 1:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    n_prime = 1
    for emitter in emitters:
        peaks = np.array(
            [peak_partial_ldos(model, emitter, n) for n in range(1, n_max + 1)]
        )
        cutoff = threshold * peaks.max()
        keep = np.nonzero(peaks >= cutoff)[0]
        n_prime = max(n_prime, int(keep[-1]) + 1 if keep.size else 1)
    return min(n_prime, n_max)


def _half_width_seed(omega, kappa, peak):
    power = kappa**2
    half = power[peak] / 2.0
    left = omega[0]
    for i in range(peak, 0, -1):
        if power[i - 1] <= half:
            left = np.interp(half, [power[i - 1], power[i]], [omega[i - 1], omega[i]])
            break
    right = omega[-1]
    for i in range(peak, omega.size - 1):
        if power[i + 1] <= half:
            right = np.interp(half, [power[i + 1], power[i]], [omega[i + 1], omega[i]])
            break
    width = max((right - left) / 2.0, (omega[1] - omega[0]) / 2.0)
    return width


def _check_mode_index(n):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"mode index must be an integer >= 1, got {n!r}")


def _check_outside(model, r_nm):
    if np.any(np.asarray(r_nm) <= model.radius_nm):
        raise GeometryError(
            f"radial position {r_nm} nm is not outside the sphere (R={model.radius_nm} nm)"
        )
