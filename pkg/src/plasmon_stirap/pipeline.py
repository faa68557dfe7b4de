"""Orchestration: configs to Hamiltonians, single runs, and parameter scans.

The reduced path propagates the adiabatically eliminated 4-state model at the
configured (paper-scale) pulse width.  The full path propagates every
retained plasmonic state at the rescaled width ``numerics.full_model_t``,
boosting the couplings by sqrt(T_paper / T_full) so the groups that control
the transfer (pulse area, tau/T, eliminated coupling x T, loss-per-transfer,
gamma_n/Delta_n) match the paper-scale run while the stiff detuning phases
shrink to a tractable count.
"""

import concurrent.futures
import math
from dataclasses import dataclass, replace

import numpy as np

from . import config as config_mod
from .config import RunConfig
from .dynamics import PulsePair, Trajectory, propagate, transfer_efficiency
from .errors import PropagationError
from .greens import mode_resonance, select_modes
from .hamiltonian import EffectiveHamiltonian, adiabatic_eliminate, assemble_effective
from .lowdin import canonical_orthonormalize, overlap_matrix
from .units import ns_to_internal


@dataclass(frozen=True)
class StirapResult:
    efficiency: float
    trajectory: Trajectory
    n_prime: int
    dim: int
    model_path: str
    pulse_width: float
    peak_plasmon_population: float


def truncation_index(config: RunConfig) -> int:
    return select_modes(
        config.nanoparticle,
        config.emitters,
        threshold=config.truncation.threshold,
        n_max=config.truncation.n_max,
    )


def build_resonances(config: RunConfig, n_prime: int):
    numerics = config.numerics
    return [
        mode_resonance(
            config.nanoparticle,
            config.emitters,
            n,
            halfwidths=numerics.omega_window_halfwidths,
            points=numerics.omega_points,
            coupling_scale=numerics.coupling_scale,
        )
        for n in range(1, n_prime + 1)
    ]


def build_effective_hamiltonian(config: RunConfig, n_prime=None,
                                coupling_boost=1.0) -> EffectiveHamiltonian:
    """Full single-excitation Hamiltonian for the configured geometry."""
    if n_prime is None:
        n_prime = truncation_index(config)
    resonances = build_resonances(config, n_prime)
    if coupling_boost != 1.0:
        resonances = [
            replace(res, g_amplitudes=res.g_amplitudes * coupling_boost)
            for res in resonances
        ]
    decompositions = []
    for res in resonances:
        m = overlap_matrix(config.nanoparticle, config.emitters, res.mode_n, res.omega_n_ev)
        decompositions.append(
            canonical_orthonormalize(m, res.g_amplitudes, rank_tol=config.numerics.rank_tol)
        )
    omega_eg = config.emitters[0].omega_eg_ev
    return assemble_effective(
        resonances, decompositions, omega_eg, loss_half=config.numerics.loss_half
    )


def prepare_run(config: RunConfig, model_path=None, n_prime=None):
    """(Hamiltonian, pulses) pair for the requested model path."""
    path = model_path or config.numerics.model_path
    t_paper = ns_to_internal(config.pulses.t_ns)
    if path == "reduced":
        h_full = build_effective_hamiltonian(config, n_prime=n_prime)
        h = adiabatic_eliminate(h_full)
        width = t_paper
    elif path == "full":
        width = config.numerics.full_model_t
        boost = math.sqrt(t_paper / width)
        h = build_effective_hamiltonian(config, n_prime=n_prime, coupling_boost=boost)
    else:
        raise ValueError(f"unknown model path {path!r}")
    pulses = PulsePair.from_area(config.pulses.area, config.pulses.tau_over_t, width)
    return h, pulses


def run_stirap(config: RunConfig, phi=None, n_prime=None, model_path=None,
               engine=None, area=None) -> StirapResult:
    """Propagate the STIRAP sequence from |f,g;0> and report the transfer."""
    if phi is not None:
        config = config_mod.with_phi(config, phi)
    if area is not None:
        config = replace(config, pulses=replace(config.pulses, area=area))
    path = model_path or config.numerics.model_path
    h, pulses = prepare_run(config, model_path=path, n_prime=n_prime)
    traj = propagate(
        h,
        pulses,
        rtol=config.numerics.rtol,
        engine=engine or config.numerics.engine,
        t_span=pulses.default_span(config.numerics.span_widths),
    )
    n_modes = h.delta_n.size
    return StirapResult(
        efficiency=transfer_efficiency(traj),
        trajectory=traj,
        n_prime=n_modes,
        dim=h.dim,
        model_path=path,
        pulse_width=pulses.width,
        peak_plasmon_population=float(traj.plasmon_population().max(initial=0.0)),
    )


@dataclass(frozen=True)
class ScanResult:
    phi_values: tuple
    area_values: tuple
    efficiency: np.ndarray      # (len(phi), len(area))
    status: list                # matching nested list of "ok" / error strings


def _scan_cell(args):
    config, phi, area, n_prime = args
    try:
        result = run_stirap(config, phi=phi, area=area, n_prime=n_prime)
        return result.efficiency, "ok"
    except PropagationError as exc:
        return float("nan"), f"error: {exc}"


def scan_angle_area(config: RunConfig, phi_grid=None, area_grid=None,
                    n_prime=None, workers=1) -> ScanResult:
    """Transfer efficiency over an (angle, pulse-area) grid.

    Cells are independent; with ``workers > 1`` they are distributed across
    processes and reassembled in grid order.
    """
    phis = tuple(config.scan.phi_grid() if phi_grid is None else phi_grid)
    areas = tuple(config.scan.area_grid() if area_grid is None else area_grid)
    if not phis or not areas:
        raise ValueError("scan grids must be non-empty")
    cells = [(config, phi, area, n_prime) for phi in phis for area in areas]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_scan_cell, cells, chunksize=1))
    else:
        outcomes = [_scan_cell(cell) for cell in cells]
    eff = np.array([o[0] for o in outcomes]).reshape(len(phis), len(areas))
    status = [
        [outcomes[i * len(areas) + j][1] for j in range(len(areas))]
        for i in range(len(phis))
    ]
    return ScanResult(phi_values=phis, area_values=areas, efficiency=eff, status=status)


def truncation_study(config: RunConfig, mode_counts=None, phi_grid=None,
                     area_grid=None, workers=1):
    """Rebuild with modes 1..m for each requested m and rerun the angle/area scan."""
    counts = tuple(config.scan.mode_counts if mode_counts is None else mode_counts)
    n_prime = truncation_index(config)
    results = {}
    for m in counts:
        if not 1 <= m <= n_prime:
            raise ValueError(f"mode count {m} outside 1..{n_prime}")
        results[m] = scan_angle_area(
            config, phi_grid=phi_grid, area_grid=area_grid, n_prime=m, workers=workers
        )
    return results


def distance_study(config: RunConfig, d_grid=None):
    """Per distance: recompute the truncation and run the phi = pi STIRAP.

    Both emitters are placed at the same surface distance; returns a list of
    (distance_nm, n_prime, efficiency, status) tuples.
    """
    distances = tuple(config.scan.distances_nm if d_grid is None else d_grid)
    rows = []
    for d in distances:
        if d <= 0:
            raise ValueError(f"distance must be positive, got {d}")
        moved = config_mod.with_distances(config, d)
        n_prime = truncation_index(moved)
        try:
            result = run_stirap(moved, phi=math.pi, n_prime=n_prime)
            rows.append((d, n_prime, result.efficiency, "ok"))
        except PropagationError as exc:
            rows.append((d, n_prime, float("nan"), f"error: {exc}"))
    return rows
