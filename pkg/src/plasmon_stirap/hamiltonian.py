"""Single-excitation effective Hamiltonian for two driven emitters.

Basis order: |f,g;0>, |e,g;0>, bright branch-1 plasmons (one per retained
mode), bright branch-2 plasmons (modes with two independent branches only),
|g,e;0>, |g,f;0>.  The static matrix is non-Hermitian through the plasmon
diagonal Delta_n - i gamma_n / 2; pump and Stokes envelopes enter on the
(FG, EG) and (GE, GF) pairs in the resonant rotating frame.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AssemblyError, EliminationError

EMITTER_KINDS = ("FG", "EG", "GE", "GF")


@dataclass(frozen=True)
class BasisLabel:
    kind: str             # one of FG, EG, GE, GF, B
    branch: int = 0       # bright branch index j >= 1 (kind "B" only)
    mode_n: int = 0       # plasmonic mode index (kind "B" only)

    @property
    def name(self) -> str:
        if self.kind == "B":
            return f"B{self.branch}_n{self.mode_n:02d}"
        return self.kind


@dataclass
class EffectiveHamiltonian:
    """Static non-Hermitian matrix with drive slots for the two laser pulses."""

    basis: list
    h_static: np.ndarray
    delta_n: np.ndarray
    gamma_n: np.ndarray

    def __post_init__(self):
        self.h_static = np.asarray(self.h_static, dtype=complex)
        names = [label.name for label in self.basis]
        self._index = {name: i for i, name in enumerate(names)}
        if self.h_static.shape != (len(self.basis), len(self.basis)):
            raise AssemblyError("matrix shape does not match the basis")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index_of(self, name: str) -> int:
        return self._index[name]

    @property
    def pump_slot(self):
        return self.index_of("FG"), self.index_of("EG")

    @property
    def stokes_slot(self):
        return self.index_of("GE"), self.index_of("GF")

    @property
    def plasmon_indices(self):
        return [i for i, label in enumerate(self.basis) if label.kind == "B"]


def enumerate_basis(n_prime, n_ind_per_mode=None):
    """Ordered basis labels for n' retained modes.

    ``n_ind_per_mode`` lists the number of independent bright branches of
    each mode (1 or 2); modes with a single branch contribute no branch-2
    state, shrinking the basis accordingly.
    """
    if n_prime < 1:
        raise ValueError(f"n_prime must be >= 1, got {n_prime}")
    if n_ind_per_mode is None:
        n_ind_per_mode = [2] * n_prime
    if len(n_ind_per_mode) != n_prime:
        raise ValueError("need one branch count per retained mode")
    if any(k not in (1, 2) for k in n_ind_per_mode):
        raise ValueError("branch counts must be 1 or 2 for two emitters")
    labels = [BasisLabel("FG"), BasisLabel("EG")]
    labels += [BasisLabel("B", 1, n) for n in range(1, n_prime + 1)]
    labels += [
        BasisLabel("B", 2, n)
        for n in range(1, n_prime + 1)
        if n_ind_per_mode[n - 1] == 2
    ]
    labels += [BasisLabel("GE"), BasisLabel("GF")]
    return labels


def assemble_effective(resonances, decompositions, omega_eg_ev,
                       loss_half=True) -> EffectiveHamiltonian:
    """Build the static effective Hamiltonian from per-mode fits and decompositions.

    ``resonances[k]`` supplies (omega_n, gamma_n, g amplitudes) of the k-th
    retained mode and ``decompositions[k]`` its bright-branch structure; the
    bright couplings g^(i,j) are read from decomposition.kappa_bright, i.e.
    the overlap eigensystem evaluated at the mode resonance.

    ``loss_half=True`` places -i gamma_n / 2 on the plasmon diagonal (the
    amplitude half-width consistent with the Lorentzian line shape); setting
    it False uses -i gamma_n instead.
    """
    if len(resonances) != len(decompositions):
        raise AssemblyError(
            f"{len(resonances)} resonances vs {len(decompositions)} decompositions"
        )
    if not resonances:
        raise AssemblyError("at least one retained mode is required")
    n_prime = len(resonances)
    for k, res in enumerate(resonances):
        if res.mode_n != k + 1:
            raise AssemblyError(f"expected mode {k + 1} at position {k}, got {res.mode_n}")
        if len(res.g_amplitudes) != 2:
            raise AssemblyError("driven assembly supports exactly two emitters")

    branch_counts = [dec.rank for dec in decompositions]
    basis = enumerate_basis(n_prime, branch_counts)
    dim = len(basis)
    h = np.zeros((dim, dim), dtype=complex)

    index = {label.name: i for i, label in enumerate(basis)}
    eg = index["EG"]
    ge = index["GE"]
    loss_factor = 0.5 if loss_half else 1.0

    deltas = np.empty(n_prime)
    gammas = np.empty(n_prime)
    for k, (res, dec) in enumerate(zip(resonances, decompositions)):
        n = k + 1
        deltas[k] = res.omega_n_ev - omega_eg_ev
        gammas[k] = res.gamma_n_ev
        for j in range(1, dec.rank + 1):
            b = index[BasisLabel("B", j, n).name]
            h[b, b] = deltas[k] - 1j * loss_factor * gammas[k]
            g1 = dec.kappa_bright[0, j - 1]
            g2 = dec.kappa_bright[1, j - 1]
            h[eg, b] = g1
            h[b, eg] = np.conj(g1)
            h[ge, b] = g2
            h[b, ge] = np.conj(g2)
    return EffectiveHamiltonian(basis=basis, h_static=h, delta_n=deltas, gamma_n=gammas)


def add_drive(h: EffectiveHamiltonian, pump_rabi_ev, stokes_rabi_ev) -> np.ndarray:
    """Snapshot of the full matrix with instantaneous pump/Stokes Rabi frequencies."""
    out = h.h_static.copy()
    i0, i1 = h.pump_slot
    j0, j1 = h.stokes_slot
    out[i0, i1] += pump_rabi_ev
    out[i1, i0] += pump_rabi_ev
    out[j0, j1] += stokes_rabi_ev
    out[j1, j0] += stokes_rabi_ev
    return out


def adiabatic_eliminate(h: EffectiveHamiltonian) -> EffectiveHamiltonian:
    """Close the plasmonic block into a 4-state model over FG, EG, GE, GF.

    Standard closure H_PP - H_PQ H_QQ^(-1) H_QP; the plasmon block is
    diagonal, so the emitter block acquires complex self-energies and the
    EG/GE cross coupling mediated by all bright branches.
    """
    q = h.plasmon_indices
    if not q:
        raise EliminationError("no plasmonic states to eliminate")
    p = [h.index_of(name) for name in EMITTER_KINDS]
    hqq_diag = h.h_static[q, q]
    if np.any(np.abs(hqq_diag) == 0.0):
        raise EliminationError("plasmonic block is singular (zero detuning and width)")
    h_pp = h.h_static[np.ix_(p, p)]
    h_pq = h.h_static[np.ix_(p, q)]
    h_qp = h.h_static[np.ix_(q, p)]
    reduced = h_pp - h_pq @ (h_qp / hqq_diag[:, None])
    basis = [BasisLabel(kind) for kind in EMITTER_KINDS]
    return EffectiveHamiltonian(
        basis=basis,
        h_static=reduced,
        delta_n=h.delta_n.copy(),
        gamma_n=h.gamma_n.copy(),
    )


def hermiticity_split(matrix):
    """Decompose H = H_h - i G with H_h Hermitian; returns (H_h, G)."""
    m = np.asarray(matrix, dtype=complex)
    h_h = (m + m.conj().T) / 2.0
    g = 1j * (m - m.conj().T) / 2.0
    return h_h, g


def dump_matrix_csv(h: EffectiveHamiltonian, path, matrix=None, float_format="%.11e"):
    """Write nonzero entries as (row_label, col_label, re, im) rows."""
    m = h.h_static if matrix is None else np.asarray(matrix, dtype=complex)
    names = [label.name for label in h.basis]
    with open(path, "w") as fh:
        fh.write("row_label,col_label,re,im\n")
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                if m[i, j] != 0:
                    fh.write(
                        f"{names[i]},{names[j]},"
                        f"{float_format % m[i, j].real},{float_format % m[i, j].imag}\n"
                    )
