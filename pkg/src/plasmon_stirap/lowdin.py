"""Canonical orthonormalization of overlapping bright modes.

Builds Gram (overlap) matrices, detects their numerical rank from the
eigenvalue spectrum, orthonormalizes possibly linearly dependent mode sets
through the global canonical construction B = A T D^(-1/2), and synthesizes
the bright coupling constants

    kappa^(i,j) = kappa_i * lambda_j^(1/2) * conj(T[i, j]),   j <= rank.

The inverse map a_i = sum_j lambda_j^(1/2) conj(T[i, j]) b_j is a singular
value decomposition of the original set.  Eigenvector order and phases are
fixed deterministically so the coefficients are reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSetError
from .greens import im_green_radial

HERMITICITY_TOL = 1e-12
# Relative gap below which eigenvalues are treated as one degenerate cluster.
CLUSTER_TOL = 1e-12


@dataclass(frozen=True)
class OverlapMatrix:
    """Hermitian positive semidefinite Gram matrix with unit diagonal."""

    entries: np.ndarray
    mode_n: int | None = None
    omega_ev: float | None = None

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("overlap matrix must be square")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL * scale:
            raise ValueError("overlap matrix is not Hermitian")
        if np.abs(np.diagonal(m) - 1.0).max() > 1e-9:
            raise ValueError("overlap matrix must have unit diagonal")
        object.__setattr__(self, "entries", np.array(m, dtype=complex))

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class LowdinDecomposition:
    """Eigenstructure of an overlap matrix plus synthesized bright couplings.

    beta[j, i] are the coefficients expressing orthonormal mode j in terms of
    the original modes; kappa_bright[i, j] couples emitter i to bright mode j.
    """

    T: np.ndarray
    lambdas: np.ndarray
    rank: int
    beta: np.ndarray
    kappa_bright: np.ndarray


def gram_matrix(vectors) -> OverlapMatrix:
    """Pairwise inner products of pre-normalized vectors (conjugate-linear in the first slot)."""
    vecs = [np.asarray(v, dtype=complex) for v in vectors]
    for i, v in enumerate(vecs):
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError(f"vector {i} is identically zero")
    c = np.column_stack(vecs)
    return OverlapMatrix(entries=c.conj().T @ c)


def eigendecompose_rank(m: OverlapMatrix, rank_tol: float = 1e-10):
    """Eigensystem of the overlap matrix with a deterministic convention.

    Returns (T, lambdas, rank): unitary T with columns ordered by descending
    eigenvalue, each column's phase fixed so its largest-magnitude entry
    (ties resolved toward the last index) is real positive, and rank counted
    as the eigenvalues above ``rank_tol`` relative to the largest.
    """
    lam, vec = np.linalg.eigh(m.entries)
    lam = lam[::-1].copy()
    vec = vec[:, ::-1].copy()

    vec = _reorthogonalize_clusters(lam, vec)
    vec = _fix_phases(vec)

    scale = max(float(lam[0]), 0.0)
    if np.any(lam < -rank_tol * max(scale, 1.0) - 1e-9):
        raise ValueError(f"overlap matrix is not positive semidefinite: min eig {lam.min()}")
    rank = int(np.sum(lam > rank_tol * max(scale, 1.0)))
    return vec, lam, rank


def canonical_orthonormalize(m: OverlapMatrix, kappa_locals,
                             rank_tol: float = 1e-10) -> LowdinDecomposition:
    """Global orthonormalization of the mode set carrying couplings ``kappa_locals``.

    Supports rank-deficient sets: only the ``rank`` eigenvalues above
    threshold contribute orthonormal modes, the rest are dropped.
    """
    kappa = np.asarray(kappa_locals, dtype=complex)
    if kappa.shape != (m.size,):
        raise ValueError(f"expected {m.size} local couplings, got shape {kappa.shape}")
    if not np.all(np.isfinite(kappa)):
        raise ValueError("local couplings must be finite")
    t, lam, rank = eigendecompose_rank(m, rank_tol=rank_tol)
    if rank == 0:
        raise DegenerateSetError("overlap matrix has no eigenvalue above the rank tolerance")
    sqrt_lam = np.sqrt(lam[:rank])
    # beta rows orthonormalize the set: beta M beta^dag = I_rank.  For the
    # real overlap matrices of the physical path they equal the expansion
    # coefficients lambda_j^(-1/2) T[i, j]; in general the expansion of the
    # orthonormal modes uses their conjugates.
    beta = (t[:, :rank].conj() / sqrt_lam).T
    kappa_bright = kappa[:, None] * sqrt_lam[None, :] * t[:, :rank].conj()
    return LowdinDecomposition(T=t, lambdas=lam, rank=rank, beta=beta,
                               kappa_bright=kappa_bright)


def reconstruct_originals(dec: LowdinDecomposition) -> np.ndarray:
    """N x rank synthesis matrix S inverting the orthonormalization.

    Satisfies S S^dag = M exactly, so the original pairwise overlaps are
    recovered from the orthonormal set.  conj(S[i, j]) is the amplitude of
    orthonormal mode j inside original mode i (the two coincide for the real
    overlap matrices of the physical path).
    """
    sqrt_lam = np.sqrt(dec.lambdas[: dec.rank])
    return dec.T[:, : dec.rank] * sqrt_lam[None, :]


def two_emitter_closed_form(mu12, kappa1, kappa2):
    """Closed-form bright couplings (k11, k12, k21, k22) for two emitters.

    ``mu12`` is the overlap of the mode excited by emitter 1 with that of
    emitter 2.  Matches canonical_orthonormalize under the documented phase
    convention; the |mu12| = 1 limit returns k12 = k22 = 0.
    """
    a = abs(mu12)
    if a == 0.0:
        raise ValueError("mu12 = 0 leaves the closed-form phase factor undefined")
    if a > 1.0 + 1e-12:
        raise ValueError(f"|mu12| must be <= 1, got {a}")
    a = min(a, 1.0)
    phase = mu12 / abs(mu12)
    plus = np.sqrt((1.0 + a) / 2.0)
    minus = np.sqrt(max(1.0 - a, 0.0) / 2.0)
    return (
        kappa1 * phase * plus,
        -kappa1 * phase * minus,
        kappa2 * plus,
        kappa2 * minus,
    )


def mode_overlap(model, emitter_i, emitter_j, n, omega_ev) -> float:
    """Overlap of the mode-n excitations of two emitters.

    Normalized cross Green function; for radial dipoles it equals
    P_n(cos phi_ij) exactly, with phi_ij the angle between the emitters.
    """
    r_i = emitter_i.radial_position_nm(model)
    r_j = emitter_j.radial_position_nm(model)
    phi = emitter_j.polar_angle_rad - emitter_i.polar_angle_rad
    cross = im_green_radial(model, n, omega_ev, r_i, r_j, phi)
    auto_i = im_green_radial(model, n, omega_ev, r_i, r_i, 0.0)
    auto_j = im_green_radial(model, n, omega_ev, r_j, r_j, 0.0)
    return float(cross / np.sqrt(auto_i * auto_j))


def overlap_matrix(model, emitters, n, omega_ev) -> OverlapMatrix:
    """Overlap matrix of the mode-n bright modes of all emitters."""
    size = len(emitters)
    m = np.eye(size, dtype=complex)
    for i in range(size):
        for j in range(i + 1, size):
            mu = mode_overlap(model, emitters[i], emitters[j], n, omega_ev)
            # M[i, j] holds the overlap of mode j with mode i; real for
            # radial dipoles so the conjugation is trivial here.
            m[i, j] = np.conj(mu)
            m[j, i] = mu
    return OverlapMatrix(entries=m, mode_n=n, omega_ev=float(omega_ev))


def _reorthogonalize_clusters(lam, vec):
    """Deterministic eigenvectors inside (numerically) degenerate clusters.

    Within each cluster the eigenbasis is arbitrary; replace it by projecting
    the canonical basis vectors in pivot order onto the cluster subspace and
    orthonormalizing, so e.g. the identity matrix yields T = identity.
    """
    n = lam.size
    scale = max(float(np.abs(lam).max()), 1.0)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(lam[stop - 1] - lam[stop]) <= CLUSTER_TOL * scale:
            stop += 1
        size = stop - start
        if size > 1:
            block = vec[:, start:stop]
            projector = block @ block.conj().T
            accepted = []
            for pivot in range(n):
                w = projector[:, pivot].copy()
                for q in accepted:
                    w -= q * (q.conj() @ w)
                norm = np.linalg.norm(w)
                if norm > 1e-6:
                    accepted.append(w / norm)
                if len(accepted) == size:
                    break
            if len(accepted) == size:
                vec[:, start:stop] = np.column_stack(accepted)
        start = stop
    return vec


def _fix_phases(vec):
    n = vec.shape[1]
    for j in range(n):
        col = vec[:, j]
        mags = np.abs(col)
        vmax = mags.max()
        candidates = np.nonzero(mags >= vmax * (1.0 - 1e-9))[0]
        anchor = col[candidates[-1]]
        vec[:, j] = col * (anchor.conjugate() / abs(anchor))
    return vec
