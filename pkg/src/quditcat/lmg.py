"""D-level LMG Hamiltonian: assembly, diagonalization, parity bookkeeping.

The density-normalized Hamiltonian acting on the symmetric N-quDit space is

    H = (eps/N) (S_{D-1,D-1} - S_00) - lam/(N(N-1)) sum_{i != j} S_ij^2,

with a one-body ladder of equally spaced levels and a two-body term that
scatters particle pairs between levels.  Pair scattering conserves every
level-population parity, so H is block diagonal over the Z2^(D-1) sectors
and each eigenstate carries a definite parity label; exactly degenerate
clusters are rotated into the simultaneous parity eigenbasis so that the
classification stays deterministic.

Level indices are 0-based throughout: for D = 3 the one-body term reads
(eps/N)(S_22 - S_00).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .coherent import SymmetricState, spin_matrix
from .fock import FockBasis
from .parity import all_parity_labels, sector_mask

CLUSTER_GAP = 1e-10
RESIDUAL_TOL = 1e-10


class DiagonalizationError(Exception):
    """Eigensolver failed to meet its residual contract."""


@dataclass(frozen=True)
class LMGParams:
    """Model parameters; density mode unless lambda1/lambda2 are given.

    In density mode the one-body gap eps is divided by N and the two-body
    coupling lam by the pair count N(N-1), so eigenvalues are energy
    densities in eps units.  Supplying lambda1/lambda2 switches to the
    unnormalized general Hamiltonian
    eps (S_{D-1,D-1} - S_00) + sum_{i != j} (lambda1 S_ij^2 + lambda2 S_ij S_ji).
    """

    D: int
    N: int
    epsilon: float = 1.0
    lam: float = 0.0
    lambda1: float | None = None
    lambda2: float | None = None

    def __post_init__(self):
        if self.D < 2:
            raise ValueError("need at least two levels")
        if self.N < 1:
            raise ValueError("need at least one particle")
        if not self.general and self.N < 2:
            raise ValueError("density mode normalizes by N(N-1); need N >= 2")

    @property
    def general(self) -> bool:
        return self.lambda1 is not None or self.lambda2 is not None


def build_hamiltonian(params: LMGParams, basis: FockBasis | None = None) -> np.ndarray:
    """Dense real symmetric LMG Hamiltonian over the symmetric Fock basis."""
    if basis is None:
        basis = FockBasis(params.D, params.N)
    if basis.D != params.D or basis.N != params.N:
        raise ValueError("basis does not match parameters")
    D, N = params.D, params.N

    one_body = (spin_matrix(basis, D - 1, D - 1) - spin_matrix(basis, 0, 0)).astype(
        float
    )
    pair_hop = None
    exchange = None
    need_exchange = params.general and params.lambda2 not in (None, 0.0)
    for i in range(D):
        for j in range(D):
            if i == j:
                continue
            s_ij = spin_matrix(basis, i, j)
            term = s_ij @ s_ij
            pair_hop = term if pair_hop is None else pair_hop + term
            if need_exchange:
                term2 = s_ij @ spin_matrix(basis, j, i)
                exchange = term2 if exchange is None else exchange + term2

    if params.general:
        lam1 = params.lambda1 or 0.0
        lam2 = params.lambda2 or 0.0
        H = params.epsilon * one_body + lam1 * pair_hop
        if need_exchange:
            H = H + lam2 * exchange
    else:
        H = (params.epsilon / N) * one_body - (
            params.lam / (N * (N - 1))
        ) * pair_hop
    dense = H.toarray()
    return (dense + dense.T) / 2.0


@dataclass
class SpectrumResult:
    """Eigenpairs in ascending order with their parity classification."""

    basis: FockBasis
    eigenvalues: np.ndarray
    eigenstates: list[SymmetricState]
    parities: list[tuple[int, ...]]
    certainties: np.ndarray
    mixed: np.ndarray  # True where certainty < 1 - 1e-8 (degenerate-mixed)


def classify_parity(state: SymmetricState) -> tuple[tuple[int, ...], float]:
    """Most probable parity sector and its weight <psi|Pi_c|psi>.

    Ties break toward the lexicographically smallest label.
    """
    basis = state.basis
    weights = np.bincount(
        basis.sector_codes,
        weights=np.abs(state.coeffs) ** 2,
        minlength=2 ** (basis.D - 1),
    )
    code = int(np.argmax(weights))
    bits = tuple((code >> shift) & 1 for shift in range(basis.D - 2, -1, -1))
    return bits, float(weights[code])


def _rotate_cluster(basis: FockBasis, vecs: np.ndarray) -> np.ndarray | None:
    """Rotate a degenerate cluster into parity-pure vectors, or None."""
    m = vecs.shape[1]
    pieces = []
    for label in all_parity_labels(basis.D):
        block = vecs * sector_mask(basis, label)[:, None]
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        pieces.extend(u[:, i] for i in range(m) if s[i] > 1e-6)
    if len(pieces) != m:
        return None
    return np.stack(pieces, axis=1)


def diagonalize(
    H: np.ndarray,
    basis: FockBasis,
    k: int | None = None,
    cluster_gap: float = CLUSTER_GAP,
) -> SpectrumResult:
    """Dense symmetric eigendecomposition with parity classification.

    Returns the k lowest eigenpairs (all when k is None).  Clusters with
    eigenvalue gaps below cluster_gap are re-orthonormalized inside the
    simultaneous parity eigenbasis, ordered by parity label, so repeated
    runs give identical labels even for numerically degenerate states.
    """
    dim = H.shape[0]
    if H.shape != (dim, dim) or dim != basis.size:
        raise ValueError("matrix does not match basis size")
    scale = float(np.max(np.sum(np.abs(H), axis=1)))

    if k is None:
        vals, vecs = scipy.linalg.eigh(H)
    else:
        if not 1 <= k <= dim:
            raise ValueError(f"k must lie in 1..{dim}")
        # pull extra pairs until the cluster holding index k-1 closes, so a
        # degenerate group is never cut at the subset boundary
        k_eff = min(dim, k + 2 ** (basis.D - 1))
        while True:
            vals, vecs = scipy.linalg.eigh(H, subset_by_index=(0, k_eff - 1))
            tail_gaps = np.diff(vals[k - 1 :])
            if k_eff == dim or np.any(tail_gaps > cluster_gap):
                break
            k_eff = min(dim, 2 * k_eff)

    residual = np.linalg.norm(H @ vecs - vecs * vals[None, :], axis=0)
    if np.any(residual > RESIDUAL_TOL * max(scale, 1.0)):
        raise DiagonalizationError(
            f"eigenpair residual {residual.max():.3e} exceeds "
            f"{RESIDUAL_TOL * max(scale, 1.0):.3e}"
        )

    # split into near-degenerate clusters and rotate each to parity purity
    splits = np.nonzero(np.diff(vals) > cluster_gap)[0] + 1
    blocks = np.split(np.arange(len(vals)), splits)
    for block in blocks:
        if len(block) < 2:
            continue
        rotated = _rotate_cluster(basis, vecs[:, block])
        if rotated is not None:
            labels = [
                classify_parity(SymmetricState(basis, rotated[:, i]))[0]
                for i in range(rotated.shape[1])
            ]
            order = sorted(range(len(labels)), key=labels.__getitem__)
            vecs[:, block] = rotated[:, order]

    if k is not None:
        vals = vals[:k]
        vecs = vecs[:, :k]

    states = [SymmetricState(basis, vecs[:, i]) for i in range(vecs.shape[1])]
    labels, certainties = zip(*(classify_parity(s) for s in states))
    certainties = np.asarray(certainties)
    return SpectrumResult(
        basis=basis,
        eigenvalues=vals,
        eigenstates=list(states),
        parities=list(labels),
        certainties=certainties,
        mixed=certainties < 1.0 - 1e-8,
    )


@dataclass
class SweepRow:
    lam: float
    energies: np.ndarray | None
    parities: list[tuple[int, ...]] | None
    certainties: np.ndarray | None
    error: str | None = None


def spectrum_sweep(
    params: LMGParams,
    lam_grid,
    levels_kept: int,
    workers: int | None = 1,
) -> list[SweepRow]:
    """Low-lying spectrum and parities on a grid of couplings.

    Each grid point is an independent job; failures are recorded in the
    row instead of aborting the sweep.  Rows come back in grid order.
    """
    basis = FockBasis(params.D, params.N)
    lam_grid = [float(v) for v in lam_grid]

    def run(lam: float) -> SweepRow:
        try:
            p = LMGParams(params.D, params.N, params.epsilon, lam)
            spectrum = diagonalize(build_hamiltonian(p, basis), basis, k=levels_kept)
            return SweepRow(
                lam,
                spectrum.eigenvalues.copy(),
                spectrum.parities,
                spectrum.certainties.copy(),
            )
        except Exception as exc:  # per-row isolation is the contract
            return SweepRow(lam, None, None, None, error=str(exc))

    if workers is not None and workers == 1:
        return [run(lam) for lam in lam_grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, lam_grid))
