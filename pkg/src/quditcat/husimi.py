"""Husimi function and phase-space localization measures on CP^(D-1).

The Husimi function of a symmetric N-quDit state is Q(z) = |<z|psi>|^2
with |z> a U(D)-spin coherent state.  Under the unitarily invariant
(Fubini-Study) measure normalized so that coherent states resolve the
identity, Q integrates to one, its nu-th moments measure localization
(nu = 2 is the inverse participation ratio), and -int Q ln Q is the Wehrl
entropy, minimized by coherent states.

Moments of integer order are computed exactly by a polynomial method:
the amplitudes sqrt(N!/prod n_i!) c_n define a degree-N polynomial whose
nu-th power, paired with the monomial norms at particle number N*nu,
yields the moment without any quadrature.  Monte-Carlo backends (uniform
Haar sampling and importance sampling from coherent-branch mixtures)
cover the Wehrl integral, which has no closed form at finite N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import gammaln, logsumexp

from .coherent import SymmetricState, log_dscs_coefficients
from .fock import CapacityError, basis_size

DEFAULT_MOMENT_CAP = 10_000_000

# chunk size (in matrix elements) for batched coefficient evaluation;
# bounds peak memory of the temporaries near 250 MB
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class IntegrationSpec:
    """Monte-Carlo integration plan; deterministic for a fixed seed."""

    method: str = "haar_mc"
    samples: int = 1_000_000
    seed: int = 0
    batch: int = 200_000

    def __post_init__(self):
        if self.method not in ("haar_mc", "importance_mc"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.samples < 1_000:
            raise ValueError("need at least 1000 samples")
        if self.batch < 1:
            raise ValueError("batch size must be positive")


@dataclass(frozen=True)
class MomentReport:
    """A Husimi moment value with its statistical error (0 if analytic)."""

    value: float
    std_error: float
    method: str


@dataclass(frozen=True)
class HusimiGridSpec:
    """Rectangular slice of phase space along real or imaginary axes."""

    points: int = 128
    half_range: float = 1.5
    slice: str = "position"

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if self.half_range <= 0:
            raise ValueError("half_range must be positive")
        if self.slice not in ("position", "momentum"):
            raise ValueError(f"unknown slice {self.slice!r}")

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_range, self.half_range, self.points)


def husimi_values(state: SymmetricState, zs: np.ndarray) -> np.ndarray:
    """Q(z) = |<z|psi>|^2 for a batch of phase points, shape (m, D-1)."""
    zs = np.asarray(zs, dtype=complex)
    if zs.ndim == 1:
        zs = zs[None, :]
    basis = state.basis
    chunk = max(1, _CHUNK_ELEMENTS // basis.size)
    out = np.empty(zs.shape[0])
    for start in range(0, zs.shape[0], chunk):
        block = zs[start : start + chunk]
        logmag, phase = log_dscs_coefficients(basis, block)
        amps = np.exp(logmag - 1j * phase) @ state.coeffs
        out[start : start + block.shape[0]] = np.abs(amps) ** 2
    return np.minimum(out, 1.0)


def husimi_value(state: SymmetricState, z) -> float:
    """Husimi function of a normalized state at a single phase point."""
    return float(husimi_values(state, np.asarray(z, dtype=complex))[0])


def haar_sample(D: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-uniform points of CP^(D-1) in the z_0 = 1 patch.

    Draws a standard complex normal D-vector c and returns c_{1:}/c_0,
    redrawing on the measure-zero event that c_0 nearly vanishes.
    """
    m = 1 if size is None else size
    c = _complex_normal(rng, (m, D))
    bad = np.abs(c[:, 0]) ** 2 < 1e-12 * np.sum(np.abs(c) ** 2, axis=1)
    while np.any(bad):
        c[bad] = _complex_normal(rng, (int(bad.sum()), D))
        bad = np.abs(c[:, 0]) ** 2 < 1e-12 * np.sum(np.abs(c) ** 2, axis=1)
    z = c[:, 1:] / c[:, 0:1]
    return z[0] if size is None else z


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _branch_unitary(w: np.ndarray) -> np.ndarray:
    """Unitary sending the homogeneous basis vector e_0 to (1, w)/|(1, w)|."""
    D = w.shape[0] + 1
    q = np.concatenate([[1.0 + 0.0j], w])
    q /= np.linalg.norm(q)
    u = np.zeros(D, dtype=complex)
    u[0] = 1.0
    u -= q
    nrm2 = np.vdot(u, u).real
    if nrm2 < 1e-30:
        return np.eye(D, dtype=complex)
    return np.eye(D, dtype=complex) - 2.0 * np.outer(u, u.conj()) / nrm2


def sample_dscs_husimi(
    w, N: int, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Draw phase points distributed as the Husimi density of the DSCS |w>.

    At w = 0 the target density over the invariant measure is proportional
    to (1+|z|^2)^(-N), obtained exactly as z = v/sqrt(s) with v standard
    complex normal and s ~ Gamma(N+1); a unitary Moebius map then recenters
    the cloud on any other w.
    """
    w = np.asarray(w, dtype=complex)
    D = w.shape[0] + 1
    s = rng.gamma(N + 1.0, 1.0, size)
    v = _complex_normal(rng, (size, D - 1))
    z0 = v / np.sqrt(s)[:, None]
    if not np.any(w):
        return z0
    U = _branch_unitary(w)
    hom = np.concatenate([np.ones((size, 1), dtype=complex), z0], axis=1)
    zeta = hom @ U.T
    bad = np.abs(zeta[:, 0]) ** 2 < 1e-12 * np.sum(np.abs(zeta) ** 2, axis=1)
    while np.any(bad):
        n_bad = int(bad.sum())
        s = rng.gamma(N + 1.0, 1.0, n_bad)
        v = _complex_normal(rng, (n_bad, D - 1))
        hom_bad = np.concatenate(
            [np.ones((n_bad, 1), dtype=complex), v / np.sqrt(s)[:, None]], axis=1
        )
        zeta[bad] = hom_bad @ U.T
        bad = np.abs(zeta[:, 0]) ** 2 < 1e-12 * np.sum(np.abs(zeta) ** 2, axis=1)
    return zeta[:, 1:] / zeta[:, 0:1]


def _log_branch_husimi(zs: np.ndarray, centers: np.ndarray, N: int) -> np.ndarray:
    """log Q_{|w_b>}(z) for each sample (rows) and branch center (cols)."""
    cross = 1.0 + zs.conj() @ centers.T
    with np.errstate(divide="ignore"):
        log_cross = np.log(np.abs(cross))
    return (
        2.0 * N * log_cross
        - N * np.log1p(np.sum(np.abs(zs) ** 2, axis=1))[:, None]
        - N * np.log1p(np.sum(np.abs(centers) ** 2, axis=1))[None, :]
    )


def phase_space_expectation(
    state: SymmetricState,
    integrand,
    spec: IntegrationSpec,
    centers=None,
) -> tuple[float, float]:
    """Monte-Carlo estimate of int f(Q_psi(z)) dmu(z) with jackknife error.

    integrand maps an array of Husimi values to the array of f(Q).  With
    haar_mc the estimator is dim * mean f(Q) over uniform samples; with
    importance_mc samples come from an equal-weight mixture of coherent
    Husimi densities at the supplied branch `centers` and the integrand is
    reweighted by the mixture density.
    """
    basis = state.basis
    dim = basis.size
    if spec.method == "importance_mc":
        if centers is None or len(centers) == 0:
            raise ValueError("importance_mc requires at least one branch center")
        centers = np.asarray(centers, dtype=complex).reshape(-1, basis.D - 1)

    n_batches = max(2, -(-spec.samples // spec.batch))
    sizes = [len(part) for part in np.array_split(np.arange(spec.samples), n_batches)]
    streams = np.random.SeedSequence(spec.seed).spawn(n_batches)

    sums = np.empty(n_batches)
    for b, (n_b, ss) in enumerate(zip(sizes, streams)):
        rng = np.random.default_rng(ss)
        if spec.method == "haar_mc":
            zs = haar_sample(basis.D, rng, n_b)
            vals = dim * integrand(husimi_values(state, zs))
        else:
            which = rng.integers(0, centers.shape[0], n_b)
            zs = np.empty((n_b, basis.D - 1), dtype=complex)
            for idx in range(centers.shape[0]):
                mask = which == idx
                if np.any(mask):
                    zs[mask] = sample_dscs_husimi(
                        centers[idx], basis.N, rng, int(mask.sum())
                    )
            log_p = logsumexp(
                _log_branch_husimi(zs, centers, basis.N), axis=1
            ) - np.log(centers.shape[0])
            vals = integrand(husimi_values(state, zs)) * np.exp(-log_p)
        sums[b] = float(np.sum(vals))

    sizes = np.asarray(sizes, dtype=float)
    total = sums.sum()
    n = sizes.sum()
    estimate = total / n
    loo = (total - sums) / (n - sizes)
    se = math.sqrt((n_batches - 1) / n_batches * float(np.sum((loo - loo.mean()) ** 2)))
    return estimate, se


def moment_analytic(
    state: SymmetricState, nu: int, cap: int = DEFAULT_MOMENT_CAP
) -> MomentReport:
    """Exact nu-th Husimi moment of a normalized state.

    Forms the amplitude polynomial p_n = sqrt(N!/prod n_i!) c_n on the
    (n_1, ..., n_{D-1}) grid, convolves it nu times, and contracts the
    squared coefficients with the multinomial norms of the N*nu particle
    sector.  All weights are carried in log space with a single scale
    offset so the method works unchanged at N in the hundreds.
    """
    if int(nu) != nu or nu < 2:
        raise ValueError("analytic moments need integer nu >= 2")
    nu = int(nu)
    basis = state.basis
    N, D = basis.N, basis.D
    M = N * nu
    if basis_size(D, M) > cap:
        raise CapacityError(
            f"moment order {nu} at (D={D}, N={N}) needs sector size "
            f"{basis_size(D, M)} > cap {cap}"
        )

    log_p = 0.5 * basis.log_multinomials
    mags = np.abs(state.coeffs)
    nz = mags > 0.0
    log_mag = np.where(nz, log_p + np.log(np.where(nz, mags, 1.0)), -np.inf)
    scale = float(log_mag[nz].max())
    p = np.zeros(basis.size, dtype=complex)
    p[nz] = np.exp(log_mag[nz] - scale) * (state.coeffs[nz] / mags[nz])

    grid = np.zeros((N + 1,) * (D - 1), dtype=complex)
    grid[tuple(basis.states[:, 1:].T)] = p
    if np.all(grid.imag == 0.0):
        grid = grid.real

    # exact convolution by shifted accumulation over the occupied simplex
    # cells only; an FFT here would smear its absolute error across the
    # huge dynamic range of the coefficients and break the 1e-10 contract
    kernel_idx = basis.states[:, 1:]
    kernel_vals = grid[tuple(kernel_idx.T)]
    occupied = kernel_vals != 0.0
    kernel_idx = kernel_idx[occupied]
    kernel_vals = kernel_vals[occupied]
    result = grid
    for step in range(1, nu):
        out = np.zeros((step * N + N + 1,) * (D - 1), dtype=result.dtype)
        for val, idx in zip(kernel_vals, kernel_idx):
            window = tuple(
                slice(int(i), int(i) + result.shape[d]) for d, i in enumerate(idx)
            )
            out[window] += val * result
        result = out

    ks = np.indices(result.shape, dtype=np.int64)
    ksum = ks.sum(axis=0)
    k0 = M - ksum
    valid = (k0 >= 0) & (np.abs(result) > 0.0)
    if not np.any(valid):
        return MomentReport(0.0, 0.0, "analytic")
    log_w = gammaln(k0[valid] + 1.0) - gammaln(M + 1.0)
    for axis_k in ks:
        log_w += gammaln(axis_k[valid] + 1.0)
    log_terms = 2.0 * np.log(np.abs(result[valid])) + 2.0 * nu * scale + log_w
    log_ratio = math.log(basis_size(D, N)) - math.log(basis_size(D, M))
    value = float(np.exp(logsumexp(log_terms) + log_ratio))
    return MomentReport(value, 0.0, "analytic")


def moment_mc(
    state: SymmetricState,
    nu: float,
    spec: IntegrationSpec,
    centers=None,
) -> MomentReport:
    """Monte-Carlo nu-th Husimi moment with jackknife standard error."""
    if nu <= 1:
        raise ValueError("moments are defined for nu > 1")
    value, se = phase_space_expectation(state, lambda q: q**nu, spec, centers)
    return MomentReport(value, se, spec.method)


def wehrl_entropy(
    state: SymmetricState,
    spec: IntegrationSpec,
    centers=None,
) -> tuple[float, float]:
    """Wehrl entropy -int Q ln Q dmu by Monte-Carlo, with standard error.

    0 ln 0 is taken as 0 and Q is clamped at 1e-300 before the log.
    For importance_mc, `centers` should hold the coherent branch points of
    the state (e.g. the sign flips of a cat's label) so the proposal
    mixture covers the Husimi mass.
    """

    def integrand(q):
        return np.where(q > 0.0, -q * np.log(np.maximum(q, 1e-300)), 0.0)

    return phase_space_expectation(state, integrand, spec, centers)


def renyi_wehrl(
    state: SymmetricState,
    nu: float,
    method: str = "analytic",
    spec: IntegrationSpec | None = None,
    centers=None,
) -> float:
    """Renyi-Wehrl entropy ln(M_nu)/(1-nu) using the chosen moment backend."""
    if nu == 1:
        raise ValueError("nu = 1 is the Wehrl limit; use wehrl_entropy")
    if method == "analytic":
        report = moment_analytic(state, int(nu))
    elif method in ("haar_mc", "importance_mc"):
        if spec is None:
            raise ValueError("Monte-Carlo backend needs an IntegrationSpec")
        if spec.method != method:
            spec = IntegrationSpec(method, spec.samples, spec.seed, spec.batch)
        report = moment_mc(state, nu, spec, centers)
    else:
        raise ValueError(f"unknown moment backend {method!r}")
    return math.log(report.value) / (1.0 - nu)


def limit_reference(
    kind: str,
    D: int,
    nu: float | None = None,
    k: int | None = None,
    c_l_weight: int | None = None,
    n_particles: int | None = None,
) -> float:
    """Closed-form reference values for moments and Wehrl entropies.

    Kinds:
        dscs_moment              exact finite-N DSCS moment (needs n_particles, nu)
        dscs_moment_limit        1/nu^(D-1)
        cat_moment_limit         (2^(D-1))^(1-nu) / nu^(D-1)
        cat_moment_limit_reduced (2^(k+w))^(1-nu) / nu^(D-1), w = c_l_weight
        dscs_wehrl               exact finite-N DSCS Wehrl entropy if
                                 n_particles is given, else the limit D-1
        wehrl_limit_cat          (D-1)(1 + ln 2)
        wehrl_limit_reduced      (D-1) + (k+w) ln 2
    """
    ln2 = math.log(2.0)
    if kind == "dscs_moment":
        if n_particles is None or nu is None:
            raise ValueError("dscs_moment needs n_particles and nu")
        return dscs_moment_exact(D, n_particles, nu)
    if kind == "dscs_moment_limit":
        _need(nu=nu)
        return float(nu) ** (1 - D)
    if kind == "cat_moment_limit":
        _need(nu=nu)
        return (2.0 ** (D - 1)) ** (1 - nu) / float(nu) ** (D - 1)
    if kind == "cat_moment_limit_reduced":
        _need(nu=nu, k=k, c_l_weight=c_l_weight)
        return (2.0 ** (k + c_l_weight)) ** (1 - nu) / float(nu) ** (D - 1)
    if kind == "dscs_wehrl":
        if n_particles is not None:
            return dscs_wehrl_exact(D, n_particles)
        return float(D - 1)
    if kind == "wehrl_limit_cat":
        return (D - 1) * (1.0 + ln2)
    if kind == "wehrl_limit_reduced":
        _need(k=k, c_l_weight=c_l_weight)
        return (D - 1) + (k + c_l_weight) * ln2
    raise ValueError(f"unknown reference kind {kind!r}")


def _need(**kwargs):
    for name, value in kwargs.items():
        if value is None:
            raise ValueError(f"missing parameter {name!r} for this reference kind")


def dscs_moment_exact(D: int, N: int, nu: float) -> float:
    """Finite-N DSCS moment prod_{j=1..D-1} (N+j)/(N nu + j); exact for int nu."""
    out = 1.0
    for j in range(1, D):
        out *= (N + j) / (N * nu + j)
    return out


def dscs_wehrl_exact(D: int, N: int) -> float:
    """Finite-N DSCS Wehrl entropy N sum_{j=1..D-1} 1/(N+j)."""
    return N * sum(1.0 / (N + j) for j in range(1, D))


def husimi_grid(
    state: SymmetricState, spec: HusimiGridSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Husimi values on a rectangular real slice of phase space.

    Returns (points, q): points has one row per grid node (row-major over
    the D-1 axes) holding the real slice coordinates, and q the Husimi
    value there.  The position slice evaluates Q at z = x (real), the
    momentum slice at z = i p.
    """
    n_axes = state.basis.D - 1
    if n_axes > 2:
        raise ValueError("grid slices are supported for D = 2 and D = 3 only")
    axis = spec.axis()
    grids = np.meshgrid(*([axis] * n_axes), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    zs = pts.astype(complex) if spec.slice == "position" else 1j * pts
    q = husimi_values(state, zs)
    return pts, q


def count_humps(state: SymmetricState, spec: HusimiGridSpec) -> int:
    """Number of local maxima of Q on the real position grid.

    Plateau cells tied with their neighbours are merged into a single
    hump (8-connectivity), implementing the closer-than-one-cell merge
    rule.  A warning is raised when two nearby humps differ by less than
    1e-6 in Q, where the merge decision is ambiguous.
    """
    if spec.points < 64:
        raise ValueError("hump counting needs at least 64 points per axis")
    if spec.slice != "position":
        raise ValueError("hump counting is defined on the position slice")
    n_axes = state.basis.D - 1
    _, q = husimi_grid(state, spec)
    q = q.reshape((spec.points,) * n_axes)

    padded = np.pad(q, 1, mode="constant", constant_values=-np.inf)
    is_max = np.ones_like(q, dtype=bool)
    offsets = (
        [(-1,), (1,)]
        if n_axes == 1
        else [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]
    )
    core = (slice(1, -1),) * n_axes
    for off in offsets:
        shifted = padded[tuple(slice(1 + o, padded.shape[d] - 1 + o) for d, o in enumerate(off))]
        is_max &= q >= shifted
    # edge nodes cannot be certified as maxima
    border = np.ones_like(is_max)
    border[core] = False
    is_max &= ~border
    # floating-point dust along exact zero curves of Q must not register;
    # genuine humps of normalized states sit many decades above it
    top = float(q.max())
    if top <= 0.0:
        return 0
    is_max &= q > 1e-9 * top

    structure = np.ones((3,) * n_axes, dtype=int)
    labels, count = ndimage.label(is_max, structure=structure)
    if count > 1:
        peaks = np.sort(ndimage.maximum(q, labels, index=np.arange(1, count + 1)))
        if np.min(np.diff(peaks)) < 1e-6:
            warnings.warn(
                "merge ambiguity: two humps differ by less than 1e-6 in Q",
                stacklevel=2,
            )
    return int(count)
