"""Secrecy-side numerics: flatness factor, discrete Gaussian shaping, rate bounds.

The spherical flatness factor of a lattice with basis B at parameter sigma is

    eps(sigma) = vol(L) * (2 pi sigma^2)^(-D/2) * sum_{x in L} exp(-|x|^2 / (2 sigma^2)) - 1,

the maximal relative deviation from uniformity of a sigma-Gaussian folded
modulo the lattice (attained at the origin).  Two estimators are provided:
a truncated theta summation with a reported Gaussian tail bound, and a
Monte Carlo probe of the folded density over the fundamental parallelepiped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionTooLarge, EpsOutOfRange, SingularBasis

MAX_THETA_DIM = 32
_MAX_ENUM_TERMS = 50_000_000


@dataclass(frozen=True)
class LatticeBasis:
    """Full-rank real lattice basis; columns of `matrix` are the basis vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SingularBasis("basis must be a square matrix")
        if not np.all(np.isfinite(m)):
            raise SingularBasis("basis contains non-finite entries")
        if np.linalg.cond(m) > 1e12:
            raise SingularBasis("basis is singular or too ill-conditioned")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.matrix)))


def _triangularize(basis: LatticeBasis):
    """B = Q U with U upper triangular, positive diagonal."""
    q, u = np.linalg.qr(basis.matrix)
    flip = np.sign(np.diag(u))
    flip[flip == 0] = 1.0
    return q * flip[None, :], u * flip[:, None]


def enumerate_lattice_points(basis: LatticeBasis, radius: float,
                             center=None) -> np.ndarray:
    """All lattice points within `radius` of `center`, by depth-first search.

    Works on the triangularized basis; the innermost coordinate is swept
    vectorized.  Returns the points as rows (K, D).
    """
    d = basis.dim
    q, u = _triangularize(basis)
    tau = np.zeros(d) if center is None else q.T @ np.asarray(center, dtype=np.float64)
    r2 = radius * radius
    diag = np.diag(u)
    blocks: list[np.ndarray] = []
    coords = np.zeros(d, dtype=np.int64)
    terms = 0

    def descend(i: int, partial: float, offs: np.ndarray):
        nonlocal terms
        # offs[j] = sum_{l > i} U[j, l] * u_l for j <= i
        rest = r2 - partial
        if rest < 0:
            return
        half = math.sqrt(rest)
        t = offs[i] - tau[i]
        lo = math.ceil((-half - t) / diag[i])
        hi = math.floor((half - t) / diag[i])
        if hi < lo:
            return
        if i == 0:
            u0 = np.arange(lo, hi + 1, dtype=np.int64)
            terms += u0.size
            if terms > _MAX_ENUM_TERMS:
                raise MemoryError(
                    "lattice enumeration exceeds the term budget; reduce radius_factor")
            block = np.empty((u0.size, d), dtype=np.int64)
            block[:, 0] = u0
            block[:, 1:] = coords[1:][None, :]
            blocks.append(block)
            return
        for ui in range(lo, hi + 1):
            coords[i] = ui
            y = diag[i] * ui + t
            descend(i - 1, partial + y * y, offs + u[:, i] * ui)

    descend(d - 1, 0.0, np.zeros(d))
    if not blocks:
        return np.empty((0, d))
    ints = np.concatenate(blocks, axis=0)
    return ints.astype(np.float64) @ basis.matrix.T


class FlatnessEstimate(NamedTuple):
    epsilon: float
    tail_bound: float


def _ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2.0) * radius ** d / math.gamma(d / 2.0 + 1.0)


def _gaussian_sum(basis: LatticeBasis, sigma: float, radius_factor: float):
    """Truncated sum of exp(-|x|^2 / 2 sigma^2) over the lattice, with the
    standard Gaussian-mass tail bound (valid for radius_factor >= 1)."""
    d = basis.dim
    pts = enumerate_lattice_points(basis, radius_factor * sigma * math.sqrt(d))
    s = float(np.exp(-(pts ** 2).sum(axis=1) / (2.0 * sigma * sigma)).sum())
    phi = (radius_factor * math.exp((1.0 - radius_factor ** 2) / 2.0)) ** d
    tail = s * phi / (1.0 - phi) if phi < 1.0 else math.inf
    return s, tail


def flatness_theta(basis: LatticeBasis, sigma: float,
                   radius_factor: float = 8.0) -> FlatnessEstimate:
    """Truncated theta-series evaluation of the spherical flatness factor.

    The flatness factor has two exact theta expressions related by Poisson
    summation: the Gaussian sum over the lattice itself, and
    eps = sum over nonzero dual vectors w of exp(-2 pi^2 sigma^2 |w|^2).
    Enumeration runs on whichever side needs fewer points inside the
    truncation radius radius_factor * sigma' * sqrt(D) (sigma' is the
    side's own Gaussian parameter); smooth sigmas therefore cost a handful
    of dual terms instead of billions of primal ones.  The discarded
    Gaussian mass is bounded and reported alongside the estimate.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if radius_factor < 1.0:
        raise ValueError("radius_factor must be >= 1 for the tail bound to hold")
    d = basis.dim
    if d > MAX_THETA_DIM:
        raise DimensionTooLarge(f"theta summation supports D <= {MAX_THETA_DIM}")
    vol = basis.volume
    sigma_dual = 1.0 / (2.0 * math.pi * sigma)
    n_primal = _ball_volume(d, radius_factor * sigma * math.sqrt(d)) / vol
    n_dual = _ball_volume(d, radius_factor * sigma_dual * math.sqrt(d)) * vol
    if n_primal <= n_dual:
        s, tail_mass = _gaussian_sum(basis, sigma, radius_factor)
        scale = vol * (2.0 * math.pi * sigma * sigma) ** (-d / 2.0)
        return FlatnessEstimate(epsilon=max(scale * s - 1.0, 0.0),
                                tail_bound=scale * tail_mass)
    dual = LatticeBasis(np.linalg.inv(basis.matrix).T)
    s, tail_mass = _gaussian_sum(dual, sigma_dual, radius_factor)
    return FlatnessEstimate(epsilon=max(s - 1.0, 0.0), tail_bound=tail_mass)


def flatness_theta_correlated(basis: LatticeBasis, covariance,
                              radius_factor: float = 8.0) -> FlatnessEstimate:
    """Flatness factor w.r.t. a correlated Gaussian N(0, covariance).

    Whitening reduces it to the spherical case: eps_L(sqrt(Cov)) equals the
    spherical flatness of L^-1 B at sigma = 1, Cov = L L^T.
    """
    cov = np.asarray(covariance, dtype=np.float64)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularBasis("covariance is not positive definite") from exc
    white = np.linalg.solve(chol, basis.matrix)
    return flatness_theta(LatticeBasis(white), 1.0, radius_factor)


def flatness_mc(basis: LatticeBasis, sigma: float, samples: int = 10_000,
                radius_factor: float = 8.0, seed: int = 0) -> float:
    """Monte Carlo estimate: maximal deviation of the folded Gaussian density.

    Probes the fundamental parallelepiped on a coarse corner grid plus
    `samples` uniform random points; at each probe the density is a
    truncated sum over nearby lattice points.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if samples < 10_000:
        raise ValueError("samples must be at least 10^4")
    d = basis.dim
    rng = np.random.default_rng(int(seed))
    fracs = rng.random((samples, d))
    probes = [fracs @ basis.matrix.T]
    if d <= 8:
        grid = np.asarray(np.meshgrid(*([[0.0, 0.5]] * d), indexing="ij"))
        probes.append(grid.reshape(d, -1).T @ basis.matrix.T)
    else:
        probes.append(np.zeros((1, d)))
    probes = np.concatenate(probes, axis=0)

    # enumerate once around the parallelepiped center, wide enough to cover
    # every probe's own truncation ball
    center = 0.5 * basis.matrix.sum(axis=1)
    half_diam = float(np.linalg.norm(np.abs(basis.matrix).sum(axis=1))) / 2.0
    pts = enumerate_lattice_points(
        basis, radius_factor * sigma * math.sqrt(d) + half_diam, center=center)
    if pts.shape[0] == 0:
        raise SingularBasis("no lattice points enumerated; radius too small")

    scale = basis.volume * (2.0 * math.pi * sigma * sigma) ** (-d / 2.0)
    pts_sq = (pts ** 2).sum(axis=1)
    cutoff_sq = (radius_factor * sigma * math.sqrt(d)) ** 2
    worst = 0.0
    chunk = max(1, int(2e7) // max(pts.shape[0], 1))
    for lo in range(0, probes.shape[0], chunk):
        xs = probes[lo: lo + chunk]
        d2 = ((xs ** 2).sum(axis=1)[:, None] + pts_sq[None, :]
              - 2.0 * xs @ pts.T)
        np.maximum(d2, 0.0, out=d2)
        # per-probe truncation ball; only the surviving pairs pay for an exp
        ri, ci = np.nonzero(d2 <= cutoff_sq)
        vals = np.exp(-d2[ri, ci] / (2.0 * sigma * sigma))
        dens = scale * np.bincount(ri, weights=vals, minlength=xs.shape[0])
        worst = max(worst, float(np.abs(dens - 1.0).max()))
    return worst


# ---------------------------------------------------------------------------
# Closed-form calculators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecrecyParams:
    """Inputs of the secrecy-rate calculators.

    sigma_s : shaping standard deviation
    alpha : algebraic-reduction constant (user-supplied, > 0)
    n_a : number of transmit antennas
    c_b, c_e : compound-set thresholds in nats
    rate : target secrecy rate in nats per channel use (optional)
    """

    sigma_s: float
    alpha: float
    n_a: int
    c_b: float = 0.0
    c_e: float = 0.0
    rate: float | None = None

    def __post_init__(self):
        if self.sigma_s <= 0 or self.alpha <= 0 or self.n_a < 1:
            raise ValueError("sigma_s, alpha must be positive and n_a >= 1")


def sigma_eq(params: SecrecyParams) -> float:
    """Equivalent spherical shaping deviation after algebraic reduction."""
    return math.sqrt(
        params.sigma_s ** 2 * params.alpha ** (-2.0) * math.exp(-params.c_e / params.n_a)
    )


def eve_capacity(h_e: np.ndarray, sigma_s: float, sigma_e: float) -> float:
    """log det(I + (sigma_s^2 / sigma_e^2) H_e H_e^H) in nats."""
    h = np.asarray(h_e, dtype=complex)
    gram = np.eye(h.shape[0]) + (sigma_s ** 2 / sigma_e ** 2) * (h @ h.conj().T)
    sign, logdet = np.linalg.slogdet(gram)
    if sign.real <= 0:
        raise SingularBasis("capacity Gram matrix is not positive definite")
    return float(logdet)


def leakage_bound(n: int, eps: float, rate: float) -> float:
    """Information-leakage bound in bits: 8 n eps R - 8 eps log2(8 eps)."""
    if not 0.0 <= eps <= 0.25:
        raise EpsOutOfRange(f"eps = {eps} outside [0, 1/4]")
    if eps == 0.0:
        return 0.0
    return 8.0 * n * eps * rate - 8.0 * eps * math.log2(8.0 * eps)


def secrecy_rate_bound(params: SecrecyParams) -> float:
    """Achievable secrecy rate: (C_b - C_e - n_a - 2 n_a log alpha)^+, in nats."""
    return max(0.0, params.c_b - params.c_e - params.n_a
               - 2.0 * params.n_a * math.log(params.alpha))


# ---------------------------------------------------------------------------
# Discrete Gaussian sampling (randomized nearest-plane)
# ---------------------------------------------------------------------------

def _sample_integers(centers: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    """Exact windowed 1-D discrete Gaussian around per-draw centers."""
    half = int(math.ceil(10.0 * s)) + 2
    base = np.rint(centers).astype(np.int64)
    ks = base[:, None] + np.arange(-half, half + 1, dtype=np.int64)[None, :]
    w = np.exp(-((ks - centers[:, None]) ** 2) / (2.0 * s * s))
    cdf = np.cumsum(w, axis=1)
    u = rng.random(centers.shape[0]) * cdf[:, -1]
    idx = (cdf < u[:, None]).sum(axis=1)
    return ks[np.arange(centers.shape[0]), idx]


def _klein_chunk(b, q, u, target, sigma: float, rng, count: int) -> np.ndarray:
    d = b.shape[0]
    c = np.tile(target, (count, 1))
    z = np.zeros((count, d), dtype=np.int64)
    for i in range(d - 1, -1, -1):
        ci = (c @ q[:, i]) / u[i, i]
        z[:, i] = _sample_integers(ci, sigma / abs(u[i, i]), rng)
        c = c - z[:, i][:, None] * b[:, i][None, :]
    return z.astype(np.float64) @ b.T


def klein_sample_batch(basis: LatticeBasis, target, sigma: float,
                       rng: np.random.Generator, count: int) -> np.ndarray:
    """Klein's randomized nearest-plane: lattice points near `target`.

    Returns (count, D) lattice points distributed close to the discrete
    Gaussian on the lattice centered at `target`; per-coordinate standard
    deviations follow the Gram-Schmidt lengths, with no rejection step.
    Draws are processed in chunks sized to bound the sampler's window
    arrays.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    q, u = _triangularize(basis)
    target = np.asarray(target, dtype=np.float64)
    max_window = 2 * (int(math.ceil(10.0 * sigma / np.abs(np.diag(u)).min())) + 2) + 1
    chunk = max(1024, int(3e6) // max_window)
    parts = []
    done = 0
    while done < count:
        take = min(chunk, count - done)
        parts.append(_klein_chunk(basis.matrix, q, u, target, sigma, rng, take))
        done += take
    return np.concatenate(parts, axis=0)


def discrete_gaussian_sample(basis: LatticeBasis, center, sigma: float,
                             rng: np.random.Generator) -> np.ndarray:
    """One draw from the discrete Gaussian on the coset (lattice + center).

    The weight of a coset point y is proportional to exp(-|y|^2 / (2 sigma^2)),
    matching the shaping encoder's distribution; equivalently the lattice
    part is Klein-sampled around -center.
    """
    center = np.asarray(center, dtype=np.float64)
    lam = klein_sample_batch(basis, -center, sigma, rng, 1)[0]
    return center + lam


def discrete_gaussian_sample_batch(basis: LatticeBasis, center, sigma: float,
                                   rng: np.random.Generator, count: int) -> np.ndarray:
    center = np.asarray(center, dtype=np.float64)
    return center[None, :] + klein_sample_batch(basis, -center, sigma, rng, count)
