"""Compound block-fading MIMO wiretap simulation and the BER sweep.

Two channel modes:

* ``idealized-whitened`` reproduces the post-equalization model directly:
  y = x + z with white noise (unit variance at Bob, variance 6 at Eve by
  default), bypassing the channel matrices.
* ``true-zf`` transmits through H and applies the pseudo-inverse, which
  leaves correlated noise; the equalizer reports its covariance.

Real N-vectors map to complex channel uses two coordinates at a time
(re, im), antennas filled first within a channel use, zero-padded tail.
All randomness derives from counter-based Philox streams keyed by
(master seed, point index, batch index, stream id), so sweep results are
reproducible and independent of worker scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficientChannel
from .multistage_decoder import smd_decode_batch
from .pi_a_lattice import NestedPiAConfig, choose_gamma, encode_residue_batch, residues_to_euclid

MODE_IDEALIZED = "idealized-whitened"
MODE_TRUE_ZF = "true-zf"

_STREAM_MESSAGES = 0
_STREAM_NOISE_BOB = 1
_STREAM_NOISE_EVE = 2

DEFAULT_EVE_NOISE_VAR = 6.0
BATCH_FRAMES = 64


def _rng(*key: int) -> np.random.Generator:
    seq = np.random.SeedSequence([int(k) for k in key])
    return np.random.Generator(np.random.Philox(seq))


def matrix_to_json(m: np.ndarray) -> dict:
    """Complex matrix as row-major [re, im] pairs."""
    m = np.asarray(m, dtype=complex)
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "entries": [[float(x.real), float(x.imag)] for x in m.reshape(-1)],
    }


def matrix_from_json(obj) -> np.ndarray:
    entries = [complex(re, im) for re, im in obj["entries"]]
    return np.asarray(entries, dtype=complex).reshape(obj["rows"], obj["cols"])


def rayleigh_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian entries, unit variance."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    rng = np.random.default_rng(int(seed))
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / math.sqrt(2.0)


def in_compound_bob(h: np.ndarray, snr_b: float, c_b: float) -> bool:
    """det(I + SNR_b * H^H H) >= e^{C_b}: Bob's channel is good enough."""
    h = np.asarray(h, dtype=complex)
    gram = np.eye(h.shape[1]) + snr_b * (h.conj().T @ h)
    sign, logdet = np.linalg.slogdet(gram)
    return bool(sign.real > 0 and logdet >= c_b)


def in_compound_eve(h: np.ndarray, snr_e: float, c_e: float) -> bool:
    """det(I + SNR_e * H^H H) <= e^{C_e}: Eve's channel is weak enough."""
    h = np.asarray(h, dtype=complex)
    gram = np.eye(h.shape[1]) + snr_e * (h.conj().T @ h)
    sign, logdet = np.linalg.slogdet(gram)
    return bool(sign.real > 0 and logdet <= c_e)


def eve_penalty_db(noise_variance_ratio: float) -> float:
    """Noise-variance penalty in dB, e.g. 6 -> 7.7815."""
    if noise_variance_ratio <= 0:
        raise ValueError("variance ratio must be positive")
    return 10.0 * math.log10(noise_variance_ratio)


@dataclass(frozen=True)
class ChannelConfig:
    """Wiretap channel pair; sigmas are per real dimension of the lattice model."""

    n_a: int = 2
    n_b: int = 2
    n_e: int = 2
    sigma_b: float = 1.0
    sigma_e: float = math.sqrt(DEFAULT_EVE_NOISE_VAR)
    h_b: np.ndarray = None
    h_e: np.ndarray = None
    mode: str = MODE_IDEALIZED

    def __post_init__(self):
        if self.mode not in (MODE_IDEALIZED, MODE_TRUE_ZF):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.sigma_b <= 0 or self.sigma_e <= 0:
            raise ValueError("noise standard deviations must be positive")
        if self.mode == MODE_TRUE_ZF:
            for h, rows in ((self.h_b, self.n_b), (self.h_e, self.n_e)):
                if h is None or h.shape != (rows, self.n_a):
                    raise ValueError("true-zf mode needs channel matrices of the right shape")

    def sigma(self, who: str) -> float:
        if who == "bob":
            return self.sigma_b
        if who == "eve":
            return self.sigma_e
        raise ValueError("who must be 'bob' or 'eve'")

    def matrix(self, who: str) -> np.ndarray:
        return self.h_b if who == "bob" else self.h_e


# ---------------------------------------------------------------------------
# Real <-> complex packing
# ---------------------------------------------------------------------------

def channel_uses(n_real: int, n_a: int) -> int:
    """T = ceil(N / (2 n_a)); the tail of the last use is zero-padded."""
    return -(-n_real // (2 * n_a))


def pack_complex(x: np.ndarray, n_a: int) -> np.ndarray:
    """(B, N) real -> (B, n_a, T) complex; (re, im) pairs, antenna-major."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    batch, n_real = x.shape
    if n_real % 2:
        raise ValueError("real dimension must be even")
    t = channel_uses(n_real, n_a)
    z = np.zeros((batch, n_a * t), dtype=complex)
    z[:, : n_real // 2] = x[:, 0::2] + 1j * x[:, 1::2]
    # symbol u = t * n_a + ant  ->  X[ant, t]
    return z.reshape(batch, t, n_a).transpose(0, 2, 1)


def unpack_complex(x_c: np.ndarray, n_real: int) -> np.ndarray:
    """Inverse of pack_complex, dropping the zero-padded tail."""
    x_c = np.asarray(x_c, dtype=complex)
    batch = x_c.shape[0]
    flat = x_c.transpose(0, 2, 1).reshape(batch, -1)[:, : n_real // 2]
    out = np.empty((batch, n_real))
    out[:, 0::2] = flat.real
    out[:, 1::2] = flat.imag
    return out


@dataclass(frozen=True)
class EffectiveNoise:
    """Post-equalization noise description: white sigma or complex covariance."""

    white_sigma: float | None
    covariance: np.ndarray | None = None


def equalize(chan: ChannelConfig, who: str, y) -> tuple[np.ndarray, EffectiveNoise]:
    """Equalize a received block.

    In true-zf mode ``y`` is the complex (B, n_rx, T) receive block; the
    pseudo-inverse is applied and the per-complex-use noise covariance
    sigma_c^2 (H^H H)^{-1} is reported (sigma_c^2 = 2 sigma^2).  In
    idealized-whitened mode ``y`` is already the real post-equalization
    vector and passes through with its white noise description.
    """
    sigma = chan.sigma(who)
    if chan.mode == MODE_IDEALIZED:
        return np.asarray(y, dtype=np.float64), EffectiveNoise(white_sigma=sigma)
    h = chan.matrix(who)
    if np.linalg.matrix_rank(h) < chan.n_a:
        raise RankDeficientChannel(f"{who} channel matrix is rank deficient")
    y = np.asarray(y, dtype=complex)
    single = y.ndim == 2
    y3 = y[None] if single else y
    pinv = np.linalg.pinv(h)
    x_hat = np.einsum("ar,brt->bat", pinv, y3)
    n_real = 2 * chan.n_a * y3.shape[2]
    out = unpack_complex(x_hat, n_real)
    gram_inv = np.linalg.inv(h.conj().T @ h)
    cov = (2.0 * sigma * sigma) * gram_inv
    noise = EffectiveNoise(white_sigma=None, covariance=cov)
    return (out[0] if single else out), noise


def transmit(chan: ChannelConfig, who: str, x: np.ndarray,
             rng: np.random.Generator) -> np.ndarray:
    """Send a batch of real lattice vectors through the selected channel model."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    sigma = chan.sigma(who)
    if chan.mode == MODE_IDEALIZED:
        return x + sigma * rng.standard_normal(x.shape)
    h = chan.matrix(who)
    xc = pack_complex(x, chan.n_a)
    yc = np.einsum("ra,bat->brt", h, xc)
    # complex entries CN(0, 2 sigma^2) give sigma^2 per real component
    noise = sigma * (rng.standard_normal(yc.shape) + 1j * rng.standard_normal(yc.shape))
    y_eq, _ = equalize(chan, who, yc + noise)
    return y_eq[:, : x.shape[1]]


# ---------------------------------------------------------------------------
# BER sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    frames: int
    bits: int
    bob_errs: int
    eve_errs: int
    ber_bob: float
    ber_eve: float
    ber_levels: tuple[float, float, float, float]
    conv_frac: float


@dataclass(frozen=True)
class BerSweepResult:
    """Per-SNR Monte Carlo statistics for Bob and Eve."""

    rows: tuple[SweepRow, ...]
    master_seed: int

    CSV_HEADER = ("snr_db,frames,bits,bob_errs,eve_errs,ber_bob,ber_eve,"
                  "ber_l1,ber_l2,ber_l3,ber_l4,conv_frac")

    def to_csv(self) -> str:
        def g(x: float) -> str:
            return f"{x:.6g}"

        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(",".join([
                g(r.snr_db), str(r.frames), str(r.bits), str(r.bob_errs),
                str(r.eve_errs), g(r.ber_bob), g(r.ber_eve),
                *(g(x) for x in r.ber_levels), g(r.conv_frac),
            ]))
        return "\n".join(lines) + "\n"


def _run_point(args) -> SweepRow:
    (chan, cfg, snr_db, point_idx, master_seed, target_errors, max_frames,
     gamma_unit, max_iters) = args
    power = chan.sigma_b ** 2 * 10.0 ** (snr_db / 10.0)
    cfg_pt = cfg.with_gamma(gamma_unit * math.sqrt(power))
    k_per_level = [lv.k_b for lv in cfg_pt.levels]
    bits_per_frame = sum(k_per_level)

    frames = 0
    bob_errs = 0
    eve_errs = 0
    level_errs = np.zeros(4, dtype=np.int64)
    conv_frames = 0
    while frames < max_frames and bob_errs < target_errors:
        batch = min(BATCH_FRAMES, max_frames - frames)
        bidx = frames // BATCH_FRAMES
        msg_rng = _rng(master_seed, point_idx, bidx, _STREAM_MESSAGES)
        msgs = [msg_rng.integers(0, 2, size=(batch, k), dtype=np.uint8)
                for k in k_per_level]
        x = residues_to_euclid(cfg_pt, encode_residue_batch(cfg_pt, msgs))
        y_bob = transmit(chan, "bob", x, _rng(master_seed, point_idx, bidx, _STREAM_NOISE_BOB))
        y_eve = transmit(chan, "eve", x, _rng(master_seed, point_idx, bidx, _STREAM_NOISE_EVE))
        res_bob = smd_decode_batch(y_bob, cfg_pt, chan.sigma_b, max_iters=max_iters)
        res_eve = smd_decode_batch(y_eve, cfg_pt, chan.sigma_e, max_iters=max_iters)
        for j in range(4):
            lbits = int((res_bob.level_messages[j] != msgs[j]).sum())
            level_errs[j] += lbits
            bob_errs += lbits
            eve_errs += int((res_eve.level_messages[j] != msgs[j]).sum())
        conv_frames += int(res_bob.converged.all(axis=1).sum())
        frames += batch

    bits = frames * bits_per_frame
    return SweepRow(
        snr_db=float(snr_db),
        frames=frames,
        bits=bits,
        bob_errs=bob_errs,
        eve_errs=eve_errs,
        ber_bob=bob_errs / bits,
        ber_eve=eve_errs / bits,
        ber_levels=tuple(int(e) / (frames * k) for e, k in zip(level_errs, k_per_level)),
        conv_frac=conv_frames / frames,
    )


def run_ber_sweep(chan: ChannelConfig, cfg: NestedPiAConfig, snr_grid_db,
                  target_bob_errors: int = 800, max_frames: int = 20_000,
                  master_seed: int = 1, threads: int = 1,
                  max_iters: int = 50) -> BerSweepResult:
    """Monte Carlo BER sweep over Bob's SNR grid (Eve rides along).

    Per grid point, frames are simulated in fixed-size batches until at
    least target_bob_errors message-bit errors are collected at Bob or
    max_frames is reached.  The transmit power is scaled per point so that
    SNR_b = P / sigma_b^2; both receivers run the serial multistage decoder.
    """
    snr_grid_db = [float(s) for s in snr_grid_db]
    if not snr_grid_db:
        raise ValueError("SNR grid must be nonempty")
    if max_frames < 1:
        raise ValueError("max_frames must be >= 1")
    gamma_unit = choose_gamma(cfg, 1.0)
    jobs = [
        (chan, cfg, snr, idx, int(master_seed), int(target_bob_errors),
         int(max_frames), gamma_unit, int(max_iters))
        for idx, snr in enumerate(snr_grid_db)
    ]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_point, jobs))
    else:
        rows = [_run_point(j) for j in jobs]
    return BerSweepResult(rows=tuple(rows), master_seed=int(master_seed))
