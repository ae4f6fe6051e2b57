"""Serial and parallel multistage decoding of the multilevel lattice.

Per symbol, the receiver forms a 16-way Gaussian likelihood over the coset
representatives, then extracts per-level bit LLRs.  The serial decoder (SMD)
conditions each level on the re-encoded decisions of the previous levels
(successive interference cancellation); the parallel decoder (PMD)
marginalizes over all sibling levels instead.  All internal arithmetic stays
in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binary_codes import DEFAULT_MAX_ITERS, LLR_CLIP
from .errors import InconsistentDecisions, LengthMismatch
from .pi_a_lattice import NUM_LEVELS, NestedPiAConfig


def _level_subsets():
    """Residue index subsets per level, keyed by the decided-prefix value.

    sets[level][beta] has shape (2^level, 2^(3-level)): row `prefix` lists the
    residues r with bits_{<level}(r) = prefix and bit_level(r) = beta.
    """
    sets = []
    for level in range(NUM_LEVELS):
        rows0, rows1 = [], []
        for prefix in range(1 << level):
            r0 = [r for r in range(16)
                  if (r & ((1 << level) - 1)) == prefix and ((r >> level) & 1) == 0]
            r1 = [r for r in range(16)
                  if (r & ((1 << level) - 1)) == prefix and ((r >> level) & 1) == 1]
            rows0.append(r0)
            rows1.append(r1)
        sets.append((np.asarray(rows0, dtype=np.int64), np.asarray(rows1, dtype=np.int64)))
    return sets


_SUBSETS = _level_subsets()
# Unconditioned halves (PMD): residues with bit_level = 0 / 1.
_MARGINAL = [
    (np.asarray([r for r in range(16) if ((r >> j) & 1) == 0], dtype=np.int64),
     np.asarray([r for r in range(16) if ((r >> j) & 1) == 1], dtype=np.int64))
    for j in range(NUM_LEVELS)
]


def _logsumexp(x: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = safe + np.log(np.sum(np.exp(x - safe), axis=axis, keepdims=True))
    return out.squeeze(axis)


@dataclass(frozen=True)
class SymbolLikelihoodTable:
    """Per-symbol 16-way coset likelihoods, stored as normalized logs."""

    log_probs: np.ndarray  # (..., n, 16); per-symbol logsumexp is 0

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)


def log_likelihood_tables(ys: np.ndarray, cfg: NestedPiAConfig, sigma: float) -> np.ndarray:
    """Batched log tables: ys is (B, 4n) -> (B, n, 16), normalized per symbol."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ys = np.asarray(ys, dtype=np.float64)
    batch = ys.shape[0]
    if ys.shape[1] != cfg.N:
        raise LengthMismatch(f"observation length {ys.shape[1]} != N = {cfg.N}")
    pts = cfg.constellation()  # (16, 4)
    sym = ys.reshape(batch, cfg.n, 4)
    d2 = ((sym[:, :, None, :] - pts[None, None, :, :]) ** 2).sum(axis=3)
    logp = -d2 / (2.0 * sigma * sigma)
    return logp - _logsumexp(logp, axis=2)[..., None]


def symbol_likelihoods(y: np.ndarray, cfg: NestedPiAConfig, sigma: float) -> np.ndarray:
    """Normalized 16-way likelihood of a single received symbol (4-vector)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    y = np.asarray(y, dtype=np.float64).reshape(4)
    pts = cfg.constellation()
    d2 = ((y[None, :] - pts) ** 2).sum(axis=1)
    logp = -d2 / (2.0 * sigma * sigma)
    return np.exp(logp - _logsumexp(logp, axis=0))


def _llr_batch(log_tables: np.ndarray, level: int, decided: np.ndarray | None,
               clip: float = LLR_CLIP) -> np.ndarray:
    """Level LLRs from log tables; decided is (B, n, level) bits or None (PMD)."""
    if not 0 <= level < NUM_LEVELS:
        raise ValueError(f"level must be in 0..{NUM_LEVELS - 1}")
    if decided is None or level == 0:
        set0, set1 = _MARGINAL[level]
        t0 = log_tables[..., set0]
        t1 = log_tables[..., set1]
    else:
        decided = np.asarray(decided)
        if decided.shape[-1] < level:
            raise InconsistentDecisions(
                f"level {level} needs {level} decided levels, got {decided.shape[-1]}")
        bits = decided[..., :level]
        if bits.max(initial=0) > 1 or bits.min(initial=0) < 0:
            raise InconsistentDecisions("decided bits must be 0/1")
        prefix = np.zeros(bits.shape[:-1], dtype=np.int64)
        for j in range(level):
            prefix |= bits[..., j].astype(np.int64) << j
        rows0, rows1 = _SUBSETS[level]
        t0 = np.take_along_axis(log_tables, rows0[prefix], axis=-1)
        t1 = np.take_along_axis(log_tables, rows1[prefix], axis=-1)
    ls0 = _logsumexp(t0, axis=-1)
    ls1 = _logsumexp(t1, axis=-1)
    # both halves carrying zero mass means the decided pattern matches no
    # residue with positive probability
    if np.any(np.isneginf(ls0) & np.isneginf(ls1)):
        raise InconsistentDecisions("decided pattern has zero total likelihood")
    llr = ls0 - ls1
    return np.clip(llr, -clip, clip)


def level_llr(table, level: int, decided=None) -> np.ndarray:
    """Per-symbol LLR of one CRT level's bits (positive favors bit 0).

    table : SymbolLikelihoodTable or an (n, 16) probability array.
    decided : (n, level) hard residue bits of the lower levels, or None to
        marginalize over them (the PMD view; for level 0 both coincide).
    """
    if isinstance(table, SymbolLikelihoodTable):
        logs = table.log_probs
    else:
        probs = np.asarray(table, dtype=np.float64)
        with np.errstate(divide="ignore"):
            logs = np.log(probs)
    single = logs.ndim == 2
    logs = logs[None] if single else logs
    dec = None
    if decided is not None:
        dec = np.asarray(decided, dtype=np.uint8)
        dec = dec[None] if single else dec
    out = _llr_batch(logs, level, dec)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Multistage decoders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultistageResult:
    """Decoded per-level messages, convergence flags, and residue decisions."""

    level_messages: tuple[np.ndarray, ...]
    converged: tuple[bool, ...]
    residues: np.ndarray  # (n, 4) re-encoded hard residue bits, stream order

    @property
    def all_converged(self) -> bool:
        return all(self.converged)


@dataclass(frozen=True)
class _BatchResult:
    level_messages: list[np.ndarray]   # per level: (B, k_j)
    converged: np.ndarray              # (B, 4) bool
    residues: np.ndarray               # (B, n, 4) uint8

    def frame(self, i: int) -> MultistageResult:
        return MultistageResult(
            level_messages=tuple(m[i] for m in self.level_messages),
            converged=tuple(bool(c) for c in self.converged[i]),
            residues=self.residues[i],
        )


def _decode_batch(ys: np.ndarray, cfg: NestedPiAConfig, sigma: float, serial: bool,
                  max_iters: int = DEFAULT_MAX_ITERS) -> _BatchResult:
    logs = log_likelihood_tables(ys, cfg, sigma)
    batch = logs.shape[0]
    decided = np.zeros((batch, cfg.n, 0), dtype=np.uint8)
    msgs, convs, residues = [], [], np.zeros((batch, cfg.n, NUM_LEVELS), dtype=np.uint8)
    for j, lv in enumerate(cfg.levels):
        llr_stream = _llr_batch(logs, j, decided if serial else None)
        perm = cfg.perm(j)
        llr_code = np.empty_like(llr_stream)
        llr_code[:, perm] = llr_stream
        bits, conv = lv.c_b.bp_decode_batch(llr_code, max_iters=max_iters)
        msg = bits[:, lv.c_b.message_cols]
        stream_bits = lv.c_b.encode(msg)[:, perm]
        msgs.append(msg)
        convs.append(conv)
        residues[:, :, j] = stream_bits
        if serial:
            decided = residues[:, :, : j + 1]
    return _BatchResult(level_messages=msgs, converged=np.stack(convs, axis=1),
                        residues=residues)


def smd_decode_batch(ys, cfg: NestedPiAConfig, sigma: float,
                     max_iters: int = DEFAULT_MAX_ITERS) -> _BatchResult:
    """Serial multistage decoding (SIC) of a batch of received vectors."""
    return _decode_batch(np.atleast_2d(ys), cfg, sigma, serial=True, max_iters=max_iters)


def pmd_decode_batch(ys, cfg: NestedPiAConfig, sigma: float,
                     max_iters: int = DEFAULT_MAX_ITERS) -> _BatchResult:
    """Parallel multistage decoding (no cancellation) of a batch."""
    return _decode_batch(np.atleast_2d(ys), cfg, sigma, serial=False, max_iters=max_iters)


def smd_decode(y, cfg: NestedPiAConfig, sigma: float,
               max_iters: int = DEFAULT_MAX_ITERS) -> MultistageResult:
    """Decode levels in CRT index order, cancelling decided levels."""
    return smd_decode_batch(np.asarray(y, dtype=np.float64)[None, :], cfg, sigma,
                            max_iters=max_iters).frame(0)


def pmd_decode(y, cfg: NestedPiAConfig, sigma: float,
               max_iters: int = DEFAULT_MAX_ITERS) -> MultistageResult:
    """Decode all levels independently from marginalized LLRs."""
    return pmd_decode_batch(np.asarray(y, dtype=np.float64)[None, :], cfg, sigma,
                            max_iters=max_iters).frame(0)
