"""Multilevel lattice assembly: CRT-combined component codes over O_K.

The lattice is the preimage of the CRT code under reduction mod p, i.e.
C + (pO_K)^n.  Per-symbol coset representatives use integral-basis
coefficients in {0, ..., p-1}; for p = 2 the per-symbol constellation is the
embedded image of the {0,1}^4 coefficient hypercube, scaled by gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .binary_codes import NestedCodePair
from .errors import LengthMismatch, UnsupportedCase
from .ideals_crt import CrtContext
from .number_field import BiquadraticField, OkElement

NUM_LEVELS = 4

FINE = "fine"
COARSE = "coarse"


def make_interleavers(n: int, seed: int) -> tuple[np.ndarray, ...]:
    """Seeded per-level interleavers, applied between encoder and mapper."""
    rng = np.random.default_rng(int(seed))
    return tuple(rng.permutation(n) for _ in range(NUM_LEVELS))


@dataclass(eq=False)
class NestedPiAConfig:
    """Nested pair of multilevel lattices: 4 binary level codes over one field.

    levels[j] pairs the fine code c_b and nested subcode (dimension k_e) of
    CRT level j; level order follows the lexicographically sorted reduction
    maps of the CrtContext.  interleavers, when given, permute each level's
    codeword before symbol mapping: stream bit t is codeword bit perm[t].
    Treat instances as immutable; derived tables are cached per instance.
    """

    field: BiquadraticField
    ctx: CrtContext
    levels: tuple[NestedCodePair, ...]
    n: int
    gamma: float
    interleavers: tuple[np.ndarray, ...] | None = None
    _rep_coeffs: np.ndarray = field(default=None, repr=False)
    _points: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.ctx.p != 2:
            raise UnsupportedCase("binary levels only: the CRT modulus prime must be 2")
        if len(self.levels) != NUM_LEVELS:
            raise LengthMismatch(f"need {NUM_LEVELS} level codes, got {len(self.levels)}")
        if any(lv.n != self.n for lv in self.levels):
            raise LengthMismatch("all level codes must share the block length n")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.interleavers is not None:
            if len(self.interleavers) != NUM_LEVELS:
                raise LengthMismatch("need one interleaver per level")
            for perm in self.interleavers:
                if sorted(perm.tolist()) != list(range(self.n)):
                    raise ValueError("interleaver is not a permutation of range(n)")

    @property
    def N(self) -> int:
        """Real dimension of the embedded lattice, 4 coordinates per symbol."""
        return 4 * self.n

    @property
    def total_message_bits(self) -> int:
        return sum(lv.k_b for lv in self.levels)

    def perm(self, level: int) -> np.ndarray:
        if self.interleavers is None:
            return np.arange(self.n)
        return self.interleavers[level]

    # -- derived tables -------------------------------------------------------

    def residue_coeffs(self) -> np.ndarray:
        """(16, 4) uint8: integral-basis coefficients of each residue's coset rep.

        Residue index r encodes the level bits as bit j of r = level-j residue.
        """
        if self._rep_coeffs is None:
            table = np.empty((16, 4), dtype=np.uint8)
            for r in range(16):
                bits = tuple((r >> j) & 1 for j in range(NUM_LEVELS))
                table[r] = self.ctx.inverse(bits).coeffs
            self._rep_coeffs = table
        return self._rep_coeffs

    def constellation(self) -> np.ndarray:
        """(16, 4) float: embedded, gamma-scaled coset representatives."""
        if self._points is None:
            coeffs = self.residue_coeffs().astype(float)
            self._points = self.gamma * (coeffs @ self.field.embedding_matrix.T)
        return self._points

    def with_gamma(self, gamma: float) -> "NestedPiAConfig":
        return replace(self, gamma=float(gamma), _rep_coeffs=None, _points=None)

    def to_dict(self, include_codes: bool = False) -> dict:
        """JSON-ready description: field reference, level shapes, scaling.

        With include_codes=True each level also carries its parity-check
        matrix (alist text) and nested-subcode generator rows, enough to
        reconstruct the codebook exactly.
        """
        from .binary_codes import to_alist

        out = {
            "schema_version": 1,
            "field": {"a": self.field.a, "b": self.field.b},
            "p": self.ctx.p,
            "n": self.n,
            "N": self.N,
            "gamma": self.gamma,
            "levels": [{"k_b": lv.k_b, "k_e": lv.k_e} for lv in self.levels],
            "interleavers": None if self.interleavers is None
            else [p.tolist() for p in self.interleavers],
        }
        if include_codes:
            for desc, lv in zip(out["levels"], self.levels):
                desc["alist"] = to_alist(lv.c_b)
                desc["e_generator"] = lv.e_generator.tolist()
        return out


@dataclass(frozen=True)
class LatticePoint:
    """A lattice member: O_K symbols plus their scaled embedding."""

    symbols: tuple[OkElement, ...]
    euclid: np.ndarray


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def encode_residue_batch(cfg: NestedPiAConfig, msgs: list[np.ndarray]) -> np.ndarray:
    """Map a batch of per-level messages to residue indices, (B, n) uint8.

    msgs[j] is (B, k_b_j).  Level codewords are interleaved before the
    per-symbol CRT combination.
    """
    batch = msgs[0].shape[0]
    residues = np.zeros((batch, cfg.n), dtype=np.uint8)
    for j, lv in enumerate(cfg.levels):
        if msgs[j].shape[-1] != lv.k_b:
            raise LengthMismatch(f"level {j} message length {msgs[j].shape[-1]} != {lv.k_b}")
        stream = lv.c_b.encode(msgs[j])[:, cfg.perm(j)]
        residues |= (stream << j).astype(np.uint8)
    return residues


def residues_to_euclid(cfg: NestedPiAConfig, residues: np.ndarray) -> np.ndarray:
    """(B, n) residue indices -> (B, 4n) embedded points, symbol-major layout."""
    pts = cfg.constellation()[residues]  # (B, n, 4)
    return pts.reshape(residues.shape[0], -1)


def encode_message(cfg: NestedPiAConfig, msgs: list[np.ndarray]) -> LatticePoint:
    """Encode one message tuple (4 bit vectors) to a lattice point."""
    batch_msgs = [np.asarray(m, dtype=np.uint8)[None, :] for m in msgs]
    residues = encode_residue_batch(cfg, batch_msgs)[0]
    coeffs = cfg.residue_coeffs()
    symbols = tuple(OkElement(tuple(int(c) for c in coeffs[r])) for r in residues)
    euclid = residues_to_euclid(cfg, residues[None, :])[0]
    return LatticePoint(symbols=symbols, euclid=euclid)


# ---------------------------------------------------------------------------
# Membership, volume, rate
# ---------------------------------------------------------------------------

def _level_words(cfg: NestedPiAConfig, symbols) -> np.ndarray:
    """Reduce symbols through the CRT and de-interleave: (4, n) codeword bits."""
    if len(symbols) != cfg.n:
        raise LengthMismatch(f"expected {cfg.n} symbols, got {len(symbols)}")
    words = np.empty((NUM_LEVELS, cfg.n), dtype=np.uint8)
    for t, sym in enumerate(symbols):
        v = cfg.ctx.forward(sym)
        for j in range(NUM_LEVELS):
            words[j, t] = v[j]
    # stream position t carries codeword bit perm[t]
    out = np.empty_like(words)
    for j in range(NUM_LEVELS):
        out[j, cfg.perm(j)] = words[j]
    return out


def is_lattice_point(cfg: NestedPiAConfig, symbols, which: str = FINE) -> bool:
    """Test membership of an O_K symbol vector in the fine or coarse lattice."""
    if which not in (FINE, COARSE):
        raise ValueError(f"which must be '{FINE}' or '{COARSE}'")
    words = _level_words(cfg, symbols)
    for j, lv in enumerate(cfg.levels):
        if which == FINE:
            if not lv.contains_fine(words[j]):
                return False
        else:
            if not lv.contains_coarse(words[j]):
                return False
    return True


def _level_dims(cfg: NestedPiAConfig, which: str) -> list[int]:
    if which == FINE:
        return [lv.k_b for lv in cfg.levels]
    if which == COARSE:
        return [lv.k_e for lv in cfg.levels]
    raise ValueError(f"which must be '{FINE}' or '{COARSE}'")


def lattice_volume(cfg: NestedPiAConfig, which: str = FINE) -> float:
    """Closed-form volume of the selected lattice (includes the gamma scaling).

    vol = gamma^N * prod_j q_j^(n - k_j) * 2^(-n r2) * |d_K|^(n/2), with
    q_j = 2 and k_j the true dimension of the selected level code.  Only
    sensible at small n; use lattice_log2_volume at simulation scale.
    """
    dims = _level_dims(cfg, which)
    r2 = cfg.field.signature[1]
    vol = cfg.gamma ** cfg.N
    vol *= 2.0 ** (sum(cfg.n - k for k in dims) - cfg.n * r2)
    vol *= abs(cfg.field.discriminant) ** (cfg.n / 2)
    return vol


def lattice_log2_volume(cfg: NestedPiAConfig, which: str = FINE) -> float:
    dims = _level_dims(cfg, which)
    r2 = cfg.field.signature[1]
    return (
        cfg.N * math.log2(cfg.gamma)
        + sum(cfg.n - k for k in dims)
        - cfg.n * r2
        + (cfg.n / 2) * math.log2(abs(cfg.field.discriminant))
    )


def quotient_size(cfg: NestedPiAConfig) -> int:
    """|fine / coarse| = prod_j 2^(k_b_j - k_e_j), exact (Python bignum)."""
    return 1 << sum(lv.k_b - lv.k_e for lv in cfg.levels)


def design_rate(cfg: NestedPiAConfig) -> float:
    """log2 of the quotient size per real dimension, in bits/dimension."""
    return sum(lv.k_b - lv.k_e for lv in cfg.levels) / cfg.N


def choose_gamma(cfg: NestedPiAConfig, power: float, seed: int = 0,
                 samples: int = 10_000) -> float:
    """Scaling that sets the mean codebook energy per dimension to `power`.

    The mean energy over uniform messages is quadratic in gamma, so one
    estimate at gamma = 1 suffices.  Codebooks with at most 2^14 messages
    are enumerated exhaustively; larger ones are sampled (>= `samples`
    seeded draws).
    """
    if not power > 0:
        raise ValueError("power must be positive")
    base = cfg if cfg.gamma == 1.0 else cfg.with_gamma(1.0)
    total_bits = base.total_message_bits
    if total_bits <= 14:
        all_msgs = np.arange(1 << total_bits, dtype=np.int64)
        msgs = []
        offset = 0
        for lv in base.levels:
            bits = np.zeros((all_msgs.size, lv.k_b), dtype=np.uint8)
            for i in range(lv.k_b):
                bits[:, i] = (all_msgs >> (offset + i)) & 1
            msgs.append(bits)
            offset += lv.k_b
    else:
        rng = np.random.default_rng(int(seed))
        msgs = [rng.integers(0, 2, size=(max(samples, 10_000), lv.k_b), dtype=np.uint8)
                for lv in base.levels]
    euclid = residues_to_euclid(base, encode_residue_batch(base, msgs))
    energy_per_dim = float(np.mean(euclid ** 2))
    return math.sqrt(power / energy_per_dim)
