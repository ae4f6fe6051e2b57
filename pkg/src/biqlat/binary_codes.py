"""Binary LDPC component codes: PEG construction, encoding, BP decoding.

The decoder is a sum-product belief propagation with a layered (check-serial)
schedule.  Checks are grouped into variable-disjoint layers once per code;
within a layer the serial updates commute, so the whole layer is applied as
one vectorized step, and decoding is batched over frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooLarge, InfeasibleProfile, LengthMismatch

LLR_CLIP = 30.0  # single numerical policy, shared with the multistage decoder
DEFAULT_MAX_ITERS = 50
_TANH_CAP = 1.0 - 1e-15


# ---------------------------------------------------------------------------
# GF(2) linear algebra on bit-packed rows (Python ints as bit vectors)
# ---------------------------------------------------------------------------

def _pack_rows(h: np.ndarray) -> list[int]:
    return [int("".join("1" if x else "0" for x in row[::-1]), 2) if row.any() else 0 for row in h]


def _rref_bits(rows: list[int], ncols: int):
    """Reduced row echelon form over GF(2); returns (pivot_cols, reduced_rows)."""
    rows = [r for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        mask = 1 << col
        piv = next((i for i in range(r, len(rows)) if rows[i] & mask), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & mask:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots, rows[:r]


def gf2_rank(h: np.ndarray) -> int:
    pivots, _ = _rref_bits(_pack_rows(np.asarray(h, dtype=np.uint8)), h.shape[1])
    return len(pivots)


def gf2_row_space_contains(generator: np.ndarray, word: np.ndarray) -> bool:
    """True iff word lies in the row space of generator (both over GF(2))."""
    gen = np.asarray(generator, dtype=np.uint8)
    if gen.size == 0:
        return not np.asarray(word).any()
    ncols = gen.shape[1]
    pivots, rows = _rref_bits(_pack_rows(gen), ncols)
    w = _pack_rows(np.asarray(word, dtype=np.uint8).reshape(1, -1))[0]
    for col, row in zip(pivots, rows):
        if w & (1 << col):
            w ^= row
    return w == 0


# ---------------------------------------------------------------------------
# Code container
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LdpcCode:
    """Sparse parity-check code with precomputed encoder and BP schedule.

    n : block length
    m_chk : number of parity checks
    chk_nbrs : per-check variable index lists (edge order preserved)
    generator : dense k x n GF(2) generator, k = n - rank(H)
    rank : rank of H over GF(2)
    message_cols : column indices where message bits sit systematically
    """

    n: int
    m_chk: int
    chk_nbrs: list[np.ndarray]
    generator: np.ndarray = field(repr=False)
    rank: int = 0
    message_cols: np.ndarray = field(default=None, repr=False)
    # BP schedule (derived): padded neighbor matrix, pad mask, layer index lists
    _nbr_mat: np.ndarray = field(default=None, repr=False)
    _pad: np.ndarray = field(default=None, repr=False)
    _layers: list = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def edge_count(self) -> int:
        return sum(len(c) for c in self.chk_nbrs)

    @classmethod
    def from_parity_checks(cls, h) -> "LdpcCode":
        """Build a code from a dense 0/1 parity-check matrix (may be empty)."""
        h = np.asarray(h, dtype=np.uint8) % 2
        if h.ndim != 2:
            raise ValueError("H must be a 2-D array")
        m, n = h.shape
        chk_nbrs = [np.flatnonzero(h[i]).astype(np.int64) for i in range(m)]
        return cls._finalize(n, chk_nbrs)

    @classmethod
    def _finalize(cls, n: int, chk_nbrs: list[np.ndarray]) -> "LdpcCode":
        m = len(chk_nbrs)
        h = np.zeros((m, n), dtype=np.uint8)
        for i, nbrs in enumerate(chk_nbrs):
            if len(set(nbrs.tolist())) != len(nbrs):
                raise InfeasibleProfile(f"parallel edge at check {i}")
            h[i, nbrs] = 1
        pivots, rows = _rref_bits(_pack_rows(h), n) if m else ([], [])
        rank = len(pivots)
        free = [c for c in range(n) if c not in set(pivots)]
        gen = np.zeros((len(free), n), dtype=np.uint8)
        for gi, f in enumerate(free):
            gen[gi, f] = 1
            for pi, (pcol, prow) in enumerate(zip(pivots, rows)):
                if prow & (1 << f):
                    gen[gi, pcol] = 1
        code = cls(
            n=n,
            m_chk=m,
            chk_nbrs=chk_nbrs,
            generator=gen,
            rank=rank,
            message_cols=np.asarray(free, dtype=np.int64),
        )
        code._build_schedule()
        return code

    def _build_schedule(self):
        m = self.m_chk
        d_max = max((len(c) for c in self.chk_nbrs), default=0)
        nbr = np.full((m, max(d_max, 1)), self.n, dtype=np.int64)  # pad -> virtual var
        for i, nbrs in enumerate(self.chk_nbrs):
            nbr[i, : len(nbrs)] = nbrs
        self._nbr_mat = nbr
        self._pad = nbr == self.n
        # Greedy variable-disjoint layering; deterministic in check order.
        layers: list[list[int]] = []
        layer_vars: list[set] = []
        for c in range(m):
            vs = set(self.chk_nbrs[c].tolist())
            for li in range(len(layers)):
                if not (layer_vars[li] & vs):
                    layers[li].append(c)
                    layer_vars[li] |= vs
                    break
            else:
                layers.append([c])
                layer_vars.append(set(vs))
        self._layers = [np.asarray(l, dtype=np.int64) for l in layers]

    # -- parity and encoding --------------------------------------------------

    def syndrome_ok(self, words: np.ndarray) -> np.ndarray:
        """Vectorized zero-syndrome test; words is (..., n) of bits."""
        w = np.asarray(words, dtype=np.uint8)
        single = w.ndim == 1
        w = np.atleast_2d(w)
        if self.m_chk == 0:
            ok = np.ones(w.shape[0], dtype=bool)
        else:
            padded = np.concatenate([w, np.zeros((w.shape[0], 1), np.uint8)], axis=1)
            syn = padded[:, self._nbr_mat].sum(axis=2) % 2  # (B, m)
            ok = ~syn.any(axis=1)
        return ok[0] if single else ok

    def encode(self, msg: np.ndarray) -> np.ndarray:
        """Systematic encoding; message bits appear at self.message_cols."""
        msg = np.asarray(msg, dtype=np.uint8)
        if msg.shape[-1] != self.k:
            raise LengthMismatch(f"message length {msg.shape[-1]} != k = {self.k}")
        # float matmul hits BLAS; counts stay far below 2^53 so it is exact
        prod = msg.astype(np.float64) @ self.generator.astype(np.float64)
        return (prod.astype(np.int64) % 2).astype(np.uint8)

    # -- belief propagation ---------------------------------------------------

    def bp_decode_batch(self, llrs: np.ndarray, max_iters: int = DEFAULT_MAX_ITERS,
                        clip: float = LLR_CLIP):
        """Layered sum-product decoding of a batch of LLR vectors.

        llrs : (B, n), positive values favor bit 0.
        Returns (bits (B, n) uint8, converged (B,) bool).  A frame's output
        is frozen once the message state is stable (a full sweep changes no
        posterior, i.e. a BP fixed point) with a zero syndrome; frames that
        never reach such a point run all iterations and report their final
        posterior decisions, with converged reflecting the final syndrome.
        On cycle-free graphs this yields the exact bitwise MAP decisions.
        """
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.ndim == 1:
            llrs = llrs[None, :]
        bsz = llrs.shape[0]
        if llrs.shape[1] != self.n:
            raise LengthMismatch(f"LLR length {llrs.shape[1]} != n = {self.n}")
        if self.m_chk == 0:
            return (llrs < 0).astype(np.uint8), np.ones(bsz, dtype=bool)

        lt = np.empty((self.n + 1, bsz))
        lt[: self.n] = np.clip(llrs.T, -clip, clip)
        lt[self.n] = clip  # virtual padding variable, always a strong 0
        r_msg = np.zeros((self.m_chk, self._nbr_mat.shape[1], bsz))
        out = np.zeros((bsz, self.n), dtype=np.uint8)
        frozen = np.zeros(bsz, dtype=bool)
        prev = lt[: self.n].copy()

        for _ in range(max_iters):
            for layer in self._layers:
                nbrs = self._nbr_mat[layer]          # (C, d)
                q = lt[nbrs] - r_msg[layer]          # (C, d, B)
                t = np.tanh(0.5 * q)
                t[self._pad[layer]] = 1.0
                # leave-one-out products along the degree axis
                left = np.cumprod(t, axis=1)
                right = np.cumprod(t[:, ::-1], axis=1)[:, ::-1]
                loo = np.ones_like(t)
                loo[:, 1:] *= left[:, :-1]
                loo[:, :-1] *= right[:, 1:]
                r_new = 2.0 * np.arctanh(np.clip(loo, -_TANH_CAP, _TANH_CAP))
                np.clip(r_new, -clip, clip, out=r_new)
                r_new[self._pad[layer]] = 0.0
                r_msg[layer] = r_new
                # the posterior itself stays unclipped: clipping it would
                # desynchronize the stored check contribution from what was
                # actually added, corrupting the extrinsic q = L - R
                lt[nbrs] = q + r_new
                lt[self.n] = clip
            hard = (lt[: self.n] < 0).astype(np.uint8).T
            stable = np.abs(lt[: self.n] - prev).max(axis=0) <= 1e-9
            prev = lt[: self.n].copy()
            newly = stable & ~frozen & self.syndrome_ok(hard)
            if newly.any():
                out[newly] = hard[newly]
                frozen |= newly
            if frozen.all():
                break
        hard = (lt[: self.n] < 0).astype(np.uint8).T
        out[~frozen] = hard[~frozen]
        conv = frozen | self.syndrome_ok(out)
        return out, conv

    def bp_decode(self, llr: np.ndarray, max_iters: int = DEFAULT_MAX_ITERS,
                  clip: float = LLR_CLIP):
        """Single-frame convenience wrapper around bp_decode_batch."""
        bits, conv = self.bp_decode_batch(np.asarray(llr, dtype=np.float64)[None, :],
                                          max_iters=max_iters, clip=clip)
        return bits[0], bool(conv[0])


def bp_decode(code: LdpcCode, llr, max_iters: int = DEFAULT_MAX_ITERS):
    return code.bp_decode(llr, max_iters=max_iters)


def encode(code: LdpcCode, msg):
    return code.encode(msg)


# ---------------------------------------------------------------------------
# Progressive edge growth
# ---------------------------------------------------------------------------

class _DeadEnd(Exception):
    pass


def _peg_attempt(n: int, var_deg: int, chk_deg: int, m: int, tie_key: np.ndarray):
    var_adj: list[list[int]] = [[] for _ in range(n)]
    chk_adj: list[list[int]] = [[] for _ in range(m)]
    degrees = np.zeros(m, dtype=np.int64)

    def best(cands: list[int]) -> int:
        return min(cands, key=lambda c: (degrees[c], tie_key[c]))

    for v in range(n):
        for t in range(var_deg):
            if t == 0:
                cands = [c for c in range(m) if degrees[c] < chk_deg]
                if not cands:
                    raise _DeadEnd
                c = best(cands)
            else:
                # BFS tree rooted at v; levels hold checks at increasing depth.
                seen_chk = np.zeros(m, dtype=bool)
                seen_var = np.zeros(n, dtype=bool)
                seen_var[v] = True
                frontier = [v]
                levels: list[list[int]] = []
                while frontier:
                    lvl = []
                    for fv in frontier:
                        for fc in var_adj[fv]:
                            if not seen_chk[fc]:
                                seen_chk[fc] = True
                                lvl.append(fc)
                    if not lvl:
                        break
                    levels.append(lvl)
                    frontier = []
                    for fc in lvl:
                        for fv in chk_adj[fc]:
                            if not seen_var[fv]:
                                seen_var[fv] = True
                                frontier.append(fv)
                unreached = [c for c in range(m) if not seen_chk[c] and degrees[c] < chk_deg]
                if unreached:
                    c = best(unreached)
                else:
                    # connect as deep as possible; level 0 holds v's own
                    # neighbors, so stopping above it forbids parallel edges
                    c = None
                    for lvl in reversed(levels[1:]):
                        cands = [x for x in lvl if degrees[x] < chk_deg]
                        if cands:
                            c = best(cands)
                            break
                    if c is None:
                        raise _DeadEnd
            var_adj[v].append(c)
            chk_adj[c].append(v)
            degrees[c] += 1
    return chk_adj


def peg_construct(n: int, var_deg: int, chk_deg: int, seed: int) -> LdpcCode:
    """Progressive-edge-growth construction of a (var_deg, chk_deg)-regular code.

    Deterministic given the seed: candidate ties are broken by current degree
    and then by a seed-keyed permutation of the check indices.  In the rare
    dead-end endgame (the only unsaturated checks already touch the current
    variable) the construction restarts with a derived sub-seed.
    """
    if n < 1 or var_deg < 1 or chk_deg < 1 or (n * var_deg) % chk_deg != 0:
        raise InfeasibleProfile(f"profile ({n}, {var_deg}, {chk_deg}) is not realizable")
    m = n * var_deg // chk_deg
    if m > n:
        raise InfeasibleProfile("more checks than variables")
    attempt = 0
    while True:
        rng = np.random.default_rng([int(seed), attempt])
        perm = rng.permutation(m)
        tie_key = np.empty(m, dtype=np.int64)
        tie_key[perm] = np.arange(m)
        try:
            chk_adj = _peg_attempt(n, var_deg, chk_deg, m, tie_key)
            break
        except _DeadEnd:
            attempt += 1
    code = LdpcCode._finalize(n, [np.asarray(c, dtype=np.int64) for c in chk_adj])
    deg_v = np.zeros(n, dtype=np.int64)
    for nbrs in code.chk_nbrs:
        deg_v[nbrs] += 1
    if not ((deg_v == var_deg).all() and all(len(c) == chk_deg for c in code.chk_nbrs)):
        raise InfeasibleProfile("degree profile violated after construction")
    return code


# ---------------------------------------------------------------------------
# Nested pairs
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class NestedCodePair:
    """Level code pair: c_e is spanned by k_e rows of c_b's generator."""

    c_b: LdpcCode
    k_e: int
    e_generator: np.ndarray

    @property
    def n(self) -> int:
        return self.c_b.n

    @property
    def k_b(self) -> int:
        return self.c_b.k

    def contains_fine(self, word) -> bool:
        return bool(self.c_b.syndrome_ok(word))

    def contains_coarse(self, word) -> bool:
        return gf2_row_space_contains(self.e_generator, word)


def make_nested_pair(c_b: LdpcCode, k_e: int, seed: int) -> NestedCodePair:
    """Select k_e generator rows (seed-keyed) to span the nested subcode."""
    if not 0 <= k_e <= c_b.k:
        raise DimensionTooLarge(f"k_e = {k_e} exceeds k_b = {c_b.k}")
    rng = np.random.default_rng(int(seed))
    rows = np.sort(rng.permutation(c_b.k)[:k_e])
    return NestedCodePair(c_b=c_b, k_e=k_e, e_generator=c_b.generator[rows].copy())


# ---------------------------------------------------------------------------
# alist interchange format
# ---------------------------------------------------------------------------

def to_alist(code: LdpcCode) -> str:
    """Serialize the parity-check matrix in the standard alist layout."""
    n, m = code.n, code.m_chk
    var_nbrs: list[list[int]] = [[] for _ in range(n)]
    for ci, nbrs in enumerate(code.chk_nbrs):
        for v in nbrs:
            var_nbrs[int(v)].append(ci)
    dv = [len(x) for x in var_nbrs]
    dc = [len(x) for x in code.chk_nbrs]
    dv_max = max(dv, default=0)
    dc_max = max(dc, default=0)
    lines = [f"{n} {m}", f"{dv_max} {dc_max}",
             " ".join(map(str, dv)), " ".join(map(str, dc))]
    for nbrs in var_nbrs:
        row = [str(c + 1) for c in nbrs] + ["0"] * (dv_max - len(nbrs))
        lines.append(" ".join(row))
    for nbrs in code.chk_nbrs:
        row = [str(int(v) + 1) for v in nbrs] + ["0"] * (dc_max - len(nbrs))
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> LdpcCode:
    tokens = [int(x) for x in text.split()]
    pos = 0

    def take(count: int):
        nonlocal pos
        vals = tokens[pos: pos + count]
        if len(vals) != count:
            raise ValueError("truncated alist data")
        pos += count
        return vals

    n, m = take(2)
    dv_max, dc_max = take(2)
    take(n)  # variable degrees (redundant with the rows below)
    dc = take(m)
    take(n * dv_max)  # variable rows; checks carry the same edge set
    chk_nbrs = []
    for i in range(m):
        row = take(dc_max)
        nbrs = [x - 1 for x in row if x > 0]
        if len(nbrs) != dc[i]:
            raise ValueError(f"alist check row {i} inconsistent with its degree")
        chk_nbrs.append(np.asarray(nbrs, dtype=np.int64))
    return LdpcCode.from_parity_checks(_nbrs_to_dense(n, chk_nbrs))


def _nbrs_to_dense(n: int, chk_nbrs) -> np.ndarray:
    h = np.zeros((len(chk_nbrs), n), dtype=np.uint8)
    for i, nbrs in enumerate(chk_nbrs):
        h[i, nbrs] = 1
    return h
