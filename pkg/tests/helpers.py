"""Independent oracles used by the tests.

Everything here is deliberately written from scratch (plain integer row
reduction, exhaustive enumeration, scalar series) so test expectations never
depend on the code paths they are checking.
"""

import itertools
import math

import numpy as np


# -- exact integer lattice basis (HNF-style row reduction) -------------------

def integer_row_basis(rows):
    """Row basis of the integer row span of `rows`, by Euclidean elimination."""
    rows = [list(map(int, r)) for r in rows if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        while True:
            nz = [i for i in range(r, len(rows)) if rows[i][col] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(rows[i][col]))
            rows[r], rows[i0] = rows[i0], rows[r]
            piv = rows[r][col]
            changed = False
            for i in range(r + 1, len(rows)):
                if rows[i][col] != 0:
                    q = rows[i][col] // piv
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
                    if rows[i][col] != 0:
                        changed = True
            if not changed:
                r += 1
                break
        if r == len(rows):
            break
    return [row for row in rows[:r] if any(row)]


def config_spanning_rows(cfg, which):
    """Integer spanning set of the fine/coarse lattice in O_K coordinates.

    Rows live in Z^(4n): 4 integral-basis coefficients per symbol.  The set
    is the per-level lifted code generators plus the basis of (2 O_K)^n.
    """
    rows = []
    for j, lv in enumerate(cfg.levels):
        gen = lv.c_b.generator if which == "fine" else lv.e_generator
        idem = cfg.ctx.idempotents[j].coeffs
        perm = cfg.perm(j)
        for g in gen:
            stream = g[perm]  # stream bit t = codeword bit perm[t]
            row = []
            for t in range(cfg.n):
                row.extend(int(stream[t]) * c for c in idem)
            rows.append(row)
    for t in range(cfg.n):
        for i in range(4):
            row = [0] * (4 * cfg.n)
            row[4 * t + i] = 2
            rows.append(row)
    return rows


def lattice_volume_oracle(cfg, which):
    """Numeric volume from an explicitly assembled generator matrix."""
    basis = integer_row_basis(config_spanning_rows(cfg, which))
    assert len(basis) == 4 * cfg.n
    emb = cfg.field.embedding_matrix
    real_rows = []
    for row in basis:
        vec = np.concatenate([
            emb @ np.asarray(row[4 * t: 4 * t + 4], dtype=float)
            for t in range(cfg.n)
        ])
        real_rows.append(cfg.gamma * vec)
    return abs(np.linalg.det(np.asarray(real_rows)))


# -- GF(2) brute force --------------------------------------------------------

def gf2_rref(h):
    h = np.asarray(h, dtype=np.uint8).copy() % 2
    m, n = h.shape
    pivots = []
    r = 0
    for c in range(n):
        nz = np.nonzero(h[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        h[[r, i]] = h[[i, r]]
        for i2 in range(m):
            if i2 != r and h[i2, c]:
                h[i2] ^= h[r]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return h[:r], pivots


def all_codewords(h):
    """Every codeword of the code with parity-check matrix h (dense 0/1)."""
    h = np.asarray(h, dtype=np.uint8)
    n = h.shape[1]
    hr, pivots = gf2_rref(h)
    free = [c for c in range(n) if c not in set(pivots)]
    words = []
    for bits in itertools.product((0, 1), repeat=len(free)):
        w = np.zeros(n, dtype=np.uint8)
        w[free] = bits
        for prow, pc in zip(hr, pivots):
            total = int(prow @ w) - int(prow[pc]) * int(w[pc])
            w[pc] = total % 2
        words.append(w)
    return np.asarray(words, dtype=np.uint8)


def bitwise_map_decode(h, llr):
    """Exact bitwise MAP decisions over all codewords for channel LLRs."""
    words = all_codewords(h)
    logw = -(words.astype(float) @ np.asarray(llr, dtype=float))
    out = np.zeros(words.shape[1], dtype=np.uint8)
    for v in range(words.shape[1]):
        w1 = logw[words[:, v] == 1]
        w0 = logw[words[:, v] == 0]
        m1 = -np.inf if w1.size == 0 else _lse(w1)
        m0 = -np.inf if w0.size == 0 else _lse(w0)
        out[v] = 1 if m1 > m0 else 0
    return out


def _lse(x):
    m = float(np.max(x))
    return m + math.log(float(np.exp(x - m).sum()))


def in_row_space(gen, word):
    """Membership of word in the GF(2) row space of gen, by fresh elimination."""
    gen = np.asarray(gen, dtype=np.uint8)
    if gen.size == 0:
        return not np.asarray(word).any()
    stacked = np.vstack([gen, np.asarray(word, dtype=np.uint8)])
    return len(gf2_rref(stacked)[1]) == len(gf2_rref(gen)[1])


# -- constellation decisions --------------------------------------------------

def greedy_constellation_decisions(y, points, sigma):
    """Greedy level-by-level decisions on the 16-point constellation.

    Level j decides bit_j by comparing the summed likelihood of the residues
    consistent with the previous decisions, exactly as a serial multistage
    decoder with uncoded levels would.
    """
    logs = -((points - y[None, :]) ** 2).sum(axis=1) / (2.0 * sigma * sigma)
    decided = []
    for j in range(4):
        cand = [r for r in range(16)
                if all(((r >> i) & 1) == decided[i] for i in range(j))]
        s0 = [r for r in cand if ((r >> j) & 1) == 0]
        s1 = [r for r in cand if ((r >> j) & 1) == 1]
        decided.append(0 if _lse(logs[s0]) >= _lse(logs[s1]) else 1)
    return decided


# -- scalar series ------------------------------------------------------------

def theta_z1(sigma, terms=2000):
    """Direct 1-D flatness factor of the integer lattice."""
    ks = np.arange(-terms, terms + 1)
    s = float(np.exp(-(ks * ks) / (2.0 * sigma * sigma)).sum())
    return s / math.sqrt(2.0 * math.pi * sigma * sigma) - 1.0


def dg_pmf_z(sigma, window):
    """Exact discrete Gaussian PMF on Z restricted to [-window, window]."""
    ks = np.arange(-window, window + 1)
    wide = np.arange(-window - 200, window + 201)
    num = np.exp(-(ks * ks) / (2.0 * sigma * sigma))
    den = float(np.exp(-(wide * wide) / (2.0 * sigma * sigma)).sum())
    return ks, num / den
