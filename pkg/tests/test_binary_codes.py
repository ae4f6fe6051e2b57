import numpy as np
import pytest

from biqlat.binary_codes import (
    LdpcCode,
    bp_decode,
    from_alist,
    gf2_rank,
    make_nested_pair,
    peg_construct,
    to_alist,
)
from biqlat.errors import DimensionTooLarge, InfeasibleProfile, LengthMismatch

from helpers import all_codewords, bitwise_map_decode, in_row_space

# small cycle-free parity-check matrices (Tanner graphs are trees)
TREE_CODES = [
    [[1, 1, 0], [0, 1, 1]],
    [[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]],
    [[1, 1, 1, 0, 0, 0, 0], [0, 0, 1, 1, 1, 0, 0], [0, 0, 0, 0, 1, 1, 1]],
    [[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
     [0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
     [0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0],
     [0, 0, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0],
     [0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 0],
     [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1]],
]


def dense_h(code):
    h = np.zeros((code.m_chk, code.n), dtype=np.uint8)
    for i, nbrs in enumerate(code.chk_nbrs):
        h[i, nbrs] = 1
    return h


@pytest.fixture(scope="module")
def code800():
    return peg_construct(800, 3, 6, seed=5)


def test_peg_profile_800(code800):
    assert code800.m_chk == 400
    assert code800.edge_count == 2400
    degrees = np.zeros(800, dtype=int)
    for nbrs in code800.chk_nbrs:
        assert len(nbrs) == 6
        assert len(set(nbrs.tolist())) == 6      # no parallel edges
        degrees[nbrs] += 1
    assert (degrees == 3).all()


def test_peg_smallest_profile():
    code = peg_construct(6, 3, 6, seed=0)
    assert code.m_chk == 3
    assert all(len(c) == 6 for c in code.chk_nbrs)


def test_peg_determinism():
    a = peg_construct(60, 3, 6, seed=123)
    b = peg_construct(60, 3, 6, seed=123)
    c = peg_construct(60, 3, 6, seed=124)
    assert all((x == y).all() for x, y in zip(a.chk_nbrs, b.chk_nbrs))
    assert any((x != y).any() for x, y in zip(a.chk_nbrs, c.chk_nbrs))


def test_peg_infeasible():
    with pytest.raises(InfeasibleProfile):
        peg_construct(7, 3, 6, seed=0)


def test_design_rate_and_rank(code800):
    assert gf2_rank(dense_h(code800)) == code800.rank
    assert (800 - code800.m_chk) / 800 == 0.5
    assert code800.k >= 400


def test_generator_orthogonal_to_checks(code800):
    h = dense_h(code800)
    prod = (code800.generator.astype(np.int64) @ h.T.astype(np.int64)) % 2
    assert not prod.any()


def test_encode_properties(code800):
    rng = np.random.default_rng(0)
    msgs = rng.integers(0, 2, size=(1000, code800.k), dtype=np.uint8)
    words = code800.encode(msgs)
    assert code800.syndrome_ok(words).all()
    assert (words[:, code800.message_cols] == msgs).all()     # systematic
    assert not code800.encode(np.zeros(code800.k, dtype=np.uint8)).any()
    # injectivity on a sample
    assert len({w.tobytes() for w in words}) == len({m.tobytes() for m in msgs})
    with pytest.raises(LengthMismatch):
        code800.encode(np.zeros(code800.k + 1, dtype=np.uint8))


def test_bp_matches_ml_on_two_codeword_chain():
    code = LdpcCode.from_parity_checks([[1, 1, 0], [0, 1, 1]])
    bits, converged = bp_decode(code, np.array([2.0, -1.0, 2.0]))
    assert converged
    assert bits.tolist() == [0, 0, 0]           # metric +3 beats -3 for 111


def test_bp_noiseless_single_iteration(code800):
    rng = np.random.default_rng(1)
    msg = rng.integers(0, 2, size=code800.k, dtype=np.uint8)
    word = code800.encode(msg)
    llr = 20.0 * (1.0 - 2.0 * word.astype(float))
    bits, converged = code800.bp_decode(llr, max_iters=1)
    assert converged
    assert (bits == word).all()


def test_bp_convergence_implies_zero_syndrome(code800):
    rng = np.random.default_rng(2)
    msgs = rng.integers(0, 2, size=(40, code800.k), dtype=np.uint8)
    words = code800.encode(msgs)
    x = 1.0 - 2.0 * words.astype(float)
    y = x + 1.0 * rng.standard_normal(x.shape)
    llrs = 2.0 * y
    bits, conv = code800.bp_decode_batch(llrs, max_iters=8)
    assert code800.syndrome_ok(bits[conv]).all()


def test_bp_exact_on_trees():
    rng = np.random.default_rng(3)
    for h in TREE_CODES:
        code = LdpcCode.from_parity_checks(h)
        for _ in range(200):
            llr = rng.normal(0.0, 2.0, size=code.n)
            bits, _ = code.bp_decode(llr)
            oracle = bitwise_map_decode(np.asarray(h), llr)
            assert (bits == oracle).all()


def test_bp_zero_check_code():
    code = LdpcCode.from_parity_checks(np.zeros((0, 5), dtype=np.uint8))
    bits, converged = code.bp_decode(np.array([1.0, -2.0, 3.0, -4.0, 0.5]))
    assert converged
    assert bits.tolist() == [0, 1, 0, 1, 0]


def test_bp_monotone_over_biawgn_sweep(code800):
    rng = np.random.default_rng(4)
    bers = []
    for snr_db in (0.0, 3.0, 6.0):
        sigma = 10.0 ** (-snr_db / 20.0)
        frames = 125                                 # 1e5 bits per point
        msgs = rng.integers(0, 2, size=(frames, code800.k), dtype=np.uint8)
        words = code800.encode(msgs)
        x = 1.0 - 2.0 * words.astype(float)
        y = x + sigma * rng.standard_normal(x.shape)
        bits, _ = code800.bp_decode_batch(2.0 * y / sigma ** 2, max_iters=30)
        bers.append((bits != words).mean())
    n_bits = 125 * 800
    for lo, hi in zip(bers[1:], bers[:-1]):
        margin = 3.0 * np.sqrt(max(hi, 1e-9) * (1.0 - min(hi, 1.0)) / n_bits)
        assert lo <= hi + margin, bers


def test_nested_pair_extremes(code800):
    zero = make_nested_pair(code800, 0, seed=0)
    assert zero.e_generator.shape == (0, code800.n)
    assert zero.contains_coarse(np.zeros(code800.n, dtype=np.uint8))
    assert not zero.contains_coarse(code800.generator[0])
    full = make_nested_pair(code800, code800.k, seed=0)
    assert full.k_e == code800.k
    word = code800.encode(np.random.default_rng(5).integers(0, 2, code800.k, dtype=np.uint8))
    assert full.contains_coarse(word)
    with pytest.raises(DimensionTooLarge):
        make_nested_pair(code800, code800.k + 1, seed=0)


def test_nested_pair_rows_in_fine_code():
    code = peg_construct(24, 3, 6, seed=9)
    pair = make_nested_pair(code, 5, seed=11)
    assert pair.e_generator.shape[0] == 5
    for row in pair.e_generator:
        assert in_row_space(code.generator, row)
        assert code.syndrome_ok(row)
    # membership test agrees with an independent elimination oracle
    rng = np.random.default_rng(12)
    for _ in range(50):
        coeff = rng.integers(0, 2, size=5, dtype=np.uint8)
        word = (coeff.astype(np.int64) @ pair.e_generator) % 2
        assert pair.contains_coarse(word.astype(np.uint8))
    outside = code.encode(rng.integers(0, 2, code.k, dtype=np.uint8))
    assert pair.contains_coarse(outside) == in_row_space(pair.e_generator, outside)


def test_nested_pair_determinism(code800):
    a = make_nested_pair(code800, 17, seed=3)
    b = make_nested_pair(code800, 17, seed=3)
    assert (a.e_generator == b.e_generator).all()


def test_alist_roundtrip():
    code = peg_construct(30, 3, 6, seed=6)
    text = to_alist(code)
    back = from_alist(text)
    assert back.n == code.n and back.m_chk == code.m_chk
    assert all((a == b).all() for a, b in zip(code.chk_nbrs, back.chk_nbrs))


def test_all_codewords_oracle_consistency():
    # the test oracle itself: every enumerated word satisfies H w = 0
    h = np.asarray(TREE_CODES[1], dtype=np.uint8)
    words = all_codewords(h)
    assert words.shape[0] == 2 ** (h.shape[1] - gf2_rank(h))
    assert not ((words @ h.T) % 2).any()
