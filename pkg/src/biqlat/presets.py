"""Canned experiment setups wired from one master seed.

All randomness (code construction, interleavers, channel draws, per-point
noise) derives from named sub-streams of the master seed, so a whole
simulation is reproducible from a single integer.
"""

from __future__ import annotations

import math

import numpy as np

from .binary_codes import make_nested_pair, peg_construct
from .ideals_crt import build_crt_context
from .number_field import build_field
from .pi_a_lattice import NUM_LEVELS, NestedPiAConfig, make_interleavers
from .wiretap_channel import MODE_IDEALIZED, ChannelConfig, rayleigh_matrix

_SUB_CODES = 100
_SUB_INTERLEAVER = 200
_SUB_CHANNEL_BOB = 300
_SUB_CHANNEL_EVE = 301


def derived_seed(*parts: int) -> int:
    """Stable 64-bit sub-seed from integer name parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def build_level_codes(n: int, seed: int, var_deg: int = 3, chk_deg: int = 6):
    """Four independent regular LDPC codes, retrying seeds until H is full rank.

    Full rank keeps every level's dimension at exactly n - m_chk, which the
    rate bookkeeping (and the rate-1/2 target) relies on.
    """
    codes = []
    for j in range(NUM_LEVELS):
        attempt = 0
        while True:
            code = peg_construct(n, var_deg, chk_deg, derived_seed(seed, _SUB_CODES + j, attempt))
            if code.rank == code.m_chk:
                codes.append(code)
                break
            attempt += 1
    return codes


def build_sweep_setup(n: int = 800, seed: int = 1, k_e: int = 0,
                      eve_noise_var: float = 6.0, mode: str = MODE_IDEALIZED,
                      a: int = 17, b: int = 33, p: int = 2,
                      gamma: float = 1.0):
    """Default finite-length experiment: Q(sqrt 17, sqrt 33), four binary
    (3,6)-LDPC levels of length n, Eve noise variance 6, 2x2 Rayleigh pair.

    Returns (ChannelConfig, NestedPiAConfig).  gamma is a placeholder; the
    sweep rescales it per SNR point to meet the power constraint.
    """
    fld = build_field(a, b)
    ctx = build_crt_context(fld, p)
    codes = build_level_codes(n, seed)
    levels = tuple(
        make_nested_pair(code, k_e, derived_seed(seed, _SUB_CODES + 50 + j))
        for j, code in enumerate(codes)
    )
    cfg = NestedPiAConfig(
        field=fld, ctx=ctx, levels=levels, n=n, gamma=gamma,
        interleavers=make_interleavers(n, derived_seed(seed, _SUB_INTERLEAVER)),
    )
    chan = ChannelConfig(
        n_a=2, n_b=2, n_e=2,
        sigma_b=1.0, sigma_e=math.sqrt(eve_noise_var),
        h_b=rayleigh_matrix(2, 2, derived_seed(seed, _SUB_CHANNEL_BOB)),
        h_e=rayleigh_matrix(2, 2, derived_seed(seed, _SUB_CHANNEL_EVE)),
        mode=mode,
    )
    return chan, cfg
