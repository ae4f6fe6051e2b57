"""Multilevel lattice codes over biquadratic number fields.

Builds CRT-multilevel lattices from binary component codes over the ring of
integers of Q(sqrt(a), sqrt(b)), decodes them with multistage LDPC belief
propagation, and evaluates reliability and secrecy on a compound
block-fading MIMO wiretap channel.
"""

__version__ = "0.1.0"

from .errors import BiqlatError  # noqa: F401
from .number_field import BiquadraticField, OkElement, build_field, ideal_lattice_volume  # noqa: F401
from .ideals_crt import (  # noqa: F401
    CrtContext,
    PrimeIdealAboveP,
    Splitting,
    build_crt_context,
    crt_forward,
    crt_inverse,
    find_primes_above,
    legendre,
    quadratic_splitting,
    splits_completely,
)
