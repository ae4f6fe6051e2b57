"""Prime splitting and the CRT decomposition O_K / pO_K = F_p x ... x F_p.

A prime ideal above a completely-split rational prime is represented by its
reduction map (the images of the integral basis in F_p), which is all the
lattice construction ever needs.  Enumeration is brute force over candidate
image vectors; at desk scale (p^4 candidates) this is exact and cheap.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from .errors import NotCompletelySplit, NotOddPrime, NotSquarefree, SingularSystem
from .number_field import BiquadraticField, OkElement, is_squarefree


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond desk-scale inputs."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for base in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(base, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) by Euler's criterion; p must be an odd prime."""
    if p == 2 or not is_prime(p):
        raise NotOddPrime(f"{p} is not an odd prime")
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


class Splitting(enum.Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


def quadratic_splitting(d: int, p: int) -> Splitting:
    """Classify the rational prime p in Q(sqrt(d))."""
    if not is_squarefree(d):
        raise NotSquarefree(f"{d} is not squarefree")
    if not is_prime(p):
        raise NotOddPrime(f"{p} is not prime")
    if p == 2:
        r = d % 8
        if r == 1:
            return Splitting.SPLIT
        if r == 5:
            return Splitting.INERT
        return Splitting.RAMIFIED
    sym = legendre(d, p)
    if sym == 0:
        return Splitting.RAMIFIED
    return Splitting.SPLIT if sym == 1 else Splitting.INERT


def splits_completely(field: BiquadraticField, p: int) -> bool:
    """True iff p splits in both Q(sqrt a) and Q(sqrt b), hence completely in K."""
    return (
        quadratic_splitting(field.a, p) is Splitting.SPLIT
        and quadratic_splitting(field.b, p) is Splitting.SPLIT
    )


@dataclass(frozen=True)
class PrimeIdealAboveP:
    """Degree-one prime above p, given by the images of the integral basis in F_p."""

    p: int
    reduction_map: tuple[int, int, int, int]
    residue_degree: int = 1

    def reduce(self, x: OkElement) -> int:
        return sum(t * c for t, c in zip(self.reduction_map, x.coeffs)) % self.p


def enumerate_residue_maps(field: BiquadraticField, p: int) -> list[tuple[int, ...]]:
    """All unital ring homomorphisms O_K -> F_p, as basis-image vectors.

    A candidate t in F_p^4 is a homomorphism iff it maps 1 to 1 and respects
    every structure constant: t_i * t_j = sum_l c[i][j][l] t_l (mod p).
    """
    c = field.structure_constants
    maps = []
    # Basis element 0 is 1 in the supported branch, so its image is pinned.
    for rest in itertools.product(range(p), repeat=3):
        t = (1,) + rest
        ok = True
        for i in range(4):
            for j in range(i, 4):
                if (t[i] * t[j] - sum(c[i][j][l] * t[l] for l in range(4))) % p != 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            maps.append(t)
    maps.sort()
    return maps


def find_primes_above(field: BiquadraticField, p: int) -> list[PrimeIdealAboveP]:
    """The four degree-one primes above a completely-split p."""
    maps = enumerate_residue_maps(field, p)
    if len(maps) != 4:
        raise NotCompletelySplit(
            f"{p} is not completely split: found {len(maps)} residue maps, need 4"
        )
    return [PrimeIdealAboveP(p=p, reduction_map=m) for m in maps]


@dataclass(frozen=True)
class CrtContext:
    """CRT data for O_K / pO_K: the four reduction maps and their idempotents."""

    field: BiquadraticField
    p: int
    primes: tuple[PrimeIdealAboveP, ...]
    idempotents: tuple[OkElement, ...]
    modulus_norm: int

    def forward(self, x: OkElement) -> tuple[int, ...]:
        """Residue vector (x mod p_1, ..., x mod p_4)."""
        return tuple(pr.reduce(x) for pr in self.primes)

    def inverse(self, v) -> OkElement:
        """Canonical coset representative of the residue vector v.

        Coefficients of the result lie in {0, ..., p-1}.
        """
        out = [0, 0, 0, 0]
        for vj, e in zip(v, self.idempotents):
            for i in range(4):
                out[i] += int(vj) * e.coeffs[i]
        return OkElement(tuple(c % self.p for c in out))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "reduction_maps": [list(pr.reduction_map) for pr in self.primes],
            "idempotents": [list(e.coeffs) for e in self.idempotents],
        }


def crt_forward(ctx: CrtContext, x: OkElement) -> tuple[int, ...]:
    return ctx.forward(x)


def crt_inverse(ctx: CrtContext, v) -> OkElement:
    return ctx.inverse(v)


def build_crt_context(field: BiquadraticField, p: int) -> CrtContext:
    """Assemble reduction maps and CRT idempotents for a completely-split p.

    The idempotent e_j solves phi(e_j) = delta_j, where phi stacks the four
    reduction maps; phi is F_p-linear on O_K / pO_K, so this is a 4x4 solve
    mod p.  A singular system would mean the enumerated maps are not
    distinct homomorphisms, which is a bug, not a data condition.
    """
    primes = find_primes_above(field, p)
    t = [list(pr.reduction_map) for pr in primes]

    # Invert T over F_p by Gauss-Jordan; columns of the inverse are the
    # idempotent coefficient vectors.
    n = 4
    aug = [[t[i][j] % p for j in range(n)] + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] % p != 0), None)
        if piv is None:
            raise SingularSystem("reduction maps are linearly dependent mod p")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], -1, p)
        aug[col] = [(x * inv) % p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] % p != 0:
                f = aug[r][col]
                aug[r] = [(x - f * y) % p for x, y in zip(aug[r], aug[col])]
    idem = tuple(
        OkElement(tuple(aug[i][n + j] % p for i in range(n))) for j in range(n)
    )
    return CrtContext(
        field=field, p=p, primes=tuple(primes), idempotents=idem, modulus_norm=p ** 4
    )
