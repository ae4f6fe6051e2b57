"""Compute golden fixtures for biquadratic fields with sympy as the oracle.

For each field Q(sqrt a, sqrt b) in the panel (a, b > 0, both 1 mod 8,
coprime, squarefree) the bundle records: the integral basis in the canonical
form {1, (1+sqrt a)/2, (1+sqrt b)/2, (1+sqrt a)(1+sqrt b)/4}, structure
constants, the field discriminant, the four degree-one primes above 2 as
reduction maps, the CRT idempotents, and a few element-norm spot checks.

sympy supplies the heavy lifting (maximal order via round_two, prime
decomposition, norms); this module only converts coordinates.  The canonical
basis is certified against sympy's maximal order by a unimodular
change-of-basis check, so the bundle is an independent witness for any other
implementation of the same construction.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

from sympy import QQ, Poly, Rational
from sympy.abc import x
from sympy.polys.numberfields.basis import round_two
from sympy.polys.numberfields.primes import prime_decomp

SCHEMA_VERSION = 1

# Panel members are constrained to fields the CAS backend factors cleanly;
# round_two or prime_decomp choke on some otherwise-valid radicand pairs
# (e.g. 17,41 and 41,57).
DEFAULT_FIELDS = ((17, 33), (33, 41), (41, 73))

NORM_CHECK_COEFFS = (
    (1, 0, 0, 0),
    (-1, 2, 0, 0),   # sqrt(a)
    (-1, 0, 2, 0),   # sqrt(b)
    (0, 1, 0, 0),
    (0, 0, 0, 1),
    (1, 2, 3, 4),
    (-2, 1, 0, 3),
)


def is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        while n % d == 0:
            n //= d
        d += 1
    return True


def _solve_fraction(matrix, rhs):
    """Exact solve of a 4x4 rational system (matrix rows are lists)."""
    n = len(rhs)
    aug = [[Fraction(matrix[i][j]) for j in range(n)] + [Fraction(rhs[i])]
           for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


class FieldOracle:
    """sympy view of one biquadratic field, keyed to the canonical basis."""

    def __init__(self, a: int, b: int):
        if a == b or a in (0, 1) or b in (0, 1):
            raise ValueError("radicands must be distinct and not 0 or 1")
        if not (is_squarefree(a) and is_squarefree(b)):
            raise ValueError("radicands must be squarefree")
        if not (a > 0 and b > 0 and a % 4 == 1 and b % 4 == 1 and math.gcd(a, b) == 1):
            raise ValueError("panel supports a, b > 0, both 1 mod 4, coprime")
        self.a, self.b = a, b
        self.k = a * b
        # minimal polynomial of sqrt(a) + sqrt(b)
        self.T = Poly(x ** 4 - 2 * (a + b) * x ** 2 + (a - b) ** 2, x)
        self.ZK, self.dK = round_two(self.T)
        self.pb = self.ZK.parent

        den = 2 * b - 2 * a
        # canonical basis elements as power-basis rational coordinate rows
        self._pb_coords = [
            [Rational(1), Rational(0), Rational(0), Rational(0)],
            [Rational(1, 2), Rational(-(3 * a + b), 2 * den), Rational(0), Rational(1, 2 * den)],
            [Rational(1, 2), Rational(a + 3 * b, 2 * den), Rational(0), Rational(-1, 2 * den)],
            None,  # filled below as e2 * e3
        ]
        self.elements = [self._element(c) for c in self._pb_coords[:3]]
        self.elements.append(self.elements[1] * self.elements[2])
        # certify: canonical basis spans sympy's maximal order (unimodular)
        rows = []
        for e in self.elements:
            col = self.ZK.represent(e)
            rows.append([int(v) for v in col.flat()])
        det = _int_det4(rows)
        if det not in (1, -1):
            raise ValueError(f"canonical basis does not span the maximal order: det={det}")
        self._zk_rows = rows

    def _element(self, coords):
        poly = Poly(sum(Rational(c) * x ** i for i, c in enumerate(coords)), x, domain=QQ)
        return self.pb.element_from_poly(poly)

    def canonical_coords(self, element) -> list[int]:
        """ZK element -> integer coordinates over the canonical basis."""
        target = [int(v) for v in self.ZK.represent(element).flat()]
        cols = [[self._zk_rows[j][i] for j in range(4)] for i in range(4)]
        sol = _solve_fraction(cols, target)
        assert all(s.denominator == 1 for s in sol)
        return [int(s) for s in sol]

    def combine(self, coeffs):
        """Integer canonical coordinates -> sympy element."""
        out = self.elements[0] * int(coeffs[0])
        for c, e in zip(coeffs[1:], self.elements[1:]):
            out = out + e * int(c)
        return out

    # -- bundle sections ------------------------------------------------------

    def integral_basis_quad(self):
        """Canonical basis over {1, sqrt a, sqrt b, sqrt(ab)} as [num, den]."""
        half = Fraction(1, 2)
        quarter = Fraction(1, 4)
        rows = [
            (Fraction(1), Fraction(0), Fraction(0), Fraction(0)),
            (half, half, Fraction(0), Fraction(0)),
            (half, Fraction(0), half, Fraction(0)),
            (quarter, quarter, quarter, quarter),
        ]
        return [[[f.numerator, f.denominator] for f in row] for row in rows]

    def structure_constants(self):
        out = []
        for i in range(4):
            row = []
            for j in range(4):
                prod = self.elements[i] * self.elements[j]
                row.append(self.canonical_coords(prod))
            out.append(row)
        return out

    def primes_above_2(self):
        primes = prime_decomp(2, self.T, ZK=self.ZK, dK=self.dK)
        if len(primes) != 4 or any(p.e != 1 or p.f != 1 for p in primes):
            raise ValueError("2 does not split completely in this field")
        maps = []
        for p in primes:
            img = []
            for e in self.elements:
                red = p.reduce_element(e)
                flat = [Fraction(int(v.numerator), int(v.denominator))
                        for v in red.QQ_col.flat()]
                assert all(f == 0 for f in flat[1:]) and flat[0] in (0, 1)
                img.append(int(flat[0]))
            maps.append(tuple(img))
        maps.sort()
        return maps

    def idempotents(self, maps):
        """Solve phi(u_j) = delta_j over F_2 and re-verify the CRT identities."""
        idems = []
        for j in range(4):
            rhs = [1 if i == j else 0 for i in range(4)]
            sol = _solve_gf2([list(m) for m in maps], rhs)
            idems.append(sol)
        # verification with the CAS: orthogonality, idempotency, unity
        elems = [self.combine(u) for u in idems]
        total = elems[0]
        for e in elems[1:]:
            total = total + e
        one = self.elements[0]
        assert self._in_2zk(total - one)
        for i in range(4):
            assert self._in_2zk(elems[i] * elems[i] - elems[i])
            for j in range(i + 1, 4):
                assert self._in_2zk(elems[i] * elems[j])
        return idems

    def _in_2zk(self, element) -> bool:
        return all(c % 2 == 0 for c in self.canonical_coords(element))

    def norm_checks(self):
        out = []
        for coeffs in NORM_CHECK_COEFFS:
            el = self.combine(coeffs)
            out.append({"coeffs": list(coeffs), "norm": int(el.norm())})
        return out


def _int_det4(rows) -> int:
    from itertools import permutations

    det = 0
    for perm in permutations(range(4)):
        sign = 1
        seen = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if seen[i] > seen[j]:
                    sign = -sign
        term = sign
        for i in range(4):
            term *= rows[i][perm[i]]
        det += term
    return det


def _solve_gf2(matrix, rhs):
    n = len(rhs)
    aug = [[matrix[i][j] % 2 for j in range(n)] + [rhs[i] % 2] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(n):
            if r != col and aug[r][col]:
                aug[r] = [(v + w) % 2 for v, w in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def generate_bundle(a: int, b: int) -> dict:
    oracle = FieldOracle(a, b)
    maps = oracle.primes_above_2()
    bundle = {
        "schema_version": SCHEMA_VERSION,
        "generator": "fixture-gen",
        "field": {
            "schema_version": SCHEMA_VERSION,
            "a": oracle.a,
            "b": oracle.b,
            "k": oracle.k,
            "d_K": int(oracle.dK),
            "signature": [4, 0],
            "integral_basis": oracle.integral_basis_quad(),
            "structure_constants": oracle.structure_constants(),
        },
        "crt": {
            "p": 2,
            "reduction_maps": [list(m) for m in maps],
            "idempotents": oracle.idempotents(maps),
        },
        "modulus_norm": 16,
        "norm_checks": oracle.norm_checks(),
    }
    return bundle


def bundle_filename(a: int, b: int) -> str:
    return f"biquadratic_{a}_{b}.json"


def dumps_bundle(bundle: dict) -> str:
    return json.dumps(bundle, indent=2, sort_keys=True) + "\n"


def generate_fixtures(out_dir, fields=DEFAULT_FIELDS) -> list[Path]:
    """Generate every bundle first, then write; no partial output on failure."""
    out_dir = Path(out_dir)
    rendered = [(bundle_filename(a, b), dumps_bundle(generate_bundle(a, b)))
                for a, b in fields]
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in rendered:
        path = out_dir / name
        path.write_text(text)
        paths.append(path)
    return paths
