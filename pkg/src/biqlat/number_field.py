"""Exact arithmetic in biquadratic fields Q(sqrt(a), sqrt(b)).

Elements of the ring of integers are integer vectors over a fixed integral
basis; all ring operations are exact (Python integers, so no overflow).
Floating point enters only through the canonical embedding into R^4.

Internally a second, purely rational coordinate system over the Q-basis
{1, sqrt(a), sqrt(b), sqrt(ab)} is used to derive structure constants and
conjugates; it never leaks into the public API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateField, NotSquarefree, SingularSystem, UnsupportedCase

# Embeddings are ordered by the sign pattern applied to (sqrt(a), sqrt(b)):
# (+,+), (+,-), (-,+), (-,-).  This fixes the column order of the embedding
# matrix and therefore the coordinates of every lattice built downstream.
SIGN_PATTERNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def is_squarefree(n: int) -> bool:
    """True iff n is squarefree (sign ignored); 0 is not squarefree."""
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


@dataclass(frozen=True)
class OkElement:
    """Ring-of-integers element: integer coefficients over the integral basis."""

    coeffs: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.coeffs) != 4 or not all(isinstance(c, int) for c in self.coeffs):
            raise TypeError("coeffs must be 4 Python ints")

    def __add__(self, other: "OkElement") -> "OkElement":
        return OkElement(tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "OkElement") -> "OkElement":
        return OkElement(tuple(x - y for x, y in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "OkElement":
        return OkElement(tuple(-x for x in self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def _quad_mul(u, v, a: int, b: int):
    """Multiply two rational vectors over {1, sqrt(a), sqrt(b), sqrt(ab)}."""
    u0, u1, u2, u3 = u
    v0, v1, v2, v3 = v
    ab = a * b
    return (
        u0 * v0 + a * u1 * v1 + b * u2 * v2 + ab * u3 * v3,
        u0 * v1 + u1 * v0 + b * (u2 * v3 + u3 * v2),
        u0 * v2 + u2 * v0 + a * (u1 * v3 + u3 * v1),
        u0 * v3 + u3 * v0 + u1 * v2 + u2 * v1,
    )


def _solve_rational(matrix, rhs):
    """Solve matrix @ x = rhs exactly over Q (matrix as list of rows)."""
    n = len(rhs)
    aug = [[Fraction(matrix[i][j]) for j in range(n)] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularSystem("rational system is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


@dataclass(frozen=True)
class BiquadraticField:
    """Immutable description of K = Q(sqrt(a), sqrt(b)) and its ring of integers.

    Attributes
    ----------
    a, b : the two radicands (squarefree, distinct, not 0 or 1)
    k : radicand of the third quadratic subfield, ab / gcd(a,b)^2
    signature : (r1, r2) real / complex-pair embedding counts
    integral_basis : four elements, each a rational 4-vector over
        {1, sqrt(a), sqrt(b), sqrt(ab)}
    structure_constants : integer tensor c with e_i * e_j = sum_l c[i][j][l] e_l
    discriminant : field discriminant d_K
    embedding_matrix : real 4x4 matrix; column i is the canonical embedding
        of basis element e_i, rows ordered per SIGN_PATTERNS
    """

    a: int
    b: int
    k: int
    signature: tuple[int, int]
    integral_basis: tuple[tuple[Fraction, ...], ...]
    structure_constants: tuple  # c[i][j][l], nested tuples of int
    discriminant: int
    embedding_matrix: np.ndarray

    # -- element constructors -------------------------------------------------

    def element(self, c0: int, c1: int, c2: int, c3: int) -> OkElement:
        return OkElement((int(c0), int(c1), int(c2), int(c3)))

    def zero(self) -> OkElement:
        return OkElement((0, 0, 0, 0))

    def one(self) -> OkElement:
        return OkElement((1, 0, 0, 0))

    def sqrt_a(self) -> OkElement:
        """sqrt(a) expressed in integral-basis coordinates."""
        return self._from_quad((0, 1, 0, 0))

    def sqrt_b(self) -> OkElement:
        return self._from_quad((0, 0, 1, 0))

    # -- ring operations ------------------------------------------------------

    def mul(self, x: OkElement, y: OkElement) -> OkElement:
        """Exact product via structure constants."""
        c = self.structure_constants
        out = [0, 0, 0, 0]
        for i in range(4):
            xi = x.coeffs[i]
            if xi == 0:
                continue
            for j in range(4):
                yj = y.coeffs[j]
                if yj == 0:
                    continue
                xy = xi * yj
                cij = c[i][j]
                for l in range(4):
                    out[l] += xy * cij[l]
        return OkElement(tuple(out))

    def mul_matrix(self, x: OkElement) -> list[list[int]]:
        """Matrix of multiplication by x in integral-basis coordinates."""
        cols = [self.mul(x, OkElement(tuple(1 if i == j else 0 for i in range(4)))) for j in range(4)]
        return [[cols[j].coeffs[i] for j in range(4)] for i in range(4)]

    # -- embedding and norms --------------------------------------------------

    def embed(self, x: OkElement) -> np.ndarray:
        """Canonical embedding sigma_K(x) as a real 4-vector."""
        return self.embedding_matrix @ np.asarray(x.coeffs, dtype=float)

    def algebraic_norm(self, x: OkElement) -> int:
        """Norm of x: exact product of the four conjugates.

        Computed over the rational coordinate system, so the result is an
        exact integer (tests cross-check it against det of mul_matrix).
        """
        q = self._to_quad(x)
        prod = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
        for sa, sb in SIGN_PATTERNS:
            conj = (q[0], sa * q[1], sb * q[2], sa * sb * q[3])
            prod = _quad_mul(prod, conj, self.a, self.b)
        if any(prod[i] != 0 for i in (1, 2, 3)) or prod[0].denominator != 1:
            raise SingularSystem("conjugate product is not a rational integer")
        return int(prod[0])

    # -- coordinate changes ---------------------------------------------------

    def _to_quad(self, x: OkElement) -> tuple[Fraction, ...]:
        """Integral-basis coords -> rational coords over {1, sqrt a, sqrt b, sqrt ab}."""
        out = [Fraction(0)] * 4
        for i, ci in enumerate(x.coeffs):
            if ci:
                for l in range(4):
                    out[l] += ci * self.integral_basis[i][l]
        return tuple(out)

    def _from_quad(self, quad) -> OkElement:
        basis_cols = [[self.integral_basis[j][i] for j in range(4)] for i in range(4)]
        sol = _solve_rational(basis_cols, [Fraction(v) for v in quad])
        if any(s.denominator != 1 for s in sol):
            raise UnsupportedCase(f"{quad} is not integral over this basis")
        return OkElement(tuple(int(s) for s in sol))

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready description; schema shared with the fixture generator."""
        return {
            "schema_version": 1,
            "a": self.a,
            "b": self.b,
            "k": self.k,
            "d_K": self.discriminant,
            "signature": list(self.signature),
            "integral_basis": [
                [[f.numerator, f.denominator] for f in row] for row in self.integral_basis
            ],
            "structure_constants": [
                [list(self.structure_constants[i][j]) for j in range(4)] for i in range(4)
            ],
        }


def ideal_lattice_volume(field: BiquadraticField, ideal_norm: int) -> float:
    """Volume of the embedded ideal lattice: 2^(-r2) * sqrt(|d_K|) * Nm."""
    if ideal_norm < 1:
        raise ValueError("ideal_norm must be >= 1")
    r2 = field.signature[1]
    return 2.0 ** (-r2) * math.sqrt(abs(field.discriminant)) * ideal_norm


def build_field(a: int, b: int) -> BiquadraticField:
    """Construct Q(sqrt(a), sqrt(b)) with validated integral basis.

    Only the totally real branch a = b = 1 (mod 4) with gcd(a, b) = 1 is
    implemented; its integral basis is
        {1, (1+sqrt a)/2, (1+sqrt b)/2, (1+sqrt a)(1+sqrt b)/4}
    and d_K = (ab)^2.  Other congruence branches raise UnsupportedCase.
    Correctness is enforced by the determinant invariant
    det(embedding_matrix)^2 = |d_K|, not by trusting the case table.
    """
    a, b = int(a), int(b)
    for v in (a, b):
        if v in (0, 1):
            raise DegenerateField(f"radicand {v} does not define a quadratic extension")
        if not is_squarefree(v):
            raise NotSquarefree(f"radicand {v} is not squarefree")
    if a == b:
        raise DegenerateField("radicands must be distinct")
    g = math.gcd(a, b)
    k = a * b // (g * g)
    if k == 1 or (k > 0 and math.isqrt(k) ** 2 == k):
        raise DegenerateField("a*b is a perfect square; the extension has degree 2")

    if not (a > 0 and b > 0 and a % 4 == 1 and b % 4 == 1 and g == 1):
        raise UnsupportedCase(
            "integral basis implemented only for a = b = 1 (mod 4), a, b > 0, gcd(a, b) = 1"
        )

    half = Fraction(1, 2)
    quarter = Fraction(1, 4)
    basis = (
        (Fraction(1), Fraction(0), Fraction(0), Fraction(0)),
        (half, half, Fraction(0), Fraction(0)),
        (half, Fraction(0), half, Fraction(0)),
        (quarter, quarter, quarter, quarter),
    )

    # Structure constants: multiply basis elements in the rational coordinate
    # system and re-express in the basis; integrality certifies the basis is
    # closed under multiplication (i.e. really is an order).
    basis_cols = [[basis[j][i] for j in range(4)] for i in range(4)]
    structure = []
    for i in range(4):
        row = []
        for j in range(4):
            prod = _quad_mul(basis[i], basis[j], a, b)
            sol = _solve_rational(basis_cols, list(prod))
            if any(s.denominator != 1 for s in sol):
                raise SingularSystem(f"basis not multiplicatively closed at (i={i}, j={j})")
            row.append(tuple(int(s) for s in sol))
        structure.append(tuple(row))
    structure = tuple(structure)

    sqrt_a = math.sqrt(a)
    sqrt_b = math.sqrt(b)
    sqrt_ab = math.sqrt(a * b)
    emb = np.empty((4, 4))
    for r, (sa, sb) in enumerate(SIGN_PATTERNS):
        for i in range(4):
            q = basis[i]
            emb[r, i] = (
                float(q[0]) + float(q[1]) * sa * sqrt_a + float(q[2]) * sb * sqrt_b
                + float(q[3]) * sa * sb * sqrt_ab
            )

    d_k = (a * b) ** 2
    det = float(np.linalg.det(emb))
    if not math.isclose(det * det, abs(d_k), rel_tol=1e-9):
        raise SingularSystem(
            f"embedding determinant check failed: det^2 = {det * det}, |d_K| = {abs(d_k)}"
        )

    return BiquadraticField(
        a=a,
        b=b,
        k=k,
        signature=(4, 0),
        integral_basis=basis,
        structure_constants=structure,
        discriminant=d_k,
        embedding_matrix=emb,
    )
