"""Complex polynomial arithmetic (degree <= 4) and the quadratic machinery
behind the hypergeometric reduction: stable quadratic roots, rational
functions, and the perfect-square-in-k condition.

Everything here is an immutable value; all functions are pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

#: absolute floor used when deciding whether a coefficient is "zero"
#: relative to the scale of its polynomial
COEFF_TOL = 1e-12

#: residual tolerance for polynomial identities (perfect-square checks etc.)
IDENTITY_TOL = 1e-10


def as_finite_complex(value) -> complex:
    """Coerce to complex, rejecting NaN/Inf components."""
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite complex scalar: {value!r}")
    return z


@dataclass(frozen=True)
class Poly:
    """Polynomial with complex coefficients, index = power.

    Normalized so the stored tuple never ends in an exact zero (the zero
    polynomial is the single coefficient 0).  Use :meth:`chop` to discard
    numerically-negligible coefficients produced by floating arithmetic.
    """

    coeffs: tuple[complex, ...]

    def __init__(self, coeffs: Sequence[complex] = (0,)):
        cs = [as_finite_complex(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0j]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def coeff(self, power: int) -> complex:
        return self.coeffs[power] if 0 <= power <= self.degree else 0j

    def scale(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly((0,))
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def chop(self, tol: float = COEFF_TOL) -> "Poly":
        """Drop coefficients below tol * scale (returns a new Poly)."""
        s = self.scale()
        if s == 0.0:
            return Poly((0,))
        return Poly(tuple(0j if abs(c) < tol * s else c for c in self.coeffs))

    def __add__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    def __sub__(self, other: "Poly") -> "Poly":
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self.coeff(k) - other.coeff(k) for k in range(n)))

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            out = [0j] * (self.degree + other.degree + 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return Poly(tuple(out))
        return Poly(tuple(as_finite_complex(other) * c for c in self.coeffs))

    __rmul__ = __mul__

    def divmod_poly(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        """Euclidean division; divisor must not be the zero polynomial."""
        if divisor.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        dd = divisor.degree
        lead = divisor.coeffs[-1]
        if len(rem) - 1 < dd:
            return Poly((0,)), Poly(tuple(rem))
        quot = [0j] * (len(rem) - dd)
        for k in range(len(rem) - 1, dd - 1, -1):
            q = rem[k] / lead
            quot[k - dd] = q
            for j in range(dd + 1):
                rem[k - dd + j] -= q * divisor.coeffs[j]
        return Poly(tuple(quot)), Poly(tuple(rem[:dd] or [0j]))

    def close_to(self, other: "Poly", tol: float = IDENTITY_TOL) -> bool:
        s = max(self.scale(), other.scale(), 1.0)
        n = max(len(self.coeffs), len(other.coeffs))
        return all(abs(self.coeff(k) - other.coeff(k)) <= tol * s for k in range(n))

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c != 0 or self.degree == 0:
                terms.append(f"({c:.6g})z^{k}" if k else f"({c:.6g})")
        return " + ".join(terms)


def poly_eval(p: Poly, z: complex) -> complex:
    """Horner evaluation (exact for degree 0)."""
    return p(as_finite_complex(z))


def poly_derivative(p: Poly) -> Poly:
    return p.derivative()


def quadratic_roots(p: Poly) -> tuple[complex, complex]:
    """Both complex roots of a degree <= 2 polynomial.

    Degree 1 returns the single root twice.  Uses the sign-matched branch of
    the quadratic formula so the smaller root is obtained from Vieta's
    product rather than by cancellation.
    """
    if p.degree > 2:
        raise ValueError("quadratic_roots requires degree <= 2")
    if p.is_zero:
        raise ValueError("identically zero polynomial")
    c = p.coeff(0)
    b = p.coeff(1)
    a = p.coeff(2)
    if a == 0:
        if b == 0:
            raise ValueError("degenerate polynomial: no roots (nonzero constant)")
        r = -c / b
        return r, r
    sq = cmath.sqrt(b * b - 4 * a * c)
    # pick the branch that avoids cancellation in b +/- sq
    if (b.conjugate() * sq).real < 0:
        sq = -sq
    q = -0.5 * (b + sq)
    r1 = q / a
    r2 = (c / q) if q != 0 else (-b / (2 * a))
    return r1, r2


@dataclass(frozen=True)
class AffineInK:
    """Quadratic-in-z expression whose coefficients are affine in a constant k:
    constant(z) + k * slope(z), both parts of degree <= 2."""

    constant: Poly
    slope: Poly

    def __post_init__(self):
        if self.constant.degree > 2 or self.slope.degree > 2:
            raise ValueError("AffineInK parts must have degree <= 2")

    def at(self, k: complex) -> Poly:
        return self.constant + as_finite_complex(k) * self.slope

    def abc(self, k: complex):
        p = self.at(k)
        return p.coeff(2), p.coeff(1), p.coeff(0)

    def k_discriminant(self) -> Poly:
        """B(k)^2 - 4 A(k) C(k) as a polynomial in k (degree <= 2)."""
        a0, b0, c0 = self.constant.coeff(2), self.constant.coeff(1), self.constant.coeff(0)
        a1, b1, c1 = self.slope.coeff(2), self.slope.coeff(1), self.slope.coeff(0)
        # (b0 + k b1)^2 - 4 (a0 + k a1)(c0 + k c1)
        k0 = b0 * b0 - 4 * a0 * c0
        k1 = 2 * b0 * b1 - 4 * (a0 * c1 + a1 * c0)
        k2 = b1 * b1 - 4 * a1 * c1
        return Poly((k0, k1, k2))


class AnyK:
    """Marker: the perfect-square condition holds for every k."""

    def __repr__(self):
        return "AnyK()"


ANY_K = AnyK()


@dataclass(frozen=True)
class KCandidate:
    """One admissible k together with the linear factor ell(z) whose square
    equals the quadratic expression at that k."""

    k: complex
    linear_factor: Poly
    residual: float  # |B^2 - 4AC| at this k, scaled

    def __iter__(self):
        yield self.k
        yield self.linear_factor


def _linear_square_root(expr: AffineInK, k: complex) -> tuple[Poly, float]:
    """Linear ell with ell^2 == expr.at(k); also the scaled square residual."""
    A, B, C = expr.abc(k)
    scale = max(1.0, abs(A), abs(B), abs(C))
    resid = abs(B * B - 4 * A * C) / scale**2
    if abs(A) > COEFF_TOL * scale:
        sa = cmath.sqrt(A)
        ell = Poly((B / (2 * sa), sa))
    elif abs(B) <= math.sqrt(COEFF_TOL) * scale:
        ell = Poly((cmath.sqrt(C),))
    else:
        # linear, non-constant expression: not the square of anything
        raise ValueError(f"expression at k={k} is linear, not a perfect square")
    return ell, resid


def perfect_square_k(expr: AffineInK) -> list[KCandidate] | AnyK:
    """All k for which constant(z) + k*slope(z) is the square of a linear
    polynomial, i.e. roots of B(k)^2 - 4A(k)C(k).

    Roots are sorted by descending real part (ties by descending imaginary
    part); a numerically double root is returned once.  Returns ANY_K when
    the discriminant vanishes identically.
    """
    disc = expr.k_discriminant()
    scale = max(expr.constant.scale(), expr.slope.scale(), 1.0)
    if all(abs(c) <= COEFF_TOL * scale**2 for c in disc.coeffs):
        return ANY_K
    if disc.degree == 0:
        return []
    if disc.degree == 1 or abs(disc.coeff(2)) <= COEFF_TOL * disc.scale():
        ks = [-disc.coeff(0) / disc.coeff(1)]
    else:
        r1, r2 = quadratic_roots(disc)
        kscale = max(abs(r1), abs(r2), 1.0)
        if abs(r1 - r2) <= 1e-9 * kscale:
            ks = [0.5 * (r1 + r2)]
        else:
            ks = sorted([r1, r2], key=lambda k: (-k.real, -k.imag))
    out = []
    for k in ks:
        ell, resid = _linear_square_root(expr, k)
        out.append(KCandidate(k=k, linear_factor=ell, residual=resid))
    return out


@dataclass(frozen=True)
class RationalFunction:
    """Ratio of two Polys.  Arithmetic keeps degrees small; use as_poly()
    when the quotient is expected to collapse to a polynomial."""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")

    @staticmethod
    def from_poly(p: Poly) -> "RationalFunction":
        return RationalFunction(p, Poly((1,)))

    def __call__(self, z: complex) -> complex:
        return self.num(z) / self.den(z)

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __mul__(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return RationalFunction(self.num * other.num, self.den * other.den)
        return RationalFunction(other * self.num, self.den)

    __rmul__ = __mul__

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den, self.den * other.num)

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def as_poly(self, tol: float = 1e-10) -> Poly | None:
        """Exact polynomial quotient if the division leaves a negligible
        remainder, else None."""
        q, r = self.num.divmod_poly(self.den)
        scale = max(self.num.scale(), 1.0)
        if all(abs(c) <= tol * scale for c in r.coeffs):
            return q.chop()
        return None

    def simplify(self) -> "RationalFunction":
        p = self.as_poly()
        if p is not None:
            return RationalFunction.from_poly(p)
        return self
