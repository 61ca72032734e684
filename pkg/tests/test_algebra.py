import cmath
import random

import pytest

from nudirac.algebra import (
    ANY_K,
    AffineInK,
    AnyK,
    Poly,
    RationalFunction,
    perfect_square_k,
    poly_derivative,
    poly_eval,
    quadratic_roots,
)


def test_poly_eval_constant_term():
    p = Poly((1, 2))
    assert poly_eval(p, 0) == 1


def test_poly_eval_linear_at_i():
    p = Poly((1, 2))
    assert poly_eval(p, 1j) == 1 + 2j


def test_poly_eval_quadratic_hand_value():
    # -4z^2 - 0z + 1 at z = 1 -> -3
    p = Poly((1, 0, -4))
    assert poly_eval(p, 1) == -3


def test_poly_eval_rejects_nonfinite():
    with pytest.raises(ValueError):
        poly_eval(Poly((1,)), float("inf"))


def test_derivative_of_constant_is_zero():
    d = poly_derivative(Poly((3.7,)))
    assert d.is_zero and d.degree == 0


def test_derivative_linear():
    assert poly_derivative(Poly((1, 2.5))).coeffs == (2.5 + 0j,)


def test_derivative_term_by_term():
    # -b^2 z^2 - c z - d with b=2, c=3, d=5 -> -8z - 3
    p = Poly((-5, -3, -4))
    assert poly_derivative(p).coeffs == (-3 + 0j, -8 + 0j)


def test_derivative_is_linear_operation():
    rng = random.Random(7)
    for _ in range(50):
        p = Poly([complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(4)])
        q = Poly([complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) for _ in range(3)])
        lhs = poly_derivative(p + q)
        rhs = poly_derivative(p) + poly_derivative(q)
        assert lhs.coeffs == rhs.coeffs


def test_quadratic_roots_symmetric():
    r1, r2 = quadratic_roots(Poly((-1, 0, 1)))
    assert sorted([r1.real, r2.real]) == [-1, 1]


def test_quadratic_roots_imaginary_pair():
    r1, r2 = quadratic_roots(Poly((1, 0, 1)))
    assert {complex(round(r.real, 12), round(r.imag, 12)) for r in (r1, r2)} == {1j, -1j}


def test_quadratic_roots_double_root():
    # 4k^2 - 16k + 16: discriminant zero, root 2 twice
    r1, r2 = quadratic_roots(Poly((16, -16, 4)))
    assert abs(r1 - 2) < 1e-14 and abs(r2 - 2) < 1e-14


def test_quadratic_roots_degree_one_returned_twice():
    r1, r2 = quadratic_roots(Poly((-6, 2)))
    assert r1 == r2 == 3


def test_quadratic_roots_zero_poly_rejected():
    with pytest.raises(ValueError, match="zero polynomial"):
        quadratic_roots(Poly((0,)))


def test_quadratic_roots_vieta():
    rng = random.Random(11)
    for _ in range(100):
        a = complex(rng.uniform(0.5, 2), rng.uniform(-1, 1))
        b = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        c = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
        r1, r2 = quadratic_roots(Poly((c, b, a)))
        assert abs((r1 + r2) - (-b / a)) < 1e-12 * max(1, abs(b / a))
        assert abs((r1 * r2) - (c / a)) < 1e-12 * max(1, abs(c / a))


def _pt_under_root(E, a=1.0, b=2.0, gamma=2.0, omega=2.0):
    # under-root expression of the confining linear-velocity model:
    # b^2 z^2 + (c + k gamma) z + (d + k), affine in k
    c = 2 * a * b + b * gamma - 2 * b * E
    d = E**2 + a**2 + b - 2 * a * E - omega**2
    return AffineInK(constant=Poly((d, c, b**2)), slope=Poly((1, gamma)))


def test_perfect_square_k_double_root_model_data():
    # gamma=2, b=2, a=1, omega=2, E=2: c=0, d=-1 -> 4k^2-16k+16 = 0 -> k=2
    expr = _pt_under_root(2.0)
    disc = expr.k_discriminant()
    assert disc.coeffs == (16 + 0j, -16 + 0j, 4 + 0j)
    cands = perfect_square_k(expr)
    assert not isinstance(cands, AnyK)
    assert len(cands) == 1  # double root collapses to one candidate
    assert abs(cands[0].k - 2) < 1e-12
    assert cands[0].residual < 1e-10


def test_perfect_square_k_shifted_oscillator_data():
    # alpha=1, gamma=2, beta=2, E=0 (eps^2=2): k^2 - 4k + 4 = 0 -> k = 2
    alpha, beta, gamma, eps2 = 1.0, 2.0, 2.0, 2.0
    expr = AffineInK(
        constant=Poly((gamma**2 / 4 - eps2, 0, beta**2)),
        slope=Poly((1, gamma)),
    )
    cands = perfect_square_k(expr)
    assert len(cands) == 1
    assert abs(cands[0].k - 2) < 1e-12
    kp = 2 * alpha**2 + 2 * alpha * 0.0
    assert abs(cands[0].k - kp) < 1e-12


def test_perfect_square_k_square_iff_constant_vanishes():
    # A=1, B=0, C=-k: square exactly when k = 0
    expr = AffineInK(constant=Poly((0, 0, 1)), slope=Poly((-1,)))
    cands = perfect_square_k(expr)
    assert len(cands) == 1
    assert abs(cands[0].k) < 1e-14


def test_perfect_square_k_any_k_marker():
    # k z^2: every k gives a perfect square
    expr = AffineInK(constant=Poly((0,)), slope=Poly((0, 0, 1)))
    assert isinstance(perfect_square_k(expr), AnyK)
    assert isinstance(ANY_K, AnyK)


def test_perfect_square_residual_invariant():
    rng = random.Random(3)
    for _ in range(100):
        const = Poly([complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) for _ in range(3)])
        slope = Poly([complex(rng.uniform(-2, 2), rng.uniform(-1, 1)) for _ in range(2)])
        cands = perfect_square_k(AffineInK(constant=const, slope=slope))
        if isinstance(cands, AnyK):
            continue
        for cand in cands:
            assert cand.residual < 1e-10


def test_perfect_square_linear_factor_squares_back():
    expr = _pt_under_root(2.5)
    for cand in perfect_square_k(expr):
        sq = cand.linear_factor * cand.linear_factor
        target = expr.at(cand.k)
        assert sq.close_to(target, 1e-9)


def test_sorted_by_descending_real_part():
    expr = _pt_under_root(3.0)
    cands = perfect_square_k(expr)
    assert len(cands) == 2
    assert cands[0].k.real >= cands[1].k.real


def test_rational_function_simplify_and_derivative():
    num = Poly((1, 3, 2))  # (1+z)(1+2z)
    den = Poly((1, 1))
    r = RationalFunction(num, den).simplify()
    assert r.den.degree == 0
    assert r.num.close_to(Poly((1, 2)), 1e-12)
    d = RationalFunction(Poly((0, 1)), Poly((1, 1))).derivative()
    # d/dz [z/(1+z)] = 1/(1+z)^2
    assert abs(d(0.5) - 1 / 1.5**2) < 1e-14


def test_zero_polynomial_normalization():
    assert Poly(()).coeffs == (0j,)
    assert Poly((0, 0, 0)).degree == 0
    assert Poly((0, 0, 0)).is_zero
