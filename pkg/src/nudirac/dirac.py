"""Dirac-model representation and the operations around it: the f-function,
decoupling to the second-order upper-component equation, x <-> z rotation,
PT-symmetry checking, scalar/mass decomposition, and spinor reconstruction.

Conventions: natural units (hbar = 1); the transformed coordinate is
z = -i x; square roots of the Fermi velocity use the principal branch, which
for v_f(x) = 1 - i*gamma*x never meets the cut on the real line.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .algebra import Poly, RationalFunction, as_finite_complex
from .nu_core import NotNUClassError, NUProblem


class Space(enum.Enum):
    X = "x"
    Z = "z"


@dataclass(frozen=True)
class DiracModel:
    """Potentials and velocity profile of the single-particle Hamiltonian:
    vector V, pseudoscalar W, combined scalar R = S + m v_f^2, and Fermi
    velocity v_f, all polynomials of degree <= 2 in the current coordinate."""

    v_f: Poly
    V: Poly
    W: Poly
    R: Poly
    space: Space = Space.Z

    def __post_init__(self):
        if self.v_f.is_zero:
            raise ValueError("Fermi velocity must not vanish identically")
        for name in ("v_f", "V", "W", "R"):
            if getattr(self, name).degree > 2:
                raise ValueError(f"{name} must have degree <= 2")

    def w_minus_ir(self) -> Poly:
        return self.W - 1j * self.R

    def w_plus_ir(self) -> Poly:
        return self.W + 1j * self.R


def rotate_poly(p: Poly, direction: str) -> Poly:
    """Substitute z = -i x ('z_to_x': p(z) -> p(-i x)) or x = i z
    ('x_to_z'); round trips are coefficient-exact."""
    if direction == "z_to_x":
        factor = -1j
    elif direction == "x_to_z":
        factor = 1j
    else:
        raise ValueError("direction must be 'z_to_x' or 'x_to_z'")
    return Poly(tuple(c * factor**k for k, c in enumerate(p.coeffs)))


def rotate_space(obj, direction: str | None = None):
    """Rotate a Poly or a whole DiracModel between x- and z-space."""
    if isinstance(obj, Poly):
        if direction is None:
            raise ValueError("rotating a bare polynomial requires a direction")
        return rotate_poly(obj, direction)
    if isinstance(obj, DiracModel):
        if direction is None:
            direction = "z_to_x" if obj.space is Space.Z else "x_to_z"
        target = Space.X if direction == "z_to_x" else Space.Z
        return DiracModel(
            v_f=rotate_poly(obj.v_f, direction),
            V=rotate_poly(obj.V, direction),
            W=rotate_poly(obj.W, direction),
            R=rotate_poly(obj.R, direction),
            space=target,
        )
    raise TypeError(f"cannot rotate {type(obj).__name__}")


def f_function(model: DiracModel) -> RationalFunction:
    """f = v_f (W' - i R')/(W - i R) in z-space, simplified to a polynomial
    when the quotient is exact."""
    if model.space is not Space.Z:
        raise ValueError("f_function expects a z-space model")
    den = model.w_minus_ir()
    if den.is_zero:
        raise ValueError("transform undefined: W - iR vanishes identically")
    num = model.v_f * (model.W.derivative() - 1j * model.R.derivative())
    return RationalFunction(num, den).simplify()


@dataclass(frozen=True)
class DecoupledODE:
    """Second-order equation xi'' + P xi' + Q xi = 0 for the transformed
    upper component, in z-space.  Q is stored as its quadratic-in-E
    coefficients Q0 + E Q1 + E^2 Q2 with Q2 = -1/v_f^2."""

    v_f: Poly
    P: RationalFunction
    Q0: RationalFunction
    Q1: RationalFunction
    Q2: RationalFunction
    E: complex | None = None

    def Q_at(self, z: complex, E: complex | None = None) -> complex:
        e = self.E if E is None else E
        if e is None:
            raise ValueError("no energy supplied")
        return self.Q0(z) + e * self.Q1(z) + e * e * self.Q2(z)

    def P_at(self, z: complex) -> complex:
        return self.P(z)


def _decouple_parts(
    v_f: Poly, V: RationalFunction, W: Poly, R: Poly
) -> tuple[RationalFunction, RationalFunction, RationalFunction, RationalFunction]:
    v_rat = RationalFunction.from_poly(v_f)
    den = W - 1j * R
    if den.is_zero:
        raise ValueError("transform undefined: W - iR vanishes identically")
    f = RationalFunction(v_f * (W.derivative() - 1j * R.derivative()), den).simplify()
    P = ((RationalFunction.from_poly(v_f.derivative()) + f) / v_rat).simplify()
    inv_vf2 = RationalFunction(Poly((1,)), v_f * v_f)
    WR2 = RationalFunction.from_poly(W * W + R * R)
    base = (
        WR2
        - V * V
        + V * f
        - v_rat * (V.derivative() - f.derivative())
    )
    Q0 = (base * inv_vf2).simplify()
    Q1 = (-1 * ((f - 2 * V) * inv_vf2)).simplify()
    Q2 = -1 * inv_vf2
    return P, Q0, Q1, Q2


def decouple(model: DiracModel, E: complex | None = None) -> DecoupledODE:
    """The z-space equation xi1-dd + ((v_f-dot + f)/v_f) xi1-dot + Q xi1 = 0
    with Q = (W^2 + R^2 - V^2 + V f - v_f(V-dot - f-dot) - E^2
    - E (f - 2V)) / v_f^2."""
    if model.space is not Space.Z:
        raise ValueError("decouple expects a z-space model")
    P, Q0, Q1, Q2 = _decouple_parts(
        model.v_f, RationalFunction.from_poly(model.V), model.W, model.R
    )
    return DecoupledODE(
        v_f=model.v_f,
        P=P,
        Q0=Q0,
        Q1=Q1,
        Q2=Q2,
        E=None if E is None else as_finite_complex(E),
    )


def decouple_rational_v(
    v_f: Poly, V: RationalFunction, W: Poly, R: Poly, E: complex | None = None
) -> DecoupledODE:
    """decouple() variant for models whose vector potential is a genuine
    rational function (needed off the closed-form slice of the shifted
    oscillator family, where V = f/2 is not polynomial)."""
    P, Q0, Q1, Q2 = _decouple_parts(v_f, V, W, R)
    return DecoupledODE(v_f=v_f, P=P, Q0=Q0, Q1=Q1, Q2=Q2, E=E)


class NUFamily:
    """Energy-parametrized NU input built from a decoupled equation with
    sigma = v_f.  The sigma_tilde coefficients are stored as exact
    polynomials in E (sig0 + E sig1 + E^2 sig2), which lets the quantizer
    form the k-collision discriminant symbolically in E, free of the
    catastrophic cancellation a pointwise evaluation suffers near double
    roots."""

    def __init__(self, ode: DecoupledODE):
        sigma = ode.v_f
        tau_t = (ode.P * RationalFunction.from_poly(sigma)).as_poly()
        if tau_t is None or tau_t.degree > 1:
            raise NotNUClassError(
                "first-order coefficient times v_f is not a degree-<=1 polynomial"
            )
        sig2 = sigma * sigma
        parts = []
        for Q in (ode.Q0, ode.Q1, ode.Q2):
            p = (Q * RationalFunction.from_poly(sig2)).as_poly()
            if p is None or p.degree > 2:
                raise NotNUClassError(
                    "zeroth-order coefficient times v_f^2 is not a degree-<=2 polynomial"
                )
            parts.append(p.chop())
        self.sigma = sigma
        self.tau_tilde = tau_t.chop()
        self.sigma_tilde_E_coeffs: tuple[Poly, Poly, Poly] = tuple(parts)

    def __call__(self, E: complex) -> NUProblem:
        e = as_finite_complex(E)
        s0, s1, s2 = self.sigma_tilde_E_coeffs
        return NUProblem(
            tau_tilde=self.tau_tilde,
            sigma=self.sigma,
            sigma_tilde=s0 + e * s1 + (e * e) * s2,
        )


def nu_family(ode: DecoupledODE) -> NUFamily:
    """Energy-parametrized NU problem family for a decoupled equation."""
    return NUFamily(ode)


def to_nu_problem(ode: DecoupledODE, E: complex) -> NUProblem:
    """Cast the decoupled equation into the polynomial template with
    sigma = v_f at a single energy; raises NotNUClassError when the
    coefficients do not collapse to polynomials of the required degrees."""
    return NUFamily(ode)(E)


# ---------------------------------------------------------------------------
# PT symmetry


@dataclass(frozen=True)
class PTReport:
    """Outcome of the four joint parity/conjugation conditions
    v_f*(x) = v_f(-x),  S*(x) = S(-x),  V*(x) = V(-x),  W*(x) = -W(-x)."""

    v_f_violation: float
    S_violation: float
    V_violation: float
    W_violation: float
    samples: tuple[float, ...]
    tolerance: float = 1e-10

    @property
    def v_f_ok(self) -> bool:
        return self.v_f_violation < self.tolerance

    @property
    def S_ok(self) -> bool:
        return self.S_violation < self.tolerance

    @property
    def V_ok(self) -> bool:
        return self.V_violation < self.tolerance

    @property
    def W_ok(self) -> bool:
        return self.W_violation < self.tolerance

    @property
    def verdict(self) -> bool:
        return self.v_f_ok and self.S_ok and self.V_ok and self.W_ok

    def as_dict(self) -> dict:
        return {
            "v_f": {"ok": self.v_f_ok, "max_violation": self.v_f_violation},
            "S": {"ok": self.S_ok, "max_violation": self.S_violation},
            "V": {"ok": self.V_ok, "max_violation": self.V_violation},
            "W": {"ok": self.W_ok, "max_violation": self.W_violation},
            "verdict": self.verdict,
        }


def pt_check(
    model: DiracModel,
    S: Callable[[float], complex],
    samples: Sequence[float],
) -> PTReport:
    """Evaluate the four PT conditions on a symmetric sample set."""
    if model.space is not Space.X:
        raise ValueError("pt_check expects an x-space model")
    if not samples:
        raise ValueError("samples must be nonempty")
    xs = tuple(float(x) for x in samples)
    v_viol = s_viol = vv_viol = w_viol = 0.0
    for x in xs:
        v_viol = max(v_viol, abs(model.v_f(x).conjugate() - model.v_f(-x)))
        s_viol = max(s_viol, abs(complex(S(x)).conjugate() - complex(S(-x))))
        vv_viol = max(vv_viol, abs(model.V(x).conjugate() - model.V(-x)))
        w_viol = max(w_viol, abs(model.W(x).conjugate() + model.W(-x)))
    return PTReport(
        v_f_violation=v_viol,
        S_violation=s_viol,
        V_violation=vv_viol,
        W_violation=w_viol,
        samples=xs,
    )


# ---------------------------------------------------------------------------
# scalar / mass decomposition


@dataclass(frozen=True)
class ScalarSplit:
    """Real and imaginary parts of S = R - m v_f^2 as functions of x, with
    the consistency relation between them checked away from x = 0."""

    S_R: Callable[[float], float]
    S_I: Callable[[float], float]
    constraint_checked: bool
    constraint_max_violation: float


def scalar_mass_split(
    m: Callable[[float], float],
    R: Poly,
    v_f: Poly,
    samples: Sequence[float] = (),
) -> ScalarSplit:
    """Split S(x) = R(x) - m(x) v_f(x)^2 into real/imaginary parts.

    When R has the linear real profile beta*x and v_f = 1 - i*gamma*x the
    split must obey S_R = beta x + ((gamma^2 x^2 - 1)/(2 gamma x)) S_I
    (beta = 0 gives the purely multiplicative variant); the relation is
    verified on the sample set, skipping x = 0 where the quotient form has a
    removable singularity.
    """

    def S(x: float) -> complex:
        return R(x) - m(x) * v_f(x) ** 2

    def S_R(x: float) -> float:
        return S(x).real

    def S_I(x: float) -> float:
        return S(x).imag

    # recover gamma from v_f = 1 - i gamma x and beta from R = beta x
    c1 = v_f.coeff(1)
    gamma = (1j * c1).real
    profile_ok = (
        v_f.degree == 1
        and abs(v_f.coeff(0) - 1) < 1e-12
        and abs(c1.real) < 1e-12
        and abs(gamma) > 1e-12
        and R.degree <= 1
        and abs(R.coeff(0)) < 1e-12
        and abs(R.coeff(1).imag) < 1e-12
    )
    violation = 0.0
    if profile_ok:
        beta = R.coeff(1).real
        if not samples:
            samples = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
        for x in samples:
            if abs(x) < 1e-12:
                continue  # removable singularity of the quotient form
            lhs = S_R(x)
            rhs = beta * x + (gamma**2 * x**2 - 1) / (2 * gamma * x) * S_I(x)
            violation = max(violation, abs(lhs - rhs))
    return ScalarSplit(
        S_R=S_R,
        S_I=S_I,
        constraint_checked=profile_ok,
        constraint_max_violation=violation,
    )


# ---------------------------------------------------------------------------
# spinor reconstruction


@dataclass(frozen=True)
class SpinorGrid:
    """Both spinor components sampled on a uniform x grid."""

    x: tuple[float, ...]
    psi1: tuple[complex, ...]
    psi2: tuple[complex, ...]
    E: complex
    norm_estimate: float
    stencil_warning: bool


def _stencil5(f: Callable[[float], complex], x: float, h: float) -> complex:
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _stencil3(f: Callable[[float], complex], x: float, h: float) -> complex:
    return (f(x + h) - f(x - h)) / (2 * h)


def spinor_closures(
    model: DiracModel,
    E: complex,
    xi1: Callable[[complex], complex],
    h: float = 1e-2,
) -> tuple[Callable[[float], complex], Callable[[float], complex]]:
    """(psi1, psi2) as callables on the real line.

    psi1 = (W - iR) xi1 / sqrt(v_f); psi2 is rebuilt from the first coupled
    equation, psi2 = [(E - V) psi1 + i sqrt(v_f) (sqrt(v_f) psi1)'] / (W - iR),
    with the derivative taken by a 5-point stencil of width h.
    """
    if model.space is not Space.X:
        raise ValueError("spinor reconstruction expects an x-space model")
    wmr = model.w_minus_ir()
    E = as_finite_complex(E)

    def sqrt_vf(x: float) -> complex:
        return cmath.sqrt(model.v_f(x))

    def psi1(x: float) -> complex:
        return wmr(x) * xi1(x) / sqrt_vf(x)

    def u(x: float) -> complex:  # sqrt(v_f) psi1 = (W - iR) xi1
        return wmr(x) * xi1(x)

    def psi2(x: float) -> complex:
        d = wmr(x)
        if d == 0:
            raise ZeroDivisionError(f"W - iR vanishes at x={x}")
        return ((E - model.V(x)) * psi1(x) + 1j * sqrt_vf(x) * _stencil5(u, x, h)) / d

    return psi1, psi2


def reconstruct_spinor(
    model: DiracModel,
    E: complex,
    xi1: Callable[[complex], complex],
    grid: Sequence[float],
) -> SpinorGrid:
    """Sample both spinor components on a uniform grid; the derivative uses a
    5-point stencil at the grid spacing, and the norm estimate is the
    trapezoidal integral of |psi1|^2 + |psi2|^2 over the grid."""
    xs = [float(x) for x in grid]
    if len(xs) < 2:
        raise ValueError("grid needs at least two points")
    h = xs[1] - xs[0]
    if any(abs((xs[j + 1] - xs[j]) - h) > 1e-9 * max(1.0, abs(h)) for j in range(len(xs) - 1)):
        raise ValueError("grid must be uniform")
    psi1_f, psi2_f = spinor_closures(model, E, xi1, h=h)
    p1 = [psi1_f(x) for x in xs]
    p2 = [psi2_f(x) for x in xs]
    # coarse-grid flag: compare 5- vs 3-point derivative of sqrt(v_f) psi1
    wmr = model.w_minus_ir()

    def u(x: float) -> complex:
        return wmr(x) * xi1(x)

    warn = False
    for x in xs[:: max(1, len(xs) // 7)]:
        d5 = _stencil5(u, x, h)
        d3 = _stencil3(u, x, h)
        if abs(d5 - d3) > 1e-4 * (1.0 + abs(d5)):
            warn = True
            break
    norm = 0.0
    for j in range(len(xs) - 1):
        a = abs(p1[j]) ** 2 + abs(p2[j]) ** 2
        b = abs(p1[j + 1]) ** 2 + abs(p2[j + 1]) ** 2
        norm += 0.5 * (a + b) * (xs[j + 1] - xs[j])
    return SpinorGrid(
        x=tuple(xs),
        psi1=tuple(p1),
        psi2=tuple(p2),
        E=E,
        norm_estimate=norm,
        stencil_warning=warn,
    )


def coupled_residuals(
    model: DiracModel,
    E: complex,
    psi1: Callable[[float], complex],
    psi2: Callable[[float], complex],
    points: Sequence[float],
    h: float = 5e-3,
) -> tuple[float, float]:
    """Max normalized residuals of the two first-order coupled equations
    -i sqrt(v_f)(sqrt(v_f) psi1)' + (W - iR) psi2 = (E - V) psi1   and
    +i sqrt(v_f)(sqrt(v_f) psi2)' + (W + iR) psi1 = (E - V) psi2."""
    if model.space is not Space.X:
        raise ValueError("coupled_residuals expects an x-space model")
    E = as_finite_complex(E)

    def sq(x: float) -> complex:
        return cmath.sqrt(model.v_f(x))

    def u1(x: float) -> complex:
        return sq(x) * psi1(x)

    def u2(x: float) -> complex:
        return sq(x) * psi2(x)

    worst1 = worst2 = 0.0
    for x in points:
        p1, p2 = psi1(x), psi2(x)
        denom = 1.0 + abs(p1) + abs(p2)
        r1 = (
            -1j * sq(x) * _stencil5(u1, x, h)
            + model.w_minus_ir()(x) * p2
            - (E - model.V(x)) * p1
        )
        r2 = (
            1j * sq(x) * _stencil5(u2, x, h)
            + model.w_plus_ir()(x) * p1
            - (E - model.V(x)) * p2
        )
        worst1 = max(worst1, abs(r1) / denom)
        worst2 = max(worst2, abs(r2) / denom)
    return worst1, worst2
