"""The hypergeometric-reduction pipeline: from a Schroedinger-type equation

    Sigma'' + (tau_tilde/sigma) Sigma' + (sigma_tilde/sigma^2) Sigma = 0

to the linear pi(z), the admissible tau(z) branch, the eigenvalue constant
lambda, the weight functions theta/rho, Rodrigues-formula solutions, and the
energy quantization condition lambda = lambda_n.

All objects immutable, all functions pure (thread-safe); quantization scans
over distinct n share no state.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy import optimize

from .algebra import (
    ANY_K,
    AffineInK,
    AnyK,
    COEFF_TOL,
    IDENTITY_TOL,
    KCandidate,
    Poly,
    as_finite_complex,
    perfect_square_k,
)
from .specfun import LaguerreSpec, laguerre_eval

#: |lambda - lambda_n| threshold for a regular quantization root
QUANTIZE_TOL = 1e-10
#: fallback acceptance for roots sitting on a square-root branch point of
#: k(E), where |g| scales like sqrt(|E - root|) and cannot reach 1e-10
BRANCH_POINT_SLACK = 1e-5


class NoAdmissibleBranchError(ValueError):
    pass


class NoQuantizedLevelError(ValueError):
    pass


class NotNUClassError(ValueError):
    """The differential equation does not fit the polynomial template."""


@dataclass(frozen=True)
class NUProblem:
    """Input triple (tau_tilde, sigma, sigma_tilde) with degree bounds 1/2/2."""

    tau_tilde: Poly
    sigma: Poly
    sigma_tilde: Poly

    def __post_init__(self):
        if self.tau_tilde.degree > 1:
            raise ValueError("tau_tilde must have degree <= 1")
        if self.sigma.degree > 2 or self.sigma_tilde.degree > 2:
            raise ValueError("sigma and sigma_tilde must have degree <= 2")
        if self.sigma.is_zero:
            raise ValueError("sigma must not vanish identically")

    def half(self) -> Poly:
        """(sigma' - tau_tilde)/2, the completed-square offset."""
        return 0.5 * (self.sigma.derivative() - self.tau_tilde)

    def under_root(self) -> AffineInK:
        """((sigma'-tau_tilde)/2)^2 - sigma_tilde + k*sigma, affine in k."""
        h = self.half()
        return AffineInK(constant=h * h - self.sigma_tilde, slope=self.sigma)


@dataclass(frozen=True)
class NUBranch:
    """One resolved branch: the constant k, the linear pi, tau = tau_tilde +
    2 pi, the sign of the square root chosen in pi, and lambda = k + pi'."""

    k: complex
    pi: Poly
    tau: Poly
    sign: int
    lam: complex

    @property
    def tau_prime(self) -> complex:
        return self.tau.derivative().coeff(0)


def pi_candidates(problem: NUProblem, k: complex) -> tuple[Poly, Poly]:
    """pi_+ and pi_- for a k that makes the under-root expression a perfect
    square.  Raises if the square residual exceeds tolerance ("invalid k")."""
    expr = problem.under_root()
    A, B, C = expr.abc(k)
    scale = max(1.0, abs(A), abs(B), abs(C))
    resid = abs(B * B - 4 * A * C) / scale**2
    if resid > IDENTITY_TOL:
        raise ValueError(f"invalid k: under-root not a perfect square (residual {resid:.2e})")
    if abs(A) > COEFF_TOL * scale:
        sa = cmath.sqrt(A)
        ell = Poly((B / (2 * sa), sa))
    else:
        ell = Poly((cmath.sqrt(C),))
    h = problem.half()
    return h + ell, h - ell


def _branch_from(problem: NUProblem, k: complex, pi: Poly, sign: int) -> NUBranch:
    tau = problem.tau_tilde + 2 * pi
    lam = k + pi.derivative().coeff(0)
    return NUBranch(k=k, pi=pi, tau=tau, sign=sign, lam=lam)


def select_branch(
    candidates: Sequence[KCandidate] | AnyK, problem: NUProblem
) -> NUBranch:
    """Choose the branch with Re(tau') < 0; among several, the most negative
    Re(tau'), ties broken by candidate input order (k_plus first) and then by
    preferring the minus sign of the square root."""
    if isinstance(candidates, AnyK):
        raise NoAdmissibleBranchError(
            "underdetermined k: every k satisfies the square condition"
        )
    best: NUBranch | None = None
    for cand in candidates:
        for sign in (-1, +1):
            pi = problem.half() + sign * cand.linear_factor
            br = _branch_from(problem, cand.k, pi, sign)
            tp = br.tau_prime.real
            if tp >= 0:
                continue
            if best is None or tp < best.tau_prime.real - 1e-12 * max(1.0, abs(tp)):
                best = br
    if best is None:
        raise NoAdmissibleBranchError("no admissible NU branch: no tau with Re(tau') < 0")
    return best


def lambda_pair(branch: NUBranch, problem: NUProblem, n: int) -> tuple[complex, complex]:
    """(lambda, lambda_n): the two sides of the quantization identity
    lambda = k + pi' and lambda_n = -n tau' - n(n-1)/2 sigma''."""
    tau_p = branch.tau_prime
    sigma_pp = problem.sigma.derivative().derivative().coeff(0)
    lam_n = -n * tau_p - 0.5 * n * (n - 1) * sigma_pp
    return branch.lam, lam_n


# ---------------------------------------------------------------------------
# weight functions


@dataclass(frozen=True)
class WeightFunction:
    """Closed-form weight  exp(exp_poly(z)) * sigma(z)**sigma_power *
    prod (z - r_i)**p_i.

    For the degree-1 sigma used throughout the worked models this reduces to
    e^{rate z} sigma^{power}; degree-0 sigma yields a polynomial exponent and
    degree-2 sigma with distinct roots yields the two factor powers.
    """

    exp_poly: Poly
    sigma: Poly
    sigma_power: complex
    factors: tuple[tuple[complex, complex], ...] = ()

    def __call__(self, z: complex) -> complex:
        out = cmath.exp(self.exp_poly(z))
        if self.sigma_power != 0:
            out *= cmath.exp(self.sigma_power * cmath.log(self.sigma(z)))
        for root, power in self.factors:
            out *= cmath.exp(power * cmath.log(z - root))
        return out

    @property
    def rate(self) -> complex:
        """Linear coefficient of the exponent (the e^{rate z} rate)."""
        return self.exp_poly.coeff(1)

    def log_derivative(self, z: complex) -> complex:
        out = self.exp_poly.derivative()(z)
        if self.sigma_power != 0:
            out += self.sigma_power * self.sigma.derivative()(z) / self.sigma(z)
        for root, power in self.factors:
            out += power / (z - root)
        return out


@dataclass(frozen=True)
class WeightPair:
    """theta (the splitting factor, theta'/theta = pi/sigma) and rho (the
    Rodrigues weight, (sigma rho)' = tau rho)."""

    theta: WeightFunction
    rho: WeightFunction

    @property
    def theta_params(self) -> tuple[complex, complex]:
        return self.theta.rate, self.theta.sigma_power

    @property
    def rho_params(self) -> tuple[complex, complex]:
        return self.rho.rate, self.rho.sigma_power


def _integrate_log_ratio(numer: Poly, sigma: Poly) -> WeightFunction:
    """Weight W with W'/W = numer/sigma for numer of degree <= 1 and sigma of
    degree <= 2 (distinct roots when quadratic)."""
    if sigma.degree == 0:
        s0 = sigma.coeff(0)
        p = numer * (1.0 / s0)
        # exponent is the antiderivative of a degree-<=1 polynomial
        expo = Poly((0, p.coeff(0), p.coeff(1) / 2))
        return WeightFunction(exp_poly=expo, sigma=sigma, sigma_power=0j)
    if sigma.degree == 1:
        s1 = sigma.coeff(1)
        s0 = sigma.coeff(0)
        n1 = numer.coeff(1)
        n0 = numer.coeff(0)
        rate = n1 / s1
        power = (n0 - rate * s0) / s1
        return WeightFunction(exp_poly=Poly((0, rate)), sigma=sigma, sigma_power=power)
    # degree 2: partial fractions over the two roots
    from .algebra import quadratic_roots

    r1, r2 = quadratic_roots(sigma)
    if abs(r1 - r2) <= 1e-9 * max(abs(r1), abs(r2), 1.0):
        raise ValueError("sigma of degree 2 with a repeated root is unsupported")
    lead = sigma.coeff(2)
    q1 = numer(r1) / (lead * (r1 - r2))
    q2 = numer(r2) / (lead * (r2 - r1))
    return WeightFunction(
        exp_poly=Poly((0,)),
        sigma=sigma,
        sigma_power=0j,
        factors=((r1, q1), (r2, q2)),
    )


def weight_theta_rho(branch: NUBranch, problem: NUProblem) -> WeightPair:
    """theta from theta'/theta = pi/sigma and rho from rho'/rho =
    (tau - sigma')/sigma, via partial fractions."""
    theta = _integrate_log_ratio(branch.pi, problem.sigma)
    rho = _integrate_log_ratio(branch.tau - problem.sigma.derivative(), problem.sigma)
    return WeightPair(theta=theta, rho=rho)


# ---------------------------------------------------------------------------
# Rodrigues solutions


@dataclass(frozen=True)
class RodriguesSolution:
    """y_n from the Rodrigues formula y_n = a_n/rho d^n/dz^n [sigma^n rho].

    For degree-1 sigma with rho = e^{r z} sigma^q this is evaluated through
    the Laguerre connection  y_n(z) = a_n s1^n n! L_n^q(kappa sigma(z)) with
    kappa = -r/s1 (s1 the leading sigma coefficient); for degree-0 sigma the
    derivative is expanded symbolically.
    """

    n: int
    a_n: complex
    laguerre: LaguerreSpec | None
    kappa: complex          # s(z) = kappa * sigma(z)
    sigma: Poly
    prefactor: complex
    direct_poly: Poly | None = None

    def s_of(self, z: complex) -> complex:
        return self.kappa * self.sigma(z)

    def __call__(self, z: complex) -> complex:
        if self.direct_poly is not None:
            return self.a_n * self.direct_poly(z)
        return self.prefactor * laguerre_eval(self.laguerre.n, self.laguerre.mu, self.s_of(z))

    def derivative(self, z: complex, order: int = 1) -> complex:
        """Analytic derivative (order 1 or 2) via the Laguerre ladder."""
        if self.direct_poly is not None:
            p = self.direct_poly
            for _ in range(order):
                p = p.derivative()
            return self.a_n * p(z)
        mu = self.laguerre.mu
        n = self.laguerre.n
        step = self.kappa * self.sigma.derivative().coeff(0)
        s = self.s_of(z)
        val = laguerre_eval(n - order, mu + order, s)
        return self.prefactor * ((-step) ** order) * val


def rodrigues_solution(
    branch: NUBranch,
    problem: NUProblem,
    weights: WeightPair,
    n: int,
    a_n: complex = 1.0,
) -> RodriguesSolution:
    """Construct y_n; requires sigma of degree <= 1."""
    sigma = problem.sigma
    if sigma.degree > 1:
        raise ValueError("rodrigues_solution supports sigma of degree <= 1 only")
    if sigma.degree == 1:
        s1 = sigma.coeff(1)
        r = weights.rho.rate
        q = weights.rho.sigma_power
        kappa = -r / s1
        pref = a_n * (s1**n) * math.factorial(n)
        return RodriguesSolution(
            n=n,
            a_n=a_n,
            laguerre=LaguerreSpec(n, q),
            kappa=kappa,
            sigma=sigma,
            prefactor=pref,
        )
    # constant sigma: expand d^n/dz^n [sigma^n e^{p(z)}] = poly * e^{p(z)}
    p = weights.rho.exp_poly
    poly = Poly((1,))
    for _ in range(n):
        poly = poly.derivative() + poly * p.derivative()
    poly = (sigma.coeff(0) ** n) * poly
    return RodriguesSolution(
        n=n,
        a_n=a_n,
        laguerre=None,
        kappa=0j,
        sigma=sigma,
        prefactor=a_n,
        direct_poly=poly,
    )


def full_solution(
    branch: NUBranch, problem: NUProblem, weights: WeightPair, n: int, a_n: complex = 1.0
) -> Callable[[complex], complex]:
    """Sigma_n(z) = theta(z) * y_n(z)."""
    y = rodrigues_solution(branch, problem, weights, n, a_n)
    theta = weights.theta

    def sol(z: complex) -> complex:
        return theta(z) * y(z)

    return sol


def full_solution_residual(
    branch: NUBranch,
    problem: NUProblem,
    weights: WeightPair,
    n: int,
    points: Sequence[complex],
) -> float:
    """Max relative residual of Sigma = theta * y_n in the original equation,
    with theta factored out so only bounded quantities enter:

        [y'' + 2 w y' + (w' + w^2) y] + (tau_tilde/sigma)[y' + w y]
            + (sigma_tilde/sigma^2) y,     w = pi/sigma.
    """
    y = rodrigues_solution(branch, problem, weights, n)
    sigma, tau_t, sig_t, pi = problem.sigma, problem.tau_tilde, problem.sigma_tilde, branch.pi
    worst = 0.0
    for z in points:
        sv = sigma(z)
        if abs(sv) < 1e-9:
            continue
        w = pi(z) / sv
        wp = (pi.derivative()(z) * sv - pi(z) * sigma.derivative()(z)) / sv**2
        yv = y(z)
        yp = y.derivative(z, 1)
        ypp = y.derivative(z, 2)
        sig2 = ypp + 2 * w * yp + (wp + w * w) * yv
        sig1 = yp + w * yv
        resid = sig2 + (tau_t(z) / sv) * sig1 + (sig_t(z) / sv**2) * yv
        denom = 1.0 + abs(yv) + abs(sig2)
        worst = max(worst, abs(resid) / denom)
    return worst


# ---------------------------------------------------------------------------
# identity checks (used by tests and by the verification documents)


def pi_identity_residual(branch: NUBranch, problem: NUProblem) -> float:
    """Coefficient residual of pi^2 - (sigma'-tau_tilde) pi + sigma_tilde - k sigma = 0."""
    lhs = (
        branch.pi * branch.pi
        - (problem.sigma.derivative() - problem.tau_tilde) * branch.pi
        + problem.sigma_tilde
        - branch.k * problem.sigma
    )
    scale = max(lhs.scale(), problem.sigma_tilde.scale(), abs(branch.k), 1.0)
    return max(abs(c) for c in lhs.coeffs) / scale


def reduction_identity_residual(branch: NUBranch, problem: NUProblem) -> float:
    """Coefficient residual of sigma_tilde + pi^2 + pi(tau_tilde - sigma')
    + pi' sigma = lambda sigma."""
    lhs = (
        problem.sigma_tilde
        + branch.pi * branch.pi
        + branch.pi * (problem.tau_tilde - problem.sigma.derivative())
        + branch.pi.derivative().coeff(0) * problem.sigma
    )
    rhs = branch.lam * problem.sigma
    diff = lhs - rhs
    scale = max(lhs.scale(), rhs.scale(), 1.0)
    return max(abs(c) for c in diff.coeffs) / scale


# ---------------------------------------------------------------------------
# quantization


@dataclass(frozen=True)
class QuantizationResult:
    """A solved level: energy E at which lambda(E) = lambda_n(E)."""

    n: int
    E: complex
    k: complex
    lambda_n: complex
    branch: NUBranch
    g_abs: float          # |lambda - lambda_n| achieved at E
    regular_root: bool    # False when E sits on a k(E) branch point


ModelFamily = Callable[[complex], NUProblem]


def _k_channels(problem: NUProblem, sign: int) -> complex | None:
    """The k root of the discriminant quadratic on the +/- sqrt channel."""
    disc = problem.under_root().k_discriminant()
    k2, k1, k0 = disc.coeff(2), disc.coeff(1), disc.coeff(0)
    scale = max(abs(k2), abs(k1), abs(k0), 1.0)
    if abs(k2) <= COEFF_TOL * scale:
        if abs(k1) <= COEFF_TOL * scale:
            return None
        return -k0 / k1
    return (-k1 + sign * cmath.sqrt(k1 * k1 - 4 * k2 * k0)) / (2 * k2)


def _g_value(problem: NUProblem, n: int, sign_channel: int) -> complex | None:
    """lambda - lambda_n on one k channel, with the admissible pi sign."""
    k = _k_channels(problem, sign_channel)
    if k is None:
        return None
    try:
        pi_p, pi_m = pi_candidates(problem, k)
    except ValueError:
        return None
    best = None
    for sign, pi in ((-1, pi_m), (+1, pi_p)):
        br = _branch_from(problem, k, pi, sign)
        if br.tau_prime.real >= 0:
            continue
        if best is None or br.tau_prime.real < best.tau_prime.real:
            best = br
    if best is None:
        return None
    lam, lam_n = lambda_pair(best, problem, n)
    return lam - lam_n


def quantization_misfit(problem: NUProblem, n: int) -> float:
    """min |lambda - lambda_n| over all admissible branches of the problem.

    Vanishes exactly at quantized energies; used by the verification layer to
    demonstrate that candidate energies which are NOT engine eigenvalues do
    not admit a terminating solution.
    """
    cands = perfect_square_k(problem.under_root())
    if isinstance(cands, AnyK) or not cands:
        return float("inf")
    best = float("inf")
    for cand in cands:
        for sign in (-1, +1):
            pi = problem.half() + sign * cand.linear_factor
            br = _branch_from(problem, cand.k, pi, sign)
            if br.tau_prime.real >= 0:
                continue
            lam, lam_n = lambda_pair(br, problem, n)
            best = min(best, abs(lam - lam_n))
    return best


def _result_at(family: ModelFamily, n: int, E: complex) -> QuantizationResult | None:
    """Build the quantization-consistent branch at a candidate root."""
    try:
        problem = family(E)
        cands = perfect_square_k(problem.under_root())
    except (ValueError, NotNUClassError):
        return None
    if isinstance(cands, AnyK) or not cands:
        return None
    best = None
    for cand in cands:
        for sign in (-1, +1):
            pi = problem.half() + sign * cand.linear_factor
            br = _branch_from(problem, cand.k, pi, sign)
            if br.tau_prime.real >= 0:
                continue
            lam, lam_n = lambda_pair(br, problem, n)
            g = abs(lam - lam_n)
            if best is None or g < best[0]:
                best = (g, br, lam_n)
    if best is None:
        return None
    g, br, lam_n = best
    regular = g <= QUANTIZE_TOL
    if not regular and g > BRANCH_POINT_SLACK:
        return None
    return QuantizationResult(
        n=n, E=E, k=br.k, lambda_n=lam_n, branch=br, g_abs=g, regular_root=regular
    )


def _polish_complex(gfun, E0: complex, tol: float = 1e-14) -> complex:
    """Secant iteration on the complex g.

    Starts slightly off the real axis: on a fixed square-root sheet g is
    holomorphic there, which turns the |E - r| kinks the principal branch
    produces on the axis into regular (often linear) roots.
    """
    e0 = complex(E0)
    if e0.imag == 0.0:
        e0 += 1e-6j * (1 + abs(e0))
    e1 = e0 + 1e-7 * (1 + 1j) * (1 + abs(e0))
    g0, g1 = gfun(e0), gfun(e1)
    for _ in range(80):
        if g0 is None:
            e0 = e0 + 1e-9
            g0 = gfun(e0)
            continue
        if g1 is None or g1 == g0:
            break
        e2 = e1 - g1 * (e1 - e0) / (g1 - g0)
        if not (math.isfinite(e2.real) and math.isfinite(e2.imag)):
            break
        e0, g0, e1, g1 = e1, g1, e2, gfun(e2)
        if abs(e1 - e0) <= tol * max(1.0, abs(e1)):
            break
    return e1


def _disc_of(family: ModelFamily, E: complex) -> complex | None:
    """Discriminant of the k quadratic at energy E (vanishes where the two k
    channels collide; quantization roots can sit exactly there)."""
    try:
        problem = family(E)
    except (ValueError, NotNUClassError):
        return None
    disc = problem.under_root().k_discriminant()
    k2, k1, k0 = disc.coeff(2), disc.coeff(1), disc.coeff(0)
    scale = max(abs(k2), abs(k1), abs(k0), 1.0)
    if abs(k2) <= COEFF_TOL * scale:
        return None
    return (k1 * k1 - 4 * k2 * k0) / scale


def _symbolic_disc_roots(family) -> list[complex] | None:
    """Roots in E of the k-collision discriminant, computed symbolically.

    Requires the family to expose sigma, tau_tilde and the sigma_tilde
    E-coefficients (see dirac.NUFamily).  Expanding the discriminant in
    coefficient space performs the structural cancellations exactly, so
    double roots (e.g. an E = 0 level) come out at machine precision where
    pointwise evaluation plateaus at ~1e-8.
    """
    coeffs = getattr(family, "sigma_tilde_E_coeffs", None)
    sigma = getattr(family, "sigma", None)
    tau_t = getattr(family, "tau_tilde", None)
    if coeffs is None or sigma is None or tau_t is None:
        return None
    s0, s1, s2 = coeffs
    half = 0.5 * (sigma.derivative() - tau_t)
    h2 = half * half
    S0, S1, S2 = sigma.coeff(0), sigma.coeff(1), sigma.coeff(2)
    # C_j(E): z^j coefficient of half^2 - sigma_tilde(E), as a Poly in E
    CE = [
        Poly((h2.coeff(j) - s0.coeff(j), -s1.coeff(j), -s2.coeff(j)))
        for j in (0, 1, 2)
    ]
    C0E, C1E, C2E = CE
    k2 = S1 * S1 - 4 * S2 * S0
    k1E = 2 * S1 * C1E - 4 * (S0 * C2E + S2 * C0E)
    k0E = C1E * C1E - 4 * C2E * C0E
    discE = (k1E * k1E - 4 * k2 * k0E).chop(1e-12)
    if discE.is_zero or discE.degree == 0:
        return []
    import numpy as np

    rts = np.roots(list(reversed(discE.coeffs)))
    return [complex(r) for r in rts]


def quantize_energy_all(
    family: ModelFamily,
    n: int,
    search: tuple[float, float] | complex,
    grid: int = 1201,
) -> list[QuantizationResult]:
    """All energies in the search region solving lambda(E) = lambda_n(E).

    A real interval is scanned on both k channels for sign changes of Re(g)
    (bisected where g is real); roots sitting exactly on a branch point of
    k(E), where |g| ~ sqrt(|E - root|) and bracketing cannot see them, are
    recovered by root-finding the k discriminant in E and testing the
    quantization misfit there; remaining |g| minima get a bounded-minimizer
    plus secant polish.  A complex seed goes straight to secant iteration.
    """
    # (energy candidate, priority): 0 = symbolic discriminant root,
    # 1 = bracketed sign change, 2 = |g|-minimum / seed.  Priority breaks
    # ties between candidates whose |g| values are indistinguishable at the
    # rounding plateau around a k-collision.
    roots: list[tuple[complex, int]] = []

    def g_channel(E: complex, channel: int) -> complex | None:
        try:
            return _g_value(family(E), n, channel)
        except (ValueError, NotNUClassError):
            return None

    if isinstance(search, complex) and search.imag != 0:
        for channel in (+1, -1):
            roots.append((_polish_complex(lambda E, _c=channel: g_channel(E, _c), search), 2))
    else:
        if isinstance(search, complex):
            lo, hi = search.real - 1.0, search.real + 1.0
        else:
            lo, hi = float(search[0]), float(search[1])
        Es = [lo + (hi - lo) * j / (grid - 1) for j in range(grid)]
        any_valid = False
        for channel in (+1, -1):
            def g_of(E, _c=channel):
                return g_channel(complex(E), _c)

            gs = [g_of(E) for E in Es]
            any_valid = any_valid or any(g is not None for g in gs)
            gscale = max((abs(g) for g in gs if g is not None), default=1.0)
            gscale = max(gscale, 1.0)
            # (a) sign-change brackets on the real part where g is real
            for j in range(len(Es) - 1):
                ga, gb = gs[j], gs[j + 1]
                if ga is None or gb is None:
                    continue
                if abs(ga.imag) > 1e-6 * gscale or abs(gb.imag) > 1e-6 * gscale:
                    continue
                if ga.real == 0.0:
                    roots.append((complex(Es[j]), 1))
                    continue
                if ga.real * gb.real < 0:
                    def re_g(E):
                        g = g_of(E)
                        return float("nan") if g is None else g.real

                    r = optimize.brentq(re_g, Es[j], Es[j + 1], xtol=1e-14, rtol=8.9e-16)
                    roots.append((complex(r), 1))
            # (b) |g| minima refined by minimizer + secant (complex-capable)
            absg = [abs(g) if g is not None else float("inf") for g in gs]
            for j in range(1, len(Es) - 1):
                if absg[j] <= absg[j - 1] and absg[j] <= absg[j + 1] and absg[j] < 0.5 * gscale:
                    def abs_g(E):
                        g = g_of(E)
                        return float("inf") if g is None else abs(g)

                    res = optimize.minimize_scalar(
                        abs_g,
                        bounds=(Es[j - 1], Es[j + 1]),
                        method="bounded",
                        options={"xatol": 1e-14},
                    )
                    if res.fun < min(1e-2 * gscale, 1.0):
                        roots.append((complex(res.x), 2))
        if not any_valid:
            raise NoAdmissibleBranchError(
                "branch selection failed at every trial energy in the region"
            )
        # (c) k-discriminant roots: exact location of branch-point roots
        sym = _symbolic_disc_roots(family)
        if sym is not None:
            pad = 0.05 * (hi - lo)
            for r in sym:
                if lo - pad <= r.real <= hi + pad and abs(r.imag) <= (hi - lo):
                    roots.append((r, 0))
        else:
            ds = [_disc_of(family, complex(E)) for E in Es]
            dscale = max((abs(d) for d in ds if d is not None), default=0.0)
            if dscale > 0:
                for j in range(len(Es) - 1):
                    da, db = ds[j], ds[j + 1]
                    if da is None or db is None:
                        continue
                    if abs(da.imag) > 1e-9 * dscale or abs(db.imag) > 1e-9 * dscale:
                        continue
                    if da.real * db.real < 0 or da.real == 0.0:
                        def re_d(E):
                            d = _disc_of(family, complex(E))
                            return float("nan") if d is None else d.real

                        r = optimize.brentq(re_d, Es[j], Es[j + 1], xtol=1e-15, rtol=8.9e-16)
                        roots.append((complex(r), 0))

    # polish and validate every candidate via the stable k path
    out: list[tuple[QuantizationResult, int]] = []
    for r, prio in roots:
        qr = _result_at(family, n, r)
        if qr is not None and qr.g_abs <= QUANTIZE_TOL:
            out.append((qr, prio))
            continue
        best = qr
        for channel in (+1, -1):
            r2 = _polish_complex(lambda E, _c=channel: g_channel(E, _c), r)
            qr2 = _result_at(family, n, r2)
            if qr2 is not None and (best is None or qr2.g_abs < best.g_abs):
                best = qr2
        if best is not None:
            out.append((best, prio))
    # dedupe by energy, preferring small |g| and then generator priority
    dedup: list[QuantizationResult] = []
    for qr, _prio in sorted(out, key=lambda qp: (qp[0].g_abs, qp[1], -qp[0].E.real)):
        if all(abs(qr.E - other.E) > 1e-7 * max(1.0, abs(qr.E)) for other in dedup):
            dedup.append(qr)
    dedup.sort(key=lambda q: (q.E.real, q.E.imag))
    return dedup


def quantize_energy(
    family: ModelFamily,
    n: int,
    search: tuple[float, float] | complex,
    grid: int = 1201,
    accept: Callable[[QuantizationResult], bool] | None = None,
) -> QuantizationResult:
    """The quantized level for index n in the search region.

    `accept` lets model layers impose physical side conditions (e.g. the
    energy-sign relation of the k branch) when the reduced equation is even
    in E and admits mirror roots.
    """
    results = quantize_energy_all(family, n, search, grid=grid)
    if accept is not None:
        results = [r for r in results if accept(r)]
    if not results:
        lo, hi = (search if isinstance(search, tuple) else (search.real - 1, search.real + 1))
        samples = []
        for E in (lo, 0.5 * (lo + hi), hi):
            try:
                g = _g_value(family(complex(E)), n, +1)
            except (ValueError, NotNUClassError):
                g = None
            samples.append((E, g))
        raise NoQuantizedLevelError(
            f"no quantized level for n={n} in [{lo}, {hi}]; g samples: {samples}"
        )
    return min(results, key=lambda q: (q.g_abs, -q.E.real))
