"""Numerical verification: discretize the decoupled equation on a truncated
half-line in z, solve the resulting generalized (linear-in-E^2) or quadratic
(in E) eigenvalue pencil, and evaluate residual/normalization probes.

The half-line is truncated just right of the coefficient singularity at
z = -1/gamma and far into the exponential-decay region, with Dirichlet walls
at both ends.  The finite-difference scheme uses a layer-graded mesh
(log-spaced toward the singular end, uniform outside) with standard 3-point
nonuniform stencils; the alternative is Chebyshev collocation.

Be aware of what this construction can and cannot see: the truncated-wall
problem is a bona fide spectral problem in its own right, but the model
families' closed-form eigenfunctions with n >= 1 diverge at the singular
endpoint, so they do not satisfy the wall condition at any truncation; the
pencil output is reported with per-level convergence estimates and left to
the verification layer to compare and narrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .dirac import DecoupledODE

#: relative convergence-estimate threshold for keeping a level
SPURIOUS_FILTER = 1e-2
#: absolute floor used with the filter so an E ~ 0 level is not auto-discarded
SPURIOUS_FLOOR = 0.1


@dataclass(frozen=True)
class Discretization:
    """Grid/scheme description.  N is the number of interior points; both
    ends carry Dirichlet conditions.  N below 32 is accepted only with
    allow_small=True (used to demonstrate verification failure)."""

    domain: tuple[float, float]
    N: int = 1200
    scheme: str = "fd"  # 'fd' (graded-mesh 2nd order) or 'cheb'
    boundary: str = "dirichlet"
    allow_small: bool = False

    def __post_init__(self):
        zmin, zmax = self.domain
        if not (zmax > zmin):
            raise ValueError("domain must satisfy z_max > z_min")
        if self.scheme not in ("fd", "cheb"):
            raise ValueError("scheme must be 'fd' or 'cheb'")
        if self.boundary != "dirichlet":
            raise ValueError("only Dirichlet walls are supported")
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if self.N < 32 and not self.allow_small:
            raise ValueError("N < 32 is below the supported minimum")

    def validate_against_gamma(self, gamma: float) -> None:
        if gamma <= 0:
            raise ValueError("pencil oracle supports gamma > 0 half-lines")
        if self.domain[0] <= -1.0 / gamma + 1e-6:
            raise ValueError(
                f"z_min must exceed -1/gamma + 1e-6 = {-1.0 / gamma + 1e-6}"
            )

    def validate_against_ode(self, ode) -> None:
        root = _vf_root(ode)
        if root is None:
            return
        if not (self.domain[0] > root + 1e-6):
            raise ValueError(
                f"z_min must exceed the v_f zero + 1e-6 = {root + 1e-6}"
            )

    def with_N(self, N: int) -> "Discretization":
        return Discretization(
            domain=self.domain,
            N=N,
            scheme=self.scheme,
            boundary=self.boundary,
            allow_small=True,
        )


def _vf_root(ode) -> float | None:
    """Real zero of a degree-1 velocity profile (the coordinate
    singularity); None for constant v_f."""
    v = ode.v_f
    if v.degree == 0:
        return None
    if v.degree > 1:
        raise ValueError("pencil oracle supports v_f of degree <= 1")
    root = -v.coeff(0) / v.coeff(1)
    if abs(root.imag) > 1e-12 * max(1.0, abs(root)):
        return None  # zero off the real line: no real-axis singularity
    return root.real


def _graded_nodes(zmin: float, zmax: float, N: int, root: float | None) -> np.ndarray:
    """Interior nodes: log-spaced in the distance t to the v_f zero over
    the wall layer, uniform beyond; plain uniform when there is no
    singularity.  Boundary nodes excluded."""
    if root is None or root >= zmin:
        z = np.linspace(zmin, zmax, N + 2)
        return z[1:-1]
    scale = max(1e-12, abs(zmax - zmin))
    tmin = zmin - root
    tmax = zmax - root
    tsplit = min(max(1.0, 0.02 * scale), tmax)
    if tmin <= 0 or tsplit <= tmin:
        z = np.linspace(zmin, zmax, N + 2)
        return z[1:-1]
    n_layer = max(4, N // 3)
    n_outer = N - n_layer
    t_layer = np.exp(np.linspace(math.log(tmin), math.log(tsplit), n_layer + 1))
    z_layer = root + t_layer
    z_outer = np.linspace(z_layer[-1], zmax, n_outer + 2)
    nodes = np.concatenate([z_layer[1:], z_outer[1:-1]])
    return nodes


def _fd_operators(zmin, zmax, N, root):
    """Nonuniform 3-point first/second derivative matrices on the graded
    interior nodes (Dirichlet: boundary values dropped)."""
    z = _graded_nodes(zmin, zmax, N, root)
    full = np.concatenate([[zmin], z, [zmax]])
    n = len(z)
    D1 = np.zeros((n, n))
    D2 = np.zeros((n, n))
    for i in range(n):
        hm = full[i + 1] - full[i]
        hp = full[i + 2] - full[i + 1]
        l1 = -hp / (hm * (hm + hp))
        c1 = (hp - hm) / (hm * hp)
        r1 = hm / (hp * (hm + hp))
        l2 = 2.0 / (hm * (hm + hp))
        c2 = -2.0 / (hm * hp)
        r2 = 2.0 / (hp * (hm + hp))
        if i > 0:
            D1[i, i - 1] = l1
            D2[i, i - 1] = l2
        D1[i, i] = c1
        D2[i, i] = c2
        if i < n - 1:
            D1[i, i + 1] = r1
            D2[i, i + 1] = r2
    return z, D1, D2


def _cheb_matrix(M: int):
    if M == 0:
        return np.zeros((1, 1)), np.array([1.0])
    x = np.cos(np.pi * np.arange(M + 1) / M)
    c = np.hstack([2.0, np.ones(M - 1), 2.0]) * (-1.0) ** np.arange(M + 1)
    X = np.tile(x, (M + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(M + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def _cheb_operators(zmin, zmax, N, root):
    D, x = _cheb_matrix(N + 1)
    z = 0.5 * (zmin + zmax) + 0.5 * (zmax - zmin) * x
    D1 = (2.0 / (zmax - zmin)) * D
    D2 = D1 @ D1
    interior = slice(1, N + 1)
    return z[interior], D1[interior, interior], D2[interior, interior]


def _operators(disc: Discretization, root: float | None, N: int | None = None):
    zmin, zmax = disc.domain
    n = disc.N if N is None else N
    if disc.scheme == "fd":
        return _fd_operators(zmin, zmax, n, root)
    return _cheb_operators(zmin, zmax, n, root)


@dataclass(frozen=True)
class OracleLevel:
    """One computed level: raw pencil eigenvalue, mapped energy, and the
    N-refinement convergence estimate (on the mapped energy)."""

    raw: complex
    E: complex
    conv_estimate: float
    kept: bool
    sign_resolved: bool | None = None


@dataclass(frozen=True)
class OracleSpectrum:
    levels: tuple[OracleLevel, ...]
    disc: Discretization
    notes: tuple[str, ...] = ()

    def kept_levels(self) -> list[OracleLevel]:
        return [lv for lv in self.levels if lv.kept]

    def lowest(self, count: int) -> list[OracleLevel]:
        return self.kept_levels()[:count]


def _sample(fn: Callable[[complex], complex], z: np.ndarray) -> np.ndarray:
    return np.array([fn(complex(zz)) for zz in z])


def _maybe_real(*arrays):
    if all(np.max(np.abs(a.imag)) < 1e-13 * max(1.0, np.max(np.abs(a))) for a in arrays):
        return [np.ascontiguousarray(a.real) for a in arrays]
    return list(arrays)


def _linear_eigs(ode: DecoupledODE, disc: Discretization, root, N: int):
    z, D1, D2 = _operators(disc, root, N)
    P = _sample(ode.P_at, z)
    Q0 = _sample(lambda zz: ode.Q0(zz), z)
    Q2 = _sample(lambda zz: ode.Q2(zz), z)
    A = D2.astype(complex) + np.diag(P) @ D1 + np.diag(Q0)
    B = np.diag(-Q2)
    A, B = _maybe_real(A, B)
    return sla.eigvals(A, B)  # eigenvalue is E^2


def _quadratic_eigs(ode: DecoupledODE, disc: Discretization, root, N: int):
    z, D1, D2 = _operators(disc, root, N)
    P = _sample(ode.P_at, z)
    Q0 = _sample(lambda zz: ode.Q0(zz), z)
    Q1 = _sample(lambda zz: ode.Q1(zz), z)
    Q2 = _sample(lambda zz: ode.Q2(zz), z)
    n = len(z)
    L0 = D2.astype(complex) + np.diag(P) @ D1 + np.diag(Q0)
    L1 = np.diag(Q1)
    L2 = np.diag(Q2)
    Abig = np.block([[np.zeros((n, n)), np.eye(n)], [-L0, -L1]])
    Bbig = np.block([[np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), L2]])
    Abig, Bbig = _maybe_real(Abig, Bbig)
    w = sla.eigvals(Abig, Bbig)
    return w[np.isfinite(w)]


def _coarse_N(N: int) -> int:
    """Companion resolution for the convergence estimate: half the run, but
    never the run itself (tiny N would otherwise compare against itself and
    report spurious convergence)."""
    half = N // 2
    if half >= 8 and half != N:
        return half
    return max(4, N - 2)


def _match_estimates(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    """For each fine eigenvalue, distance to the nearest coarse one."""
    if len(coarse) == 0:
        return np.full(len(fine), np.inf)
    out = np.empty(len(fine))
    for j, lam in enumerate(fine):
        out[j] = np.min(np.abs(coarse - lam))
    return out


def solve_linear_pencil(
    ode: DecoupledODE,
    disc: Discretization,
    eps2_shift: float | None = None,
    sign_fix: Callable[[complex], complex | None] | None = None,
    keep: int = 12,
) -> OracleSpectrum:
    """Generalized eigenproblem for an equation whose energy dependence is
    purely quadratic (Q1 = 0): (D2 + P D1 + Q0) xi = E^2 (-Q2) xi.

    The raw eigenvalue reported per level is eps^2 = eps2_shift - E^2 when a
    shift is supplied (the shifted-oscillator convention), otherwise E^2.
    Convergence estimates compare the run against an N/2 run (an N-doubling
    comparison at production sizes exceeds the runtime budget; the halved
    pair gives the same-order, conservatively larger, estimate).  sign_fix
    maps |E| candidates to a signed energy (or None when unresolved).
    """
    root = _vf_root(ode)
    disc.validate_against_ode(ode)
    zq = np.max(np.abs(_sample(lambda z: ode.Q1(z), _operators(disc, root, 8)[0])))
    notes = []
    if zq > 1e-10:
        notes.append("linear pencil used although Q1 != 0; E-linear term ignored")
    lam_f = _linear_eigs(ode, disc, root, disc.N)
    lam_c = _linear_eigs(ode, disc, root, _coarse_N(disc.N))
    E_f = np.sqrt(lam_f.astype(complex))
    E_c = np.sqrt(lam_c.astype(complex))
    est = _match_estimates(E_f, E_c)
    order = np.argsort(np.abs(E_f))
    levels = []
    for idx in order[: max(keep, 3)]:
        E = complex(E_f[idx])
        raw = complex(eps2_shift - lam_f[idx]) if eps2_shift is not None else complex(lam_f[idx])
        kept = est[idx] <= SPURIOUS_FILTER * max(abs(E), SPURIOUS_FLOOR)
        signed, resolved = E, None
        if sign_fix is not None:
            fixed = sign_fix(E)
            resolved = fixed is not None
            signed = fixed if fixed is not None else E
        levels.append(
            OracleLevel(
                raw=raw,
                E=signed,
                conv_estimate=float(est[idx]),
                kept=bool(kept),
                sign_resolved=resolved,
            )
        )
    return OracleSpectrum(levels=tuple(levels), disc=disc, notes=tuple(notes))


def solve_quadratic_pencil(
    ode: DecoupledODE,
    disc: Discretization,
    keep: int = 16,
) -> OracleSpectrum:
    """Companion linearization of L0 + E L1 + E^2 L2 to a double-size
    generalized problem; E eigenvalues come out directly (no sign
    ambiguity).  Same convergence-estimate and filtering conventions as the
    linear pencil."""
    root = _vf_root(ode)
    disc.validate_against_ode(ode)
    E_f = _quadratic_eigs(ode, disc, root, disc.N)
    E_c = _quadratic_eigs(ode, disc, root, _coarse_N(disc.N))
    est = _match_estimates(E_f, E_c)
    order = np.argsort(np.abs(E_f))
    levels = []
    for idx in order[: max(keep, 3)]:
        E = complex(E_f[idx])
        kept = est[idx] <= SPURIOUS_FILTER * max(abs(E), SPURIOUS_FLOOR)
        levels.append(
            OracleLevel(raw=E, E=E, conv_estimate=float(est[idx]), kept=bool(kept))
        )
    return OracleSpectrum(levels=tuple(levels), disc=disc)


# ---------------------------------------------------------------------------
# residual and normalization probes


def ode_residual(
    ode: DecoupledODE,
    solution,
    points: Sequence[complex],
    E: complex | None = None,
    h: float = 1e-3,
) -> float:
    """max |xi'' + P xi' + Q xi| / (1 + |xi| + |xi''|) over the points.

    `solution` is either a closed-form state (analytic derivative closures
    are used) or a plain callable (5-point stencils of width h).  Points
    closer than 1e-3 to the coefficient singularity are rejected.
    """
    gamma = ode.v_f.coeff(1)
    for z in points:
        if abs(ode.v_f(z)) < 1e-3 * max(1.0, abs(gamma)):
            raise ValueError(f"sample point {z} too close to the v_f zero")
    if hasattr(solution, "xi1_z"):
        fn = solution.xi1_z
        d1 = solution.dxi1_z
        d2 = solution.d2xi1_z
    else:
        fn = solution

        def d1(z):
            return (-fn(z + 2 * h) + 8 * fn(z + h) - 8 * fn(z - h) + fn(z - 2 * h)) / (12 * h)

        def d2(z):
            return (
                -fn(z + 2 * h) + 16 * fn(z + h) - 30 * fn(z) + 16 * fn(z - h) - fn(z - 2 * h)
            ) / (12 * h * h)

    worst = 0.0
    for z in points:
        xi = fn(z)
        resid = d2(z) + ode.P_at(z) * d1(z) + ode.Q_at(z, E) * xi
        worst = max(worst, abs(resid) / (1.0 + abs(xi) + abs(d2(z))))
    return worst


def normalize_quadrature(
    state,
    half_widths: Sequence[float],
    dx: float = 0.02,
) -> tuple[list[float], bool, float | None]:
    """Trapezoidal int_{-L}^{L} (|psi1|^2 + |psi2|^2) dx for each half-width.

    Returns (norms, converged, growth_exponent): converged when the last two
    norms differ by less than 1e-4 relative; when they do not, the growth
    exponent is the log-log slope of the norm against the half-width (an
    exponent near 1 meaning linear growth, near 0 meaning logarithmic).
    """
    widths = sorted(float(L) for L in half_widths)
    if not widths:
        raise ValueError("need at least one half-width")
    if hasattr(state, "psi1") and callable(getattr(state, "psi1")):
        psi1, psi2 = state.psi1, state.psi2
        xs_full = np.arange(-widths[-1], widths[-1] + dx / 2, dx)
        dens = np.array(
            [abs(psi1(float(x))) ** 2 + abs(psi2(float(x))) ** 2 for x in xs_full]
        )
    else:  # a SpinorGrid
        xs_full = np.array(state.x)
        dens = np.abs(np.array(state.psi1)) ** 2 + np.abs(np.array(state.psi2)) ** 2
    trapezoid = getattr(np, "trapezoid", np.trapz)
    norms = []
    for L in widths:
        mask = np.abs(xs_full) <= L + 1e-12
        norms.append(float(trapezoid(dens[mask], xs_full[mask])))
    if len(norms) == 1:
        return norms, True, None
    last, prev = norms[-1], norms[-2]
    if last == 0.0 and prev == 0.0:
        return norms, True, None
    converged = abs(last - prev) < 1e-4 * max(abs(last), 1e-300)
    exponent = None
    if not converged:
        logs_L = np.log(widths)
        logs_N = np.log(np.maximum(norms, 1e-300))
        slope = np.polyfit(logs_L, logs_N, 1)[0]
        exponent = float(slope)
    return norms, converged, exponent
