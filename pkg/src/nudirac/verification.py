"""Verification pipeline shared by the CLI and the acceptance suite: build
models from a run configuration, solve, run the pencil oracle and the
residual/normalization probes, and assemble the checked result document.

Threshold conventions: polynomial identities 1e-10, closed-form equation
residuals 1e-8, stencil-limited coupled-system residuals 1e-5, engine/oracle
eigenvalue agreement max(1e-3 abs, 5e-3 rel).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import results
from .dirac import coupled_residuals, decouple, rotate_space
from .models import (
    ClosedFormState,
    NonPTParams,
    PTLinearParams,
    closed_form_residual,
    nonpt_k_plus_formula,
    nonpt_model,
    nonpt_nu_family,
    nonpt_ode,
    nonpt_paper_energy,
    nonpt_solve,
    pt_model,
    pt_nu_family,
    pt_paper_energy,
    pt_linear_solve,
)
from .nu_core import quantization_misfit
from .oracle import (
    Discretization,
    OracleSpectrum,
    normalize_quadrature,
    solve_linear_pencil,
    solve_quadratic_pencil,
)

RESIDUAL_TOL = 1e-8
COUPLED_TOL = 1e-5
ENGINE_PAPER_TOL = 1e-10
ORACLE_ABS_TOL = 1e-3
ORACLE_REL_TOL = 5e-3
DISCRIMINATION_FLOOR = 1e-3


class ConfigError(ValueError):
    pass


def default_config(model: str) -> dict:
    domain = (-0.499, 40.0) if model == "nonpt-shifted" else (-0.499, 30.0)
    N = 1200 if model == "nonpt-shifted" else 600
    return {
        "model": model,
        "parameters": {},
        "n_max": 2,
        "oracle": {"domain": list(domain), "N": N, "scheme": "fd"},
        "engine_only": False,
    }


def validate_config(config: dict) -> dict:
    cfg = dict(config)
    model = cfg.get("model")
    if model not in ("pt-linear", "nonpt-shifted", "custom"):
        raise ConfigError(f"unknown model {model!r}")
    n_max = int(cfg.get("n_max", 2))
    if not (0 <= n_max <= 20):
        raise ConfigError("n_max must be in 0..20")
    cfg["n_max"] = n_max
    params = dict(cfg.get("parameters", {}))
    required = {
        "pt-linear": ("a", "b", "gamma", "omega"),
        "nonpt-shifted": ("alpha", "beta", "gamma"),
        "custom": (),
    }[model]
    missing = [p for p in required if p not in params]
    if missing:
        raise ConfigError(f"model {model} requires parameters: {', '.join(missing)}")
    cfg["parameters"] = params
    orc = dict(cfg.get("oracle", {}))
    orc.setdefault("domain", default_config(model)["oracle"]["domain"])
    orc.setdefault("N", default_config(model)["oracle"]["N"])
    orc.setdefault("scheme", "fd")
    if orc["scheme"] not in ("fd", "cheb"):
        raise ConfigError("oracle scheme must be 'fd' or 'cheb'")
    cfg["oracle"] = orc
    cfg.setdefault("engine_only", False)
    return cfg


def build_params(cfg: dict):
    p = cfg["parameters"]
    if cfg["model"] == "pt-linear":
        return PTLinearParams(a=p["a"], b=p["b"], gamma=p["gamma"], omega=p["omega"])
    if cfg["model"] == "nonpt-shifted":
        return NonPTParams(alpha=p["alpha"], beta=p["beta"], gamma=p["gamma"])
    raise ConfigError("custom models are configured through --config coefficients")


def _custom_model(cfg: dict):
    from .algebra import Poly
    from .dirac import DiracModel, Space

    coeffs = cfg.get("custom", None)
    if not coeffs:
        raise ConfigError("custom model needs a 'custom' coefficient section")

    def poly_of(name):
        raw = coeffs.get(name)
        if raw is None:
            raise ConfigError(f"custom section missing polynomial {name!r}")
        return Poly(tuple(complex(c[0], c[1]) for c in raw))

    return DiracModel(
        v_f=poly_of("v_f"), V=poly_of("V"), W=poly_of("W"), R=poly_of("R"), space=Space.Z
    )


def solve_states(cfg: dict, normalize: bool = True):
    """(states, paper_energy_fn, notes).  States may be empty with a reason
    when the engine does not apply (off-slice shifted-oscillator model)."""
    model = cfg["model"]
    notes: list[str] = []
    if model == "pt-linear":
        params = build_params(cfg)
        states = pt_linear_solve(params, cfg["n_max"], normalize=normalize)
        if abs(params.a - params.b / params.gamma) > 1e-12:
            notes.append(
                "published spectrum expression valid only on the a = b/gamma "
                "slice; engine energies differ by a - b/gamma (recorded per level)"
            )
        return states, (lambda n: pt_paper_energy(params, n)), None, notes
    if model == "nonpt-shifted":
        params = build_params(cfg)
        if params.on_closed_form_slice:
            states = nonpt_solve(params, cfg["n_max"], normalize=normalize)
            return states, (lambda n: nonpt_paper_energy(params, n)), None, notes
        if not cfg.get("engine_only"):
            raise ConfigError("closed forms require beta = alpha*gamma")
        reason = (
            "beta != alpha*gamma: V = f/2 is rational and the decoupled "
            "equation leaves the polynomial class; no engine quantization"
        )
        notes.append(reason)
        notes.append(
            "shifted-oscillator energy formula evaluated outside its "
            "validity slice is omitted"
        )
        return [], None, reason, notes
    # custom
    from .dirac import nu_family
    from .models import _build_state, _quantize_with_widening  # shared machinery

    model_z = _custom_model(cfg)
    family = nu_family(decouple(model_z))
    scale = max(1.0, *(p.scale() for p in (model_z.v_f, model_z.V, model_z.W, model_z.R)))
    states = []
    for n in range(cfg["n_max"] + 1):
        qr = _quantize_with_widening(family, n, span=8.0 * (n + 2) * scale)
        states.append(_build_state("custom", model_z, qr, deltas={}))
    return states, None, None, notes


def oracle_spectrum(cfg: dict) -> tuple[OracleSpectrum | None, str | None]:
    """Run the pencil appropriate to the model; (spectrum, error_reason)."""
    orc = cfg["oracle"]
    disc = Discretization(
        domain=tuple(orc["domain"]),
        N=int(orc["N"]),
        scheme=orc["scheme"],
        allow_small=True,
    )
    try:
        if cfg["model"] == "nonpt-shifted":
            params = build_params(cfg)
            ode = nonpt_ode(params)
            shift = params.alpha**2 + params.gamma**2 / 4

            def sign_fix(E: complex) -> complex | None:
                for sgn in (1, -1):
                    cand = sgn * E
                    lam = nonpt_k_plus_formula(params, cand) - params.beta
                    nval = lam / (2 * params.beta)
                    if (
                        abs(nval.imag) < 1e-6
                        and abs(nval.real - round(nval.real)) < 5e-3
                        and round(nval.real) >= 0
                    ):
                        return cand
                return None

            spec = solve_linear_pencil(ode, disc, eps2_shift=shift, sign_fix=sign_fix)
        elif cfg["model"] == "pt-linear":
            params = build_params(cfg)
            ode = decouple(pt_model(params))
            spec = solve_quadratic_pencil(ode, disc)
        else:
            model_z = _custom_model(cfg)
            ode = decouple(model_z)
            q1_scale = ode.Q1.num.scale()
            if q1_scale < 1e-12:
                spec = solve_linear_pencil(ode, disc)
            else:
                spec = solve_quadratic_pencil(ode, disc)
        return spec, None
    except Exception as err:  # surfaced as nulls + reason, exit code 2
        return None, f"{type(err).__name__}: {err}"


def _match_oracle(E_engine: complex, spectrum: OracleSpectrum | None):
    if spectrum is None:
        return None, None
    kept = spectrum.kept_levels()
    if not kept:
        return None, None
    best = min(kept, key=lambda lv: abs(lv.E - E_engine))
    return best.E, best.conv_estimate


def run_solve(config: dict, normalize: bool = True) -> tuple[dict, list[ClosedFormState]]:
    """The `solve` pipeline: engine + closed forms + paper-formula columns."""
    cfg = validate_config(config)
    doc = results.new_document("solve", cfg)
    states, paper_fn, engine_reason, notes = solve_states(cfg, normalize=normalize)
    doc["discrepancy_notes"].extend(notes)
    for n in range(cfg["n_max"] + 1):
        state = states[n] if n < len(states) else None
        paper_E = paper_fn(n) if paper_fn is not None else None
        if state is not None:
            rec = results.level_record(
                n,
                E_engine=state.E,
                E_paper=paper_E,
                k=state.k,
                lambda_n=state.lambda_n,
                closed_form_residual=closed_form_residual(state),
                norm_converged=state.norm_converged,
                norm_growth_exponent=state.norm_growth_exponent,
            )
            if paper_E is not None and abs(state.E - paper_E) > 1e-9 * max(1.0, abs(paper_E)):
                doc["discrepancy_notes"].append(
                    f"n={n}: engine E={state.E.real:.12g} vs published formula "
                    f"{paper_E:.12g} (difference {abs(state.E - paper_E):.3e})"
                )
        else:
            rec = results.level_record(
                n, engine_reason=engine_reason, E_paper=paper_E
            )
        doc["levels"].append(rec)
    return doc, states


def run_verify(config: dict) -> tuple[dict, int]:
    """The `verify` pipeline: solve + pencil oracle + residual, coupled,
    discrimination and normalization probes; exit code 0 iff every check
    passed, 2 otherwise."""
    cfg = validate_config(config)
    try:
        doc, states = run_solve(cfg, normalize=True)
    except ConfigError:
        raise
    doc["command"] = "verify"
    spectrum, oracle_err = oracle_spectrum(cfg)
    checks: dict[str, dict] = {}

    if spectrum is not None:
        doc["oracle"] = {
            "scheme": spectrum.disc.scheme,
            "N": spectrum.disc.N,
            "domain": list(spectrum.disc.domain),
            "levels": [
                {
                    "raw": results.complex_field(lv.raw),
                    "E": results.complex_field(lv.E),
                    "conv_estimate": lv.conv_estimate,
                    "kept": lv.kept,
                    "sign_resolved": lv.sign_resolved,
                }
                for lv in spectrum.levels
            ],
            "notes": list(spectrum.notes),
        }
    else:
        doc["oracle"] = {"scheme": cfg["oracle"]["scheme"], "N": cfg["oracle"]["N"],
                         "domain": list(cfg["oracle"]["domain"]), "levels": [],
                         "notes": [f"oracle failed: {oracle_err}"]}

    # per-level probes
    worst_resid = 0.0
    worst_c33 = worst_c34 = 0.0
    norm_ok = True
    for rec, state in zip(doc["levels"], states):
        resid = rec["closed_form_residual"]
        worst_resid = max(worst_resid, resid if resid is not None else math.inf)
        if state.n <= 2:
            model_x = rotate_space(state.model_z)
            pts = [(-1.7 + 0.34 * j) for j in range(11)]
            c33, c34 = coupled_residuals(model_x, state.E, state.psi1, state.psi2, pts)
            rec["coupled_residual_33"] = c33
            rec["coupled_residual_34"] = c34
            worst_c33 = max(worst_c33, c33)
            worst_c34 = max(worst_c34, c34)
        if state.norm_converged is None:
            norms, conv, expo = normalize_quadrature(state, (10.0, 20.0, 40.0, 80.0))
            rec["norm_converged"] = conv
            rec["norm_growth_exponent"] = expo
        if rec["norm_converged"] is False and rec["norm_growth_exponent"] is None:
            norm_ok = False
        E_orc, conv = _match_oracle(state.E, spectrum)
        rec["E_oracle"] = results.complex_field(E_orc)
        rec["oracle_conv_estimate"] = conv
        if E_orc is None:
            rec["E_oracle_reason"] = (
                "no pencil level survived filtering near this energy"
                if oracle_err is None
                else oracle_err
            )

    if states:
        checks["closed_form_residual"] = {
            "passed": worst_resid < RESIDUAL_TOL,
            "threshold": RESIDUAL_TOL,
            "observed": worst_resid,
            "detail": "max relative residual of xi1 in the decoupled equation",
        }
        checks["coupled_system_residual"] = {
            "passed": max(worst_c33, worst_c34) < COUPLED_TOL,
            "threshold": COUPLED_TOL,
            "observed": max(worst_c33, worst_c34),
            "detail": "max residual of the two first-order coupled equations (n <= 2)",
        }
        checks["normalization_probe"] = {
            "passed": norm_ok,
            "threshold": None,
            "observed": None,
            "detail": "norm either converged or divergence reported with growth exponent",
        }
        # residual discrimination: the quantization misfit vanishes at engine
        # energies and stays O(1) at displaced energies
        fam = _nu_family_for(cfg)
        if fam is not None:
            ok = True
            worst_at = 0.0
            best_off = math.inf
            for state in states:
                mis_at = quantization_misfit(fam(state.E), state.n)
                mis_off = quantization_misfit(fam(state.E + 0.25 * 1.0), state.n)
                worst_at = max(worst_at, mis_at)
                best_off = min(best_off, mis_off)
                ok = ok and mis_at < 1e-8 and mis_off > DISCRIMINATION_FLOOR
            checks["quantization_discrimination"] = {
                "passed": ok,
                "threshold": DISCRIMINATION_FLOOR,
                "observed": best_off,
                "detail": (
                    f"misfit <= {worst_at:.2e} at engine energies, "
                    f">= {best_off:.2e} at displaced energies"
                ),
            }

    # engine vs oracle agreement on the lowest levels
    if states and spectrum is not None:
        lowest = states[: min(3, len(states))]
        deltas = []
        agree = True
        for state in lowest:
            E_orc, _ = _match_oracle(state.E, spectrum)
            if E_orc is None:
                agree = False
                deltas.append(math.inf)
                continue
            diff = abs(E_orc - state.E)
            deltas.append(diff)
            if diff > max(ORACLE_ABS_TOL, ORACLE_REL_TOL * abs(state.E)):
                agree = False
        checks["engine_oracle_agreement"] = {
            "passed": agree,
            "threshold": ORACLE_ABS_TOL,
            "observed": max(deltas) if deltas and math.inf not in deltas else None,
            "detail": (
                "lowest engine levels vs filtered pencil levels within "
                "max(1e-3 abs, 5e-3 rel); the truncated-wall pencil spectrum "
                "is a different spectral problem near the coordinate "
                "singularity, see discrepancy notes"
            ),
        }
        if not agree:
            doc["discrepancy_notes"].append(
                "pencil oracle disagrees with the engine spectrum: the "
                "closed-form eigenfunctions with n >= 1 diverge at the "
                "singular endpoint, so the Dirichlet-truncated pencil "
                "converges to a different (wall-regularized) spectrum"
            )
    elif oracle_err is not None:
        checks["engine_oracle_agreement"] = {
            "passed": False,
            "threshold": ORACLE_ABS_TOL,
            "observed": None,
            "detail": f"oracle failed: {oracle_err}",
        }

    doc["checks"] = checks
    all_pass = all(c["passed"] for c in checks.values()) and checks
    doc["verdict"] = "pass" if all_pass else "fail"
    return doc, 0 if all_pass else 2


def _nu_family_for(cfg: dict):
    try:
        if cfg["model"] == "pt-linear":
            return pt_nu_family(build_params(cfg))
        if cfg["model"] == "nonpt-shifted":
            params = build_params(cfg)
            if params.on_closed_form_slice:
                return nonpt_nu_family(params)
            return None
        from .dirac import nu_family

        return nu_family(decouple(_custom_model(cfg)))
    except Exception:
        return None
