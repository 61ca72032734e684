"""Command-line front end.

Subcommands: solve, verify, sweep, export, report.  Configuration is taken
from flags or a JSON config file (flags win).  Exit codes: 0 = all checks
pass, 1 = usage/configuration error, 2 = verification failure.

`report` is the figure-rendering path: it writes the verified JSON document
and the delimited outputs together with matplotlib figures; the other
subcommands emit machine-readable data only.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import results
from .verification import ConfigError, run_solve, run_verify, validate_config


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 with JSON on stderr, not argparse's 2
        raise ConfigError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["pt-linear", "nonpt-shifted", "custom"])
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--nmax", type=int)
    p.add_argument("--grid", type=int, help="oracle interior points N")
    p.add_argument("--domain", type=str, help="oracle domain as zmin,zmax")
    p.add_argument("--scheme", choices=["fd", "cheb"])
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.add_argument("--out", type=str)
    p.add_argument("--engine-only", action="store_true")
    p.add_argument("--config", type=str, help="JSON config file; flags win")


def _build_config(args, validate: bool = True) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    if args.model:
        cfg["model"] = args.model
    if "model" not in cfg:
        raise ConfigError("a model is required (--model or config file)")
    params = dict(cfg.get("parameters", {}))
    for name in ("a", "b", "gamma", "omega", "alpha", "beta"):
        val = getattr(args, name)
        if val is not None:
            params[name] = val
    cfg["parameters"] = params
    if args.nmax is not None:
        cfg["n_max"] = args.nmax
    orc = dict(cfg.get("oracle", {}))
    if args.grid is not None:
        orc["N"] = args.grid
    if args.domain is not None:
        try:
            zmin, zmax = (float(v) for v in args.domain.split(","))
        except ValueError as err:
            raise ConfigError(f"bad --domain {args.domain!r}: {err}")
        orc["domain"] = [zmin, zmax]
    if args.scheme is not None:
        orc["scheme"] = args.scheme
    if orc:
        cfg["oracle"] = orc
    if args.engine_only:
        cfg["engine_only"] = True
    return validate_config(cfg) if validate else cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        results.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> int:
    cfg = _build_config(args)
    doc, _states = run_solve(cfg)
    text = results.dumps(doc) if args.output == "json" else results.levels_csv(doc)
    _emit(text, args.out)
    return 0


def _cmd_verify(args) -> int:
    cfg = _build_config(args)
    doc, code = run_verify(cfg)
    text = results.dumps(doc) if args.output == "json" else results.levels_csv(doc)
    _emit(text, args.out)
    return code


def _cmd_export(args) -> int:
    cfg = _build_config(args)
    doc, states = run_solve(cfg)
    if args.output == "json":
        _emit(results.dumps(doc), args.out)
        return 0
    xs = np.linspace(args.xmin, args.xmax, args.points)
    _emit(results.wavefunction_csv(states, [float(x) for x in xs]), args.out)
    return 0


def _cmd_sweep(args) -> int:
    if not args.out:
        raise ConfigError("sweep requires --out DIRECTORY")
    if not args.sweep_param or not args.sweep_values:
        raise ConfigError("sweep requires --sweep-param and --sweep-values")
    values = [float(v) for v in args.sweep_values.split(",")]
    import os

    os.makedirs(args.out, exist_ok=True)
    index = {"sweep_param": args.sweep_param, "runs": []}
    for value in values:
        cfg = _build_config(args, validate=False)
        cfg.setdefault("parameters", {})[args.sweep_param] = value
        tag = format(value, ".6g").replace("-", "m").replace(".", "p")
        fname = f"sweep_{args.sweep_param}_{tag}.json"
        try:
            cfg = validate_config(cfg)
            doc, _ = run_solve(cfg)
        except (ConfigError, ValueError) as err:
            # an individual point may leave the valid region; record it and
            # keep sweeping
            index["runs"].append({"value": value, "file": None, "error": str(err)})
            continue
        results.write_document(doc, os.path.join(args.out, fname))
        index["runs"].append({"value": value, "file": fname, "error": None})
    results.atomic_write_text(
        os.path.join(args.out, "index.json"),
        json.dumps(index, sort_keys=True, indent=2) + "\n",
    )
    return 0


def _cmd_report(args) -> int:
    import os

    from . import figures
    from .oracle import normalize_quadrature
    from .verification import _nu_family_for

    if not args.out:
        raise ConfigError("report requires --out DIRECTORY")
    cfg = _build_config(args)
    os.makedirs(args.out, exist_ok=True)
    doc, code = run_verify(cfg)
    _, states = run_solve(cfg)
    results.write_document(doc, os.path.join(args.out, "result.json"))
    results.atomic_write_text(
        os.path.join(args.out, "levels.csv"), results.levels_csv(doc)
    )
    xs = np.linspace(args.xmin, args.xmax, args.points)
    results.atomic_write_text(
        os.path.join(args.out, "wavefunctions.csv"),
        results.wavefunction_csv(states, [float(x) for x in xs]),
    )
    figures.spectrum_figure(doc, os.path.join(args.out, "fig_spectrum.png"), dpi=args.dpi)
    if states:
        figures.wavefunction_figure(
            states, os.path.join(args.out, "fig_wavefunctions.png"), dpi=args.dpi
        )
        widths = (10.0, 20.0, 40.0, 80.0)
        norms_per_state = [normalize_quadrature(s, widths)[0] for s in states]
        figures.norm_growth_figure(
            states,
            norms_per_state,
            widths,
            os.path.join(args.out, "fig_norm_growth.png"),
            dpi=args.dpi,
        )
        family = _nu_family_for(cfg)
        if family is not None:
            figures.discrimination_figure(
                family, states, os.path.join(args.out, "fig_discrimination.png"), dpi=args.dpi
            )
    return code


def make_parser() -> _Parser:
    parser = _Parser(prog="nudirac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="engine spectrum + closed forms")
    _add_common(p_solve)
    p_solve.set_defaults(fn=_cmd_solve)

    p_verify = sub.add_parser("verify", help="solve + oracle + residual checks")
    _add_common(p_verify)
    p_verify.set_defaults(fn=_cmd_verify)

    p_export = sub.add_parser("export", help="sampled wavefunctions (CSV) or document (JSON)")
    _add_common(p_export)
    p_export.add_argument("--xmin", type=float, default=-5.0)
    p_export.add_argument("--xmax", type=float, default=5.0)
    p_export.add_argument("--points", type=int, default=101)
    p_export.set_defaults(fn=_cmd_export)

    p_sweep = sub.add_parser("sweep", help="repeat solve over a parameter range")
    _add_common(p_sweep)
    p_sweep.add_argument("--sweep-param", type=str)
    p_sweep.add_argument("--sweep-values", type=str, help="comma-separated values")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_report = sub.add_parser(
        "report", help="verify + delimited outputs + rendered figures"
    )
    _add_common(p_report)
    p_report.add_argument("--xmin", type=float, default=-5.0)
    p_report.add_argument("--xmax", type=float, default=5.0)
    p_report.add_argument("--points", type=int, default=101)
    p_report.add_argument("--dpi", type=int, default=150)
    p_report.set_defaults(fn=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ConfigError as err:
        sys.stderr.write(json.dumps({"error": str(err)}) + "\n")
        return 1
    except Exception as err:  # unexpected failure: machine-readable, exit 2
        sys.stderr.write(
            json.dumps({"error": f"{type(err).__name__}: {err}"}) + "\n"
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
