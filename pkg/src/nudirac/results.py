"""Result documents: assembly, deterministic JSON/CSV serialization, and the
shipped JSON schema.

Documents are plain dicts with a fixed schema; serialization uses sorted
keys and repr-based float formatting, so identical configurations produce
byte-identical files (no timestamps in the body).
"""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources
from typing import Any, Sequence

from . import __version__

SCHEMA_NAME = "nudirac-result-v1"


def complex_field(value) -> dict | None:
    if value is None:
        return None
    z = complex(value)
    return {"re": z.real, "im": z.imag}


def schema_path() -> str:
    return str(resources.files("nudirac").joinpath("schemas/result_document.schema.json"))


def load_schema() -> dict:
    with open(schema_path(), "r", encoding="utf-8") as fh:
        return json.load(fh)


def new_document(command: str, config: dict) -> dict:
    return {
        "schema": SCHEMA_NAME,
        "tool": {"name": "nudirac", "version": __version__},
        "command": command,
        "config": config,
        "levels": [],
        "oracle": None,
        "checks": None,
        "discrepancy_notes": [],
        "verdict": None,
    }


def level_record(
    n: int,
    E_engine=None,
    engine_reason: str | None = None,
    E_paper=None,
    E_oracle=None,
    oracle_reason: str | None = None,
    k=None,
    lambda_n=None,
    closed_form_residual: float | None = None,
    coupled_residual_33: float | None = None,
    coupled_residual_34: float | None = None,
    oracle_conv_estimate: float | None = None,
    norm_converged: bool | None = None,
    norm_growth_exponent: float | None = None,
) -> dict:
    return {
        "n": n,
        "E_engine": complex_field(E_engine),
        "E_engine_reason": engine_reason,
        "E_paper_formula": complex_field(E_paper),
        "E_oracle": complex_field(E_oracle),
        "E_oracle_reason": oracle_reason,
        "k": complex_field(k),
        "lambda_n": complex_field(lambda_n),
        "closed_form_residual": closed_form_residual,
        "coupled_residual_33": coupled_residual_33,
        "coupled_residual_34": coupled_residual_34,
        "oracle_conv_estimate": oracle_conv_estimate,
        "norm_converged": norm_converged,
        "norm_growth_exponent": norm_growth_exponent,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_document(doc: dict, path: str) -> None:
    atomic_write_text(path, dumps(doc))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def levels_csv(doc: dict) -> str:
    """Per-level records as CSV (17 significant digits, LF endings)."""
    cols = [
        "n",
        "re_E_engine",
        "im_E_engine",
        "re_E_paper_formula",
        "im_E_paper_formula",
        "re_E_oracle",
        "im_E_oracle",
        "closed_form_residual",
        "coupled_residual_33",
        "coupled_residual_34",
        "oracle_conv_estimate",
        "norm_converged",
        "norm_growth_exponent",
    ]
    lines = [",".join(cols)]
    for rec in doc["levels"]:
        row = [str(rec["n"])]
        for key in ("E_engine", "E_paper_formula", "E_oracle"):
            val = rec[key]
            if val is None:
                row += ["", ""]
            else:
                row += [_fmt(val["re"]), _fmt(val["im"])]
        for key in (
            "closed_form_residual",
            "coupled_residual_33",
            "coupled_residual_34",
            "oracle_conv_estimate",
        ):
            row.append("" if rec[key] is None else _fmt(rec[key]))
        row.append("" if rec["norm_converged"] is None else str(rec["norm_converged"]).lower())
        row.append(
            "" if rec["norm_growth_exponent"] is None else _fmt(rec["norm_growth_exponent"])
        )
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def wavefunction_csv(states, xs: Sequence[float]) -> str:
    """Sampled spinor components, one block per level.

    Columns exactly: x, re_psi1, im_psi1, re_psi2, im_psi2, n; a header row
    starts each block; 17 significant digits; LF line endings.
    """
    lines = []
    for state in states:
        lines.append("x,re_psi1,im_psi1,re_psi2,im_psi2,n")
        for x in xs:
            p1 = state.psi1(float(x))
            p2 = state.psi2(float(x))
            lines.append(
                ",".join(
                    [
                        _fmt(x),
                        _fmt(p1.real),
                        _fmt(p1.imag),
                        _fmt(p2.real),
                        _fmt(p2.imag),
                        str(state.n),
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def parse_wavefunction_csv(text: str) -> list[dict[str, Any]]:
    """Inverse of wavefunction_csv (used by round-trip tests)."""
    blocks: list[dict[str, Any]] = []
    current: dict[str, Any] | None = None
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("x,"):
            current = {"x": [], "psi1": [], "psi2": [], "n": None}
            blocks.append(current)
            continue
        parts = line.split(",")
        current["x"].append(float(parts[0]))
        current["psi1"].append(complex(float(parts[1]), float(parts[2])))
        current["psi2"].append(complex(float(parts[3]), float(parts[4])))
        current["n"] = int(parts[5])
    return blocks
