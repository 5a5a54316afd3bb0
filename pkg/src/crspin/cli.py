"""Batch driver: run check suites on a configured model and emit artifacts.

Usage::

    crspin run --config cfg.json [--check NAME ...] [--strict] [--out DIR] [--format csv|json]
    crspin identities --config cfg.json [...]      # single-check shortcuts
    crspin spectrum | cohomology | vanishing | conformal ...

Config schema (JSON object; unknown keys are rejected with their path):

    {
      "model": {
        "kind": "heisenberg" | "torus_bundle" | "sphere",   required
        "m": <int >= 1>,                                    required
        "ell": <int>,                                       default 0
        "sectors": [<int>, ...],                            default [0]
            weight sectors to realize: k for the Heisenberg quotient,
            s for the torus bundle (not accepted for the sphere)
        "flux": <nonzero int>,                              torus_bundle only, default 1
        "scal_w": <positive number>,                        sphere only, default 1.0
        "truncation": {"fourier_radius": <int >= 1>,
                       "ladder_levels": <int >= 2>}         optional
      },
      "checks": ["identities", "spectrum", "cohomology",
                 "vanishing", "conformal"],                 optional; --check overrides
      "tolerances": {                                       optional, all positive
        "algebraic": 1e-12,      exact operator identities
        "dual_assembly": 1e-10,  independent assembly routes, Weitzenboeck residuals
        "spectral": 1e-8,        kernel and eigenvalue thresholds
        "shell": 1e-8,           truncation-shell certification
        "conformal": 1e-9        covariance defects
      }
    }

Every check writes ``<name>_report.json`` plus a table artifact in the
chosen format into the output directory.  Outputs are deterministic:
fixed basis ordering, seedless dense eigensolvers, sorted JSON keys, and
CSV floats in full-precision scientific notation, so reruns of the same
config are byte-identical.  Exit status: 0 when every requested check
passes, 1 when any check fails or errors, 2 on config problems.

Truncation diagnostics (uncertified or shell-pinned kernel vectors) are
reported as warnings; under ``--strict`` they fail the run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cohomology import sector_identity_residual, shift_table, harmonic_spinor_table
from .models import (
    TruncationSpec,
    cr_alpha_bundle,
    heisenberg_model,
    sphere_model,
)
from .operators import (
    assemble_dminus,
    assemble_dplus,
    assemble_kohn_dirac,
    assemble_sub_laplacian,
    cluster_eigenvalues,
    gram,
    grading_defect,
    kernel_report,
    nabla_T_defect,
)
from .sections import SectionSpace
from .vanishing import obstruction_check, qhat, vanishing_verdicts, spectral_consistency
from .weitzenboeck import ConformalScale, conformal_check, dl_residual, sl_residual

__all__ = ["main", "run", "load_config", "ConfigError", "CHECK_NAMES"]

CHECK_NAMES = ("identities", "spectrum", "cohomology", "vanishing", "conformal")

TOLERANCE_DEFAULTS = {
    "algebraic": 1e-12,
    "dual_assembly": 1e-10,
    "spectral": 1e-8,
    "shell": 1e-8,
    "conformal": 1e-9,
}

_MODEL_KEYS = {
    "heisenberg": {"kind", "m", "ell", "sectors", "truncation"},
    "torus_bundle": {"kind", "m", "ell", "sectors", "flux", "truncation"},
    "sphere": {"kind", "m", "ell", "scal_w"},
}


class ConfigError(Exception):
    """Config validation failure; the message carries the offending key path."""


def _expect_mapping(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"at {path}: expected an object, got {type(obj).__name__}")


def _expect_int(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ConfigError(f"at {path}: expected an integer, got {obj!r}")
    return obj


def _reject_unknown(obj, allowed, path):
    for key in sorted(set(obj) - set(allowed)):
        raise ConfigError(f"at {path}.{key}: unknown key")


def load_config(path: str) -> dict:
    """Parse and validate a config file into a normalized dict."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    _expect_mapping(raw, "top level")
    _reject_unknown(raw, {"model", "checks", "tolerances"}, "config")

    if "model" not in raw:
        raise ConfigError("at config.model: required key missing")
    model_raw = raw["model"]
    _expect_mapping(model_raw, "model")
    kind = model_raw.get("kind")
    if kind not in _MODEL_KEYS:
        raise ConfigError(
            f"at model.kind: expected one of {sorted(_MODEL_KEYS)}, got {kind!r}"
        )
    _reject_unknown(model_raw, _MODEL_KEYS[kind], "model")
    if "m" not in model_raw:
        raise ConfigError("at model.m: required key missing")
    m = _expect_int(model_raw["m"], "model.m")
    if m < 1:
        raise ConfigError(f"at model.m: must be >= 1, got {m}")
    ell = _expect_int(model_raw.get("ell", 0), "model.ell")

    model = {"kind": kind, "m": m, "ell": ell}
    if kind == "sphere":
        scal_w = model_raw.get("scal_w", 1.0)
        if isinstance(scal_w, bool) or not isinstance(scal_w, (int, float)) or scal_w <= 0:
            raise ConfigError(f"at model.scal_w: must be a positive number, got {scal_w!r}")
        model["scal_w"] = float(scal_w)
    else:
        sectors = model_raw.get("sectors", [0])
        if not isinstance(sectors, list) or not sectors:
            raise ConfigError(f"at model.sectors: expected a nonempty list, got {sectors!r}")
        model["sectors"] = [
            _expect_int(s, f"model.sectors[{i}]") for i, s in enumerate(sectors)
        ]
        if kind == "torus_bundle":
            flux = _expect_int(model_raw.get("flux", 1), "model.flux")
            if flux == 0:
                raise ConfigError("at model.flux: must be nonzero")
            model["flux"] = flux
        if "truncation" in model_raw:
            trunc_raw = model_raw["truncation"]
            _expect_mapping(trunc_raw, "model.truncation")
            _reject_unknown(trunc_raw, {"fourier_radius", "ladder_levels"}, "model.truncation")
            radius = _expect_int(trunc_raw.get("fourier_radius", 1), "model.truncation.fourier_radius")
            levels = _expect_int(trunc_raw.get("ladder_levels", 6), "model.truncation.ladder_levels")
            if radius < 1:
                raise ConfigError(f"at model.truncation.fourier_radius: must be >= 1, got {radius}")
            if levels < 2:
                raise ConfigError(f"at model.truncation.ladder_levels: must be >= 2, got {levels}")
            model["truncation"] = {"fourier_radius": radius, "ladder_levels": levels}

    checks = raw.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigError(f"at config.checks: expected a list, got {checks!r}")
    for name in checks:
        if name not in CHECK_NAMES:
            raise ConfigError(f"at config.checks: unknown check {name!r} (choices: {', '.join(CHECK_NAMES)})")

    tolerances = dict(TOLERANCE_DEFAULTS)
    tol_raw = raw.get("tolerances", {})
    _expect_mapping(tol_raw, "tolerances")
    _reject_unknown(tol_raw, TOLERANCE_DEFAULTS, "tolerances")
    for key, value in tol_raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            raise ConfigError(f"at tolerances.{key}: must be positive, got {value!r}")
        tolerances[key] = float(value)

    return {"model": model, "checks": list(checks), "tolerances": tolerances}


def build_model(config: dict):
    spec = config["model"]
    trunc = None
    if "truncation" in spec:
        trunc = TruncationSpec(**spec["truncation"])
    try:
        if spec["kind"] == "heisenberg":
            return heisenberg_model(spec["m"], k=spec["sectors"][0], truncation=trunc, ell=spec["ell"])
        if spec["kind"] == "torus_bundle":
            return cr_alpha_bundle(spec["m"], c=spec["flux"], s=spec["sectors"][0], truncation=trunc, ell=spec["ell"])
        return sphere_model(spec["m"], scal_w=spec["scal_w"], ell=spec["ell"])
    except ValueError as exc:
        raise ConfigError(f"at model: {exc}") from exc


@dataclass
class CheckResult:
    name: str
    passed: bool
    report: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    error: str | None = None
    detail: str = ""


def _admissible_weights(m: int):
    return range(-m, m + 1, 2)


def _space_sectors(config) -> list:
    # models without sector lists (the sphere) fall through to the
    # SectionSpace constructor, which reports the missing section space
    return config["model"].get("sectors", [None])


def _check_identities(model, config) -> CheckResult:
    tol = config["tolerances"]
    sectors = _space_sectors(config)
    rows = []
    per_sector = {}
    for sector in sectors:
        space = SectionSpace(model, sector=sector)
        dplus = assemble_dplus(space)
        dminus = assemble_dminus(space)
        residuals = {
            ("dirac_plus_squared", "algebraic"): float(np.abs(dplus.mat @ dplus.mat).max()),
            ("dirac_minus_squared", "algebraic"): float(np.abs(dminus.mat @ dminus.mat).max()),
            ("adjoint_defect", "algebraic"): float(np.abs(dminus.mat - dplus.mat.conj().T).max()),
            ("grading_defect", "algebraic"): max(grading_defect(dplus), grading_defect(dminus)),
            ("sub_laplacian_routes", "dual_assembly"): float(
                np.abs(assemble_sub_laplacian(space, route="complex").mat - assemble_sub_laplacian(space, route="real").mat).max()
            ),
            ("reeb_routes", "dual_assembly"): float(nabla_T_defect(space)),
            ("sector_identity", "dual_assembly"): max(sector_identity_residual(space).values()),
            ("lichnerowicz_residual", "dual_assembly"): sl_residual(space),
        }
        for ell in _admissible_weights(space.m):
            residuals[(f"covariant_dirac_residual_ell={ell}", "dual_assembly")] = dl_residual(space, ell)
        sector_report = {}
        for (name, tol_key), value in residuals.items():
            value = float(value)
            ok = value <= tol[tol_key]
            rows.append([sector, name, value, tol[tol_key], ok])
            sector_report[name] = value
        per_sector[str(sector)] = sector_report
    failed = [r for r in rows if not r[4]]
    detail = ""
    if failed:
        worst = max(failed, key=lambda r: r[2])
        detail = f"sector {worst[0]} {worst[1]} = {worst[2]:.3e} above {worst[3]:.1e}"
    return CheckResult(
        name="identities",
        passed=not failed,
        report={"sectors": per_sector},
        tables={"identities_residuals": {
            "header": ["sector", "residual", "value", "tolerance", "passed"],
            "rows": rows,
        }},
        detail=detail,
    )


def _check_spectrum(model, config) -> CheckResult:
    tol = config["tolerances"]
    sectors = _space_sectors(config)
    warnings = []
    per_sector = {}
    tables = {}
    min_eig = np.inf
    for sector in sectors:
        space = SectionSpace(model, sector=sector)
        dirac = assemble_kohn_dirac(space)
        square = gram(dirac)
        rows = []
        for q in range(space.m + 1):
            evals = np.linalg.eigvalsh(square.block(q, q))
            min_eig = min(min_eig, float(evals.min()) if evals.size else np.inf)
            for value, count in cluster_eigenvalues(evals, tol=tol["spectral"]):
                rows.append([q, value, count])
        tables[f"spectrum_sector{sector}"] = {
            "header": ["q", "eigenvalue", "multiplicity"],
            "rows": rows,
        }
        kernels = {}
        for q, count in kernel_report(dirac, tol=tol["spectral"], shell_tol=tol["shell"]).items():
            kernels[str(q)] = {
                "dim": count.dim,
                "certified": count.certified,
                "spurious": count.spurious,
                "max_shell_amplitude": count.max_shell_amplitude,
            }
            if 0 < q < space.m and (not count.certified or count.spurious):
                warnings.append(
                    f"sector {sector} q={q}: truncation shell activity "
                    f"(certified={count.certified}, spurious={count.spurious})"
                )
        per_sector[str(sector)] = {"kernel": kernels}
    passed = min_eig >= -tol["spectral"]
    detail = "" if passed else f"Dirac square has eigenvalue {min_eig:.3e} below -{tol['spectral']:.1e}"
    return CheckResult(
        name="spectrum",
        passed=passed,
        report={"sectors": per_sector, "min_eigenvalue": float(min_eig)},
        tables=tables,
        warnings=warnings,
        detail=detail,
    )


def _check_cohomology(model, config) -> CheckResult:
    tol = config["tolerances"]
    sectors = _space_sectors(config)
    if model.kind == "torus_bundle":
        table = shift_table(model, s_range=tuple(sectors))
    else:
        table = None
        for sector in sectors:
            part = harmonic_spinor_table(SectionSpace(model, sector=sector), tol=tol["spectral"])
            if table is None:
                table = part
            else:
                table.rows.extend(part.rows)
                for note in part.notes:
                    if note not in table.notes:
                        table.notes.append(note)
    analytic = table.dims(method="analytic")
    spectral = table.dims(method="spectral")
    mismatches = {
        key: (analytic[key], spectral[key])
        for key in sorted(set(analytic) & set(spectral))
        if analytic[key] != spectral[key]
    }
    detail = ""
    if mismatches:
        key, (a, b) = next(iter(mismatches.items()))
        detail = f"(q, s)={key}: analytic {a} != spectral {b}"
    report = {
        "dims": {f"q={q},s={s}": dim for (q, s), dim in spectral.items()},
        "notes": sorted(table.notes),
    }
    if analytic:
        report["dims_analytic"] = {f"q={q},s={s}": dim for (q, s), dim in analytic.items()}
    fmt_rows = [[r.q, r.s, r.dim, r.method, r.status] for r in table.sorted_rows()]
    return CheckResult(
        name="cohomology",
        passed=not mismatches,
        report=report,
        tables={"cohomology_table": {
            "header": ["q", "s", "dim", "method", "status"],
            "rows": fmt_rows,
        }},
        detail=detail,
    )


def _check_vanishing(model, config) -> CheckResult:
    tol = config["tolerances"]
    warnings = []
    verdicts = vanishing_verdicts(model, model.ell)
    payload = json.loads(verdicts.to_json())
    clashes = {}
    if model.has_section_space:
        for sector in _space_sectors(config):
            space = SectionSpace(model, sector=sector)
            for q, dim in spectral_consistency(verdicts, space, tol=tol["spectral"]).items():
                clashes[f"sector={sector},q={q}"] = dim
    payload["spectral_clashes"] = clashes

    degree = qhat(model.m, model.ell)
    if model.kind == "torus_bundle" and abs(model.ell) < model.m + 2 and degree.denominator == 1:
        table = shift_table(model, s_range=tuple(config["model"]["sectors"]))
        try:
            verdict = obstruction_check(model, model.ell, table)
            payload["obstruction"] = {
                "status": verdict.status,
                "message": verdict.message,
                "q_hat": verdict.q_hat,
                "entries": verdict.entries,
            }
        except RuntimeError as exc:
            warnings.append(str(exc))
            payload["obstruction"] = {"status": "undecided", "message": str(exc), "q_hat": str(degree)}
    else:
        reason = (
            "no cohomology table for this model kind"
            if model.kind != "torus_bundle"
            else "distinguished degree test does not apply"
        )
        payload["obstruction"] = {"status": "not_evaluated", "message": reason, "q_hat": str(degree)}

    rows = [
        [v.q, v.mu, v.status, v.clause or "", ";".join(v.satisfied)]
        for v in verdicts.verdicts
    ]
    detail = "" if not clashes else f"forced_zero contradicted by spectral kernel: {clashes}"
    return CheckResult(
        name="vanishing",
        passed=not clashes,
        report=payload,
        tables={"vanishing_table": {
            "header": ["q", "mu", "status", "clause", "satisfied"],
            "rows": rows,
        }},
        warnings=warnings,
        detail=detail,
    )


def _check_conformal(model, config) -> CheckResult:
    tol = config["tolerances"]
    sectors = _space_sectors(config)
    rows = []
    per_sector = {}
    for sector in sectors:
        space = SectionSpace(model, sector=sector)
        scale = ConformalScale.cosine(space.m, axis=0, amplitude=0.3)
        defect = float(conformal_check(space, model.ell, scale))
        ok = defect <= tol["conformal"]
        rows.append([sector, defect, tol["conformal"], ok])
        per_sector[str(sector)] = defect
    failed = [r for r in rows if not r[3]]
    detail = ""
    if failed:
        worst = max(failed, key=lambda r: r[1])
        detail = f"sector {worst[0]} defect {worst[1]:.3e} above {tol['conformal']:.1e}"
    return CheckResult(
        name="conformal",
        passed=not failed,
        report={"sectors": per_sector, "scale": "cosine(axis=0, amplitude=0.3)"},
        tables={"conformal_defects": {
            "header": ["sector", "defect", "tolerance", "passed"],
            "rows": rows,
        }},
        detail=detail,
    )


_CHECK_RUNNERS = {
    "identities": _check_identities,
    "spectrum": _check_spectrum,
    "cohomology": _check_cohomology,
    "vanishing": _check_vanishing,
    "conformal": _check_conformal,
}


def _run_check(name, model, config, strict) -> CheckResult:
    try:
        result = _CHECK_RUNNERS[name](model, config)
    except (ValueError, RuntimeError) as exc:
        return CheckResult(name=name, passed=False, error=str(exc))
    if strict and result.warnings and result.passed:
        result.passed = False
        result.detail = f"strict: {result.warnings[0]}"
    return result


def _native(value):
    # numpy scalars (np.bool_ in particular) are not JSON serializable
    if isinstance(value, np.generic):
        return value.item()
    return value


def _format_cell(value) -> str:
    value = _native(value)
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17e}"
    return str(value)


def _table_csv(table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table["header"])
    for row in table["rows"]:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def _table_json(table) -> str:
    records = [
        dict(zip(table["header"], [_native(v) for v in row])) for row in table["rows"]
    ]
    return json.dumps(records, sort_keys=True, indent=2) + "\n"


def _write_artifacts(results, model, out_dir, fmt) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for result in results:
        payload = {
            "check": result.name,
            "model": model.describe(),
            "passed": result.passed,
            "warnings": sorted(result.warnings),
            "error": result.error,
            "results": result.report,
        }
        path = out / f"{result.name}_report.json"
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        written.append(path)
        for name in sorted(result.tables):
            table = result.tables[name]
            if fmt == "csv":
                path = out / f"{name}.csv"
                path.write_text(_table_csv(table))
            else:
                path = out / f"{name}.json"
                path.write_text(_table_json(table))
            written.append(path)
    return written


def run(config: dict, checks=None, strict=False, out_dir="crspin-artifacts", fmt="csv") -> int:
    """Execute the requested checks and write artifacts; 0 iff all pass."""
    names = list(checks) if checks else list(config["checks"])
    if not names:
        raise ConfigError('at config.checks: no checks requested (add a "checks" list or pass --check)')
    seen = []
    for name in names:
        if name not in CHECK_NAMES:
            raise ConfigError(f"unknown check {name!r} (choices: {', '.join(CHECK_NAMES)})")
        if name not in seen:
            seen.append(name)
    model = build_model(config)
    results = [_run_check(name, model, config, strict) for name in seen]
    written = _write_artifacts(results, model, out_dir, fmt)
    for result in results:
        if result.error is not None:
            print(f"check {result.name}: ERROR ({result.error})")
        elif result.passed:
            print(f"check {result.name}: PASS")
        else:
            print(f"check {result.name}: FAIL ({result.detail})")
        for warning in result.warnings:
            print(f"  warning: {warning}")
    print(f"wrote {len(written)} artifact files to {out_dir}")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crspin",
        description="Verify spinor-calculus identities, spectra, cohomology tables, "
        "and vanishing verdicts on CR model geometries.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to a JSON config file")
    common.add_argument("--strict", action="store_true",
                        help="promote truncation warnings to failures")
    common.add_argument("--out", default="crspin-artifacts", help="artifact output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="table artifact format (reports are always JSON)")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", parents=[common], help="run the checks listed in the config")
    runp.add_argument("--check", action="append", choices=CHECK_NAMES, default=None,
                      help="run this check instead of the config list (repeatable)")
    for name in CHECK_NAMES:
        sub.add_parser(name, parents=[common], help=f"run only the {name} check")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    checks = getattr(args, "check", None)
    if args.command != "run":
        checks = [args.command]
    try:
        config = load_config(args.config)
        return run(config, checks=checks, strict=args.strict, out_dir=args.out, fmt=args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
