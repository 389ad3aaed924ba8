"""Batch front-end: run a configured check suite and emit reports.

Exit codes: 0 all requested checks pass, 1 some FAIL/VIOLATION verdict,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import RunConfig, load_config, sample_points
from .connection import classify
from .curvature import (
    antisymmetry_residual,
    constant_flag_fit,
    flag_curvature,
    reconstruction_residuals,
)
from .errors import (
    ConfigError,
    DegenerateFlagError,
    FinslerError,
    StructureInvalidError,
)
from .frame import Frame
from .metrics import validate_structure
from .report import CheckReport, CheckRow
from .symmetry import certify_symmetric, theorem_audit

N_COHERENCE_FLAGS = 100


def _build_frames(config: RunConfig, samples):
    def make(p):
        return Frame(config.structure, p, config.x_order, config.y_order)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(make, samples))
    return [make(p) for p in samples]


def _skip_rows(names, reason):
    return [CheckRow(name=name, residual=float("nan"), tol=float("nan"),
                     verdict="SKIPPED", note=reason) for name in names]


def _curvature_rows(config, samples, frames, classifications):
    tols = config.tolerances
    worst_anti, at_anti = 0.0, None
    worst_rec, at_rec = 0.0, None
    worst_hv, at_hv = 0.0, None
    for idx, fr in enumerate(frames):
        val = antisymmetry_residual(fr)
        if val > worst_anti:
            worst_anti, at_anti = val, idx
        rec, _ = reconstruction_residuals(fr)
        if rec > worst_rec:
            worst_rec, at_rec = rec, idx
        hv = float(np.abs(fr.hv_values).max())
        if hv > worst_hv:
            worst_hv, at_hv = hv, idx
    hv_vanishes = worst_hv < tols.classification
    consistent = hv_vanishes == classifications["berwald"]
    return [
        CheckRow(name="curvature.antisymmetry", residual=worst_anti,
                 tol=tols.antisymmetry,
                 verdict="PASS" if worst_anti < tols.antisymmetry else "FAIL",
                 worst_sample=at_anti),
        CheckRow(name="curvature.reconstruction", residual=worst_rec,
                 tol=tols.reconstruction,
                 verdict="PASS" if worst_rec < tols.reconstruction else "FAIL",
                 worst_sample=at_rec),
        CheckRow(name="curvature.hv_berwald_consistency", residual=worst_hv,
                 tol=tols.classification,
                 verdict="PASS" if consistent else "FAIL", worst_sample=at_hv,
                 note="hv-curvature vanishes exactly for Berwald structures"),
    ]


def _constant_flag_rows(config, samples, frames, report: CheckReport):
    tols = config.tolerances
    lam, misfit = constant_flag_fit(config.structure, samples, frames=frames)
    report.provenance["constant_flag"] = {"lambda": lam, "residual": misfit}
    if misfit >= tols.flag_fit:
        return [CheckRow(
            name="constant_flag.coherence", residual=misfit, tol=tols.flag_fit,
            verdict="VACUOUS",
            note=f"not constant-flag at the samples (fitted lambda {lam:.6g})")]
    rng = np.random.default_rng(config.seed + 1)
    worst, at = 0.0, None
    produced = 0
    guard = 0
    while produced < N_COHERENCE_FLAGS and guard < 50 * N_COHERENCE_FLAGS:
        guard += 1
        idx = produced % len(frames)
        u = rng.normal(size=config.dimension)
        try:
            K = flag_curvature(config.structure, samples[idx], u, frame=frames[idx])
        except DegenerateFlagError:
            continue
        produced += 1
        val = abs(K - lam)
        if val > worst:
            worst, at = val, idx
    return [CheckRow(
        name="constant_flag.coherence", residual=worst, tol=tols.flag_coherence,
        verdict="PASS" if worst < tols.flag_coherence else "FAIL",
        worst_sample=at,
        note=f"lambda={lam:.9g} over {produced} random flags")]


def _symmetry_rows(config, sym):
    tols = config.tolerances
    rows = []
    for key in ("defn1", "eq1", "eq2", "eq3", "eq4"):
        residual = getattr(sym, f"residual_{key}")
        rows.append(CheckRow(
            name=f"symmetry.{key}", residual=residual,
            tol=sym.tolerances[key],
            verdict="PASS" if sym.verdicts[key] else "FAIL",
            worst_sample=sym.worst_samples[key],
            mode=sym.modes.get(key, "ad"),
            note="symmetric at sampled points" if key == "defn1" and
                 sym.verdicts[key] else ""))
    return rows


def run(config: RunConfig) -> CheckReport:
    """Execute the configured checks in dependency order and assemble the report."""
    report = CheckReport(title="finslerlab run", version=__version__,
                         config=config.echo())
    samples = sample_points(config.structure, config.count, config.seed,
                            config.box)
    report.provenance.update({
        "family": config.structure.family_tag,
        "label": config.structure.label,
        "sample_count": len(samples),
        "seed": config.seed,
        "threads": config.threads,
    })

    checks = list(config.checks)
    order = [c for c in ("validate", "classify", "curvature", "constant_flag",
                         "symmetry", "theorem_audit") if c in checks]

    structure_ok = True
    if "validate" in order:
        vrep = validate_structure(config.structure, samples, config.tolerances)
        report.extend(vrep)
        structure_ok = vrep.passed

    rest = [c for c in order if c != "validate"]
    if not structure_ok:
        for c in rest:
            report.rows.extend(_skip_rows([c], "structure failed validation"))
        return report

    frames = None
    classifications = None
    sym = None
    for checkname in rest:
        if frames is None:
            try:
                frames = _build_frames(config, samples)
            except (StructureInvalidError, FinslerError) as exc:
                report.rows.append(CheckRow(
                    name="frames", residual=float("nan"), tol=float("nan"),
                    verdict="FAIL", note=f"cannot evaluate structure: {exc}"))
                for c in rest:
                    report.rows.extend(_skip_rows([c], "frame construction failed"))
                return report

        if checkname == "classify":
            crep = classify(config.structure, samples,
                            tolerances=config.tolerances, frames=frames)
            classifications = crep.provenance["classifications"]
            report.provenance["classifications"] = classifications
            report.extend(crep)
        elif checkname == "curvature":
            if classifications is None:
                crep = classify(config.structure, samples,
                                tolerances=config.tolerances, frames=frames,
                                check_identities=False)
                classifications = crep.provenance["classifications"]
                report.provenance["classifications"] = classifications
            report.rows.extend(
                _curvature_rows(config, samples, frames, classifications))
        elif checkname == "constant_flag":
            report.rows.extend(
                _constant_flag_rows(config, samples, frames, report))
        elif checkname == "symmetry":
            sym = certify_symmetric(config.structure, samples,
                                    config.tolerances, frames)
            report.provenance["symmetry"] = sym.as_dict()
            report.rows.extend(_symmetry_rows(config, sym))
        elif checkname == "theorem_audit":
            audit = theorem_audit(config.structure, samples, config.tolerances,
                                  frames, report=sym)
            if sym is None:
                sym_dict = None  # certify ran inside theorem_audit
            report.theorems.extend(audit.theorems)
    return report


def _write_atomic(path: str, data: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".finslerlab-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _parse_tolerance_flags(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--tolerance expects name=value, got {item!r}")
        name, _, value = item.partition("=")
        try:
            out[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--tolerance {item!r}: {exc}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finslerlab",
        description="Numerical laboratory for Finsler structures")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run the checks described by a config file")
    runp.add_argument("config", help="path to a YAML run configuration")
    runp.add_argument("--seed", type=int, help="override samples.seed")
    runp.add_argument("--samples", type=int, help="override samples.count")
    runp.add_argument("--tolerance", action="append", metavar="NAME=VALUE",
                      help="override a named tolerance (repeatable)")
    runp.add_argument("--format", choices=("json", "text", "both"),
                      help="override output.format")
    runp.add_argument("--out", help="override output.path for the JSON report")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {
            "seed": args.seed, "samples": args.samples,
            "tolerances": _parse_tolerance_flags(args.tolerance),
            "format": args.format, "out": args.out,
        }
        overrides = {k: v for k, v in overrides.items() if v not in (None, {})}
        config = load_config(args.config, overrides)
        report = run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FinslerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report.stamp()
    fmt = config.out_format
    if fmt in ("text", "both"):
        sys.stdout.write(report.to_text())
    if fmt in ("json", "both"):
        payload = report.to_json()
        if config.out_path:
            _write_atomic(config.out_path, payload)
        elif fmt == "json":
            sys.stdout.write(payload)
    return report.exit_status()


if __name__ == "__main__":
    raise SystemExit(main())
