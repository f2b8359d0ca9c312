"""Command-line runner: JSON experiment configs in, reports and artifacts out.

Exit status is 0 on PASS or success, 1 on FAIL or a failed certificate,
2 when the configuration is invalid.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, is_dataclass
from enum import Enum
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema
import numpy as np

from .errors import (CertificateFailed, ConfigInvalid, FracsumError, NotContracting,
                     ThresholdNotMet, WitnessFailed)
from .geom import convex_hull
from .grid import Raster, n_fold_sum, rasterize_inner, slices, to_pbm
from .ifs import IFS, AffineMap, expand_cover, fixed_points, root_ball
from .lemmas import TRIALS, run_trials
from .sums import certify_nonmembership_ex73, theorem12_smallcase, verify_invariant_region, verify_theorem71
from .thickness import certified_self_similar_bound, estimate_thickness

TASKS = ("attractor", "sumset", "thickness", "verify-thm71", "verify-ex73", "lemma-check", "thm12-probe")

_NUMBER = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1, "maxItems": 3}

SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dimension", "maps", "task"],
    "properties": {
        "name": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1, "maximum": 3},
        "task": {"enum": list(TASKS)},
        "output": {"type": "string"},
        "maps": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["type", "ratio"],
                        "properties": {
                            "type": {"const": "similitude"},
                            "ratio": _NUMBER,
                            "rotation": {"oneOf": [_NUMBER, _VECTOR]},
                            "translation": _VECTOR,
                            "fixed_point": _VECTOR,
                        },
                        "oneOf": [{"required": ["translation"]}, {"required": ["fixed_point"]}],
                    },
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["type", "matrix", "translation"],
                        "properties": {
                            "type": {"const": "affine"},
                            "matrix": {"type": "array", "items": _VECTOR, "minItems": 1, "maxItems": 3},
                            "translation": _VECTOR,
                        },
                    },
                ]
            },
        },
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "depth": {"type": "integer", "minimum": 0},
                "delta": _NUMBER,
                "seed": {"type": "integer", "minimum": 0},
                "budget": {"type": "integer", "minimum": 1},
                "c": _NUMBER,
                "radii_per_decade": {"type": "integer", "minimum": 1},
                "centers": {"type": "integer", "minimum": 1},
                "trials": {"type": "integer", "minimum": 1},
                "samples": {"type": "integer", "minimum": 1},
                "dims": {"type": "array", "items": {"enum": [1, 2, 3]}, "minItems": 1},
                "lemmas": {"type": "array", "items": {"enum": sorted(TRIALS)}, "minItems": 1},
                "depth_budget": {"type": "integer", "minimum": 1},
                "emit_raster": {"type": "boolean"},
            },
        },
    },
    "allOf": [
        {"if": {"properties": {"task": {"const": t}}},
         "then": {"required": ["params"], "properties": {"params": {"required": req}}}}
        for t, req in [
            ("attractor", ["depth"]),
            ("sumset", ["n", "depth", "delta"]),
            ("thickness", ["depth"]),
            ("verify-thm71", ["n", "depth", "delta"]),
            ("verify-ex73", ["n", "depth"]),
            ("thm12-probe", ["n", "depth", "c"]),
        ]
    ],
}


# -- config ---------------------------------------------------------------------

def _num(v):
    """JSON number or "p/q" string; strings become exact Fractions."""
    return Fraction(v.replace(" ", "")) if isinstance(v, str) else v


def _vec(v):
    return [float(_num(x)) for x in v]


def _where(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def load_config(path) -> dict:
    """Parse and schema-check a config file; ConfigInvalid on any problem."""
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{_where(e)}: {e.message}" for e in errors]
        raise ConfigInvalid(f"{path}: " + "; ".join(lines))
    return cfg


def build_ifs(cfg: dict) -> IFS:
    d = cfg["dimension"]
    maps = []
    for i, entry in enumerate(cfg["maps"]):
        where = f"maps[{i}]"
        try:
            if entry["type"] == "similitude":
                ratio = _num(entry["ratio"])
                if not 0 < ratio < 1:
                    raise ConfigInvalid(f"{where}: ratio {entry['ratio']!r} must lie in (0, 1)")
                rot = entry.get("rotation")
                if rot is not None:
                    rot = [_num(a) for a in rot] if isinstance(rot, list) else _num(rot)
                m = AffineMap.similitude(
                    ratio,
                    translation=_vec(entry["translation"]) if "translation" in entry else None,
                    rotation=rot,
                    fixed_point=_vec(entry["fixed_point"]) if "fixed_point" in entry else None,
                )
            else:
                m = AffineMap.affine([_vec(row) for row in entry["matrix"]], _vec(entry["translation"]))
        except ConfigInvalid:
            raise
        except (ValueError, TypeError) as e:
            raise ConfigInvalid(f"{where}: {e}") from None
        if m.dim != d:
            raise ConfigInvalid(f"{where}: dimension {m.dim} differs from declared dimension {d}")
        if m.contraction_ub >= 1:
            raise ConfigInvalid(f"{where}: not a contraction (norm bound {m.contraction_ub!r})")
        maps.append(m)
    try:
        return IFS(tuple(maps), cfg.get("name", ""))
    except NotContracting as e:
        raise ConfigInvalid(f"maps[{e.index - 1}]: {e}") from None


# -- artifacts --------------------------------------------------------------------

def _plain(obj):
    """Recursively convert results to JSON-ready values."""
    if is_dataclass(obj):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def render_report(record: dict) -> str:
    """One ``key.path: value`` line per leaf; floats print with repr so
    every number matches the structured record exactly."""
    lines = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in v:
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif isinstance(v, list) and v and any(isinstance(x, (dict, list)) for x in v):
            for i, x in enumerate(v):
                walk(f"{prefix}[{i}]", x)
        else:
            lines.append(f"{prefix}: {json.dumps(v)}")

    walk("", record)
    return "\n".join(lines) + "\n"


def write_points_csv(points: np.ndarray, path) -> None:
    """One point per line, coordinates with 17 significant digits."""
    with open(path, "w", newline="\n") as fh:
        for p in np.atleast_2d(points):
            fh.write(",".join(f"{float(v):.17g}" for v in p) + "\n")


def _sidecar(r: Raster, path: Path) -> None:
    origin = ",".join(repr(float(v)) for v in r.origin)
    text = (f"origin: {origin}\ndelta: {r.cell!r}\ndims: {','.join(map(str, r.dims))}\n"
            f"mode: {r.mode.value}\nslack: {r.slack!r}\n")
    Path(str(path) + ".txt").write_text(text)


def emit_raster_image(r: Raster, path) -> List[Path]:
    """Write a PBM (P4) plus a text sidecar; 3-D rasters go out one file per z slice."""
    path = Path(path)
    if r.dim <= 2:
        path.write_bytes(to_pbm(r))
        _sidecar(r, path)
        return [path]
    out = []
    for k, sl in slices(r):
        p = path.with_name(f"{path.stem}_z{k:04d}{path.suffix}")
        p.write_bytes(to_pbm(sl))
        _sidecar(sl, p)
        out.append(p)
    return out


# -- tasks --------------------------------------------------------------------------

def _task_attractor(ifs, params, out: Path, workers, seed, force):
    cover = expand_cover(ifs, params["depth"], budget=params.get("budget", 10 ** 7), workers=workers)
    write_points_csv(cover.inner_points, out / "points.csv")
    ball = root_ball(ifs)
    record = {"points": len(cover), "eps": cover.eps, "root_center": ball.center, "root_radius": ball.radius,
              "fixed_points": fixed_points(ifs).points}
    if "delta" in params:
        pts = cover.inner_points
        r = rasterize_inner(pts, float(_num(params["delta"])), (pts.min(axis=0), pts.max(axis=0)))
        emit_raster_image(r, out / "attractor.pbm")
        record["raster_cells"] = r.count()
    return record, True


def _task_sumset(ifs, params, out, workers, seed, force):
    cover = expand_cover(ifs, params["depth"], budget=params.get("budget", 10 ** 7), workers=workers)
    pts = cover.inner_points
    delta = float(_num(params["delta"]))
    base = rasterize_inner(pts, delta, (pts.min(axis=0), pts.max(axis=0)))
    total = n_fold_sum(base, params["n"], workers=workers)
    emit_raster_image(total, out / "sum.pbm")
    return {"n": params["n"], "eps": cover.eps, "base_cells": base.count(), "sum_cells": total.count(),
            "sum_origin": total.origin, "sum_dims": list(total.dims), "slack": total.slack}, True


def _task_thickness(ifs, params, out, workers, seed, force):
    cover = expand_cover(ifs, params["depth"], budget=params.get("budget", 10 ** 7), workers=workers)
    est = estimate_thickness(cover, params.get("radii_per_decade", 8), seed, params.get("centers", 64))
    record = {"estimate": est}
    if ifs.is_similitude:
        record["certified"] = certified_self_similar_bound(ifs, cover)
    return record, True


def _task_verify_thm71(ifs, params, out, workers, seed, force):
    try:
        rep = verify_theorem71(ifs, params["n"], params["depth"], float(_num(params["delta"])),
                               force=force, workers=workers, budget=params.get("budget", 10 ** 7))
    except ThresholdNotMet as e:
        return {"verdict": "FAIL", "threshold": e.threshold, "n": e.n, "reason": str(e)}, False
    record = _plain(rep)
    record["label"] = rep.label
    return record, rep.passed and rep.contained


def _task_verify_ex73(ifs, params, out, workers, seed, force):
    tri = convex_hull([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    region = verify_invariant_region(ifs, tri)
    try:
        cert = certify_nonmembership_ex73(params["n"], params["depth"], ifs=ifs,
                                          budget=params.get("budget", 10 ** 7), workers=workers)
    except CertificateFailed as e:
        record = {"valid": False, "invariant_region": region, "failed_step": e.step, "margin": e.margin,
                  "steps": _plain(list(e.steps))}
        (out / "certificate.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
        return record, False
    record = _plain(cert)
    record["valid"] = cert.valid
    record["invariant_region"] = region
    (out / "certificate.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return record, cert.valid and region


def _task_lemma_check(ifs, params, out, workers, seed, force):
    trials = params.get("trials", 100)
    samples = params.get("samples", 64)
    rows = []
    for lemma in params.get("lemmas", sorted(TRIALS)):
        for d in params.get("dims", [1, 2, 3]):
            rows.append(run_trials(lemma, d, trials, seed, samples))
    return {"runs": rows, "failures": sum(r.failures for r in rows)}, all(r.failures == 0 for r in rows)


def _task_thm12(ifs, params, out, workers, seed, force):
    cover = expand_cover(ifs, params["depth"], budget=params.get("budget", 10 ** 7), workers=workers)
    delta = params.get("delta")
    try:
        rep = theorem12_smallcase([cover], float(_num(params["c"])), params["n"],
                                  depth_budget=params.get("depth_budget", 100_000),
                                  delta=None if delta is None else float(_num(delta)), workers=workers)
    except WitnessFailed as e:
        return {"verdict": "FAIL", "reason": str(e)}, False
    return _plain(rep), rep.passed


_RUNNERS = {
    "attractor": _task_attractor,
    "sumset": _task_sumset,
    "thickness": _task_thickness,
    "verify-thm71": _task_verify_thm71,
    "verify-ex73": _task_verify_ex73,
    "lemma-check": _task_lemma_check,
    "thm12-probe": _task_thm12,
}


def resolve_config(name: str) -> Path:
    """A path on disk, or the name of a bundled config (with or without .json)."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("fracsum") / "configs" / (name if name.endswith(".json") else name + ".json")
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigInvalid(f"no config file or bundled config named {name!r}")


def run(config_path, out_dir=None, workers: int = 1, seed: Optional[int] = None, force: bool = False) -> int:
    """Execute one config; returns the exit status."""
    try:
        path = resolve_config(str(config_path))
        cfg = load_config(path)
        ifs = build_ifs(cfg)
    except ConfigInvalid as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    params = dict(cfg.get("params", {}))
    if seed is None:
        seed = params.get("seed", 0)
    out = Path(out_dir or cfg.get("output") or "out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        result, ok = _RUNNERS[cfg["task"]](ifs, params, out, workers, seed, force)
    except FracsumError as e:
        result, ok = {"error": type(e).__name__, "message": str(e)}, False
    record = {"config": cfg.get("name", path.stem), "task": cfg["task"], "seed": seed,
              "status": "PASS" if ok else "FAIL", "result": _plain(result)}
    (out / "results.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    (out / "report.txt").write_text(render_report(record))
    print(f"{record['config']} {cfg['task']}: {record['status']} ({out})")
    return 0 if ok else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(prog="fracsum", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="config path or bundled config name")
    ap.add_argument("--out", help="output directory (default: config 'output' or ./out)")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int, help="overrides params.seed")
    ap.add_argument("--force", action="store_true", help="run below-threshold n as INFORMATIONAL")
    args = ap.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        ap.error("--seed must be an unsigned 64-bit integer")
    return run(args.config, args.out, max(1, args.workers), args.seed, args.force)


if __name__ == "__main__":
    sys.exit(main())
