"""Serialization of batches, reports and rate curves, plus run manifests."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any

from . import __version__
from .clt_theory import CltReport
from .ldp_rate import GOLDEN_TOL, QUAD_TOL, UNBOUNDED_THRESHOLD, RateCurve
from .stats import SampleBatch

__all__ = [
    "RunConfig",
    "Manifest",
    "fmt_float",
    "jsonable",
    "batch_csv",
    "curve_csv",
    "tail_csv",
    "write_text_atomic",
    "write_outputs",
    "manifest_path_for",
    "TOLERANCES",
]

TOLERANCES = {
    "log_mgf_quadrature_abs": QUAD_TOL,
    "golden_section_arg": GOLDEN_TOL,
    "conjugate_unbounded_threshold": UNBOUNDED_THRESHOLD,
    "sphere_cdf_abs": 1e-10,
    "cube_log_mgf_rel": 1e-11,
}


@dataclass
class RunConfig:
    command: str
    p: str | None = None
    n: int | None = None
    domain: str | None = None
    trials: int | None = None
    seed: int | None = None
    workers: int = 1
    t: float | None = None
    z: list[float] | None = None
    z_min: float | None = None
    z_max: float | None = None
    steps: int | None = None
    csv: str | None = None
    json: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Manifest:
    config: dict
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    wall_clock_seconds: float = 0.0
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    outputs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return jsonable(asdict(self))


def fmt_float(v: float) -> str:
    """17 significant digits, ``inf``/``-inf``/``nan`` spelled out."""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def jsonable(obj: Any) -> Any:
    """Replace infinities by the string ``"inf"`` (JSON has no literal) and NaN by null."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return None
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return jsonable(obj.item())
    return obj


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(
            [fmt_float(c) if isinstance(c, float) else ("true" if c is True else "false" if c is False else c) for c in row]
        )
    return buf.getvalue()


def batch_csv(batch: SampleBatch) -> str:
    return _csv_text(["trial", "value"], ((i, float(v)) for i, v in enumerate(batch.values)))


def curve_csv(curve: RateCurve) -> str:
    return _csv_text(
        ["z", "rate", "inner_argmin", "converged"],
        ((float(z), float(r), float(a), bool(c)) for z, r, a, c in curve.rows()),
    )


def tail_csv(rows) -> str:
    return _csv_text(["z", "rate", "hits", "trials"], rows)


def curve_dict(curve: RateCurve) -> dict:
    return {
        "p": str(curve.p),
        "domain": curve.domain.value,
        "z": list(curve.z_grid),
        "rate": list(curve.rates),
        "inner_argmin": list(curve.inner_argmin),
        "converged": list(curve.converged),
        "minimizers": list(curve.minimizers),
    }


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, so readers never see half a file."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".lpdist-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest_path_for(path: str) -> str:
    return path + ".manifest.json"


def dump_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_outputs(result, manifest: Manifest, csv_path: str | None = None, json_path: str | None = None) -> None:
    """Emit CSV and/or JSON for a batch, CLT report, rate curve or tail table.

    A JSON report carries its manifest under the ``manifest`` key; a CSV file
    gets a sidecar ``<path>.manifest.json``.
    """
    if csv_path:
        if isinstance(result, SampleBatch):
            text = batch_csv(result)
        elif isinstance(result, RateCurve):
            text = curve_csv(result)
        elif isinstance(result, list):
            text = tail_csv(result)
        else:
            raise TypeError(f"no CSV layout for {type(result).__name__}")
        manifest.outputs = [csv_path]
        write_text_atomic(csv_path, text)
        write_text_atomic(manifest_path_for(csv_path), dump_json(manifest.to_dict()))
    if json_path:
        if isinstance(result, CltReport):
            body = result.to_dict()
        elif isinstance(result, RateCurve):
            body = curve_dict(result)
        elif isinstance(result, SampleBatch):
            from .stats import empirical_moments

            mom = empirical_moments(result)
            body = {
                "p": str(result.p),
                "n": result.n,
                "domain": result.domain.value,
                "trials": result.trials,
                "seed": result.seed,
                "mean": mom.mean,
                "variance": mom.variance,
                "std_error_mean": mom.std_error_mean,
            }
        elif isinstance(result, list):
            body = {"tail": [dict(zip(["z", "rate", "hits", "trials"], r)) for r in result]}
        else:
            body = dict(result)
        manifest.outputs = [json_path]
        body["manifest"] = manifest.to_dict()
        write_text_atomic(json_path, dump_json(body))
