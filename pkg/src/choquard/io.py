"""Config ingestion, field persistence, and machine-readable reports.

Field files are raw little-endian binary64, interleaved (real, imaginary) per
sample in row-major grid order, with a JSON sidecar `<name>.meta.json` holding
the grid geometry, problem scalars, phase gauge, and a payload sha256.
All writes are atomic (write to a temp file, then rename).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import ConfigError, ProblemConfig, PotentialSpec
from .grids import Field, GridSpec
from .potentials import (BallRegion, BoxRegion, clipped_quadratic_V, constant_A,
                         constant_V, sine_A)
from .solver import SolverOptions

TOOL_VERSION = "0.1.0"


# ---------------------------------------------------------------- atomic io

def _atomic_write_bytes(path: Path, payload: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_json(path: Path, doc):
    _atomic_write_bytes(Path(path), json.dumps(doc, indent=2).encode())


# ------------------------------------------------------------ field storage

def save_field(path, u: Field, *, s: float, mu: float, eps: float,
               phase_gauge: str = "argmax-real-positive") -> dict:
    """Write the field payload and its sidecar; returns the sidecar document."""
    path = Path(path)
    vals = np.ascontiguousarray(u.values, dtype=complex)
    inter = np.empty(vals.size * 2, dtype="<f8")
    inter[0::2] = np.real(vals).reshape(-1)
    inter[1::2] = np.imag(vals).reshape(-1)
    payload = inter.tobytes()
    meta = {
        "dims": list(u.grid.shape),
        "L": u.grid.L,
        "s": s,
        "mu": mu,
        "eps": eps,
        "phase_gauge": phase_gauge,
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    _atomic_write_bytes(path, payload)
    _atomic_write_json(path.with_name(path.name + ".meta.json"), meta)
    return meta


def load_field(path) -> tuple[Field, dict]:
    """Round-trip loader; verifies payload length and checksum."""
    path = Path(path)
    meta_path = path.with_name(path.name + ".meta.json")
    if not meta_path.exists():
        raise ConfigError(f"missing field sidecar {meta_path.name}")
    meta = json.loads(meta_path.read_text())
    dims = meta["dims"]
    if len(set(dims)) != 1:
        raise ConfigError("field sidecar dims must be equal per axis")
    payload = path.read_bytes()
    expected = 16 * int(np.prod(dims))
    if len(payload) < expected:
        raise ConfigError("unexpected end of field data")
    if len(payload) > expected:
        raise ConfigError("field payload longer than sidecar dims imply")
    if hashlib.sha256(payload).hexdigest() != meta["sha256"]:
        raise ConfigError("checksum mismatch in field payload")
    inter = np.frombuffer(payload, dtype="<f8")
    vals = (inter[0::2] + 1j * inter[1::2]).reshape(tuple(dims))
    grid = GridSpec(L=float(meta["L"]), M=int(dims[0]), dim=len(dims))
    return Field(vals, grid), meta


# ------------------------------------------------------------- config parse

def _take(doc: dict, where: str, required: dict, optional: dict | None = None):
    optional = optional or {}
    unknown = set(doc) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown key '{sorted(unknown)[0]}' in {where}")
    missing = set(required) - set(doc)
    if missing:
        raise ConfigError(f"missing key '{sorted(missing)[0]}' in {where}")
    out = {}
    for key, cast in {**required, **optional}.items():
        if key in doc:
            try:
                out[key] = cast(doc[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for '{key}' in {where}: {exc}") from exc
    return out


def _parse_V(doc: dict, V0: float):
    kind = doc.get("kind")
    if kind == "constant":
        _take(doc, "potential.V", {"kind": str})
        return constant_V(V0)
    if kind == "clipped_quadratic":
        vals = _take(doc, "potential.V", {"kind": str},
                     {"coeff": float, "cap": float})
        return clipped_quadratic_V(V0, vals.get("coeff", 1.0), vals.get("cap", 4.0))
    raise ConfigError(f"unknown potential.V kind '{kind}'")


def _parse_A(doc: dict, dim: int):
    kind = doc.get("kind")
    if kind == "zero":
        _take(doc, "potential.A", {"kind": str})
        return None
    if kind == "constant":
        vals = _take(doc, "potential.A", {"kind": str, "value": list})
        vec = [float(x) for x in vals["value"]]
        if len(vec) != dim:
            raise ConfigError("potential.A constant value length must match N")
        return constant_A(vec)
    if kind == "sine":
        vals = _take(doc, "potential.A", {"kind": str, "amplitude": float,
                                          "wavelength": float})
        return sine_A(vals["amplitude"], vals["wavelength"], dim)
    raise ConfigError(f"unknown potential.A kind '{kind}'")


def _parse_region(doc: dict, dim: int):
    kind = doc.get("kind")
    if kind == "ball":
        vals = _take(doc, "potential.Lambda", {"kind": str, "radius": float},
                     {"center": list})
        center = tuple(float(x) for x in vals.get("center", [0.0] * dim))
        if len(center) != dim:
            raise ConfigError("potential.Lambda center length must match N")
        return BallRegion(center, vals["radius"])
    if kind == "box":
        vals = _take(doc, "potential.Lambda", {"kind": str, "lo": list, "hi": list})
        lo = tuple(float(x) for x in vals["lo"])
        hi = tuple(float(x) for x in vals["hi"])
        if len(lo) != dim or len(hi) != dim:
            raise ConfigError("potential.Lambda lo/hi length must match N")
        return BoxRegion(lo, hi)
    raise ConfigError(f"unknown potential.Lambda kind '{kind}'")


@dataclass(frozen=True)
class ParsedConfig:
    cfg: ProblemConfig
    pot: PotentialSpec
    grid: GridSpec
    opts: SolverOptions
    eps_list: tuple[float, ...]
    raw: bytes


def parse_config(source) -> ParsedConfig:
    """Parse the single JSON config document; unknown keys are errors."""
    if isinstance(source, (str, Path)):
        raw = Path(source).read_bytes()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = json.dumps(source).encode()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    top = _take(doc, "config", {"problem": dict, "grid": dict, "potential": dict},
                {"solver": dict, "sweep": dict})

    prob = _take(top["problem"], "problem",
                 {"N": int, "s": float, "mu": float, "q": float, "eps": float,
                  "V0": float})
    cfg = ProblemConfig(dim=prob["N"], s=prob["s"], mu=prob["mu"], q=prob["q"],
                        eps=prob["eps"], V0=prob["V0"])

    gdoc = _take(top["grid"], "grid", {"L": float, "M": int})
    grid = GridSpec(L=gdoc["L"], M=gdoc["M"], dim=cfg.dim)

    pdoc = _take(top["potential"], "potential", {"V": dict, "Lambda": dict},
                 {"A": dict})
    V = _parse_V(pdoc["V"], cfg.V0)
    A = _parse_A(pdoc["A"], cfg.dim) if "A" in pdoc else None
    region = _parse_region(pdoc["Lambda"], cfg.dim)
    pot = PotentialSpec(V=V, A=A, region=region, V0=cfg.V0)

    odoc = _take(top.get("solver", {}), "solver", {},
                 {"max_iters": int, "grad_tol": float, "seed": int})
    opts = SolverOptions(max_iters=odoc.get("max_iters", 2000),
                         grad_tol=odoc.get("grad_tol", 1e-6),
                         seed=odoc.get("seed", 0))

    sdoc = _take(top.get("sweep", {}), "sweep", {}, {"eps_list": list})
    eps_list = tuple(float(x) for x in sdoc.get("eps_list", ()))
    return ParsedConfig(cfg, pot, grid, opts, eps_list, raw)


# ----------------------------------------------------------------- reports

def sanitize_json(obj):
    """Make a report JSON-safe: every numeric is finite or the string
    'nan'/'inf'/'-inf'."""
    if isinstance(obj, dict):
        return {str(k): sanitize_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize_json(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, np.ndarray):
        return sanitize_json(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def report_to_dict(report) -> dict:
    return sanitize_json(dataclasses.asdict(report))


def write_report(path, report):
    _atomic_write_json(Path(path), report_to_dict(report))


# ----------------------------------------------------------------- manifest

@dataclass(frozen=True)
class RunManifest:
    config_hash: str
    seed: int
    created_utc: str
    finished_utc: str
    artifacts: tuple[str, ...]
    tool_version: str = TOOL_VERSION


def config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def write_run(out_dir, parsed: ParsedConfig, artifacts: dict[str, bytes | None],
              started: datetime | None = None) -> RunManifest:
    """Store the resolved config plus artifacts and the manifest listing them.

    `artifacts` maps relative names already written under out_dir to None (the
    writer records names only; files must exist)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_path = out / "config.json"
    _atomic_write_bytes(cfg_path, parsed.raw)
    names = ["config.json"] + sorted(artifacts)
    now = datetime.now(timezone.utc).isoformat()
    manifest = RunManifest(
        config_hash=config_hash(parsed.raw),
        seed=parsed.opts.seed,
        created_utc=(started or datetime.now(timezone.utc)).isoformat(),
        finished_utc=now,
        artifacts=tuple(names),
    )
    _atomic_write_json(out / "manifest.json", dataclasses.asdict(manifest))
    return manifest
