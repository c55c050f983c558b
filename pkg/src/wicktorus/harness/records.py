"""Record persistence: JSON-lines records, CSV summaries, checksummed manifests.

A run directory holds exactly records.jsonl + summary.csv + manifest.json.
Record lines are canonical JSON (sorted keys, no whitespace) so identical
payloads are identical bytes; the manifest stores a sha256 per line. Timing
lives in fields named in TIMING_FIELDS and in the manifest timestamps only,
and every comparison helper here skips it.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, config_hash, config_to_dict

__all__ = [
    "ARTIFACT_VERSION",
    "TIMING_FIELDS",
    "GoldenResult",
    "RunWriter",
    "compare_payloads",
    "compare_or_freeze",
    "pyify",
    "record_line",
    "read_records",
    "strip_timing",
    "verify_manifest",
]

ARTIFACT_VERSION = "wicktorus-run-v1"

# Field names whose values are wall-clock measurements. They are real record
# fields (provenance), but no determinism or golden comparison looks at them.
TIMING_FIELDS = frozenset({"elapsed"})


def pyify(obj):
    """Recursively convert records to plain JSON-serializable python."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [pyify(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: pyify(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [pyify(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__} into a record")


def record_line(record) -> str:
    return json.dumps(pyify(record), sort_keys=True, separators=(",", ":"))


def strip_timing(payload):
    """Copy of a parsed record with timing fields removed, recursively."""
    if isinstance(payload, dict):
        return {
            k: strip_timing(v) for k, v in payload.items() if k not in TIMING_FIELDS
        }
    if isinstance(payload, list):
        return [strip_timing(v) for v in payload]
    return payload


def compare_payloads(got, want, rtol: float = 0.0, path: str = "$") -> list[str]:
    """Structural diff of two parsed records, timing excluded.

    Floats compare within relative tolerance rtol (exact when rtol == 0);
    everything else compares exactly. Returns human-readable mismatch paths.
    """
    got = strip_timing(got)
    want = strip_timing(want)
    problems: list[str] = []
    _compare(got, want, rtol, path, problems)
    return problems


def _compare(got, want, rtol, path, problems):
    if isinstance(want, dict) or isinstance(got, dict):
        if not (isinstance(got, dict) and isinstance(want, dict)):
            problems.append(f"{path}: type {type(got).__name__} vs dict")
            return
        for key in sorted(set(got) | set(want)):
            if key not in got:
                problems.append(f"{path}.{key}: missing")
            elif key not in want:
                problems.append(f"{path}.{key}: unexpected")
            else:
                _compare(got[key], want[key], rtol, f"{path}.{key}", problems)
        return
    if isinstance(want, list) or isinstance(got, list):
        if not (isinstance(got, list) and isinstance(want, list)):
            problems.append(f"{path}: type {type(got).__name__} vs list")
            return
        if len(got) != len(want):
            problems.append(f"{path}: length {len(got)} vs {len(want)}")
            return
        for i, (a, b) in enumerate(zip(got, want)):
            _compare(a, b, rtol, f"{path}[{i}]", problems)
        return
    if isinstance(want, bool) or isinstance(got, bool):
        if got is not want:
            problems.append(f"{path}: {got!r} vs {want!r}")
        return
    if isinstance(want, (int, float)) and isinstance(got, (int, float)):
        if isinstance(want, int) and isinstance(got, int):
            if got != want:
                problems.append(f"{path}: {got} vs {want}")
            return
        a, b = float(got), float(want)
        if math.isnan(a) and math.isnan(b):
            return
        if rtol == 0.0:
            ok = a == b
        else:
            ok = math.isclose(a, b, rel_tol=rtol, abs_tol=0.0) or (a == b)
        if not ok:
            problems.append(f"{path}: {a!r} vs {b!r}")
        return
    if got != want:
        problems.append(f"{path}: {got!r} vs {want!r}")


class RunWriter:
    """Single writer for one run directory. Not thread-safe by design:
    suites compute in parallel and emit through one writer."""

    def __init__(self, out_dir: str | Path, cfg: ExperimentConfig, prng_id: str, gamma_str: str):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.prng_id = prng_id
        self.gamma_str = gamma_str
        self.started_at = _utcnow()
        self._checksums: list[str] = []
        self._n_records = 0
        self._records_path = self.out_dir / "records.jsonl"
        self._summary_path = self.out_dir / "summary.csv"
        self._records_path.write_text("")

    def write_records(self, records) -> None:
        with self._records_path.open("a") as fh:
            for rec in records:
                line = record_line(rec)
                self._checksums.append(hashlib.sha256(line.encode()).hexdigest())
                fh.write(line + "\n")
                self._n_records += 1

    def write_summary(self, rows: list[dict]) -> None:
        rows = [pyify(r) for r in rows]
        keys: list[str] = []
        for row in rows:
            for k in row:
                if k not in keys:
                    keys.append(k)
        with self._summary_path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys, restval="")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_cell(v) for k, v in row.items()})

    def finalize(self, verdicts: list[dict]) -> Path:
        if not self._summary_path.exists():
            self.write_summary([])
        manifest = {
            "artifact_version": ARTIFACT_VERSION,
            "experiment": self.cfg.experiment,
            "config": config_to_dict(self.cfg),
            "config_hash": config_hash(self.cfg),
            "prng_id": self.prng_id,
            "gamma": self.gamma_str,
            "started_at": self.started_at,
            "finished_at": _utcnow(),
            "n_records": self._n_records,
            "record_sha256": self._checksums,
            "files": {"records": "records.jsonl", "summary": "summary.csv"},
            "verdicts": pyify(verdicts),
        }
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
        return path


def _csv_cell(value):
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return value


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def read_records(run_dir: str | Path) -> list[dict]:
    path = Path(run_dir) / "records.jsonl"
    return [json.loads(line) for line in path.read_text().splitlines() if line]


def verify_manifest(run_dir: str | Path) -> list[str]:
    """Re-hash records.jsonl against the manifest. Empty list = verified."""
    run_dir = Path(run_dir)
    problems: list[str] = []
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        return [f"{run_dir}: no manifest.json"]
    manifest = json.loads(manifest_path.read_text())
    lines = (run_dir / manifest["files"]["records"]).read_text().splitlines()
    want = manifest["record_sha256"]
    if len(lines) != len(want) or len(lines) != manifest["n_records"]:
        problems.append(
            f"record count mismatch: file has {len(lines)}, manifest lists {len(want)}"
        )
    for i, (line, digest) in enumerate(zip(lines, want)):
        got = hashlib.sha256(line.encode()).hexdigest()
        if got != digest:
            problems.append(f"record {i}: checksum mismatch")
    return problems


@dataclasses.dataclass
class GoldenResult:
    name: str
    created: bool
    mismatches: list[str]

    @property
    def ok(self) -> bool:
        return self.created or not self.mismatches


def compare_or_freeze(
    golden_dir: str | Path, name: str, records, rtol: float
) -> GoldenResult:
    """Compare records against a committed baseline, creating it on first run.

    Comparison is structural with relative tolerance rtol on floats and with
    timing fields ignored, so a frozen file stays valid across machines.
    """
    golden_dir = Path(golden_dir)
    golden_dir.mkdir(parents=True, exist_ok=True)
    path = golden_dir / f"{name}.jsonl"
    payloads = [json.loads(record_line(r)) for r in records]
    if not path.exists():
        with path.open("w") as fh:
            for p in payloads:
                fh.write(json.dumps(p, sort_keys=True, separators=(",", ":")) + "\n")
        return GoldenResult(name=name, created=True, mismatches=[])
    want = [json.loads(line) for line in path.read_text().splitlines() if line]
    mismatches: list[str] = []
    if len(payloads) != len(want):
        mismatches.append(f"record count {len(payloads)} vs golden {len(want)}")
    else:
        for i, (a, b) in enumerate(zip(payloads, want)):
            mismatches.extend(compare_payloads(a, b, rtol=rtol, path=f"[{i}]"))
    return GoldenResult(name=name, created=False, mismatches=mismatches[:20])
