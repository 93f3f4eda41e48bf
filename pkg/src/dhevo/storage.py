"""Versioned JSON persistence: instances, archives, portfolios, manifests.

Every file carries schema_version and a kind tag; loads are validated and
non-finite numbers are rejected (infinite bounds travel as the strings
"inf"/"-inf"). Writes are atomic (temp file + rename) and canonical
(sorted keys), so identical content means identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from typing import Optional

import numpy as np

from .errors import IoError, SchemaMismatch
from .model import INF, Instance, make_instance, validate_instance

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise IoError(f"cannot write {path}: {exc}")


def write_json(path: str, payload) -> None:
    atomic_write_text(path, canonical_json(payload))


def _reject_nonfinite(token: str):
    raise IoError(f"non-finite number {token!r} in JSON input")


def read_json(path: str, expected_kind: Optional[str] = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle, parse_constant=_reject_nonfinite)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise IoError(f"invalid JSON in {path}: {exc}")
    if not isinstance(payload, dict):
        raise IoError(f"{path}: expected a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(SCHEMA_VERSION, version)
    if expected_kind is not None and payload.get("kind") != expected_kind:
        raise IoError(f"{path}: expected kind {expected_kind!r}, "
                      f"found {payload.get('kind')!r}")
    return payload


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- instances ---

def _bound_out(value: float) -> object:
    if value == INF:
        return "inf"
    if value == -INF:
        return "-inf"
    return value


def _bound_in(value) -> float:
    if value == "inf":
        return INF
    if value == "-inf":
        return -INF
    if isinstance(value, (int, float)) and math.isfinite(value):
        return float(value)
    raise IoError(f"invalid bound value {value!r}")


def instance_to_dict(inst: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "instance",
        "name": inst.name,
        "obj": [float(v) for v in inst.obj],
        "cons": [[r, c, v] for r, c, v in inst.cons],
        "rhs": [float(v) for v in inst.rhs],
        "sense": list(inst.sense),
        "lb": [_bound_out(float(v)) for v in inst.lb],
        "ub": [_bound_out(float(v)) for v in inst.ub],
        "is_int": [bool(v) for v in inst.is_int],
    }


def instance_from_dict(payload: dict) -> Instance:
    try:
        inst = make_instance(
            name=payload["name"],
            obj=payload["obj"],
            cons=[(r, c, v) for r, c, v in payload["cons"]],
            rhs=payload["rhs"],
            sense=payload["sense"],
            lb=[_bound_in(v) for v in payload["lb"]],
            ub=[_bound_in(v) for v in payload["ub"]],
            is_int=payload["is_int"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IoError(f"malformed instance payload: {exc}")
    for arr in (inst.obj, inst.rhs):
        if not np.all(np.isfinite(arr)):
            raise IoError("non-finite coefficient in instance")
    validate_instance(inst)
    return inst


def save_instance(path: str, inst: Instance) -> str:
    text = canonical_json(instance_to_dict(inst))
    atomic_write_text(path, text)
    return content_hash(text)


def load_instance(path: str) -> Instance:
    return instance_from_dict(read_json(path, expected_kind="instance"))


def instance_content_hash(inst: Instance) -> str:
    return content_hash(canonical_json(instance_to_dict(inst)))


# --- programs (.dh text) ---

def save_program_text(path: str, text: str) -> None:
    atomic_write_text(path, text if text.endswith("\n") else text + "\n")


def load_program_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read().strip()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}")


# --- archives / portfolios / manifests ---

def save_archive(path: str, archive_dict: dict) -> None:
    write_json(path, archive_dict)


def load_archive(path: str) -> dict:
    return read_json(path, expected_kind="archive")


def save_portfolio(path: str, heuristics: list[dict]) -> None:
    write_json(path, {
        "schema_version": SCHEMA_VERSION,
        "kind": "portfolio",
        "heuristics": heuristics,
    })


def load_portfolio(path: str) -> list[dict]:
    return read_json(path, expected_kind="portfolio")["heuristics"]


def write_manifest(path: str, command: str, config: dict, seeds: dict,
                   instance_hashes: dict, outputs: list[str],
                   started_at: str, finished_at: str) -> None:
    write_json(path, {
        "schema_version": SCHEMA_VERSION,
        "kind": "manifest",
        "command": command,
        "config": config,
        "seeds": seeds,
        "tool_version": TOOL_VERSION,
        "instance_hashes": instance_hashes,
        "outputs": outputs,
        "started_at": started_at,
        "finished_at": finished_at,
    })


def write_jsonl(path: str, rows: list[dict]) -> None:
    text = "".join(json.dumps(row, sort_keys=True) + "\n" for row in rows)
    atomic_write_text(path, text)
