"""Canonical byte encodings for keys, tokens, signatures and checks.

Everything that gets chain-signed, digested or written to disk goes through
the canonical JSON form produced here: sorted keys, no whitespace, ASCII
only.  Bit vectors serialize as '0'/'1' strings (leftmost coordinate first)
up to 64 coordinates and as hex with an explicit bit length beyond that.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

from .f2lin import F2Vector, Subspace, canonicalize
from .primitives import DataError
from .qsim import CosetState, basis_state, phase_state, subspace_state, unsupported_state

__all__ = [
    "canonical_json",
    "encode_vector",
    "decode_vector",
    "encode_space",
    "decode_space",
    "encode_state",
    "decode_state",
    "digest",
]


def canonical_json(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode()


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def encode_vector(v: F2Vector) -> str:
    if v.n <= 64:
        return str(v)
    width = (v.n + 3) // 4
    return f"hex:{v.n}:{v.value:0{width}x}"


def decode_vector(text: Any) -> F2Vector:
    if not isinstance(text, str):
        raise DataError(f"vector field must be a string, got {type(text).__name__}")
    if text.startswith("hex:"):
        try:
            _, n_str, hex_str = text.split(":", 2)
            n = int(n_str)
            value = int(hex_str, 16) if hex_str else 0
            return F2Vector(n, value)
        except (ValueError, DataError) as exc:
            raise DataError(f"bad hex vector {text!r}") from exc
    if not text or any(c not in "01" for c in text):
        raise DataError(f"bad bit string {text!r}")
    return F2Vector(len(text), int(text, 2))


def encode_space(space: Subspace) -> dict:
    return {"n": space.ambient_n, "rows": [encode_vector(b) for b in space.basis]}


def decode_space(obj: Any) -> Subspace:
    if not isinstance(obj, dict) or "n" not in obj or "rows" not in obj:
        raise DataError("subspace field must be {n, rows}")
    n = obj["n"]
    if not isinstance(n, int) or n <= 0:
        raise DataError(f"bad ambient {n!r}")
    rows = obj["rows"]
    if not isinstance(rows, list):
        raise DataError("rows must be a list")
    vecs = [decode_vector(r) for r in rows]
    if any(v.n != n for v in vecs):
        raise DataError("row length disagrees with ambient")
    space = canonicalize(vecs, ambient_n=n)
    if space.dim != len(vecs):
        raise DataError("basis rows are linearly dependent")
    if [str(b) for b in space.basis] != [str(v) for v in vecs]:
        raise DataError("basis rows are not in canonical order")
    return space


def encode_state(state: CosetState) -> dict:
    out: dict[str, Any] = {"kind": state.kind, "n": state.ambient_n}
    if state.kind == "subspace":
        out["space"] = encode_space(state.space)
    elif state.kind in ("basis", "phase"):
        out["vector"] = encode_vector(state.vector)
    return out


def decode_state(obj: Any) -> CosetState:
    if not isinstance(obj, dict) or "kind" not in obj or "n" not in obj:
        raise DataError("state field must be {kind, n, ...}")
    kind = obj["kind"]
    n = obj["n"]
    if not isinstance(n, int) or n <= 0:
        raise DataError(f"bad ambient {n!r}")
    if kind == "subspace":
        space = decode_space(obj.get("space"))
        if space.ambient_n != n:
            raise DataError("state ambient mismatch")
        return subspace_state(space)
    if kind in ("basis", "phase"):
        v = decode_vector(obj.get("vector"))
        if v.n != n:
            raise DataError("state ambient mismatch")
        return basis_state(v) if kind == "basis" else phase_state(v)
    if kind == "unsupported":
        return unsupported_state(n)
    raise DataError(f"unknown state kind {kind!r}")
