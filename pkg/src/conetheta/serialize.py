"""Canonical JSON helpers shared by the verifier and the CLI.

All emitted JSON is produced with sorted keys and compact separators so that
identical runs are byte-identical.  Rationals appear as "p/q" strings and
complex numbers as [re, im] pairs.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

import numpy as np

from . import ratlin as rl


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return rl.rational_str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def canonical_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":")) + "\n"


def inputs_hash(obj) -> str:
    digest = hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
    return digest[:16]
