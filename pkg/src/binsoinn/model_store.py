"""JSON persistence for trained networks.

Files are canonical: sorted keys, nodes ordered by id, floats written with
Python's shortest round-trip repr. Saving the same network twice gives the
same bytes, and loading restores every weight bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .binviz import palette_hash
from .features import DEFAULT_VARIANT
from .soinn import ModelIntegrityError, Soinn, TrainParams

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """File is not parseable as a model."""


class ModelVersionError(ValueError):
    pass


class ProvenanceError(ValueError):
    """Model was trained on features with different semantics."""


@dataclass(frozen=True)
class Provenance:
    variant: str = DEFAULT_VARIANT
    palette: str = ""

    @classmethod
    def current(cls, variant: str = DEFAULT_VARIANT) -> Provenance:
        return cls(variant, palette_hash())


def _float_out(x: float | None):
    if x is None or math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"


def _float_in(x):
    if isinstance(x, str):
        if x not in ("inf", "-inf"):
            raise ModelFormatError(f"bad float literal {x!r}")
        return float(x)
    return x


def to_dict(net: Soinn, meta: Provenance) -> dict:
    p = asdict(net.params)
    p["layer2_threshold"] = _float_out(p["layer2_threshold"])
    return {
        "format_version": FORMAT_VERSION,
        "dimension": net.dim,
        "params": p,
        "fixed_threshold": _float_out(net.fixed_threshold),
        "steps_seen": net.steps_seen,
        "next_id": net.next_id,
        "provenance": asdict(meta),
        "nodes": [
            {
                "id": i,
                "weight": [float(v) for v in net.weight(i)],
                "win_count": net.win_count(i),
                "label_votes": net.votes(i),
            }
            for i in net.node_ids
        ],
        "edges": [[i, j, age] for (i, j), age in sorted(net.edges.items())],
    }


def from_dict(doc: dict) -> tuple[Soinn, Provenance]:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format_version {version!r} (expected {FORMAT_VERSION})")
    try:
        raw = dict(doc["params"])
        raw["layer2_threshold"] = _float_in(raw.get("layer2_threshold"))
        params = TrainParams(**raw)
        dim = int(doc["dimension"])
        net = Soinn(dim, params, _float_in(doc.get("fixed_threshold")))
        for node in doc["nodes"]:
            w = np.array(node["weight"], dtype=np.float64)
            if w.shape != (dim,):
                raise ModelIntegrityError(f"node {node['id']} weight has length {w.size}, expected {dim}")
            votes = {str(k): int(v) for k, v in node["label_votes"].items()}
            net.add_node(w, win_count=int(node["win_count"]), votes=votes, node_id=int(node["id"]))
        for i, j, age in doc["edges"]:
            try:
                net.add_edge(int(i), int(j), int(age))
            except KeyError as exc:
                raise ModelIntegrityError(str(exc.args[0])) from None
        net.steps_seen = int(doc["steps_seen"])
        next_id = int(doc["next_id"])
        if next_id < net.next_id:
            raise ModelIntegrityError("next_id collides with an existing node id")
        net._next_id = next_id
        meta = Provenance(**doc["provenance"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc!r}") from exc
    except ValueError as exc:
        if isinstance(exc, (ModelIntegrityError, ModelFormatError)):
            raise
        raise ModelIntegrityError(str(exc)) from exc
    if len(net.edges) != len(doc["edges"]):
        raise ModelIntegrityError("duplicate edges in model file")
    net.check_invariants()
    return net, meta


def dumps(net: Soinn, meta: Provenance) -> str:
    return json.dumps(to_dict(net, meta), sort_keys=True, allow_nan=False, separators=(",", ":")) + "\n"


def save(net: Soinn, meta: Provenance, path: str | Path) -> None:
    path = Path(path)
    text = dumps(net, meta)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write model to {path}: {exc.strerror or exc}") from exc


def load(path: str | Path, expected_variant: str | None = None) -> tuple[Soinn, Provenance]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"{path}: not UTF-8 text") from exc
    net, meta = from_dict(doc)
    if expected_variant is not None and meta.variant != expected_variant:
        raise ProvenanceError(
            f"{path}: model uses extractor {meta.variant!r}, session is configured for {expected_variant!r}"
        )
    if meta.palette and meta.palette != palette_hash():
        raise ProvenanceError(f"{path}: model was trained with a different colour palette")
    return net, meta
