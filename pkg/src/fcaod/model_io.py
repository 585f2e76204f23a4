"""Model files: a numpy ``.npz`` archive holding a JSON header and packed arrays.

The header carries ``format`` and ``version``; arrays hold scaler bounds, the
packed training intents, the population mask and, for supervised models, the
learned weights and loss trace. No pickling is involved.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .agendas import Agenda, AgendaSpace, FuzzyAgenda
from .context import context_from_incidence, unpack_bits
from .errors import ModelFormatError
from .scaling import Scaler
from .sup import SupModel, TrainConfig
from .unsup import UnsupModel

FORMAT = "fcaod-model"
VERSION = 1


def _header(base: UnsupModel, kind: str) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "column_names": list(base.scaler.column_names),
        "bins": base.scaler.bins,
        "gamma": base.gamma,
        "num_objects": base.context.num_objects,
        "object_ids": list(base.context.object_ids),
        "agendas": [
            {"attributes": list(a.attributes), "kind": a.kind, "name": a.name} for a in base.space
        ],
        "meta": base.meta,
    }


def save_model(model, path) -> None:
    """Write ``model`` to a path or a binary file object."""
    base = getattr(model, "unsup", model)
    kind = "sup" if isinstance(model, SupModel) else "unsup"
    header = _header(base, kind)
    arrays = {
        "alpha": base.scaler.alpha,
        "beta": base.scaler.beta,
        "intents": base.context.object_intents,
        "population": base.population,
    }
    if base.labels is not None:
        arrays["labels"] = base.labels
    if kind == "sup":
        header["config"] = asdict(model.config)
        arrays["weights"] = model.weights.weights
        arrays["loss_trace"] = model.loss_trace
    blob = np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8)
    if hasattr(path, "write"):
        np.savez_compressed(path, header=blob, **arrays)
        return
    with Path(path).open("wb") as fh:
        np.savez_compressed(fh, header=blob, **arrays)


def load_model(path):
    try:
        archive = np.load(Path(path), allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ModelFormatError(f"{path}: not a model file ({exc})") from None
    with archive:
        if "header" not in archive.files:
            raise ModelFormatError(f"{path}: missing header")
        header = json.loads(archive["header"].tobytes().decode("utf-8"))
        if header.get("format") != FORMAT:
            raise ModelFormatError(f"{path}: unknown format {header.get('format')!r}")
        if header.get("version") != VERSION:
            raise ModelFormatError(f"{path}: unsupported version {header.get('version')!r}")
        arrays = {k: archive[k] for k in archive.files if k != "header"}

    scaler = Scaler(tuple(header["column_names"]), arrays["alpha"], arrays["beta"], int(header["bins"]))
    inc = unpack_bits(arrays["intents"], scaler.num_features)[: header["num_objects"]]
    ctx = context_from_incidence(inc, header["object_ids"], scaler.feature_names(), scaler.blocks())
    space = AgendaSpace(
        tuple(Agenda(tuple(a["attributes"]), a["kind"], a["name"]) for a in header["agendas"]),
        scaler.num_attributes,
    )
    base = UnsupModel(
        ctx, scaler, space, float(header["gamma"]), arrays["population"],
        arrays.get("labels"), header.get("meta", {}),
    )
    if header["kind"] == "unsup":
        return base
    return SupModel(
        base, FuzzyAgenda(arrays["weights"]), TrainConfig(**header["config"]), arrays["loss_trace"]
    )
