"""Frame and SSM bundles: a directory holding manifest.json plus CSV payloads."""
import logging
import os

import numpy as np

from wavessm.checksum import fnv1a64
from wavessm.errors import ChecksumMismatch, SchemaError
from wavessm.models import FrameMatrix, FrameSpec, Grid, Measure, SsmPair
from wavessm.writers import ensure_dir, read_json, read_matrix, write_json, write_matrix

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
FRAME_KEYS = {"kind", "spec", "flags", "seed", "checksum"}
SSM_KEYS = {"kind", "measure", "source_frame_id", "seed", "checksum"}
FLAG_KEYS = {"unit_norm", "tightened"}
MEASURE_KEYS = {"kind", "theta"}


def _checksum(path):
    with open(path, "rb") as fh:
        return fnv1a64(fh.read())


def _frame_payload(frame):
    payload = {
        "F.csv": frame.F,
        "meta.csv": np.column_stack([frame.scales, frame.centers, frame.omegas, frame.row_norms]),
    }
    if frame.derivative is not None:
        payload["Fdot.csv"] = frame.derivative
    return payload


def save_bundle(obj, path, seed=None):
    """Write a FrameMatrix or SsmPair bundle into directory `path`."""
    ensure_dir(path)
    if isinstance(obj, FrameMatrix):
        payload = _frame_payload(obj)
        manifest = {
            "kind": "frame",
            "spec": obj.spec.to_dict(),
            "flags": {"unit_norm": obj.unit_norm, "tightened": obj.tightened},
            "seed": obj.spec.rng_seed if seed is None else seed,
        }
    elif isinstance(obj, SsmPair):
        payload = {"A.csv": obj.A, "B.csv": obj.B.reshape(-1, 1)}
        manifest = {
            "kind": "ssm",
            "measure": {"kind": obj.measure.kind, "theta": obj.measure.theta},
            "source_frame_id": obj.source_frame_id,
            "seed": 0 if seed is None else seed,
        }
    else:
        raise TypeError(f"cannot bundle {type(obj).__name__}")
    checksums = {}
    for name, matrix in sorted(payload.items()):
        target = os.path.join(path, name)
        write_matrix(target, matrix)
        checksums[name] = _checksum(target)
    manifest["checksum"] = checksums
    write_json(os.path.join(path, MANIFEST), manifest)
    log.debug("saved %s bundle to %s", manifest["kind"], path)
    return path


def _check_keys(doc, allowed, what):
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(unknown, what=what)


def load_bundle(path):
    manifest = read_json(os.path.join(path, MANIFEST))
    kind = manifest.get("kind")
    if kind not in ("frame", "ssm"):
        raise SchemaError({f"kind={kind}"}, what="bundle kind")
    _check_keys(manifest, FRAME_KEYS if kind == "frame" else SSM_KEYS, "manifest")

    payload = {}
    for name, expected in sorted(manifest.get("checksum", {}).items()):
        target = os.path.join(path, name)
        actual = _checksum(target)
        if actual != expected:
            raise ChecksumMismatch(name, expected, actual)
        payload[name] = read_matrix(target)

    if kind == "ssm":
        _check_keys(manifest["measure"], MEASURE_KEYS, "measure")
        measure = Measure(manifest["measure"]["kind"], manifest["measure"]["theta"])
        return SsmPair(
            A=payload["A.csv"],
            B=payload["B.csv"].reshape(-1),
            measure=measure,
            source_frame_id=manifest["source_frame_id"],
        )

    _check_keys(manifest["spec"], set(FrameSpec.__dataclass_fields__), "spec")
    _check_keys(manifest["flags"], FLAG_KEYS, "flags")
    spec = FrameSpec(**manifest["spec"])
    meta = payload["meta.csv"]
    return FrameMatrix(
        F=payload["F.csv"],
        grid=Grid(spec.L),
        spec=spec,
        scales=meta[:, 0],
        centers=meta[:, 1],
        omegas=meta[:, 2],
        row_norms=meta[:, 3],
        unit_norm=manifest["flags"]["unit_norm"],
        tightened=manifest["flags"]["tightened"],
        derivative=payload.get("Fdot.csv"),
    )
