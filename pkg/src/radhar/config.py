"""Run-configuration schemas and builders.

Configs are JSON objects validated with :mod:`jsonschema` before any work
starts; unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from . import synth
from .errors import InvalidArgumentError

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_posint = {"type": "integer", "minimum": 1}
_pair = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


STFT_SCHEMA = _obj({
    "window_kind": {"enum": ["hamming", "gaussian"]},
    "window_duration_s": _pos,
    "overlap_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    "fft_size": {"anyOf": [_posint, {"type": "null"}]},
    "gaussian_sigma_fraction": _pos,
})

SCATTERER_SCHEMA = _obj({
    "amplitude": _pos,
    "base_range_m": _nonneg,
    "base_velocity_mps": _num,
    "micromotion": _obj({"amplitude_mps": _nonneg, "frequency_hz": _nonneg, "phase_rad": _num}),
}, ["amplitude"])

DYNAMIC_SCENE_SCHEMA = _obj({
    "preset": {"enum": ["walking-like"]},
    "scatterers": {"type": "array", "items": SCATTERER_SCHEMA, "minItems": 1},
    "chirps": _posint,
    "samples_per_chirp": _posint,
    "chirp_rate_hz": _pos,
    "range_scale_hz_per_m": _pos,
    "doppler_scale_hz_per_mps": _pos,
    "fast_time_rate_hz": _pos,
    "rng_seed": {"type": "integer"},
})

STATIC_TARGET_SCHEMA = _obj({
    "amplitude": _pos,
    "range_m": _nonneg,
    "azimuth_deg": {"type": "number", "minimum": -90, "maximum": 90},
}, ["amplitude", "range_m", "azimuth_deg"])

STATIC_SCENE_SCHEMA = _obj({
    "preset": {"enum": ["static-sit"]},
    "targets": {"type": "array", "items": STATIC_TARGET_SCHEMA, "minItems": 1},
    "rx_channels": {"type": "integer", "minimum": 2},
    "element_spacing_wavelengths": _pos,
    "chirps": _posint,
    "samples_per_chirp": _posint,
    "noise_power": _nonneg,
    "rng_seed": {"type": "integer"},
    "range_scale_hz_per_m": _pos,
    "fast_time_rate_hz": _pos,
    "random_phase": {"type": "boolean"},
})

BLOB_SCHEMA = _obj({"centroid": _pair, "sigma_px": _pos, "amplitude": _pos}, ["centroid", "sigma_px", "amplitude"])

BLOB_SOURCE_SCHEMA = _obj({
    "kind": {"const": "blobs"},
    "frame_shape": {"type": "array", "items": _posint, "minItems": 2, "maxItems": 2},
    "blobs": {"type": "array", "items": BLOB_SCHEMA, "minItems": 1},
    "clutter_lumps": {"type": "array", "items": BLOB_SCHEMA},
    "noise_sigma": _nonneg,
    "frames": _posint,
    "velocity_px": _pair,
    "trajectory": {"type": "array", "items": _pair},
    "dropout_frames": {"type": "array", "items": {"type": "integer", "minimum": 0}},
}, ["kind", "frame_shape", "blobs"])

RADAR_SOURCE_SCHEMA = _obj({
    "kind": {"const": "radar"},
    "scene": STATIC_SCENE_SCHEMA,
    "scene_path": {"type": "string"},
    "frames": _posint,
    "angle_grid": _obj({"start": _num, "stop": _num, "step": _pos}),
    "loading_factor": _nonneg,
    "mti": {"type": "boolean"},
}, ["kind"])

SCORE_SCHEMA = _obj({
    "pct": {"type": "number", "minimum": 0, "maximum": 100},
    "gamma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "d_min": _posint,
    "alpha_single": _nonneg,
    "alpha_multi": _nonneg,
    "phi": _pos,
    "w1": _nonneg,
    "w2": _nonneg,
    "fusion_mode": {"enum": ["geometric_product", "literal_sum"]},
    "valid_lump_fraction": _nonneg,
    "std_eps": _nonneg,
})

TRACKER_SCHEMA = _obj({
    "tau": {"type": "number", "minimum": 0, "maximum": 1},
    "gate_distance_px": _pos,
    "window_frames": _posint,
    "distance": {"enum": ["euclidean", "chebyshev"]},
})

MASK_SCHEMA = _obj({"decay_radius_px": _pos, "margin_px": {"type": "integer", "minimum": 0}})

_COMMON = {
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string"},
    "jobs": _posint,
    "write_images": {"type": "boolean"},
}

DYNAMIC_SCHEMA = _obj({
    **_COMMON,
    "pipeline": {"const": "dynamic"},
    "scene": DYNAMIC_SCENE_SCHEMA,
    "scene_path": {"type": "string"},
    "snr_db": {"type": "array", "items": _num, "minItems": 1},
    "methods": {
        "type": "array",
        "items": {"enum": ["none", "ebd", "ath", "apr", "apr_then_ath"]},
        "minItems": 1,
        "uniqueItems": True,
    },
    "noise_domain": {"enum": ["signal", "image"]},
    "stft": STFT_SCHEMA,
    "range_half_width": {"type": "integer", "minimum": 0},
    "butterworth_cutoff_fraction": {"anyOf": [{"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}, {"type": "null"}]},
    "gray": _obj({"dynamic_range_db": _pos}),
    "ath": _obj({"tol": _pos}),
    "apr": _obj({"energy_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}, "gamma": _pos}),
    "ebd": _obj({"interval_width": _posint, "num_candidates": _posint, "beta": _nonneg}),
})

STATIC_SCHEMA = _obj({
    **_COMMON,
    "pipeline": {"const": "static"},
    "source": {"oneOf": [BLOB_SOURCE_SCHEMA, RADAR_SOURCE_SCHEMA]},
    "score": SCORE_SCHEMA,
    "tracker": TRACKER_SCHEMA,
    "masks": MASK_SCHEMA,
})

DEFAULT_DYNAMIC = {
    "pipeline": "dynamic",
    "seed": 7,
    "scene": {"preset": "walking-like"},
    "snr_db": [10, 5, 0, -5, -10],
    "methods": ["none", "ebd", "ath", "apr", "apr_then_ath"],
}

DEFAULT_STATIC = {
    "pipeline": "static",
    "seed": 7,
    "source": {"kind": "radar", "scene": {"preset": "static-sit"}, "frames": 20},
}


class ConfigError(InvalidArgumentError):
    """Configuration failed schema validation or could not be turned into a run."""


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def validate(doc: dict, schema: dict) -> dict:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc
    return doc


def _apply(obj, fields: dict, skip=("preset",)):
    for k, v in fields.items():
        if k not in skip:
            setattr(obj, k, v)
    return obj


def dynamic_scene_from(doc: dict, seed: int) -> synth.DynamicSceneSpec:
    doc = dict(doc)
    if "scatterers" in doc:
        scs = [
            synth.Scatterer(
                s["amplitude"], s.get("base_range_m", 1.0), s.get("base_velocity_mps", 0.0),
                synth.MicroMotion(**s.get("micromotion", {})),
            )
            for s in doc.pop("scatterers")
        ]
        spec = synth.DynamicSceneSpec(scatterers=scs)
    else:
        spec = synth.walking_like()
    _apply(spec, doc)
    spec.rng_seed = seed
    return spec


def static_scene_from(doc: dict, seed: int) -> synth.StaticSceneSpec:
    doc = dict(doc)
    if "targets" in doc:
        spec = synth.StaticSceneSpec(targets=[synth.StaticTarget(**t) for t in doc.pop("targets")])
    else:
        spec = synth.static_sit()
    _apply(spec, doc)
    spec.rng_seed = seed
    return spec


def blob_spec_from(doc: dict, seed: int) -> synth.BlobFieldSpec:
    mk = lambda b: synth.Blob(tuple(b["centroid"]), b["sigma_px"], b["amplitude"])  # noqa: E731
    return synth.BlobFieldSpec(
        frame_shape=tuple(doc["frame_shape"]),
        blobs=[mk(b) for b in doc["blobs"]],
        clutter_lumps=[mk(b) for b in doc.get("clutter_lumps", [])],
        noise_sigma=doc.get("noise_sigma", 0.0),
        frames=doc.get("frames", 1),
        velocity_px=tuple(doc.get("velocity_px", (0.0, 0.0))),
        trajectory=doc.get("trajectory"),
        dropout_frames=frozenset(doc.get("dropout_frames", [])),
        rng_seed=seed,
    )


def angle_grid_from(doc: dict | None) -> np.ndarray:
    doc = doc or {}
    start, stop, step = doc.get("start", -60.0), doc.get("stop", 60.0), doc.get("step", 1.0)
    if stop < start:
        raise ConfigError("angle_grid.stop must be >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)
