"""Command-line front-end.

Subcommands::

    radhar synth        --config cfg.json --out DIR   generate synthetic raw data
    radhar dynamic-eval [--config cfg.json] --out DIR noise sweep x denoisers x metrics
    radhar static-eval  [--config cfg.json] --out DIR RA maps -> score -> track -> masks
    radhar score        --input frames.rdt --out DIR  cleanliness scores for a frame stack
    radhar track        --input frames.rdt --out DIR  tracking + masks for a frame stack
    radhar render       --input x.rdt --out DIR       PGM view of each frame of a tensor

Flags may also come from ``RADHAR_CONFIG``, ``RADHAR_SEED``, ``RADHAR_OUT``
and ``RADHAR_JOBS``; command-line flags win over the environment, which
wins over the config file. Exit codes: 0 success, 2 invalid configuration
or arguments, 3 numerical failure (stage named on stderr), 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import formats, render
from .denoise import DenoiseConfig, denoise_pipeline, ebd_denoise, ebd_select_interval, ebd_signal
from .dsp import StftParams
from .errors import InvalidArgumentError, NumericalFailureError
from .metrics import METRIC_COLUMNS, evaluate, format_value
from .quality import ScoreParams, cleanliness_score
from .ramap import build_ra_frames
from .spectrogram import (
    add_wgn_cube, add_wgn_image, md_spectrogram, range_profiles_complex, slow_time_from_cube, to_gray,
)
from .synth import simulate_dynamic_cube, simulate_dynamic_scene, simulate_static_scene, synth_blob_sequence
from .tracker import TrackerParams, masks_for_track, track_sequence

log = logging.getLogger("radhar")

# column order and labels of the comparison tables
METHOD_LABELS = {"none": "NS", "ebd": "EBD", "ath": "ATh", "apr": "APr", "apr_then_ath": "APr + ATh"}
TABLE_ORDER = ["none", "ebd", "ath", "apr", "apr_then_ath"]

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class Run:
    """Output directory bookkeeping: completed stages end up in MANIFEST.json."""

    current: "Run | None" = None

    def __init__(self, out: Path, command: str):
        Run.current = self
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.stages: list[str] = []
        self.files: list[str] = []

    @contextmanager
    def stage(self, name: str):
        log.info("stage %s", name)
        try:
            yield
        except NumericalFailureError as exc:
            raise StageFailure(name, exc) from exc
        self.stages.append(name)

    def path(self, rel: str) -> Path:
        self.files.append(rel)
        p = self.out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def write_manifest(self, complete: bool):
        doc = {"command": self.command, "complete": complete, "stages": self.stages, "files": sorted(set(self.files))}
        formats.atomic_write_bytes(self.out / "MANIFEST.json", (json.dumps(doc, indent=2) + "\n").encode())


def _level_seed(seed: int, snr_db: float) -> int:
    # keyed by the SNR value so a level's noise does not depend on sweep order
    return (seed * 1_000_003 + zlib.crc32(f"{float(snr_db):.6g}".encode())) % (2**63)


def _resolve(args, defaults: dict | None, schema: dict | None) -> tuple[dict, int, Path, int]:
    cfg_path = args.config or os.environ.get("RADHAR_CONFIG")
    doc = cfgmod.load_json(cfg_path) if cfg_path else {}
    if schema is not None:
        cfgmod.validate(doc, schema)
    if defaults:
        doc = {**defaults, **doc}
    seed = args.seed if args.seed is not None else os.environ.get("RADHAR_SEED", doc.get("seed", 0))
    out = args.out or os.environ.get("RADHAR_OUT") or doc.get("out") or "radhar_out"
    jobs = args.jobs if args.jobs is not None else os.environ.get("RADHAR_JOBS", doc.get("jobs", 1))
    try:
        seed, jobs = int(seed), int(jobs)
    except ValueError as exc:
        raise cfgmod.ConfigError(f"seed and jobs must be integers: {exc}") from exc
    if seed < 0 or jobs < 1:
        raise cfgmod.ConfigError("seed must be >= 0 and jobs >= 1")
    return doc, seed, Path(out), jobs


def _stft_params(doc: dict, window_kind: str | None = None) -> StftParams:
    kw = dict(doc.get("stft", {}))
    if window_kind:
        kw["window_kind"] = window_kind
    return StftParams(**kw)


def _dynamic_scene(doc: dict, seed: int):
    scene = doc.get("scene", {"preset": "walking-like"})
    if "scene_path" in doc:
        scene = cfgmod.validate(cfgmod.load_json(doc["scene_path"]), cfgmod.DYNAMIC_SCENE_SCHEMA)
    return cfgmod.dynamic_scene_from(scene, seed)


def cmd_dynamic_eval(doc: dict, seed: int, out: Path, jobs: int = 1) -> Run:
    """Noise sweep over SNR levels, every method scored against the clean reference."""
    run = Run(out, "dynamic-eval")
    methods = [m for m in TABLE_ORDER if m in doc.get("methods", TABLE_ORDER)]
    snrs = [float(s) for s in doc.get("snr_db", [10, 5, 0, -5, -10])]
    params = _stft_params(doc)
    ebd_params = _stft_params(doc, "gaussian")
    half = doc.get("range_half_width", 4)
    cutoff = doc.get("butterworth_cutoff_fraction", 0.8)
    dcfg = DenoiseConfig(
        dynamic_range_db=doc.get("gray", {}).get("dynamic_range_db", 40.0),
        ath_tol=doc.get("ath", {}).get("tol", 0.1),
        apr_energy_fraction=doc.get("apr", {}).get("energy_fraction", 0.99),
        apr_gamma=doc.get("apr", {}).get("gamma", 9.0),
        ebd_beta=doc.get("ebd", {}).get("beta", 1.5),
    )
    ebd_cfg = doc.get("ebd", {})
    domain = doc.get("noise_domain", "signal")
    write_images = doc.get("write_images", True)

    with run.stage("synthesize"):
        scene_spec = _dynamic_scene(doc, seed)
        cube = simulate_dynamic_cube(scene_spec)
        truth = simulate_dynamic_scene(scene_spec)
        clean_spec = md_spectrogram(slow_time_from_cube(cube, half, cutoff_fraction=cutoff), params)
        reference = to_gray(clean_spec, dcfg.dynamic_range_db)

    def one_level(snr):
        lseed = _level_seed(seed, snr)
        info = {"snr_db": snr, "seed": lseed}
        if domain == "signal":
            noisy = add_wgn_cube(cube, snr, lseed)
            spec = md_spectrogram(slow_time_from_cube(noisy, half, cutoff_fraction=cutoff), params)
        else:
            noisy = None
            spec = add_wgn_image(clean_spec, snr, lseed)
        images, rows = {}, []
        for m in methods:
            if m == "ebd" and noisy is not None:
                rt = range_profiles_complex(noisy)
                iv = ebd_select_interval(
                    rt, cube.chirp_rate_hz, ebd_params,
                    ebd_cfg.get("interval_width", 5), ebd_cfg.get("num_candidates", 7),
                )
                info["ebd_interval"] = {"start_bin": iv.start_bin, "width_bins": iv.width_bins,
                                        "avg_entropy_bits": iv.avg_entropy_bits, "anchor_bin": iv.anchor_bin}
                ebd_spec = md_spectrogram(ebd_signal(rt, iv, cube.chirp_rate_hz), ebd_params)
                img = to_gray(ebd_denoise(ebd_spec, dcfg.ebd_beta), dcfg.dynamic_range_db)
            else:
                img = denoise_pipeline(spec, m, dcfg)
            images[m] = img
            rep = evaluate(reference, img)
            rows.append([format_value(snr), METHOD_LABELS[m]] + [format_value(getattr(rep, c)) for c in METRIC_COLUMNS]
                        + [format_value(rep.identical)])
        images["_noisy"] = to_gray(spec, dcfg.dynamic_range_db)
        return rows, images, info

    with run.stage("noise-denoise-evaluate"):
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(one_level, snrs))
        else:
            results = [one_level(s) for s in snrs]

    with run.stage("report"):
        header = ["snr_db", "method"] + list(METRIC_COLUMNS) + ["identical"]
        all_rows = [r for rows, _, _ in results for r in rows]
        formats.write_csv(run.path("metrics.csv"), header, all_rows)
        formats.atomic_write_bytes(run.path("table.txt"), _aligned_tables(snrs, methods, results).encode())
        formats.write_sidecar(
            run.path("run.json"), "dynamic-eval",
            {"config": doc, "denoise": asdict(dcfg), "stft": asdict(params), "ebd_stft": asdict(ebd_params),
             "levels": [info for _, _, info in results]},
            seeds=[seed], axes={"spectrogram": {"rows": "doppler_bin", "cols": "frame",
                                                "bin_hz": clean_spec.bin_hz, "frame_hop_s": clean_spec.frame_hop_s}},
        )
        formats.write_csv(run.path("truth_doppler.csv"), ["chirp", "doppler_hz"],
                          [[i, f"{d:.6f}"] for i, d in enumerate(truth.doppler_hz)])

    if write_images:
        with run.stage("render"):
            formats.write_pgm(run.path("reference.pgm"), reference)
            for snr, (_, images, _) in zip(snrs, results):
                tiles = [reference.pixels, images["_noisy"].pixels] + [images[m].pixels for m in methods if m != "none"]
                formats.write_pgm(run.path(f"panels/snr_{snr:+g}dB.pgm"), render.grid(tiles, cols=3))
    return run


def _aligned_tables(snrs, methods, results) -> str:
    labels = [METHOD_LABELS[m] for m in methods]
    names = {"mse": "MSE", "mae": "MAE", "rmse": "RMSE", "psnr_db": "PSNR (dB)", "pearson": "Pearson Corr", "ssim": "SSIM"}
    lines = []
    for snr, (rows, _, _) in zip(snrs, results):
        lines.append(f"SNR = {snr:g} dB")
        cells = [[_short(r[2 + k]) for r in rows] for k in range(len(METRIC_COLUMNS))]
        width = [14] + [max(len(lab), *(len(c[j]) for c in cells)) + 2 for j, lab in enumerate(labels)]
        lines.append("METRICS".ljust(width[0]) + "".join(lab.rjust(w) for lab, w in zip(labels, width[1:])))
        for col, vals in zip(METRIC_COLUMNS, cells):
            lines.append(names[col].ljust(width[0]) + "".join(v.rjust(w) for v, w in zip(vals, width[1:])))
        lines.append("")
    return "\n".join(lines)


def _short(text: str) -> str:
    try:
        return f"{float(text):.4f}"
    except ValueError:
        return text


def _static_frames(doc: dict, seed: int, jobs: int):
    """Frame stack ``(F, R, C)``, optional ground-truth centroids and axis metadata."""
    src = doc["source"]
    if src["kind"] == "blobs":
        frames, truth = synth_blob_sequence(cfgmod.blob_spec_from(src, seed))
        return frames, truth, {"rows": "pixel", "cols": "pixel"}
    scene = src.get("scene", {"preset": "static-sit"})
    if "scene_path" in src:
        scene = cfgmod.validate(cfgmod.load_json(src["scene_path"]), cfgmod.STATIC_SCENE_SCHEMA)
    spec = cfgmod.static_scene_from(scene, seed)
    n = src.get("frames", 20)
    angles = cfgmod.angle_grid_from(src.get("angle_grid"))
    loading = src.get("loading_factor", 1e-3)
    mti = src.get("mti", False)

    def one(t):
        cube = simulate_static_scene(spec, frame_index=t)
        ra = build_ra_frames([cube], angles, loading_factor=loading, use_mti=mti)[0]
        return ra

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            maps = list(pool.map(one, range(n)))
    else:
        maps = [one(t) for t in range(n)]
    axes = {"rows": "range_m", "cols": "azimuth_deg",
            "range_axis_m": maps[0].range_axis_m.tolist(), "angle_grid_deg": angles.tolist()}
    return np.stack([m.power for m in maps]), None, axes


def _score_params(doc: dict) -> ScoreParams:
    return ScoreParams(**doc.get("score", {}))


def _tracker_params(doc: dict) -> TrackerParams:
    return TrackerParams(**doc.get("tracker", {}))


def _score_rows(scores):
    return [[i, format_value(s.S), format_value(s.lumps_score), format_value(s.peak_score), s.subpeak_count,
             format_value(s.leftover_ratio)] for i, s in enumerate(scores)]


SCORE_HEADER = ["frame_index", "S", "lumps_score", "peak_score", "subpeak_count", "leftover_ratio"]
TRACK_HEADER = ["frame", "centroid_row", "centroid_col", "mode", "score"]


def _track_rows(states):
    rows = []
    for st in states:
        r, c = ("", "") if st.centroid is None else (format_value(st.centroid[0]), format_value(st.centroid[1]))
        rows.append([st.frame_index, r, c, st.mode, format_value(st.score)])
    return rows


def _score_and_track(run: Run, frames: np.ndarray, doc: dict, jobs: int, write_images: bool):
    sp = _score_params(doc)
    with run.stage("score"):
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                scores = list(pool.map(lambda f: cleanliness_score(f, sp), frames))
        else:
            scores = [cleanliness_score(f, sp) for f in frames]
        formats.write_csv(run.path("scores.csv"), SCORE_HEADER, _score_rows(scores))
    with run.stage("track"):
        states = track_sequence(list(frames), _tracker_params(doc), sp, scores=scores)
        formats.write_csv(run.path("track.csv"), TRACK_HEADER, _track_rows(states))
    mcfg = doc.get("masks", {})
    with run.stage("masks"):
        soft, hard = masks_for_track(frames.shape[1:], states, mcfg.get("decay_radius_px", 10.0), mcfg.get("margin_px", 2))
        formats.write_tensor(run.path("soft_masks.rdt"), soft)
        formats.write_tensor(run.path("hard_masks.rdt"), hard)
    if write_images:
        with run.stage("render"):
            for st, f, s, h in zip(states, frames, soft, hard):
                inv = st.frame_score.lump_inventory
                formats.write_ppm(run.path(f"overlays/frame_{st.frame_index:04d}.ppm"),
                                  render.overlay_lumps(f, inv, st.chosen_lump))
                raw = render.to_u8(f)
                boxed = render.draw_bbox(raw, st.chosen_lump.bbox) if st.chosen_lump is not None else raw
                tiles = [raw, boxed, render.to_u8(s), render.to_u8(h)]
                formats.write_pgm(run.path(f"panels/frame_{st.frame_index:04d}.pgm"), render.grid(tiles, cols=4))
    return scores, states


def cmd_static_eval(doc: dict, seed: int, out: Path, jobs: int = 1) -> Run:
    """RA frames (synthetic radar or blob fields) -> scores -> track -> masks -> panels."""
    run = Run(out, "static-eval")
    with run.stage("frames"):
        frames, truth, axes = _static_frames(doc, seed, jobs)
        formats.write_tensor(run.path("ra_frames.rdt"), frames)
        formats.write_sidecar(run.path("ra_frames.json"), "static-eval/frames", {"config": doc},
                              seeds=[seed], axes={"dims": ["frame", axes["rows"], axes["cols"]], **axes})
        if truth is not None:
            formats.write_csv(run.path("truth.csv"), ["frame", "row", "col"],
                              [[i, format_value(r), format_value(c)] for i, (r, c) in enumerate(truth)])
    _score_and_track(run, frames, doc, jobs, doc.get("write_images", True))
    return run


def cmd_synth(doc: dict, seed: int, out: Path, jobs: int = 1) -> Run:
    run = Run(out, "synth")
    with run.stage("synthesize"):
        if doc.get("pipeline") == "dynamic":
            spec = _dynamic_scene(doc, seed)
            cube = simulate_dynamic_cube(spec)
            truth = simulate_dynamic_scene(spec)
            formats.write_tensor(run.path("iq_cube.rdt"), cube.data)
            formats.write_csv(run.path("truth_doppler.csv"), ["chirp", "doppler_hz"],
                              [[i, f"{d:.6f}"] for i, d in enumerate(truth.doppler_hz)])
            formats.write_sidecar(run.path("iq_cube.json"), "synth/dynamic", {"scene": _jsonable(spec)},
                                  seeds=[seed], axes={"dims": ["channel", "chirp", "sample"]})
        elif doc["source"]["kind"] == "blobs":
            frames, truth = synth_blob_sequence(cfgmod.blob_spec_from(doc["source"], seed))
            formats.write_tensor(run.path("frames.rdt"), frames)
            formats.write_csv(run.path("truth.csv"), ["frame", "row", "col"],
                              [[i, format_value(r), format_value(c)] for i, (r, c) in enumerate(truth)])
        else:
            src = doc["source"]
            spec = cfgmod.static_scene_from(src.get("scene", {"preset": "static-sit"}), seed)
            cubes = np.stack([simulate_static_scene(spec, t).data for t in range(src.get("frames", 20))])
            formats.write_tensor(run.path("iq_cubes.rdt"), cubes)
            formats.write_sidecar(run.path("iq_cubes.json"), "synth/static", {"scene": _jsonable(spec)},
                                  seeds=[seed], axes={"dims": ["frame", "channel", "chirp", "sample"]})
    return run


def _jsonable(spec) -> dict:
    return json.loads(json.dumps(asdict(spec), default=formats._json_default))


def _read_frames(path) -> np.ndarray:
    a = formats.read_tensor(path)
    if np.iscomplexobj(a):
        a = np.abs(a)
    a = np.asarray(a, dtype=float)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3:
        raise InvalidArgumentError(f"expected a (frames, rows, cols) tensor, got shape {a.shape}")
    return a


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radhar", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, needs_input=False):
        sp.add_argument("--config", help="JSON run configuration (env RADHAR_CONFIG)")
        sp.add_argument("--seed", type=int, help="RNG seed, overrides config (env RADHAR_SEED)")
        sp.add_argument("--out", help="output directory (env RADHAR_OUT)")
        sp.add_argument("--jobs", type=int, help="worker threads (env RADHAR_JOBS)")
        if needs_input:
            sp.add_argument("--input", required=True, help="RDT1 tensor (frames, rows, cols) or (rows, cols)")

    common(sub.add_parser("synth", help="generate synthetic raw data from a dynamic or static config"))
    common(sub.add_parser("dynamic-eval", help="SNR sweep x denoising methods x metrics"))
    common(sub.add_parser("static-eval", help="RA frames -> cleanliness score -> tracking -> masks"))
    common(sub.add_parser("score", help="cleanliness scores of a frame stack"), needs_input=True)
    common(sub.add_parser("track", help="track + masks for a frame stack"), needs_input=True)
    r = sub.add_parser("render", help="write every frame of a tensor as PGM")
    common(r, needs_input=True)
    r.add_argument("--frame", type=int, help="render only this frame index")
    return p


def _dispatch(args) -> Run:
    cmd = args.command
    if cmd == "dynamic-eval":
        doc, seed, out, jobs = _resolve(args, cfgmod.DEFAULT_DYNAMIC, cfgmod.DYNAMIC_SCHEMA)
        return cmd_dynamic_eval(doc, seed, out, jobs)
    if cmd == "static-eval":
        doc, seed, out, jobs = _resolve(args, cfgmod.DEFAULT_STATIC, cfgmod.STATIC_SCHEMA)
        return cmd_static_eval(doc, seed, out, jobs)
    if cmd == "synth":
        cfg_path = args.config or os.environ.get("RADHAR_CONFIG")
        raw = cfgmod.load_json(cfg_path) if cfg_path else dict(cfgmod.DEFAULT_DYNAMIC)
        if raw.get("pipeline") == "static":
            doc, seed, out, jobs = _resolve(args, cfgmod.DEFAULT_STATIC, cfgmod.STATIC_SCHEMA)
        else:
            doc, seed, out, jobs = _resolve(args, cfgmod.DEFAULT_DYNAMIC, cfgmod.DYNAMIC_SCHEMA)
        return cmd_synth(doc, seed, out, jobs)
    score_only = _score_track_schema()
    doc, seed, out, jobs = _resolve(args, None, score_only)
    frames = _read_frames(args.input)
    if cmd == "score":
        run = Run(out, "score")
        sp = _score_params(doc)
        with run.stage("score"):
            formats.write_csv(run.path("scores.csv"), SCORE_HEADER, _score_rows([cleanliness_score(f, sp) for f in frames]))
        return run
    if cmd == "track":
        run = Run(out, "track")
        _score_and_track(run, frames, doc, jobs, doc.get("write_images", False))
        return run
    run = Run(out, "render")
    with run.stage("render"):
        idx = range(len(frames)) if args.frame is None else [args.frame]
        for i in idx:
            if not 0 <= i < len(frames):
                raise InvalidArgumentError(f"frame {i} out of range (0..{len(frames) - 1})")
            formats.write_pgm(run.path(f"frame_{i:04d}.pgm"), render.to_u8(frames[i]))
    return run


def _score_track_schema() -> dict:
    props = {k: v for k, v in cfgmod.STATIC_SCHEMA["properties"].items() if k != "source"}
    return {**cfgmod.STATIC_SCHEMA, "properties": props}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    Run.current = None
    code = EXIT_ERROR
    try:
        run = _dispatch(args)
    except StageFailure as exc:
        print(f"radhar: numerical failure in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        code = EXIT_NUMERIC
    except InvalidArgumentError as exc:
        print(f"radhar: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"radhar: {type(exc).__name__}: {exc}", file=sys.stderr)
    else:
        code = EXIT_OK
    if code != EXIT_OK:
        if Run.current is not None:
            Run.current.write_manifest(complete=False)
        return code
    run.write_manifest(complete=True)
    print(f"radhar: {run.command} wrote {len(set(run.files))} files to {run.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
