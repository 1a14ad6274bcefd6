"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error (missing or malformed
files), 3 numeric failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from geowarp import dataset as ds
from geowarp import metrics, model, synthesis, synthetic, training
from geowarp.geometry import RigidTransform
from geowarp.labels import DepthLabelConfig, LidarScan, scan_to_depth_map

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="geowarp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="render synthetic scene specs into a dataset dir")
    p.add_argument("--spec", required=True, help="scene spec JSON (single spec or {'scenes': [...]})")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("make-depth", help="rasterize point scans into DMAP depth labels")
    p.add_argument("--scans", required=True, help="directory of NNNNNN.npy point arrays (N,3)")
    p.add_argument("--calib", required=True, help="sensor-to-camera calibration JSON")
    p.add_argument("--intrinsics", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--d-min", type=float, default=3.0)
    p.add_argument("--d-max", type=float, default=80.0)
    p.set_defaults(func=cmd_make_depth)

    p = sub.add_parser("train", help="train the depth model from a config JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".", help="directory for checkpoint and loss log")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate next-frame prediction quality")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--oracle-depth", action="store_true",
                   help="warp with stored ground-truth depth instead of a model")
    p.add_argument("--out-json", required=True)
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="predict the next frame for one sequence")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="one video directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="warp one frame through hypothetical motions")
    p.add_argument("--frame", required=True, help="input RGB PNG")
    p.add_argument("--depth", required=True, help="input DMAP depth")
    p.add_argument("--intrinsics", required=True)
    p.add_argument("--motions", required=True,
                   help="JSON {'version':1,'motions':[{t_x..r_z}...]} (steering convention)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the explorer HTTP service")
    p.add_argument("--port", type=int, default=8710)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc


def cmd_gen_data(args):
    raw = _load_json(args.spec)
    if "scenes" in raw:
        specs = [synthetic.SyntheticSceneSpec.from_dict(d) for d in raw["scenes"]]
    else:
        specs = [synthetic.SyntheticSceneSpec.from_dict(raw)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, spec in enumerate(specs):
        seq = synthetic.render_synthetic_sequence(spec)
        ds.write_video_dir(out / f"video_{i:03d}", seq)
    print(f"wrote {len(specs)} video(s) to {out}")
    return EXIT_OK


def cmd_make_depth(args):
    calib = _load_json(args.calib)
    transform = RigidTransform(
        np.asarray(calib["rotation"], dtype=np.float64),
        np.asarray(calib["translation"], dtype=np.float64),
    )
    intr = ds.load_intrinsics(args.intrinsics)
    cfg = DepthLabelConfig(d_min=args.d_min, d_max=args.d_max)
    scan_files = sorted(Path(args.scans).glob("*.npy"))
    if not scan_files:
        raise ValueError(f"{args.scans}: no .npy scans found")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    total_culled = 0
    for f in scan_files:
        scan = LidarScan(points=np.load(f), sensor_to_camera=transform)
        depth, culled = scan_to_depth_map(scan, intr, cfg)
        total_culled += culled
        ds.save_dmap(out / (f.stem + ".npyish"), depth)
    print(f"wrote {len(scan_files)} depth maps to {out} ({total_culled} points culled)")
    return EXIT_OK


def cmd_train(args):
    cfg = training.TrainingConfig.from_dict(_load_json(args.config))
    if not cfg.data_dir:
        raise ValueError("training config must set data_dir")
    records = ds.load_dataset(cfg.data_dir, cfg.sequence_length, cfg.labels)
    eval_records = None
    if cfg.eval_dir:
        eval_records = ds.load_dataset(cfg.eval_dir, cfg.sequence_length, cfg.labels)
    result = training.train(records, cfg, eval_records)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt = out_dir / cfg.checkpoint_path
    training.save_params(ckpt, result.params)
    training.write_loss_log(out_dir / cfg.loss_log_path, result.loss_log)
    first = result.loss_log[0][1]
    last = result.loss_log[-1][1]
    print(f"trained {result.steps_run} steps; loss {first:.5f} -> {last:.5f}")
    if eval_records:
        print(f"eval depth L2 {result.initial_eval:.5f} -> {result.final_eval:.5f}")
    print(f"checkpoint: {ckpt}")
    return EXIT_OK


def cmd_eval(args):
    cfg = training.TrainingConfig.from_dict(_load_json(args.config))
    records = ds.load_dataset(args.data, cfg.sequence_length, cfg.labels)
    intr = ds.dataset_intrinsics(args.data)
    if args.oracle_depth:
        report = metrics.evaluate(records, intr, label_cfg=cfg.labels)
    else:
        if not args.checkpoint:
            raise UsageError("eval needs --checkpoint or --oracle-depth")
        params = training.load_params(args.checkpoint, cfg.arch)
        report = metrics.evaluate(records, intr, params=params, arch=cfg.arch,
                                  label_cfg=cfg.labels)
    report.save_json(args.out_json)
    report.save_csv(args.out_csv)
    print(f"{report.mode}: psnr {report.psnr_mean} ssim {report.ssim_mean} "
          f"({report.pixel_count} pixels)")
    return EXIT_OK


def cmd_predict(args):
    cfg = training.TrainingConfig.from_dict(_load_json(args.config))
    video = ds.load_video_dir(args.data)
    k = min(cfg.sequence_length, len(video.frames))
    if k < 2:
        raise ValueError("need at least 2 frames to predict")
    params = training.load_params(args.checkpoint, cfg.arch)
    pred = synthesis.predict_next(
        params, video.frames[:k - 1], video.poses[:k], video.intrinsics,
        arch=cfg.arch, label_cfg=cfg.labels,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds.save_png(out / "predicted.png", pred.rgb)
    ds.save_dmap(out / "predicted_depth.npyish", pred.depth)
    ds.save_png(out / "coverage.png", (pred.coverage * np.uint8(255)))
    print(f"predicted frame {k} -> {out} (coverage {pred.coverage.mean():.3f})")
    return EXIT_OK


def cmd_simulate(args):
    rgb = ds.load_png(args.frame)
    depth = ds.load_dmap(args.depth)
    intr = ds.load_intrinsics(args.intrinsics)
    raw = _load_json(args.motions)
    if "motions" not in raw:
        raise ValueError(f"{args.motions}: missing 'motions' list")
    motions = [synthesis.camera_move(**{k: float(v) for k, v in m.items()})
               for m in raw["motions"]]
    preds = synthesis.simulate_hypothetical(rgb, depth, motions, intr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, pred in enumerate(preds):
        ds.save_png(out / f"sim_{i:03d}.png", pred.rgb)
    print(f"wrote {len(preds)} simulated frame(s) to {out}")
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from geowarp.service import build_app
    app = build_app(args.data)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except FloatingPointError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FileNotFoundError, NotADirectoryError, ValueError, KeyError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
