"""``kpose`` command line: synth, pose, multiplex, eval, bench-rot.

Exit codes: 0 ok, 1 I/O trouble, 2 bad usage, 3 a property check failed.
JSON (``--json``) is the only thing ever written to stdout.
"""
import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .errors import Degenerate, KposeError, NoConsensus, ParseError, PlanarAmbiguity
from .heatmap import decode_keypoints
from .io import load_poses, read_pgm, save_poses, write_pgm
from .mesh import load_obj
from .metrics import angular_error_deg, iou, jaccard_stats
from .multiplex import MultiplexConfig, run_multiplex
from .pnp import Correspondences, RansacParams, ransac_pnp
from .raster import render_silhouette
from .rotation import (gram_schmidt_6d, normalize_quat, polar_rotation, quat_loss_double_cover,
                       quat_to_matrix, svd_orthogonalize)
from .synth import SHAPES, build_scenario, frame_ids, load_scenario, save_scenario

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_FAIL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _resolution(text):
    n = int(text)
    if n < 64 or n > 1024 or n & (n - 1):
        raise argparse.ArgumentTypeError("resolution must be a power of two in [64, 1024]")
    return n


def _say(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _emit(args, doc):
    if args.json:
        json.dump(doc, sys.stdout, indent=1)
        sys.stdout.write("\n")


def _out_dir(args, fallback):
    d = args.out_dir or fallback
    os.makedirs(d, exist_ok=True)
    return d


def cmd_synth(args):
    if args.kp < 3:
        raise UsageError("--kp must be at least 3")
    if args.frames < 1:
        raise UsageError("--frames must be at least 1")
    if not 0 <= args.outliers <= 1 or args.noise < 0:
        raise UsageError("--outliers must lie in [0, 1] and --noise must be non-negative")
    if not args.out_dir:
        raise UsageError("synth needs --out-dir")
    scn = build_scenario(args.shape, args.kp, args.frames, args.noise, args.outliers, args.seed, args.resolution)
    save_scenario(scn, args.out_dir)
    _say(args, f"wrote {args.frames} frames of {args.shape} ({args.kp} keypoints) to {args.out_dir}")
    _emit(args, {"out_dir": args.out_dir, "frames": args.frames, "keypoints": args.kp, "shape": args.shape})
    return EXIT_OK


def estimate_poses(scn, score_floor=0.1, params=RansacParams()):
    """Decode every heatmap stack and run RANSAC PnP; failed frames give ``None``."""
    X = scn.keypoints.positions(scn.mesh)
    poses, failures = [], []
    for k, hm in enumerate(scn.heatmaps):
        uv, scores = decode_keypoints(hm)
        keep = scores >= score_floor
        try:
            pose, _ = ransac_pnp(Correspondences(X[keep], uv[keep], scores[keep]), params)
        except (NoConsensus, Degenerate, PlanarAmbiguity) as err:
            failures.append((k, str(err)))
            pose = None
        poses.append(pose)
    return poses, failures


def cmd_pose(args):
    ids = frame_ids(args.scenario)
    if not ids:
        print(f"no frames under {args.scenario}", file=sys.stderr)
        return EXIT_IO
    scn = load_scenario(args.scenario)
    if len(scn.keypoints.indices) != scn.heatmaps[0].shape[0]:
        raise ParseError("heatmap channel count does not match keypoints.json")
    params = RansacParams(args.threshold, args.max_iterations, seed=args.seed)
    poses, failures = estimate_poses(scn, args.score_floor, params)
    out = os.path.join(_out_dir(args, args.scenario), "poses_pred.json")
    save_poses(out, poses)
    for k, msg in failures:
        _say(args, f"warning: frame {k}: {msg}")

    report = {"frames": len(poses), "failed": [k for k, _ in failures], "output": out}
    if scn.true_poses:
        errs = [None if p is None else angular_error_deg(p.R, t.R) for p, t in zip(poses, scn.true_poses)]
        for k, e in enumerate(errs):
            _say(args, f"frame {k:4d}  " + ("failed" if e is None else f"{e:8.3f} deg"))
        good = [e for e in errs if e is not None]
        report["angular_error_deg"] = errs
        report["median_angular_error_deg"] = float(np.median(good)) if good else None
        if good:
            _say(args, f"median angular error {np.median(good):.3f} deg over {len(good)} frames")
    _say(args, f"wrote {out}; {len(failures)} frame(s) without consensus")
    _emit(args, report)
    return EXIT_OK


def cmd_multiplex(args):
    mesh = load_obj(args.mesh)
    target = read_pgm(args.target)
    cfg = MultiplexConfig(args.n_az, args.n_el, args.prune, args.budget, seed=args.seed)
    t0 = time.perf_counter()
    kept, weights = run_multiplex(mesh, target, cfg)
    elapsed = time.perf_counter() - t0
    out_dir = _out_dir(args, ".")
    doc = [dict(pose.to_dict(), loss=loss, weight=float(w)) for (pose, loss), w in zip(kept, weights)]
    path = os.path.join(out_dir, "multiplex.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
    if args.render:
        h, w = target.shape
        for k, (pose, _) in enumerate(kept):
            write_pgm(os.path.join(out_dir, f"multiplex_{k}.pgm"), render_silhouette(mesh, pose, w, h))
    for k, d in enumerate(doc):
        _say(args, f"camera {k}: loss {d['loss']:.5f}  weight {d['weight']:.3f}")
    _say(args, f"wrote {path} in {elapsed:.1f} s")
    _emit(args, doc)
    return EXIT_OK


def evaluate(true_poses, gt_masks, pred_poses, pred_masks):
    """Per-frame IoU and angular error plus the summary report."""
    rows = []
    for k, gt in enumerate(gt_masks):
        pred = pred_masks[k]
        if pred.shape != gt.shape:
            raise KposeError(f"frame {k}: predicted mask {pred.shape} vs ground truth {gt.shape}")
        t, p = true_poses[k] if k < len(true_poses) else None, pred_poses[k] if k < len(pred_poses) else None
        err = angular_error_deg(p.R, t.R) if (t is not None and p is not None) else None
        rows.append({"frame": k, "iou": iou(pred, gt), "angular_error_deg": err})
    ious = [r["iou"] for r in rows]
    errs = [r["angular_error_deg"] for r in rows if r["angular_error_deg"] is not None]
    jac = jaccard_stats(ious)
    report = {
        "mean_iou": float(np.mean(ious)),
        "angular_error_deg": float(np.mean(errs)) if errs else None,
        "median_angular_error_deg": float(np.median(errs)) if errs else None,
        "jaccard": {"mean": jac.mean, "recall": jac.recall, "decay": jac.decay},
    }
    return report, rows


def cmd_eval(args):
    scn = load_scenario(args.scenario)
    if not scn.masks:
        print(f"no frames under {args.scenario}", file=sys.stderr)
        return EXIT_IO
    pred_poses = load_poses(args.pred or os.path.join(args.scenario, "poses_pred.json"))
    if args.pred_masks:
        pred_masks = [read_pgm(os.path.join(args.pred_masks, f"{k:04d}_mask.pgm")) for k in frame_ids(args.scenario)]
    else:
        pred_masks = []
        for k, gt in enumerate(scn.masks):
            p = pred_poses[k] if k < len(pred_poses) else None
            h, w = gt.shape
            pred_masks.append(np.zeros_like(gt) if p is None else render_silhouette(scn.mesh, p, w, h))
    try:
        report, rows = evaluate(scn.true_poses, scn.masks, pred_poses, pred_masks)
    except KposeError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    out_dir = _out_dir(args, args.scenario)
    with open(os.path.join(out_dir, "eval.json"), "w") as fh:
        json.dump(report, fh, indent=1)
    with open(os.path.join(out_dir, "eval.csv"), "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=["frame", "iou", "angular_error_deg"])
        wr.writeheader()
        wr.writerows(rows)
    j = report["jaccard"]
    _say(args, f"mean IoU {report['mean_iou']:.4f}  Jaccard recall {j['recall']:.3f}  decay {j['decay']:.4f}")
    if report["angular_error_deg"] is not None:
        _say(args, f"angular error mean {report['angular_error_deg']:.3f} deg, "
                   f"median {report['median_angular_error_deg']:.3f} deg")
    _emit(args, report)
    return EXIT_OK


def rotation_suites(trials, tol, seed):
    """Orthonormality, nearest-rotation and double-cover checks on ``trials`` random inputs."""
    rng = np.random.default_rng(seed)
    eye = np.eye(3)
    worst = {"gram_schmidt_6d": 0.0, "svd_orthogonalize": 0.0, "svd_vs_polar": 0.0, "double_cover": 0.0}
    for _ in range(trials):
        for name, R in (("gram_schmidt_6d", gram_schmidt_6d(rng.normal(size=6))),
                        ("svd_orthogonalize", svd_orthogonalize(rng.normal(size=(3, 3))))):
            err = max(np.abs(R.T @ R - eye).max(), abs(np.linalg.det(R) - 1))
            worst[name] = max(worst[name], err)
        R = quat_to_matrix(rng.normal(size=4))
        M = R + 0.01 * rng.normal(size=(3, 3))
        worst["svd_vs_polar"] = max(worst["svd_vs_polar"], np.linalg.norm(svd_orthogonalize(M) - polar_rotation(M)))
        q = normalize_quat(rng.normal(size=4))
        qe = normalize_quat(q + 1e-4 * rng.normal(size=4))
        gap = abs(quat_loss_double_cover(q, qe) - quat_loss_double_cover(q, -qe))
        worst["double_cover"] = max(worst["double_cover"], gap)
    limits = {"gram_schmidt_6d": tol, "svd_orthogonalize": tol, "svd_vs_polar": 1e-8, "double_cover": 1e-6}
    return {k: (worst[k], limits[k], worst[k] < limits[k]) for k in worst}


def cmd_bench_rot(args):
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    t0 = time.perf_counter()
    results = rotation_suites(args.trials, args.tol, args.seed)
    elapsed = time.perf_counter() - t0
    for name, (worst, limit, ok) in results.items():
        _say(args, f"{name:20s} worst {worst:.3e}  limit {limit:.0e}  {'PASS' if ok else 'FAIL'}")
    _say(args, f"{args.trials} trials in {elapsed:.2f} s")
    _emit(args, {"trials": args.trials, "seconds": elapsed,
                 "suites": {k: {"worst": w, "limit": l, "pass": bool(ok)} for k, (w, l, ok) in results.items()}})
    return EXIT_OK if all(ok for _, _, ok in results.values()) else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--resolution", type=_resolution, default=128)
    common.add_argument("--out-dir")
    common.add_argument("--json", action="store_true", help="print a JSON document on stdout")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="kpose", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic scenario directory")
    p.add_argument("--shape", choices=SHAPES, default="bird_blob")
    p.add_argument("--kp", type=int, default=32)
    p.add_argument("--frames", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--outliers", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pose", parents=[common], help="recover per-frame poses from heatmaps")
    p.add_argument("--scenario", required=True)
    p.add_argument("--score-floor", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=RansacParams.inlier_threshold)
    p.add_argument("--max-iterations", type=int, default=RansacParams.max_iterations)
    p.set_defaults(func=cmd_pose)

    p = sub.add_parser("multiplex", parents=[common], help="fit a camera multiplex to a silhouette")
    p.add_argument("--mesh", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--n-az", type=int, default=8)
    p.add_argument("--n-el", type=int, default=5)
    p.add_argument("--prune", type=int, default=4)
    p.add_argument("--budget", type=int, default=300)
    p.add_argument("--render", action="store_true", help="also write each kept silhouette as PGM")
    p.set_defaults(func=cmd_multiplex)

    p = sub.add_parser("eval", parents=[common], help="IoU, angular error and Jaccard report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--pred", help="predicted poses JSON (default: <scenario>/poses_pred.json)")
    p.add_argument("--pred-masks", help="directory of NNNN_mask.pgm predictions")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench-rot", parents=[common], help="rotation representation property suites")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_bench_rot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except UsageError as err:
        print(f"kpose {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError) as err:
        print(f"kpose {args.command}: {err}", file=sys.stderr)
        return EXIT_IO
    except KposeError as err:
        print(f"kpose {args.command}: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
