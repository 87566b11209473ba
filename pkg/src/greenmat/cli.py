"""Batch command-line front end: compose | gsg | refine | eval | verify.

Every command is deterministic given (inputs, config, seed); JSON reports are
written with sorted keys so reruns are byte-identical.  Exit codes: 0 on
success, 1 when any item or check fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _verify, composer, greenpost, metrics
from .core import load_image, load_matte, make_rng, save_image, save_matte

IMAGE_EXTS = (".png", ".jpg", ".jpeg")


def _seed_default() -> int:
    env = os.environ.get("GREENMAT_SEED")
    return int(env) if env else 0


def _load_config(path) -> dict:
    if not path:
        return {}
    with open(path) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def _opt(args, cfg: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _list_images(directory):
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise FileNotFoundError(f"cannot read directory {directory}: {exc}") from exc
    return [n for n in names if n.lower().endswith(IMAGE_EXTS)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_compose(args) -> int:
    cfg = _load_config(args.config)
    jobs = int(_opt(args, cfg, "jobs", 1))
    with open(args.manifest) as f:
        items = json.load(f)
    if not items:
        print("warning: empty manifest, nothing to compose")
        return 0

    def run(item):
        try:
            fg = load_image(item["fg"])
            alpha = load_matte(item["alpha"])
            canvas = tuple(item.get("canvas", composer.GREEN_CANVAS))
            out = composer.composite_on_green(fg, alpha, canvas)
            save_image(item["out"], out)
            return (item["out"], None)
        except Exception as exc:  # noqa: BLE001 - per-item reporting
            return (item.get("out", "?"), f"{type(exc).__name__}: {exc}")

    failures = 0
    for out_path, err in _map_jobs(run, items, jobs):
        if err is None:
            print(f"ok    {out_path}")
        else:
            failures += 1
            print(f"fail  {out_path}: {err}", file=sys.stderr)
    return 1 if failures else 0


def cmd_gsg(args) -> int:
    cfg = _load_config(args.config)
    seed = int(_opt(args, cfg, "seed", _seed_default()))
    k = int(_opt(args, cfg, "kmeans_k", 5))
    jobs = int(_opt(args, cfg, "jobs", 1))
    names = _list_images(args.dir)
    if not names:
        print(f"error: no images found in {args.dir}", file=sys.stderr)
        return 1

    def run(name):
        img = load_image(os.path.join(args.dir, name))
        if img.shape[2] == 4:
            img = img[..., :3]
        if img.shape[2] != 3:
            raise ValueError(f"{name}: need a 3-channel image")
        return greenpost.gsg_score(img, k=k, rng=make_rng(seed))

    scores = _map_jobs(run, names, jobs)
    report = {
        "per_image": [{"name": n, "gsg": s} for n, s in zip(names, scores)],
        "mean": float(np.mean(scores)),
    }
    if args.out:
        _write_json(args.out, report)
    for entry in report["per_image"]:
        print(f"{entry['gsg']:12.4f}  {entry['name']}")
    print(f"{report['mean']:12.4f}  MEAN")
    return 0


def _refine_params(args, cfg) -> greenpost.RefineParams:
    sat = _opt(args, cfg, "saturation_distance", None)
    if sat is None:
        sat = greenpost.RefineParams().saturation_distance
    elif isinstance(sat, str):
        sat = None if sat == "auto" else float(sat)
    return greenpost.RefineParams(
        kmeans_k=int(_opt(args, cfg, "kmeans_k", 3)),
        seed=int(_opt(args, cfg, "seed", _seed_default())),
        saturation_distance=sat,
        smooth_iters=int(_opt(args, cfg, "smooth_iters", 2)),
        fg_core_threshold=float(_opt(args, cfg, "fg_core_threshold", 0.9)),
    )


def cmd_refine(args) -> int:
    cfg = _load_config(args.config)
    params = _refine_params(args, cfg)
    try:
        img = load_image(args.img)
        if img.shape[2] == 4:
            img = img[..., :3]
        coarse = load_matte(args.coarse)
        matte = greenpost.green_post(img, coarse, params)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    save_matte(args.out, matte)
    print(f"ok    {args.out}")
    if args.rgba:
        rgba = np.concatenate([img, matte[..., None]], axis=2)
        save_image(args.rgba, rgba)
        print(f"ok    {args.rgba}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    jobs = int(_opt(args, cfg, "jobs", 1))
    sigma = float(_opt(args, cfg, "grad_sigma", 1.4))
    step = float(_opt(args, cfg, "conn_step", 0.1))
    pred_names = set(_list_images(args.pred_dir))
    gt_names = set(_list_images(args.gt_dir))
    if pred_names != gt_names:
        only_pred = sorted(pred_names - gt_names)
        only_gt = sorted(gt_names - pred_names)
        print(f"error: filename sets differ; only in pred: {only_pred}; only in gt: {only_gt}", file=sys.stderr)
        return 1
    if not pred_names:
        print("error: no image pairs to evaluate", file=sys.stderr)
        return 1
    names = sorted(pred_names)

    def run(name):
        pred = load_matte(os.path.join(args.pred_dir, name))
        gt = load_matte(os.path.join(args.gt_dir, name))
        return metrics.evaluate_pair(name, pred, gt, sigma=sigma, step=step)

    report = metrics.MetricsReport(per_image=_map_jobs(run, names, jobs))
    print(report.to_table())
    if args.out:
        _write_json(args.out, report.to_json_dict())
    return 0


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    seed = int(_opt(args, cfg, "seed", _seed_default()))
    results = _verify.run_all(seed=seed, fault=args.inject_fault)
    if args.json:
        payload = {
            "checks": [
                {"name": r.name, "tolerance": r.tolerance, "observed": r.observed, "passed": r.passed}
                for r in results
            ],
            "passed": all(r.passed for r in results),
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for r in results:
            print(r.line())
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenmat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="RNG seed (default: $GREENMAT_SEED or 0)")
        p.add_argument("--jobs", type=int, help="worker threads (default 1)")

    p = sub.add_parser("compose", help="render green-screen composites from a manifest")
    common(p)
    p.add_argument("manifest", help="JSON list of {fg, alpha, out, canvas}")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("gsg", help="green-screen quality score for a directory of images")
    common(p)
    p.add_argument("dir")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--kmeans-k", dest="kmeans_k", type=int)
    p.set_defaults(func=cmd_gsg)

    p = sub.add_parser("refine", help="refine a coarse mask to an alpha matte")
    common(p)
    p.add_argument("img")
    p.add_argument("coarse")
    p.add_argument("--out", required=True, help="output matte PNG")
    p.add_argument("--rgba", help="optional RGBA export combining image and matte")
    p.add_argument("--kmeans-k", dest="kmeans_k", type=int)
    p.add_argument("--saturation-distance", dest="saturation_distance", help="float or 'auto'")
    p.add_argument("--smooth-iters", dest="smooth_iters", type=int)
    p.add_argument("--fg-core-threshold", dest="fg_core_threshold", type=float)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("eval", help="SAD/MSE/Grad/Conn over matched matte directories")
    common(p)
    p.add_argument("pred_dir")
    p.add_argument("gt_dir")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--grad-sigma", dest="grad_sigma", type=float)
    p.add_argument("--conn-step", dest="conn_step", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run the algebraic/oracle verification suite")
    common(p)
    p.add_argument("--json", action="store_true", help="machine-readable results")
    p.add_argument("--inject-fault", choices=["dice-grad"], help="negative control: corrupt a gradient")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
