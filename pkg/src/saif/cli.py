"""Command-line surface for corpus generation, pipeline runs,
evaluation, sweeps, and diagnostics.

Exit codes: 0 success, 2 bad arguments, 3 incomplete or malformed
inputs, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .backends.base import CountingSegmenter
from .backends.synthetic import DEFAULT_ETA, DEFAULT_KAPPA, SyntheticSegmenter
from .config import SEED_ENV_VAR, parse_scales, resolve_config
from .errors import (DegenerateFamilyError, InputIncompleteError,
                     IntegrityError, InvalidArgumentError, MapFormatError)
from .family import build_family
from .formats import atomic_write_text
from .harness.evaluate import evaluate_run
from .harness.gen import generate_corpus, load_scene
from .harness.requests import export_requests
from .harness.runner import derive_prompt, run_corpus
from .harness.specs import (BACKENDS, MODES, RunSpec, SweepSpec, SWEEP_AXES,
                            canonical_mode)
from .harness.sweep import run_sweep
from .stability import compute_score_table, format_score_table
from .thresholds import build_threshold_set

_MODE_CHOICES = list(MODES) + ["I", "II", "III", "IV", "i", "ii", "iii", "iv"]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("pipeline configuration")
    g.add_argument("--config", metavar="FILE",
                   help="key=value config file; flags override it")
    g.add_argument("--scales", type=parse_scales, metavar="S1,S2,...")
    g.add_argument("--n", dest="n_outer", type=int, metavar="N")
    g.add_argument("--k", dest="k_inner", type=int, metavar="K")
    g.add_argument("--m-grid", dest="m_grid", type=int, metavar="M")
    g.add_argument("--delta-out", dest="delta_out", type=float)
    g.add_argument("--delta-in", dest="delta_in", type=float)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--eps", type=float)
    g.add_argument("--tau-margin", dest="tau_margin", type=float)
    g.add_argument("--tau-min", dest="tau_min", type=float)
    g.add_argument("--tau-max", dest="tau_max", type=float)
    g.add_argument("--a-min", dest="a_min", type=float)
    g.add_argument("--a-max", dest="a_max", type=float)
    g.add_argument("--top-n", dest="top_n", type=int)
    g.add_argument("--seed", type=int,
                   help=f"RNG seed (falls back to ${SEED_ENV_VAR}, then 0)")
    g.add_argument("--min-box-px", dest="min_box_px", type=int)


_CONFIG_KEYS = ("scales", "n_outer", "k_inner", "m_grid", "delta_out",
                "delta_in", "lam", "gamma", "eps", "tau_margin", "tau_min",
                "tau_max", "a_min", "a_max", "top_n", "seed", "min_box_px")


def _config_from_args(args: argparse.Namespace):
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    return resolve_config(getattr(args, "config", None), overrides)


def _env_seed_default() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    return int(raw) if raw else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saif",
        description="Stability-aware box-prompted segmentation harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--out", required=True, help="corpus root directory")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--blobs", type=int, nargs=2, default=(1, 3),
                   metavar=("LO", "HI"))
    p.add_argument("--radius-frac", type=float, nargs=2, default=(0.06, 0.14),
                   metavar=("LO", "HI"))
    p.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    p.add_argument("--eta", type=float, default=DEFAULT_ETA)

    p = sub.add_parser("run", help="run the pipeline over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=_MODE_CHOICES, default="full-saif")
    p.add_argument("--backend", choices=list(BACKENDS), default="synthetic")
    p.add_argument("--box-noise", type=float, default=0.08)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--save-maps", action="store_true",
                   help="write predicted maps back into the corpus")
    _add_config_flags(p)

    p = sub.add_parser("eval", help="score a run against ground truth")
    p.add_argument("--pred", required=True, help="run output directory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--spacing", type=float, nargs=2, default=(1.0, 1.0),
                   metavar=("SY", "SX"))

    p = sub.add_parser("sweep", help="sweep one hyper-parameter axis")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--axis", choices=list(SWEEP_AXES), required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated integer values")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--box-noise", type=float, default=0.08)
    p.add_argument("--workers", type=int, default=1)
    _add_config_flags(p)

    p = sub.add_parser("dump-scores",
                       help="print the per-(candidate, threshold) score table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--image-id", required=True)
    p.add_argument("--out", help="write TSV here instead of stdout")
    p.add_argument("--box-noise", type=float, default=0.08)
    _add_config_flags(p)

    p = sub.add_parser("export-requests",
                       help="write per-image box-request manifests")
    p.add_argument("--corpus", required=True)
    p.add_argument("--box-noise", type=float, default=0.08)
    _add_config_flags(p)
    return parser


def _cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed_default()
    ids = generate_corpus(args.out, args.count, args.width, args.height, seed,
                          n_blobs=tuple(args.blobs),
                          radius_frac=tuple(args.radius_frac),
                          kappa=args.kappa, eta=args.eta)
    print(f"wrote {len(ids)} scenes under {args.out}")
    return 0


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    spec = RunSpec(corpus=args.corpus, out_dir=args.out, cfg=cfg,
                   mode=canonical_mode(args.mode), backend=args.backend,
                   box_noise=args.box_noise, workers=args.workers,
                   save_maps=args.save_maps)
    results = run_corpus(spec)
    print(f"ran {len(results)} images ({spec.mode}) -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    report = evaluate_run(args.pred, args.corpus, spacing=tuple(args.spacing))
    sys.stdout.write(report.format_summary())
    return 0


def _cmd_sweep(args) -> int:
    try:
        values = tuple(int(tok) for tok in args.values.split(",") if tok.strip())
    except ValueError as exc:
        raise InvalidArgumentError(f"bad sweep values {args.values!r}") from exc
    cfg = _config_from_args(args)
    base = RunSpec(corpus=args.corpus, out_dir=args.out, cfg=cfg,
                   box_noise=args.box_noise, workers=args.workers)
    spec = SweepSpec(axis=args.axis, values=values, base=base, reps=args.reps)
    csv_path = os.path.join(args.out, "sweep.csv")
    rows = run_sweep(spec, csv_path=csv_path)
    print(f"swept {len(rows)} cells -> {csv_path}")
    return 0


def _cmd_dump_scores(args) -> int:
    cfg = _config_from_args(args)
    scene = load_scene(args.corpus, args.image_id)
    prompt = derive_prompt(scene.gt_box, args.box_noise, cfg.seed,
                           scene.image_id)
    family = build_family(prompt, cfg, scene.width, scene.height,
                          image_id=scene.image_id)
    segmenter = CountingSegmenter(SyntheticSegmenter())
    maps = {(i, k): segmenter.predict(scene, box) for i, k, box in family.boxes()}
    base = family.outer[0]
    tset = build_threshold_set(maps[(base.index, 1)], base.box, cfg)
    table = compute_score_table(family, maps, tset, cfg)
    text = format_score_table(table)
    if args.out:
        atomic_write_text(args.out, text)
        print(f"wrote score table -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_export_requests(args) -> int:
    cfg = _config_from_args(args)
    ok, degenerate = export_requests(args.corpus, cfg, args.box_noise)
    print(f"exported requests for {len(ok)} images under {args.corpus}")
    if degenerate:
        print(f"saif: {len(degenerate)} images had no usable prompts: "
              f"{', '.join(degenerate)}", file=sys.stderr)
        return 3
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "run": _cmd_run,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "dump-scores": _cmd_dump_scores,
    "export-requests": _cmd_export_requests,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InvalidArgumentError as exc:
        print(f"saif: error: {exc}", file=sys.stderr)
        return 2
    except (InputIncompleteError, DegenerateFamilyError, MapFormatError,
            IntegrityError) as exc:
        print(f"saif: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"saif: i/o error: {exc}", file=sys.stderr)
        return 4


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
