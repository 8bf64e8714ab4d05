"""``denseflow`` command-line interface.

Subcommands: ``estimate``, ``evaluate``, ``visualize``, ``pyramid``,
``synth`` and ``benchmark``. Exit codes: 0 success, 1 validation or
format error, 2 numerical instability, 3 partial benchmark failure.
Every failure prints exactly one ``denseflow: error: ...`` line on
stderr.

``estimate`` and ``benchmark`` accept ``--config FILE``: a flat
``key = value`` file whose keys are long flag names (``alpha``,
``max-iter``, ...). Flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DenseFlowError, IngestionError, ParameterError, ShapeError
from .flow_io import (flow_to_color, load_scene_pair, read_flo_file,
                      write_color_png, write_flo_file)
from .horn_schunck import HsParams, hs_solve
from .imagery import read_image, write_png
from .lucas_kanade import LkParams, lk_solve_grid
from .metrics import evaluate_pair
from .multiresolution import MrParams, mrhs_solve
from .pyramid import build_pyramid
from .synthetic import SCENE_KINDS, make_scene

CSV_COLUMNS = ["scene", "frame", "method", "levels", "aae_deg", "epe_px",
               "iterations", "converged"]

#: Scenes, first frame and pyramid depth of the reference comparison.
DEFAULT_SCENES = [("alley_1", 1, 4), ("bamboo_2", 28, 4),
                  ("market_2", 41, 3), ("mountain_1", 35, 4)]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2
EXIT_PARTIAL = 3


class CliError(DenseFlowError):
    kind = "invalid arguments"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved here
    def error(self, message):
        raise CliError(message)


@dataclass
class RunConfig:
    method: str
    frame1: Path
    frame2: Path
    output: Path
    hs: HsParams = field(default_factory=HsParams)
    mr: MrParams | None = None
    lk: LkParams | None = None
    stride: int = 1
    viz: Path | None = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        hs = HsParams(alpha=args.alpha, epsilon=args.epsilon,
                      max_iterations=args.max_iter,
                      convergence_threshold=args.tol)
        config = cls(method=args.method, frame1=Path(args.frame1),
                     frame2=Path(args.frame2), output=Path(args.output), hs=hs,
                     stride=args.stride,
                     viz=Path(args.viz) if args.viz else None)
        if args.method == "mrhs":
            config.mr = MrParams(levels=args.levels, hs=hs)
        elif args.method == "lk":
            config.lk = LkParams(window_radius=args.window_radius,
                                 min_eigenvalue=args.min_eig)
            if args.stride < 1:
                raise ParameterError(f"stride must be >= 1, got {args.stride}")
        config.validate_paths()
        return config

    def validate_paths(self) -> None:
        for p in (self.frame1, self.frame2):
            if not p.is_file():
                raise IngestionError(f"missing input {p}")
        for p in (self.output, self.viz):
            if p is not None and not p.resolve().parent.is_dir():
                raise IngestionError(f"output directory {p.resolve().parent} does not exist")
        if self.viz is not None and self.method == "lk":
            raise ParameterError("--viz is only available for dense methods (hs, mrhs)")


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IngestionError(f"cannot read config {path}: {exc.strerror}") from None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("_", "-")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    by_flag = {}
    for action in parser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action
    defaults = {}
    for key, raw in values.items():
        action = by_flag.get(key)
        if action is None or key == "config":
            raise ParameterError(f"unknown config key {key!r}")
        if action.nargs in ("+", "*"):
            items = raw.replace(",", " ").split()
            defaults[action.dest] = [action.type(x) if action.type else x for x in items]
        else:
            value = action.type(raw) if action.type else raw
            if action.choices is not None and value not in action.choices:
                raise ParameterError(f"config {key}: {value!r} not in {list(action.choices)}")
            defaults[action.dest] = value
    parser.set_defaults(**defaults)


def _dims(image) -> str:
    return f"{image.shape[1]}x{image.shape[0]}"


def _add_hs_flags(p: argparse.ArgumentParser) -> None:
    d = HsParams()
    p.add_argument("--alpha", type=float, default=d.alpha, help="regularization weight")
    p.add_argument("--epsilon", type=float, default=d.epsilon, help="division guard")
    p.add_argument("--max-iter", type=int, default=d.max_iterations,
                   help="iteration cap per solve")
    p.add_argument("--tol", type=float, default=d.convergence_threshold,
                   help="stop when the L2 flow change falls below this")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="denseflow", description="Classical optical flow toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", formatter_class=fmt,
                       help="estimate flow between two frames")
    p.add_argument("frame1")
    p.add_argument("frame2")
    p.add_argument("-o", "--output", required=True,
                   help=".flo output (CSV of points for --method lk)")
    p.add_argument("--method", choices=["lk", "hs", "mrhs"], default="hs",
                   help="estimator")
    _add_hs_flags(p)
    p.add_argument("--levels", type=int, default=MrParams().levels,
                   help="pyramid depth for mrhs")
    lk = LkParams()
    p.add_argument("--window-radius", type=int, default=lk.window_radius,
                   help="lk window half-size")
    p.add_argument("--min-eig", type=float, default=lk.min_eigenvalue,
                   help="lk minimum structure-tensor eigenvalue")
    p.add_argument("--stride", type=int, default=1, help="lk grid spacing")
    p.add_argument("--viz", default=None, help="also write a colour-coded PNG")
    p.add_argument("--config", default=None, help="key = value file of flag defaults")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("evaluate", formatter_class=fmt,
                       help="compare an estimate against ground truth")
    p.add_argument("estimate")
    p.add_argument("ground_truth")
    p.add_argument("--mask", default=None,
                   help="PNG whose nonzero pixels are evaluated")
    p.add_argument("--csv", default=None, help="append a result row to this CSV")
    p.add_argument("--scene", default="", help="scene label for the CSV row")
    p.add_argument("--frame", default="", help="frame label for the CSV row")
    p.add_argument("--method", default="", help="method label for the CSV row")
    p.add_argument("--levels", default="", help="levels label for the CSV row")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("visualize", formatter_class=fmt,
                       help="render a .flo with the colour wheel")
    p.add_argument("flow")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--max-mag", type=float, default=None,
                   help="magnitude shown fully saturated (default: 99th percentile)")
    p.set_defaults(func=cmd_visualize)

    p = sub.add_parser("pyramid", formatter_class=fmt,
                       help="dump the Gaussian pyramid of an image")
    p.add_argument("input")
    p.add_argument("--levels", type=int, default=4, help="number of levels to write")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pyramid)

    p = sub.add_parser("synth", formatter_class=fmt,
                       help="write a synthetic frame pair with ground truth")
    p.add_argument("--kind", default="translation",
                   help=f"one of {', '.join(SCENE_KINDS)}")
    p.add_argument("--dx", type=float, default=1.0, help="translation x (px)")
    p.add_argument("--dy", type=float, default=0.0, help="translation y (px)")
    p.add_argument("--angle", type=float, default=2.0, help="rotation (degrees)")
    p.add_argument("--scale", type=float, default=1.05, help="zoom factor")
    p.add_argument("--width", type=int, default=64, help="frame width")
    p.add_argument("--height", type=int, default=64, help="frame height")
    p.add_argument("--seed", type=int, default=0, help="texture seed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("benchmark", formatter_class=fmt,
                       help="HS vs MR-HS table over Sintel scenes")
    p.add_argument("root", help="Sintel root (containing training/) or its training dir")
    p.add_argument("--scenes", nargs="+", default=[s for s, _, _ in DEFAULT_SCENES],
                   help="scene names")
    p.add_argument("--frames", nargs="+", type=int,
                   default=[f for _, f, _ in DEFAULT_SCENES],
                   help="first frame per scene")
    p.add_argument("--levels", nargs="+", type=int,
                   default=[lv for _, _, lv in DEFAULT_SCENES],
                   help="mrhs pyramid depth per scene")
    p.add_argument("--methods", nargs="+", choices=["hs", "mrhs"], default=["hs", "mrhs"],
                   help="methods to run")
    p.add_argument("--pass", dest="render_pass", default="final", help="clean or final")
    p.add_argument("--csv", default=None, help="write the table here instead of stdout")
    _add_hs_flags(p)
    p.add_argument("--config", default=None, help="key = value file of flag defaults")
    p.set_defaults(func=cmd_benchmark)
    return parser


def _trace_summary(label, trace) -> str:
    return (f"{label}: iterations={trace.iterations_run} converged={trace.converged} "
            f"final_delta={trace.final_delta:.3e}")


def cmd_estimate(args, out) -> int:
    config = RunConfig.from_args(args)
    frame1 = read_image(config.frame1)
    frame2 = read_image(config.frame2)
    if frame1.shape != frame2.shape:
        raise ShapeError(f"frames differ in size: {_dims(frame1)} vs {_dims(frame2)}")

    if config.method == "lk":
        sparse = lk_solve_grid(frame1, frame2, config.stride, config.lk)
        config.output.write_text(sparse.to_csv())
        print(f"lk: points={len(sparse.points)} accepted={len(sparse.accepted())}", file=out)
        return EXIT_OK

    if config.method == "hs":
        flow, trace = hs_solve(frame1, frame2, None, config.hs)
        print(_trace_summary("hs", trace), file=out)
    else:
        flow, mtrace = mrhs_solve(frame1, frame2, config.mr)
        print(f"mrhs: actual_levels={mtrace.actual_levels}", file=out)
        for level, trace in mtrace.per_level:
            print(_trace_summary(f"  level {level}", trace), file=out)
    write_flo_file(config.output, flow)
    if config.viz is not None:
        write_color_png(config.viz, flow_to_color(flow))
    return EXIT_OK


def _append_csv(path, row) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if new:
            writer.writerow(CSV_COLUMNS)
        writer.writerow(row)


def cmd_evaluate(args, out) -> int:
    est = read_flo_file(args.estimate)
    gt = read_flo_file(args.ground_truth)
    mask = None
    if args.mask:
        mask = read_image(args.mask) > 0
    report = evaluate_pair(est, gt, mask)
    print(report.format(), file=out)
    if args.csv:
        _append_csv(args.csv, [args.scene, args.frame, args.method, args.levels,
                               f"{report.aae_degrees:.6f}", f"{report.epe_pixels:.6f}",
                               "", ""])
    return EXIT_OK


def cmd_visualize(args, out) -> int:
    flow = read_flo_file(args.flow)
    write_color_png(args.output, flow_to_color(flow, args.max_mag))
    return EXIT_OK


def cmd_pyramid(args, out) -> int:
    image = read_image(args.input)
    pyr = build_pyramid(image, args.levels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for k, level in enumerate(pyr.levels):
        write_png(out_dir / f"level_{k}.png", level)
        print(f"level {k}: {_dims(level)}", file=out)
    return EXIT_OK


def cmd_synth(args, out) -> int:
    params = {"translation": {"dx": args.dx, "dy": args.dy},
              "rotation": {"angle_deg": args.angle},
              "zoom": {"scale": args.scale}}
    if args.kind not in params:
        raise ParameterError(f"unknown kind {args.kind!r}; expected one of {SCENE_KINDS}")
    scene = make_scene(args.kind, args.width, args.height, args.seed, **params[args.kind])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_png(out_dir / "frame_0001.png", scene.frame1)
    write_png(out_dir / "frame_0002.png", scene.frame2)
    write_flo_file(out_dir / "frame_0001.flo", scene.gt)
    print(f"wrote {out_dir}/frame_0001.png, frame_0002.png, frame_0001.flo", file=out)
    return EXIT_OK


def _sintel_dirs(root: Path, scene: str, render_pass: str):
    training = root / "training" if (root / "training").is_dir() else root
    return training / render_pass / scene, training / "flow" / scene


def run_benchmark(root, scenes, frames, levels, methods, hs: HsParams,
                  render_pass="final"):
    """Evaluate each method on each scene.

    Returns ``(rows, failures)``: CSV rows in scene order (followed by one
    average row per method) and a list of ``(scene, message)`` for scenes
    that could not be processed.
    """
    if not scenes:
        raise ParameterError("no scenes given")
    if not (len(scenes) == len(frames) == len(levels)):
        raise ParameterError(
            f"--scenes, --frames and --levels need equal lengths, got "
            f"{len(scenes)}, {len(frames)}, {len(levels)}"
        )
    root = Path(root)
    rows, failures = [], []
    totals = {m: [] for m in methods}
    for scene, frame, depth in zip(scenes, frames, levels):
        frames_dir, flow_dir = _sintel_dirs(root, scene, render_pass)
        try:
            frame1, frame2, gt = load_scene_pair(frames_dir, frame, flow_dir)
            scene_rows = []
            for method in methods:
                if method == "hs":
                    flow, trace = hs_solve(frame1, frame2, None, hs)
                    iterations, converged, used_levels = trace.iterations_run, trace.converged, 1
                else:
                    flow, mtrace = mrhs_solve(frame1, frame2, MrParams(levels=depth, hs=hs))
                    iterations = sum(t.iterations_run for _, t in mtrace.per_level)
                    converged = all(t.converged for _, t in mtrace.per_level)
                    used_levels = mtrace.actual_levels
                report = evaluate_pair(flow, gt)
                totals[method].append(report)
                scene_rows.append([scene, frame, method, used_levels,
                                   f"{report.aae_degrees:.4f}", f"{report.epe_pixels:.4f}",
                                   iterations, int(converged)])
            rows.extend(scene_rows)
        except DenseFlowError as exc:
            failures.append((scene, str(exc)))
    for method in methods:
        reports = totals[method]
        if reports:
            rows.append(["average", "", method, "",
                         f"{np.mean([r.aae_degrees for r in reports]):.4f}",
                         f"{np.mean([r.epe_pixels for r in reports]):.4f}", "", ""])
    return rows, failures


def cmd_benchmark(args, out) -> int:
    hs = HsParams(alpha=args.alpha, epsilon=args.epsilon,
                  max_iterations=args.max_iter, convergence_threshold=args.tol)
    rows, failures = run_benchmark(args.root, args.scenes, args.frames, args.levels,
                                   args.methods, hs, args.render_pass)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    if args.csv:
        Path(args.csv).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    if failures:
        detail = "; ".join(f"{scene}: {msg}" for scene, msg in failures)
        print(f"denseflow: error: partial failure: {len(failures)} scene(s) failed: {detail}",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _one_line(text: str) -> str:
    return " ".join(str(text).split())


def main(argv=None, out=None) -> int:
    """Run the CLI and return its exit status."""
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            subparser = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(subparser, read_config_file(args.config))
            args = parser.parse_args(argv)
        return args.func(args, out)
    except DenseFlowError as exc:
        print(f"denseflow: error: {exc.kind}: {_one_line(exc)}", file=sys.stderr)
        return exc.exit_code


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
