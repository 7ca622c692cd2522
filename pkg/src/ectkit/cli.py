"""Command-line interface.

Exit codes: 0 success, 1 validation or usage error, 2 I/O or file-format
error, 3 optimization diverged.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fileio
from .complex import (
    GeometricSimplicialComplex,
    InvalidComplexError,
    euler_characteristic,
    from_point_cloud,
    from_triangle_mesh,
    normalize_points,
    normalize_to_unit_ball,
)
from .ect_diff import soft_ecc, soft_ect
from .ect_exact import ThresholdGrid, ecc, ect, per_direction_grid
from .filtration import DirectionSet
from .optimize import (
    DivergenceError,
    OptimizeConfig,
    chamfer_distance,
    diameter,
    learn_coordinates,
    learn_directions,
)
from .sampling import (
    DEFAULT_NOISE_SIGMA,
    RNG_ALGORITHM,
    generate_double_annulus,
    generate_noisy_circle,
    sample_angles_uniform,
    sample_directions_uniform,
)

log = logging.getLogger("ectkit")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_DIVERGED = 0, 1, 2, 3

# experiment defaults, fixed by tuning runs on the synthetic double annulus
LEARN_DIRECTIONS_DEFAULTS = dict(k=32, l=64, lam=3.0, steps=1000, lr=0.01)
LEARN_COORDINATES_DEFAULTS = dict(k=256, l=256, lam=100.0, steps=300, lr=0.01)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def load_complex(path: str, *, normalize: bool = False) -> GeometricSimplicialComplex:
    """OFF files become triangle meshes; anything else is read as a point cloud."""
    if Path(path).suffix.lower() == ".off":
        coords, tris = fileio.read_off_mesh(path)
        K = from_triangle_mesh(coords, tris)
    else:
        K = from_point_cloud(fileio.read_point_cloud_text(path))
    return normalize_to_unit_ball(K).complex if normalize else K


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def cmd_chi(args) -> int:
    K = load_complex(args.input)
    _emit(f"{euler_characteristic(K)}\n")
    return EXIT_OK


def _single_direction(args, d: int) -> np.ndarray:
    if args.angle is not None:
        if d != 2:
            raise ValueError("--angle needs a planar input (d = 2)")
        return np.array([np.cos(args.angle), np.sin(args.angle)])
    w = np.asarray(args.direction, dtype=np.float64)
    norm = np.linalg.norm(w)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    return w / norm


def cmd_ecc(args) -> int:
    K = load_complex(args.input, normalize=args.normalize)
    w = _single_direction(args, K.d)
    t = np.linspace(args.tmin, args.tmax, args.l)
    values = ecc(K, w, t) if args.lam is None else soft_ecc(K, w, t, args.lam)
    lines = ["t,value"] + [f"{fileio._fmt(a)},{fileio._fmt(b)}" for a, b in zip(t, values)]
    _emit("\n".join(lines) + "\n")
    if args.plot:
        from .plotting import save_ecc_plot

        save_ecc_plot(t, {"ECC": values}, args.plot)
    return EXIT_OK


def cmd_ect(args) -> int:
    K = load_complex(args.input, normalize=args.normalize)
    W = sample_directions_uniform(args.k, K.d, args.seed)
    if args.strategy == "global":
        grid = (
            per_direction_grid(K, W, args.l, shared_range=True)
            if args.shared_range
            else ThresholdGrid.linear(args.l, args.tmin, args.tmax)
        )
    else:
        grid = per_direction_grid(K, W, args.l)
    M = ect(K, W, grid) if args.lam is None else soft_ect(K, W, grid, args.lam)
    if args.out is None:
        _emit(fileio.matrix_csv_text(M))
        return EXIT_OK
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    meta = {"seed": args.seed, "source": Path(args.input).name, "rng": RNG_ALGORITHM.replace(" ", "_")}
    meta["config_hash"] = fileio.config_hash(
        dict(k=args.k, l=args.l, strategy=args.strategy, lam=args.lam, seed=args.seed,
             tmin=args.tmin, tmax=args.tmax, shared_range=args.shared_range, normalize=args.normalize)
    )
    digest = fileio.write_archive(M, f"{prefix}.ectkit", meta)
    fileio.write_matrix_csv(M, f"{prefix}.csv")
    fileio.write_matrix_pgm(M, f"{prefix}.pgm")
    outputs = [f"{prefix}.ectkit", f"{prefix}.csv", f"{prefix}.pgm"]
    if args.plot:
        from .plotting import save_ect_heatmap

        outputs.append(str(save_ect_heatmap(M, f"{prefix}.png")))
        outputs.append(str(save_ect_heatmap(M, f"{prefix}_columns.png", column_normalized=True)))
    _emit("".join(f"wrote,{p}\n" for p in outputs) + f"sha256,{digest}\n")
    return EXIT_OK


def _trace_csv(trace) -> str:
    rows = ["step,loss"] + [f"{s},{fileio._fmt(v)}" for s, v in trace.records()]
    rows.append(f"final,{fileio._fmt(trace.final_loss)}")
    return "\n".join(rows) + "\n"


def _experiment_meta(name: str, config: OptimizeConfig, extra: dict) -> dict:
    meta = {"experiment": name, "seed": config.seed, "rng": RNG_ALGORITHM.replace(" ", "_")}
    meta.update(extra)
    meta["config_hash"] = fileio.config_hash({**config.as_dict(), **extra})
    return meta


def cmd_learn_directions(args) -> int:
    config = OptimizeConfig(steps=args.steps, learning_rate=args.lr, seed=args.seed,
                            lam=args.lam, k=args.k, l=args.l, log_every=args.log_every)
    if args.input:
        K = load_complex(args.input, normalize=args.normalize)
        source = Path(args.input).name
    else:
        K = from_point_cloud(generate_double_annulus(args.n, args.seed))
        source = f"double_annulus_n{args.n}"
    if K.d != 2:
        raise ValueError("learn-directions needs planar input")
    grid = ThresholdGrid.linear(args.l)
    W_true = DirectionSet.from_angles(sample_angles_uniform(args.k, args.seed))
    target = ect(K, W_true, grid) if args.exact_target else soft_ect(K, W_true, grid, args.lam)
    trace = learn_directions(target, K, config)

    W_init = DirectionSet.from_angles(trace.initial_parameters)
    W_final = DirectionSet.from_angles(trace.parameters)
    initial = soft_ect(K, W_init, grid, args.lam)
    learned = soft_ect(K, W_final, grid, args.lam)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _experiment_meta("learn-directions", config,
                            {"source": source, "target": "exact" if args.exact_target else "smooth"})
    digests = {
        "target.ectkit": fileio.write_archive(target, out / "target.ectkit", meta),
        "learned.ectkit": fileio.write_archive(learned, out / "learned.ectkit", meta),
    }
    fileio.atomic_write_text(out / "trace.csv", _trace_csv(trace))
    fileio.atomic_write_text(
        out / "angles.csv",
        "index,target,initial,learned\n" + "".join(
            f"{j},{fileio._fmt(a)},{fileio._fmt(b)},{fileio._fmt(c)}\n"
            for j, (a, b, c) in enumerate(zip(W_true.angles, W_init.angles, trace.parameters))
        ),
    )
    if args.plot:
        from .plotting import save_ect_heatmap, save_loss_curve

        save_loss_curve(trace.steps, trace.losses, out / "loss.png", title="learn directions")
        for name, M in (("target", target), ("initial", initial), ("learned", learned)):
            save_ect_heatmap(M, out / f"ect_{name}.png", title=name)
    log.info("learn-directions finished in %.2f s", trace.wall_time)
    _emit(_summary(trace, digests))
    return EXIT_OK


def cmd_learn_coordinates(args) -> int:
    config = OptimizeConfig(steps=args.steps, learning_rate=args.lr, seed=args.seed,
                            lam=args.lam, k=args.k, l=args.l, log_every=args.log_every)
    if args.target:
        X_target = fileio.read_point_cloud_text(args.target)
        source = Path(args.target).name
    else:
        X_target = generate_double_annulus(args.n, args.seed)
        source = f"double_annulus_n{args.n}"
    if args.init:
        X0 = fileio.read_point_cloud_text(args.init)
    else:
        X0 = generate_noisy_circle(X_target.shape[0], args.seed, args.noise)
    if args.normalize:
        X_target = normalize_points(X_target)[0]
        X0 = normalize_points(X0)[0]
    if X_target.shape[1] != X0.shape[1]:
        raise ValueError("target and initial clouds have different dimensions")
    W = sample_directions_uniform(args.k, X_target.shape[1], args.seed)
    grid = ThresholdGrid.linear(args.l)
    target = soft_ect(from_point_cloud(X_target), W, grid, args.lam)
    trace = learn_coordinates(target, X0, W, config, target_n=X_target.shape[0])
    learned = soft_ect(from_point_cloud(trace.parameters), W, grid, args.lam)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _experiment_meta("learn-coordinates", config, {"source": source, "noise": args.noise})
    digests = {
        "target.ectkit": fileio.write_archive(target, out / "target.ectkit", meta),
        "learned.ectkit": fileio.write_archive(learned, out / "learned.ectkit", meta),
    }
    fileio.atomic_write_text(out / "trace.csv", _trace_csv(trace))
    fileio.write_point_cloud_text(out / "target_points.txt", X_target)
    fileio.write_point_cloud_text(out / "initial_points.txt", X0)
    fileio.write_point_cloud_text(out / "learned_points.txt", trace.parameters)
    if args.plot:
        from .plotting import save_loss_curve, save_point_clouds

        save_loss_curve(trace.steps, trace.losses, out / "loss.png", title="learn coordinates")
        if X_target.shape[1] == 2:
            save_point_clouds(
                {"original": X_target, "initial": X0, "learned": trace.parameters},
                out / "point_clouds.png",
                overlay=("original", "learned"),
            )
    extra = ""
    if X_target.shape[0] == X0.shape[0]:
        extra = (f"chamfer,{fileio._fmt(chamfer_distance(trace.parameters, X_target))}\n"
                 f"target_diameter,{fileio._fmt(diameter(X_target))}\n")
    log.info("learn-coordinates finished in %.2f s", trace.wall_time)
    _emit(_summary(trace, digests) + extra)
    return EXIT_OK


def _summary(trace, digests: dict) -> str:
    lines = [
        f"steps,{len(trace.steps)}",
        f"initial_loss,{fileio._fmt(trace.initial_loss)}",
        f"final_loss,{fileio._fmt(trace.final_loss)}",
    ]
    lines += [f"sha256:{name},{digest}" for name, digest in digests.items()]
    return "\n".join(lines) + "\n"


def cmd_normalize(args) -> int:
    if Path(args.input).suffix.lower() == ".off":
        coords, tris = fileio.read_off_mesh(args.input)
        images, center, scale, degenerate = normalize_points(coords)
        if args.output:
            fileio.write_off_mesh(args.output, images, tris.tolist())
    else:
        images, center, scale, degenerate = normalize_points(fileio.read_point_cloud_text(args.input))
        if args.output:
            fileio.write_point_cloud_text(args.output, images)
    if not args.output:
        _emit("".join(" ".join(fileio._fmt(v) for v in row) + "\n" for row in images))
    sys.stderr.write(
        f"center {' '.join(fileio._fmt(c) for c in center)}\nscale {fileio._fmt(scale)}\n"
        + ("degenerate: all points coincide\n" if degenerate else "")
    )
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.shape == "double-annulus":
        points = generate_double_annulus(args.n, args.seed)
    else:
        points = generate_noisy_circle(args.n, args.seed, args.noise)
    if args.output:
        fileio.write_point_cloud_text(args.output, points)
    else:
        _emit("".join(" ".join(fileio._fmt(v) for v in row) + "\n" for row in points))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ectkit", description="Euler characteristic transforms of simplicial complexes.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("chi", help="Euler characteristic of a mesh (.off) or point cloud")
    p.add_argument("input")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("ecc", help="Euler characteristic curve along one direction")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--direction", type=float, nargs="+", metavar="X")
    g.add_argument("--angle", type=float, help="planar direction as an angle in radians")
    p.add_argument("--l", type=int, default=64)
    p.add_argument("--tmin", type=float, default=-1.0)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="use the smooth curve")
    p.add_argument("--normalize", action="store_true", help="scale input into the unit ball first")
    p.add_argument("--plot", metavar="PNG", help="also render the curve to this file")
    p.set_defaults(func=cmd_ecc)

    p = sub.add_parser("ect", help="discretized ECT over uniformly sampled directions")
    p.add_argument("input")
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--l", type=int, default=64)
    p.add_argument("--strategy", choices=["global", "per-direction"], default="global")
    p.add_argument("--shared-range", action="store_true",
                   help="global grid spanning the data's min/max height instead of [tmin, tmax]")
    p.add_argument("--tmin", type=float, default=-1.0)
    p.add_argument("--tmax", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="use the smooth ECT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", metavar="PREFIX", help="write PREFIX.{ectkit,csv,pgm} instead of CSV to stdout")
    p.add_argument("--plot", action="store_true", help="with --out, also render heatmaps")
    p.set_defaults(func=cmd_ect)

    for name, func, defaults in (
        ("learn-directions", cmd_learn_directions, LEARN_DIRECTIONS_DEFAULTS),
        ("learn-coordinates", cmd_learn_coordinates, LEARN_COORDINATES_DEFAULTS),
    ):
        p = sub.add_parser(name)
        p.add_argument("--k", type=int, default=defaults["k"])
        p.add_argument("--l", type=int, default=defaults["l"])
        p.add_argument("--lambda", dest="lam", type=float, default=defaults["lam"])
        p.add_argument("--steps", type=int, default=defaults["steps"])
        p.add_argument("--lr", type=float, default=defaults["lr"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n", type=int, default=100, help="points in the generated double annulus")
        p.add_argument("--log-every", type=int, default=1)
        p.add_argument("--normalize", action="store_true")
        p.add_argument("--out", required=True, metavar="DIR")
        p.add_argument("--plot", action="store_true")
        p.set_defaults(func=func)
        if name == "learn-directions":
            p.add_argument("--input", help="planar complex to use instead of the double annulus")
            p.add_argument("--exact-target", action="store_true", help="fit against the exact ECT")
        else:
            p.add_argument("--target", help="target point cloud (default: generated double annulus)")
            p.add_argument("--init", help="initial point cloud (default: generated noisy circle)")
            p.add_argument("--noise", type=float, default=DEFAULT_NOISE_SIGMA)

    p = sub.add_parser("normalize", help="center on the centroid and scale into the unit ball")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("gen", help="generate a synthetic point cloud")
    p.add_argument("shape", choices=["double-annulus", "noisy-circle"])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=DEFAULT_NOISE_SIGMA)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DivergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DIVERGED
    except (fileio.FormatError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except (InvalidComplexError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


def cli(argv: Optional[Sequence[str]] = None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
