"""Command-line interface.

Subcommands:

* ``gen``          write random tensors (dense/cp/tt) or a planted pair
* ``hash``         print K hash codes per input tensor file
* ``validate``     run the statistical suite; exit 0 iff every gated row passes
* ``bench``        median wall-clock timings of the hash kernels, as CSV
* ``index-build``  hash tensor files into an index and write its manifest
* ``index-query``  load a manifest and print ranked candidate ids for a query

Exit status: 0 success (and, for validate, all gated rows passed);
1 validation failure; 2 usage error; 3 I/O error (unreadable/corrupt file).

Flags may also be supplied via ``--config file.json`` holding an object of
long option names; explicit flags win over config values.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from pathlib import Path

from . import datagen, validate
from .families import DEFAULT_WIDTH, FamilyKind, hash_k, rank_condition_check
from .index import IndexParams, LshIndex, load_index
from .projection import Decomposition
from .tensorio import FormatError, read_tensor, write_tensor
from .tensors import angle_between, frobenius_distance

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _CliError(Exception):
    """Usage-level problem detected after argparse (maps to exit 2)."""


def _parse_modes(args: argparse.Namespace) -> tuple[int, ...]:
    if args.modes:
        try:
            return tuple(int(p) for p in args.modes.split(","))
        except ValueError:
            raise _CliError(f"--modes must be a comma list of integers, got {args.modes!r}")
    if args.order is None or args.dim is None:
        raise _CliError("give either --modes or both --order and --dim")
    return (args.dim,) * args.order


def _add_shape_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--modes", help="comma-separated mode sizes, e.g. 8,8,8")
    p.add_argument("--order", type=int, help="tensor order N (with --dim)")
    p.add_argument("--dim", type=int, help="uniform mode size d (with --order)")


def _add_family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--family",
        choices=[k.value for k in FamilyKind],
        default=FamilyKind.CP_E2LSH.value,
        help="hash family kind",
    )
    p.add_argument("--rank", type=int, default=3, help="projection rank R")
    p.add_argument("--width", type=float, default=DEFAULT_WIDTH, help="bucket width w")
    p.add_argument("--codes", type=int, default=8, help="codes per item K")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensorlsh",
        description="Locality-sensitive hashing with low-rank tensorized projections.",
    )
    parser.add_argument("--config", help="JSON file of default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate tensor files")
    p.add_argument("what", choices=["dense", "cp", "tt", "pair"])
    _add_shape_flags(p)
    p.add_argument("--rank", type=int, default=3, help="rank for cp/tt output")
    p.add_argument("--count", type=int, default=1, help="number of tensors")
    p.add_argument("--angle", type=float, help="planted pair angle (radians)")
    p.add_argument("--distance", type=float, help="planted pair Frobenius distance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--prefix", default="tensor", help="output file name prefix")

    p = sub.add_parser("hash", help="hash tensor files")
    p.add_argument("inputs", nargs="+", help="tensor files")
    _add_family_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the listing here instead of stdout")

    p = sub.add_parser("validate", help="run the statistical validation suite")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--out", default=".", help="directory for report files")

    p = sub.add_parser("bench", help="time the hash kernels")
    p.add_argument("--dims", default="256,512", help="comma list of mode sizes to sweep")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--rank", type=int, default=4)
    p.add_argument("--codes", type=int, default=1)
    p.add_argument("--reps", type=int, default=20, help="timing repetitions (median taken)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write CSV here instead of stdout")

    p = sub.add_parser("index-build", help="build an index and write its manifest")
    p.add_argument("inputs", nargs="+", help="tensor files (item ids are 0..n-1 in order)")
    _add_family_flags(p)
    p.add_argument("--bands", type=int, default=16, help="band count L")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest", required=True, help="manifest output path")

    p = sub.add_parser("index-query", help="query an index manifest")
    p.add_argument("query", help="query tensor file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--max-candidates", type=int, default=None)
    return parser


def _load_config_defaults(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Apply --config JSON values as subparser defaults; flags still win."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    try:
        doc = json.loads(Path(known.config).read_text())
    except OSError as exc:
        raise _IoError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise _CliError(f"config file is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise _CliError("config file must hold a JSON object of option values")
    defaults = {key.replace("-", "_"): value for key, value in doc.items()}
    for action in parser._subparsers._group_actions:  # noqa: SLF001 - argparse has no public hook
        for sub in action.choices.values():
            sub.set_defaults(**{k: v for k, v in defaults.items() if _has_dest(sub, k)})
    return argv


def _has_dest(parser: argparse.ArgumentParser, dest: str) -> bool:
    return any(a.dest == dest for a in parser._actions)


class _IoError(Exception):
    pass


def _read_tensor_or_die(path: str):
    try:
        return read_tensor(path)
    except FileNotFoundError:
        raise _IoError(f"no such file: {path}")
    except (OSError, FormatError) as exc:
        raise _IoError(str(exc))


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args: argparse.Namespace) -> int:
    shape = _parse_modes(args)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IoError(f"cannot create output directory: {exc}")
    if args.what == "pair":
        if (args.angle is None) == (args.distance is None):
            raise _CliError("pair needs exactly one of --angle or --distance")
        if args.angle is not None:
            x, y = datagen.pair_at_angle(shape, args.angle, args.seed)
        else:
            x, y = datagen.pair_at_distance(shape, args.distance, args.seed)
        paths = [out / f"{args.prefix}_a.tlsh", out / f"{args.prefix}_b.tlsh"]
        write_tensor(paths[0], x)
        write_tensor(paths[1], y)
    else:
        if args.count < 1:
            raise _CliError("--count must be positive")
        paths = []
        for i in range(args.count):
            if args.what == "dense":
                t = datagen.random_dense(shape, args.seed, tag=i)
            elif args.what == "cp":
                t = datagen.random_cp(shape, args.rank, args.seed, tag=i)
            else:
                t = datagen.random_tt(shape, args.rank, args.seed, tag=i)
            path = out / f"{args.prefix}_{i:04d}.tlsh"
            write_tensor(path, t)
            paths.append(path)
    for path in paths:
        print(path)
    return EXIT_OK


def cmd_hash(args: argparse.Namespace) -> int:
    kind = FamilyKind(args.family)
    if args.codes < 1:
        raise _CliError("--codes must be positive")
    if args.rank < 1:
        raise _CliError("--rank must be positive")
    if kind.is_euclidean and not args.width > 0:
        raise _CliError("--width must be positive")
    entries = sorted((Path(p).stem, p) for p in args.inputs)
    lines = []
    for item_id, path in entries:
        tensor = _read_tensor_or_die(path)
        hv = hash_k(kind, tensor, args.rank, args.codes, args.width, args.seed)
        lines.append(item_id + "\t" + " ".join(str(c) for c in hv.codes))
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise _IoError(f"cannot write listing: {exc}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise _CliError("--trials must be positive")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IoError(f"cannot create output directory: {exc}")
    reports = validate.run_default_suite(seed=args.seed, trials=args.trials)
    text = validate.render_text(reports)
    sys.stdout.write(text)
    try:
        (out / "validation_report.txt").write_text(text)
        validate.write_csv(reports, out / "validation_report.csv")
    except OSError as exc:
        raise _IoError(f"cannot write reports: {exc}")
    return EXIT_OK if validate.suite_passed(reports) else EXIT_VALIDATION


def _median_eval_ns(fn, reps: int) -> float:
    """Median per-call wall time, batching calls so one sample >= ~1 ms."""
    fn()  # warm-up
    t0 = time.perf_counter_ns()
    fn()
    once = max(time.perf_counter_ns() - t0, 1)
    batch = max(1, int(1_000_000 / once))
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        for _ in range(batch):
            fn()
        samples.append((time.perf_counter_ns() - t0) / batch)
    return statistics.median(samples)


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        dims = [int(p) for p in args.dims.split(",")]
    except ValueError:
        raise _CliError(f"--dims must be a comma list of integers, got {args.dims!r}")
    if args.reps < 1:
        raise _CliError("--reps must be positive")
    rows = ["kind,N,d,R,R_hat,K,median_ns"]
    for kind in (FamilyKind.CP_E2LSH, FamilyKind.TT_E2LSH):
        for d in dims:
            shape = (d,) * args.order
            if kind is FamilyKind.CP_E2LSH:
                item = datagen.random_cp(shape, args.rank, args.seed, tag=1)
            else:
                item = datagen.random_tt(shape, args.rank, args.seed, tag=1)
            fn = lambda: hash_k(kind, item, args.rank, args.codes, DEFAULT_WIDTH, args.seed)
            ns = _median_eval_ns(fn, args.reps)
            rows.append(
                f"{kind.value},{args.order},{d},{args.rank},{item.rank},{args.codes},{ns:.0f}"
            )
    text = "\n".join(rows) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise _IoError(f"cannot write CSV: {exc}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_index_build(args: argparse.Namespace) -> int:
    kind = FamilyKind(args.family)
    tensors = []
    for path in args.inputs:
        tensors.append((path, _read_tensor_or_die(path)))
    shape = tensors[0][1].shape
    if any(t.shape != shape for _, t in tensors):
        raise _CliError("all indexed tensors must share one shape")
    params = IndexParams(
        kind=kind,
        shape=shape,
        rank=args.rank,
        codes_per_band=args.codes,
        bands=args.bands,
        width=args.width,
        seed=args.seed,
    )
    index = LshIndex(params)
    paths = {}
    for item_id, (path, tensor) in enumerate(tensors):
        index.insert(item_id, tensor)
        paths[item_id] = str(Path(path).resolve())
    try:
        index.save_manifest(args.manifest, paths)
    except OSError as exc:
        raise _IoError(f"cannot write manifest: {exc}")
    print(f"indexed {len(index)} items into {args.manifest}")
    return EXIT_OK


def cmd_index_query(args: argparse.Namespace) -> int:
    try:
        index = load_index(args.manifest)
    except FileNotFoundError as exc:
        raise _IoError(f"no such manifest: {exc}")
    except (OSError, FormatError, json.JSONDecodeError, KeyError) as exc:
        raise _IoError(f"cannot load manifest: {exc}")
    query = _read_tensor_or_die(args.query)
    if args.max_candidates is not None and args.max_candidates < 1:
        raise _CliError("--max-candidates must be positive")
    for item_id in index.query(query, max_candidates=args.max_candidates):
        print(item_id)
    return EXIT_OK


_COMMANDS = {
    "gen": cmd_gen,
    "hash": cmd_hash,
    "validate": cmd_validate,
    "bench": cmd_bench,
    "index-build": cmd_index_build,
    "index-query": cmd_index_query,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _load_config_defaults(argv, parser)
        args = parser.parse_args(argv)  # exits 2 itself on bad usage
        return _COMMANDS[args.command](args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        # Domain-level rejections (bad shapes, ranks, widths) are usage errors.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
