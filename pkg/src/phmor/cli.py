"""Command-line experiment driver.

Subcommands::

    phmor generate   --benchmark chain --k 100 --out DIR
    phmor validate   DIR
    phmor reduce     DIR --method index2 --r 4 --out OUT
    phmor regularize DIR --condense --out OUT
    phmor sweep      DIR --method irka --r-sweep 2:20:2 --out OUT

Models live in directory containers (manifest + Matrix Market files).
``reduce`` and ``sweep`` append rows to ``errors.csv`` in the output
directory with the fixed schema

    r, interp_residual_max, min_eig_W, rel_hinf, rel_h2, converged, iterations

(rel_h2 is left empty unless --h2 is given).  Runs are deterministic
for a given seed.  The default output directory is taken from the
``PHMOR_OUT`` environment variable, falling back to the current
directory.
"""

from __future__ import annotations

import argparse
import os
import pathlib
import sys

import numpy as np

from . import benchmarks, containers, regularization
from .irka import IRKAConfig, irka_reduce
from .linalg import LinAlgContractError
from .reducers import (
    InterpolationData,
    reduce_index1_blockdiag,
    reduce_index1_shifted,
    reduce_index2,
    reduce_index2_augmented,
    reduce_mixed,
)
from .systems import (
    PartitionError,
    partition_index1,
    partition_index2,
    partition_mixed,
    validate_structure,
)
from .transfer import (
    FrequencyGrid,
    PolynomialMismatchError,
    h2_error,
    hinf_error,
    polynomial_part_index1,
    polynomial_part_index2,
    tangential_residuals,
)

_DIRECT_METHODS = {
    "index1-shifted": reduce_index1_shifted,
    "index1-blockdiag": reduce_index1_blockdiag,
    "index2": reduce_index2,
    "index2-galerkin": reduce_index2,
    "index2-augmented": reduce_index2_augmented,
    "mixed": reduce_mixed,
}

_IRKA_REDUCER_NAMES = {
    "irka": None,  # pick by partition type
    "irka-index1-shifted": "index1-shifted",
    "irka-index1-blockdiag": "index1-blockdiag",
    "irka-index2": "index2-galerkin",
    "irka-index2-augmented": "index2-augmented",
    "irka-mixed": "mixed-blockdiag",
}

CSV_HEADER = "r,interp_residual_max,min_eig_W,rel_hinf,rel_h2,converged,iterations\n"


def _default_out():
    return pathlib.Path(os.environ.get("PHMOR_OUT", "."))


def _parse_int_range(text):
    """'2:20:2' -> [2, 4, ..., 20] (inclusive upper end)."""
    parts = text.split(":")
    if len(parts) == 1:
        return [int(parts[0])]
    if len(parts) == 2:
        lo, hi = map(int, parts)
        return list(range(lo, hi + 1))
    lo, hi, step = map(int, parts)
    return list(range(lo, hi + 1, step))


def _parse_freq_grid(text):
    """'1e-4:1e4:400' -> log-spaced FrequencyGrid."""
    lo, hi, num = text.split(":")
    return FrequencyGrid.log_spaced(float(lo), float(hi), int(num))


def _parse_points(text):
    return np.array([complex(tok) for tok in text.split(",")])


def _load_partition(path):
    sys_, manifest = containers.load_phdae(path)
    index = manifest.get("index")
    if index is None:
        raise LinAlgContractError(
            f"container {path} has no 'index' manifest entry; cannot partition"
        )
    if index == "1":
        return partition_index1(sys_, int(manifest["n1"])), manifest
    if index == "2":
        return partition_index2(sys_, int(manifest["n1"])), manifest
    if index == "mixed":
        return partition_mixed(sys_, int(manifest["n1"]), int(manifest["n2"])), manifest
    raise LinAlgContractError(f"unknown index kind {index!r} in {path}")


def _full_poly(part):
    from .systems import Index1Partition, Index2Partition

    if isinstance(part, Index1Partition):
        return polynomial_part_index1(part)
    if isinstance(part, Index2Partition):
        return polynomial_part_index2(part)
    from .transfer import PolynomialPart

    return PolynomialPart.constant(part.parent.S + part.parent.N)


def _errors_row(part, model, data, grid, with_h2, converged="", iterations=""):
    full = part.parent
    res = tangential_residuals(full, model, data)
    try:
        _, rel_hinf = hinf_error(full, model, grid)
    except PolynomialMismatchError:
        rel_hinf = np.inf
    rel_h2 = ""
    if with_h2:
        try:
            abs_h2 = h2_error(full, model)
            denom = h2_error(full, _full_poly(part))
            rel_h2 = f"{abs_h2 / denom:.16e}" if denom > 0 else f"{np.inf}"
        except PolynomialMismatchError:
            rel_h2 = f"{np.inf}"
    return (
        f"{model.order},{res.max():.16e},{model.w_min_eig:.16e},"
        f"{rel_hinf:.16e},{rel_h2},{converged},{iterations}\n"
    )


def cmd_generate(args):
    out = pathlib.Path(args.out) if args.out else _default_out() / "model"
    extra = {}
    if args.benchmark == "chain":
        part = benchmarks.mass_spring_chain(benchmarks.MassSpringSpec(k=args.k))
        if args.sparse:
            data = benchmarks.mass_spring_chain_sparse(benchmarks.MassSpringSpec(k=args.k))
            containers.save_phdae(out, data, extra={"index": "2", "benchmark": "chain"})
            print(f"wrote sparse chain (n={data['E'].shape[0]}) to {out}")
            return 0
        extra = {"index": "2", "n1": part.n1, "benchmark": "chain"}
        system = part.parent
    elif args.benchmark == "chain-b2":
        part = benchmarks.mass_spring_chain_b2(
            benchmarks.MassSpringSpec(k=args.k), amplitude=args.b2_amplitude
        )
        extra = {"index": "2", "n1": part.n1, "benchmark": "chain-b2"}
        system = part.parent
    elif args.benchmark == "oseen":
        spec = benchmarks.OseenSpec(n_grid=args.n_grid)
        if args.sparse:
            data = benchmarks.oseen_grid_sparse(spec)
            containers.save_phdae(out, data, extra={"index": "2", "benchmark": "oseen"})
            print(f"wrote sparse oseen model (n={data['E'].shape[0]}) to {out}")
            return 0
        part = benchmarks.oseen_grid(spec)
        extra = {"index": "2", "n1": part.n1, "benchmark": "oseen"}
        system = part.parent
    elif args.benchmark == "random-index1":
        part = benchmarks.random_ph_index1(args.n1, args.n2, args.m, args.seed)
        extra = {"index": "1", "n1": part.n1, "benchmark": "random-index1",
                 "seed": args.seed}
        system = part.parent
    elif args.benchmark == "mixed":
        part = benchmarks.mixed_chain(benchmarks.MassSpringSpec(k=args.k))
        extra = {"index": "mixed", "n1": part.n1, "n2": part.n2,
                 "benchmark": "mixed"}
        system = part.parent
    else:  # pragma: no cover - argparse restricts choices
        raise LinAlgContractError(f"unknown benchmark {args.benchmark}")
    containers.save_phdae(out, system, extra=extra)
    print(f"wrote {args.benchmark} model (n={system.n}, m={system.m}) to {out}")
    return 0


def cmd_validate(args):
    system, _ = containers.load_phdae(args.model)
    report = validate_structure(system)
    print(report.summary())
    if system.n <= 400:
        diag = regularization.diagnose(system)
        print(diag.summary())
    return 0 if report.passed else 1


def _resolve_method(method, part):
    from .systems import Index1Partition, Index2Partition

    if method != "auto":
        return method
    if isinstance(part, Index1Partition):
        return "index1-shifted" if not part.b2_zero else "index1-blockdiag"
    if isinstance(part, Index2Partition):
        return "index2-augmented" if not part.b2_zero else "index2"
    return "mixed"


def cmd_reduce(args):
    part, _ = _load_partition(args.model)
    out = pathlib.Path(args.out) if args.out else _default_out() / "reduced"
    grid = _parse_freq_grid(args.freq_grid)
    method = _resolve_method(args.method, part)
    if args.points is not None:
        pts = _parse_points(args.points)
        data = InterpolationData(points=pts,
                                 directions=np.ones((pts.size, part.parent.m)))
    else:
        data = InterpolationData.log_spaced(args.r, part.parent.m)
    if method in _IRKA_REDUCER_NAMES:
        cfg = IRKAConfig(r=args.r, initial=data)
        result = irka_reduce(part, cfg, method=_IRKA_REDUCER_NAMES[method])
        model, data = result.model, result.data
        conv, iters = int(result.converged), result.iterations
    else:
        model = _DIRECT_METHODS[method](part, data)
        conv, iters = "", ""
    containers.save_reduced(out, model)
    out.mkdir(parents=True, exist_ok=True)
    row = _errors_row(part, model, data, grid, args.h2, conv, iters)
    csv_path = out / "errors.csv"
    new = not csv_path.exists()
    with open(csv_path, "a") as fh:
        if new:
            fh.write(CSV_HEADER)
        fh.write(row)
    print(f"reduced to order {model.order} with {model.method}; "
          f"ph_valid={model.ph_valid} (min eig W = {model.w_min_eig:.3e})")
    print(f"wrote reduced model and errors.csv to {out}")
    return 0


def cmd_regularize(args):
    system, _ = containers.load_phdae(args.model)
    out = pathlib.Path(args.out) if args.out else _default_out() / "regularized"
    sub, dropped, _ = regularization.remove_singular_part(system)
    if dropped == 0:
        print("no singular part found; system copied unchanged")
    else:
        print(f"removed singular part: dropped {dropped} state(s)")
    current = sub
    extra = {"regularized": "1"}
    if args.condense:
        cf = regularization.condensed_form(current)
        print(regularization.condensed_report(cf))
        current = cf.system
        extra["block_sizes"] = ":".join(str(b) for b in cf.block_sizes)
    if args.feedback is not None:
        K = args.feedback * np.eye(current.m)
        current = regularization.output_feedback_regularize(current, K)
        print(f"applied output feedback u = -{args.feedback:g} I y")
    containers.save_phdae(out, current, extra=extra)
    print(f"wrote regularized model (n={current.n}) to {out}")
    return 0


def cmd_sweep(args):
    part, _ = _load_partition(args.model)
    out = pathlib.Path(args.out) if args.out else _default_out() / "sweep"
    out.mkdir(parents=True, exist_ok=True)
    grid = _parse_freq_grid(args.freq_grid)
    rs = _parse_int_range(args.r_sweep)
    if any(r < 1 for r in rs):
        raise LinAlgContractError("reduced orders must be >= 1")
    method = _resolve_method(args.method, part)
    rows = []
    for r in rs:
        if method in _IRKA_REDUCER_NAMES:
            cfg = IRKAConfig(r=r)
            result = irka_reduce(part, cfg, method=_IRKA_REDUCER_NAMES[method])
            model, data = result.model, result.data
            conv, iters = int(result.converged), result.iterations
            result.trace.export_csv(out / f"trace_r{r:03d}.csv")
        else:
            data = InterpolationData.log_spaced(r, part.parent.m)
            model = _DIRECT_METHODS[method](part, data)
            conv, iters = "", ""
        containers.save_reduced(out / f"r{r:03d}", model)
        rows.append(_errors_row(part, model, data, grid, args.h2, conv, iters))
        print(f"r={r}: done (order {model.order}, ph_valid={model.ph_valid})")
    with open(out / "errors.csv", "w") as fh:
        fh.write(CSV_HEADER)
        fh.writelines(rows)
    print(f"wrote sweep artifacts to {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phmor",
        description="Structure-preserving model reduction of port-Hamiltonian DAEs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a benchmark model container")
    gen.add_argument("--benchmark", required=True,
                     choices=["chain", "chain-b2", "oseen", "random-index1", "mixed"])
    gen.add_argument("--k", type=int, default=10, help="chain length")
    gen.add_argument("--n-grid", type=int, default=8, help="grid cells per direction")
    gen.add_argument("--n1", type=int, default=12)
    gen.add_argument("--n2", type=int, default=4)
    gen.add_argument("--m", type=int, default=2)
    gen.add_argument("--b2-amplitude", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--sparse", action="store_true",
                     help="assemble and store sparse matrices")
    gen.add_argument("--out", default=None)
    gen.set_defaults(func=cmd_generate)

    val = sub.add_parser("validate", help="check pHDAE structure of a container")
    val.add_argument("model")
    val.set_defaults(func=cmd_validate)

    red = sub.add_parser("reduce", help="reduce a model once")
    red.add_argument("model")
    red.add_argument("--method", default="auto",
                     choices=["auto"] + sorted(_DIRECT_METHODS) + sorted(_IRKA_REDUCER_NAMES))
    red.add_argument("--r", type=int, default=4)
    red.add_argument("--points", default=None,
                     help="comma-separated interpolation points (complex literals)")
    red.add_argument("--freq-grid", default="1e-4:1e4:400")
    red.add_argument("--h2", action="store_true", help="also compute relative H2 error")
    red.add_argument("--seed", type=int, default=0)
    red.add_argument("--out", default=None)
    red.set_defaults(func=cmd_reduce)

    reg = sub.add_parser("regularize", help="remove singular part / condense")
    reg.add_argument("model")
    reg.add_argument("--condense", action="store_true")
    reg.add_argument("--feedback", type=float, default=None,
                     help="apply output feedback u = -K y with K = value * I")
    reg.add_argument("--out", default=None)
    reg.set_defaults(func=cmd_regularize)

    sw = sub.add_parser("sweep", help="sweep reduced orders, emit errors.csv")
    sw.add_argument("model")
    sw.add_argument("--method", default="irka",
                    choices=["auto"] + sorted(_DIRECT_METHODS) + sorted(_IRKA_REDUCER_NAMES))
    sw.add_argument("--r-sweep", required=True, help="lo:hi:step (inclusive)")
    sw.add_argument("--freq-grid", default="1e-4:1e4:400")
    sw.add_argument("--h2", action="store_true")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", default=None)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    np.random.seed(getattr(args, "seed", 0))
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error [{args.command}]: no such file or directory: {exc.filename}",
              file=sys.stderr)
        return 2
    except (LinAlgContractError, PartitionError, PolynomialMismatchError,
            ValueError, KeyError) as exc:
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
