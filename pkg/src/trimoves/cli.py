"""Batch command-line front end.

Every output JSON embeds the run manifest (command, inputs, parameters,
seed, outputs, tool version).  Exit codes: 0 success, 1 invariant or
verification failure, 2 input error, 3 resource cap.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import ManifoldData, compute_report
from .complexes import Complex, find_isomorphism
from .geometry import (
    Geometry,
    GeometryError,
    centroid,
    geometric_barycentric,
    kappa,
    median_ratio,
    random_simplex,
    scaling_levels,
)
from .intersect import IntersectionError, barycentric_polytopal, commonsub_count_check, intersect_linear, torus_intersect
from .pachner import (
    MoveError,
    SearchCapExceeded,
    apply,
    bfs_equivalence,
    enumerate_moves,
    replay_verified,
)
from .reduction import ReductionError, ShellingFailure, alpha_to_beta, beta2_bridge, relate
from .serialize import (
    FormatError,
    common_subdivision_to_dict,
    complex_from_dict,
    complex_to_dict,
    dumps,
    geom_complex_from_dict,
    geom_complex_to_dict,
    loads,
    move_from_dict,
    polytopal_to_dict,
    sequence_from_dict,
    sequence_to_dict,
    subdivided_from_dict,
    subdivided_to_dict,
)
from .shelling import ShellingError, find_shelling, star_via_shelling, verify_shelling
from .subdivision import (
    ResourceCapExceeded,
    barycentric,
    identity_subdivision,
    iterated_barycentric,
    partial_relative,
)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3


@dataclass
class RunManifest:
    command: str
    inputs: dict
    parameters: dict
    seed: int
    outputs: list
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "parameters": self.parameters,
            "seed": self.seed,
            "outputs": self.outputs,
            "tool_version": self.tool_version,
        }


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_json(path: str) -> dict:
    try:
        return loads(Path(path).read_text())
    except OSError as e:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {e}") from e
    except FormatError as e:
        raise CliError(EXIT_INPUT, f"{path}: {e}") from e


def _load_complex(path: str) -> Complex:
    try:
        return complex_from_dict(_read_json(path))
    except FormatError as e:
        raise CliError(EXIT_INPUT, f"{path}: {e}") from e


def _load_geom(path: str):
    try:
        gk = geom_complex_from_dict(_read_json(path))
        gk.validate()
        return gk
    except (FormatError, GeometryError) as e:
        raise CliError(EXIT_INPUT, f"{path}: {e}") from e


def _write_output(path: str | None, payload: dict, manifest: RunManifest) -> None:
    payload = {"manifest": manifest.to_dict(), **payload}
    text = dumps(payload)
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)


# -- subcommand handlers ------------------------------------------------------


def cmd_subdivide(args) -> int:
    mode = args.mode
    manifest = RunManifest(
        "subdivide",
        {"input": args.input},
        {"mode": mode},
        args.seed,
        [args.output] if args.output else [],
    )
    if mode.startswith("geometric:"):
        m = int(mode.split(":", 1)[1])
        gk = _load_geom(args.input)
        out = geometric_barycentric(gk, m, max_simplexes=args.max_simplexes)
        _write_output(args.output, {"geometric_complex": geom_complex_to_dict(out)}, manifest)
        return EXIT_OK
    k = _load_complex(args.input)
    if mode == "bary":
        sub = barycentric(k)
    elif mode.startswith("partial:"):
        r = int(mode.split(":", 1)[1])
        sub = partial_relative(k, identity_subdivision(k), r)
    elif mode.startswith("iterated:"):
        m = int(mode.split(":", 1)[1])
        sub = iterated_barycentric(k, m, max_simplexes=args.max_simplexes)
    else:
        raise CliError(EXIT_INPUT, f"unknown mode {mode!r}")
    _write_output(args.output, {"subdivision": subdivided_to_dict(sub)}, manifest)
    return EXIT_OK


def cmd_pachner(args) -> int:
    manifest = RunManifest(
        f"pachner {args.action}",
        {k: v for k, v in vars(args).items() if k in ("input", "start", "goal", "move") and v},
        {"max_depth": getattr(args, "max_depth", None)},
        args.seed,
        [args.output] if args.output else [],
    )
    if args.action == "enumerate":
        k = _load_complex(args.input)
        moves = enumerate_moves(k)
        _write_output(
            args.output,
            {"moves": [{"A": list(m.a), "B": list(m.b)} for m in moves]},
            manifest,
        )
        return EXIT_OK
    if args.action == "apply":
        k = _load_complex(args.input)
        move = move_from_dict(_read_json(args.move))
        out = apply(k, move)
        _write_output(args.output, {"complex": complex_to_dict(out)}, manifest)
        return EXIT_OK
    # bfs
    k = _load_complex(args.start)
    l = _load_complex(args.goal)
    seq = bfs_equivalence(k, l, args.max_depth)
    if seq is None:
        raise CliError(EXIT_INVARIANT, "no sequence found within the depth bound")
    _write_output(args.output, {"sequence": sequence_to_dict(seq)}, manifest)
    return EXIT_OK


def cmd_shell(args) -> int:
    manifest = RunManifest(
        f"shell {args.action}",
        {k: v for k, v in vars(args).items() if k in ("input", "ambient", "ball") and v},
        {"apex": getattr(args, "apex", None)},
        args.seed,
        [args.output] if args.output else [],
    )
    if args.action == "find":
        ball = _load_complex(args.input)
        shelling = find_shelling(ball)
        if shelling is None:
            raise CliError(EXIT_INVARIANT, "no shelling exists")
        if not verify_shelling(ball, shelling):
            raise CliError(EXIT_INVARIANT, "independent replay rejected the certificate")
        _write_output(
            args.output,
            {
                "shelling": {
                    "steps": [[list(s.a), list(s.b)] for s in shelling.steps],
                    "final": list(shelling.final),
                }
            },
            manifest,
        )
        return EXIT_OK
    ambient = _load_complex(args.ambient)
    ball = _load_complex(args.ball)
    seq, result = star_via_shelling(ambient, ball, args.apex)
    _write_output(
        args.output,
        {"sequence": sequence_to_dict(seq), "result": complex_to_dict(result)},
        manifest,
    )
    return EXIT_OK


def _trace_dict(trace) -> dict:
    return {
        "per_level_moves": {str(k): v for k, v in trace.per_level_moves.items()},
        "per_level_bounds": {str(k): v for k, v in trace.per_level_bounds.items()},
        "total_moves": trace.total_moves,
        "reduction_bound": trace.reduction_bound,
        "level_checks": {str(k): v for k, v in trace.level_checks.items()},
        "notes": trace.notes,
    }


def cmd_reduce(args) -> int:
    manifest = RunManifest(
        f"reduce {args.action}",
        {k: v for k, v in vars(args).items() if k in ("complex", "alpha", "kprime", "k1", "k2") and v},
        {},
        args.seed,
        [args.output] if args.output else [],
    )
    if args.action == "alpha2beta":
        k = _load_complex(args.complex)
        alpha = subdivided_from_dict(_read_json(args.alpha))
        seq, trace = alpha_to_beta(k, alpha)
        _write_output(
            args.output,
            {"sequence": sequence_to_dict(seq), "trace": _trace_dict(trace)},
            manifest,
        )
        return EXIT_OK
    if args.action == "bridge":
        k = _load_complex(args.complex)
        kprime = subdivided_from_dict(_read_json(args.kprime))
        seq, trace = beta2_bridge(k, kprime)
        _write_output(
            args.output,
            {"sequence": sequence_to_dict(seq), "trace": _trace_dict(trace)},
            manifest,
        )
        return EXIT_OK
    k1 = _load_geom(args.k1)
    k2 = _load_geom(args.k2)
    res = relate(k1, k2)
    _write_output(
        args.output,
        {
            "sequence": sequence_to_dict(res.sequence),
            "start": complex_to_dict(res.start),
            "end": complex_to_dict(res.end),
            "trace1": _trace_dict(res.trace1),
            "trace2": _trace_dict(res.trace2),
            "common_vertices": sorted(res.common_vertices),
            "pre_subdivision_depth": res.pre_subdivision_depth,
            "escalation_layers": res.escalation_layers,
            "bound_m": res.bound_m,
            "bound_value": str(res.bound_value),
            "notes": res.notes,
        },
        manifest,
    )
    return EXIT_OK


def cmd_intersect(args) -> int:
    manifest = RunManifest(
        f"intersect {args.action}",
        {"k1": args.k1, "k2": args.k2},
        {},
        args.seed,
        [args.output] if args.output else [],
    )
    k1 = _load_geom(args.k1)
    k2 = _load_geom(args.k2)
    poly = torus_intersect(k1, k2) if args.action == "torus" else intersect_linear(k1, k2)
    common = barycentric_polytopal(poly, k1, k2)
    report = commonsub_count_check(k1, k2, common)
    if not (report["all_ok"] and report["measure_ok"]):
        raise CliError(EXIT_INVARIANT, "common subdivision failed its count/measure checks")
    payload = {
        "polytopal": polytopal_to_dict(poly),
        "common_subdivision": common_subdivision_to_dict(common),
        "counts": report["skeleton"],
        "measure": report["measure"],
    }
    if args.action == "torus":
        payload["note"] = (
            "torus cells computed by fundamental-domain translate enumeration"
        )
    _write_output(args.output, payload, manifest)
    return EXIT_OK


def cmd_bound(args) -> int:
    manifest = RunManifest(
        "bound compute", {"input": args.input}, {}, args.seed, [args.output] if args.output else []
    )
    data = _read_json(args.input)
    try:
        md = ManifoldData(
            tag=Geometry(data["geometry"]),
            n=int(data["n"]),
            lam=float(data["lam"]),
            p=int(data["p"]),
            q=int(data["q"]),
            inj=data.get("inj"),
            vol=data.get("vol"),
            diam=data.get("diam"),
            lam_min=data.get("lam_min"),
            orientable=bool(data.get("orientable", True)),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise CliError(EXIT_INPUT, f"bad manifold data: {e}") from e
    report = compute_report(md)
    _write_output(args.output, {"report": json.loads(report.to_json())}, manifest)
    if args.table:
        lines = [
            f"{'quantity':24} value",
            f"{'mu':24} {report.mu}",
            f"{'kappa':24} {report.kappa}",
            f"{'m':24} {report.m}",
            f"{'mprime':24} {report.mprime}",
        ]
        for k, v in sorted(report.values.items()):
            lines.append(f"{k:24} {v}")
        Path(args.table).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_geom(args) -> int:
    rng = np.random.default_rng(args.seed)
    tag = Geometry(args.geometry)
    if args.action == "kappa":
        value = kappa(tag, args.n, args.lam)
        manifest = RunManifest(
            "geom kappa", {}, {"geometry": tag.value, "n": args.n, "lam": args.lam}, args.seed, []
        )
        _write_output(args.output, {"kappa": value}, manifest)
        return EXIT_OK
    if args.action == "scaling-table":
        rows = []
        for trial in range(args.count):
            s = random_simplex(tag, args.n, args.lam, rng)
            lam0 = s.max_edge()
            contraction = kappa(tag, args.n, lam0)
            for level, count, max_edge in scaling_levels(s, args.levels):
                rows.append(
                    [trial, level, count, f"{max_edge:.12f}", f"{contraction**level * lam0:.12f}"]
                )
        _write_csv(args.csv, ["trial", "level", "simplexes", "max_edge", "bound"], rows)
        return EXIT_OK
    # centroid-check
    rows = []
    for trial in range(args.count):
        s = random_simplex(tag, args.n, args.lam, rng)
        centroid(s, verify=True)
        for i in range(args.n + 1):
            rows.append([trial, i, f"{median_ratio(s, i):.12f}"])
    _write_csv(args.csv, ["trial", "vertex", "median_ratio"], rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    start = _load_complex(args.start)
    seq = sequence_from_dict(_read_json(args.sequence))
    expect = _load_complex(args.expect) if args.expect else None
    out = replay_verified(start, seq, expect=None, check_pseudomanifold=args.pseudomanifold)
    if expect is not None and find_isomorphism(out, expect) is None:
        raise CliError(EXIT_INVARIANT, "replayed endpoint is not isomorphic to the expected complex")
    manifest = RunManifest(
        "verify replay",
        {"sequence": args.sequence, "start": args.start, "expect": args.expect},
        {"pseudomanifold": args.pseudomanifold},
        args.seed,
        [args.output] if args.output else [],
    )
    _write_output(args.output, {"end_digest": out.digest(), "verified": True}, manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trimoves",
        description="subdivisions, shellings and bistellar moves for geometric triangulations",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("subdivide", help="barycentric / partial / iterated / geometric")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", required=True, help="bary | partial:r | iterated:m | geometric:m")
    p.add_argument("--max-simplexes", type=int, default=2_000_000,
                   help="abort with exit code 3 past this simplex count")
    p.add_argument("--output")
    p.set_defaults(func=cmd_subdivide)

    p = sub.add_parser("pachner", help="enumerate, apply or search moves")
    p.add_argument("action", choices=["enumerate", "apply", "bfs"])
    p.add_argument("--input")
    p.add_argument("--move")
    p.add_argument("--start")
    p.add_argument("--goal")
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--output")
    p.set_defaults(func=cmd_pachner)

    p = sub.add_parser("shell", help="find shellings, star balls")
    p.add_argument("action", choices=["find", "star"])
    p.add_argument("--input")
    p.add_argument("--ambient")
    p.add_argument("--ball")
    p.add_argument("--apex", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_shell)

    p = sub.add_parser("reduce", help="subdivision-to-barycentric reductions")
    p.add_argument("action", choices=["alpha2beta", "bridge", "relate"])
    p.add_argument("--complex")
    p.add_argument("--alpha")
    p.add_argument("--kprime")
    p.add_argument("--k1")
    p.add_argument("--k2")
    p.add_argument("--output")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("intersect", help="common geometric subdivision")
    p.add_argument("action", choices=["linear", "torus"])
    p.add_argument("--k1", required=True)
    p.add_argument("--k2", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("bound", help="evaluate the move-count bounds")
    p.add_argument("action", choices=["compute"])
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--table", help="also write a human-readable table")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("geom", help="geometry tables (CSV)")
    p.add_argument("action", choices=["kappa", "scaling-table", "centroid-check"])
    p.add_argument("--geometry", required=True, choices=[g.value for g in Geometry])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_geom)

    p = sub.add_parser("verify", help="replay and verify a move sequence")
    p.add_argument("action", choices=["replay"])
    p.add_argument("--sequence", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--expect")
    p.add_argument("--pseudomanifold", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except FormatError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ResourceCapExceeded, SearchCapExceeded) as e:
        print(f"resource cap: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (MoveError, ShellingError, ShellingFailure, ReductionError, IntersectionError, GeometryError) as e:
        print(f"verification failure: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, KeyError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
