"""Command-line front end: ``critgroup {group,verify,snf,export}``.

Exit codes: 0 success, 1 consistency failure (or any FAIL in verify),
2 usage / parse errors, 3 refusal (method not applicable to the spec).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .graphs import LayeredSpec, SpecError, laplacian, layered_kpartite, to_dot
from .groups import (
    AbelianGroup,
    ClosedFormUnavailable,
    closed_form,
    sigma_pair_k5,
    sigma_pair_k6,
    spanning_trees_formula,
)
from .matrix import det, delete_row_col, read_matrix, to_text
from .pipeline import UnsupportedSpec, run_pipeline
from .snf import cokernel, smith_normal_form

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3
METHODS = {"snf": "generic-snf", "pipeline": "pipeline", "closed": "closed-form"}
MAX_GRID = 10000


class ConsistencyError(RuntimeError):
    pass


@dataclass
class RunResult:
    spec: LayeredSpec
    method: str
    group: AbelianGroup
    tree_count: int
    elapsed_ms: float
    stage_reports: Optional[list] = None

    def to_json(self, with_stages: bool = False) -> dict:
        out = {
            "spec": str(self.spec),
            "method": self.method,
            "free_rank": self.group.free_rank,
            "invariant_factors": list(self.group.torsion),
            "tree_count": self.tree_count,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }
        if with_stages and self.stage_reports is not None:
            out["stage_reports"] = [s.to_json() for s in self.stage_reports]
        return out


def matrix_tree_count(spec: LayeredSpec) -> int:
    L = laplacian(layered_kpartite(spec))
    return det(delete_row_col(L, 0, 0))


def snf_group(spec: LayeredSpec) -> AbelianGroup:
    """K(G) from the cokernel of the full Laplacian, free summand dropped."""
    full = cokernel(laplacian(layered_kpartite(spec)))
    if full.free_rank != 1:
        raise ConsistencyError("Laplacian cokernel of %s has free rank %d" % (spec, full.free_rank))
    return full.without_free_part()


def compute_group(spec: LayeredSpec, method: str = "snf") -> RunResult:
    """K(G) by one method, cross-checked against the Matrix-Tree count."""
    start = time.perf_counter()
    stages = None
    if method == "snf":
        group = snf_group(spec)
    elif method == "pipeline":
        run = run_pipeline(spec)
        if not run.ok:
            raise ConsistencyError("a pipeline stage failed its checks for %s" % spec)
        group, stages = run.group, run.stages
    elif method == "closed":
        group = closed_form(spec)
    else:
        raise ValueError("unknown method %r" % method)
    trees = matrix_tree_count(spec)
    elapsed = (time.perf_counter() - start) * 1000.0
    if group.order != trees:
        raise ConsistencyError("group order %d != spanning-tree count %d for %s" % (group.order, trees, spec))
    return RunResult(spec, METHODS[method], group, trees, elapsed, stages)


def format_group(g: AbelianGroup) -> str:
    return str(g) if g.torsion or g.free_rank else "0"


# verify ------------------------------------------------------------------

@dataclass
class VerifyRow:
    spec: LayeredSpec
    passed: bool
    snf: str
    trees_formula: int
    trees_matrixtree: int
    pipeline: str
    closed: str
    sigma: Optional[tuple[int, int]] = None
    problems: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "spec": str(self.spec),
            "status": "PASS" if self.passed else "FAIL",
            "snf": self.snf,
            "trees_formula": self.trees_formula,
            "trees_matrixtree": self.trees_matrixtree,
            "pipeline": self.pipeline,
            "closed": self.closed,
            "sigma": list(self.sigma) if self.sigma else None,
            "problems": self.problems,
        }


def verify_spec(spec: LayeredSpec) -> VerifyRow:
    problems = []
    reference = snf_group(spec)
    formula = spanning_trees_formula(spec)
    mt = matrix_tree_count(spec)
    if not (reference.order == formula == mt):
        problems.append("tree counts differ: snf order %d, formula %d, matrix-tree %d" % (reference.order, formula, mt))

    try:
        run = run_pipeline(spec)
    except UnsupportedSpec as exc:
        pipe = "refused: %s" % exc
    else:
        pipe = str(run.group)
        if not run.ok:
            problems.append("pipeline stage check failed")
        if run.group != reference:
            problems.append("pipeline %s != snf %s" % (run.group, reference))

    sigma = None
    try:
        cf = closed_form(spec)
    except ClosedFormUnavailable as exc:
        closed = "refused: %s" % exc
    else:
        closed = str(cf)
        if cf != reference:
            problems.append("closed form %s != snf %s" % (cf, reference))
        if spec.k == 5:
            sigma = sigma_pair_k5(spec)
        elif spec.k == 6:
            sigma = sigma_pair_k6(spec)

    return VerifyRow(spec, not problems, format_group(reference), formula, mt, pipe, closed, sigma, problems)


_RANGE = re.compile(r"^(?:[kn]=)?(\d+)\.\.(\d+)$")


def parse_range(text: str) -> range:
    m = _RANGE.match(text)
    if not m:
        raise SpecError("range must look like 'a..b' (optionally 'k=a..b'): %r" % text)
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise SpecError("empty range %r" % text)
    return range(lo, hi + 1)


def grid_specs(k_range: range, n_range: range) -> list[LayeredSpec]:
    from itertools import product

    total = sum(len(n_range) ** k for k in k_range)
    if total > MAX_GRID:
        raise SpecError("grid has %d specs; the limit is %d" % (total, MAX_GRID))
    return [LayeredSpec(p) for k in k_range for p in product(n_range, repeat=k)]


def _spec_sort_key(spec: LayeredSpec):
    return (spec.k, spec.parts)


# commands ----------------------------------------------------------------

def cmd_group(args) -> int:
    spec = LayeredSpec.parse(args.spec)
    try:
        result = compute_group(spec, args.method)
    except (ClosedFormUnavailable, UnsupportedSpec) as exc:
        print("refused: %s (use --method snf for specs outside the closed forms)" % exc, file=sys.stderr)
        return EXIT_REFUSED
    except ConsistencyError as exc:
        print("consistency failure: %s" % exc, file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        print(json.dumps(result.to_json(with_stages=args.stages), sort_keys=True))
    else:
        print("K(G_{%s}) = %s" % (spec, format_group(result.group)))
        print("spanning trees: %d" % result.tree_count)
        print("method: %s" % result.method)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.grid:
        specs = grid_specs(parse_range(args.grid[0]), parse_range(args.grid[1]))
    elif args.spec:
        specs = [LayeredSpec.parse(args.spec)]
    else:
        raise SpecError("give a spec or --grid KMIN..KMAX NMIN..NMAX")
    specs.sort(key=_spec_sort_key)
    if args.jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(verify_spec, specs, chunksize=8))
    else:
        rows = [verify_spec(s) for s in specs]
    failed = [r for r in rows if not r.passed]

    if args.json:
        print(json.dumps({"rows": [r.to_json() for r in rows], "failures": len(failed)}, sort_keys=True))
    else:
        for r in rows:
            line = "%-4s %-14s K=%s trees=%d" % ("PASS" if r.passed else "FAIL", r.spec, r.snf, r.trees_formula)
            if r.sigma:
                line += " sigma1=%d sigma2=%d" % r.sigma
            if r.closed.startswith("refused"):
                line += " [closed/pipeline refused]"
            print(line)
            for p in r.problems:
                print("     %s" % p)
        print("%d specs, %d failed" % (len(rows), len(failed)))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_snf(args) -> int:
    try:
        A = read_matrix(args.matrix_file)
    except (OSError, ValueError) as exc:
        print("cannot read matrix: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    res = smith_normal_form(A)
    if not res.verify(A):
        print("consistency failure: P*A*Q != D", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        out = {"diagonal": list(res.D.diagonal()), "invariant_factors": list(res.factors)}
        if args.transforms:
            out["P"] = res.P.tolist()
            out["Q"] = res.Q.tolist()
        print(json.dumps(out, sort_keys=True))
        return EXIT_OK
    for i, d in enumerate(res.D.diagonal(), start=1):
        print("%d: %d" % (i, d))
    if args.transforms:
        print("P:")
        sys.stdout.write(to_text(res.P))
        print("Q:")
        sys.stdout.write(to_text(res.Q))
    return EXIT_OK


def cmd_export(args) -> int:
    spec = LayeredSpec.parse(args.spec)
    text = to_dot(layered_kpartite(spec), name="G_" + "_".join(str(n) for n in spec.parts))
    if not args.dot or args.dot == "-":
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.dot, "w") as fh:
            fh.write(text)
    except OSError as exc:
        print("cannot write %s: %s" % (args.dot, exc), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critgroup", description="Critical groups of layered k-partite graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="compute K(G) for a spec 'n1,n2,...,nk'")
    p.add_argument("spec")
    p.add_argument("--method", choices=sorted(METHODS), default="snf")
    p.add_argument("--json", action="store_true")
    p.add_argument("--stages", action="store_true", help="include stage reports in JSON (pipeline only)")
    p.set_defaults(func=cmd_group)

    p = sub.add_parser("verify", help="cross-check all methods on one spec or a grid")
    p.add_argument("spec", nargs="?")
    p.add_argument("--grid", nargs=2, metavar=("KRANGE", "NRANGE"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("snf", help="Smith normal form of a matrix file")
    p.add_argument("matrix_file")
    p.add_argument("--transforms", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_snf)

    p = sub.add_parser("export", help="write the graph as DOT")
    p.add_argument("spec")
    p.add_argument("--dot", metavar="PATH")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        parser.print_usage(sys.stderr)
        print("%s: error: %s" % (parser.prog, exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
