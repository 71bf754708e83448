"""Command-line surface: file I/O, experiment orchestration, report emission.

Exit codes: 0 success, 2 contract/parameter/parse errors, 3 resource-budget
errors.  All output is deterministic for fixed flags and seed; JSON keys are
sorted and CSV rows follow the scan grid order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import FORMAT_VERSIONS, __version__
from .errors import BudgetError, ContractError, ParameterError
from .extremal import (
    CoordinateSubgroup,
    DyadicGroup,
    bose_burton_witness,
    exhaustive_extremal,
    extbb_greedy,
    threshold_demo_n21,
)
from .factor import (
    PolynomialFactor,
    consistency_group,
    parse_factor,
    uniformity_report_json,
)
from .forms import LinearFormSystem, linear_forms_of
from .gf2 import walsh_hadamard
from .gowers import fourier_bias, gowers_norm, phase_table
from .counting import counting_bound_check, homomorphism_exists
from .matroid import (
    Matroid,
    ag,
    automorphism_count,
    bb,
    contains_copy,
    count_injections,
    critical_number,
    format_matroid,
    iterated_double,
    make_geometry,
    n_geometry,
    parse_matroid,
    pg,
    sampled_injection_count,
)
from .polynomial import NonclassicalPoly, parse_poly, parse_poly_table
from .regularity import (
    EtaSchedule,
    decompose_linear,
    load_bundle,
    load_table,
    reduced_matroid,
    reduced_points,
    save_bundle,
    verify_partition,
)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    density: float
    seed: int
    delta: float
    ell: int

    ALLOWED_KEYS = {"n", "density", "seed", "delta", "ell"}

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        unknown = set(data) - cls.ALLOWED_KEYS
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        missing = cls.ALLOWED_KEYS - set(data)
        if missing:
            raise ParameterError(f"missing config keys: {sorted(missing)}")
        return cls(
            n=int(data["n"]),
            density=float(data["density"]),
            seed=int(data["seed"]),
            delta=float(data["delta"]),
            ell=int(data["ell"]),
        )


def _read_matroid(path: str) -> Matroid:
    return parse_matroid(Path(path).read_text())


def _emit(args, payload, csv_rows: Optional[list[dict]] = None) -> None:
    if getattr(args, "format", "json") == "csv" and csv_rows is not None:
        header = list(csv_rows[0].keys()) if csv_rows else []
        lines = [",".join(header)]
        lines += [",".join(str(row[h]) for h in header) for row in csv_rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _random_matroid(n: int, density: float, rng: np.random.Generator) -> Matroid:
    size = max(int(round(density * ((1 << n) - 1))), n)
    for _ in range(64):
        points = rng.choice(np.arange(1, 1 << n), size=size, replace=False)
        elems = frozenset(int(p) for p in points)
        from .gf2 import rank_of_masks

        if rank_of_masks(elems) == n:
            return Matroid(n, elems)
    raise ContractError("could not sample a full-rank matroid at this density")


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def cmd_matroid_info(args) -> None:
    M = _read_matroid(args.infile)
    _emit(args, {"rank": M.rank, "size": len(M), "density": M.density()})


def cmd_critical(args) -> None:
    M = _read_matroid(args.infile)
    _emit(args, {"rank": M.rank, "critical": critical_number(M)})


def cmd_contains(args) -> None:
    M = _read_matroid(args.infile)
    N = _read_matroid(args.sub)
    witness = contains_copy(M, N, budget=args.max_ops)
    _emit(
        args,
        {
            "contained": witness is not None,
            "witness": [v.bits for v in witness.images] if witness else None,
        },
    )


def cmd_count(args) -> None:
    M = _read_matroid(args.infile)
    N = _read_matroid(args.sub)
    if args.mode == "exact":
        inj = count_injections(M, N, budget=args.max_ops)
        aut = automorphism_count(N, budget=args.max_ops)
        _emit(args, {"injections": inj, "aut": aut, "copies": inj // aut})
    else:
        if args.seed is None:
            raise ParameterError("sampled mode requires --seed")
        _emit(args, sampled_injection_count(M, N, args.trials, args.seed))


def cmd_gowers(args) -> None:
    if args.poly:
        table = phase_table(parse_poly(Path(args.poly).read_text()))
    elif args.infile:
        table = load_table(args.infile)
    else:
        raise ParameterError("gowers needs --in or --poly")
    norm = gowers_norm(table, args.d, strategy=args.strategy, budget=args.max_ops)
    _emit(
        args,
        {
            "d": args.d,
            "strategy": args.strategy or ("wht_base" if args.d >= 2 else "direct"),
            "norm": norm,
            "bias": fourier_bias(table) if not np.iscomplexobj(table) else None,
        },
    )


def cmd_decompose(args) -> None:
    M = _read_matroid(args.infile)
    D = decompose_linear(M.indicator(), args.eta_prime, budget=args.max_ops)
    save_bundle(D, args.outdir)
    _emit(
        args,
        {
            "complexity": D.factor.complexity,
            "order": D.factor.order,
            "residual_bias": fourier_bias(D.f2),
            "bundle": str(args.outdir),
        },
    )


def cmd_verify(args) -> None:
    M = _read_matroid(args.infile)
    D = load_bundle(args.bundle)
    eta = EtaSchedule.from_string(args.eta)
    report = verify_partition(
        M.indicator(), D, args.delta, eta, args.d, args.epsilon_target, budget=args.max_ops
    )
    _emit(args, report.to_json())


def cmd_reduced(args) -> None:
    M = _read_matroid(args.infile)
    D = load_bundle(args.bundle)
    R = reduced_matroid(M, D, args.epsilon, args.zeta)
    points = reduced_points(R, D, exclude_zero_atom=args.exclude_zero_atom)
    _emit(
        args,
        {
            "atoms": sorted(R.atoms),
            "order": R.order,
            "size": len(points),
            "points": [format(p, f"0{M.rank}b") for p in sorted(points)],
        },
    )


def cmd_uniformity(args) -> None:
    B = parse_factor(Path(args.factor).read_text())
    _emit(args, uniformity_report_json(B, budget=args.max_ops))


def _parse_forms(spec: str) -> LinearFormSystem:
    chunks = spec.split(",")
    width = max(len(chunk) for chunk in chunks)
    # binary strings are most-significant-variable first; reverse to bit order
    rows = [int(chunk[::-1], 2) for chunk in chunks]
    return LinearFormSystem(tuple(rows), width)


def cmd_phi(args) -> None:
    if args.sub:
        system = linear_forms_of(_read_matroid(args.sub))
    else:
        system = _parse_forms(args.forms)
    group = consistency_group(
        system, args.d, args.k, n0=args.n0, budget=args.max_ops
    )
    _emit(
        args,
        {
            "d": group.d,
            "k": group.k,
            "phi_size": group.size,
            "phi": [list(b) for b in sorted(group.elements)],
            "generators": [list(g) for g in group.generators],
            "perp": [list(l) for l in group.dependency_set],
            "n0": group.n0,
            "stable": group.stable,
        },
    )


def cmd_extbb(args) -> None:
    moduli = tuple(int(v) for v in args.group.split(","))
    orders = tuple(int(v) for v in args.subgroup.split(","))
    data = json.loads(Path(args.sets).read_text())
    sets = [[tuple(el) for el in s] for s in data["sets"]]
    cosets, certs = extbb_greedy(DyadicGroup(moduli), CoordinateSubgroup(orders), sets)
    _emit(
        args,
        {
            "cosets": [list(c) for c in cosets],
            "certificate": [c.to_json() for c in certs],
        },
    )


def cmd_bose_burton(args) -> None:
    M = _read_matroid(args.infile)
    res = bose_burton_witness(M, args.c)
    payload = {
        "bound": res.bound,
        "size": res.size,
        "refused": res.refused,
        "reason": res.reason,
        "witness": [v.bits for v in res.witness.images] if res.witness else None,
    }
    _emit(args, payload)


def cmd_extremal(args) -> None:
    N = make_geometry(args.geometry) if args.geometry else _read_matroid(args.forbid)
    res = exhaustive_extremal(
        args.n, N, mode=args.mode, trials=args.trials, seed=args.seed or 0,
        budget=args.max_ops,
    )
    payload = {
        "n": args.n,
        "value": res.value,
        "exact": res.exact,
        "witness": format_matroid(res.witness).splitlines() if res.witness else None,
    }
    _emit(args, payload)


def cmd_removal_check(args) -> None:
    if args.seed is None:
        raise ParameterError("removal-check requires --seed")
    rng = np.random.default_rng(args.seed)
    zeta = args.zeta
    zeta_p = zeta / 4.0
    rows = []
    for i in range(args.samples):
        M = _random_matroid(args.n, args.density, rng)
        D = decompose_linear(M.indicator(), args.eta_prime, budget=args.max_ops)
        R = reduced_matroid(M, D, args.epsilon, zeta_p)
        member = np.zeros(1 << args.n, dtype=bool)
        member[list(R.points)] = True
        f = M.indicator().astype(bool)
        dist = float(np.mean(f & ~member))
        rows.append(
            {
                "sample": i,
                "size": len(M),
                "complexity": D.factor.complexity,
                "distance": dist,
                "threshold": zeta / 2.0,
                "pass": dist < zeta / 2.0,
            }
        )
    _emit(
        args,
        {"samples": rows, "all_pass": all(r["pass"] for r in rows)},
        csv_rows=rows,
    )


def cmd_doubling_check(args) -> None:
    N = _read_matroid(args.infile)
    doubled = iterated_double(N, args.k)
    payload = {
        "rank": N.rank,
        "doubled_rank": doubled.rank,
        "size": len(N),
        "doubled_size": len(doubled),
        "rank_ok": doubled.rank == N.rank + args.k,
        "size_ok": len(doubled) == (1 << args.k) * len(N),
    }
    if args.host:
        M = _read_matroid(args.host)
        copy = contains_copy(M, N, budget=args.max_ops)
        hom = homomorphism_exists(M.elements, M.rank, doubled, budget=args.max_ops)
        payload["host_contains_base"] = copy is not None
        payload["host_homomorphism_doubled"] = hom is not None
        payload["contraction_property"] = (copy is None) or (hom is not None)
    _emit(args, payload)


def _scan_row(n: int, density: float, seed: int, N: Matroid, args) -> dict:
    rng = np.random.default_rng(seed)
    M = _random_matroid(n, density, rng)
    D = decompose_linear(M.indicator(), args.eta_prime, budget=args.max_ops)
    R = reduced_matroid(M, D, args.epsilon, args.zeta)
    hom = homomorphism_exists(R.points, n, N, budget=args.max_ops)
    inj = count_injections(M, N, budget=args.max_ops)
    aut = automorphism_count(N, budget=args.max_ops)
    return {
        "n": n,
        "density": density,
        "size": len(M),
        "complexity": D.factor.complexity,
        "hom_exists": hom is not None,
        "injections": inj,
        "copies": inj // aut,
    }


def cmd_erdos_stone_scan(args) -> None:
    if args.seed is None:
        raise ParameterError("erdos-stone-scan requires --seed")
    N = make_geometry(args.geometry) if args.geometry else _read_matroid(args.forbid)
    lo, hi = (int(v) for v in args.n_range.split(":"))
    densities = [float(v) for v in args.densities.split(",")]
    grid = [(n, dens) for n in range(lo, hi + 1) for dens in densities]
    jobs = [
        (n, dens, args.seed + 1000 * idx)
        for idx, (n, dens) in enumerate(grid)
    ]
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(
                pool.map(lambda job: _scan_row(job[0], job[1], job[2], N, args), jobs)
            )
    else:
        rows = [_scan_row(n, dens, seed, N, args) for n, dens, seed in jobs]
    threshold = 1.0 - 2.0 ** (1 - critical_number(N))
    _emit(
        args,
        {"threshold_density": threshold, "rows": rows},
        csv_rows=rows,
    )


def cmd_threshold_demo(args) -> None:
    if args.config:
        cfg = ExperimentConfig.from_json(args.config)
        rng = np.random.default_rng(cfg.seed)
        M = _random_matroid(cfg.n, cfg.density, rng)
        delta, ell = cfg.delta, cfg.ell
    elif args.infile:
        M = _read_matroid(args.infile)
        delta, ell = args.delta, args.ell
    else:
        raise ParameterError("threshold-demo needs --config or --in")
    report = threshold_demo_n21(M, delta, ell, budget=args.max_ops)
    payload = report.to_json()
    if report.witness is not None:
        target = n_geometry(ell, 2, 1)
        images = sorted(report.witness.apply(x) for x in target.elements)
        payload["witness_elements"] = [format(p, f"0{M.rank}b") for p in images]
        payload["witness_verified"] = all(
            report.witness.apply(x) in M.elements for x in target.elements
        )
    _emit(args, payload)


def cmd_counting_check(args) -> None:
    M = _read_matroid(args.infile)
    N = _read_matroid(args.sub)
    D = load_bundle(args.bundle)
    report = counting_bound_check(M, D, N, args.epsilon, args.zeta, budget=args.max_ops)
    _emit(args, report.to_json())


# ---------------------------------------------------------------------------
# Selftests: each runs its module's simplest examples
# ---------------------------------------------------------------------------


def _selftest_matroid() -> None:
    assert len(bb(4, 2)) == 12
    assert len(pg(3)) == 7 and critical_number(pg(3)) == 3
    assert len(n_geometry(3, 2, 1)) == 5
    assert critical_number(ag(4)) == 1


def _selftest_contains() -> None:
    assert contains_copy(ag(3), pg(2)) is None
    assert contains_copy(pg(3), pg(2)) is not None
    assert contains_copy(pg(3), n_geometry(3, 2, 1)) is not None


def _selftest_count() -> None:
    assert count_injections(pg(3), pg(2)) == 42
    assert automorphism_count(pg(2)) == 6
    assert count_injections(ag(3), pg(2)) == 0
    assert count_injections(pg(2), pg(2)) >= 1


def _selftest_gowers() -> None:
    ones = np.ones(8)
    for d in (1, 2, 3):
        strat = "direct" if d == 1 else "wht_base"
        assert abs(gowers_norm(ones, d, strat) - 1.0) < 1e-12
    hp = np.zeros(8)
    hp[[0, 2, 4, 6]] = 1.0
    assert abs(fourier_bias(hp) - 0.5) < 1e-12
    assert fourier_bias(np.full(8, 0.7)) < 1e-12


def _selftest_walsh() -> None:
    ones = np.ones(16)
    spec = walsh_hadamard(ones)
    assert abs(spec[0] - 1.0) < 1e-12 and np.max(np.abs(spec[1:])) < 1e-12


def _selftest_factor() -> None:
    B = PolynomialFactor([NonclassicalPoly.from_terms(2, [(3, 0)])])
    assert sorted(B.atom_histogram().tolist()) == [1, 3]
    Bd = PolynomialFactor([NonclassicalPoly.from_terms(2, [(3, 1)])])
    assert Bd.order == 4


def _selftest_extbb() -> None:
    cosets, certs = extbb_greedy(
        DyadicGroup((2, 2)),
        CoordinateSubgroup((1, 1)),
        [[(1, 0), (0, 1), (1, 1)]],
    )
    assert certs[0].holds and certs[0].lhs == 1


def _selftest_bose_burton() -> None:
    res = bose_burton_witness(bb(4, 1), 2)
    assert res.refused
    res = bose_burton_witness(pg(3), 2)
    assert res.witness is not None


def _selftest_extremal() -> None:
    assert exhaustive_extremal(3, pg(3)).value == 6
    assert exhaustive_extremal(2, pg(2)).value == 2


def _selftest_demo() -> None:
    rep = threshold_demo_n21(pg(6), 0.1, 3)
    assert rep.outcome == "copy"
    rep = threshold_demo_n21(bb(6, 1), 0.2, 3)
    assert rep.outcome == "critical_certificate" and rep.chi_bound == 1


def _selftest_decompose() -> None:
    D = decompose_linear(ag(4).indicator(), 0.1)
    assert D.factor.complexity == 1 and float(np.max(np.abs(D.f2))) < 1e-12
    D = decompose_linear(np.full(16, 0.25), 0.1)
    assert D.factor.complexity == 0


_SELFTESTS: dict[str, list[Callable[[], None]]] = {
    "matroid-info": [_selftest_matroid],
    "critical": [_selftest_matroid],
    "contains": [_selftest_contains],
    "count": [_selftest_count],
    "gowers": [_selftest_gowers, _selftest_walsh],
    "decompose": [_selftest_decompose],
    "verify": [_selftest_decompose],
    "reduced": [_selftest_decompose],
    "uniformity": [_selftest_factor],
    "phi": [_selftest_factor],
    "extbb": [_selftest_extbb],
    "bose-burton": [_selftest_bose_burton],
    "extremal": [_selftest_extremal],
    "removal-check": [_selftest_decompose],
    "doubling-check": [_selftest_matroid],
    "erdos-stone-scan": [_selftest_count],
    "threshold-demo": [_selftest_demo],
    "counting-check": [_selftest_count],
}


def _run_selftest(command: str) -> int:
    try:
        for fn in _SELFTESTS[command]:
            fn()
    except AssertionError as exc:
        sys.stderr.write(f"selftest failed for {command}: {exc}\n")
        return 1
    sys.stdout.write(json.dumps({"command": command, "selftest": "ok"}) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--max-ops", type=int, default=None, help="operation budget cap")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--selftest", action="store_true", help="run built-in checks and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binmat")
    parser.add_argument(
        "--version",
        action="version",
        version=json.dumps({"version": __version__, "formats": FORMAT_VERSIONS}, sort_keys=True),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matroid-info")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(fn=cmd_matroid_info)
    _add_common(p)

    p = sub.add_parser("critical")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(fn=cmd_critical)
    _add_common(p)

    p = sub.add_parser("contains")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sub")
    p.set_defaults(fn=cmd_contains)
    _add_common(p)

    p = sub.add_parser("count")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sub")
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_count)
    _add_common(p)

    p = sub.add_parser("gowers")
    p.add_argument("--in", dest="infile")
    p.add_argument("--poly")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--strategy", choices=["direct", "recursive", "wht_base"], default=None)
    p.set_defaults(fn=cmd_gowers)
    _add_common(p)

    p = sub.add_parser("decompose")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--eta-prime", type=float, required=True)
    p.add_argument("--out-dir", dest="outdir", required=True)
    p.set_defaults(fn=cmd_decompose)
    _add_common(p)

    p = sub.add_parser("verify")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eta", required=True, help="schedule a*2^(-b*C)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--epsilon-target", type=float, required=True)
    p.set_defaults(fn=cmd_verify)
    _add_common(p)

    p = sub.add_parser("reduced")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--exclude-zero-atom", action="store_true")
    p.set_defaults(fn=cmd_reduced)
    _add_common(p)

    p = sub.add_parser("uniformity")
    p.add_argument("--factor", required=True)
    p.set_defaults(fn=cmd_uniformity)
    _add_common(p)

    p = sub.add_parser("phi")
    p.add_argument("--forms", help="comma-separated binary rows, e.g. 10,01,11")
    p.add_argument("--sub", help="matroid file; rows are its elements")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n0", type=int, default=None)
    p.set_defaults(fn=cmd_phi)
    _add_common(p)

    p = sub.add_parser("extbb")
    p.add_argument("--group", required=True, help="comma-separated moduli, e.g. 2,4,2")
    p.add_argument("--subgroup", required=True, help="comma-separated orders")
    p.add_argument("--sets", required=True, help='JSON file {"sets": [[[d1,d2,..], ..], ..]}')
    p.set_defaults(fn=cmd_extbb)
    _add_common(p)

    p = sub.add_parser("bose-burton")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--c", type=int, required=True)
    p.set_defaults(fn=cmd_bose_burton)
    _add_common(p)

    p = sub.add_parser("extremal")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--forbid", help="matroid file for N")
    p.add_argument("--geometry", help="e.g. PG(1,2)")
    p.add_argument("--mode", choices=["exact", "random"], default="exact")
    p.add_argument("--trials", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_extremal)
    _add_common(p)

    p = sub.add_parser("removal-check")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--density", type=float, default=0.6)
    p.add_argument("--zeta", type=float, default=0.3)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--eta-prime", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_removal_check)
    _add_common(p)

    p = sub.add_parser("doubling-check")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--host")
    p.set_defaults(fn=cmd_doubling_check)
    _add_common(p)

    p = sub.add_parser("erdos-stone-scan")
    p.add_argument("--geometry", help="pattern N, e.g. BB(3,2)")
    p.add_argument("--forbid", help="matroid file for N")
    p.add_argument("--n-range", default="4:6", help="lo:hi")
    p.add_argument("--densities", default="0.3,0.5,0.7")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--zeta", type=float, default=0.1)
    p.add_argument("--eta-prime", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_erdos_stone_scan)
    _add_common(p)

    p = sub.add_parser("threshold-demo")
    p.add_argument("--config", help="JSON {n, density, seed, delta, ell}")
    p.add_argument("--in", dest="infile")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--ell", type=int, default=3)
    p.set_defaults(fn=cmd_threshold_demo)
    _add_common(p)

    p = sub.add_parser("counting-check")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sub", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.set_defaults(fn=cmd_counting_check)
    _add_common(p)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # handled before argparse: version must emit unwrapped JSON, and selftests
    # must run without the command's required arguments
    if "--version" in argv:
        sys.stdout.write(
            json.dumps({"version": __version__, "formats": FORMAT_VERSIONS}, sort_keys=True)
            + "\n"
        )
        return 0
    if "--selftest" in argv:
        if not argv or argv[0].startswith("-") or argv[0] not in _SELFTESTS:
            sys.stderr.write("selftest needs a known subcommand\n")
            return 2
        return _run_selftest(argv[0])
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_ops is None:
        env = os.environ.get("BINMAT_MAX_OPS")
        args.max_ops = int(env) if env else None
    try:
        args.fn(args)
    except BudgetError as exc:
        sys.stderr.write(f"budget error: {exc}\n")
        return 3
    except ContractError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
