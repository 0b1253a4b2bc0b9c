"""
Command-line surface: build, check, code, export, stats.

Exit codes: 0 verified, 1 refuted or undecodable, 2 usage or invalid input,
3 build budget exhausted, 4 check left unknown.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from config.build_config import BuildConfig
from config.check_config import CheckConfig
from utils.cache import CacheManager
from utils.ref_parser import RefParser

from .coding import (
    build_coded_lattice,
    check_decode_uniqueness,
    decode_g_sequence,
    decode_U,
    presentation_from_json,
    presentation_to_json,
    scramble,
)
from .errors import BudgetExceededError, DecodeError, LatticeTablesError, ValidationError
from .lattice_core import (
    CATALOG_NAMES,
    FiniteLattice,
    canonical_embedding,
    catalog,
    enumerate_usl_homs,
    galois_adjoint,
    load_lattice,
)
from .lattice_table import TableChain, Verdict, check_sequential, sequentialize, table_from_json, table_to_json
from .morphisms import (
    assemble_system,
    corrupt_embedding,
    embed_graph,
    embedding_from_json,
    embedding_to_json,
    verify_embedding,
)
from .partitions import principal_equivalence
from .pudlak import GraphBuilder, check_coherence, graph_from_json, growth_stats, table_of, verify_representation
from .unary_algebra import (
    check_maltsev,
    close_composition,
    dual_con_table,
    endomorphisms,
    is_endomorphism,
    principal_congruence,
    recheck_certificate,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_UNKNOWN = 4

VERDICT_EXIT = {Verdict.VERIFIED: EXIT_OK, Verdict.REFUTED: EXIT_REFUTED, Verdict.UNKNOWN: EXIT_UNKNOWN}

SUITES = (
    "representation", "coherence", "adjoint", "maltsev", "dual-con",
    "end-inclusion", "sequential", "embedding", "assembly", "coding",
)


def _env_int(name: str, fallback: int) -> int:
    return int(BuildConfig.env(name, str(fallback)))


@dataclass
class RunConfig:
    command: str
    lattice: Optional[str]
    stages: int
    homogenized: bool
    budget_nodes: int
    budget_endos: int
    max_stage: int
    seed: int
    jobs: int
    out: Optional[str]
    fmt: str

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        config = cls(
            command=args.command,
            lattice=getattr(args, "lattice", None),
            stages=getattr(args, "stages", 0),
            homogenized=not getattr(args, "pudlak", False),
            budget_nodes=args.budget_nodes,
            budget_endos=args.budget_endos,
            max_stage=getattr(args, "max_stage", 0),
            seed=args.seed,
            jobs=args.jobs,
            out=getattr(args, "out", None),
            fmt=getattr(args, "format", "json"),
        )
        config.validate()
        return config

    def validate(self) -> None:
        for name in ("budget_nodes", "budget_endos", "jobs"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"--{name.replace('_', '-')} must be positive")
        if self.stages is not None and self.stages < 0:
            raise ValidationError("--stages must not be negative")
        if self.max_stage is not None and self.max_stage < 0:
            raise ValidationError("--max-stage must not be negative")


# Parser

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-nodes", type=int, default=_env_int("BUDGET_NODES", BuildConfig.BUDGET_NODES))
    p.add_argument("--budget-endos", type=int, default=_env_int("BUDGET_ENDOS", CheckConfig.BUDGET_ENDOS))
    p.add_argument("--seed", type=int, default=_env_int("SEED", CheckConfig.SEED))
    p.add_argument("--jobs", type=int, default=_env_int("JOBS", CheckConfig.JOBS))


def _add_mode(p: argparse.ArgumentParser, default_homogenized: bool) -> None:
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--pudlak", action="store_true", help="One cell per edge per stage")
    mode.add_argument("--homogenized", dest="pudlak", action="store_false", help="j rounds of j copies at stage j")
    p.set_defaults(pudlak=not default_homogenized)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-tables", description="Lattice tables from colored graphs")
    subparsers = parser.add_subparsers(dest="command", required=True)

    build = subparsers.add_parser("build", help="Build graph stages and write graph/table artifacts")
    build.add_argument("--lattice", required=True, help="catalog:NAME or lattice JSON file")
    build.add_argument("--stages", type=int, default=1)
    _add_mode(build, default_homogenized=True)
    build.add_argument("--out", default="artifacts", help="Output directory")
    build.add_argument("--format", choices=("json", "dot"), default="json")
    _add_common(build)

    check = subparsers.add_parser("check", help="Run a verification suite")
    check.add_argument("suite", nargs="?", choices=SUITES)
    check.add_argument("--lattice", help="catalog:NAME or lattice JSON file (default: whole catalog)")
    check.add_argument("--stages", type=int, default=1)
    check.add_argument("--max-stage", type=int, default=_env_int("MAX_STAGE", CheckConfig.MAX_STAGE))
    _add_mode(check, default_homogenized=True)
    check.add_argument("--input", help="Table, embedding or presentation file")
    check.add_argument("--chain", default="2>3-chain>B2", help="Lattice chain, e.g. 2>3-chain>B2")
    check.add_argument("--count", type=int, default=100, help="Random instances for randomized suites")
    check.add_argument("--n", type=int, default=5, help="g-atoms for the coding suite")
    check.add_argument("--corrupt", action="store_true", help="Swap two image nodes before verifying")
    check.add_argument("--diagnostic", action="store_true", help="Sample Con End at the passing stage")
    check.add_argument("--recheck-certificate", metavar="FILE", help="Re-verify a certificate against --input")
    check.add_argument("--out", help="Report file")
    _add_common(check)

    code = subparsers.add_parser("code", help="Code a set into a lattice and decode it back")
    code.add_argument("--set", dest="coded_set", help="Set literal, e.g. 0,1,3")
    code.add_argument("--n", type=int, help="Number of g-atoms")
    code.add_argument("--scramble-seed", type=int, default=None)
    code.add_argument("--presentation", help="Presentation JSON file to read instead of --set")
    code.add_argument("--decode", action="store_true")
    code.add_argument("--out", help="Write the presentation JSON here")
    _add_common(code)

    export = subparsers.add_parser("export", help="Convert a graph or table artifact")
    export.add_argument("--input", required=True)
    export.add_argument("--format", choices=("json", "dot"), default="dot")
    export.add_argument("--out")
    _add_common(export)

    stats = subparsers.add_parser("stats", help="Print stage growth without writing artifacts")
    stats.add_argument("--lattice", required=True)
    stats.add_argument("--stages", type=int, default=2)
    _add_mode(stats, default_homogenized=False)
    _add_common(stats)
    return parser


# Helpers

def _lattice(ref: str) -> FiniteLattice:
    return load_lattice(RefParser.lattice_ref(ref))


def _lattices(ref: Optional[str]) -> List[Tuple[str, FiniteLattice]]:
    if ref:
        return [(RefParser.lattice_ref(ref), _lattice(ref))]
    return [(f"catalog:{name}", catalog(name)) for name in CATALOG_NAMES]


def _read_json(path: str) -> dict:
    file = Path(path)
    if not file.exists():
        raise ValidationError(f"input file not found: {path}")
    try:
        return json.loads(file.read_text())
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not JSON: {e}") from e


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        return
    file = Path(path)
    file.parent.mkdir(parents=True, exist_ok=True)
    file.write_text(text + "\n")


def _run_items(fn: Callable, items: Sequence, jobs: int) -> List:
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _cache() -> Optional[CacheManager]:
    if not BuildConfig.ENABLE_CACHE:
        return None
    return CacheManager(BuildConfig.CACHE_DIR, BuildConfig.CACHE_TTL_HOURS)


# build / stats / export

def cmd_build(config: RunConfig) -> int:
    lattice = _lattice(config.lattice)
    builder = GraphBuilder(lattice, config.homogenized, config.budget_nodes, cache=_cache())
    try:
        graph = builder.grow_to(config.stages)
    except BudgetExceededError as e:
        print(f"budget exhausted: {e}")
        return EXIT_BUDGET
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    for stage in range(config.stages + 1):
        _write(str(out / f"stage_{stage}.graph.json"), _dump(graph.to_json(stage)))
        _write(str(out / f"stage_{stage}.table.json"), _dump(table_to_json(table_of(graph, stage, config.jobs))))
        if config.fmt == "dot":
            _write(str(out / f"stage_{stage}.dot"), graph.to_dot(stage))
    for row in graph.stats():
        print(f"stage {row.stage}: {row.nodes} nodes, {row.edges} edges")
    return EXIT_OK


def cmd_stats(config: RunConfig) -> int:
    lattice = _lattice(config.lattice)
    try:
        rows = growth_stats(lattice, config.stages, config.homogenized, config.budget_nodes)
    except BudgetExceededError as e:
        print(f"budget exhausted: {e}")
        return EXIT_BUDGET
    print(f"{'stage':>5} {'nodes':>10} {'edges':>10}  histogram")
    for row in rows:
        histogram = ", ".join(f"{name}:{k}" for name, k in row.histogram.items())
        print(f"{row.stage:>5} {row.nodes:>10} {row.edges:>10}  {histogram}")
    return EXIT_OK


def cmd_export(config: RunConfig, input_path: str) -> int:
    payload = _read_json(input_path)
    if "cells" in payload:
        graph = graph_from_json(payload)
        text = graph.to_dot() if config.fmt == "dot" else _dump(graph.to_json())
    elif "relations" in payload:
        if config.fmt == "dot":
            raise ValidationError("tables export to JSON only")
        text = _dump(table_to_json(table_from_json(payload)))
    else:
        raise ValidationError(f"{input_path} is neither a graph nor a table file")
    if config.out:
        _write(config.out, text.rstrip("\n"))
    else:
        print(text.rstrip("\n"))
    return EXIT_OK


# check suites

def _suite_representation(config: RunConfig, args) -> Tuple[Verdict, dict]:
    def run(item):
        ref, lattice = item
        report = verify_representation(
            lattice, config.max_stage, config.budget_nodes, config.homogenized, 1,
            diagnostic=args.diagnostic, endo_budget=config.budget_endos, seed=config.seed,
        )
        print(f"{ref}: {report.verdict.value} (stage {report.passed_stage})")
        return ref, report

    results = _run_items(run, _lattices(config.lattice), config.jobs)
    verdict = Verdict.combine(r.verdict for _, r in results)
    return verdict, {ref: r.to_json() for ref, r in results}


def _suite_coherence(config: RunConfig, args) -> Tuple[Verdict, dict]:
    stage = min(config.max_stage, 2) if config.lattice is None else config.max_stage

    def run(item):
        ref, lattice = item
        report = check_coherence(lattice, stage, config.homogenized, config.budget_nodes, 1)
        print(f"{ref}: {'verified' if report.ok else 'refuted'}")
        return ref, report

    results = _run_items(run, _lattices(config.lattice), config.jobs)
    verdict = Verdict.VERIFIED if all(r.ok for _, r in results) else Verdict.REFUTED
    return verdict, {ref: r.to_json() for ref, r in results}


def _suite_adjoint(config: RunConfig, args) -> Tuple[Verdict, dict]:
    lattices = _lattices(config.lattice)
    items = list(itertools.product(lattices, repeat=2))

    def run(item):
        (ref0, L0), (ref1, L1) = item
        checked, failures = 0, []
        for hom in enumerate_usl_homs(L0, L1):
            checked += 1
            try:
                galois_adjoint(hom)
            except LatticeTablesError as e:
                failures.append({"hom": hom.to_json(), "error": str(e)})
        print(f"{ref0} -> {ref1}: {checked} homomorphisms, {len(failures)} failures")
        return f"{ref0}->{ref1}", {"homomorphisms": checked, "failures": failures}

    results = _run_items(run, items, config.jobs)
    verdict = Verdict.VERIFIED if all(not r["failures"] for _, r in results) else Verdict.REFUTED
    return verdict, dict(results)


def _load_table(config: RunConfig, args):
    if args.input:
        return table_from_json(_read_json(args.input))
    if not config.lattice:
        raise ValidationError("give --input TABLE or --lattice")
    builder = GraphBuilder(_lattice(config.lattice), config.homogenized, config.budget_nodes)
    return table_of(builder.grow_to(config.stages), config.stages, config.jobs)


def _suite_maltsev(config: RunConfig, args) -> Tuple[Verdict, dict]:
    table = _load_table(config, args)
    report = check_maltsev(table, config.budget_endos)
    witness = f" counterexample {list(report.counterexample)}" if report.counterexample else ""
    print(f"maltsev on {table.size} nodes: {report.verdict.value}{witness}")
    return report.verdict, report.to_json()


def _random_algebra(rng: random.Random):
    size = rng.randint(1, 5)
    generators = [tuple(rng.randrange(size) for _ in range(size)) for _ in range(rng.randint(1, 2))]
    return close_composition(generators, size, adjoin_identity=True)


def _suite_dual_con(config: RunConfig, args) -> Tuple[Verdict, dict]:
    rng = random.Random(config.seed)
    algebras = [_random_algebra(rng) for _ in range(args.count)]

    def run(algebra):
        table = dual_con_table(algebra)
        report = check_maltsev(table, config.budget_endos)
        inside = all(is_endomorphism(table, f) for f in algebra.maps)
        verdict = report.verdict if inside else Verdict.REFUTED
        return {"size": algebra.size, "maps": len(algebra.maps), "verdict": verdict.value, "algebraInsideEnd": inside}

    results = _run_items(run, algebras, config.jobs)
    verdict = Verdict.combine(Verdict(r["verdict"]) for r in results)
    print(f"dual-con: {sum(r['verdict'] == 'verified' for r in results)}/{len(results)} verified")
    return verdict, {"algebras": results}


def _inclusion_violations(table) -> Tuple[int, bool]:
    endos = endomorphisms(table)
    violations = 0
    for x, y in itertools.combinations(table.nodes, 2):
        if not principal_congruence(table, x, y, endos).leq(principal_equivalence(table, x, y)):
            violations += 1
    return violations, endos.complete


def _suite_end_inclusion(config: RunConfig, args) -> Tuple[Verdict, dict]:
    tables = []
    for ref, lattice in _lattices(config.lattice or "catalog:2"):
        builder = GraphBuilder(lattice, config.homogenized, config.budget_nodes)
        tables.append((f"{ref}@{config.stages}", table_of(builder.grow_to(config.stages), config.stages)))
    rng = random.Random(config.seed)
    for i in range(args.count):
        tables.append((f"dualCon#{i}", dual_con_table(_random_algebra(rng))))

    def run(item):
        name, table = item
        violations, complete = _inclusion_violations(table)
        return name, {"violations": violations, "complete": complete}

    results = _run_items(run, tables, config.jobs)
    total = sum(r["violations"] for _, r in results)
    print(f"end-inclusion: {total} violations over {len(results)} tables")
    return (Verdict.VERIFIED if total == 0 else Verdict.REFUTED), dict(results)


def _suite_sequential(config: RunConfig, args) -> Tuple[Verdict, dict]:
    if not config.lattice:
        raise ValidationError("the sequential suite needs --lattice")
    builder = GraphBuilder(_lattice(config.lattice), config.homogenized, config.budget_nodes)
    graph = builder.grow_to(config.stages)
    chain = TableChain(tuple(table_of(graph, s, config.jobs) for s in range(config.stages + 1)))
    report = check_sequential(chain, config.budget_endos)
    payload = report.to_json()
    try:
        payload["subsequence"] = sequentialize(chain, config.budget_endos)
    except BudgetExceededError as e:
        payload["subsequence"] = None
        payload["subsequenceError"] = str(e)
    for clause, result in sorted(report.clauses.items()):
        print(f"clause {clause}: {result.verdict.value} {result.detail}".rstrip())
    return report.verdict, payload


def _chain(text: str) -> List[FiniteLattice]:
    try:
        refs = RefParser.parse_chain(text)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    return [load_lattice(ref) for ref in refs]


def _suite_embedding(config: RunConfig, args) -> Tuple[Verdict, dict]:
    if args.input:
        embedding = embedding_from_json(_read_json(args.input), config.budget_nodes)
    else:
        lattices = _chain(args.chain)[:2]
        hom = canonical_embedding(lattices[0], lattices[1])
        embedding = embed_graph(hom, config.stages, config.budget_nodes)
    if args.corrupt:
        embedding = corrupt_embedding(embedding)
    report = verify_embedding(embedding)
    print(f"embedding {embedding.source_stage}->{embedding.target_stage}: {report.verdict.value}")
    return report.verdict, {"report": report.to_json(), "embedding": embedding_to_json(embedding)}


def _suite_assembly(config: RunConfig, args) -> Tuple[Verdict, dict]:
    lattices = _chain(args.chain)
    homs = [canonical_embedding(a, b) for a, b in zip(lattices, lattices[1:])]
    assembly = assemble_system(lattices, homs, config.stages, config.budget_nodes)
    print(f"assembly: {assembly.verdict.value} h={assembly.h} m={assembly.level_maps}")
    return assembly.verdict, assembly.to_json()


def _suite_coding(config: RunConfig, args) -> Tuple[Verdict, dict]:
    n = args.n
    seeds = range(config.seed, config.seed + 10)
    subsets = [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(n), r)]

    def run(u):
        coded = build_coded_lattice(u, n)
        unique = check_decode_uniqueness(coded).ok
        failures = []
        for seed in seeds:
            pres = scramble(coded, seed)
            perm = pres.truth.permutation
            try:
                ok = decode_U(pres) == u and decode_g_sequence(pres, n) == [perm[g] for g in coded.g]
            except DecodeError:
                ok = False
            if not ok:
                failures.append(seed)
        return {"set": sorted(u), "unique": unique, "failedSeeds": failures}

    results = _run_items(run, subsets, config.jobs)
    bad = [r for r in results if r["failedSeeds"] or not r["unique"]]
    print(f"coding: {len(results) - len(bad)}/{len(results)} sets decoded over {len(seeds)} seeds")
    return (Verdict.VERIFIED if not bad else Verdict.REFUTED), {"n": n, "sets": results}


SUITE_RUNNERS: Dict[str, Callable] = {
    "representation": _suite_representation,
    "coherence": _suite_coherence,
    "adjoint": _suite_adjoint,
    "maltsev": _suite_maltsev,
    "dual-con": _suite_dual_con,
    "end-inclusion": _suite_end_inclusion,
    "sequential": _suite_sequential,
    "embedding": _suite_embedding,
    "assembly": _suite_assembly,
    "coding": _suite_coding,
}


def cmd_check(config: RunConfig, args) -> int:
    if args.recheck_certificate:
        if not args.input:
            raise ValidationError("--recheck-certificate needs --input TABLE")
        table = table_from_json(_read_json(args.input))
        ok, message = recheck_certificate(table, _read_json(args.recheck_certificate))
        verdict = Verdict.VERIFIED if ok else Verdict.REFUTED
        payload = {"verdict": verdict.value, "message": message}
        print(f"certificate: {verdict.value} ({message})")
    else:
        if args.suite is None:
            raise ValidationError("name a check suite or give --recheck-certificate")
        try:
            verdict, payload = SUITE_RUNNERS[args.suite](config, args)
        except BudgetExceededError as e:
            logger.warning(f"⚠️ {args.suite}: {e}")
            print(f"{args.suite}: unknown ({e})")
            verdict, payload = Verdict.UNKNOWN, {"error": str(e)}
        payload = {"suite": args.suite, "verdict": verdict.value, "result": payload}
    _write(config.out, _dump(payload))
    return VERDICT_EXIT[verdict]


# code

def cmd_code(config: RunConfig, args) -> int:
    if args.presentation:
        pres = presentation_from_json(_read_json(args.presentation))
    else:
        if args.coded_set is None or args.n is None:
            raise ValidationError("give --set and --n, or --presentation")
        try:
            u = RefParser.parse_set(args.coded_set)
        except ValueError as e:
            raise ValidationError(str(e)) from e
        seed = args.scramble_seed if args.scramble_seed is not None else config.seed
        pres = scramble(build_coded_lattice(u, args.n), seed)
    _write(config.out, _dump(presentation_to_json(pres)))
    if not args.decode:
        print(f"presentation: {pres.size} elements, {len(pres.leq_facts)} facts, seed {pres.seed}")
        return EXIT_OK
    try:
        g = decode_g_sequence(pres, pres.g_count)
        decoded = decode_U(pres)
    except DecodeError as e:
        print(f"decode failed: {e}")
        return EXIT_REFUTED
    print(f"U = {RefParser.format_set(decoded)}")
    print(f"g = {g}")
    if pres.truth is not None and decoded != pres.truth.u:
        print(f"mismatch: expected {RefParser.format_set(pres.truth.u)}")
        return EXIT_REFUTED
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        config = RunConfig.from_args(args)
        if args.command == "build":
            return cmd_build(config)
        if args.command == "stats":
            return cmd_stats(config)
        if args.command == "export":
            return cmd_export(config, args.input)
        if args.command == "check":
            return cmd_check(config, args)
        return cmd_code(config, args)
    except ValidationError as e:
        logger.error(f"❌ {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as e:
        logger.error(f"❌ {e}")
        return EXIT_BUDGET if args.command in ("build", "stats") else EXIT_UNKNOWN
