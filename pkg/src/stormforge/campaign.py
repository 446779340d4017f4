"""Campaign orchestration: seed intake, logic filtering, scheduling, reporting."""

from __future__ import annotations

import configparser
import glob
import hashlib
import json
import logging
import os
import shlex
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from stormforge.errors import ConfigError, StormError
from stormforge.instancegen import NC_RANGE, NM_RANGE, FuzzConfig, Instance, fuzz, scale_budget, write_atomic
from stormforge.minimizer import minimize, write_artifacts
from stormforge.oracle import OracleClient, default_oracle_profile
from stormforge.pools import Pool, populate_initial_pool
from stormforge.runner import (
    SAT,
    UNKNOWN,
    UNSAT,
    VERDICTS,
    BugReport,
    SolverOutcome,
    SolverProfile,
    SolverRunner,
    classify,
    run_solver,
)
from stormforge.smtlib import parse_script
from stormforge.smtlib.model import Assignment
from stormforge.smtlib.script import Script

log = logging.getLogger(__name__)


@dataclass
class CampaignConfig:
    seeds: list[str]
    solvers: list[SolverProfile]
    out_dir: str
    oracle: SolverProfile = field(default_factory=default_oracle_profile)
    rng_seed: int = 0
    d_max: int = 64
    a_max: int = 64
    nc_range: tuple[int, int] = NC_RANGE
    nm_range: tuple[int, int] = NM_RANGE
    nc: int | None = None
    nm: int | None = None  # per-seed iteration budget; overrides the scaled value
    incremental: bool = False
    workers: int = 1
    logic_allow: tuple[str, ...] = ()
    logic_deny: tuple[str, ...] = ()
    minimize: bool = True
    minimize_nm: int = 100
    max_minimized: int = 1
    max_saved: int = 50
    keep_mutants: bool = False

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("no seeds given")
        if not self.solvers:
            raise ConfigError("no target solvers given")
        if self.d_max < 1 or self.a_max < 1:
            raise ConfigError("d_max and a_max must be positive")
        for name, (lo, hi) in (("nc_range", self.nc_range), ("nm_range", self.nm_range)):
            if lo < 0 or hi < lo:
                raise ConfigError(f"{name} must be a non-empty range, got [{lo}, {hi}]")
        if self.nc is not None and self.nc < 0 or self.nm is not None and self.nm < 0:
            raise ConfigError("nc and nm must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.minimize_nm < 1 or self.max_minimized < 0:
            raise ConfigError("invalid minimization budget")
        ids = [s.id for s in self.solvers]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate solver ids")


# -- config files -----------------------------------------------------------

_PROFILE_KEYS = {"binary", "args", "pipe_args", "incremental", "timeout", "memory_mb", "logics",
                 "seed_option", "timeout_option"}


def _profile_from_section(id: str, sec: configparser.SectionProxy, base: SolverProfile | None = None) -> SolverProfile:
    unknown = set(sec.keys()) - _PROFILE_KEYS
    if unknown:
        raise ConfigError(f"[{sec.name}]: unknown keys {sorted(unknown)}")
    d = base.to_dict() if base else {"id": id}
    d["id"] = id
    try:
        if "binary" in sec:
            d["binary"] = sec["binary"]
        if "args" in sec:
            d["args"] = tuple(shlex.split(sec["args"]))
        if "pipe_args" in sec:
            raw = sec["pipe_args"].strip()
            d["pipe_args"] = None if raw.lower() == "none" else tuple(shlex.split(raw))
        if "incremental" in sec:
            d["incremental"] = sec.getboolean("incremental")
        if "timeout" in sec:
            d["timeout"] = sec.getfloat("timeout")
        if "memory_mb" in sec:
            d["memory_mb"] = sec.getint("memory_mb")
        if "logics" in sec:
            d["logics"] = tuple(sec["logics"].replace(",", " ").split())
        for k in ("seed_option", "timeout_option"):
            if k in sec:
                d[k] = sec[k] or None
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}]: {exc}") from exc
    if "binary" not in d:
        raise ConfigError(f"[{sec.name}]: binary is required")
    return SolverProfile(**d)


def _range(text: str, name: str) -> tuple[int, int]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise ConfigError(f"{name} must be two integers")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def load_config(path: str | None, **overrides) -> CampaignConfig:
    """Read an ini-style config; keyword overrides (CLI flags) win over the file.

    Sections: ``[campaign]``, ``[oracle]`` and one ``[solver:<id>]`` per target.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    base_dir = "."
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        base_dir = os.path.dirname(os.path.abspath(path))
    camp = cp["campaign"] if cp.has_section("campaign") else {}
    kw: dict = {}
    try:
        if "seeds" in camp:
            kw["seeds"] = [_rel(base_dir, s) for s in camp["seeds"].split()]
        if "out" in camp:
            kw["out_dir"] = _rel(base_dir, camp["out"])
        for key, conv in (("seed", int), ("d_max", int), ("a_max", int), ("workers", int), ("nc", int),
                          ("nm", int), ("minimize_nm", int), ("max_minimized", int), ("max_saved", int)):
            if key in camp:
                kw["rng_seed" if key == "seed" else key] = conv(camp[key])
        for key in ("incremental", "minimize", "keep_mutants"):
            if key in camp:
                kw[key] = camp[key].strip().lower() in ("1", "true", "yes", "on")
        for key in ("nc_range", "nm_range"):
            if key in camp:
                kw[key] = _range(camp[key], key)
        for key in ("logic_allow", "logic_deny"):
            if key in camp:
                kw[key] = tuple(camp[key].replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"[campaign]: {exc}") from exc
    known = {"seeds", "out", "seed", "d_max", "a_max", "workers", "nc", "nm", "minimize_nm", "max_minimized",
             "max_saved", "incremental", "minimize", "keep_mutants", "nc_range", "nm_range", "logic_allow",
             "logic_deny"}
    if hasattr(camp, "keys") and set(camp.keys()) - known:
        raise ConfigError(f"[campaign]: unknown keys {sorted(set(camp.keys()) - known)}")

    oracle = default_oracle_profile()
    if cp.has_section("oracle") and not os.environ.get("STORM_ORACLE"):
        oracle = _profile_from_section("oracle", cp["oracle"], oracle)
    kw["oracle"] = oracle
    solvers = [_profile_from_section(s.split(":", 1)[1], cp[s]) for s in cp.sections() if s.startswith("solver:")]
    kw["solvers"] = solvers

    only = overrides.pop("solver_ids", None)
    for k, v in overrides.items():
        if v is not None:
            kw[k] = v
    if only:
        chosen = [s for s in kw["solvers"] if s.id in only]
        missing = set(only) - {s.id for s in chosen}
        if missing:
            raise ConfigError(f"unknown solver ids: {sorted(missing)}")
        kw["solvers"] = chosen
    kw.setdefault("seeds", [])
    kw.setdefault("out_dir", "storm-out")
    cfg = CampaignConfig(**kw)
    cfg.validate()
    return cfg


def _rel(base: str, p: str) -> str:
    return p if os.path.isabs(p) else os.path.join(base, p)


# -- seeds ------------------------------------------------------------------

@dataclass
class Seed:
    id: str
    path: str
    text: str
    script: Script | None = None
    error: str | None = None

    @property
    def logic(self) -> str | None:
        return self.script.logic if self.script is not None else None


def expand_seeds(patterns: Iterable[str]) -> list[str]:
    paths: list[str] = []
    for pat in patterns:
        hits = sorted(glob.glob(pat, recursive=True)) if glob.has_magic(pat) else [pat]
        for h in hits:
            if os.path.isdir(h):
                hits_dir = sorted(glob.glob(os.path.join(h, "**", "*.smt2"), recursive=True))
                paths.extend(hits_dir)
            else:
                paths.append(h)
    seen: dict[str, None] = {}
    for p in paths:
        seen.setdefault(os.path.normpath(p), None)
    return list(seen)


def load_seeds(paths: Sequence[str]) -> list[Seed]:
    seeds = []
    for i, p in enumerate(paths):
        stem = os.path.splitext(os.path.basename(p))[0]
        sid = f"{i:04d}-{stem}"
        try:
            with open(p) as fh:
                text = fh.read()
        except OSError as exc:
            seeds.append(Seed(sid, p, "", None, f"unreadable: {exc}"))
            continue
        try:
            seeds.append(Seed(sid, p, text, parse_script(text)))
        except StormError as exc:
            seeds.append(Seed(sid, p, text, None, f"{type(exc).__name__}: {exc}"))
    return seeds


def filter_seeds(seeds: Sequence[Seed], solver: SolverProfile, allow: Sequence[str] = (),
                 deny: Sequence[str] = (), probe: bool = True) -> list[Seed]:
    """Seeds the solver can be asked about.

    A named logic must be supported by the solver and pass the allow/deny
    lists.  A seed without set-logic is kept only if the solver gives a
    parseable verdict (sat, unsat or unknown) on it unmutated.
    """
    kept = []
    for s in seeds:
        if s.script is None:
            continue
        logic = s.logic
        if logic is not None:
            if deny and logic in deny or allow and logic not in allow:
                continue
            if solver.supports(logic):
                kept.append(s)
            continue
        if not probe:
            kept.append(s)
            continue
        try:
            out = run_solver(solver, s.text, "pipe" if solver.can_pipe else "file")
        except StormError as exc:
            log.info("probe of %s on %s failed: %s", solver.id, s.id, exc)
            continue
        if out.verdict in (SAT, UNSAT, UNKNOWN):
            kept.append(s)
    return kept


def seed_rng(master: int, seed_id: str) -> int:
    digest = hashlib.sha256(f"{master}:{seed_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def structural_hash(inst: Instance) -> str:
    text = "".join(f"{c}\n" for c in _lines(inst))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _lines(inst: Instance) -> list[str]:
    from stormforge.smtlib.printer import print_command

    return [print_command(c) for c in inst.to_script(provenance=False).commands]


# -- report -----------------------------------------------------------------

@dataclass
class Tally:
    generated: int = 0
    sat: int = 0
    unsat: int = 0
    unknown: int = 0
    crash: int = 0
    timeout: int = 0

    def add(self, verdict: str) -> None:
        self.generated += 1
        setattr(self, verdict, getattr(self, verdict) + 1)

    def merge(self, other: "Tally") -> None:
        for k in asdict(self):
            setattr(self, k, getattr(self, k) + getattr(other, k))

    @property
    def consistent(self) -> bool:
        return self.generated == sum(getattr(self, v) for v in VERDICTS)


@dataclass
class CampaignReport:
    tallies: dict[str, dict[str, Tally]] = field(default_factory=dict)
    bugs: list[dict] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    wall_time: float = 0.0
    oracle_is_target: bool = False

    def solver_totals(self) -> dict[str, Tally]:
        out: dict[str, Tally] = {}
        for per_solver in self.tallies.values():
            for sid, t in per_solver.items():
                out.setdefault(sid, Tally()).merge(t)
        return out

    @property
    def consistent(self) -> bool:
        return all(t.consistent for per in self.tallies.values() for t in per.values())

    @property
    def n_bugs(self) -> int:
        return len(self.bugs)

    def unique_bugs(self) -> list[dict]:
        seen, out = set(), []
        for b in self.bugs:
            key = (b["solver_id"], b.get("structural_hash") or b["bug_id"])
            if key not in seen:
                seen.add(key)
                out.append(b)
        return out

    def to_dict(self) -> dict:
        return {
            "wall_time": self.wall_time,
            "oracle_is_target": self.oracle_is_target,
            "consistent": self.consistent,
            "tallies": {s: {k: asdict(t) for k, t in per.items()} for s, per in self.tallies.items()},
            "totals": {k: asdict(t) for k, t in self.solver_totals().items()},
            "bugs": self.bugs,
            "unique_bugs": len(self.unique_bugs()),
            "skipped": self.skipped,
        }

    def summary(self) -> str:
        lines = [f"campaign finished in {self.wall_time:.1f}s"]
        if self.oracle_is_target:
            lines.append("warning: a target solver is the oracle binary; its class-A hits are suspect")
        lines.append(f"{'solver':<16}{'generated':>10}{'sat':>8}{'unsat':>8}{'unknown':>9}{'crash':>8}{'timeout':>9}")
        for sid, t in sorted(self.solver_totals().items()):
            lines.append(f"{sid:<16}{t.generated:>10}{t.sat:>8}{t.unsat:>8}{t.unknown:>9}{t.crash:>8}{t.timeout:>9}")
        by_class: dict[str, int] = {}
        for b in self.bugs:
            by_class[b["bug_class"]] = by_class.get(b["bug_class"], 0) + 1
        classes = ", ".join(f"{k}={v}" for k, v in sorted(by_class.items())) or "none"
        lines.append(f"bug reports: {self.n_bugs} ({classes}); unique: {len(self.unique_bugs())}")
        for b in self.bugs:
            if b.get("minimization"):
                mm = b["minimization"]
                o, m = mm["original"], mm["minimized"]
                lines.append(f"  {b['bug_id']}: {o['bytes']}/{o['assertions']}/{o['depth']} -> "
                             f"{m['bytes']}/{m['assertions']}/{m['depth']} in {mm['fuzz_calls']} fuzz calls")
        if self.skipped:
            lines.append(f"skipped: {len(self.skipped)}")
            for s in self.skipped:
                lines.append(f"  {s['seed']} [{s.get('solver', '*')}]: {s['reason']}")
        return "\n".join(lines) + "\n"


# -- driver -----------------------------------------------------------------

@dataclass
class _Prepared:
    seed: Seed
    rng_seed: int
    assignment: Assignment
    p_init: Pool
    nc: int
    nm: int


@dataclass
class _PairResult:
    seed_id: str
    solver_id: str
    tally: Tally
    records: list[dict]
    timings: list[dict]
    bugs: list[dict]


def _prepare(seed: Seed, cfg: CampaignConfig, oracle: OracleClient) -> _Prepared:
    rs = seed_rng(cfg.rng_seed, seed.id)
    m = oracle.generate_assignment(seed.script, rs)
    p_init = populate_initial_pool(seed.script, cfg.d_max, m, oracle)
    nc, nm = scale_budget(len(p_init), cfg.nc_range, cfg.nm_range)
    if cfg.nc is not None:
        nc = cfg.nc
    if cfg.nm is not None:
        nm = cfg.nm
    return _Prepared(seed, rs, m, p_init, nc, nm)


def _bug_id(b: BugReport) -> str:
    return f"{b.solver_id}-{b.seed_id}-{b.iteration}-{b.bug_class}"


def _run_pair(prep: _Prepared, profile: SolverProfile, cfg: CampaignConfig, oracle: OracleClient) -> _PairResult:
    seed = prep.seed
    runner = SolverRunner(profile)
    fcfg = FuzzConfig(nc=prep.nc, nm=prep.nm, d_max=cfg.d_max, a_max=cfg.a_max,
                      incremental=cfg.incremental, rng_seed=prep.rng_seed)
    tally = Tally()
    records: list[dict] = []
    timings: list[dict] = []
    reports: list[BugReport] = []
    saved: dict[str, int] = {}
    bugs_dir = os.path.join(cfg.out_dir, "bugs")
    mutant_dir = os.path.join(cfg.out_dir, "mutants", seed.id) if cfg.keep_mutants else None

    def observe(it: int, inst: Instance, out: SolverOutcome, path: str | None) -> None:
        tally.add(out.verdict)
        cls = classify(out, seed.logic)
        text = inst.to_smtlib()
        # wall time lives in timings.jsonl so runs.jsonl stays byte-reproducible;
        # paths are relative to out_dir for the same reason
        row = {
            "seed": seed.id, "solver": profile.id, "iter": it, "rng_seed": prep.rng_seed,
            "verdict": out.verdict, "exit_code": out.exit_code, "class": cls,
            "assertions": inst.n_assertions, "depth": inst.max_depth,
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
            "instance_path": os.path.relpath(path, cfg.out_dir) if path else None,
        }
        records.append(row)
        timings.append({"seed": seed.id, "solver": profile.id, "iter": it, "wall_time": round(out.wall_time, 6)})
        if cls is None or saved.get(cls, 0) >= cfg.max_saved:
            return
        saved[cls] = saved.get(cls, 0) + 1
        rep = BugReport(cls, profile.id, out, seed.id, prep.rng_seed, it, seed.logic, instance=inst)
        d = os.path.join(bugs_dir, _bug_id(rep))
        os.makedirs(d, exist_ok=True)
        rep.instance_path = os.path.join(d, "instance.smt2")
        write_atomic(rep.instance_path, text)
        row["instance_path"] = os.path.relpath(rep.instance_path, cfg.out_dir)
        reports.append(rep)

    fuzz(seed.script, fcfg, prep.assignment, runner, p_init=prep.p_init, seed_id=seed.id,
         solver_id=profile.id, out_dir=mutant_dir, observer=observe)

    out_bugs: list[dict] = []
    minimized = 0
    for rep in reports:
        entry = rep.to_dict()
        entry["bug_id"] = _bug_id(rep)
        entry["structural_hash"] = structural_hash(rep.instance)
        if rep.bug_class == "A" and cfg.minimize and minimized < cfg.max_minimized:
            minimized += 1
            mcfg = fcfg.with_(nm=min(fcfg.nm, cfg.minimize_nm), incremental=False)
            try:
                res = minimize(rep, mcfg, runner, assignment=prep.assignment, evaluator=oracle,
                               known=dict(prep.p_init.items()))
            except StormError as exc:
                log.warning("minimization of %s failed: %s", entry["bug_id"], exc)
            else:
                min_path, trace_path = write_artifacts(res, os.path.join(bugs_dir, entry["bug_id"]))
                rep.minimized_path = min_path
                entry["minimized_path"] = min_path
                entry["minimization"] = {k: v for k, v in res.to_dict().items() if k != "trace"}
                entry["structural_hash"] = structural_hash(res.instance)
        write_atomic(os.path.join(bugs_dir, entry["bug_id"], "report.json"),
                     json.dumps(entry, indent=2, sort_keys=True) + "\n")
        out_bugs.append(entry)
    return _PairResult(seed.id, profile.id, tally, records, timings, out_bugs)


def run_campaign(cfg: CampaignConfig) -> CampaignReport:
    """Fuzz every (seed, solver) pair that passes the logic filter.

    Pairs run on a thread pool (each pair owns its subprocesses); results
    are folded in seed-then-solver order so the outputs do not depend on
    scheduling.
    """
    cfg.validate()
    start = time.monotonic()
    os.makedirs(cfg.out_dir, exist_ok=True)
    oracle = OracleClient(cfg.oracle)
    report = CampaignReport()
    oracle_bin = os.path.realpath(_which(cfg.oracle.binary))
    report.oracle_is_target = any(os.path.realpath(_which(s.binary)) == oracle_bin for s in cfg.solvers)
    if report.oracle_is_target:
        log.warning("a target solver is also the oracle; class-A answers cannot be trusted independently")

    seeds = load_seeds(expand_seeds(cfg.seeds))
    for s in seeds:
        if s.error:
            report.skipped.append({"seed": s.id, "path": s.path, "reason": s.error})

    pairs: dict[str, list[SolverProfile]] = {}
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        kept = list(pool.map(lambda prof: (prof, filter_seeds(seeds, prof, cfg.logic_allow, cfg.logic_deny)),
                             cfg.solvers))
        for prof, ok in kept:
            ok_ids = {s.id for s in ok}
            for s in seeds:
                if s.script is None:
                    continue
                if s.id in ok_ids:
                    pairs.setdefault(s.id, []).append(prof)
                else:
                    report.skipped.append({"seed": s.id, "solver": prof.id, "path": s.path,
                                           "reason": f"logic {s.logic or 'unspecified'} filtered"})

        todo = [s for s in seeds if s.id in pairs]

        def prepare(s: Seed):
            try:
                return _prepare(s, cfg, oracle)
            except StormError as exc:
                return exc

        prepared = list(pool.map(prepare, todo))
        jobs = []
        for s, prep in zip(todo, prepared):
            if isinstance(prep, Exception):
                report.skipped.append({"seed": s.id, "path": s.path, "reason": f"{type(prep).__name__}: {prep}"})
                continue
            for prof in pairs[s.id]:
                jobs.append((prep, prof, pool.submit(_run_pair, prep, prof, cfg, oracle)))

        records: list[dict] = []
        timings: list[dict] = []
        for prep, prof, fut in jobs:
            try:
                res = fut.result()
            except StormError as exc:
                report.skipped.append({"seed": prep.seed.id, "solver": prof.id, "path": prep.seed.path,
                                       "reason": f"{type(exc).__name__}: {exc}"})
                continue
            report.tallies.setdefault(res.seed_id, {})[res.solver_id] = res.tally
            records.extend(res.records)
            timings.extend(res.timings)
            report.bugs.extend(res.bugs)

    report.skipped.sort(key=lambda d: (d["seed"], d.get("solver", "")))
    _write_jsonl(os.path.join(cfg.out_dir, "runs.jsonl"), records)
    _write_jsonl(os.path.join(cfg.out_dir, "timings.jsonl"), timings)
    report.wall_time = time.monotonic() - start
    write_atomic(os.path.join(cfg.out_dir, "report.json"), json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    write_atomic(os.path.join(cfg.out_dir, "report.txt"), report.summary())
    return report


def _which(binary: str) -> str:
    import shutil

    return shutil.which(binary) or binary


def _write_jsonl(path: str, rows: Iterable[dict]) -> None:
    write_atomic(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
