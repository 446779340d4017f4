"""Shrink bug-revealing instances by binary search over the fuzzer's bounds.

A bug-revealing instance is re-used as a fuzzing seed.  Fuzzing it with a
smaller assertion (then depth) bound either reproduces the bug, and the
smallest reproducing instance becomes the new seed, or it does not, and
the search moves to the upper half.  Every candidate comes out of the
fuzzer, so it is satisfiable by construction and no second solver is
needed to guard the ground truth.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from stormforge.boolean import NotASkeleton, evaluate_skeleton
from stormforge.instancegen import FuzzConfig, Instance, fuzz, write_atomic
from stormforge.oracle import TruthValue
from stormforge.runner import UNSAT, BugReport
from stormforge.smtlib.model import Assignment
from stormforge.smtlib.script import Script
from stormforge.smtlib.terms import Term

log = logging.getLogger(__name__)

ASSERTIONS = "assertions"
DEPTH = "depth"


@dataclass(frozen=True)
class SizeStats:
    bytes: int
    assertions: int
    depth: int

    @classmethod
    def of(cls, inst: Instance) -> "SizeStats":
        return cls(inst.n_bytes, inst.n_assertions, inst.max_depth)

    def __le__(self, other: "SizeStats") -> bool:
        return self.assertions <= other.assertions and self.depth <= other.depth


class CachedEvaluator:
    """Valuations from known pool entries, composed through connectives.

    Predicates that are neither known nor Boolean combinations of known
    ones go to the fallback oracle, if any; otherwise they are dropped.
    """

    def __init__(self, known: dict[Term, TruthValue] | None = None, fallback=None):
        self.known: dict[Term, TruthValue] = dict(known or {})
        self.fallback = fallback

    def _lookup(self, t: Term):
        v = self.known.get(t)
        return None if v is None else bool(v)

    def evaluate_many(self, preds: Sequence[Term], m: Assignment) -> list[TruthValue]:
        out: list[TruthValue | None] = []
        missing: list[int] = []
        for i, p in enumerate(preds):
            try:
                out.append(TruthValue.of(evaluate_skeleton(p, self._lookup)))
            except NotASkeleton:
                out.append(None)
                missing.append(i)
        if missing:
            if self.fallback is not None and m is not None:
                vals = self.fallback.evaluate_many([preds[i] for i in missing], m)
            else:
                vals = [TruthValue.UNDETERMINED] * len(missing)
            for i, v in zip(missing, vals):
                out[i] = v
        for p, v in zip(preds, out):
            if v is not TruthValue.UNDETERMINED:
                self.known[p] = v
        return out  # type: ignore[return-value]


@dataclass
class StageStep:
    stage: str
    low: int
    high: int
    bound: int
    found: int
    selected: SizeStats | None = None


@dataclass
class MinimizationResult:
    original: SizeStats
    minimized: SizeStats
    fuzz_calls: int
    trace: list[StageStep]
    instance: Instance
    reproduced: bool = True
    stage_calls: dict[str, int] = field(default_factory=dict)

    @property
    def byte_reduction(self) -> float:
        if not self.original.bytes:
            return 0.0
        return 1.0 - self.minimized.bytes / self.original.bytes

    def to_dict(self) -> dict:
        return {
            "original": asdict(self.original),
            "minimized": asdict(self.minimized),
            "fuzz_calls": self.fuzz_calls,
            "stage_calls": dict(self.stage_calls),
            "reproduced": self.reproduced,
            "byte_reduction": self.byte_reduction,
            "trace": [
                {**asdict(s), "selected": asdict(s.selected) if s.selected else None}
                for s in self.trace
            ],
        }


def _select(bugs: list[BugReport], key: str) -> Instance | None:
    cands = [b.instance for b in bugs if b.instance is not None]
    if not cands:
        return None
    if key == DEPTH:
        return min(cands, key=lambda i: (i.max_depth, i.n_bytes, i.to_smtlib()))
    return min(cands, key=lambda i: (i.n_assertions, i.n_bytes, i.to_smtlib()))


class _Search:
    def __init__(self, cfg: FuzzConfig, runner, assignment: Assignment | None, evaluator,
                 seed_id: str = "seed", solver_id: str = "solver"):
        self.cfg = cfg
        self.runner = runner
        self.assignment = assignment
        self.evaluator = evaluator
        self.seed_id = seed_id
        self.solver_id = solver_id
        self.calls = 0
        self.trace: list[StageStep] = []
        self.accepted: list[Instance] = []

    def fuzz_at(self, seed: Script, stage: str, bound: int, lo: int, hi: int, cfg: FuzzConfig) -> Instance | None:
        run_cfg = cfg.with_(a_max=bound) if stage == ASSERTIONS else cfg.with_(d_max=bound)
        self.calls += 1
        try:
            bugs = fuzz(seed, run_cfg, self.assignment, self.runner, oracle=self.evaluator,
                        seed_id=self.seed_id, solver_id=self.solver_id)
        except Exception as exc:  # an unusable seed at this bound counts as "not found"
            if not isinstance(exc, (ArithmeticError,)) and not _is_seed_error(exc):
                raise
            log.info("fuzz at %s=%d failed: %s", stage, bound, exc)
            bugs = []
        chosen = _select(bugs, stage)
        self.trace.append(StageStep(stage, lo, hi, bound, len(bugs),
                                    SizeStats.of(chosen) if chosen else None))
        if chosen is not None:
            self.accepted.append(chosen)
        return chosen

    def search(self, seed: Script, stage: str, lo: int, hi: int, cfg: FuzzConfig) -> tuple[Script, int]:
        """Binary search; returns the final seed and the bound it settled on."""
        if hi <= lo:
            return seed, hi
        mid = (lo + hi) // 2
        chosen = self.fuzz_at(seed, stage, mid, lo, hi, cfg)
        if chosen is not None:
            return self.search(chosen.to_script(provenance=False), stage, lo, mid, cfg)
        return self.search(seed, stage, mid + 1, hi, cfg)


def _is_seed_error(exc: Exception) -> bool:
    from stormforge.errors import EmptyPool, SeedRejected, UnsupportedError

    return isinstance(exc, (EmptyPool, SeedRejected, UnsupportedError))


def minimize_depth(s: Script, cfg: FuzzConfig, d_min: int, d_max: int, runner, *,
                   assignment: Assignment | None = None, evaluator=None,
                   search: _Search | None = None) -> Script:
    search = search or _Search(cfg, runner, assignment, evaluator)
    return search.search(s, DEPTH, d_min, d_max, cfg)[0]


def minimize_assertions(s: Script, cfg: FuzzConfig, a_min: int, a_max: int, runner, *,
                        assignment: Assignment | None = None, evaluator=None,
                        search: _Search | None = None) -> Script:
    search = search or _Search(cfg, runner, assignment, evaluator)
    return search.search(s, ASSERTIONS, a_min, a_max, cfg)[0]


def search_budget(low: int, high: int) -> int:
    """Most fuzz calls one binary-search stage may spend on [low, high]."""
    return math.ceil(math.log2(max(1, high - low + 1))) + 1


def minimize(report: BugReport, cfg: FuzzConfig, runner, *,
             assignment: Assignment | None = None, evaluator=None,
             known: dict[Term, TruthValue] | None = None,
             depth_first: bool = False,
             verify: Callable[[Instance], bool] | None = None) -> MinimizationResult:
    """Assertion-count search followed by depth search, then a final re-check.

    ``known`` seeds the valuation cache (typically the campaign's initial
    pool); ``evaluator`` is the fallback oracle for anything it cannot
    derive.  If the searches end on an instance larger than the original
    in assertion count or depth, the last accepted intermediate that is
    not larger is returned instead.
    """
    original = report.instance
    if original is None:
        raise ValueError("bug report carries no instance")
    orig_stats = SizeStats.of(original)
    cache = CachedEvaluator(known, evaluator)
    search = _Search(cfg, runner, assignment, cache, report.seed_id, report.solver_id)
    seed = original.to_script(provenance=False)

    stages = [DEPTH, ASSERTIONS] if depth_first else [ASSERTIONS, DEPTH]
    a_bound, d_bound = cfg.a_max, cfg.d_max
    stage_calls: dict[str, int] = {}
    for idx, stage in enumerate(stages, start=1):
        stage_cfg = cfg.with_(rng_seed=cfg.rng_seed + idx, a_max=a_bound, d_max=d_bound)
        before = search.calls
        if stage == ASSERTIONS:
            seed, a_bound = search.search(seed, ASSERTIONS, 1, cfg.a_max, stage_cfg)
        else:
            seed, d_bound = search.search(seed, DEPTH, 1, cfg.d_max, stage_cfg)
        stage_calls[stage] = search.calls - before

    def rebase(inst: Instance | Script) -> Instance:
        script = inst if isinstance(inst, Script) else inst.to_script(provenance=False)
        return Instance.from_script(script, report.seed_id, cfg.rng_seed, report.iteration)

    final = rebase(seed)
    if not SizeStats.of(final) <= orig_stats:
        smaller = [c for c in search.accepted if SizeStats.of(c) <= orig_stats]
        final = rebase(smaller[-1]) if smaller else original
    check = verify or (lambda inst: runner(inst, None).verdict == UNSAT)
    reproduced = check(final)
    if not reproduced:
        log.warning("minimized instance no longer reproduces; backing off")
        final = original
        for cand in reversed(search.accepted):
            if SizeStats.of(cand) <= orig_stats and check(cand):
                final = rebase(cand)
                break
    return MinimizationResult(orig_stats, SizeStats.of(final), search.calls, search.trace,
                              final, reproduced, stage_calls)


def write_artifacts(result: MinimizationResult, bug_dir: str) -> tuple[str, str]:
    os.makedirs(bug_dir, exist_ok=True)
    min_path = os.path.join(bug_dir, "min.smt2")
    trace_path = os.path.join(bug_dir, "trace.json")
    write_atomic(min_path, result.instance.to_smtlib())
    write_atomic(trace_path, json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
    return min_path, trace_path
