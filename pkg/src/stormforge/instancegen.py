"""Assemble satisfiable-by-construction instances and drive the fuzz loop."""

from __future__ import annotations

import logging
import os
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

from stormforge.oracle import TruthValue
from stormforge.pools import Pool, populate_construction_pool, populate_initial_pool, rand_formula
from stormforge.runner import UNSAT, BugReport, SolverOutcome, classify
from stormforge.smtlib.model import Assignment
from stormforge.smtlib.printer import print_command
from stormforge.smtlib.script import (
    DECLARATION_TYPES,
    Assert,
    CheckSat,
    Command,
    Passthrough,
    Pop,
    Push,
    Script,
    SetLogic,
)
from stormforge.smtlib.terms import Term, mk_not

log = logging.getLogger(__name__)

NC_RANGE = (200, 1500)
NM_RANGE = (300, 1000)
POOL_SIZE_RANGE = (10, 2000)
MAX_NESTING = 4
MAX_CHECKS = 4
P_PUSH = 0.35
P_POP = 0.2


@dataclass(frozen=True)
class FuzzConfig:
    nc: int = NC_RANGE[0]
    nm: int = NM_RANGE[0]
    d_max: int = 64
    a_max: int = 64
    incremental: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if self.nc < 0 or self.nm < 0 or self.d_max < 1 or self.a_max < 1:
            raise ValueError(f"invalid fuzz bounds: {self}")

    def with_(self, **kw) -> "FuzzConfig":
        return replace(self, **kw)


def scale_budget(pool_size: int, nc_range=NC_RANGE, nm_range=NM_RANGE) -> tuple[int, int]:
    """NC and NM interpolated linearly in the initial pool size."""
    lo, hi = POOL_SIZE_RANGE
    t = (min(max(pool_size, lo), hi) - lo) / (hi - lo)
    nc = round(nc_range[0] + t * (nc_range[1] - nc_range[0]))
    nm = round(nm_range[0] + t * (nm_range[1] - nm_range[0]))
    return nc, nm


@dataclass
class Instance:
    declarations: tuple[Command, ...]
    commands: tuple[Command, ...]
    logic: str | None = None
    seed_id: str = ""
    rng_seed: int = 0
    iteration: int = 0
    _text: str | None = field(default=None, repr=False, compare=False)

    @property
    def incremental(self) -> bool:
        return any(isinstance(c, (Push, Pop)) for c in self.commands)

    @property
    def assertions(self) -> list[Term]:
        return [c.term for c in self.commands if isinstance(c, Assert)]

    @property
    def n_assertions(self) -> int:
        return sum(isinstance(c, Assert) for c in self.commands)

    @property
    def max_depth(self) -> int:
        return max((t.depth for t in self.assertions), default=0)

    @property
    def provenance(self) -> str:
        return f"seed={self.seed_id} rng={self.rng_seed} iter={self.iteration}"

    def to_script(self, provenance: bool = True) -> Script:
        head: list[Command] = []
        if self.logic:
            head.append(SetLogic(self.logic))
        if provenance:
            lit = '"' + self.provenance.replace('"', '""') + '"'
            head.append(Passthrough("set-info", f"(set-info :storm-provenance {lit})"))
        return Script(tuple(head) + tuple(self.declarations) + tuple(self.commands))

    def to_smtlib(self) -> str:
        if self._text is None:
            self._text = "".join(print_command(c) + "\n" for c in self.to_script().commands)
        return self._text

    @property
    def n_bytes(self) -> int:
        return len(self.to_smtlib().encode())

    @classmethod
    def from_script(cls, script: Script, seed_id: str = "", rng_seed: int = 0, iteration: int = 0) -> "Instance":
        decls = tuple(c for c in script.commands if isinstance(c, DECLARATION_TYPES))
        body = tuple(c for c in script.commands if isinstance(c, (Assert, Push, Pop, CheckSat)))
        if not any(isinstance(c, CheckSat) for c in body):
            body += (CheckSat(),)
        return cls(decls, body, script.logic, seed_id, rng_seed, iteration)


def _draw_assertion(p_init: Pool, p_constr: Pool, rng: random.Random) -> Term:
    f, v = rand_formula(p_init, p_constr, rng)
    # negate false formulas so that every assertion holds under the model
    return f if v is TruthValue.TRUE else mk_not(f)


def generate_instance(p_init: Pool, p_constr: Pool, a_max: int, rng: random.Random,
                      declarations: Sequence[Command] = (), logic: str | None = None) -> Instance:
    if a_max < 1:
        raise ValueError("a_max must be at least 1")
    ac = rng.randrange(a_max) + 1
    cmds: list[Command] = [Assert(_draw_assertion(p_init, p_constr, rng)) for _ in range(ac)]
    cmds.append(CheckSat())
    return Instance(tuple(declarations), tuple(cmds), logic)


def generate_incremental_instance(p_init: Pool, p_constr: Pool, a_max: int, rng: random.Random,
                                  declarations: Sequence[Command] = (),
                                  logic: str | None = None) -> Instance:
    """Interleave assertions with push/pop frames and several check-sats.

    Nesting is capped at a drawn depth in [1, 4]; there are 1 to 4
    check-sat points, the last one after all frames are popped.
    """
    if a_max < 1:
        raise ValueError("a_max must be at least 1")
    ac = rng.randrange(a_max) + 1
    nesting = rng.randint(1, MAX_NESTING)
    checks = rng.randint(1, MAX_CHECKS)
    cuts = set(rng.sample(range(ac - 1), min(checks - 1, ac - 1))) if ac > 1 else set()
    forced_push = rng.randrange(ac)
    cmds: list[Command] = []
    level = 0
    pushed = False
    for i in range(ac):
        r = rng.random()
        if level < nesting and (r < P_PUSH or (i == forced_push and not pushed)):
            cmds.append(Push(1))
            level += 1
            pushed = True
        elif level > 0 and r > 1 - P_POP:
            cmds.append(Pop(1))
            level -= 1
        cmds.append(Assert(_draw_assertion(p_init, p_constr, rng)))
        if i in cuts:
            cmds.append(CheckSat())
    cmds.extend(Pop(1) for _ in range(level))
    cmds.append(CheckSat())
    return Instance(tuple(declarations), tuple(cmds), logic)


def check_prefixes(commands: Iterable[Command]) -> list[list[Term]]:
    """Active assertion set at each check-sat; raises on pop underflow."""
    frames: list[list[Term]] = [[]]
    out = []
    for c in commands:
        if isinstance(c, Push):
            frames.extend([] for _ in range(c.n))
        elif isinstance(c, Pop):
            if c.n >= len(frames):
                raise ValueError("pop underflow")
            del frames[-c.n:]
        elif isinstance(c, Assert):
            frames[-1].append(c.term)
        elif isinstance(c, CheckSat):
            out.append([t for fr in frames for t in fr])
    return out


def is_balanced(commands: Iterable[Command]) -> bool:
    level = 0
    for c in commands:
        if isinstance(c, Push):
            level += c.n
        elif isinstance(c, Pop):
            level -= c.n
            if level < 0:
                return False
    return level == 0


Runner = Callable[..., SolverOutcome]
Observer = Callable[[int, Instance, SolverOutcome, "str | None"], None]


def fuzz(seed: Script, cfg: FuzzConfig, assignment: Assignment | None, runner: Runner, *,
         oracle=None, p_init: Pool | None = None, seed_id: str = "seed", solver_id: str = "solver",
         out_dir: str | None = None, observer: Observer | None = None,
         decidable=None) -> list[BugReport]:
    """One fuzzing run: fragment, construct, generate and check ``cfg.nm`` instances.

    Returns a class-A report for every instance the solver called unsat.
    Crashes and unknowns only reach ``observer``.
    """
    if cfg.nm == 0:
        return []
    if p_init is None:
        if oracle is None or assignment is None:
            raise ValueError("fuzz needs an oracle and assignment to build the initial pool")
        p_init = populate_initial_pool(seed, cfg.d_max, assignment, oracle)
    elif p_init.d_max is None or p_init.d_max > cfg.d_max:
        p_init = restrict(p_init, cfg.d_max)
    rng = random.Random(cfg.rng_seed)
    p_constr = populate_construction_pool(p_init, cfg.nc, cfg.d_max, rng)
    decls = tuple(c for c in seed.commands if isinstance(c, DECLARATION_TYPES))
    gen = generate_incremental_instance if cfg.incremental else generate_instance
    bugs: list[BugReport] = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    for it in range(cfg.nm):
        inst = gen(p_init, p_constr, cfg.a_max, rng, decls, seed.logic)
        inst.seed_id, inst.rng_seed, inst.iteration = seed_id, cfg.rng_seed, it
        path = None
        if out_dir is not None:
            path = os.path.join(out_dir, f"mutant-{it}.smt2")
            write_atomic(path, inst.to_smtlib())
        outcome = runner(inst, path)
        if observer is not None:
            observer(it, inst, outcome, path)
        if outcome.verdict == UNSAT:
            bugs.append(BugReport(
                bug_class=classify(outcome, seed.logic, decidable) or "A",
                solver_id=solver_id,
                outcome=outcome,
                seed_id=seed_id,
                rng_seed=cfg.rng_seed,
                iteration=it,
                logic=seed.logic,
                instance_path=path,
                instance=inst,
            ))
    return bugs


def restrict(pool: Pool, d_max: int) -> Pool:
    out = Pool(pool.kind, d_max)
    for t, v in pool.items():
        out.add(t, v)
    return out


def write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}.{id(text)}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
