"""Client for the trusted assignment oracle.

The oracle is an external SMT solver.  It is asked for a model of the
seed (or of its negation when the seed is unsatisfiable), and it decides
the truth of ground formulas obtained by substituting that model into
candidate predicates.
"""

from __future__ import annotations

import enum
import logging
import os
import random
import re
from typing import Sequence

from stormforge.errors import OracleUnavailable, SeedRejected, SpawnError, StormError
from stormforge.runner import (
    CRASH,
    SAT,
    UNKNOWN,
    UNSAT,
    SolverProfile,
    run_process,
    run_solver,
    z3_profile,
)
from stormforge.smtlib.model import Assignment, FunctionValue
from stormforge.smtlib.parser import Context, Parser, _Fun, _Macro
from stormforge.smtlib.printer import print_command, print_term
from stormforge.smtlib.script import DeclareDatatypes, DeclareFun, DeclareSort, Script
from stormforge.smtlib.sexpr import SList, is_symbol, read_all
from stormforge.smtlib.sorts import BOOL, INT, REAL, REGLAN, STRING, Sort
from stormforge.smtlib.terms import FALSE, App, Const, Quant, Term, Var, iter_subterms, mk_and, mk_not
from stormforge.smtlib.transform import substitute

log = logging.getLogger(__name__)

DEFAULT_ORACLE_TIMEOUT = 10.0
BATCH = 400


class TruthValue(enum.Enum):
    TRUE = "T"
    FALSE = "F"
    UNDETERMINED = "?"

    def __bool__(self) -> bool:
        if self is TruthValue.UNDETERMINED:
            raise ValueError("undetermined truth value has no Boolean meaning")
        return self is TruthValue.TRUE

    def __invert__(self) -> "TruthValue":
        if self is TruthValue.UNDETERMINED:
            return self
        return TruthValue.FALSE if self is TruthValue.TRUE else TruthValue.TRUE

    @classmethod
    def of(cls, value: bool) -> "TruthValue":
        return cls.TRUE if value else cls.FALSE


def default_oracle_profile() -> SolverProfile:
    """z3 from PATH unless ``STORM_ORACLE`` names another binary."""
    binary = os.environ.get("STORM_ORACLE") or "z3"
    return z3_profile(binary=binary, id="oracle", timeout=DEFAULT_ORACLE_TIMEOUT)


def _segments(stdout: str, prefix: str = "@") -> dict[str, str]:
    """Split output at echo markers; each marker owns the text after it."""
    out: dict[str, str] = {}
    current = None
    buf: list[str] = []
    for line in stdout.splitlines():
        s = line.strip()
        if s.startswith(prefix) and " " not in s:
            if current is not None:
                out[current] = "\n".join(buf)
            current, buf = s, []
        else:
            buf.append(line)
    if current is not None:
        out[current] = "\n".join(buf)
    return out


def _verdict_of(segment: str) -> str | None:
    """The single verdict of a segment, or None if it errored or is missing."""
    verdicts = []
    for line in segment.splitlines():
        s = line.strip()
        if s.startswith("(error"):
            return None
        if s in (SAT, UNSAT, UNKNOWN):
            verdicts.append(s)
    return verdicts[0] if len(verdicts) == 1 else None


class OracleClient:
    """Stateless wrapper; each query spawns one oracle process."""

    def __init__(self, profile: SolverProfile | None = None):
        self.profile = profile or default_oracle_profile()
        self.queries = 0

    # -- plumbing -------------------------------------------------------
    def _options(self, seed: int | None = None) -> list[str]:
        lines = ["(set-option :print-success false)"]
        if self.profile.timeout_option:
            lines.append(self.profile.timeout_option.format(ms=int(self.profile.timeout * 1000)))
        if seed is not None and self.profile.seed_option:
            lines.append(self.profile.seed_option.format(seed=seed))
        return lines

    def _run(self, text: str, n_queries: int) -> str:
        self.queries += 1
        budget = self.profile.timeout * max(1, n_queries) + 10.0
        try:
            res = run_process(self.profile.command("pipe"), text, budget, self.profile.memory_mb)
        except SpawnError as exc:
            raise OracleUnavailable(str(exc)) from exc
        if res.timed_out:
            log.warning("oracle batch exceeded %.0fs", budget)
        elif res.returncode not in (0, 1) and not res.stdout.strip():
            raise OracleUnavailable(f"oracle exited with {res.returncode}: {res.stderr[:200]}")
        return res.stdout

    # -- model generation -----------------------------------------------
    def generate_assignment(self, script: Script, rng_seed: int) -> Assignment:
        """A model of the seed's assertions, or of their negation."""
        asserts = script.assertions
        decls = [print_command(c) for c in script.declarations]
        prov = f"{self.profile.id}:{self.profile.binary}:seed={rng_seed}"
        if not asserts:
            return complete_assignment(Assignment(provenance=prov), script)
        if not self.profile.seed_option:
            asserts = list(asserts)
            random.Random(rng_seed).shuffle(asserts)
        conj = asserts[0] if len(asserts) == 1 else mk_and(*asserts)
        for label, goal in (("pos", conj), ("neg", mk_not(conj))):
            lines = self._options(rng_seed) + ["(set-option :produce-models true)"] + decls
            lines += [f"(assert {print_term(goal)})", "(echo \"@q\")", "(check-sat)", "(get-model)",
                      "(echo \"@end\")"]
            out = self._run("\n".join(lines) + "\n", 1)
            seg = _segments(out).get("@q", "")
            body = seg.strip()
            first, _, rest = body.partition("\n")
            verdict = first.strip()
            if verdict == SAT:
                try:
                    m = parse_model(rest, script)
                except StormError as exc:
                    raise SeedRejected(f"unparseable oracle model: {exc}") from exc
                m.provenance = f"{prov}:{label}"
                return complete_assignment(m, script)
            if verdict == UNSAT:
                continue
            if label == "pos":
                # unknown/timeout on the assertions: still try the negation
                continue
        raise SeedRejected("oracle could not produce a model for the seed or its negation")

    # -- evaluation -----------------------------------------------------
    def evaluate(self, pred: Term, m: Assignment) -> TruthValue:
        return self.evaluate_many([pred], m)[0]

    def evaluate_many(self, preds: Sequence[Term], m: Assignment) -> list[TruthValue]:
        """Truth value of each predicate under ``m``.

        Each ground formula is checked both ways: TRUE needs ``sat`` for the
        formula and ``unsat`` for its negation.  Anything else (unknown,
        timeout, error, or a formula whose value depends on underspecified
        operations such as division by zero) is UNDETERMINED.
        """
        results: list[TruthValue] = []
        for start in range(0, len(preds), BATCH):
            results.extend(self._evaluate_batch(preds[start:start + BATCH], m))
        return results

    def _evaluate_batch(self, preds: Sequence[Term], m: Assignment) -> list[TruthValue]:
        grounds: list[Term | None] = []
        for p in preds:
            try:
                grounds.append(substitute(p, m))
            except StormError as exc:
                log.debug("cannot ground %s: %s", p, exc)
                grounds.append(None)
        has_binder = any(
            isinstance(s, Quant) for g in grounds if g is not None for s in iter_subterms(g)
        )
        lines = self._options() + [print_command(c) for c in m_preamble(m)]
        lines += universe_axioms(m, closure=has_binder)
        lines.append('(echo "@pre")')
        for i, g in enumerate(grounds):
            if g is None:
                continue
            text = print_term(g)
            lines += [f'(echo "@{i}+")', "(push 1)", f"(assert {text})", "(check-sat)", "(pop 1)",
                      f'(echo "@{i}-")', "(push 1)", f"(assert (not {text}))", "(check-sat)", "(pop 1)"]
        lines.append('(echo "@end")')
        out = self._run("\n".join(lines) + "\n", 2 * len(preds))
        segs = _segments(out)
        if "@pre" not in segs:
            raise OracleUnavailable(f"oracle produced no output: {out[:200]!r}")
        pre = _segments("@start\n" + out.split("@pre")[0]).get("@start", "")
        if "(error" in pre:
            raise OracleUnavailable(f"oracle rejected declarations: {pre.strip()[:300]}")
        values = []
        for i, g in enumerate(grounds):
            pos = _verdict_of(segs.get(f"@{i}+", "")) if g is not None else None
            neg = _verdict_of(segs.get(f"@{i}-", "")) if g is not None else None
            if pos == SAT and neg == UNSAT:
                values.append(TruthValue.TRUE)
            elif pos == UNSAT and neg == SAT:
                values.append(TruthValue.FALSE)
            else:
                values.append(TruthValue.UNDETERMINED)
        return values

    # -- ground truth ---------------------------------------------------
    def check_ground_truth(self, instance) -> str:
        """The oracle's verdict on an instance: sat, unsat, unknown or timeout."""
        mode = "pipe" if self.profile.can_pipe else "file"
        try:
            out = run_solver(self.profile, instance, mode)
        except SpawnError as exc:
            raise OracleUnavailable(str(exc)) from exc
        if out.verdict == CRASH:
            raise OracleUnavailable(f"oracle crashed (exit {out.exit_code}): {out.stderr[:200]}")
        return out.verdict


def m_preamble(m: Assignment) -> list:
    """Sort declarations plus witness constants needed by ground formulas."""
    cmds = list(m.sort_decls)
    for w, s in m.witnesses.items():
        cmds.append(DeclareFun(w, (), s, const_syntax=True))
    return cmds


def universe_axioms(m: Assignment, closure: bool) -> list[str]:
    lines = []
    for sort, ws in m.universe.items():
        names = [print_term(Var(w, sort)) for w in ws]
        if len(names) > 1:
            lines.append(f"(assert (distinct {' '.join(names)}))")
        if closure:
            eqs = " ".join(f"(= storm!u {n})" for n in names)
            body = eqs if len(names) == 1 else f"(or {eqs})"
            lines.append(f"(assert (forall ((storm!u {sort})) {body}))")
    return lines


# -- model parsing -------------------------------------------------------

class _ModelContext(Context):
    """Context that resolves auxiliary model functions lazily."""

    def __init__(self, base: Context, parser_factory, pending: dict[str, SList]):
        super().__init__()
        self.symbols = base.symbols + [{}]
        self.sorts = base.sorts
        self._pending = pending
        self._parser_factory = parser_factory
        self._busy: set[str] = set()

    def lookup(self, name: str):
        hit = super().lookup(name)
        if hit is not None:
            return hit
        if name in self._pending and name not in self._busy:
            self._busy.add(name)
            try:
                params, body = _parse_definition(self._parser_factory(), self._pending[name])
            finally:
                self._busy.discard(name)
            macro = _Macro(params, body)
            self.symbols[-1][name] = macro
            return macro
        return None


def _parse_definition(parser: Parser, e: SList) -> tuple[tuple[tuple[str, Sort], ...], Term]:
    _, _name, params_e, ret_e, body_e = e.items
    params, env = [], {}
    for p in params_e:
        s = parser.parse_sort(p.items[1])
        params.append((p.items[0].text, s))
        env[p.items[0].text] = Var(p.items[0].text, s)
    body = parser.parse_term(body_e, env)
    return tuple(params), body


def parse_model(text: str, script: Script) -> Assignment:
    """Parse ``(get-model)`` output into an Assignment over ``script``'s symbols."""
    exprs = read_all(text)
    items: list = []
    for e in exprs:
        if isinstance(e, SList):
            if e.items and is_symbol(e.items[0], "model"):
                items.extend(e.items[1:])
            elif e.items and is_symbol(e.items[0], "error"):
                raise SeedRejected(f"oracle error: {e}")
            else:
                items.extend(e.items)
    base = Context.from_script(script)
    declared = {c.name: c for c in script.declarations if isinstance(c, DeclareFun)}
    universe: dict[Sort, list[str]] = {}
    defs: dict[str, SList] = {}
    probe = Parser(base)
    for it in items:
        if not isinstance(it, SList) or not it.items:
            continue
        head = it.items[0]
        if is_symbol(head, "declare-fun") and len(it.items) == 4 and not it.items[2].items:
            s = probe.parse_sort(it.items[3])
            universe.setdefault(s, []).append(it.items[1].text)
        elif is_symbol(head, "define-fun") and len(it.items) == 5:
            defs[it.items[1].text] = it
    # witnesses of sorts without a universe section are used but never declared
    sorts = {c.name: Sort(c.name) for c in script.declarations if isinstance(c, DeclareSort) and c.arity == 0}
    known = {w for ws in universe.values() for w in ws}
    for name in sorted(set(re.findall(r"[^\s()|]+!val!\d+", text)) - known):
        s = sorts.get(name.rsplit("!val!", 1)[0])
        if s is not None:
            universe.setdefault(s, []).append(name)
    pending = {n: d for n, d in defs.items() if n not in declared}
    ctx_holder: list = []

    def factory():
        return Parser(ctx_holder[0])

    ctx = _ModelContext(base, factory, pending)
    ctx_holder.append(ctx)
    for s, ws in universe.items():
        for w in ws:
            ctx.symbols[-1][w] = _Fun((), s)
    m = Assignment(universe={s: tuple(ws) for s, ws in universe.items()})
    for name, d in defs.items():
        if name not in declared:
            continue
        params, body = _parse_definition(factory(), d)
        if declared[name].params:
            m.functions[name] = FunctionValue(params, body)
        else:
            m.values[name] = body
    return m


# -- sort defaults -------------------------------------------------------

def _datatype_table(script: Script) -> dict[Sort, tuple]:
    table = {}
    for c in script.declarations:
        if isinstance(c, DeclareDatatypes):
            for name, ctors in zip(c.names, c.constructors):
                table[Sort(name)] = ctors
    return table


def default_value(sort: Sort, m: Assignment, datatypes: dict, _seen: frozenset = frozenset()) -> Term:
    if sort == BOOL:
        return FALSE
    if sort == INT:
        return Const("0", INT)
    if sort == REAL:
        return Const("0.0", REAL)
    if sort == STRING:
        return Const('""', STRING)
    if sort == REGLAN:
        return App("re.none", (), REGLAN)
    if sort.is_bv:
        return Const("#b" + "0" * sort.width, sort)
    if sort.is_array:
        elem = default_value(sort.args[-1], m, datatypes, _seen)
        return App("const", (elem,), sort, qualifier=sort)
    if sort in datatypes:
        if sort in _seen:
            raise SeedRejected(f"no finite default value for datatype {sort}")
        ctors = sorted(datatypes[sort], key=lambda c: len(c.selectors))
        for ctor in ctors:
            try:
                args = [default_value(s, m, datatypes, _seen | {sort}) for _, s in ctor.selectors]
            except SeedRejected:
                continue
            return App(ctor.name, args, sort)
        raise SeedRejected(f"no finite default value for datatype {sort}")
    # uninterpreted sort: canonical witness
    ws = m.universe.get(sort)
    if not ws:
        ws = (f"{sort}!val!0",)
        m.universe[sort] = ws
    return Var(ws[0], sort)


def complete_assignment(m: Assignment, script: Script) -> Assignment:
    """Fill in sort defaults for every declared symbol the model omitted."""
    datatypes = _datatype_table(script)
    m.sort_decls = tuple(c for c in script.declarations if isinstance(c, (DeclareSort, DeclareDatatypes)))
    for c in script.declarations:
        if not isinstance(c, DeclareFun):
            continue
        if c.params:
            if c.name not in m.functions:
                params = tuple((f"x!{i}", s) for i, s in enumerate(c.params))
                m.functions[c.name] = FunctionValue(params, default_value(c.result, m, datatypes))
        elif c.name not in m.values:
            m.values[c.name] = default_value(c.result, m, datatypes)
    return m


def model_satisfies(client: OracleClient, script: Script, m: Assignment) -> bool:
    """Whether ``m`` makes every assertion of ``script`` true."""
    if not script.assertions:
        return True
    conj = mk_and(*script.assertions) if len(script.assertions) > 1 else script.assertions[0]
    return client.evaluate(conj, m) is TruthValue.TRUE


__all__ = [
    "OracleClient",
    "TruthValue",
    "complete_assignment",
    "default_oracle_profile",
    "default_value",
    "parse_model",
]
