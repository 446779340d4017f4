"""Seed fragmentation (initial pool) and formula construction pool."""

from __future__ import annotations

import logging
import random
from typing import Iterator, Protocol, Sequence

from stormforge.errors import EmptyPool, StallError
from stormforge.oracle import TruthValue
from stormforge.smtlib.model import Assignment
from stormforge.smtlib.script import Script
from stormforge.smtlib.terms import Term, mk_and, mk_not
from stormforge.smtlib.transform import enumerate_predicates

log = logging.getLogger(__name__)

AND = "and"
NOT = "not"
P_AND = 0.5
P_INITIAL = 0.3
STALL_FACTOR = 50


class Evaluator(Protocol):
    def evaluate_many(self, preds: Sequence[Term], m: Assignment) -> list[TruthValue]: ...


class Pool:
    """Insertion-ordered map from Boolean terms to TRUE/FALSE."""

    def __init__(self, kind: str = "initial", d_max: int | None = None):
        self.kind = kind
        self.d_max = d_max
        self._entries: dict[Term, TruthValue] = {}
        self._keys: list[Term] = []

    def add(self, term: Term, value: TruthValue) -> bool:
        """Insert unless present or too deep; returns whether it was added."""
        if value is TruthValue.UNDETERMINED:
            raise ValueError("pools never hold undetermined predicates")
        if self.d_max is not None and term.depth > self.d_max:
            return False
        if term in self._entries:
            return False
        self._entries[term] = value
        self._keys.append(term)
        return True

    def __len__(self) -> int:
        return len(self._keys)

    def __bool__(self) -> bool:
        return bool(self._keys)

    def __contains__(self, term: Term) -> bool:
        return term in self._entries

    def __getitem__(self, term: Term) -> TruthValue:
        return self._entries[term]

    def __iter__(self) -> Iterator[Term]:
        return iter(self._keys)

    def items(self):
        return ((k, self._entries[k]) for k in self._keys)

    def get(self, term: Term, default=None):
        return self._entries.get(term, default)

    def at(self, index: int) -> tuple[Term, TruthValue]:
        k = self._keys[index]
        return k, self._entries[k]

    def sample(self, rng: random.Random) -> tuple[Term, TruthValue]:
        return self.at(rng.randrange(len(self._keys)))

    def max_depth(self) -> int:
        return max((t.depth for t in self._keys), default=0)

    def dump(self) -> str:
        """Diagnostic listing: valuation, tab, term."""
        return "".join(f"{v.value}\t{k}\n" for k, v in self.items())

    def __repr__(self) -> str:
        return f"<Pool {self.kind} size={len(self)}>"


def seed_predicates(script: Script) -> list[Term]:
    """Every extractable predicate of every assertion, deduplicated."""
    seen: dict[Term, None] = {}
    for a in script.assertions:
        for p in enumerate_predicates(a):
            seen.setdefault(p, None)
    return list(seen)


def populate_initial_pool(script: Script, d_max: int, m: Assignment, evaluator: Evaluator) -> Pool:
    if d_max < 1:
        raise ValueError("d_max must be at least 1")
    candidates = [p for p in seed_predicates(script) if p.depth <= d_max]
    values = evaluator.evaluate_many(candidates, m) if candidates else []
    pool = Pool("initial", d_max)
    dropped = 0
    for p, v in zip(candidates, values):
        if v is TruthValue.UNDETERMINED:
            dropped += 1
            continue
        pool.add(p, v)
    if dropped:
        log.info("dropped %d predicates without a determined valuation", dropped)
    if not pool:
        raise EmptyPool("no predicate of the seed survived depth bound and valuation")
    return pool


def rand_op(rng: random.Random) -> str:
    return AND if rng.random() < P_AND else NOT


def rand_formula(p_init: Pool, p_constr: Pool, rng: random.Random) -> tuple[Term, TruthValue]:
    """Uniform draw from the initial pool with probability 0.3, else from the
    construction pool; an empty construction pool falls back to the initial one."""
    use_init = rng.random() < P_INITIAL
    if use_init or not p_constr:
        return p_init.sample(rng)
    return p_constr.sample(rng)


def populate_construction_pool(p_init: Pool, nc: int, d_max: int, rng: random.Random,
                               strict: bool = False) -> Pool:
    if not p_init:
        raise EmptyPool("initial pool is empty")
    if nc < 0:
        raise ValueError("nc must be non-negative")
    pool = Pool("construction", d_max)
    attempts = 0
    limit = STALL_FACTOR * nc
    while len(pool) < nc:
        if attempts >= limit:
            msg = f"construction pool stalled at {len(pool)}/{nc} entries after {attempts} attempts"
            if strict:
                raise StallError(msg)
            log.info(msg)
            break
        attempts += 1
        f1, v1 = rand_formula(p_init, pool, rng)
        if rand_op(rng) == AND:
            f2, v2 = rand_formula(p_init, pool, rng)
            f, v = mk_and(f1, f2), TruthValue.of(bool(v1) and bool(v2))
        else:
            f, v = mk_not(f1), ~v1
        pool.add(f, v)
    return pool
