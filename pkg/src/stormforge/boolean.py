"""Local truth-table interpreter for Boolean skeletons.

A skeleton is a term built from Boolean connectives over "atoms" whose
truth values are supplied by the caller.  This is the independent check
used to confirm that every generated instance is satisfied by the
campaign assignment without consulting any solver.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping

from stormforge.smtlib.terms import App, Const, Term, Var


class NotASkeleton(KeyError):
    pass


def evaluate_skeleton(t: Term, atoms: Mapping[Term, bool] | Callable[[Term], bool | None]) -> bool:
    """Evaluate ``t`` by recursion through connectives down to known atoms.

    Stored atom valuations take precedence over structure, so an atom
    that happens to be a conjunction is looked up rather than unfolded.
    """
    lookup = atoms.get if isinstance(atoms, Mapping) else atoms
    memo: dict[Term, bool] = {}

    def go(u: Term) -> bool:
        hit = memo.get(u)
        if hit is not None:
            return hit
        v = lookup(u)
        if v is None:
            v = _connective(u, go)
        memo[u] = v
        return v

    return go(t)


def _connective(u: Term, go) -> bool:
    if isinstance(u, Const) and u.text in ("true", "false"):
        return u.text == "true"
    if not isinstance(u, App) or not u.sort.is_bool:
        raise NotASkeleton(u)
    op, args = u.op, u.args
    if op == "not":
        return not go(args[0])
    if op == "and":
        return all(go(a) for a in args)
    if op == "or":
        return any(go(a) for a in args)
    if op == "xor":
        acc = False
        for a in args:
            acc ^= go(a)
        return acc
    if op == "=>":
        *prem, concl = args
        return not all(go(a) for a in prem) or go(concl)
    if op == "ite" and args[1].sort.is_bool:
        return go(args[1]) if go(args[0]) else go(args[2])
    if op == "=" and args[0].sort.is_bool:
        vals = [go(a) for a in args]
        return all(v == vals[0] for v in vals)
    if op == "distinct" and args[0].sort.is_bool:
        vals = [go(a) for a in args]
        return len(set(vals)) == len(vals)
    raise NotASkeleton(u)


def bool_atoms(t: Term) -> list[Var]:
    """Boolean variables of ``t`` in first-occurrence order."""
    out: dict[Var, None] = {}
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Var) and cur.sort.is_bool:
            out[cur] = None
        stack.extend(reversed(cur.children()))
    return list(out)


def truth_table(t: Term, atoms: Iterable[Var] | None = None) -> dict[tuple[bool, ...], bool]:
    """Brute-force truth table of ``t`` over its Boolean variables."""
    atoms = list(atoms) if atoms is not None else bool_atoms(t)
    table = {}
    for row in itertools.product((False, True), repeat=len(atoms)):
        table[row] = evaluate_skeleton(t, dict(zip(atoms, row)))
    return table
