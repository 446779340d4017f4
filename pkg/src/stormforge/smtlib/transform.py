"""Substitution and predicate enumeration over terms."""

from __future__ import annotations

import itertools
from typing import Mapping

from stormforge.errors import MissingBinding
from stormforge.smtlib.model import Assignment, FunctionValue
from stormforge.smtlib.terms import App, Annot, Quant, Term, Var, strip_annotations


_PATTERN_KEYS = (":pattern", ":no-pattern")


def _fresh(name: str, avoid: set[str]) -> str:
    for k in itertools.count(1):
        cand = f"{name}!{k}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


class _Substituter:
    def __init__(self, values: Mapping[str, Term], functions: Mapping[str, FunctionValue],
                 strict: bool, witnesses: frozenset[str] = frozenset()):
        self.functions = functions
        self.strict = strict
        self.witnesses = witnesses
        self.memo: dict[tuple, dict[Term, Term]] = {}
        self._keep: list = []
        self._root_values = dict(values)

    def run(self, t: Term) -> Term:
        return self._walk(t, self._root_values, frozenset())

    def _walk(self, t: Term, values: Mapping[str, Term], bound: frozenset[str]) -> Term:
        # Declared function names are part of free_vars, so this also skips
        # terms without any function application to unfold.
        if not (t.free_vars - bound):
            return t
        ctx = (id(values), bound)
        memo = self.memo.get(ctx)
        if memo is None:
            memo = self.memo[ctx] = {}
            self._keep.append(values)
        hit = memo.get(t)
        if hit is not None:
            return hit
        out = self._do(t, values, bound)
        memo[t] = out
        return out

    def _do(self, t: Term, values: Mapping[str, Term], bound: frozenset[str]) -> Term:
        if isinstance(t, Var):
            if t.name in bound:
                return t
            if t.name in values:
                return values[t.name]
            if self.strict and t.name not in self.witnesses:
                raise MissingBinding(t.name)
            return t
        if isinstance(t, App):
            args = tuple(self._walk(a, values, bound) for a in t.args)
            if t.declared and t.op not in bound:
                fv = self.functions.get(t.op)
                if fv is not None:
                    return replace_vars(fv.body, {p: a for (p, _), a in zip(fv.params, args)})
                if self.strict:
                    raise MissingBinding(t.op)
            if all(a is b for a, b in zip(args, t.args)):
                return t
            return App(t.op, args, t.sort, t.indices, t.declared, t.qualifier)
        if isinstance(t, Annot):
            body = self._walk(t.body, values, bound)
            # patterns are raw text over the old symbols; they are only
            # instantiation hints, so drop them rather than leave them stale
            attrs = tuple(a for a in t.attrs if a[0] not in _PATTERN_KEYS)
            if body is t.body and len(attrs) == len(t.attrs):
                return t
            return Annot(body, attrs) if attrs else body
        if isinstance(t, Quant):
            names = {n for n, _ in t.bound}
            inner = {k: v for k, v in values.items() if k not in names}
            # Rename binders that would capture free names of inserted values.
            incoming: set[str] = set()
            for k in t.body.free_vars:
                if k in inner:
                    incoming |= inner[k].free_vars
            for name in t.body.free_vars:
                fv = self.functions.get(name)
                if fv is not None:
                    incoming |= fv.body.free_vars - {p for p, _ in fv.params}
            new_bound = []
            renames: dict[str, Term] = {}
            avoid = set(incoming) | t.body.free_vars | names
            for n, s in t.bound:
                if n in incoming:
                    fresh = _fresh(n, avoid)
                    avoid.add(fresh)
                    renames[n] = Var(fresh, s)
                    new_bound.append((fresh, s))
                else:
                    new_bound.append((n, s))
            body = t.body
            if renames:
                body = replace_vars(body, renames)
            new_names = frozenset(n for n, _ in new_bound)
            body = self._walk(body, inner, (bound - names) | new_names)
            return Quant(t.binder, new_bound, body)
        return t


def replace_vars(t: Term, mapping: Mapping[str, Term]) -> Term:
    """Capture-avoiding replacement of free variable occurrences."""
    if not mapping or not (t.free_vars & mapping.keys()):
        return t
    return _Substituter(mapping, {}, strict=False).run(t)


def substitute(t: Term, m: Assignment | Mapping[str, Term]) -> Term:
    """Replace every free symbol of ``t`` by its value under ``m``.

    Applications of declared functions are unfolded through their
    function value.  Witness constants of uninterpreted sorts are left in
    place; everything else must be bound or ``MissingBinding`` is raised.
    """
    if isinstance(m, Assignment):
        sub = _Substituter(m.values, m.functions, strict=True,
                           witnesses=frozenset(m.witnesses))
    else:
        sub = _Substituter(m, {}, strict=True)
    return sub.run(t)


def enumerate_predicates(t: Term) -> list[Term]:
    """Closed Boolean subterms of ``t`` in pre-order, deduplicated.

    Annotations are stripped first.  A subterm that mentions a variable
    bound by an enclosing binder is skipped, but its own Boolean subterms
    are still visited.
    """
    root = strip_annotations(t)
    seen: dict[Term, None] = {}
    visited: set[tuple[Term, frozenset[str]]] = set()
    stack: list[tuple[Term, frozenset[str]]] = [(root, frozenset())]
    while stack:
        cur, bound = stack.pop()
        if (cur, bound) in visited:
            continue
        visited.add((cur, bound))
        if cur.sort.is_bool and not (cur.free_vars & bound) and cur not in seen:
            seen[cur] = None
        if isinstance(cur, Quant):
            inner = bound | {n for n, _ in cur.bound}
            stack.append((cur.body, inner))
        else:
            for child in reversed(cur.children()):
                stack.append((child, bound))
    return list(seen)
