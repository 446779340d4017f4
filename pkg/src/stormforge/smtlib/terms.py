"""Immutable SMT terms.

Every node caches its hash, depth and tree size at construction so that
structural equality and the depth bound checks used by the fuzzer stay
cheap even when subterms are heavily shared.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from stormforge.smtlib.sorts import BOOL, Sort, array


class Term:
    __slots__ = ("sort", "depth", "size", "_hash", "_free")

    def _init(self, sort: Sort, children: tuple, key) -> None:
        self.sort = sort
        self.depth = 1 + max((c.depth for c in children), default=0)
        self.size = 1 + sum(c.size for c in children)
        self._hash = hash(key)
        self._free = None

    def children(self) -> tuple["Term", ...]:
        return ()

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._key() == other._key()

    def __ne__(self, other) -> bool:
        return not self == other

    def _key(self):
        raise NotImplementedError

    @property
    def free_vars(self) -> frozenset[str]:
        """Names of symbol references not bound by an enclosing binder."""
        if self._free is None:
            self._free = self._compute_free()
        return self._free

    def _compute_free(self) -> frozenset[str]:
        out: set[str] = set()
        for c in self.children():
            out |= c.free_vars
        return frozenset(out)

    def __repr__(self) -> str:
        from stormforge.smtlib.printer import print_term

        return f"<{type(self).__name__} {print_term(self)}>"

    def __str__(self) -> str:
        from stormforge.smtlib.printer import print_term

        return print_term(self)


class Const(Term):
    """A literal: true/false, numerals, decimals, bitvector and string literals."""

    __slots__ = ("text",)

    def __init__(self, text: str, sort: Sort):
        self.text = text
        self._init(sort, (), ("c", text, sort))

    def _key(self):
        return (self.text, self.sort)


class Var(Term):
    """Reference to a declared constant or to a binder-introduced variable."""

    __slots__ = ("name",)

    def __init__(self, name: str, sort: Sort):
        self.name = name
        self._init(sort, (), ("v", name, sort))

    def _key(self):
        return (self.name, self.sort)

    def _compute_free(self):
        return frozenset((self.name,))


class App(Term):
    """Operator application.

    ``declared`` marks applications of user-declared (uninterpreted)
    functions, which are the only applications an assignment rewrites.
    ``qualifier`` holds the sort of an ``(as op S)`` qualified identifier.
    """

    __slots__ = ("op", "indices", "args", "declared", "qualifier")

    def __init__(
        self,
        op: str,
        args: Iterable[Term],
        sort: Sort,
        indices: tuple = (),
        declared: bool = False,
        qualifier: Sort | None = None,
    ):
        self.op = op
        self.args = tuple(args)
        self.indices = tuple(indices)
        self.declared = declared
        self.qualifier = qualifier
        self._init(sort, self.args, ("a", op, self.indices, self.args, sort, qualifier))

    def children(self):
        return self.args

    def _key(self):
        return (self.op, self.indices, self.args, self.sort, self.declared, self.qualifier)

    def _compute_free(self):
        out = super()._compute_free()
        if self.declared:
            out = out | {self.op}
        return out


class Quant(Term):
    """Binder node: ``forall``, ``exists`` or ``lambda``."""

    __slots__ = ("binder", "bound", "body")

    def __init__(self, binder: str, bound: Iterable[tuple[str, Sort]], body: Term):
        self.binder = binder
        self.bound = tuple(bound)
        self.body = body
        if binder == "lambda":
            sort = array(*(s for _, s in self.bound), body.sort)
        else:
            sort = BOOL
        self._init(sort, (body,), ("q", binder, self.bound, body))

    def children(self):
        return (self.body,)

    def _key(self):
        return (self.binder, self.bound, self.body)

    def _compute_free(self):
        return self.body.free_vars - {n for n, _ in self.bound}


class Annot(Term):
    """``(! body :attr value ...)``.  Transparent for sort and depth."""

    __slots__ = ("body", "attrs")

    def __init__(self, body: Term, attrs: Iterable[tuple[str, str | None]]):
        self.body = body
        self.attrs = tuple(attrs)
        self._init(body.sort, (body,), ("!", body, self.attrs))
        self.depth = body.depth
        self.size = body.size

    def children(self):
        return (self.body,)

    def _key(self):
        return (self.body, self.attrs)


TRUE = Const("true", BOOL)
FALSE = Const("false", BOOL)


def bool_const(value: bool) -> Const:
    return TRUE if value else FALSE


def mk_not(t: Term) -> App:
    return App("not", (t,), BOOL)


def mk_and(*ts: Term) -> App:
    return App("and", ts, BOOL)


def term_depth(t: Term) -> int:
    return t.depth


def recompute_depth(t: Term) -> int:
    """From-scratch depth, ignoring the cached value."""
    if isinstance(t, Annot):
        return recompute_depth(t.body)
    kids = t.children()
    if not kids:
        return 1
    return 1 + max(recompute_depth(k) for k in kids)


def strip_annotations(t: Term) -> Term:
    if isinstance(t, Annot):
        return strip_annotations(t.body)
    if isinstance(t, App):
        args = tuple(strip_annotations(a) for a in t.args)
        if all(a is b for a, b in zip(args, t.args)):
            return t
        return App(t.op, args, t.sort, t.indices, t.declared, t.qualifier)
    if isinstance(t, Quant):
        body = strip_annotations(t.body)
        return t if body is t.body else Quant(t.binder, t.bound, body)
    return t


def iter_subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal (with repetition for shared subterms)."""
    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children()))


def mentions(t: Term, name: str) -> bool:
    return name in t.free_vars
