"""SMT-LIB v2 script parser with sort checking.

``let`` bindings, ``define-fun`` macros, ``define-sort`` aliases and
``:named`` labels are expanded inline, so the resulting terms are
self-contained and every Boolean subterm can be lifted out on its own.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass

from stormforge.errors import ExpansionLimitError, ParseError, SortError, UnsupportedError
from stormforge.smtlib import theories
from stormforge.smtlib.script import (
    Assert,
    CheckSat,
    Command,
    Constructor,
    DeclareDatatypes,
    DeclareFun,
    DeclareSort,
    Exit,
    GetModel,
    Passthrough,
    Pop,
    Push,
    Script,
    SetLogic,
)
from stormforge.smtlib.sexpr import (
    BINARY,
    DECIMAL,
    HEX,
    KEYWORD,
    NUMERAL,
    STRING,
    SYMBOL,
    Atom,
    SExpr,
    SList,
    count_nodes,
    is_symbol,
    read_all,
)
from stormforge.smtlib.sorts import BOOL, INT, REAL, REGLAN, Sort, bitvec
from stormforge.smtlib.sorts import STRING as STRING_SORT
from stormforge.smtlib.terms import FALSE, TRUE, Annot, App, Const, Quant, Term, Var
from stormforge.smtlib.transform import replace_vars

EXPANSION_CAP = 10
# env slot holding the free names of let values in scope
_CAPTURE_KEY = "\0captured"

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

_BUILTIN_SORTS = {"Bool": BOOL, "Int": INT, "Real": REAL, "String": STRING_SORT, "RegLan": REGLAN}
_UNSUPPORTED_COMMANDS = {"define-fun-rec", "define-funs-rec", "declare-codatatypes"}


@dataclass(frozen=True)
class _Fun:
    params: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class _Macro:
    params: tuple[tuple[str, Sort], ...]
    body: Term


@dataclass(frozen=True)
class _Ctor:
    params: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class _Selector:
    datatype: Sort
    result: Sort


@dataclass(frozen=True)
class _Tester:
    datatype: Sort
    ctor: str


@dataclass(frozen=True)
class _SortAlias:
    params: tuple[str, ...]
    body: SExpr


def _err(e: SExpr, msg: str) -> ParseError:
    return ParseError(e.line, e.col, msg)


class Context:
    """Scoped symbol and sort tables."""

    def __init__(self):
        self.symbols: list[dict[str, object]] = [{}]
        self.sorts: list[dict[str, object]] = [{}]
        self._fresh = itertools.count(1)

    def push(self) -> None:
        self.symbols.append({})
        self.sorts.append({})

    def pop(self) -> None:
        if len(self.symbols) == 1:
            raise ValueError("pop on empty assertion stack")
        self.symbols.pop()
        self.sorts.pop()

    def lookup(self, name: str):
        for frame in reversed(self.symbols):
            if name in frame:
                return frame[name]
        return None

    def lookup_sort(self, name: str):
        for frame in reversed(self.sorts):
            if name in frame:
                return frame[name]
        return None

    def define(self, name: str, entry) -> None:
        self.symbols[-1][name] = entry

    def define_sort(self, name: str, entry) -> None:
        self.sorts[-1][name] = entry

    def fresh_name(self, base: str, avoid: set[str]) -> str:
        while True:
            cand = f"{base}!{next(self._fresh)}"
            if cand not in avoid and self.lookup(cand) is None:
                return cand

    # -- declarations -------------------------------------------------
    def declare(self, cmd: Command) -> None:
        if isinstance(cmd, DeclareSort):
            self.define_sort(cmd.name, cmd.arity)
        elif isinstance(cmd, DeclareFun):
            self.define(cmd.name, _Fun(cmd.params, cmd.result))
        elif isinstance(cmd, DeclareDatatypes):
            for name in cmd.names:
                self.define_sort(name, Sort(name))
            for name, ctors in zip(cmd.names, cmd.constructors):
                dt = Sort(name)
                for ctor in ctors:
                    self.define(ctor.name, _Ctor(tuple(s for _, s in ctor.selectors), dt))
                    self.define("is-" + ctor.name, _Tester(dt, ctor.name))
                    for sel, s in ctor.selectors:
                        self.define(sel, _Selector(dt, s))

    @classmethod
    def from_script(cls, script: Script) -> "Context":
        ctx = cls()
        for cmd in script.declarations:
            ctx.declare(cmd)
        return ctx


class Parser:
    def __init__(self, ctx: Context | None = None):
        self.ctx = ctx or Context()
        self.logic: str | None = None

    # -- sorts ----------------------------------------------------------
    def parse_sort(self, e: SExpr, params: dict[str, Sort] | None = None) -> Sort:
        if isinstance(e, Atom):
            if e.kind != SYMBOL:
                raise _err(e, f"expected a sort, got {e}")
            if params and e.text in params:
                return params[e.text]
            if e.text in _BUILTIN_SORTS:
                return _BUILTIN_SORTS[e.text]
            entry = self.ctx.lookup_sort(e.text)
            if entry is None:
                raise _err(e, f"unknown sort {e.text}")
            if isinstance(entry, Sort):
                return entry
            if isinstance(entry, _SortAlias):
                if entry.params:
                    raise _err(e, f"sort {e.text} needs {len(entry.params)} parameters")
                return self.parse_sort(entry.body)
            if entry != 0:
                raise _err(e, f"sort {e.text} needs {entry} parameters")
            return Sort(e.text)
        if not e.items:
            raise _err(e, "empty sort")
        head = e.items[0]
        if is_symbol(head, "_"):
            if len(e.items) == 3 and is_symbol(e.items[1], "BitVec") and e.items[2].kind == NUMERAL:
                width = int(e.items[2].text)
                if width <= 0:
                    raise _err(e, "bitvector width must be positive")
                return bitvec(width)
            raise UnsupportedError(f"{e.line}:{e.col}: unsupported indexed sort {e}")
        if not is_symbol(head):
            raise _err(e, f"malformed sort {e}")
        args = tuple(self.parse_sort(x, params) for x in e.items[1:])
        name = head.text
        if name == "Array":
            if len(args) < 2:
                raise _err(e, "Array needs index and element sorts")
            return Sort("Array", (), args)
        entry = self.ctx.lookup_sort(name)
        if isinstance(entry, _SortAlias):
            if len(entry.params) != len(args):
                raise _err(e, f"sort alias {name} arity mismatch")
            return self.parse_sort(entry.body, dict(zip(entry.params, args)))
        if isinstance(entry, int) and entry == len(args):
            return Sort(name, (), args)
        if entry is None:
            raise UnsupportedError(f"{e.line}:{e.col}: unsupported sort {e}")
        raise _err(e, f"sort {name} arity mismatch")

    # -- terms ----------------------------------------------------------
    def parse_term(self, e: SExpr, env: dict | None = None) -> Term:
        return self._term(e, env or {})

    def _term(self, e: SExpr, env: dict) -> Term:
        if isinstance(e, Atom):
            return self._atom(e, env)
        if not e.items:
            raise _err(e, "empty application")
        head = e.items[0]
        if isinstance(head, Atom):
            if head.kind != SYMBOL:
                raise _err(head, f"cannot apply literal {head}")
            h = head.text
            if h == "let":
                return self._let(e, env)
            if h in ("forall", "exists", "lambda"):
                return self._binder(e, env)
            if h == "!":
                return self._annot(e, env)
            if h == "_":
                return self._indexed_const(e)
            if h == "as":
                return self._qualified(e, (), env)
            if h == "match":
                raise UnsupportedError(f"{e.line}:{e.col}: match expressions are not supported")
            args = [self._term(a, env) for a in e.items[1:]]
            return self._apply(head, h, (), args, env, None)
        if isinstance(head, SList) and head.items and is_symbol(head.items[0], "_"):
            op, indices = self._index_spec(head)
            args = [self._term(a, env) for a in e.items[1:]]
            if op == "is":
                return self._tester(head, indices, args)
            return self._apply(head, op, indices, args, env, None)
        if isinstance(head, SList) and head.items and is_symbol(head.items[0], "as"):
            args = [self._term(a, env) for a in e.items[1:]]
            return self._qualified(head, args, env)
        raise _err(e, f"malformed application {e}")

    def _atom(self, e: Atom, env: dict) -> Term:
        k = e.kind
        if k == NUMERAL:
            return Const(e.text, INT)
        if k == DECIMAL:
            return Const(e.text, REAL)
        if k == HEX:
            return Const(e.text, bitvec(4 * (len(e.text) - 2)))
        if k == BINARY:
            return Const(e.text, bitvec(len(e.text) - 2))
        if k == STRING:
            return Const(e.text, STRING_SORT)
        if k == KEYWORD:
            raise _err(e, f"unexpected keyword {e.text}")
        name = e.text
        if name in env:
            return env[name]
        if name == "true":
            return TRUE
        if name == "false":
            return FALSE
        entry = self.ctx.lookup(name)
        if entry is None:
            if name in theories.CONSTANTS:
                return App(name, (), theories.CONSTANTS[name])
            raise _err(e, f"unknown symbol {name}")
        if isinstance(entry, _Fun):
            if entry.params:
                raise SortError(f"{e.line}:{e.col}: function {name} used without arguments")
            return Var(name, entry.result)
        if isinstance(entry, _Macro):
            if entry.params:
                raise SortError(f"{e.line}:{e.col}: macro {name} used without arguments")
            return entry.body
        if isinstance(entry, _Ctor):
            if entry.params:
                raise SortError(f"{e.line}:{e.col}: constructor {name} used without arguments")
            return App(name, (), entry.result)
        raise SortError(f"{e.line}:{e.col}: {name} used as a constant")

    def _index_spec(self, e: SList) -> tuple[str, tuple]:
        if len(e.items) < 3 or not is_symbol(e.items[1]):
            raise _err(e, f"malformed indexed identifier {e}")
        op = e.items[1].text
        indices = []
        for ix in e.items[2:]:
            if isinstance(ix, Atom) and ix.kind == NUMERAL:
                indices.append(int(ix.text))
            elif isinstance(ix, Atom) and ix.kind == SYMBOL:
                indices.append(ix.text)
            else:
                raise _err(ix, f"bad index {ix}")
        return op, tuple(indices)

    def _indexed_const(self, e: SList) -> Term:
        op, indices = self._index_spec(e)
        if op.startswith("bv") and op[2:].isdigit() and len(indices) == 1 and isinstance(indices[0], int):
            if indices[0] <= 0:
                raise _err(e, "bitvector width must be positive")
            return Const(f"(_ {op} {indices[0]})", bitvec(indices[0]))
        if op == "as-array" and len(indices) == 1 and isinstance(indices[0], str):
            # z3 model syntax for an array given by a function graph
            entry = self.ctx.lookup(indices[0])
            if isinstance(entry, _Macro) and entry.params:
                return Quant("lambda", entry.params, entry.body)
        raise UnsupportedError(f"{e.line}:{e.col}: unsupported indexed constant {e}")

    def _qualified(self, e: SList, args, env: dict) -> Term:
        if len(e.items) != 3 or not is_symbol(e.items[1]):
            raise _err(e, f"malformed qualified identifier {e}")
        name = e.items[1].text
        sort = self.parse_sort(e.items[2])
        if name == "const":
            sorts = [a.sort for a in args]
            result = theories.infer("const", (), sorts, qualifier=sort)
            return App("const", args, result, qualifier=sort)
        entry = self.ctx.lookup(name)
        if isinstance(entry, _Ctor):
            if entry.result != sort:
                raise SortError(f"{e.line}:{e.col}: constructor {name} is not of sort {sort}")
            t = self._apply(e.items[1], name, (), list(args), env, None)
            return App(t.op, t.args, t.sort, qualifier=sort) if isinstance(t, App) else t
        t = self._term(e.items[1], env) if not args else self._apply(e.items[1], name, (), list(args), env, None)
        if t.sort != sort:
            raise SortError(f"{e.line}:{e.col}: {name} does not have sort {sort}")
        return t

    def _tester(self, e: SExpr, indices, args) -> Term:
        if len(indices) != 1 or not isinstance(indices[0], str):
            raise _err(e, "malformed tester")
        entry = self.ctx.lookup("is-" + indices[0])
        if not isinstance(entry, _Tester):
            raise _err(e, f"unknown constructor {indices[0]}")
        if len(args) != 1 or args[0].sort != entry.datatype:
            raise SortError(f"{e.line}:{e.col}: tester {indices[0]} applied to wrong sort")
        return App("is", args, BOOL, indices=indices)

    def _apply(self, at: SExpr, op: str, indices: tuple, args: list[Term], env: dict,
               qualifier: Sort | None) -> Term:
        if op in env:
            raise UnsupportedError(f"{at.line}:{at.col}: higher-order use of bound {op}")
        entry = self.ctx.lookup(op) if not indices else None
        sorts = [a.sort for a in args]
        if entry is not None:
            if isinstance(entry, (_Fun, _Ctor)):
                if len(entry.params) != len(args) or any(
                    p != s and not (p.is_numeric and s.is_numeric) for p, s in zip(entry.params, sorts)
                ):
                    raise SortError(f"{at.line}:{at.col}: ill-sorted application of {op}")
                return App(op, args, entry.result, declared=isinstance(entry, _Fun))
            if isinstance(entry, _Macro):
                if len(entry.params) != len(args) or any(
                    p != s and not (p.is_numeric and s.is_numeric) for (_, p), s in zip(entry.params, sorts)
                ):
                    raise SortError(f"{at.line}:{at.col}: ill-sorted application of {op}")
                return replace_vars(entry.body, {n: a for (n, _), a in zip(entry.params, args)})
            if isinstance(entry, _Selector):
                if len(args) != 1 or sorts[0] != entry.datatype:
                    raise SortError(f"{at.line}:{at.col}: ill-sorted selector {op}")
                return App(op, args, entry.result)
            if isinstance(entry, _Tester):
                if len(args) != 1 or sorts[0] != entry.datatype:
                    raise SortError(f"{at.line}:{at.col}: ill-sorted tester {op}")
                return App(op, args, BOOL)
        if indices and op in theories.INDEXED_ARITY:
            if len(indices) != theories.INDEXED_ARITY[op] or not all(isinstance(i, int) for i in indices):
                raise _err(at, f"wrong indices for {op}")
        elif indices:
            raise UnsupportedError(f"{at.line}:{at.col}: unsupported indexed operator {op}")
        if not args:
            raise _err(at, f"operator {op} applied to no arguments")
        try:
            result = theories.infer(op, indices, sorts, qualifier)
        except SortError as exc:
            raise SortError(f"{at.line}:{at.col}: {exc}") from None
        if result is None:
            raise UnsupportedError(f"{at.line}:{at.col}: unknown function symbol {op}")
        return App(op, args, result, indices)

    def _let(self, e: SList, env: dict) -> Term:
        if len(e.items) != 3 or not isinstance(e.items[1], SList):
            raise _err(e, "malformed let")
        new_env = dict(env)
        captured = set(env.get(_CAPTURE_KEY, ()))
        for b in e.items[1]:
            if not (isinstance(b, SList) and len(b.items) == 2 and is_symbol(b.items[0])):
                raise _err(b, "malformed let binding")
            value = self._term(b.items[1], env)
            new_env[b.items[0].text] = value
            captured |= value.free_vars
        new_env[_CAPTURE_KEY] = frozenset(captured)
        return self._term(e.items[2], new_env)

    def _binder(self, e: SList, env: dict) -> Term:
        binder = e.items[0].text
        if len(e.items) != 3 or not isinstance(e.items[1], SList) or not e.items[1].items:
            raise _err(e, f"malformed {binder}")
        # a bound name that occurs free in an in-scope let value would be
        # captured once the let is expanded, so rename it
        captured = set(env.get(_CAPTURE_KEY, ()))
        new_env = dict(env)
        bound = []
        for b in e.items[1]:
            if not (isinstance(b, SList) and len(b.items) == 2 and is_symbol(b.items[0])):
                raise _err(b, "malformed sorted variable")
            name = b.items[0].text
            sort = self.parse_sort(b.items[1])
            if name in captured:
                name = self.ctx.fresh_name(name, captured)
            new_env[b.items[0].text] = Var(name, sort)
            bound.append((name, sort))
        body = self._term(e.items[2], new_env)
        if binder != "lambda" and body.sort != BOOL:
            raise SortError(f"{e.line}:{e.col}: {binder} body must be Bool")
        return Quant(binder, bound, body)

    def _annot(self, e: SList, env: dict) -> Term:
        if len(e.items) < 3:
            raise _err(e, "annotation without attributes")
        body = self._term(e.items[1], env)
        attrs: list[tuple[str, str | None]] = []
        items = e.items[2:]
        i = 0
        while i < len(items):
            kw = items[i]
            if not (isinstance(kw, Atom) and kw.kind == KEYWORD):
                raise _err(kw, "expected attribute keyword")
            value = None
            if i + 1 < len(items) and not (isinstance(items[i + 1], Atom) and items[i + 1].kind == KEYWORD):
                value = items[i + 1]
                i += 1
            i += 1
            attrs.append((kw.text, None if value is None else str(value)))
            if kw.text == ":named":
                if not is_symbol(value):
                    raise _err(kw, ":named needs a symbol")
                self.ctx.define(value.text, _Macro((), body))
        return Annot(body, attrs)

    # -- commands -------------------------------------------------------
    def parse_commands(self, exprs: list[SExpr]) -> Script:
        cmds: list[Command] = []
        for e in exprs:
            cmd = self._command(e)
            if cmd is not None:
                cmds.append(cmd)
        return Script(tuple(cmds))

    def _command(self, e: SExpr) -> Command | None:
        if not isinstance(e, SList) or not e.items or not is_symbol(e.items[0]):
            raise _err(e, f"expected a command, got {e}")
        head = e.items[0].text
        args = e.items[1:]
        if head == "set-logic":
            if len(args) != 1 or not is_symbol(args[0]):
                raise _err(e, "malformed set-logic")
            if self.logic is not None:
                raise _err(e, "second set-logic command")
            self.logic = args[0].text
            return SetLogic(self.logic)
        if head == "declare-const":
            if len(args) != 2 or not is_symbol(args[0]):
                raise _err(e, "malformed declare-const")
            cmd = DeclareFun(args[0].text, (), self.parse_sort(args[1]), const_syntax=True)
            self._check_fresh(e, cmd.name)
            self.ctx.declare(cmd)
            return cmd
        if head == "declare-fun":
            if len(args) != 3 or not is_symbol(args[0]) or not isinstance(args[1], SList):
                raise _err(e, "malformed declare-fun")
            cmd = DeclareFun(args[0].text, tuple(self.parse_sort(s) for s in args[1]),
                             self.parse_sort(args[2]))
            self._check_fresh(e, cmd.name)
            self.ctx.declare(cmd)
            return cmd
        if head == "declare-sort":
            if not args or not is_symbol(args[0]) or len(args) > 2:
                raise _err(e, "malformed declare-sort")
            arity = int(args[1].text) if len(args) == 2 else 0
            cmd = DeclareSort(args[0].text, arity)
            self.ctx.declare(cmd)
            return cmd
        if head == "define-sort":
            if len(args) != 3 or not is_symbol(args[0]) or not isinstance(args[1], SList):
                raise _err(e, "malformed define-sort")
            params = tuple(p.text for p in args[1])
            self.ctx.define_sort(args[0].text, _SortAlias(params, args[2]))
            return None
        if head in ("define-fun", "define-const"):
            return self._define_fun(e, head, args)
        if head in ("declare-datatypes", "declare-datatype"):
            cmd = self._datatypes(e, head, args)
            self.ctx.declare(cmd)
            return cmd
        if head == "assert":
            if len(args) != 1:
                raise _err(e, "assert takes one term")
            t = self._term(args[0], {})
            if t.sort != BOOL:
                raise SortError(f"{e.line}:{e.col}: asserted term has sort {t.sort}, not Bool")
            limit = EXPANSION_CAP * count_nodes(args[0])
            if t.size > limit:
                raise ExpansionLimitError(
                    f"{e.line}:{e.col}: inline expansion grew assertion to {t.size} nodes (cap {limit})"
                )
            return Assert(t)
        if head == "check-sat":
            if args:
                raise _err(e, "check-sat takes no arguments")
            return CheckSat()
        if head in ("push", "pop"):
            n = 1
            if args:
                if len(args) != 1 or not (isinstance(args[0], Atom) and args[0].kind == NUMERAL):
                    raise _err(e, f"malformed {head}")
                n = int(args[0].text)
            for _ in range(n):
                if head == "push":
                    self.ctx.push()
                else:
                    try:
                        self.ctx.pop()
                    except ValueError:
                        raise _err(e, "pop below the base assertion level") from None
            return Push(n) if head == "push" else Pop(n)
        if head == "get-model":
            return GetModel()
        if head == "exit":
            return Exit()
        if head in _UNSUPPORTED_COMMANDS:
            raise UnsupportedError(f"{e.line}:{e.col}: command {head} is not supported")
        return Passthrough(head, str(e))

    def _check_fresh(self, e: SExpr, name: str) -> None:
        if name in self.ctx.symbols[-1]:
            raise _err(e, f"symbol {name} already declared")

    def _define_fun(self, e: SList, head: str, args) -> None:
        if head == "define-const":
            if len(args) != 3:
                raise _err(e, "malformed define-const")
            name_e, params_e, ret_e, body_e = args[0], SList(()), args[1], args[2]
        else:
            if len(args) != 4 or not isinstance(args[1], SList):
                raise _err(e, "malformed define-fun")
            name_e, params_e, ret_e, body_e = args
        if not is_symbol(name_e):
            raise _err(e, "malformed function name")
        params = []
        env = {}
        for p in params_e:
            if not (isinstance(p, SList) and len(p.items) == 2 and is_symbol(p.items[0])):
                raise _err(p, "malformed parameter")
            s = self.parse_sort(p.items[1])
            params.append((p.items[0].text, s))
            env[p.items[0].text] = Var(p.items[0].text, s)
        ret = self.parse_sort(ret_e)
        body = self._term(body_e, env)
        if body.sort != ret and not (body.sort.is_numeric and ret.is_numeric):
            raise SortError(f"{e.line}:{e.col}: body of {name_e.text} has sort {body.sort}, not {ret}")
        self._check_fresh(e, name_e.text)
        self.ctx.define(name_e.text, _Macro(tuple(params), body))
        return None

    def _datatypes(self, e: SList, head: str, args) -> DeclareDatatypes:
        if head == "declare-datatype":
            if len(args) != 2 or not is_symbol(args[0]) or not isinstance(args[1], SList):
                raise _err(e, "malformed declare-datatype")
            names = [args[0].text]
            bodies = [args[1].items]
        else:
            if len(args) != 2 or not isinstance(args[0], SList) or not isinstance(args[1], SList):
                raise _err(e, "malformed declare-datatypes")
            if args[0].items:
                names = []
                for d in args[0]:
                    if not (isinstance(d, SList) and len(d.items) == 2 and is_symbol(d.items[0])):
                        raise _err(d, "malformed datatype declaration")
                    if d.items[1].text != "0":
                        raise UnsupportedError(f"{d.line}:{d.col}: parametric datatypes are not supported")
                    names.append(d.items[0].text)
                bodies = [b.items if isinstance(b, SList) else None for b in args[1]]
                if len(bodies) != len(names):
                    raise _err(e, "datatype count mismatch")
            else:
                # legacy form: (declare-datatypes () ((Name ctor ...) ...))
                names, bodies = [], []
                for d in args[1]:
                    if not isinstance(d, SList) or not d.items or not is_symbol(d.items[0]):
                        raise _err(d, "malformed datatype")
                    names.append(d.items[0].text)
                    bodies.append(d.items[1:])
        for n in names:
            self.ctx.define_sort(n, Sort(n))
        all_ctors = []
        for body in bodies:
            if body is None:
                raise _err(e, "malformed constructor list")
            ctors = []
            for c in body:
                if is_symbol(c):
                    ctors.append(Constructor(c.text))
                    continue
                if isinstance(c, SList) and c.items and is_symbol(c.items[0], "par"):
                    raise UnsupportedError(f"{c.line}:{c.col}: parametric datatypes are not supported")
                if not (isinstance(c, SList) and c.items and is_symbol(c.items[0])):
                    raise _err(c, "malformed constructor")
                sels = []
                for s in c.items[1:]:
                    if not (isinstance(s, SList) and len(s.items) == 2 and is_symbol(s.items[0])):
                        raise _err(s, "malformed selector")
                    sels.append((s.items[0].text, self.parse_sort(s.items[1])))
                ctors.append(Constructor(c.items[0].text, tuple(sels)))
            if not ctors:
                raise _err(e, "datatype without constructors")
            all_ctors.append(tuple(ctors))
        return DeclareDatatypes(tuple(names), tuple(all_ctors))


def parse_script(text: str) -> Script:
    """Parse SMT-LIB source into a sort-checked :class:`Script`."""
    return Parser().parse_commands(read_all(text))


def parse_term(text: str, script: Script | None = None) -> Term:
    """Parse a single term against the declarations of ``script``."""
    ctx = Context.from_script(script) if script is not None else Context()
    exprs = read_all(text)
    if len(exprs) != 1:
        raise ParseError(1, 1, "expected exactly one term")
    return Parser(ctx).parse_term(exprs[0])
