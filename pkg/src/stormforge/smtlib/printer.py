"""Render terms and scripts back to SMT-LIB text, one command per line."""

from __future__ import annotations

from stormforge.smtlib.script import (
    Assert,
    CheckSat,
    Command,
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
from stormforge.smtlib.sexpr import quote_symbol
from stormforge.smtlib.terms import Annot, App, Const, Quant, Term, Var


def _op_text(t: App) -> str:
    if t.op == "is" and t.indices:
        return f"(_ is {quote_symbol(t.indices[0])})"
    name = quote_symbol(t.op)
    if t.indices:
        name = "(_ " + name + " " + " ".join(str(i) for i in t.indices) + ")"
    if t.qualifier is not None:
        name = f"(as {name} {t.qualifier})"
    return name


def print_term(t: Term) -> str:
    parts: list[str] = []
    # iterative to survive deep terms; stack holds terms or literal strings
    stack: list = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, str):
            parts.append(cur)
        elif isinstance(cur, Const):
            parts.append(cur.text)
        elif isinstance(cur, Var):
            parts.append(quote_symbol(cur.name))
        elif isinstance(cur, App):
            if not cur.args:
                parts.append(_op_text(cur))
                continue
            stack.append(")")
            for a in reversed(cur.args):
                stack.append(a)
                stack.append(" ")
            stack.append("(" + _op_text(cur))
        elif isinstance(cur, Quant):
            bound = " ".join(f"({quote_symbol(n)} {s})" for n, s in cur.bound)
            stack.append(")")
            stack.append(cur.body)
            stack.append(f"({cur.binder} ({bound}) ")
        elif isinstance(cur, Annot):
            attrs = "".join(f" {k}" + (f" {v}" if v is not None else "") for k, v in cur.attrs)
            stack.append(attrs + ")")
            stack.append(cur.body)
            stack.append("(! ")
        else:
            raise TypeError(f"not a term: {cur!r}")
    return "".join(parts)


def print_command(c: Command) -> str:
    if isinstance(c, SetLogic):
        return f"(set-logic {quote_symbol(c.logic)})"
    if isinstance(c, DeclareSort):
        return f"(declare-sort {quote_symbol(c.name)} {c.arity})"
    if isinstance(c, DeclareFun):
        if c.const_syntax and not c.params:
            return f"(declare-const {quote_symbol(c.name)} {c.result})"
        params = " ".join(str(s) for s in c.params)
        return f"(declare-fun {quote_symbol(c.name)} ({params}) {c.result})"
    if isinstance(c, DeclareDatatypes):
        heads = " ".join(f"({quote_symbol(n)} 0)" for n in c.names)
        bodies = []
        for ctors in c.constructors:
            cs = []
            for ctor in ctors:
                sels = "".join(f" ({quote_symbol(s)} {srt})" for s, srt in ctor.selectors)
                cs.append(f"({quote_symbol(ctor.name)}{sels})")
            bodies.append("(" + " ".join(cs) + ")")
        return f"(declare-datatypes ({heads}) ({' '.join(bodies)}))"
    if isinstance(c, Assert):
        return f"(assert {print_term(c.term)})"
    if isinstance(c, CheckSat):
        return "(check-sat)"
    if isinstance(c, Push):
        return f"(push {c.n})"
    if isinstance(c, Pop):
        return f"(pop {c.n})"
    if isinstance(c, GetModel):
        return "(get-model)"
    if isinstance(c, Exit):
        return "(exit)"
    if isinstance(c, Passthrough):
        return c.text
    raise TypeError(f"not a command: {c!r}")


def print_script(s: Script) -> str:
    return "".join(print_command(c) + "\n" for c in s.commands)
