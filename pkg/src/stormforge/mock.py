"""Deliberately faulty solver executables for end-to-end testing.

``build_mock`` writes a small standalone Python program that speaks the
SMT-LIB stdin/stdout contract.  Behaviors:

``honest-forward[:BINARY]``
    exec the trusted solver on the same input.
``unsat-on-trigger:SYMBOL[:MIN_ASSERTS[:MIN_DEPTH]]``
    answer unsat at a check-sat when at least MIN_ASSERTS active assertions
    mention SYMBOL and one of them has depth at least MIN_DEPTH; sat otherwise.
``crash-on-trigger:SYMBOL[:EXIT_CODE]``
    exit with EXIT_CODE (default 139) at a check-sat whose active
    assertions mention SYMBOL.
``unknown-always``
    answer unknown to every check-sat.
``sleep-forever``
    never answer.
"""

from __future__ import annotations

import os
import stat
import sys
from dataclasses import dataclass

from stormforge.errors import ConfigError

BEHAVIORS = ("honest-forward", "unsat-on-trigger", "crash-on-trigger", "unknown-always", "sleep-forever")


@dataclass(frozen=True)
class MockBehavior:
    kind: str
    symbol: str = ""
    min_asserts: int = 1
    min_depth: int = 1
    exit_code: int = 139
    binary: str = "z3"

    @classmethod
    def parse(cls, spec: str) -> "MockBehavior":
        kind, *rest = spec.split(":")
        if kind not in BEHAVIORS:
            raise ConfigError(f"unknown mock behavior {kind!r}; expected one of {', '.join(BEHAVIORS)}")
        try:
            if kind == "honest-forward":
                return cls(kind, binary=rest[0] if rest else "z3")
            if kind == "unsat-on-trigger":
                if not rest:
                    raise ConfigError("unsat-on-trigger needs a trigger symbol")
                k = int(rest[1]) if len(rest) > 1 else 1
                d = int(rest[2]) if len(rest) > 2 else 1
                return cls(kind, symbol=rest[0], min_asserts=k, min_depth=d)
            if kind == "crash-on-trigger":
                if not rest:
                    raise ConfigError("crash-on-trigger needs a trigger symbol")
                return cls(kind, symbol=rest[0], exit_code=int(rest[1]) if len(rest) > 1 else 139)
        except ValueError as exc:
            raise ConfigError(f"bad mock behavior {spec!r}: {exc}") from exc
        return cls(kind)

    def spec(self) -> str:
        if self.kind == "honest-forward":
            return f"honest-forward:{self.binary}"
        if self.kind == "unsat-on-trigger":
            return f"unsat-on-trigger:{self.symbol}:{self.min_asserts}:{self.min_depth}"
        if self.kind == "crash-on-trigger":
            return f"crash-on-trigger:{self.symbol}:{self.exit_code}"
        return self.kind


# Standalone program; keep it stdlib-only so it starts quickly.
_TEMPLATE = r'''
import os, re, sys, time

KIND = {kind!r}
SYMBOL = {symbol!r}
MIN_ASSERTS = {min_asserts!r}
MIN_DEPTH = {min_depth!r}
EXIT_CODE = {exit_code!r}
BINARY = {binary!r}

TOKEN = re.compile(r'\s+|;[^\n]*|"(?:[^"]|"")*"|\|[^|]*\||[()]|[^\s()";|]+')


def read(text):
    stack, out = [], []
    for m in TOKEN.finditer(text):
        tok = m.group(0)
        if tok[0].isspace() or tok[0] == ";":
            continue
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if not stack:
                continue
            node = stack.pop()
            (stack[-1] if stack else out).append(node)
        else:
            if tok[0] == "|" and tok[-1] == "|":
                tok = tok[1:-1]
            (stack[-1] if stack else out).append(tok)
    return out


def depth(e):
    if not isinstance(e, list):
        return 1
    if not e or e[0] == "_":
        return 1
    args = e[1:]
    if e[0] in ("forall", "exists") and len(e) == 3:
        args = [e[2]]
    elif e[0] == "!" and len(e) > 1:
        return depth(e[1])
    if not args:
        return 1
    return 1 + max(depth(a) for a in args)


def mentions(e, sym):
    if not isinstance(e, list):
        return e == sym
    return any(mentions(x, sym) for x in e)


def main():
    if KIND == "honest-forward":
        if len(sys.argv) > 1:
            os.execvp(BINARY, [BINARY, "-smt2", sys.argv[1]])
        os.execvp(BINARY, [BINARY, "-in", "-smt2"])
    if KIND == "sleep-forever":
        while True:
            time.sleep(3600)
    text = open(sys.argv[1]).read() if len(sys.argv) > 1 else sys.stdin.read()
    frames = [[]]
    for cmd in read(text):
        if not isinstance(cmd, list) or not cmd:
            continue
        head = cmd[0]
        if head == "assert" and len(cmd) > 1:
            frames[-1].append(cmd[1])
        elif head == "push":
            n = int(cmd[1]) if len(cmd) > 1 else 1
            frames.extend([] for _ in range(n))
        elif head == "pop":
            n = int(cmd[1]) if len(cmd) > 1 else 1
            del frames[len(frames) - n:]
            if not frames:
                frames = [[]]
        elif head == "exit":
            break
        elif head == "check-sat":
            active = [a for fr in frames for a in fr]
            hits = [a for a in active if mentions(a, SYMBOL)] if SYMBOL else []
            if KIND == "unknown-always":
                print("unknown")
            elif KIND == "crash-on-trigger" and hits:
                sys.stdout.flush()
                os._exit(EXIT_CODE)
            elif KIND == "unsat-on-trigger" and len(hits) >= MIN_ASSERTS and max(depth(h) for h in hits) >= MIN_DEPTH:
                print("unsat")
            else:
                print("sat")
            sys.stdout.flush()


main()
'''


def mock_source(behavior: MockBehavior) -> str:
    return _TEMPLATE.format(
        kind=behavior.kind,
        symbol=behavior.symbol,
        min_asserts=behavior.min_asserts,
        min_depth=behavior.min_depth,
        exit_code=behavior.exit_code,
        binary=behavior.binary,
    )


def build_mock(behavior: MockBehavior | str, out_path: str, python: str | None = None) -> str:
    """Write an executable mock solver to ``out_path`` and return the path."""
    if isinstance(behavior, str):
        behavior = MockBehavior.parse(behavior)
    python = python or sys.executable
    d = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(d, exist_ok=True)
    with open(out_path, "w") as fh:
        fh.write(f"#!{python} -SE\n# stormforge mock solver: {behavior.spec()}\n")
        fh.write(mock_source(behavior))
    mode = os.stat(out_path).st_mode
    os.chmod(out_path, mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return os.path.abspath(out_path)


def mock_profile(path: str, id: str = "mock", timeout: float = 10.0, **kw):
    from stormforge.runner import SolverProfile

    return SolverProfile(id=id, binary=path, args=("{file}",), pipe_args=(), timeout=timeout, **kw)
