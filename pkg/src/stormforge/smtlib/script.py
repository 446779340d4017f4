"""SMT-LIB commands and scripts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from stormforge.smtlib.sorts import Sort
from stormforge.smtlib.terms import Term


@dataclass(frozen=True)
class SetLogic:
    logic: str


@dataclass(frozen=True)
class DeclareSort:
    name: str
    arity: int = 0


@dataclass(frozen=True)
class DeclareFun:
    """``declare-fun``; ``declare-const`` is the nullary case."""

    name: str
    params: tuple[Sort, ...]
    result: Sort
    const_syntax: bool = False


@dataclass(frozen=True)
class Constructor:
    name: str
    selectors: tuple[tuple[str, Sort], ...] = ()


@dataclass(frozen=True)
class DeclareDatatypes:
    names: tuple[str, ...]
    constructors: tuple[tuple[Constructor, ...], ...]


@dataclass(frozen=True)
class Assert:
    term: Term


@dataclass(frozen=True)
class CheckSat:
    pass


@dataclass(frozen=True)
class Push:
    n: int = 1


@dataclass(frozen=True)
class Pop:
    n: int = 1


@dataclass(frozen=True)
class GetModel:
    pass


@dataclass(frozen=True)
class Exit:
    pass


@dataclass(frozen=True)
class Passthrough:
    """Any other well-formed command, kept as normalized text.

    ``set-option``, ``set-info``, ``check-sat-using`` and friends land here.
    """

    head: str
    text: str


Command = Union[SetLogic, DeclareSort, DeclareFun, DeclareDatatypes, Assert,
                CheckSat, Push, Pop, GetModel, Exit, Passthrough]

DECLARATION_TYPES = (DeclareSort, DeclareFun, DeclareDatatypes)


@dataclass(frozen=True)
class Script:
    commands: tuple[Command, ...] = ()

    @property
    def logic(self) -> str | None:
        for c in self.commands:
            if isinstance(c, SetLogic):
                return c.logic
        return None

    @property
    def declarations(self) -> list[Command]:
        return [c for c in self.commands if isinstance(c, DECLARATION_TYPES)]

    @property
    def assertions(self) -> list[Term]:
        return [c.term for c in self.commands if isinstance(c, Assert)]

    @property
    def check_points(self) -> list[int]:
        """Command indices of check-sat style commands."""
        return [
            i for i, c in enumerate(self.commands)
            if isinstance(c, CheckSat)
            or (isinstance(c, Passthrough) and c.head.startswith("check-sat"))
        ]

    @property
    def options(self) -> list[Passthrough]:
        return [c for c in self.commands if isinstance(c, Passthrough)]

    def iter_assertions(self) -> Iterator[Term]:
        return iter(self.assertions)

    def __str__(self) -> str:
        from stormforge.smtlib.printer import print_script

        return print_script(self)
