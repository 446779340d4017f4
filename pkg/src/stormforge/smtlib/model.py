"""Assignments: values for the free symbols of a script."""

from __future__ import annotations

from dataclasses import dataclass, field

from stormforge.smtlib.sorts import Sort
from stormforge.smtlib.terms import Term


@dataclass(frozen=True)
class FunctionValue:
    """Interpretation of a declared function: ``(lambda params body)``."""

    params: tuple[tuple[str, Sort], ...]
    body: Term


@dataclass
class Assignment:
    """A total model for the free symbols of a seed.

    ``universe`` lists the witness constants standing for elements of
    uninterpreted sorts; they are pairwise distinct and must be declared
    whenever a substituted formula is shipped to a solver.
    """

    values: dict[str, Term] = field(default_factory=dict)
    functions: dict[str, FunctionValue] = field(default_factory=dict)
    universe: dict[Sort, tuple[str, ...]] = field(default_factory=dict)
    provenance: str = ""
    # declare-sort / declare-datatypes commands the values depend on
    sort_decls: tuple = ()

    def __contains__(self, name: str) -> bool:
        return name in self.values or name in self.functions

    @property
    def witnesses(self) -> dict[str, Sort]:
        return {w: s for s, ws in self.universe.items() for w in ws}
