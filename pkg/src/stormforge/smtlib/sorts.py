from __future__ import annotations

from dataclasses import dataclass

from stormforge.smtlib.sexpr import quote_symbol


@dataclass(frozen=True)
class Sort:
    name: str
    indices: tuple[int, ...] = ()
    args: tuple["Sort", ...] = ()

    def __post_init__(self):
        for i in self.indices:
            if i <= 0:
                raise ValueError(f"sort index must be positive, got {i} in {self.name}")

    def __str__(self) -> str:
        name = quote_symbol(self.name)
        if self.indices:
            name = "(_ " + name + " " + " ".join(map(str, self.indices)) + ")"
        if self.args:
            return "(" + name + " " + " ".join(map(str, self.args)) + ")"
        return name

    @property
    def is_bool(self) -> bool:
        return self is BOOL or self == BOOL

    @property
    def is_bv(self) -> bool:
        return self.name == "BitVec" and len(self.indices) == 1

    @property
    def width(self) -> int:
        assert self.is_bv
        return self.indices[0]

    @property
    def is_array(self) -> bool:
        return self.name == "Array" and len(self.args) >= 2

    @property
    def is_numeric(self) -> bool:
        return self.name in ("Int", "Real") and not self.args


BOOL = Sort("Bool")
INT = Sort("Int")
REAL = Sort("Real")
STRING = Sort("String")
REGLAN = Sort("RegLan")


def bitvec(width: int) -> Sort:
    return Sort("BitVec", (width,))


def array(*sorts: Sort) -> Sort:
    return Sort("Array", (), tuple(sorts))
