"""Sort signatures of the built-in theory operators.

``infer`` returns the result sort of a theory application, raises
``SortError`` for ill-sorted arguments and returns ``None`` when the
operator is not a theory symbol at all.
"""

from __future__ import annotations

from stormforge.errors import SortError
from stormforge.smtlib.sorts import BOOL, INT, REAL, REGLAN, STRING, Sort, bitvec

# nullary theory constants (not literals)
CONSTANTS: dict[str, Sort] = {
    "re.none": REGLAN,
    "re.nostr": REGLAN,
    "re.all": REGLAN,
    "re.allchar": REGLAN,
}

_BOOL_NARY = {"and", "or", "xor", "=>"}
_ARITH_NARY = {"+", "-", "*"}
_ARITH_CMP = {"<", "<=", ">", ">="}
_BV_BINARY = {
    "bvand", "bvor", "bvxor", "bvnand", "bvnor", "bvxnor", "bvadd", "bvsub",
    "bvmul", "bvudiv", "bvurem", "bvsdiv", "bvsrem", "bvsmod", "bvshl",
    "bvlshr", "bvashr",
}
_BV_NARY = {"bvand", "bvor", "bvxor", "bvadd", "bvmul"}
_BV_UNARY = {"bvnot", "bvneg"}
_BV_CMP = {
    "bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge",
}
_STR_FIXED: dict[str, tuple[tuple[Sort, ...], Sort]] = {
    "str.len": ((STRING,), INT),
    "str.at": ((STRING, INT), STRING),
    "str.substr": ((STRING, INT, INT), STRING),
    "str.prefixof": ((STRING, STRING), BOOL),
    "str.suffixof": ((STRING, STRING), BOOL),
    "str.contains": ((STRING, STRING), BOOL),
    "str.indexof": ((STRING, STRING, INT), INT),
    "str.replace": ((STRING, STRING, STRING), STRING),
    "str.replace_all": ((STRING, STRING, STRING), STRING),
    "str.replace_re": ((STRING, REGLAN, STRING), STRING),
    "str.replace_re_all": ((STRING, REGLAN, STRING), STRING),
    "str.to_int": ((STRING,), INT),
    "str.to.int": ((STRING,), INT),
    "str.from_int": ((INT,), STRING),
    "int.to.str": ((INT,), STRING),
    "str.is_digit": ((STRING,), BOOL),
    "str.to_code": ((STRING,), INT),
    "str.from_code": ((INT,), STRING),
    "str.<": ((STRING, STRING), BOOL),
    "str.<=": ((STRING, STRING), BOOL),
    "str.in_re": ((STRING, REGLAN), BOOL),
    "str.in.re": ((STRING, REGLAN), BOOL),
    "str.to_re": ((STRING,), REGLAN),
    "str.to.re": ((STRING,), REGLAN),
    "re.range": ((STRING, STRING), REGLAN),
    "re.*": ((REGLAN,), REGLAN),
    "re.+": ((REGLAN,), REGLAN),
    "re.opt": ((REGLAN,), REGLAN),
    "re.comp": ((REGLAN,), REGLAN),
    "re.diff": ((REGLAN, REGLAN), REGLAN),
}
_RE_NARY = {"re.++", "re.union", "re.inter"}
_INT_FIXED: dict[str, tuple[tuple[Sort, ...], Sort]] = {
    "div": ((INT, INT), INT),
    "mod": ((INT, INT), INT),
    "abs": ((INT,), INT),
    "to_real": ((INT,), REAL),
    "to_int": ((REAL,), INT),
    "is_int": ((REAL,), BOOL),
}

THEORY_OPS = (
    {"not", "=", "distinct", "ite", "/", "select", "store", "concat", "extract",
     "zero_extend", "sign_extend", "repeat", "rotate_left", "rotate_right",
     "bvcomp", "bv2nat", "nat2bv", "int2bv", "str.++", "re.loop", "re.^", "const"}
    | _BOOL_NARY | _ARITH_NARY | _ARITH_CMP | _BV_BINARY | _BV_UNARY | _BV_CMP
    | set(_STR_FIXED) | _RE_NARY | set(_INT_FIXED)
)


def _fail(op: str, sorts, why: str = "") -> SortError:
    shown = " ".join(str(s) for s in sorts)
    return SortError(f"ill-sorted application of {op} to ({shown}){': ' + why if why else ''}")


def _numeric_join(op: str, sorts) -> Sort:
    if not all(s.is_numeric for s in sorts):
        raise _fail(op, sorts, "expected Int or Real arguments")
    return REAL if any(s == REAL for s in sorts) else INT


def _same(op: str, sorts) -> Sort:
    first = sorts[0]
    if all(s == first for s in sorts):
        return first
    if all(s.is_numeric for s in sorts):
        return REAL
    raise _fail(op, sorts, "arguments must share a sort")


def _arity(op: str, sorts, lo: int, hi: int | None = None) -> None:
    n = len(sorts)
    if n < lo or (hi is not None and n > hi):
        raise _fail(op, sorts, "wrong number of arguments")


def _fixed(op: str, sorts, sig) -> Sort:
    params, ret = sig
    if len(params) != len(sorts):
        raise _fail(op, sorts, "wrong number of arguments")
    for want, got in zip(params, sorts):
        if want != got and not (want.is_numeric and got.is_numeric):
            raise _fail(op, sorts)
    return ret


def infer(op: str, indices: tuple, sorts: list[Sort], qualifier: Sort | None = None) -> Sort | None:
    if op == "not":
        _arity(op, sorts, 1, 1)
        if sorts[0] != BOOL:
            raise _fail(op, sorts)
        return BOOL
    if op in _BOOL_NARY:
        _arity(op, sorts, 1 if op in ("and", "or") else 2)
        if any(s != BOOL for s in sorts):
            raise _fail(op, sorts)
        return BOOL
    if op in ("=", "distinct"):
        _arity(op, sorts, 2)
        _same(op, sorts)
        return BOOL
    if op == "ite":
        _arity(op, sorts, 3, 3)
        if sorts[0] != BOOL:
            raise _fail(op, sorts, "condition must be Bool")
        return _same(op, sorts[1:])
    if op in _ARITH_NARY:
        _arity(op, sorts, 1)
        return _numeric_join(op, sorts)
    if op == "/":
        _arity(op, sorts, 2)
        _numeric_join(op, sorts)
        return REAL
    if op in _ARITH_CMP:
        _arity(op, sorts, 2)
        _numeric_join(op, sorts)
        return BOOL
    if op in _INT_FIXED:
        return _fixed(op, sorts, _INT_FIXED[op])
    if op in _STR_FIXED:
        return _fixed(op, sorts, _STR_FIXED[op])
    if op == "str.++":
        _arity(op, sorts, 2)
        if any(s != STRING for s in sorts):
            raise _fail(op, sorts)
        return STRING
    if op in _RE_NARY:
        _arity(op, sorts, 2 if op != "re.++" else 1)
        if any(s != REGLAN for s in sorts):
            raise _fail(op, sorts)
        return REGLAN
    if op in ("re.loop", "re.^"):
        _arity(op, sorts, 1, 1)
        if sorts[0] != REGLAN:
            raise _fail(op, sorts)
        return REGLAN
    if op in _BV_UNARY or op in _BV_BINARY or op in _BV_CMP or op == "bvcomp":
        if op in _BV_UNARY:
            _arity(op, sorts, 1, 1)
        elif op in _BV_NARY:
            _arity(op, sorts, 2)
        else:
            _arity(op, sorts, 2, 2)
        if not sorts[0].is_bv or any(s != sorts[0] for s in sorts):
            raise _fail(op, sorts, "expected bitvectors of equal width")
        if op in _BV_CMP:
            return BOOL
        if op == "bvcomp":
            return bitvec(1)
        return sorts[0]
    if op == "concat":
        _arity(op, sorts, 2)
        if not all(s.is_bv for s in sorts):
            raise _fail(op, sorts)
        return bitvec(sum(s.width for s in sorts))
    if op == "extract":
        _arity(op, sorts, 1, 1)
        hi, lo = indices
        if not sorts[0].is_bv or not (0 <= lo <= hi < sorts[0].width):
            raise _fail(op, sorts, f"bad extract bounds {hi} {lo}")
        return bitvec(hi - lo + 1)
    if op in ("zero_extend", "sign_extend"):
        _arity(op, sorts, 1, 1)
        if not sorts[0].is_bv:
            raise _fail(op, sorts)
        return bitvec(sorts[0].width + indices[0]) if indices[0] else sorts[0]
    if op == "repeat":
        _arity(op, sorts, 1, 1)
        if not sorts[0].is_bv or indices[0] < 1:
            raise _fail(op, sorts)
        return bitvec(sorts[0].width * indices[0])
    if op in ("rotate_left", "rotate_right"):
        _arity(op, sorts, 1, 1)
        if not sorts[0].is_bv:
            raise _fail(op, sorts)
        return sorts[0]
    if op == "bv2nat":
        _arity(op, sorts, 1, 1)
        if not sorts[0].is_bv:
            raise _fail(op, sorts)
        return INT
    if op in ("nat2bv", "int2bv"):
        _arity(op, sorts, 1, 1)
        if sorts[0] != INT or indices[0] < 1:
            raise _fail(op, sorts)
        return bitvec(indices[0])
    if op == "select":
        _arity(op, sorts, 2)
        arr = sorts[0]
        if not arr.is_array or len(arr.args) != len(sorts):
            raise _fail(op, sorts, "expected an array and matching indices")
        for want, got in zip(arr.args[:-1], sorts[1:]):
            if want != got:
                raise _fail(op, sorts, "index sort mismatch")
        return arr.args[-1]
    if op == "store":
        _arity(op, sorts, 3)
        arr = sorts[0]
        if not arr.is_array or len(arr.args) + 1 != len(sorts):
            raise _fail(op, sorts, "expected an array, indices and a value")
        for want, got in zip(arr.args, sorts[1:]):
            if want != got:
                raise _fail(op, sorts, "index or element sort mismatch")
        return arr
    if op == "const" and qualifier is not None:
        _arity(op, sorts, 1, 1)
        if not qualifier.is_array or qualifier.args[-1] != sorts[0]:
            raise _fail(op, sorts, f"constant array of sort {qualifier}")
        return qualifier
    return None


# indices each indexed operator expects
INDEXED_ARITY = {
    "extract": 2, "zero_extend": 1, "sign_extend": 1, "repeat": 1,
    "rotate_left": 1, "rotate_right": 1, "nat2bv": 1, "int2bv": 1,
    "re.loop": 2, "re.^": 1,
}
