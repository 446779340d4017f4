"""SMT-LIB v2 front end: parse, represent, transform and print scripts."""

from stormforge.smtlib.model import Assignment, FunctionValue
from stormforge.smtlib.parser import Context, Parser, parse_script, parse_term
from stormforge.smtlib.printer import print_command, print_script, print_term
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
from stormforge.smtlib.sorts import BOOL, INT, REAL, REGLAN, STRING, Sort, array, bitvec
from stormforge.smtlib.terms import (
    FALSE,
    TRUE,
    Annot,
    App,
    Const,
    Quant,
    Term,
    Var,
    bool_const,
    mk_and,
    mk_not,
    recompute_depth,
    strip_annotations,
    term_depth,
)
from stormforge.smtlib.transform import enumerate_predicates, replace_vars, substitute

__all__ = [
    "Annot", "App", "Assert", "Assignment", "BOOL", "CheckSat", "Command", "Const",
    "Constructor", "Context", "DeclareDatatypes", "DeclareFun", "DeclareSort", "Exit",
    "FALSE", "FunctionValue", "GetModel", "INT", "Parser", "Passthrough", "Pop", "Push",
    "Quant", "REAL", "REGLAN", "STRING", "Script", "SetLogic", "Sort", "TRUE", "Term",
    "Var", "array", "bitvec", "bool_const", "enumerate_predicates", "mk_and", "mk_not",
    "parse_script", "parse_term", "print_command", "print_script", "print_term",
    "recompute_depth", "replace_vars", "strip_annotations", "substitute", "term_depth",
]
