from .ast import (
    FUNCTIONS,
    VARIABLES,
    Bin,
    Call,
    Expr,
    Neg,
    Num,
    Param,
    Var,
    evaluate,
    free_parameters,
    opaque_symbols,
    pprint,
)
from .deriv import differentiate
from .match import (
    CASE_ORDER,
    TEMPLATE_SOURCES,
    CaseMatch,
    MatchConfig,
    NoMatchResult,
    instantiate,
    match_case,
    template_expr,
)
from .parser import parse

__all__ = [
    "FUNCTIONS",
    "VARIABLES",
    "Bin",
    "Call",
    "Expr",
    "Neg",
    "Num",
    "Param",
    "Var",
    "evaluate",
    "free_parameters",
    "opaque_symbols",
    "pprint",
    "differentiate",
    "CASE_ORDER",
    "TEMPLATE_SOURCES",
    "CaseMatch",
    "MatchConfig",
    "NoMatchResult",
    "instantiate",
    "match_case",
    "template_expr",
    "parse",
]
