"""SMT-LIB 2.6 frontend for the CHC-COMP benchmark subset."""

from .script import (
    Assert,
    CheckSat,
    Command,
    Constructor,
    DatatypeDecl,
    DeclareDatatypes,
    DeclareFun,
    Exit,
    GetModel,
    ParametricDatatypeError,
    Script,
    SetInfo,
    SetLogic,
    Unsupported,
    command_to_sexpr,
    parse_file,
    parse_script,
    print_script,
)
from .sexpr import LexError, ParseError, SAtom, SExpr, SList
from .terms import (
    BOOL,
    FALSE,
    INT,
    TRUE,
    Annot,
    App,
    Let,
    Lit,
    Num,
    Quant,
    Sort,
    Sym,
    Term,
    expand_lets,
    free_symbols,
    subterms,
)

__all__ = [name for name in dir() if not name.startswith("_")]
