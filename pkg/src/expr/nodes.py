"""AST node types for map expressions, plus the pretty-printer."""

from dataclasses import dataclass
from typing import Union

FUNCTIONS = ("exp", "sin", "cos")
REDUCTIONS = ("sum", "prod")


@dataclass(frozen=True)
class Lit:
    """Complex literal; the parser only produces real or purely imaginary ones."""
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class IndexRef:
    """Bound index of an enclosing sum/prod, used as a value."""
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "ExprAst"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Pow:
    base: "ExprAst"
    exponent: Union[int, str]  # literal, or the name of a bound index


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"


@dataclass(frozen=True)
class Reduce:
    op: str  # sum | prod
    index: str
    lo: int
    hi: int
    body: "ExprAst"


ExprAst = Union[Lit, Var, IndexRef, Neg, BinOp, Pow, Call, Reduce]


def _literal_text(value: complex) -> str:
    if value.imag == 0.0:
        return repr(float(value.real))
    if value.real == 0.0:
        return f"{float(value.imag)!r}i"
    return f"({float(value.real)!r} + {float(value.imag)!r}i)"


def to_text(node: ExprAst, n_vars: int = 0) -> str:
    """Render an AST; parsing the output gives back the same tree."""
    if isinstance(node, Lit):
        return _literal_text(node.value)
    if isinstance(node, Var):
        return f"z{node.index}"
    if isinstance(node, IndexRef):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Reduce):
        return f"{node.op}({node.index}, {node.lo}, {node.hi}, {to_text(node.body)})"
    raise TypeError(f"not an expression node: {node!r}")


def max_var_index(node: ExprAst) -> int:
    """Largest variable index referenced (0 if none)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, (Neg, Call)):
        return max_var_index(node.arg)
    if isinstance(node, BinOp):
        return max(max_var_index(node.left), max_var_index(node.right))
    if isinstance(node, Pow):
        return max_var_index(node.base)
    if isinstance(node, Reduce):
        return max_var_index(node.body)
    return 0
