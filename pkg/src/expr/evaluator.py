"""Vectorized evaluation and forward-mode derivatives of expression ASTs."""

from typing import Dict, List, Optional, Sequence, Tuple

from ..arith.xnum import LogComplex, XArray
from .nodes import BinOp, Call, ExprAst, IndexRef, Lit, Neg, Pow, Reduce, Var

Env = Dict[str, int]


def _shape(coords: Sequence[XArray]):
    return coords[0].shape


def evaluate_array(node: ExprAst, coords: Sequence[XArray], env: Optional[Env] = None) -> XArray:
    """Evaluate at every point of `coords` (one XArray per variable)."""
    env = env or {}
    shape = _shape(coords)
    if isinstance(node, Lit):
        return XArray.full(node.value, shape)
    if isinstance(node, Var):
        return coords[node.index - 1]
    if isinstance(node, IndexRef):
        return XArray.full(complex(env[node.name]), shape)
    if isinstance(node, Neg):
        return -evaluate_array(node.arg, coords, env)
    if isinstance(node, BinOp):
        left = evaluate_array(node.left, coords, env)
        right = evaluate_array(node.right, coords, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        return left * right
    if isinstance(node, Pow):
        return evaluate_array(node.base, coords, env).pow_int(_exponent(node, env))
    if isinstance(node, Call):
        arg = evaluate_array(node.arg, coords, env)
        return getattr(arg, node.func)()
    if isinstance(node, Reduce):
        total = XArray.zeros(shape) if node.op == "sum" else XArray.ones(shape)
        for value in range(node.lo, node.hi + 1):
            body = evaluate_array(node.body, coords, {**env, node.index: value})
            total = total + body if node.op == "sum" else total * body
        return total
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: ExprAst, point: Sequence[LogComplex]) -> LogComplex:
    """Value of the expression at a single point."""
    coords = [XArray.from_scalars([p]) for p in point]
    return evaluate_array(node, coords).item(0)


def evaluate_with_gradient(
    node: ExprAst, coords: Sequence[XArray], env: Optional[Env] = None
) -> Tuple[XArray, List[XArray]]:
    """Value and exact partial derivatives d/dz_k, by forward-mode rules."""
    env = env or {}
    shape = _shape(coords)
    n = len(coords)

    def zero_grad() -> List[XArray]:
        return [XArray.zeros(shape) for _ in range(n)]

    if isinstance(node, (Lit, IndexRef)):
        return evaluate_array(node, coords, env), zero_grad()
    if isinstance(node, Var):
        grad = zero_grad()
        grad[node.index - 1] = XArray.ones(shape)
        return coords[node.index - 1], grad
    if isinstance(node, Neg):
        value, grad = evaluate_with_gradient(node.arg, coords, env)
        return -value, [-g for g in grad]
    if isinstance(node, BinOp):
        lv, lg = evaluate_with_gradient(node.left, coords, env)
        rv, rg = evaluate_with_gradient(node.right, coords, env)
        if node.op == "+":
            return lv + rv, [a + b for a, b in zip(lg, rg)]
        if node.op == "-":
            return lv - rv, [a - b for a, b in zip(lg, rg)]
        return lv * rv, [a * rv + lv * b for a, b in zip(lg, rg)]
    if isinstance(node, Pow):
        k = _exponent(node, env)
        base, grad = evaluate_with_gradient(node.base, coords, env)
        if k == 0:
            return XArray.ones(shape), zero_grad()
        lower = base.pow_int(k - 1)
        factor = lower * XArray.full(complex(k), shape)
        return lower * base, [factor * g for g in grad]
    if isinstance(node, Call):
        arg, grad = evaluate_with_gradient(node.arg, coords, env)
        if node.func == "exp":
            value = arg.exp()
            outer = value
        elif node.func == "sin":
            value, outer = arg.sin(), arg.cos()
        else:
            value, outer = arg.cos(), -arg.sin()
        return value, [outer * g for g in grad]
    if isinstance(node, Reduce):
        if node.op == "sum":
            total, total_grad = XArray.zeros(shape), zero_grad()
        else:
            total, total_grad = XArray.ones(shape), zero_grad()
        for index_value in range(node.lo, node.hi + 1):
            value, grad = evaluate_with_gradient(node.body, coords, {**env, node.index: index_value})
            if node.op == "sum":
                total = total + value
                total_grad = [a + b for a, b in zip(total_grad, grad)]
            else:
                total_grad = [a * value + total * b for a, b in zip(total_grad, grad)]
                total = total * value
        return total, total_grad
    raise TypeError(f"not an expression node: {node!r}")


def jacobian_array(nodes: Sequence[ExprAst], coords: Sequence[XArray]) -> List[List[XArray]]:
    """m x n matrix of derivative arrays."""
    return [evaluate_with_gradient(node, coords)[1] for node in nodes]


def jacobian(nodes: Sequence[ExprAst], point: Sequence[LogComplex]) -> List[List[LogComplex]]:
    """Jacobian at one point, rows per component."""
    coords = [XArray.from_scalars([p]) for p in point]
    return [[entry.item(0) for entry in row] for row in jacobian_array(nodes, coords)]


def _exponent(node: Pow, env: Env) -> int:
    if isinstance(node.exponent, str):
        return int(env[node.exponent])
    return int(node.exponent)
