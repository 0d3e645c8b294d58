"""Pure evaluation of expressions and conditions against a valuation and
a context state path.  The context path only matters for temporal
operators, which read that state's event/tick counters.
"""

from __future__ import annotations

from .chart import (
    AndCond,
    BinOp,
    Cond,
    Expr,
    MsgField,
    NotCond,
    NumLit,
    OrCond,
    Rel,
    StrLit,
    TemporalCond,
    TempCount,
    TIME_TOKENS,
    TrueCond,
    VarRef,
)
from .dynenv import Message, Valuation, Value
from .errors import EvalError
from .paths import Path


def eval_expr(v: Valuation, p: Path, e: Expr) -> Value:
    if isinstance(e, NumLit):
        return e.value
    if isinstance(e, StrLit):
        return e.value
    if isinstance(e, VarRef):
        if e.name not in v.vv:
            raise EvalError(f"undeclared variable {e.name!r}")
        return v.vv[e.name]
    if isinstance(e, MsgField):
        if e.message not in v.vv:
            raise EvalError(f"no message received under {e.message!r}")
        record = v.vv[e.message]
        if not isinstance(record, Message):
            raise EvalError(f"{e.message!r} does not hold a message record")
        if e.field != "data":
            raise EvalError(f"unknown message field {e.field!r}")
        return record.data
    if isinstance(e, TempCount):
        if e.event in TIME_TOKENS:
            return v.time_count(p)
        return v.event_count(p, e.event)
    if isinstance(e, BinOp):
        left = _as_number(eval_expr(v, p, e.left), e.op)
        right = _as_number(eval_expr(v, p, e.right), e.op)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            if right == 0:
                raise EvalError("division by zero")
            return left / right
        raise EvalError(f"unknown operator {e.op!r}")
    raise EvalError(f"cannot evaluate {e!r}")


def _as_number(value: Value, op: str) -> float:
    if isinstance(value, Message):
        value = value.data
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EvalError(f"operator {op!r} needs numeric operands, got {value!r}")
    return value


def _unwrap(value: Value) -> Value:
    return value.data if isinstance(value, Message) else value


def eval_cond(v: Valuation, p: Path, c: Cond) -> bool:
    if isinstance(c, TrueCond):
        return True
    if isinstance(c, Rel):
        return _compare(
            c.op, _unwrap(eval_expr(v, p, c.left)), _unwrap(eval_expr(v, p, c.right))
        )
    if isinstance(c, AndCond):
        return eval_cond(v, p, c.left) and eval_cond(v, p, c.right)
    if isinstance(c, OrCond):
        return eval_cond(v, p, c.left) or eval_cond(v, p, c.right)
    if isinstance(c, NotCond):
        return not eval_cond(v, p, c.body)
    if isinstance(c, TemporalCond):
        return eval_temporal(v, p, c)
    raise EvalError(f"cannot evaluate condition {c!r}")


def _compare(op: str, left: Value, right: Value) -> bool:
    if isinstance(left, str) or isinstance(right, str):
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        raise EvalError(f"operator {op!r} is not defined on strings")
    if op == ">":
        return left > right
    if op == "=":
        return left == right
    if op == "<":
        return left < right
    if op == ">=":
        return left >= right
    if op == "<=":
        return left <= right
    if op == "!=":
        return left != right
    raise EvalError(f"unknown relation {op!r}")


def eval_temporal(v: Valuation, p: Path, tc: TemporalCond) -> bool:
    """after(n,E): count >= n; before: count < n; at: count = n;
    every: count mod n = 0.  E is an event name or a tick/sec token,
    selecting the event or time counter of the context state."""
    n = _as_number(eval_expr(v, p, tc.threshold), tc.kind)
    if tc.event in TIME_TOKENS:
        m = v.time_count(p)
    else:
        m = v.event_count(p, tc.event)
    if tc.kind == "after":
        return m >= n
    if tc.kind == "before":
        return m < n
    if tc.kind == "at":
        return m == n
    if tc.kind == "every":
        if n == 0:
            raise EvalError("every(0, ...) divides by zero")
        return m % n == 0
    raise EvalError(f"unknown temporal operator {tc.kind!r}")


def format_value(value: Value) -> str:
    """Canonical rendering used by print actions and traces."""
    if isinstance(value, str):
        return value
    if isinstance(value, Message):
        return f"message({format_value(value.data)})"
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, float)):
        if float(value) == int(value):
            return str(int(value))
        return repr(float(value))
    return str(value)
