"""A deliberately plain predicate interpreter used to cross-check the evaluator.

It evaluates both operands of every connective and builds quantifier results
with ``all``/``any`` over the full domain. On well-typed predicates over
systems where every attribute is present it must agree with the evaluator.
"""
from __future__ import annotations

from odpcheck.constraints.ast import Arith, Attr, BoolOp, Compare, Lit, Nav, Not, ObjectConst, Quant, SetOp, Var


def interpret(e, system, env=None):
    env = env or {}
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, ObjectConst):
        return ("obj", e.object_id)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Attr):
        _, oid = interpret(e.target, system, env)
        return system.objects[oid].state[e.name]
    if isinstance(e, Nav):
        _, oid = interpret(e.target, system, env)
        ends = set()
        for link in system.links.values():
            if link.of != e.role:
                continue
            if e.inverse and link.target == oid:
                ends.add(("obj", link.source))
            if not e.inverse and link.source == oid:
                ends.add(("obj", link.target))
        return frozenset(ends)
    if isinstance(e, Arith):
        left, right = interpret(e.left, system, env), interpret(e.right, system, env)
        return {"+": left + right, "-": left - right, "*": left * right}[e.op]
    if isinstance(e, Compare):
        left, right = interpret(e.left, system, env), interpret(e.right, system, env)
        if e.op == "=":
            return type(left) is type(right) and left == right
        if e.op == "<>":
            return not (type(left) is type(right) and left == right)
        return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[e.op]
    if isinstance(e, Not):
        return not interpret(e.operand, system, env)
    if isinstance(e, BoolOp):
        left, right = interpret(e.left, system, env), interpret(e.right, system, env)
        if e.op == "and":
            return left and right
        if e.op == "or":
            return left or right
        return (not left) or right
    if isinstance(e, Quant):
        domain = [oid for oid, o in system.objects.items() if e.domain in o.of]
        results = [interpret(e.body, system, {**env, e.var: ("obj", oid)}) for oid in domain]
        return all(results) if e.kind == "forall" else any(results)
    if isinstance(e, SetOp):
        items = interpret(e.target, system, env)
        if isinstance(items, tuple):
            items = frozenset({items})
        if e.op == "size":
            return len(items)
        if e.op == "isEmpty":
            return not items
        if e.op == "notEmpty":
            return bool(items)
        arg = interpret(e.arg, system, env)
        if e.op == "includesAll":
            return (frozenset({arg}) if isinstance(arg, tuple) else arg) <= items
        return (arg in items) == (e.op == "includes")
    raise TypeError(f"unexpected node {e!r}")
