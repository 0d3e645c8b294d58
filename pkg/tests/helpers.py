"""Compact builders for charts assembled directly in tests."""

from __future__ import annotations

from sfsem.chart import (
    Action,
    AndComp,
    Composition,
    Cond,
    LEAF,
    OrComp,
    SKIP,
    StateDef,
    Transition,
    TrueCond,
)
from sfsem.paths import EMPTY_PATH, Path


def p(text: str) -> Path:
    return Path.parse(text)


def t(
    source: str,
    dest: str,
    event: str = "",
    cond: Cond | None = None,
    cond_act: Action = SKIP,
    trans_act: Action = SKIP,
) -> Transition:
    return Transition(
        source=p(source) if source else EMPTY_PATH,
        guard=event,
        cond=cond if cond is not None else TrueCond(),
        cond_act=cond_act,
        trans_act=trans_act,
        dest=p(dest),
    )


def state(
    path: str,
    entry: Action = SKIP,
    during: Action = SKIP,
    exit: Action = SKIP,
    inner=(),
    outer=(),
    comp: Composition = LEAF,
) -> StateDef:
    return StateDef(p(path), entry, during, exit, tuple(inner), tuple(outer), comp)


def or_comp(substates, defaults=None, history: bool = False) -> OrComp:
    subs = {sd.path.last: sd for sd in substates}
    if defaults is None and subs:
        first = next(iter(subs.values()))
        defaults = [t("", str(first.path))]
    return OrComp(tuple(defaults or ()), history, subs)


def and_comp(substates, order=None) -> AndComp:
    subs = {sd.path.last: sd for sd in substates}
    return AndComp(tuple(order or subs.keys()), subs)


def active_set(env) -> set[str]:
    return {str(q) for q in env.active_paths()}
