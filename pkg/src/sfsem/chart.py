"""Static chart model: expressions, conditions, actions, transitions,
state compositions, and structural queries over a loaded chart.

Charts are immutable after construction and safe to share between
concurrent executions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PathLookupError
from .paths import EMPTY_PATH, HISTORY_SEGMENT, Path, ROOT_PATH, parent

TIME_TOKENS = ("tick", "sec")

REL_OPS = (">", "=", "<", ">=", "<=", "!=")
ARITH_OPS = ("+", "-", "*", "/")
TEMPORAL_KINDS = ("after", "before", "at", "every")


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

class Expr:
    pass


@dataclass(frozen=True)
class NumLit(Expr):
    value: float


@dataclass(frozen=True)
class StrLit(Expr):
    value: str


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


@dataclass(frozen=True)
class MsgField(Expr):
    """Field access on the most recently received message of a name."""

    message: str
    field: str


@dataclass(frozen=True)
class TempCount(Expr):
    """Occurrences of an event (or elapsed ticks for a time token) since
    the context state was activated."""

    event: str


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


# ---------------------------------------------------------------------------
# Conditions
# ---------------------------------------------------------------------------

class Cond:
    pass


@dataclass(frozen=True)
class TrueCond(Cond):
    pass


@dataclass(frozen=True)
class Rel(Cond):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class AndCond(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class OrCond(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class NotCond(Cond):
    body: Cond


@dataclass(frozen=True)
class TemporalCond(Cond):
    """after/before/at/every relative to a per-state event or tick count.

    ``threshold`` is an expression so charts can guard on computed
    durations; a literal threshold must be non-negative.
    """

    kind: str
    threshold: Expr
    event: str


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------

class Action:
    pass


@dataclass(frozen=True)
class Skip(Action):
    pass


SKIP = Skip()


@dataclass(frozen=True)
class Assign(Action):
    var: str
    value: Expr


@dataclass(frozen=True)
class Send(Action):
    """Raise a local event.  ``in_trans_act`` records whether the send is
    written in a transition action, which changes the early-return test.
    A non-empty ``target`` restricts delivery to one composition."""

    event: str
    in_trans_act: bool
    target: Path = EMPTY_PATH


@dataclass(frozen=True)
class SendMessage(Action):
    message: str
    data: Expr


@dataclass(frozen=True)
class OnTemporal(Action):
    guard: TemporalCond
    body: Action


@dataclass(frozen=True)
class OnEvent(Action):
    """Run ``body`` when the current event matches, or when a queued
    message of that name is available (the message is consumed)."""

    event: str
    body: Action


@dataclass(frozen=True)
class CallScripted(Action):
    outputs: tuple[str, ...]
    function: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class CallGraphical(Action):
    outputs: tuple[str, ...]
    function: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Print(Action):
    value: Expr


@dataclass(frozen=True)
class Seq(Action):
    first: Action
    second: Action


def seq(*actions: Action) -> Action:
    """Right-nested sequence; empty input collapses to Skip."""
    acts = [a for a in actions if not isinstance(a, Skip)]
    if not acts:
        return SKIP
    out = acts[-1]
    for a in reversed(acts[:-1]):
        out = Seq(a, out)
    return out


# ---------------------------------------------------------------------------
# Transitions and compositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Transition:
    """(source, guard, condition, condition action, transition action, dest).

    ``guard`` is an event or message name, or "" for none.  ``source`` is
    empty on default transitions.
    """

    source: Path
    guard: str
    cond: Cond
    cond_act: Action
    trans_act: Action
    dest: Path


class Composition:
    pass


@dataclass(frozen=True)
class LeafComp(Composition):
    pass


LEAF = LeafComp()


@dataclass(frozen=True, eq=True)
class OrComp(Composition):
    defaults: tuple[Transition, ...]
    has_history: bool
    substates: dict[str, "StateDef"] = field(default_factory=dict)


@dataclass(frozen=True, eq=True)
class AndComp(Composition):
    order: tuple[str, ...]
    substates: dict[str, "StateDef"] = field(default_factory=dict)


@dataclass(frozen=True)
class StateDef:
    path: Path
    entry: Action = SKIP
    during: Action = SKIP
    exit: Action = SKIP
    inner: tuple[Transition, ...] = ()
    outer: tuple[Transition, ...] = ()
    comp: Composition = LEAF


@dataclass(frozen=True)
class FunctionDef:
    body: Action
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


@dataclass(frozen=True)
class GraphicalFunctionDef:
    init_transition: Transition
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


@dataclass
class Chart:
    name: str
    input_events: tuple[str, ...]
    local_events: tuple[str, ...]
    messages: tuple[str, ...]
    variables: dict[str, float]
    root: Composition
    functions: dict[str, FunctionDef] = field(default_factory=dict)
    graphical_functions: dict[str, GraphicalFunctionDef] = field(default_factory=dict)
    junctions: dict[Path, tuple[Transition, ...]] = field(default_factory=dict)
    history_paths: frozenset[Path] = frozenset()

    def is_history_dest(self, p: Path) -> bool:
        return (
            bool(p)
            and p.last == HISTORY_SEGMENT
            and parent(p) in self.history_paths
        )

    def is_message(self, name: str) -> bool:
        return name in self.messages


def collect_history_paths(root: Composition) -> frozenset[Path]:
    """Paths of every Or-composition that declares a history junction."""
    found: set[Path] = set()

    def walk(comp: Composition, at: Path) -> None:
        if isinstance(comp, OrComp):
            if comp.has_history:
                found.add(at)
            for sd in comp.substates.values():
                walk(sd.comp, sd.path)
        elif isinstance(comp, AndComp):
            for sd in comp.substates.values():
                walk(sd.comp, sd.path)

    walk(root, ROOT_PATH)
    return frozenset(found)


def make_chart(
    name: str,
    root: Composition,
    *,
    input_events: tuple[str, ...] = (),
    local_events: tuple[str, ...] = (),
    messages: tuple[str, ...] = (),
    variables: dict[str, float] | None = None,
    functions: dict[str, FunctionDef] | None = None,
    graphical_functions: dict[str, GraphicalFunctionDef] | None = None,
    junctions: dict[Path, tuple[Transition, ...]] | None = None,
) -> Chart:
    return Chart(
        name=name,
        input_events=tuple(input_events),
        local_events=tuple(local_events),
        messages=tuple(messages),
        variables=dict(variables or {}),
        root=root,
        functions=dict(functions or {}),
        graphical_functions=dict(graphical_functions or {}),
        junctions=dict(junctions or {}),
        history_paths=collect_history_paths(root),
    )


# ---------------------------------------------------------------------------
# Structural queries
# ---------------------------------------------------------------------------

def state_lookup(chart: Chart, p: Path) -> StateDef:
    """The state definition at ``p``; junctions and the root composition
    are not states."""
    if not p or p.is_junction or p.segments[0] != "root" or len(p) < 2:
        raise PathLookupError(f"no state at path {p or '<empty>'}")
    comp = chart.root
    sd = None
    for name in p.segments[1:]:
        if not isinstance(comp, (OrComp, AndComp)) or name not in comp.substates:
            raise PathLookupError(f"no state at path {p}")
        sd = comp.substates[name]
        comp = sd.comp
    assert sd is not None
    return sd


def comp_lookup(chart: Chart, p: Path) -> Composition:
    """The composition owned by the state at ``p``; the empty path and
    ``root`` both address the top composition."""
    if not p or p == ROOT_PATH:
        return chart.root
    return state_lookup(chart, p).comp


def is_state_path(chart: Chart, p: Path) -> bool:
    try:
        state_lookup(chart, p)
        return True
    except PathLookupError:
        return False


def iter_states(chart: Chart):
    """Yield every StateDef in document order (parents first)."""

    def walk(comp: Composition):
        if isinstance(comp, (OrComp, AndComp)):
            for sd in comp.substates.values():
                yield sd
                yield from walk(sd.comp)

    yield from walk(chart.root)


def iter_actions(a: Action):
    """Yield every action node in a tree, including guard bodies."""
    yield a
    if isinstance(a, Seq):
        yield from iter_actions(a.first)
        yield from iter_actions(a.second)
    elif isinstance(a, (OnTemporal, OnEvent)):
        yield from iter_actions(a.body)


def _chart_transition_lists(chart: Chart):
    """(owner description, context, transitions) for every list in the chart."""

    def comp_lists(comp: Composition, at: Path):
        if isinstance(comp, OrComp):
            yield f"default transitions of {at}", ("default", at), comp.defaults
            for sd in comp.substates.values():
                yield from state_lists(sd)
        elif isinstance(comp, AndComp):
            for sd in comp.substates.values():
                yield from state_lists(sd)

    def state_lists(sd: StateDef):
        yield f"outer transitions of {sd.path}", ("state", sd.path), sd.outer
        yield f"inner transitions of {sd.path}", ("state", sd.path), sd.inner
        yield from comp_lists(sd.comp, sd.path)

    yield from comp_lists(chart.root, ROOT_PATH)
    for jpath, tl in chart.junctions.items():
        yield f"transitions of junction {jpath}", ("junction", jpath), tl
    for gname, g in chart.graphical_functions.items():
        yield (
            f"initial transition of graphical function {gname}",
            ("graphical", EMPTY_PATH),
            (g.init_transition,),
        )


def _chart_actions(chart: Chart):
    """(owner description, action) pairs for every action in the chart."""
    for sd in iter_states(chart):
        yield f"entry of {sd.path}", sd.entry
        yield f"during of {sd.path}", sd.during
        yield f"exit of {sd.path}", sd.exit
    for where, _ctx, tl in _chart_transition_lists(chart):
        for t in tl:
            yield f"condition action in {where}", t.cond_act
            yield f"transition action in {where}", t.trans_act
    for fname, f in chart.functions.items():
        yield f"body of function {fname}", f.body


def validate_chart(chart: Chart) -> list[str]:
    """Check the structural well-formedness of a chart.

    Returns one diagnostic per violation; an empty list means the chart
    is safe to execute.  Pure and idempotent.
    """
    diags: list[str] = []
    declared_guards = set(chart.input_events) | set(chart.local_events) | set(chart.messages)

    # event/message namespaces must not overlap
    pools = [
        ("input event", chart.input_events),
        ("local event", chart.local_events),
        ("message", chart.messages),
    ]
    seen: dict[str, str] = {}
    for kind, names in pools:
        for n in names:
            if n in seen:
                diags.append(f"name {n!r} declared both as {seen[n]} and {kind}")
            seen[n] = kind

    def check_path_shape(p: Path, where: str) -> None:
        for s in p.segments[:-1]:
            if s.startswith("#"):
                diags.append(f"{where}: junction name {s!r} not in final position of {p}")

    def resolves(p: Path) -> bool:
        return is_state_path(chart, p) or p in chart.junctions or chart.is_history_dest(p)

    # state paths and composition structure
    def walk(comp: Composition, at: Path) -> None:
        if isinstance(comp, AndComp):
            if sorted(comp.order) != sorted(comp.substates.keys()) or len(
                set(comp.order)
            ) != len(comp.order):
                diags.append(
                    f"order/substates mismatch in parallel composition at {at}"
                )
        if isinstance(comp, OrComp):
            for t in comp.defaults:
                if t.source and not t.source.is_junction:
                    diags.append(
                        f"default transition at {at} has a state source {t.source}"
                    )
                if t.dest.is_junction:
                    if t.dest not in chart.junctions and not chart.is_history_dest(t.dest):
                        diags.append(f"unresolved path {t.dest} in default of {at}")
                elif not (is_state_path(chart, t.dest) and at.is_prefix_of(t.dest)):
                    diags.append(
                        f"default transition at {at} must reach a substate or junction, got {t.dest}"
                    )
        if isinstance(comp, (OrComp, AndComp)):
            for name, sd in comp.substates.items():
                expected = at.child(name)
                if sd.path != expected:
                    diags.append(f"state at {expected} records path {sd.path}")
                walk(sd.comp, expected)

    walk(chart.root, ROOT_PATH)

    # transitions: endpoints resolve, sources match owners, guards declared
    for where, (owner_kind, owner), tl in _chart_transition_lists(chart):
        for t in tl:
            check_path_shape(t.dest, where)
            if t.source:
                check_path_shape(t.source, where)
            if owner_kind in ("state", "junction") and t.source != owner:
                diags.append(f"{where}: transition source {t.source or '<empty>'} is not {owner}")
            if owner_kind == "graphical":
                if not t.dest.is_junction or t.dest not in chart.junctions:
                    diags.append(f"{where}: must lead to a junction, got {t.dest}")
                continue
            if not resolves(t.dest):
                diags.append(f"unresolved path {t.dest} in {where}")
            if t.dest.last == HISTORY_SEGMENT and not chart.is_history_dest(t.dest):
                diags.append(
                    f"{where}: history destination {t.dest} does not name an "
                    f"exclusive composition with history"
                )
            if t.guard and t.guard not in declared_guards:
                diags.append(f"{where}: guard {t.guard!r} is not a declared event or message")

    # junction table keys
    for jpath in chart.junctions:
        if not jpath.is_junction:
            diags.append(f"junction table key {jpath} is not a junction path")
            continue
        check_path_shape(jpath, "junction table")
        if jpath.last == HISTORY_SEGMENT:
            diags.append(f"junction name {HISTORY_SEGMENT} is reserved ({jpath})")
        holder = parent(jpath)
        if holder != ROOT_PATH and not is_state_path(chart, holder):
            diags.append(f"junction {jpath} is not attached to a state")

    # actions: function calls, send targets, temporal thresholds
    def check_cond(c: Cond, where: str) -> None:
        if isinstance(c, TemporalCond):
            if isinstance(c.threshold, NumLit) and c.threshold.value < 0:
                diags.append(f"{where}: negative temporal threshold")
        elif isinstance(c, (AndCond, OrCond)):
            check_cond(c.left, where)
            check_cond(c.right, where)
        elif isinstance(c, NotCond):
            check_cond(c.body, where)

    for where, _ctx, tl in _chart_transition_lists(chart):
        for t in tl:
            check_cond(t.cond, where)

    for where, action in _chart_actions(chart):
        for a in iter_actions(action):
            if isinstance(a, OnTemporal):
                check_cond(a.guard, where)
            elif isinstance(a, Send):
                if a.target and not is_state_path(chart, a.target):
                    diags.append(f"{where}: send target {a.target} does not resolve")
                if a.event not in declared_guards:
                    diags.append(f"{where}: sent event {a.event!r} is not declared")
            elif isinstance(a, SendMessage):
                if a.message not in chart.messages:
                    diags.append(f"{where}: message {a.message!r} is not declared")
            elif isinstance(a, CallScripted):
                f = chart.functions.get(a.function)
                if f is None:
                    diags.append(f"{where}: unknown function {a.function!r}")
                else:
                    if len(a.args) != len(f.inputs):
                        diags.append(
                            f"{where}: call to {a.function} passes {len(a.args)} "
                            f"arguments, expected {len(f.inputs)}"
                        )
                    if len(a.outputs) != len(f.outputs):
                        diags.append(
                            f"{where}: call to {a.function} binds {len(a.outputs)} "
                            f"outputs, expected {len(f.outputs)}"
                        )
            elif isinstance(a, CallGraphical):
                g = chart.graphical_functions.get(a.function)
                if g is None:
                    diags.append(f"{where}: unknown graphical function {a.function!r}")
                else:
                    if len(a.args) != len(g.inputs):
                        diags.append(
                            f"{where}: call to {a.function} passes {len(a.args)} "
                            f"arguments, expected {len(g.inputs)}"
                        )
                    if len(a.outputs) != len(g.outputs):
                        diags.append(
                            f"{where}: call to {a.function} binds {len(a.outputs)} "
                            f"outputs, expected {len(g.outputs)}"
                        )

    return diags
