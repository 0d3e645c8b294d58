"""The chart interpreter: mutually recursive execution of actions,
transition searches, state exit/entry, state runs and whole rounds.

Every step returns a continue flag: True means keep going, False means an
event broadcast destroyed the surrounding context and the remaining work
of the enclosing activity must be discarded (early return).  Each
recursive step burns one unit of the per-round fuel budget, so junction
loops and broadcast cycles surface as budget errors instead of hanging.
"""

from __future__ import annotations

import sys
import threading
from collections import Counter
from dataclasses import dataclass, field

from .chart import (
    Action,
    AndComp,
    Assign,
    CallGraphical,
    CallScripted,
    Chart,
    OnEvent,
    OnTemporal,
    OrComp,
    Print,
    Send,
    SendMessage,
    Seq,
    Skip,
    SKIP,
    Transition,
    VarRef,
    comp_lookup,
    state_lookup,
)
from .dynenv import DynEnv, Valuation, Value, verify_activation_tree
from .errors import BudgetError, PathLookupError, SemanticError, SfsemError
from .evaluate import eval_cond, eval_expr, eval_temporal, format_value
from .paths import EMPTY_PATH, Path, ROOT_PATH, lca, parent, path_diff

DEFAULT_FUEL = 100_000

EPSILON = ""  # round with no input event

#: every rule the interpreter can apply; the test suite checks that the
#: committed micro-chart corpus exercises each one at least once.
ALL_RULES = frozenset(
    {
        "send-cond",
        "send-trans",
        "send-message",
        "on-temporal-run",
        "on-temporal-skip",
        "on-event",
        "seq-continue",
        "seq-abort",
        "call-scripted",
        "call-graphical",
        "message-pop",
        "trans-taken",
        "trans-aborted",
        "tlist-empty",
        "tlist-state",
        "tlist-history",
        "tlist-junction",
        "tlist-backtrack",
        "tlist-deadend",
        "tlist-terminal",
        "tlist-skip",
        "tlist-fail",
        "exit-state",
        "exit-comp-abort",
        "exit-action-abort",
        "exit-or",
        "exit-children",
        "exit-and",
        "enter-state",
        "enter-or-path",
        "enter-or-history",
        "enter-or-default",
        "enter-children",
        "enter-and",
        "run-outer",
        "run-inner",
        "run-nested",
        "run-or",
        "run-children",
        "run-and",
        "chart-round",
    }
)


@dataclass
class TransResult:
    """Outcome of one enabled transition: continue flag, the transition
    action to accumulate, and the destination reached."""

    flag: bool
    trans_act: Action
    target: Path | None


@dataclass
class TransListResult:
    """Outcome of searching a transition list.

    ``vt``: 1 reached a state, 0 failed, -1 stopped at a terminal
    junction.  ``actions`` accumulates transition actions along the
    successful path; ``hp`` is the common ancestor of everything the
    path touched.
    """

    vt: int
    flag: bool
    actions: Action
    target: Path | None
    hp: Path


@dataclass
class RoundRecord:
    index: int
    input_event: str | None
    prints: list[str]
    active: list[str]
    vars_delta: dict[str, Value]
    vars: dict[str, Value] | None = None


@dataclass
class Trace:
    chart_name: str
    init_prints: list[str] = field(default_factory=list)
    init_active: list[str] = field(default_factory=list)
    init_vars: dict[str, Value] | None = None
    rounds: list[RoundRecord] = field(default_factory=list)
    execution_periods: object = None

    def all_prints(self) -> list[str]:
        out = list(self.init_prints)
        for r in self.rounds:
            out.extend(r.prints)
        return out


def _acc(first: Action, second: Action) -> Action:
    if isinstance(first, Skip):
        return second
    if isinstance(second, Skip):
        return first
    return Seq(first, second)


def _hp_of(paths: list[Path]) -> Path:
    real = [p for p in paths if p]
    if not real:
        return EMPTY_PATH
    return lca(real)


class Interpreter:
    def __init__(
        self,
        chart: Chart,
        *,
        fuel_per_round: int = DEFAULT_FUEL,
        strict_terminal_junctions: bool = False,
    ):
        self.chart = chart
        self.fuel_per_round = int(fuel_per_round)
        self.strict_terminal_junctions = strict_terminal_junctions
        self.rule_counts: Counter[str] = Counter()
        self._fuel = self.fuel_per_round

    # -- bookkeeping ---------------------------------------------------------

    def _rule(self, name: str) -> None:
        self.rule_counts[name] += 1

    def _tick(self) -> None:
        self._fuel -= 1
        if self._fuel < 0:
            raise BudgetError(
                f"fuel exhausted after {self.fuel_per_round} steps; "
                f"execution likely diverges"
            )

    def _consume_message(self, guard: str, env: DynEnv) -> None:
        """A guard naming a message with a queued record pops it into the
        valuation, even when the attempt then fails its condition."""
        if guard and env.v.queue(guard):
            env.pop_message(guard)
            self._rule("message-pop")

    # -- actions -------------------------------------------------------------

    def exec_action(self, p: Path, e: str, a: Action, env: DynEnv) -> bool:
        self._tick()
        if isinstance(a, Skip):
            return True
        if isinstance(a, Assign):
            env.v.vv[a.var] = eval_expr(env.v, p, a.value)
            return True
        if isinstance(a, Print):
            env.emit(format_value(eval_expr(env.v, p, a.value)))
            return True
        if isinstance(a, Seq):
            if not self.exec_action(p, e, a.first, env):
                self._rule("seq-abort")
                return False
            self._rule("seq-continue")
            return self.exec_action(p, e, a.second, env)
        if isinstance(a, OnTemporal):
            if eval_temporal(env.v, p, a.guard):
                self._rule("on-temporal-run")
                return self.exec_action(p, e, a.body, env)
            self._rule("on-temporal-skip")
            return True
        if isinstance(a, OnEvent):
            if a.event == e:
                self._rule("on-event")
                return self.exec_action(p, e, a.body, env)
            if self.chart.is_message(a.event) and env.v.queue(a.event):
                self._consume_message(a.event, env)
                self._rule("on-event")
                return self.exec_action(p, e, a.body, env)
            return True
        if isinstance(a, Send):
            return self.broadcast(p, a.event, a.in_trans_act, env, target=a.target)
        if isinstance(a, SendMessage):
            data = eval_expr(env.v, p, a.data)
            env.push_message(a.message, data)
            self._rule("send-message")
            return True
        if isinstance(a, CallScripted):
            return self._call_scripted(p, e, a, env)
        if isinstance(a, CallGraphical):
            return self._call_graphical(p, e, a, env)
        raise SemanticError(f"unknown action {a!r}")

    def broadcast(
        self,
        source_ctx: Path,
        event: str,
        in_trans_act: bool,
        env: DynEnv,
        target: Path = EMPTY_PATH,
    ) -> bool:
        """Deliver a raised event immediately, then decide whether the
        interrupted activity may continue.

        A send in a condition action continues iff its context state is
        still active afterwards.  A send in a transition action runs
        between exit and entry, so it continues iff the context's parent
        is active and has no active substate (nothing was re-entered).
        """
        self._rule("send-trans" if in_trans_act else "send-cond")
        scope = target if target else ROOT_PATH
        self.run_comp(True, scope, event, env)
        if in_trans_act:
            par = parent(source_ctx) if source_ctx else EMPTY_PATH
            info = env.info(par)
            return info.is_active and not info.active_substate
        return env.is_active(source_ctx)

    def _call_scripted(self, p: Path, e: str, a: CallScripted, env: DynEnv) -> bool:
        f = self.chart.functions.get(a.function)
        if f is None:
            raise PathLookupError(f"unknown function {a.function!r}")
        args = [eval_expr(env.v, p, x) for x in a.args]
        for name, val in zip(f.inputs, args):
            env.v.vv[name] = val
        self._rule("call-scripted")
        if not self.exec_action(EMPTY_PATH, e, f.body, env):
            return False
        for out, ret in zip(a.outputs, f.outputs):
            env.v.vv[out] = eval_expr(env.v, EMPTY_PATH, _var(ret))
        return True

    def _call_graphical(self, p: Path, e: str, a: CallGraphical, env: DynEnv) -> bool:
        g = self.chart.graphical_functions.get(a.function)
        if g is None:
            raise PathLookupError(f"unknown graphical function {a.function!r}")
        args = [eval_expr(env.v, p, x) for x in a.args]
        for name, val in zip(g.inputs, args):
            env.v.vv[name] = val
        self._rule("call-graphical")
        r = self.exec_transition_list(EMPTY_PATH, e, (g.init_transition,), env)
        if not r.flag:
            return False
        if r.vt != -1:
            raise SemanticError(
                f"graphical function {a.function!r} must end at a terminal "
                f"junction (flow returned {r.vt})"
            )
        for out, ret in zip(a.outputs, g.outputs):
            env.v.vv[out] = eval_expr(env.v, EMPTY_PATH, _var(ret))
        return True

    # -- transitions ---------------------------------------------------------

    def trans_enabled(self, t: Transition, env: DynEnv, e: str) -> bool:
        """Event clause: no guard, the current event, or a queued message
        of the guard's name.  The condition is read as it would hold after
        the message pop, without changing the environment."""
        v = env.v
        queue = v.queue(t.guard) if t.guard else []
        if not (t.guard == "" or t.guard == e or queue):
            return False
        if queue:
            v = Valuation(vv={**v.vv, t.guard: queue[0]}, ev=v.ev, tv=v.tv, mv=v.mv)
        return eval_cond(v, t.source, t.cond)

    def exec_transition(self, p: Path, e: str, t: Transition, env: DynEnv) -> TransResult:
        """Take one enabled transition: pop its message guard, run the
        condition action, and hand back the transition action and target
        (or abandon everything on early return)."""
        self._tick()
        self._consume_message(t.guard, env)
        if self.exec_action(p, e, t.cond_act, env):
            self._rule("trans-taken")
            return TransResult(True, t.trans_act, t.dest)
        self._rule("trans-aborted")
        return TransResult(False, SKIP, None)

    def exec_transition_list(
        self, p: Path, e: str, transitions: tuple[Transition, ...], env: DynEnv
    ) -> TransListResult:
        self._tick()
        if not transitions:
            self._rule("tlist-empty")
            return TransListResult(-1, True, SKIP, None, EMPTY_PATH)
        t, rest = transitions[0], transitions[1:]
        if not self.trans_enabled(t, env, e):
            self._consume_message(t.guard, env)
            if rest:
                self._rule("tlist-skip")
                return self.exec_transition_list(p, e, rest, env)
            self._rule("tlist-fail")
            return TransListResult(0, True, SKIP, None, EMPTY_PATH)
        tr = self.exec_transition(p, e, t, env)
        if not tr.flag:
            return TransListResult(0, False, SKIP, None, EMPTY_PATH)
        d = tr.target
        assert d is not None
        if self.chart.is_history_dest(d):
            # continue at the recorded substate, or the owner's default
            # entry when nothing was recorded yet
            self._rule("tlist-history")
            owner = parent(d)
            recorded = env.history(owner)
            ts = recorded if recorded else owner
            return TransListResult(1, True, tr.trans_act, ts, _hp_of([t.source, d]))
        if d.is_junction:
            sub = self.chart.junctions.get(d)
            if sub is None:
                raise PathLookupError(f"unknown junction {d}")
            r2 = self.exec_transition_list(p, e, sub, env)
            if not r2.flag:
                return TransListResult(0, False, SKIP, None, EMPTY_PATH)
            if r2.vt == 1:
                self._rule("tlist-junction")
                return TransListResult(
                    1,
                    True,
                    _acc(tr.trans_act, r2.actions),
                    r2.target,
                    _hp_of([t.source, d, r2.hp]),
                )
            if r2.vt == -1:
                self._rule("tlist-terminal")
                return TransListResult(-1, True, SKIP, None, EMPTY_PATH)
            if rest:
                self._rule("tlist-backtrack")
                return self.exec_transition_list(p, e, rest, env)
            self._rule("tlist-deadend")
            return TransListResult(0, True, SKIP, None, EMPTY_PATH)
        self._rule("tlist-state")
        return TransListResult(1, True, tr.trans_act, d, _hp_of([t.source, d]))

    # -- exit ----------------------------------------------------------------

    def exit_state(self, p: Path, e: str, env: DynEnv) -> bool:
        self._tick()
        if not self.exit_comp(p, e, env):
            self._rule("exit-comp-abort")
            return False
        sd = state_lookup(self.chart, p)
        if not self.exec_action(p, e, sd.exit, env):
            self._rule("exit-action-abort")
            return False
        env.set_inactive(p)
        self._rule("exit-state")
        return True

    def exit_comp(self, p: Path, e: str, env: DynEnv) -> bool:
        self._tick()
        comp = comp_lookup(self.chart, p)
        if isinstance(comp, OrComp):
            p_a = env.active_substate(p)
            if p_a and not self.exit_state(p_a, e, env):
                return False
            env.clear_active_substate(p)
            if comp.has_history:
                env.record_history(p, p_a)
            self._rule("exit-or")
            return True
        if isinstance(comp, AndComp):
            # parallel substates leave in reverse priority order
            for name in reversed(comp.order):
                self._rule("exit-children")
                if not self.exit_state(p.child(name), e, env):
                    return False
            env.clear_info(p)
            self._rule("exit-and")
            return True
        return True

    # -- entry ---------------------------------------------------------------

    def enter_state(self, h: Path, p: Path, e: str, env: DynEnv) -> bool:
        """Enter ``p``: reset its counters, activate it, run its entry
        action, then enter its composition.  ``h`` is the rest of the
        target path when the entry is part of a level-crossing
        transition (its head names ``p`` itself)."""
        self._tick()
        self._rule("enter-state")
        env.reset_counters(p)
        parent_comp = comp_lookup(self.chart, parent(p))
        env.set_active(p, update_parent=isinstance(parent_comp, OrComp))
        sd = state_lookup(self.chart, p)
        if not self.exec_action(p, e, sd.entry, env):
            return False
        return self.enter_comp(h.tail() if h else EMPTY_PATH, p, e, env)

    def enter_comp(self, h: Path, p: Path, e: str, env: DynEnv) -> bool:
        self._tick()
        comp = comp_lookup(self.chart, p)
        if isinstance(comp, OrComp):
            if h:
                self._rule("enter-or-path")
                if h.head not in comp.substates:
                    raise SemanticError(f"entry target {h.head!r} is not a substate of {p}")
                return self.enter_state(h, p.child(h.head), e, env)
            if comp.has_history and env.history(p):
                self._rule("enter-or-history")
                return self.enter_state(EMPTY_PATH, env.history(p), e, env)
            self._rule("enter-or-default")
            r = self.exec_transition_list(p, e, comp.defaults, env)
            if not r.flag:
                return False
            if r.vt != 1 or r.target is None:
                raise SemanticError(f"no default path to a state in composition {p}")
            if not self.exec_action(p, e, r.actions, env):
                return False
            if not p.is_prefix_of(r.target) or r.target == p:
                raise SemanticError(
                    f"default path of {p} must reach a proper substate, got {r.target}"
                )
            rel = path_diff(r.target, p)
            return self.enter_state(rel, p.child(rel.head), e, env)
        if isinstance(comp, AndComp):
            # parallel substates enter in priority order; only the one on
            # the target path inherits the remaining entry path
            self._rule("enter-and")
            for name in comp.order:
                self._rule("enter-children")
                sub_h = h if (h and h.head == name) else EMPTY_PATH
                if not self.enter_state(sub_h, p.child(name), e, env):
                    return False
            return True
        return True

    # -- running states ------------------------------------------------------

    def run_state(self, is_broadcast: bool, p: Path, e: str, env: DynEnv) -> bool:
        """One execution step of an active state: bump its counters (time
        stands still while a raised event is being handled), try outer
        transitions, then the during action and inner transitions, and
        finally the substates."""
        self._tick()
        sd = state_lookup(self.chart, p)
        env.incr_event_count(p, e)
        if not is_broadcast:
            env.incr_time(p)
        outer = self.exec_transition_list(p, e, sd.outer, env)
        if not outer.flag:
            return False
        if outer.vt == 1:
            self._rule("run-outer")
            return self._fire(p, e, outer, env, outer_level=True)
        if outer.vt == -1 and sd.outer and not self.strict_terminal_junctions:
            # a genuine terminal junction stops this state's step
            return True
        if not self.exec_action(p, e, sd.during, env):
            return False
        inner = self.exec_transition_list(p, e, sd.inner, env)
        if not inner.flag:
            return False
        if inner.vt == 1:
            self._rule("run-inner")
            return self._fire(p, e, inner, env, outer_level=False)
        if inner.vt == -1 and sd.inner and not self.strict_terminal_junctions:
            return True
        self._rule("run-nested")
        return self.run_comp(is_broadcast, p, e, env)

    def _fire(
        self, p: Path, e: str, found: TransListResult, env: DynEnv, *, outer_level: bool
    ) -> bool:
        """Complete a successful transition search: exit up to the shared
        scope, run the accumulated transition actions, and enter down to
        the target.  An outer transition from a state to itself exits and
        re-enters the state; an inner one only recycles its children."""
        ts, hp = found.target, found.hp
        assert ts is not None
        if outer_level and p == ts == hp:
            scope = parent(p)
            h = Path((p.last,))
        else:
            scope = lca([p, hp])
            h = path_diff(ts, hp)
        if not self.exit_comp(scope, e, env):
            return False
        if not self.exec_action(p, e, found.actions, env):
            return False
        return self.enter_comp(h, scope, e, env)

    def run_comp(self, is_broadcast: bool, p: Path, e: str, env: DynEnv) -> bool:
        self._tick()
        comp = comp_lookup(self.chart, p)
        if isinstance(comp, OrComp):
            self._rule("run-or")
            p_a = env.active_substate(p)
            if not p_a:
                return True
            return self.run_state(is_broadcast, p_a, e, env)
        if isinstance(comp, AndComp):
            self._rule("run-and")
            for name in comp.order:
                self._rule("run-children")
                if not self.run_state(is_broadcast, p.child(name), e, env):
                    return False
            return True
        return True

    # -- rounds --------------------------------------------------------------

    def ensure_initial_entry(self, env: DynEnv) -> bool:
        """Activate the chart by default-entering the top composition.
        A no-op when the chart is already active."""
        if env.is_active(ROOT_PATH):
            return True
        self._fuel = self.fuel_per_round
        env.reset_counters(ROOT_PATH)
        env.set_active(ROOT_PATH, update_parent=False)
        return self.enter_comp(EMPTY_PATH, ROOT_PATH, EPSILON, env)

    def run_round(self, env: DynEnv, event: str | None) -> bool:
        """Handle one input event (None for a quiet cycle).  The returned
        flag reports whether an early return surfaced at the top; either
        way the chart state is consistent and the round counts."""
        self._fuel = self.fuel_per_round
        self._rule("chart-round")
        return self.run_comp(False, ROOT_PATH, event or EPSILON, env)

    def run(
        self, env: DynEnv, events: list[str | None], *, snapshot_vars: bool = False
    ) -> tuple[DynEnv, Trace]:
        """Initial entry (if needed) followed by one round per event.

        Returns the final environment and the trace.  Budget, semantic and
        evaluation errors abort the run but carry the partial trace on the
        raised exception's ``trace`` attribute.
        """
        return _with_deep_stack(
            lambda: self._run_impl(env, events, snapshot_vars), self.fuel_per_round
        )

    def _run_impl(
        self, env: DynEnv, events: list[str | None], snapshot_vars: bool
    ) -> tuple[DynEnv, Trace]:
        trace = Trace(chart_name=self.chart.name)
        stage = "initial entry"
        try:
            mark = len(env.print_log)
            if not env.is_active(ROOT_PATH):
                self.ensure_initial_entry(env)
            trace.init_prints = env.print_log[mark:]
            trace.init_active = [str(q) for q in env.active_paths()]
            if snapshot_vars:
                trace.init_vars = dict(env.v.vv)
            for index, event in enumerate(events, 1):
                stage = f"round {index}"
                mark = len(env.print_log)
                before = dict(env.v.vv)
                self.run_round(env, event)
                delta = {
                    k: v
                    for k, v in env.v.vv.items()
                    if k not in before or before[k] != v
                }
                trace.rounds.append(
                    RoundRecord(
                        index=index,
                        input_event=event or None,
                        prints=env.print_log[mark:],
                        active=[str(q) for q in env.active_paths()],
                        vars_delta=delta,
                        vars=dict(env.v.vv) if snapshot_vars else None,
                    )
                )
                problems = verify_activation_tree(self.chart, env)
                if problems:
                    raise SemanticError(
                        "activation tree inconsistent after "
                        f"{stage}: " + "; ".join(problems)
                    )
        except RecursionError:
            raise BudgetError(
                f"recursion depth exceeded during {stage}", trace
            ) from None
        except SfsemError as exc:
            if getattr(exc, "trace", None) is None:
                exc.trace = trace
            raise
        return env, trace


def _var(name: str) -> VarRef:
    return VarRef(name)


def _with_deep_stack(fn, fuel: int):
    """Junction chases and broadcast chains recurse about as deep as the
    fuel budget allows, far past CPython's defaults; run the job on a
    thread with a large stack and a matching recursion limit."""
    limit = min(2 * int(fuel) + 20_000, 1_000_000)
    box: dict[str, object] = {}

    def runner():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(limit)
        try:
            box["value"] = fn()
        except BaseException as exc:  # propagated to the caller below
            box["error"] = exc
        finally:
            sys.setrecursionlimit(old)

    old_stack = threading.stack_size()
    try:
        threading.stack_size(256 * 1024 * 1024)
    except (ValueError, RuntimeError, OverflowError):
        pass
    worker = threading.Thread(target=runner, name="sfsem-run")
    worker.start()
    worker.join()
    try:
        threading.stack_size(old_stack)
    except (ValueError, RuntimeError, OverflowError):
        pass
    if "error" in box:
        raise box["error"]  # type: ignore[misc]
    return box["value"]


def run_chart(
    chart: Chart,
    env: DynEnv,
    events: list[str | None],
    fuel_per_round: int = DEFAULT_FUEL,
    *,
    strict_terminal_junctions: bool = False,
    snapshot_vars: bool = False,
) -> tuple[DynEnv, Trace]:
    interp = Interpreter(
        chart,
        fuel_per_round=fuel_per_round,
        strict_terminal_junctions=strict_terminal_junctions,
    )
    return interp.run(env, events, snapshot_vars=snapshot_vars)
