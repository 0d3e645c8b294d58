"""Dynamic execution state: variable values, per-state event and time
counters, message queues, the activation-status tree, and the print log.

Counters and queues read as total maps (absent keys are zero / empty);
updates mutate the environment in place.  One environment belongs to one
execution at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .chart import AndComp, Chart, OrComp, iter_states
from .paths import EMPTY_PATH, Path, ROOT_PATH, parent


@dataclass(frozen=True)
class Message:
    """A queued message record.  Payloads are a single ``data`` value."""

    data: object


Value = object  # float | str | Message


@dataclass(frozen=True)
class ActivationInfo:
    is_active: bool = False
    active_substate: Path = EMPTY_PATH
    history: Path = EMPTY_PATH


INACTIVE = ActivationInfo()


@dataclass
class Valuation:
    vv: dict[str, Value] = field(default_factory=dict)
    ev: dict[tuple[Path, str], int] = field(default_factory=dict)
    tv: dict[Path, int] = field(default_factory=dict)
    mv: dict[str, list[Message]] = field(default_factory=dict)

    def event_count(self, p: Path, event: str) -> int:
        return self.ev.get((p, event), 0)

    def time_count(self, p: Path) -> int:
        return self.tv.get(p, 0)

    def queue(self, name: str) -> list[Message]:
        return self.mv.get(name, [])

    def clone(self) -> "Valuation":
        return Valuation(
            vv=dict(self.vv),
            ev=dict(self.ev),
            tv=dict(self.tv),
            mv={k: list(q) for k, q in self.mv.items()},
        )


@dataclass
class DynEnv:
    v: Valuation = field(default_factory=Valuation)
    status: dict[Path, ActivationInfo] = field(default_factory=dict)
    print_log: list[str] = field(default_factory=list)

    # -- activation ---------------------------------------------------------

    def info(self, p: Path) -> ActivationInfo:
        return self.status.get(p, INACTIVE)

    def is_active(self, p: Path) -> bool:
        return self.info(p).is_active

    def active_substate(self, p: Path) -> Path:
        return self.info(p).active_substate

    def history(self, p: Path) -> Path:
        return self.info(p).history

    def set_active(self, p: Path, update_parent: bool = True) -> None:
        """Mark ``p`` active; by default also record it as its parent's
        active substate (callers skip that for parallel parents, whose
        info stays empty)."""
        self.status[p] = replace(self.info(p), is_active=True)
        if update_parent and len(p) > 1:
            par = parent(p)
            self.status[par] = replace(self.info(par), active_substate=p)

    def set_inactive(self, p: Path) -> None:
        self.status[p] = replace(self.info(p), is_active=False)

    def clear_active_substate(self, p: Path) -> None:
        self.status[p] = replace(self.info(p), active_substate=EMPTY_PATH)

    def record_history(self, p: Path, substate: Path) -> None:
        self.status[p] = replace(self.info(p), history=substate)

    def clear_info(self, p: Path) -> None:
        """Reset ``p`` to fully inactive (used when leaving a parallel
        composition)."""
        self.status[p] = INACTIVE

    # -- counters -----------------------------------------------------------

    def incr_event_count(self, p: Path, event: str) -> None:
        key = (p, event)
        self.v.ev[key] = self.v.ev.get(key, 0) + 1

    def incr_time(self, p: Path) -> None:
        self.v.tv[p] = self.v.tv.get(p, 0) + 1

    def reset_counters(self, p: Path) -> None:
        for key in [k for k in self.v.ev if k[0] == p]:
            del self.v.ev[key]
        self.v.tv.pop(p, None)

    # -- messages -----------------------------------------------------------

    def push_message(self, name: str, data: Value) -> None:
        self.v.mv.setdefault(name, []).append(Message(data))

    def pop_message(self, name: str) -> bool:
        """Pop the queue head into the valuation under the message name.
        Returns whether anything was popped; an empty queue is a no-op."""
        q = self.v.mv.get(name)
        if not q:
            return False
        self.v.vv[name] = q.pop(0)
        return True

    # -- output -------------------------------------------------------------

    def emit(self, text: str) -> None:
        self.print_log.append(text)

    # -- plumbing ------------------------------------------------------------

    def clone(self) -> "DynEnv":
        return DynEnv(
            v=self.v.clone(),
            status=dict(self.status),
            print_log=list(self.print_log),
        )

    def active_paths(self) -> list[Path]:
        return sorted(
            (p for p, i in self.status.items() if i.is_active),
            key=lambda p: p.segments,
        )


def init_env(chart: Chart, initial_vars: dict[str, Value] | None = None) -> DynEnv:
    """Fresh environment: declared variables at their initials (default 0),
    optionally overridden, everything inactive, all counters zero."""
    env = DynEnv()
    for name, value in chart.variables.items():
        env.v.vv[name] = float(value) if isinstance(value, (int, float)) else value
    for name, value in (initial_vars or {}).items():
        env.v.vv[name] = float(value) if isinstance(value, (int, float)) else value
    return env


def verify_activation_tree(chart: Chart, env: DynEnv) -> list[str]:
    """Structural consistency of the activation status.

    Checks that activation is upward-closed (an active state has an
    active parent) and that each exclusive composition has at most one
    active child, which matches its recorded active substate.
    """
    problems: list[str] = []
    for p, info in env.status.items():
        if info.is_active and len(p) > 1:
            if not env.is_active(parent(p)):
                problems.append(f"{p} active but parent {parent(p)} inactive")
    for sd in iter_states(chart):
        comp = sd.comp
        if not isinstance(comp, OrComp):
            continue
        _check_or(chart, env, sd.path, comp, problems)
    if isinstance(chart.root, OrComp):
        _check_or(chart, env, ROOT_PATH, chart.root, problems)
    return problems


def _check_or(chart: Chart, env: DynEnv, at: Path, comp: OrComp, problems: list[str]) -> None:
    active_children = [
        at.child(name) for name in comp.substates if env.is_active(at.child(name))
    ]
    if len(active_children) > 1:
        problems.append(f"multiple active substates under {at}: {active_children}")
    recorded = env.active_substate(at)
    if recorded:
        if not env.is_active(recorded):
            problems.append(f"{at} records active substate {recorded}, which is inactive")
        if recorded.segments[:-1] != at.segments or recorded.last not in comp.substates:
            problems.append(f"{at} records {recorded}, not one of its substates")
