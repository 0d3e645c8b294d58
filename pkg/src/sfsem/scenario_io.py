"""File formats: JSON charts, JSON scenarios, and canonical JSON traces.

All files are UTF-8 JSON.  Trace output is byte-stable: loading the same
chart and scenario twice and running them produces identical bytes, which
is what the determinism checks compare.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .chart import (
    Action,
    AndComp,
    AndCond,
    Assign,
    BinOp,
    CallGraphical,
    CallScripted,
    Chart,
    Composition,
    Cond,
    Expr,
    FunctionDef,
    GraphicalFunctionDef,
    LEAF,
    MsgField,
    NotCond,
    NumLit,
    OnEvent,
    OnTemporal,
    OrComp,
    OrCond,
    Print,
    Rel,
    REL_OPS,
    ARITH_OPS,
    Send,
    SendMessage,
    SKIP,
    StateDef,
    StrLit,
    TemporalCond,
    TEMPORAL_KINDS,
    TempCount,
    Transition,
    TrueCond,
    VarRef,
    make_chart,
    seq,
    validate_chart,
)
from .dynenv import Message, Value
from .errors import LoadError
from .interp import Trace
from .paths import EMPTY_PATH, Path, ROOT_PATH

TRACE_VERSION = "v1"


# ---------------------------------------------------------------------------
# chart loading
# ---------------------------------------------------------------------------

def _decode(data) -> object:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise LoadError(
            f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None


def _obj(x, where: str) -> dict:
    if not isinstance(x, dict):
        raise LoadError(f"{where}: expected an object, got {type(x).__name__}")
    return x


def _arr(x, where: str) -> list:
    if not isinstance(x, list):
        raise LoadError(f"{where}: expected an array, got {type(x).__name__}")
    return x


def _str(x, where: str) -> str:
    if not isinstance(x, str):
        raise LoadError(f"{where}: expected a string, got {type(x).__name__}")
    return x


def _num(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise LoadError(f"{where}: expected a number, got {type(x).__name__}")
    return float(x)


def _names(x, where: str) -> tuple[str, ...]:
    return tuple(_str(item, f"{where}[{i}]") for i, item in enumerate(_arr(x, where)))


def _path(text, where: str) -> Path:
    try:
        return Path.parse(_str(text, where))
    except ValueError as exc:
        raise LoadError(f"{where}: {exc}") from None


def parse_expr(x, where: str) -> Expr:
    if isinstance(x, bool):
        raise LoadError(f"{where}: booleans are not expressions")
    if isinstance(x, (int, float)):
        return NumLit(float(x))
    node = _obj(x, where)
    if "num" in node:
        return NumLit(_num(node["num"], f"{where}.num"))
    if "str" in node:
        return StrLit(_str(node["str"], f"{where}.str"))
    if "var" in node:
        return VarRef(_str(node["var"], f"{where}.var"))
    if "tempCount" in node:
        return TempCount(_str(node["tempCount"], f"{where}.tempCount"))
    if "message" in node:
        return MsgField(
            _str(node["message"], f"{where}.message"),
            _str(node.get("field", "data"), f"{where}.field"),
        )
    if "op" in node:
        op = _str(node["op"], f"{where}.op")
        if op not in ARITH_OPS:
            raise LoadError(f"{where}.op: unknown operator {op!r}")
        return BinOp(
            op,
            parse_expr(node.get("left"), f"{where}.left"),
            parse_expr(node.get("right"), f"{where}.right"),
        )
    raise LoadError(f"{where}: unrecognized expression {sorted(node.keys())}")


def parse_temporal(x, where: str) -> TemporalCond:
    node = _obj(x, where)
    kind = _str(node.get("kind"), f"{where}.kind")
    if kind not in TEMPORAL_KINDS:
        raise LoadError(f"{where}.kind: unknown temporal operator {kind!r}")
    return TemporalCond(
        kind,
        parse_expr(node.get("n"), f"{where}.n"),
        _str(node.get("event"), f"{where}.event"),
    )


def parse_cond(x, where: str) -> Cond:
    if x is True or x is None:
        return TrueCond()
    node = _obj(x, where)
    if "rel" in node:
        op = _str(node["rel"], f"{where}.rel")
        if op not in REL_OPS:
            raise LoadError(f"{where}.rel: unknown relation {op!r}")
        return Rel(
            op,
            parse_expr(node.get("left"), f"{where}.left"),
            parse_expr(node.get("right"), f"{where}.right"),
        )
    if "and" in node:
        parts = [
            parse_cond(c, f"{where}.and[{i}]")
            for i, c in enumerate(_arr(node["and"], f"{where}.and"))
        ]
        return _fold(parts, AndCond, where)
    if "or" in node:
        parts = [
            parse_cond(c, f"{where}.or[{i}]")
            for i, c in enumerate(_arr(node["or"], f"{where}.or"))
        ]
        return _fold(parts, OrCond, where)
    if "not" in node:
        return NotCond(parse_cond(node["not"], f"{where}.not"))
    if "temporal" in node:
        return parse_temporal(node["temporal"], f"{where}.temporal")
    if "kind" in node:
        return parse_temporal(node, where)
    raise LoadError(f"{where}: unrecognized condition {sorted(node.keys())}")


def _fold(parts, ctor, where: str) -> Cond:
    if not parts:
        raise LoadError(f"{where}: empty connective")
    out = parts[-1]
    for part in reversed(parts[:-1]):
        out = ctor(part, out)
    return out


def parse_action(x, where: str) -> Action:
    if x is None:
        return SKIP
    if isinstance(x, list):
        return seq(
            *(parse_action(item, f"{where}[{i}]") for i, item in enumerate(x))
        )
    node = _obj(x, where)
    do = _str(node.get("do"), f"{where}.do")
    if do == "skip":
        return SKIP
    if do == "assign":
        return Assign(
            _str(node.get("var"), f"{where}.var"),
            parse_expr(node.get("value"), f"{where}.value"),
        )
    if do == "send":
        target = node.get("target")
        return Send(
            _str(node.get("event"), f"{where}.event"),
            bool(node.get("inTransAct", False)),
            _path(target, f"{where}.target") if target is not None else EMPTY_PATH,
        )
    if do == "sendMessage":
        return SendMessage(
            _str(node.get("message"), f"{where}.message"),
            parse_expr(node.get("data"), f"{where}.data"),
        )
    if do == "onTemporal":
        return OnTemporal(
            parse_temporal(node.get("cond"), f"{where}.cond"),
            parse_action(node.get("action"), f"{where}.action"),
        )
    if do == "onEvent":
        return OnEvent(
            _str(node.get("event"), f"{where}.event"),
            parse_action(node.get("action"), f"{where}.action"),
        )
    if do == "call":
        return CallScripted(
            _names(node.get("outputs", []), f"{where}.outputs"),
            _str(node.get("function"), f"{where}.function"),
            tuple(
                parse_expr(arg, f"{where}.args[{i}]")
                for i, arg in enumerate(_arr(node.get("args", []), f"{where}.args"))
            ),
        )
    if do == "callGraphical":
        return CallGraphical(
            _names(node.get("outputs", []), f"{where}.outputs"),
            _str(node.get("function"), f"{where}.function"),
            tuple(
                parse_expr(arg, f"{where}.args[{i}]")
                for i, arg in enumerate(_arr(node.get("args", []), f"{where}.args"))
            ),
        )
    if do == "print":
        value = node.get("value")
        if isinstance(value, str):
            return Print(StrLit(value))
        return Print(parse_expr(value, f"{where}.value"))
    if do == "seq":
        items = _arr(node.get("actions"), f"{where}.actions")
        return seq(
            *(parse_action(item, f"{where}.actions[{i}]") for i, item in enumerate(items))
        )
    raise LoadError(f"{where}.do: unrecognized action {do!r}")


def parse_transition(x, where: str, default_source: Path) -> Transition:
    node = _obj(x, where)
    source = node.get("source")
    return Transition(
        source=_path(source, f"{where}.source") if source is not None else default_source,
        guard=_str(node.get("event", ""), f"{where}.event"),
        cond=parse_cond(node.get("cond"), f"{where}.cond"),
        cond_act=parse_action(node.get("condAct"), f"{where}.condAct"),
        trans_act=parse_action(node.get("transAct"), f"{where}.transAct"),
        dest=_path(node.get("dest"), f"{where}.dest"),
    )


def _parse_translist(x, where: str, default_source: Path) -> tuple[Transition, ...]:
    return tuple(
        parse_transition(item, f"{where}[{i}]", default_source)
        for i, item in enumerate(_arr(x, where))
    )


def _parse_statedef(x, at: Path, where: str) -> StateDef:
    node = _obj(x, where)
    return StateDef(
        path=at,
        entry=parse_action(node.get("entry"), f"{where}.entry"),
        during=parse_action(node.get("during"), f"{where}.during"),
        exit=parse_action(node.get("exit"), f"{where}.exit"),
        inner=_parse_translist(node.get("inner", []), f"{where}.inner", at),
        outer=_parse_translist(node.get("outer", []), f"{where}.outer", at),
        comp=_parse_comp(node.get("comp"), at, f"{where}.comp"),
    )


def _parse_comp(x, at: Path, where: str) -> Composition:
    if x is None:
        return LEAF
    node = _obj(x, where)
    kind = _str(node.get("kind"), f"{where}.kind")
    if kind == "leaf":
        return LEAF
    raw_subs = _obj(node.get("substates", {}), f"{where}.substates")
    substates = {
        name: _parse_statedef(sub, at.child(name), f"{where}.substates.{name}")
        for name, sub in raw_subs.items()
    }
    if kind == "or":
        return OrComp(
            defaults=_parse_translist(
                node.get("defaults", []), f"{where}.defaults", EMPTY_PATH
            ),
            has_history=bool(node.get("history", False)),
            substates=substates,
        )
    if kind == "and":
        return AndComp(
            order=_names(node.get("order", list(raw_subs.keys())), f"{where}.order"),
            substates=substates,
        )
    raise LoadError(f"{where}.kind: unrecognized composition kind {kind!r}")


def load_chart(data) -> Chart:
    """Parse, build and validate a chart from JSON text or bytes."""
    doc = _obj(_decode(data), "$")
    if "root" not in doc:
        raise LoadError("$: missing root composition")
    variables = {}
    for name, value in _obj(doc.get("variables", {}), "$.variables").items():
        variables[name] = _num(value, f"$.variables.{name}")
    functions = {}
    for name, f in _obj(doc.get("functions", {}), "$.functions").items():
        fw = f"$.functions.{name}"
        fn = _obj(f, fw)
        functions[name] = FunctionDef(
            body=parse_action(fn.get("body"), f"{fw}.body"),
            inputs=_names(fn.get("inputs", []), f"{fw}.inputs"),
            outputs=_names(fn.get("outputs", []), f"{fw}.outputs"),
        )
    graphical = {}
    for name, g in _obj(doc.get("graphicalFunctions", {}), "$.graphicalFunctions").items():
        gw = f"$.graphicalFunctions.{name}"
        gn = _obj(g, gw)
        graphical[name] = GraphicalFunctionDef(
            init_transition=parse_transition(
                gn.get("initialTransition"), f"{gw}.initialTransition", EMPTY_PATH
            ),
            inputs=_names(gn.get("inputs", []), f"{gw}.inputs"),
            outputs=_names(gn.get("outputs", []), f"{gw}.outputs"),
        )
    junctions = {}
    for raw_path, tl in _obj(doc.get("junctions", {}), "$.junctions").items():
        jw = f"$.junctions.{raw_path}"
        jpath = _path(raw_path, jw)
        junctions[jpath] = _parse_translist(tl, jw, jpath)
    chart = make_chart(
        name=_str(doc.get("name", "chart"), "$.name"),
        root=_parse_comp(doc["root"], ROOT_PATH, "$.root"),
        input_events=_names(doc.get("inputEvents", []), "$.inputEvents"),
        local_events=_names(doc.get("localEvents", []), "$.localEvents"),
        messages=_names(doc.get("messages", []), "$.messages"),
        variables=variables,
        functions=functions,
        graphical_functions=graphical,
        junctions=junctions,
    )
    diags = validate_chart(chart)
    if diags:
        raise LoadError(
            f"chart {chart.name!r} failed validation ({len(diags)} problems)", diags
        )
    return chart


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

@dataclass
class ScenarioFile:
    initial_vars: dict[str, float] = field(default_factory=dict)
    events: list[str | None] = field(default_factory=list)
    expected_prints: list[str] | None = None
    fuel_per_round: int | None = None
    execution_periods: object = None


def load_scenario(data) -> ScenarioFile:
    doc = _obj(_decode(data), "$")
    initial_vars = {
        name: _num(value, f"$.initialVars.{name}")
        for name, value in _obj(doc.get("initialVars", {}), "$.initialVars").items()
    }
    events: list[str | None] = []
    for i, item in enumerate(_arr(doc.get("events", []), "$.events")):
        if item is None:
            events.append(None)
        else:
            events.append(_str(item, f"$.events[{i}]"))
    expected = None
    if "expectedPrints" in doc:
        expected = [
            _str(item, f"$.expectedPrints[{i}]")
            for i, item in enumerate(_arr(doc["expectedPrints"], "$.expectedPrints"))
        ]
    fuel = None
    if "fuelPerRound" in doc:
        raw = doc["fuelPerRound"]
        if isinstance(raw, bool) or not isinstance(raw, int) or raw <= 0:
            raise LoadError("$.fuelPerRound: expected a positive integer")
        fuel = raw
    return ScenarioFile(
        initial_vars=initial_vars,
        events=events,
        expected_prints=expected,
        fuel_per_round=fuel,
        execution_periods=doc.get("executionPeriods"),
    )


def scenario_problems(scenario: ScenarioFile, chart: Chart) -> list[str]:
    """Cross-checks that need both files: scenario events must be declared
    input events, initial values must name declared variables."""
    problems = []
    for name in dict.fromkeys(e for e in scenario.events if e):
        if name not in chart.input_events:
            problems.append(f"event {name!r} is not a declared input event")
    for name in scenario.initial_vars:
        if name not in chart.variables:
            problems.append(f"initial value for undeclared variable {name!r}")
    return problems


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

def serialize_value(value: Value):
    if isinstance(value, Message):
        return {"message": {"data": serialize_value(value.data)}}
    return value


def trace_to_jsonable(trace: Trace) -> dict:
    init: dict = {"prints": trace.init_prints, "active": trace.init_active}
    if trace.init_vars is not None:
        init["vars"] = {k: serialize_value(v) for k, v in trace.init_vars.items()}
    rounds = []
    for r in trace.rounds:
        item = {
            "index": r.index,
            "inputEvent": r.input_event,
            "prints": r.prints,
            "active": r.active,
            "varsDelta": {k: serialize_value(v) for k, v in r.vars_delta.items()},
        }
        if r.vars is not None:
            item["vars"] = {k: serialize_value(v) for k, v in r.vars.items()}
        rounds.append(item)
    doc = {
        "version": TRACE_VERSION,
        "chart": trace.chart_name,
        "init": init,
        "rounds": rounds,
    }
    if trace.execution_periods is not None:
        doc["executionPeriods"] = trace.execution_periods
    return doc


def emit_trace(trace: Trace) -> bytes:
    """Canonical JSON: sorted keys, fixed layout, trailing newline.  Equal
    traces serialize to equal bytes."""
    text = json.dumps(trace_to_jsonable(trace), sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


@dataclass
class CheckReport:
    ok: bool
    index: int | None = None
    expected: str | None = None
    actual: str | None = None
    message: str = "output matches"


def check_trace(trace: Trace, expected_prints: list[str]) -> CheckReport:
    """Compare the flattened print stream against the expectation,
    reporting the first divergence."""
    actual = trace.all_prints()
    for i, (want, got) in enumerate(zip(expected_prints, actual)):
        if want != got:
            return CheckReport(
                False, i, want, got, f"print {i} differs: expected {want!r}, got {got!r}"
            )
    if len(actual) < len(expected_prints):
        i = len(actual)
        return CheckReport(
            False, i, expected_prints[i], None,
            f"print {i} missing: expected {expected_prints[i]!r}, output ended",
        )
    if len(actual) > len(expected_prints):
        i = len(expected_prints)
        return CheckReport(
            False, i, None, actual[i],
            f"unexpected print {i}: {actual[i]!r} past the end of the expectation",
        )
    return CheckReport(True)
