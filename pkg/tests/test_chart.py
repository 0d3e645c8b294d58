import pytest

from sfsem.chart import (
    Assign,
    CallScripted,
    FunctionDef,
    LeafComp,
    NumLit,
    OrComp,
    Print,
    Send,
    Seq,
    SKIP,
    StrLit,
    TemporalCond,
    comp_lookup,
    make_chart,
    seq,
    state_lookup,
    validate_chart,
)
from sfsem.errors import PathLookupError
from sfsem.paths import EMPTY_PATH, Path

from conftest import load_example
from helpers import and_comp, or_comp, p, state, t


def tiny_chart(**kw):
    root = or_comp([state("root.A"), state("root.B", outer=[t("root.B", "root.A")])])
    return make_chart("tiny", root, **kw)


def test_washing_chart_is_valid(washing_chart):
    assert validate_chart(washing_chart) == []


def test_validate_is_idempotent(washing_chart):
    first = validate_chart(washing_chart)
    second = validate_chart(washing_chart)
    assert first == second == []


def test_unresolved_dest_is_diagnosed():
    root = or_comp([state("root.A", outer=[t("root.A", "root.Nowhere")])])
    diags = validate_chart(make_chart("broken", root))
    assert len(diags) == 1
    assert "unresolved path root.Nowhere" in diags[0]


def test_and_order_mismatch_is_diagnosed():
    comp = and_comp([state("root.P.L"), state("root.P.R")], order=["L"])
    root = or_comp([state("root.P", comp=comp)])
    diags = validate_chart(make_chart("broken", root))
    assert any("order/substates mismatch" in d for d in diags)


def test_default_with_state_source_is_diagnosed():
    root = or_comp(
        [state("root.A"), state("root.B")],
        defaults=[t("root.B", "root.A")],
    )
    diags = validate_chart(make_chart("broken", root))
    assert any("state source" in d for d in diags)


def test_undeclared_guard_is_diagnosed():
    root = or_comp([state("root.A", outer=[t("root.A", "root.A", event="GHOST")])])
    diags = validate_chart(make_chart("broken", root))
    assert any("GHOST" in d for d in diags)


def test_event_message_name_collision_is_diagnosed():
    chart = tiny_chart(input_events=("GO",), messages=("GO",))
    diags = validate_chart(chart)
    assert any("declared both" in d for d in diags)


def test_call_arity_mismatch_is_diagnosed():
    fn = FunctionDef(body=SKIP, inputs=("a", "b"), outputs=("r",))
    root = or_comp(
        [state("root.A", entry=CallScripted(("y",), "f", (NumLit(1.0),)))]
    )
    diags = validate_chart(make_chart("broken", root, functions={"f": fn}))
    assert any("passes 1 arguments, expected 2" in d for d in diags)


def test_transition_source_must_match_state():
    root = or_comp([state("root.A", outer=[t("root.B", "root.A")]), state("root.B")])
    diags = validate_chart(make_chart("broken", root))
    assert any("is not root.A" in d for d in diags)


def test_negative_temporal_threshold_is_diagnosed():
    cond = TemporalCond("after", NumLit(-1.0), "tick")
    root = or_comp([state("root.A", outer=[t("root.A", "root.A", cond=cond)])])
    diags = validate_chart(make_chart("broken", root))
    assert any("negative temporal threshold" in d for d in diags)


def test_state_lookup(washing_chart):
    sd = state_lookup(washing_chart, p("root.Off.Sleep"))
    assert sd.path == p("root.Off.Sleep")
    # entry resets both washing-cycle variables
    assigned = [a.var for a in _flatten(sd.entry) if isinstance(a, Assign)]
    assert assigned == ["finish", "time"]


def _flatten(action):
    if isinstance(action, Seq):
        return _flatten(action.first) + _flatten(action.second)
    return [action]


def test_state_lookup_rejects_non_states(washing_chart):
    with pytest.raises(PathLookupError):
        state_lookup(washing_chart, p("root"))
    with pytest.raises(PathLookupError):
        state_lookup(washing_chart, EMPTY_PATH)
    with pytest.raises(PathLookupError):
        state_lookup(washing_chart, p("root.On.#history"))
    with pytest.raises(PathLookupError):
        state_lookup(washing_chart, p("root.Off.Nowhere"))


def test_comp_lookup(washing_chart):
    off = comp_lookup(washing_chart, p("root.Off"))
    assert isinstance(off, OrComp)
    assert set(off.substates) == {"Sleep", "Ready", "Pending"}
    assert comp_lookup(washing_chart, p("root")) is washing_chart.root
    assert comp_lookup(washing_chart, EMPTY_PATH) is washing_chart.root
    assert isinstance(comp_lookup(washing_chart, p("root.Off.Sleep")), LeafComp)
    with pytest.raises(PathLookupError):
        comp_lookup(washing_chart, p("root.Missing"))


def test_history_paths(washing_chart):
    assert washing_chart.history_paths == frozenset({p("root.On")})
    assert washing_chart.is_history_dest(p("root.On.#history"))
    assert not washing_chart.is_history_dest(p("root.Off.#history"))
    assert not washing_chart.is_history_dest(p("root.On"))


def test_seq_builder_folds_right():
    a, b, c = Print(StrLit("a")), Print(StrLit("b")), Print(StrLit("c"))
    assert seq(a, b, c) == Seq(a, Seq(b, c))
    assert seq() == SKIP
    assert seq(SKIP, a, SKIP) == a


def test_loaded_figures_are_valid():
    for name in [
        "junction_backtracking",
        "terminal_junction",
        "early_return_condition",
        "early_return_transition",
        "message_passing",
        "junction_loop",
    ]:
        chart = load_example(name)
        assert validate_chart(chart) == [], name
