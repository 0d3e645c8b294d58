import pytest
from hypothesis import given, strategies as st

from sfsem.paths import EMPTY_PATH, Path, lca, parent, path_diff

from helpers import p

segment = st.sampled_from(["root", "A", "B", "C", "On", "Off", "x1", "x2"])
state_path = st.lists(segment, min_size=1, max_size=6).map(lambda s: Path(tuple(s)))


def brute_force_lca(paths):
    # longest prefix shared by all, checked by enumeration
    stems = [q.segments if not q.is_junction else q.segments[:-1] for q in paths]
    best = ()
    for n in range(min(len(s) for s in stems), -1, -1):
        candidate = stems[0][:n]
        if all(s[:n] == candidate for s in stems):
            best = candidate
            break
    return Path(best)


def test_lca_basics():
    assert lca([p("root.Off.Sleep"), p("root.Off.Ready")]) == p("root.Off")
    assert lca([p("root.Off.Ready"), p("root.On.AddWater")]) == p("root")
    assert lca([p("root.A.B"), p("root.A.B")]) == p("root.A.B")


def test_lca_ignores_junction_suffix():
    assert lca([p("root.A.#j"), p("root.A.B")]) == p("root.A")
    assert lca([p("root.A.#j")]) == p("root.A")
    assert lca([p("root.A.B")]) == p("root.A.B")


def test_lca_rejects_bad_input():
    with pytest.raises(ValueError):
        lca([])
    with pytest.raises(ValueError):
        lca([EMPTY_PATH, p("root.A")])


@given(st.lists(state_path, min_size=1, max_size=4))
def test_lca_matches_brute_force(paths):
    assert lca(paths) == brute_force_lca(paths)


@given(state_path, state_path)
def test_lca_is_maximal_common_prefix(a, b):
    ancestor = lca([a, b])
    assert ancestor.is_prefix_of(a) or a.is_junction
    assert ancestor.is_prefix_of(b) or b.is_junction


@given(state_path, state_path)
def test_diff_reconstructs_path(a, b):
    ancestor = lca([a, b])
    if a.is_junction or b.is_junction:
        return
    rebuilt = Path(ancestor.segments + path_diff(a, ancestor).segments)
    assert rebuilt == a


def test_parent():
    assert parent(p("root.Off.Sleep")) == p("root.Off")
    assert parent(p("root")) == EMPTY_PATH
    assert parent(p("root.On")) == p("root")
    with pytest.raises(ValueError):
        parent(EMPTY_PATH)


def test_path_diff():
    assert path_diff(p("root.Off.Pending"), p("root")) == p("Off.Pending")
    assert path_diff(p("root.A"), p("root.A")) == EMPTY_PATH
    assert path_diff(p("root.On.Washing"), p("root.On")) == p("Washing")
    with pytest.raises(ValueError):
        path_diff(p("root.A"), p("root.B"))


def test_parse_and_str_roundtrip():
    assert str(p("root.On.#h")) == "root.On.#h"
    assert p("root.On.#h").is_junction
    assert not p("root.On").is_junction
    with pytest.raises(ValueError):
        Path.parse("root..On")


def test_head_tail_child():
    q = p("root.A.B")
    assert q.head == "root"
    assert q.tail() == p("A.B")
    assert q.child("C") == p("root.A.B.C")
    assert p("root").is_prefix_of(q)
    assert not q.is_prefix_of(p("root"))
