import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_plain_graph, relevance_oracle, to_context_graph
from samrec.errors import InvalidInteractionError, MissingNodeError
from samrec.graph import AssetKind, ContextGraph, Interaction
from samrec.relevance import (
    EngineConfig,
    TraversalStats,
    asset_relevance,
    direct_weight,
    explicit_weight,
    implicit_weight,
    neighbourhood,
)


@pytest.fixture
def g():
    g = ContextGraph()
    g.add_person("u")
    g.add_asset("R", "root")
    g.add_asset("W", "sub")
    g.link_widget("R", "W")
    return g


def test_explicit_weight(g):
    assert explicit_weight("u", "R", g) == 0.0
    g.interact("u", "R", "like")
    assert explicit_weight("u", "R", g) == 1.0
    g.interact("u", "R", "comment", polarity=-1.0, intensity=0.6)
    assert explicit_weight("u", "R", g) == -0.6


@pytest.mark.parametrize(
    "itype,kind,expected",
    [("scroll", "sub", 0.25), ("dismiss", "sub", -0.25), ("consume", "root", 0.2)],
)
def test_implicit_weight(itype, kind, expected):
    assert implicit_weight(Interaction("u", "x", itype), AssetKind(kind), EngineConfig()) == pytest.approx(expected, abs=1e-15)


def test_implicit_weight_rejects_explicit():
    with pytest.raises(InvalidInteractionError):
        implicit_weight(Interaction("u", "x", "like"), AssetKind.SUB, EngineConfig())


def test_direct_weight_like_then_dismiss(g):
    g.interact("u", "W", "like")
    g.interact("u", "W", "dismiss")
    assert direct_weight("u", "W", g).total == pytest.approx(0.75, abs=1e-15)


def test_direct_weight_dislike_scroll_fullscreen(g):
    assert direct_weight("u", "R", g).total == 0.0
    g.interact("u", "R", "dislike")
    g.interact("u", "R", "scroll")
    g.interact("u", "R", "fullscreen")
    assert direct_weight("u", "R", g).total == pytest.approx(-0.6, abs=1e-15)


def test_no_interactions_nearby_gives_zero_terms(g):
    b = asset_relevance("u", "R", g)
    assert b.total == 0.0 and b.contributing_terms == 0


def test_one_liked_neighbour_of_five():
    g = ContextGraph()
    g.add_person("u")
    g.add_asset("R", "root")
    for w in ("W1", "W2"):
        g.add_asset(w, "sub")
        g.link_widget("R", w)
    for k in ("a", "b", "c"):
        g.tag("R", k)
    g.interact("u", "W1", "like")
    b = asset_relevance("u", "R", g)
    assert b.total == pytest.approx(1 / 6, abs=1e-15)
    assert b.explicit == 0.0 and b.implicit_sum == 0.0


def test_own_like_with_silent_neighbours(g):
    g.tag("R", "x")
    g.interact("u", "R", "like")
    assert asset_relevance("u", "R", g).total == 1.0


def test_missing_nodes(g):
    with pytest.raises(MissingNodeError):
        asset_relevance("ghost", "R", g)
    with pytest.raises(MissingNodeError):
        asset_relevance("u", "ghost", g)


def test_keyword_propagation_reaches_sibling_asset():
    g = ContextGraph()
    g.add_person("u")
    for a in ("M1", "M2"):
        g.add_asset(a, "root")
        g.tag(a, "noir")
    g.interact("u", "M2", "like")
    # M1 -> noir (1 of 1 neighbours) -> M2 (1 of 1 after removing M1)
    assert asset_relevance("u", "M1", g).total == pytest.approx((1 / 2) / 2)
    assert asset_relevance("u", "M1", g, EngineConfig(max_depth=1)).total == 0.0


def test_cycle_is_not_revisited():
    g = ContextGraph()
    g.add_person("u")
    g.add_asset("M", "root")
    g.add_asset("N", "root")
    g.tag("M", "a")
    g.tag("M", "b")
    g.tag("N", "a")
    g.tag("N", "b")
    g.interact("u", "M", "like")
    # depth 3 would return to M via N without the path exclusion
    b = asset_relevance("u", "N", g, EngineConfig(max_depth=3))
    expected, _ = relevance_oracle_for(g, "u", "N", 3)
    assert b.total == pytest.approx(expected, abs=1e-12)


def relevance_oracle_for(graph, person, asset, depth):
    from oracles import PlainGraph

    plain = PlainGraph()
    plain.persons = graph.persons()
    for n in graph.nodes():
        if graph.is_asset(n.id):
            plain.assets[n.id] = n.asset_kind.value
        elif graph.is_keyword(n.id):
            plain.keywords.append(n.id)
    plain.edges = [(e.kind.value, e.source, e.target) for e in graph.structural_edges()]
    plain.events = [
        (i.person, i.asset, i.type.value, i.polarity, i.intensity, i.timestamp) for i in graph.interactions()
    ]
    value, terms = relevance_oracle(plain, person, asset, depth)
    return float(value), terms


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(max_depth=0)
    with pytest.raises(ValueError):
        EngineConfig(t_widget=1)


# -- properties ------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_matches_path_enumeration_oracle(seed):
    rng = random.Random(seed)
    plain = random_plain_graph(rng, 30)
    graph = to_context_graph(plain)
    depth = rng.choice([1, 2, 2, 3])
    for person in plain.persons[:2]:
        for asset in list(plain.assets)[:4]:
            b = asset_relevance(person, asset, graph, EngineConfig(max_depth=depth))
            expected, terms = relevance_oracle(plain, person, asset, depth)
            assert abs(b.total - float(expected)) <= 1e-12
            assert b.contributing_terms == terms
            assert b.total == b.explicit + b.implicit_sum + b.indirect_sum
            if b.contributing_terms == 0:
                assert b.total == 0.0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_direct_part_keeps_explicit_sign(seed):
    rng = random.Random(seed)
    g = ContextGraph()
    g.add_person("u")
    g.add_asset("R", "root")
    g.add_asset("W", "sub")
    g.link_widget("R", "W")
    asset = rng.choice(["R", "W"])
    g.interact("u", asset, rng.choice(["like", "dislike"]))
    implicit = ["consume", "scroll", "fullscreen"] if asset == "R" else ["scroll", "dismiss"]
    for itype in rng.sample(implicit, rng.randint(0, len(implicit))):
        g.interact("u", asset, itype)
    b = direct_weight("u", asset, g)
    assert abs(b.implicit_sum) < 1
    assert (b.explicit + b.implicit_sum > 0) == (b.explicit > 0)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_deterministic_and_bounded_visits(seed):
    rng = random.Random(seed)
    plain = random_plain_graph(rng, 40)
    graph = to_context_graph(plain)
    person = plain.persons[0]
    asset = rng.choice(list(plain.assets))
    s1, s2 = TraversalStats(), TraversalStats()
    assert asset_relevance(person, asset, graph, stats=s1) == asset_relevance(person, asset, graph, stats=s2)
    assert s1.calls == s2.calls
    assert s1.touched <= neighbourhood(graph, asset, 2)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_far_away_additions_change_nothing(seed):
    rng = random.Random(seed)
    plain = random_plain_graph(rng, 25)
    graph = to_context_graph(plain)
    person = plain.persons[0]
    asset = rng.choice(list(plain.assets))
    before_stats = TraversalStats()
    before = asset_relevance(person, asset, graph, stats=before_stats)
    island = random_plain_graph(rng, 25)
    rename = lambda n: "z" + n if not n.startswith("k:") else "k:z" + n[2:]
    for p in island.persons:
        graph.add_person(rename(p))
    for a, kind in island.assets.items():
        graph.add_asset(rename(a), kind)
    from samrec.graph import KeywordNode, StructuralEdge

    for k in island.keywords:
        graph.add_node(KeywordNode("z" + k[2:], rename(k)))
    for kind, a, b in island.edges:
        graph.add_structural_edge(StructuralEdge(kind, rename(a), rename(b)))
    for p, a, itype, pol, inten, ts in island.events:
        graph.record_interaction(Interaction(rename(p), rename(a), itype, pol, inten, None, ts))
    after_stats = TraversalStats()
    assert asset_relevance(person, asset, graph, stats=after_stats) == before
    assert after_stats.calls == before_stats.calls
