from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from apimention.context import ContextToken, FeatureContext, Source
from apimention.db import DependencyGraph
from apimention.detect import Candidate, MatchKind, Mention, MentionCandidateList
from apimention.filters import (
    BETWEENNESS_KEYWORDS,
    Hit,
    HitList,
    MentionState,
    betweenness_filter,
    centrality_filter,
    closeness_score,
    extrinsic_filter,
    influence_score,
    intrinsic_filter,
    mcl_dependees,
    mcl_dependents,
)
from apimention.text import Pos

MENTION = Mention("t", "p1", 0, 0, 1, "Jackson")


def cand(api_id, sim=0.5, module=None):
    return Candidate(api_id, module, MatchKind.TOKEN_SORT, sim)


def mcl_of(*ids, mention=MENTION):
    return MentionCandidateList(mention, tuple(cand(i) for i in ids))


def hits_of(*pairs, mention=MENTION):
    """pairs of (api_id, confidence) or (api_id, confidence, name_sim)"""
    return HitList(mention, tuple(Hit(cand(p[0], *p[2:]), p[1]) for p in pairs))


def ctx_words(*words):
    return FeatureContext(tuple(ContextToken(w, Pos.NOUN, Source.SAME_POST) for w in words))


def graph(nodes, edges):
    return DependencyGraph(nodes, edges)


class TestKeywords:
    def test_golden_set(self):
        assert BETWEENNESS_KEYWORDS == {
            "extension", "extensions", "extended", "wrapper", "wrappers",
            "wrapping", "plugin", "plugins", "plug-in", "plug-ins",
        }


class TestBetweenness:
    def test_easy_gson(self, small_db):
        hits = hits_of(("gson", 0.9), ("easy-gson", 0.8))
        assert betweenness_filter(hits, ctx_words("use", "extension"), small_db.graph).api_id == "easy-gson"

    def test_needs_keyword(self, small_db):
        hits = hits_of(("gson", 0.9), ("easy-gson", 0.8))
        assert betweenness_filter(hits, ctx_words("use", "library"), small_db.graph) is None

    def test_two_extensions_highest_name_sim(self):
        g = graph("abc", [("b", "a"), ("c", "a")])
        hits = hits_of(("a", 0.9, 0.5), ("b", 0.7, 0.8), ("c", 0.95, 0.5))
        assert betweenness_filter(hits, ctx_words("plugins"), g).api_id == "b"

    def test_tied_extensions_abstain(self):
        g = graph("abc", [("b", "a"), ("c", "a")])
        hits = hits_of(("a", 0.9), ("b", 0.7), ("c", 0.95))
        assert betweenness_filter(hits, ctx_words("wrapper"), g) is None


class TestScores:
    def test_influence_on_fixture(self, small_db):
        mcl = mcl_of("apache-camel", "jackson.core", "jackson.datatype", "spring")
        assert influence_score("jackson.core", mcl, small_db.graph) == 2.0
        assert influence_score("apache-camel", mcl, small_db.graph) == 0.0

    def test_influence_with_smoothing(self):
        g = graph("abc", [("a", "b"), ("c", "a")])
        assert influence_score("a", mcl_of("a", "b", "c"), g) == 0.5

    @pytest.mark.parametrize("n, expected", [(0, 1.0), (1, 0.5), (3, 0.25)])
    def test_closeness(self, n, expected):
        ids = ["core"] + [f"d{i}" for i in range(n)]
        g = graph(ids, [(d, "core") for d in ids[1:]])
        assert closeness_score("core", mcl_of(*ids), g) == expected

    def test_outside_mcl_ignored(self, small_db):
        # spring depends on jackson.core but is not a candidate here
        mcl = mcl_of("jackson.core", "jackson.datatype")
        assert mcl_dependents("jackson.core", mcl, small_db.graph) == 1

    @given(st.data())
    def test_match_brute_force(self, data):
        n = data.draw(st.integers(2, 6))
        ids = [f"a{i}" for i in range(n)]
        pairs = [(a, b) for a in ids for b in ids if a != b]
        edges = data.draw(st.lists(st.sampled_from(pairs), unique=True))
        g = graph(ids, edges)
        mcl = mcl_of(*data.draw(st.permutations(ids)))
        for x in ids:
            dependents = sum(1 for a, b in edges if b == x)
            dependees = sum(1 for a, b in edges if a == x)
            assert mcl_dependents(x, mcl, g) == dependents
            assert mcl_dependees(x, mcl, g) == dependees
            assert influence_score(x, mcl, g) == float(Fraction(dependents, dependees + 1))
            assert closeness_score(x, mcl, g) == float(Fraction(1, dependents + 1))


class TestIntrinsic:
    def test_centrality_jackson(self, small_db):
        hits = hits_of(("jackson.core", 0.6), ("jackson.datatype", 0.9))
        d = intrinsic_filter(hits, mcl_of("jackson.core", "jackson.datatype"), ctx_words("parse"), small_db.graph)
        assert (d.chosen.api_id, d.filter_name) == ("jackson.core", "centrality")

    def test_betweenness_runs_first(self, small_db):
        hits = hits_of(("gson", 0.9), ("easy-gson", 0.8))
        d = intrinsic_filter(hits, mcl_of("gson", "easy-gson"), ctx_words("extension"), small_db.graph)
        assert (d.chosen.api_id, d.filter_name) == ("easy-gson", "betweenness")

    def test_no_relations_falls_back(self):
        g = graph("abc", [])
        hits = hits_of(("a", 0.7), ("b", 0.9), ("c", 0.8))
        d = intrinsic_filter(hits, mcl_of("a", "b", "c"), FeatureContext(), g)
        assert (d.chosen.api_id, d.filter_name) == ("b", "fallback")

    def test_closeness_decides_when_centrality_ties(self):
        # a and b tie on influence and dependents; c is the most depended-on core hit
        edges = [("x", "a"), ("y", "b"), ("z", "c"), ("u", "c"), ("c", "x"), ("c", "y"), ("c", "w")]
        g = graph("abcxyzuw", edges)
        mcl = mcl_of(*"abcxyzuw")
        hits = hits_of(("a", 0.9), ("b", 0.9), ("c", 0.6))
        assert centrality_filter(hits, mcl, g) is None
        d = intrinsic_filter(hits, mcl, FeatureContext(), g)
        assert (d.chosen.api_id, d.filter_name) == ("c", "closeness")

    def test_needs_two_hits(self, small_db):
        with pytest.raises(ValueError):
            intrinsic_filter(hits_of(("gson", 0.9)), mcl_of("gson"), FeatureContext(), small_db.graph)

    @given(st.data())
    def test_chosen_is_a_hit_and_order_free(self, data):
        n = data.draw(st.integers(2, 6))
        ids = [f"a{i}" for i in range(n)]
        pairs = [(a, b) for a in ids for b in ids if a != b]
        g = graph(ids, data.draw(st.lists(st.sampled_from(pairs), unique=True)))
        k = data.draw(st.integers(2, n))
        confs = data.draw(st.lists(st.floats(0.51, 1.0), min_size=k, max_size=k))
        sims = data.draw(st.lists(st.floats(0.2, 1.0), min_size=k, max_size=k))
        triples = list(zip(ids[:k], confs, sims))
        ctx = ctx_words(*data.draw(st.lists(st.sampled_from(["extension", "json", "parse"]), max_size=3)))
        base = intrinsic_filter(hits_of(*triples), mcl_of(*ids), ctx, g)
        assert base.chosen.api_id in ids[:k]
        for perm in itertools.islice(itertools.permutations(triples), 6):
            other = intrinsic_filter(hits_of(*perm), mcl_of(*reversed(ids)), ctx, g)
            assert (other.chosen.api_id, other.filter_name) == (base.chosen.api_id, base.filter_name)


def state(surface, pos, resolved, *hit_ids):
    m = Mention("t", "p1", 0, pos, pos + 1, surface)
    return MentionState(m, hits_of(*[(h, 0.9) for h in hit_ids], mention=m), resolved, pos)


class TestExtrinsic:
    def test_composition_overwrites(self, small_db):
        states = [
            state("Apache Camel", 1, "apache-camel", "apache-camel"),
            state("Jackson", 3, "jackson.core", "apache-camel", "jackson.core", "jackson.datatype"),
            state("Gson", 9, "gson", "gson"),
        ]
        d = extrinsic_filter(states, 1, small_db)
        assert (d.chosen.api_id, d.filter_name, d.module, d.overwrote_intrinsic) == (
            "apache-camel", "composition", "camel-jackson", True,
        )

    def test_aggregation(self, small_db):
        states = [
            state("Spring", 1, "spring", "spring"),
            state("Jackson", 3, "jackson.datatype", "jackson.core", "jackson.datatype"),
            state("Gson", 20, "gson", "gson"),
        ]
        d = extrinsic_filter(states, 1, small_db)
        assert (d.chosen.api_id, d.filter_name) == ("jackson.core", "aggregation")

    def test_projection(self, small_db):
        states = [
            state("Joda-time", 4, "joda-time", "joda-time"),
            state("Jackson", 7, "jackson.core", "jackson.core", "jackson.datatype"),
            state("Gson", 20, "gson", "gson"),
        ]
        d = extrinsic_filter(states, 1, small_db)
        assert (d.chosen.api_id, d.filter_name) == ("jackson.datatype", "projection")

    def test_strict_gate(self, small_db):
        states = [
            state("Joda-time", 4, "joda-time", "joda-time"),
            state("Jackson", 7, "jackson.core", "jackson.core", "jackson.datatype"),
        ]
        assert extrinsic_filter(states, 1, small_db) is None
        assert extrinsic_filter(states, 1, small_db, relax_gate=True).chosen.api_id == "jackson.datatype"

    def test_false_mentions_stay_false(self, small_db):
        states = [
            state("Spring", 1, "spring", "spring"),
            state("Jackson", 3, None),
            state("Gson", 9, "gson", "gson"),
        ]
        assert extrinsic_filter(states, 1, small_db) is None

    def test_unresolved_neighbors_do_not_count(self, small_db):
        states = [
            state("Spring", 1, None),
            state("Jackson", 3, "jackson.datatype", "jackson.core", "jackson.datatype"),
            state("Gson", 9, "gson", "gson"),
        ]
        assert extrinsic_filter(states, 1, small_db) is None

    def test_no_rule_applies(self, small_db):
        states = [
            state("Gson", 1, "gson", "gson"),
            state("Jackson", 3, "jackson.core", "jackson.core", "jackson.datatype"),
            state("Gson", 9, "gson", "gson"),
        ]
        assert extrinsic_filter(states, 1, small_db) is None
