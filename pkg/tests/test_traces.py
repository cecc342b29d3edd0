"""Committed per-candidate feature traces for the scenario threads.

Each trace lists the word sets behind a feature; the ratios are recomputed
here with exact fractions and compared with what the pipeline produces.
"""

from __future__ import annotations

import json
from fractions import Fraction

import pytest

from apimention.classifier import classify_confidence
from apimention.context import select_description_sentences
from apimention.detect import MatchKind
from apimention.pipeline import analyze_thread, resolve_thread
from apimention.text import tokenize_name

from conftest import FIXTURES, scenario

TRACES = json.loads((FIXTURES / "traces.json").read_text(encoding="utf-8"))


def ratio(a, b) -> Fraction:
    a, b = set(a), set(b)
    return Fraction(len(a & b), len(a | b)) if a | b else Fraction(0)


def name_ratio(surface, name, kind) -> Fraction:
    if kind in ("EXACT", "PREFIX"):
        return Fraction(1)
    return ratio(tokenize_name(surface), tokenize_name(name))


@pytest.mark.parametrize("name", sorted(TRACES))
def test_trace_matches_pipeline(name, small_db, model):
    doc = scenario(name)
    analyses = analyze_thread(doc, small_db)
    decisions = resolve_thread(doc, small_db, model)
    traces = TRACES[name]
    assert [a.mention.surface for a in analyses] == [t["surface"] for t in traces]
    for a, d, t in zip(analyses, decisions, traces):
        m = a.mention
        assert (m.post_id, m.sentence_index, m.start, m.end) == (t["post_id"], t["sentence_index"], t["start"], t["end"])
        assert sorted(a.context.nouns()) == t["context_nouns"]
        assert sorted(a.context.verbs()) == t["context_verbs"]
        assert sorted(a.code.types if a.code else ()) == t["code_types"]
        assert list(a.mcl.api_ids) == [c["api_id"] for c in t["candidates"]]
        for c in t["candidates"]:
            api = c["api_id"]
            desc = select_description_sentences(api, small_db)
            assert sorted(desc.noun_set) == c["description_nouns"]
            assert sorted(desc.verb_set) == c["description_verbs"]
            cand = a.mcl.candidate(api)
            assert cand.match_kind is MatchKind(c["match_kind"])
            assert (cand.matched_module or small_db[api].name) == c["matched_name"]

            # exact fractions from the listed sets, then against the listed values
            expected = {
                "name_sim": name_ratio(m.surface, c["matched_name"], c["match_kind"]),
                "noun_sim": ratio(t["context_nouns"], c["description_nouns"]),
                "verb_sim": ratio(t["context_verbs"], c["description_verbs"]),
                "struct_sim": Fraction(len(c["linked_types"]), len(t["code_types"])) if t["code_types"] else Fraction(0),
            }
            f = a.features[api]
            for key, value in expected.items():
                assert value == Fraction(c[key]), (api, key)
                assert getattr(f, key) == pytest.approx(float(value), abs=1e-12), (api, key)
            assert sorted(x for x, ids in a.type_links.items() if api in ids) == c["linked_types"]
            assert (small_db[api].usage_count, small_db[api].download_count) == (c["usage_count"], c["download_count"])
            assert classify_confidence(model, f) == pytest.approx(c["confidence"], abs=5e-4)
        assert {"api_id": d.api_id, "module": d.module, "provenance": d.provenance} == t["resolved"]
