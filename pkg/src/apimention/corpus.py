"""Labelled training corpora for the resolution classifier.

A corpus file holds one JSON object per line, in either of two shapes:

* a labelled pair: the mention span, one candidate ``api_id`` and a boolean
  ``label``;
* a span-level truth record (no ``label`` key): the mention span and the API
  it refers to, or ``null`` for a false mention. Every candidate of that
  mention becomes a pair, true only for the named API.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from apimention.classifier import TrainingExample
from apimention.db import ApiDatabase
from apimention.errors import InputError, ParseError
from apimention.evaluate import GroundTruthRecord
from apimention.pipeline import MentionAnalysis, PipelineConfig, analyze_thread
from apimention.text import ThreadDoc


@dataclass(frozen=True)
class LabeledPair:
    thread_id: str
    post_id: str
    sentence_index: int
    start: int
    end: int
    api_id: str
    label: bool

    @property
    def span(self) -> tuple[str, str, int, int, int]:
        return (self.thread_id, self.post_id, self.sentence_index, self.start, self.end)


Entry = LabeledPair | GroundTruthRecord


def _entry(rec: dict) -> Entry:
    span = (str(rec["thread_id"]), str(rec["post_id"]), int(rec["sentence_index"]), int(rec["start"]), int(rec["end"]))
    if "label" in rec:
        if not isinstance(rec["label"], bool):
            raise ValueError("label must be true or false")
        return LabeledPair(*span, api_id=str(rec["api_id"]), label=rec["label"])
    api = rec["api_id"]
    return GroundTruthRecord(*span, api_id=None if api is None else str(api), module=rec.get("module"))


def load_corpus(path: str | Path) -> list[Entry]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split("\n")
    except OSError as exc:
        raise ParseError(f"cannot read corpus: {exc.strerror}", source=str(path)) from None
    out = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            out.append(_entry(json.loads(raw)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed corpus record: {exc}", lineno, str(path)) from None
    return out


class _Analyses:
    """Per-thread analyses, computed once and looked up by mention span."""

    def __init__(self, threads: Mapping[str, ThreadDoc], db: ApiDatabase, config: PipelineConfig):
        self.threads, self.db, self.config = threads, db, config
        self._by_thread: dict[str, dict[tuple, MentionAnalysis]] = {}

    def get(self, span: tuple[str, str, int, int, int]) -> MentionAnalysis:
        tid = span[0]
        if tid not in self.threads:
            raise InputError(f"corpus references unknown thread {tid!r}")
        if tid not in self._by_thread:
            self._by_thread[tid] = {a.mention.span: a for a in analyze_thread(self.threads[tid], self.db, self.config)}
        a = self._by_thread[tid].get(span)
        if a is None:
            raise InputError(f"no detected mention at {span}")
        return a


def expand(entries: Iterable[Entry], analyses: _Analyses) -> list[tuple[MentionAnalysis, str, bool]]:
    out = []
    for e in entries:
        span = (e.thread_id, e.post_id, e.sentence_index, e.start, e.end)
        a = analyses.get(span)
        if isinstance(e, LabeledPair):
            if e.api_id not in a.features:
                raise InputError(f"{e.api_id!r} is not a candidate of the mention at {span}")
            out.append((a, e.api_id, e.label))
            continue
        if e.api_id is not None and e.api_id not in a.features:
            raise InputError(f"{e.api_id!r} is not a candidate of the mention at {span}")
        out += [(a, c.api_id, c.api_id == e.api_id) for c in a.mcl.candidates]
    return out


def training_examples(
    entries: Iterable[Entry],
    threads: Mapping[str, ThreadDoc],
    db: ApiDatabase,
    config: PipelineConfig = PipelineConfig(),
) -> list[TrainingExample]:
    """Feature vectors for every labelled (mention, candidate) pair of the corpus."""
    pairs = expand(entries, _Analyses(threads, db, config))
    return [TrainingExample(a.features[api], label) for a, api, label in pairs]
