"""Span-level precision/recall for detection and resolution against hand labels."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from apimention.errors import InputError, ParseError
from apimention.pipeline import ResolutionDecision

REPORT_FORMAT = "apimention.metrics/1"
AGGREGATE = "*"

SpanKey = tuple[str, int, int, int]  # post_id, sentence_index, start, end


@dataclass(frozen=True)
class GroundTruthRecord:
    thread_id: str
    post_id: str
    sentence_index: int
    start: int
    end: int
    api_id: str | None  # None marks a false mention
    module: str | None = None

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start or self.sentence_index < 0:
            raise ValueError(f"invalid span [{self.start}, {self.end}) in sentence {self.sentence_index}")

    @property
    def key(self) -> SpanKey:
        return (self.post_id, self.sentence_index, self.start, self.end)


def parse_truth(text: str, source: str | None = None) -> list[GroundTruthRecord]:
    out = []
    seen = set()
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            api = rec.get("api_id")
            gt = GroundTruthRecord(
                str(rec["thread_id"]),
                str(rec["post_id"]),
                int(rec["sentence_index"]),
                int(rec["start"]),
                int(rec["end"]),
                None if api is None else str(api),
                rec.get("module"),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed truth record: {exc}", lineno, source) from None
        ident = (gt.thread_id,) + gt.key
        if ident in seen:
            raise ParseError(f"duplicate truth record for span {ident}", lineno, source)
        seen.add(ident)
        out.append(gt)
    return out


def load_truth(path: str | Path) -> list[GroundTruthRecord]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read truth file: {exc.strerror}", source=str(path)) from None
    return parse_truth(text, str(path))


@dataclass(frozen=True)
class Prf:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        # no predictions: nothing was wrong
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "Prf") -> "Prf":
        return Prf(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class ThreadMetrics:
    thread_id: str
    detection: Prf
    resolution: Prf
    module_mismatches: int

    def to_record(self) -> dict:
        rec: dict = {"format": REPORT_FORMAT, "thread_id": self.thread_id, "module_mismatches": self.module_mismatches}
        for name, prf in (("detection", self.detection), ("resolution", self.resolution)):
            rec[name] = {
                "tp": prf.tp,
                "fp": prf.fp,
                "fn": prf.fn,
                "precision": prf.precision,
                "recall": prf.recall,
                "f1": prf.f1,
            }
        return rec


@dataclass(frozen=True)
class MetricsReport:
    threads: tuple[ThreadMetrics, ...]
    aggregate: ThreadMetrics
    overlap: bool = False

    def records(self) -> list[dict]:
        return [t.to_record() for t in self.threads] + [self.aggregate.to_record()]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def table(self) -> str:
        head = f"{'thread':<24} {'det P':>6} {'det R':>6} {'det F1':>6} {'res P':>6} {'res R':>6} {'res F1':>6} {'mod!=':>5}"
        rows = [head, "-" * len(head)]
        for t in self.threads + (self.aggregate,):
            name = "ALL" if t.thread_id == AGGREGATE else t.thread_id
            d, r = t.detection, t.resolution
            rows.append(
                f"{name[:24]:<24} {d.precision:6.3f} {d.recall:6.3f} {d.f1:6.3f} "
                f"{r.precision:6.3f} {r.recall:6.3f} {r.f1:6.3f} {t.module_mismatches:5d}"
            )
        return "\n".join(rows) + "\n"


def _overlaps(a: SpanKey, b: SpanKey) -> bool:
    return a[0] == b[0] and a[1] == b[1] and a[2] < b[3] and b[2] < a[3]


def _pair(pred: Sequence[SpanKey], truth: Sequence[SpanKey], overlap: bool) -> dict[SpanKey, SpanKey]:
    """Match predicted spans to truth spans one-to-one; exact equality unless ``overlap``."""
    if not overlap:
        ts = set(truth)
        return {p: p for p in pred if p in ts}
    used: set[SpanKey] = set()
    out = {}
    for p in sorted(pred):
        for t in sorted(truth):
            if t not in used and _overlaps(p, t):
                out[p] = t
                used.add(t)
                break
    return out


def _thread_metrics(
    thread_id: str,
    decisions: Sequence[ResolutionDecision],
    truth: Sequence[GroundTruthRecord],
    overlap: bool,
) -> ThreadMetrics:
    pred = {
        (d.mention.post_id, d.mention.sentence_index, d.mention.start, d.mention.end): d
        for d in decisions
        if d.is_true
    }
    gold = {t.key: t for t in truth if t.api_id is not None}
    matched = _pair(list(pred), list(gold), overlap)
    det = Prf(len(matched), len(pred) - len(matched), len(gold) - len(matched))
    res_tp = 0
    module_mismatches = 0
    for p, g in matched.items():
        if pred[p].api_id == gold[g].api_id:
            res_tp += 1
            if (pred[p].module or None) != (gold[g].module or None):
                module_mismatches += 1
    res = Prf(res_tp, len(pred) - res_tp, len(gold) - res_tp)
    return ThreadMetrics(thread_id, det, res, module_mismatches)


def evaluate(
    decisions: Iterable[ResolutionDecision],
    truth: Iterable[GroundTruthRecord],
    overlap: bool = False,
) -> MetricsReport:
    """Per-thread and micro-averaged detection/resolution scores.

    A decision for a thread absent from the truth set is an input error.
    """
    by_thread_truth: dict[str, list[GroundTruthRecord]] = {}
    for t in truth:
        by_thread_truth.setdefault(t.thread_id, []).append(t)
    by_thread_dec: dict[str, list[ResolutionDecision]] = {}
    for d in decisions:
        if d.mention.thread_id not in by_thread_truth:
            raise InputError(f"decision references thread {d.mention.thread_id!r} missing from the truth set")
        by_thread_dec.setdefault(d.mention.thread_id, []).append(d)
    per = tuple(
        _thread_metrics(tid, by_thread_dec.get(tid, []), by_thread_truth[tid], overlap)
        for tid in sorted(by_thread_truth)
    )
    det, res, mm = Prf(0, 0, 0), Prf(0, 0, 0), 0
    for t in per:
        det, res, mm = det + t.detection, res + t.resolution, mm + t.module_mismatches
    return MetricsReport(per, ThreadMetrics(AGGREGATE, det, res, mm), overlap)


def truth_from_decisions(decisions: Iterable[ResolutionDecision]) -> list[GroundTruthRecord]:
    return [
        GroundTruthRecord(
            d.mention.thread_id, d.mention.post_id, d.mention.sentence_index, d.mention.start, d.mention.end,
            d.api_id, d.module,
        )
        for d in decisions
    ]
