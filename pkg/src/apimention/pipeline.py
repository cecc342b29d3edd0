"""End-to-end resolution of the mentions of a thread."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Mapping, Sequence

from apimention.classifier import FeatureVector, NBModel, classify_confidence, featurize
from apimention.codelink import CodeContext, extract_code_context, link_type, post_snippets
from apimention.context import DEFAULT_WINDOW, FeatureContext, build_feature_context, select_description_sentences
from apimention.db import ApiDatabase, get_homepage
from apimention.detect import (
    DEFAULT_MAX_SPAN,
    DEFAULT_MIN_TOKEN_SORT,
    Candidate,
    Mention,
    MentionCandidateList,
    detect_mentions,
)
from apimention.errors import InputError, InvariantError, ParseError, UnreachableResourceError
from apimention.filters import Hit, HitList, MentionState, extrinsic_filter, intrinsic_filter
from apimention.text import ThreadDoc, name_tokens

DEFAULT_TAU = 0.5

SINGLE_HIT = "CLASSIFIER_SINGLE_HIT"
NO_HIT = "CLASSIFIER_NO_HIT"
FALLBACK = "FALLBACK"


@dataclass(frozen=True)
class PipelineConfig:
    window: int = DEFAULT_WINDOW
    tau: float = DEFAULT_TAU
    min_token_sort: float = DEFAULT_MIN_TOKEN_SORT
    max_span: int = DEFAULT_MAX_SPAN
    relax_extrinsic_gate: bool = False
    keep_default_types: bool = False

    def __post_init__(self):
        if self.window < 0:
            raise InputError("window must be >= 0")
        if not 0.0 <= self.tau < 1.0:
            raise InputError("tau must be in [0, 1)")
        if not 0.0 < self.min_token_sort <= 1.0:
            raise InputError("min_token_sort must be in (0, 1]")
        if self.max_span < 1:
            raise InputError("max_span must be >= 1")

    def updated(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed config: {exc.msg}", exc.lineno, str(path)) from None
    known = {f.name for f in fields(PipelineConfig)}
    if not isinstance(data, dict) or set(data) - known:
        raise ParseError(f"config keys must be a subset of {sorted(known)}", source=str(path))
    return PipelineConfig(**data)


@dataclass(frozen=True)
class MentionAnalysis:
    mcl: MentionCandidateList
    context: FeatureContext
    code: CodeContext | None
    type_links: Mapping[str, frozenset[str]]
    features: Mapping[str, FeatureVector]

    @property
    def mention(self) -> Mention:
        return self.mcl.mention


@dataclass(frozen=True)
class ResolutionDecision:
    mention: Mention
    api_id: str | None = None
    module: str | None = None
    url: str | None = None
    provenance: str = NO_HIT
    confidence: float = 0.0
    candidates: tuple[tuple[str, float], ...] = ()

    @property
    def is_true(self) -> bool:
        return self.api_id is not None


def analyze_thread(doc: ThreadDoc, db: ApiDatabase, config: PipelineConfig = PipelineConfig()) -> list[MentionAnalysis]:
    """Detection plus every similarity feature for every (mention, candidate) pair."""
    mcls = detect_mentions(doc, db, config.min_token_sort, config.max_span)
    parsed = {post.post_id: post_snippets(post) for post in doc.posts}
    code_ctx = extract_code_context(doc, [m.mention for m in mcls], config.keep_default_types, parsed)
    out = []
    for mcl in mcls:
        mention = mcl.mention
        ctx = build_feature_context(mention, doc, config.window)
        code = code_ctx.get(mention)
        snippets = parsed.get(mention.post_id, [])
        links = {t: link_type(mcl.api_ids, t, snippets, db) for t in sorted(code.types)} if code else {}
        feats = {
            c.api_id: featurize(c, ctx, select_description_sentences(c.api_id, db), code, links, db)
            for c in mcl.candidates
        }
        out.append(MentionAnalysis(mcl, ctx, code, links, feats))
    return out


def _module_for(mention: Mention, api_id: str, db: ApiDatabase) -> str | None:
    wanted = name_tokens(mention.surface)
    for m in db[api_id].modules:
        if name_tokens(m.name) == wanted:
            return m.name
    return None


def _url_for(api_id: str, module: str | None, db: ApiDatabase) -> str | None:
    entry = db[api_id]
    try:
        if module is not None:
            return get_homepage(entry.module(module), owner=entry)  # type: ignore[arg-type]
        return get_homepage(entry)
    except UnreachableResourceError:
        # resolution still stands; renderers show it without a link
        return None


def _decision(
    mention: Mention,
    chosen: Candidate,
    provenance: str,
    confidences: Mapping[str, float],
    db: ApiDatabase,
    module: str | None = None,
) -> ResolutionDecision:
    if module is None:
        module = _module_for(mention, chosen.api_id, db)
    return ResolutionDecision(
        mention=mention,
        api_id=chosen.api_id,
        module=module,
        url=_url_for(chosen.api_id, module, db),
        provenance=provenance,
        confidence=confidences[chosen.api_id],
        candidates=tuple(sorted(confidences.items())),
    )


def hits_for(analysis: MentionAnalysis, model: NBModel, tau: float = DEFAULT_TAU) -> tuple[HitList, dict[str, float]]:
    conf = {c.api_id: classify_confidence(model, analysis.features[c.api_id]) for c in analysis.mcl.candidates}
    hits = tuple(Hit(c, conf[c.api_id]) for c in analysis.mcl.candidates if conf[c.api_id] > tau)
    return HitList(analysis.mention, hits), conf


def resolve_mention(
    analysis: MentionAnalysis,
    model: NBModel,
    db: ApiDatabase,
    config: PipelineConfig = PipelineConfig(),
) -> tuple[ResolutionDecision, HitList]:
    """Classifier, then intrinsic filters when several candidates are hits."""
    hits, conf = hits_for(analysis, model, config.tau)
    mention = analysis.mention
    if not hits.hits:
        return (
            ResolutionDecision(
                mention,
                provenance=NO_HIT,
                confidence=max(conf.values()),
                candidates=tuple(sorted(conf.items())),
            ),
            hits,
        )
    if len(hits.hits) == 1:
        return _decision(mention, hits.hits[0].candidate, SINGLE_HIT, conf, db), hits
    fd = intrinsic_filter(hits, analysis.mcl, analysis.context, db.graph)
    provenance = FALLBACK if fd.filter_name == "fallback" else f"INTRINSIC:{fd.filter_name}"
    return _decision(mention, fd.chosen, provenance, conf, db), hits  # type: ignore[arg-type]


def _post_offsets(doc: ThreadDoc) -> dict[tuple[str, int], int]:
    offsets = {}
    for post in doc.posts:
        total = 0
        for si, s in enumerate(post.sentences):
            offsets[(post.post_id, si)] = total
            total += len(s.tokens)
    return offsets


def resolve_thread(
    doc: ThreadDoc,
    db: ApiDatabase,
    model: NBModel,
    config: PipelineConfig = PipelineConfig(),
    analyses: Sequence[MentionAnalysis] | None = None,
) -> list[ResolutionDecision]:
    """Resolve every mention of ``doc`` in document order.

    Pass one runs the classifier and intrinsic filters per mention. Pass two
    revisits each post with the pass-one resolutions as neighbors and lets the
    extrinsic filters overwrite decisions.
    """
    if analyses is None:
        analyses = analyze_thread(doc, db, config)
    first: list[tuple[ResolutionDecision, HitList, dict[str, float]]] = []
    for a in analyses:
        decision, hits = resolve_mention(a, model, db, config)
        first.append((decision, hits, dict(decision.candidates)))

    final = [d for d, _, _ in first]
    offsets = _post_offsets(doc)
    by_post: dict[str, list[int]] = {}
    for idx, (d, _, _) in enumerate(first):
        if not d.mention.in_title:
            by_post.setdefault(d.mention.post_id, []).append(idx)
    for post_id, idxs in by_post.items():
        states = [
            MentionState(
                first[i][0].mention,
                first[i][1],
                first[i][0].api_id,
                offsets[(post_id, first[i][0].mention.sentence_index)] + first[i][0].mention.start,
            )
            for i in idxs
        ]
        for k, i in enumerate(idxs):
            fd = extrinsic_filter(states, k, db, config.relax_extrinsic_gate)
            if fd is None:
                continue
            if fd.chosen.api_id not in first[i][1].ids():  # type: ignore[union-attr]
                raise InvariantError("extrinsic filter chose a candidate outside the hit list")
            final[i] = _decision(
                first[i][0].mention, fd.chosen, f"EXTRINSIC:{fd.filter_name}", first[i][2], db, fd.module  # type: ignore[arg-type]
            )
    for d in final:
        if d.api_id is not None and d.api_id not in dict(d.candidates):
            raise InvariantError(f"decision for {d.mention.surface!r} is outside its candidate list")
    return final


def config_dict(config: PipelineConfig) -> dict:
    return asdict(config)
