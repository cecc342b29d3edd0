"""Choosing among several classifier hits for one mention.

Intrinsic filters look at dependency relations inside the mention's candidate
list (betweenness, centrality, closeness). Extrinsic filters look at the
resolved mentions around it in the same post (composition, aggregation,
projection).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from apimention.context import FeatureContext
from apimention.db import ApiDatabase, DependencyGraph
from apimention.detect import Candidate, Mention, MentionCandidateList
from apimention.text import name_tokens

BETWEENNESS_KEYWORDS = frozenset(
    {
        "extension",
        "extensions",
        "extended",
        "wrapper",
        "wrappers",
        "wrapping",
        "plugin",
        "plugins",
        "plug-in",
        "plug-ins",
    }
)


@dataclass(frozen=True)
class Hit:
    candidate: Candidate
    confidence: float

    @property
    def api_id(self) -> str:
        return self.candidate.api_id


@dataclass(frozen=True)
class HitList:
    mention: Mention
    hits: tuple[Hit, ...]

    def ids(self) -> list[str]:
        return [h.api_id for h in self.hits]

    def get(self, api_id: str) -> Hit | None:
        for h in self.hits:
            if h.api_id == api_id:
                return h
        return None


@dataclass(frozen=True)
class FilterDecision:
    chosen: Candidate | None
    filter_name: str
    overwrote_intrinsic: bool = False
    module: str | None = None

    @property
    def decided(self) -> bool:
        return self.chosen is not None


def _unique_max(hits: Iterable[Hit], key) -> Hit | None:
    hits = list(hits)
    if not hits:
        return None
    scores = [key(h) for h in hits]
    top = max(scores)
    winners = [h for h, s in zip(hits, scores) if s == top]
    return winners[0] if len(winners) == 1 else None


# --- intrinsic ------------------------------------------------------------------------


def has_betweenness_keyword(ctx: FeatureContext) -> bool:
    return bool(ctx.words() & BETWEENNESS_KEYWORDS)


def betweenness_filter(hits: HitList, ctx: FeatureContext, graph: DependencyGraph) -> Candidate | None:
    """Prefer a hit that directly extends another hit when the context talks about extensions."""
    if not has_betweenness_keyword(ctx):
        return None
    ids = hits.ids()
    bucket = [h for h in hits.hits if any(graph.depends_on(h.api_id, o) for o in ids if o != h.api_id)]
    if len(bucket) == 1:
        return bucket[0].candidate
    best = _unique_max(bucket, key=lambda h: h.candidate.name_sim)
    return best.candidate if best else None


def _mcl_others(api_id: str, mcl: MentionCandidateList) -> set[str]:
    return {c for c in mcl.api_ids if c != api_id}


def mcl_dependents(api_id: str, mcl: MentionCandidateList, graph: DependencyGraph) -> int:
    return len(graph.dependents_of(api_id) & _mcl_others(api_id, mcl))


def mcl_dependees(api_id: str, mcl: MentionCandidateList, graph: DependencyGraph) -> int:
    return len(graph.dependees_of(api_id) & _mcl_others(api_id, mcl))


def influence_score(api_id: str, mcl: MentionCandidateList, graph: DependencyGraph) -> float:
    """Other candidates depending on the hit, per other candidate it depends on (+1 smoothing)."""
    return mcl_dependents(api_id, mcl, graph) / (mcl_dependees(api_id, mcl, graph) + 1)


def closeness_score(api_id: str, mcl: MentionCandidateList, graph: DependencyGraph) -> float:
    return 1.0 / (mcl_dependents(api_id, mcl, graph) + 1)


def centrality_filter(hits: HitList, mcl: MentionCandidateList, graph: DependencyGraph) -> Candidate | None:
    scores = {h.api_id: influence_score(h.api_id, mcl, graph) for h in hits.hits}
    top = max(scores.values())
    leaders = [h for h in hits.hits if scores[h.api_id] == top]
    if len(leaders) == 1:
        return leaders[0].candidate
    best = _unique_max(leaders, key=lambda h: mcl_dependents(h.api_id, mcl, graph))
    return best.candidate if best else None


def closeness_filter(hits: HitList, mcl: MentionCandidateList, graph: DependencyGraph) -> Candidate | None:
    """Lowest closeness among hits that other candidates depend on ("core" hits)."""
    core = [h for h in hits.hits if mcl_dependents(h.api_id, mcl, graph) > 0]
    best = _unique_max(core, key=lambda h: -closeness_score(h.api_id, mcl, graph))
    return best.candidate if best else None


def intrinsic_filter(
    hits: HitList, mcl: MentionCandidateList, ctx: FeatureContext, graph: DependencyGraph
) -> FilterDecision:
    """Betweenness, centrality and closeness in turn; the first decision stands.

    When all three abstain the most confident hit is taken.
    """
    if len(hits.hits) < 2:
        raise ValueError("intrinsic filtering needs at least two hits")
    chosen = betweenness_filter(hits, ctx, graph)
    if chosen:
        return FilterDecision(chosen, "betweenness")
    chosen = centrality_filter(hits, mcl, graph)
    if chosen:
        return FilterDecision(chosen, "centrality")
    chosen = closeness_filter(hits, mcl, graph)
    if chosen:
        return FilterDecision(chosen, "closeness")
    # max() keeps the first of equal keys, so full ties go to the smallest id
    ordered = sorted(hits.hits, key=lambda h: h.api_id)
    top = max(ordered, key=lambda h: (h.confidence, h.candidate.name_sim))
    return FilterDecision(top.candidate, "fallback")


# --- extrinsic ------------------------------------------------------------------------------


@dataclass(frozen=True)
class MentionState:
    """One mention of a post as seen by the extrinsic filters."""

    mention: Mention
    hits: HitList
    resolved_api: str | None  # first-pass resolution; None for false mentions
    position: int  # token offset of the mention start within its post


def _neighbors(states: Sequence[MentionState], i: int) -> tuple[MentionState | None, MentionState | None]:
    prev = next((s for s in reversed(states[:i]) if s.resolved_api), None)
    nxt = next((s for s in states[i + 1:] if s.resolved_api), None)
    return prev, nxt


def extrinsic_applicable(states: Sequence[MentionState], i: int, relax_gate: bool = False) -> bool:
    prev, nxt = _neighbors(states, i)
    if relax_gate:
        return prev is not None or nxt is not None
    return prev is not None and nxt is not None


def composition_filter(state: MentionState, prev: MentionState | None, db: ApiDatabase) -> tuple[Candidate, str] | None:
    """The preceding resolved API owns a module named like this mention."""
    if prev is None:
        return None
    hit = state.hits.get(prev.resolved_api)
    if hit is None:
        return None
    mention_tokens = set(name_tokens(state.mention.surface))
    for module in db[prev.resolved_api].modules:
        if mention_tokens & set(name_tokens(module.name)):
            return hit.candidate, module.name
    return None


def aggregation_filter(
    state: MentionState, prev: MentionState | None, nxt: MentionState | None, graph: DependencyGraph
) -> Candidate | None:
    """The nearest resolved neighbor depends on exactly one of the hits."""
    neighbors = [n for n in (prev, nxt) if n is not None]
    if not neighbors:
        return None
    nearest = min(neighbors, key=lambda n: (abs(n.position - state.position), n is nxt))
    deps = [h for h in state.hits.hits if h.api_id != nearest.resolved_api
            and graph.depends_on(nearest.resolved_api, h.api_id)]
    return deps[0].candidate if len(deps) == 1 else None


def projection_filter(
    state: MentionState, prev: MentionState | None, nxt: MentionState | None, graph: DependencyGraph
) -> Candidate | None:
    """Exactly one hit depends on a surrounding resolved mention."""
    around = {n.resolved_api for n in (prev, nxt) if n is not None}
    deps = [h for h in state.hits.hits if any(a != h.api_id and graph.depends_on(h.api_id, a) for a in around)]
    return deps[0].candidate if len(deps) == 1 else None


def extrinsic_filter(
    states: Sequence[MentionState],
    i: int,
    db: ApiDatabase,
    relax_gate: bool = False,
) -> FilterDecision | None:
    """Composition, aggregation, projection for mention ``i`` of a post.

    Returns None when the gate does not hold or no filter decides.
    """
    state = states[i]
    if len(state.hits.hits) < 2 or not extrinsic_applicable(states, i, relax_gate):
        return None
    prev, nxt = _neighbors(states, i)
    overwrote = state.resolved_api is not None
    comp = composition_filter(state, prev, db)
    if comp:
        return FilterDecision(comp[0], "composition", overwrote, module=comp[1])
    chosen = aggregation_filter(state, prev, nxt, db.graph)
    if chosen:
        return FilterDecision(chosen, "aggregation", overwrote)
    chosen = projection_filter(state, prev, nxt, db.graph)
    if chosen:
        return FilterDecision(chosen, "projection", overwrote)
    return None
