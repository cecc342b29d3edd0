"""Mention detection: name similarity and Mention Candidate List construction."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import AbstractSet

from apimention.db import ApiDatabase
from apimention.text import Sentence, ThreadDoc, name_tokens

TITLE_POST_ID = "#title"
DEFAULT_MIN_TOKEN_SORT = 0.2
DEFAULT_MAX_SPAN = 4
MIN_PREFIX_CHARS = 4


class MatchKind(str, Enum):
    EXACT = "EXACT"
    PREFIX = "PREFIX"
    TOKEN_SORT = "TOKEN_SORT"
    NONE = "NONE"


_KIND_RANK = {MatchKind.EXACT: 3, MatchKind.PREFIX: 2, MatchKind.TOKEN_SORT: 1, MatchKind.NONE: 0}


@dataclass(frozen=True, order=True)
class Mention:
    thread_id: str
    post_id: str
    sentence_index: int
    start: int
    end: int
    surface: str

    @property
    def in_title(self) -> bool:
        return self.post_id == TITLE_POST_ID

    @property
    def span(self) -> tuple[str, str, int, int, int]:
        return (self.thread_id, self.post_id, self.sentence_index, self.start, self.end)


@dataclass(frozen=True)
class Candidate:
    api_id: str
    matched_module: str | None
    match_kind: MatchKind
    name_sim: float


@dataclass(frozen=True)
class MentionCandidateList:
    mention: Mention
    candidates: tuple[Candidate, ...]

    def candidate(self, api_id: str) -> Candidate:
        for c in self.candidates:
            if c.api_id == api_id:
                return c
        raise KeyError(api_id)

    @property
    def api_ids(self) -> tuple[str, ...]:
        return tuple(c.api_id for c in self.candidates)


def jaccard(a: AbstractSet, b: AbstractSet) -> float:
    """|a & b| / |a | b|; two empty sets score 0."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def _similarity_tokens(m: list[str], n: list[str]) -> tuple[MatchKind, float]:
    if not m or not n:
        return MatchKind.NONE, 0.0
    if m == n:
        return MatchKind.EXACT, 1.0
    short, long_ = (m, n) if len(m) < len(n) else (n, m)
    if len(short) < len(long_) and long_[: len(short)] == short and len("".join(short)) >= MIN_PREFIX_CHARS:
        return MatchKind.PREFIX, 1.0
    w = jaccard(set(m), set(n))
    if w == 0:
        return MatchKind.NONE, 0.0
    return MatchKind.TOKEN_SORT, w


def name_similarity(mention_text: str, name: str) -> tuple[MatchKind, float]:
    """Classify how a mention matches an API/module name and weight the match.

    EXACT and PREFIX (token-level, shorter side at least 4 characters) weigh 1;
    otherwise the Jaccard index of the two name-token sets.
    """
    return _similarity_tokens(name_tokens(mention_text), name_tokens(name))


# --- candidate lookup ----------------------------------------------------------


@dataclass(frozen=True)
class _IndexedName:
    api_id: str
    module: str | None
    tokens: tuple[str, ...]
    order: int  # 0 for the API name, i + 1 for the i-th module


def _name_index(db: ApiDatabase) -> dict[str, list[_IndexedName]]:
    key = "name_index"
    if key not in db.cache:
        index: dict[str, list[_IndexedName]] = defaultdict(list)
        for api_id in sorted(db):
            entry = db[api_id]
            names = [(None, entry.name)] + [(m.name, m.name) for m in entry.modules]
            for order, (module, name) in enumerate(names):
                toks = tuple(name_tokens(name))
                item = _IndexedName(api_id, module, toks, order)
                for t in set(toks):
                    index[t].append(item)
        db.cache[key] = dict(index)
    return db.cache[key]


def match_candidates(
    span_tokens: list[list[str]],
    db: ApiDatabase,
    min_token_sort: float = DEFAULT_MIN_TOKEN_SORT,
) -> tuple[Candidate, ...]:
    """Candidates for a span given the name tokens of each span word.

    In a multi-word span every word must share a token with the matched name,
    so a match cannot be padded with unrelated words.
    """
    flat = [t for word in span_tokens for t in word]
    if not flat:
        return ()
    index = _name_index(db)
    seen: dict[int, _IndexedName] = {}
    for t in set(flat):
        for item in index.get(t, ()):
            seen[id(item)] = item
    best: dict[str, tuple[tuple, Candidate]] = {}
    for item in seen.values():
        kind, w = _similarity_tokens(flat, list(item.tokens))
        if kind is MatchKind.NONE:
            continue
        if kind is MatchKind.TOKEN_SORT and w < min_token_sort:
            continue
        if len(span_tokens) > 1:
            name_set = set(item.tokens)
            if not all(set(word) & name_set for word in span_tokens):
                continue
        # prefer higher weight, stronger kind, then the API name over module names
        rank = (w, _KIND_RANK[kind], -item.order)
        cand = Candidate(item.api_id, item.module, kind, w)
        if item.api_id not in best or rank > best[item.api_id][0]:
            best[item.api_id] = (rank, cand)
    return tuple(best[k][1] for k in sorted(best))


def _word_tokens(sentence: Sentence) -> list[list[str] | None]:
    """Name tokens per sentence token; None for tokens that can never be in a mention."""
    out: list[list[str] | None] = []
    for tok in sentence.tokens:
        if not tok.normalized or tok.surface in sentence.links or "://" in tok.surface:
            out.append(None)
            continue
        toks = name_tokens(tok.surface)
        out.append(toks or None)
    return out


def detect_in_sentence(
    sentence: Sentence,
    db: ApiDatabase,
    thread_id: str,
    post_id: str,
    sentence_index: int,
    min_token_sort: float = DEFAULT_MIN_TOKEN_SORT,
    max_span: int = DEFAULT_MAX_SPAN,
) -> list[MentionCandidateList]:
    words = _word_tokens(sentence)
    out: list[MentionCandidateList] = []
    i = 0
    n = len(words)
    while i < n:
        found = None
        if words[i] is not None:
            for length in range(min(max_span, n - i), 0, -1):
                span = words[i : i + length]
                if any(w is None for w in span):
                    continue
                cands = match_candidates(span, db, min_token_sort)  # type: ignore[arg-type]
                if cands:
                    found = (length, cands)
                    break
        if found is None:
            i += 1
            continue
        length, cands = found
        surface = " ".join(t.surface for t in sentence.tokens[i : i + length])
        mention = Mention(thread_id, post_id, sentence_index, i, i + length, surface)
        out.append(MentionCandidateList(mention, cands))
        i += length
    return out


def detect_mentions(
    doc: ThreadDoc,
    db: ApiDatabase,
    min_token_sort: float = DEFAULT_MIN_TOKEN_SORT,
    max_span: int = DEFAULT_MAX_SPAN,
) -> list[MentionCandidateList]:
    """All MCLs of a thread in document order (title first, then posts)."""
    mcls = detect_in_sentence(doc.title, db, doc.thread_id, TITLE_POST_ID, 0, min_token_sort, max_span)
    for post in doc.posts:
        for si, sentence in enumerate(post.sentences):
            mcls.extend(
                detect_in_sentence(sentence, db, doc.thread_id, post.post_id, si, min_token_sort, max_span)
            )
    return mcls
