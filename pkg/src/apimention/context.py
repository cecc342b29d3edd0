"""Feature contexts around mentions and selected candidate descriptions."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from apimention.db import ApiDatabase, ApiEntry, normalize_url
from apimention.detect import MatchKind, Mention, jaccard, _similarity_tokens
from apimention.text import Pos, Sentence, ThreadDoc, Token, name_tokens, split_sentences, stopwords

DEFAULT_WINDOW = 3
# Rule-2 pronouns; "this"/"these" are left out on purpose (see README).
SUBJECT_PRONOUNS = frozenset({"it", "they"})


class Source(str, Enum):
    SAME_POST = "SAME_POST"
    OTHER_POST = "OTHER_POST"
    TITLE = "TITLE"


@dataclass(frozen=True)
class ContextToken:
    token: str
    pos: Pos
    source: Source


@dataclass(frozen=True)
class FeatureContext:
    tokens: tuple[ContextToken, ...] = ()

    def nouns(self) -> frozenset[str]:
        return frozenset(t.token for t in self.tokens if t.pos is Pos.NOUN)

    def verbs(self) -> frozenset[str]:
        return frozenset(t.token for t in self.tokens if t.pos is Pos.VERB)

    def words(self) -> frozenset[str]:
        return frozenset(t.token for t in self.tokens)


@dataclass(frozen=True)
class CandidateDescription:
    api_id: str
    selected_sentences: tuple[Sentence, ...]
    noun_set: frozenset[str]
    verb_set: frozenset[str]


def _is_link(tok: Token) -> bool:
    return "://" in tok.surface or tok.surface.lower().startswith("www.")


def _keep(tok: Token, excluded: frozenset[str] = frozenset()) -> bool:
    """Words only: no stopwords, punctuation, links or excluded tokens."""
    norm = tok.normalized
    return (
        bool(norm)
        and norm not in stopwords()
        and norm not in excluded
        and any(c.isalnum() for c in norm)
        and not _is_link(tok)
    )


def _collect(sentences, source: Source, excluded: frozenset[str]) -> list[ContextToken]:
    return [
        ContextToken(tok.normalized, tok.pos, source)
        for _, sentence in sentences
        for tok in sentence.tokens
        if _keep(tok, excluded)
    ]


def _window(n: int, center: int, window: int) -> range:
    return range(max(0, center - window), min(n, center + window + 1))


def _occurrences(sentence: Sentence, needle: tuple[str, ...]) -> list[int]:
    toks = [t.normalized for t in sentence.tokens]
    k = len(needle)
    return [i for i in range(len(toks) - k + 1) if tuple(toks[i : i + k]) == needle]


def build_feature_context(mention: Mention, doc: ThreadDoc, window: int = DEFAULT_WINDOW) -> FeatureContext:
    """Bag of tagged tokens around ``mention``.

    Collects the sentences within ``window`` of the mention in its own post,
    the windows around every occurrence of the same surface text in other
    posts, and the title. Stopwords and the mention's own words are dropped.
    """
    if window < 0:
        raise ValueError("window must be non-negative")
    needle_sentence = None
    if mention.in_title:
        needle_sentence = doc.title
    else:
        needle_sentence = doc.post(mention.post_id).sentences[mention.sentence_index]
    needle = tuple(t.normalized for t in needle_sentence.tokens[mention.start : mention.end])
    excluded = frozenset(needle)

    tokens: list[ContextToken] = []
    if not mention.in_title:
        post = doc.post(mention.post_id)
        idx = _window(len(post.sentences), mention.sentence_index, window)
        tokens += _collect(((i, post.sentences[i]) for i in idx), Source.SAME_POST, excluded)
    for post in doc.posts:
        if post.post_id == mention.post_id:
            continue
        hits = [si for si, s in enumerate(post.sentences) if _occurrences(s, needle)]
        picked: set[int] = set()
        for si in hits:
            picked.update(_window(len(post.sentences), si, window))
        tokens += _collect(((i, post.sentences[i]) for i in sorted(picked)), Source.OTHER_POST, excluded)
    tokens += _collect([(0, doc.title)], Source.TITLE, excluded)
    return FeatureContext(tuple(tokens))


# --- candidate descriptions ---------------------------------------------------------


def _leading_words(sentence: Sentence) -> list[str]:
    """Non-stopword words of the sentence, in order."""
    stop = stopwords()
    return [t.surface for t in sentence.tokens if t.normalized and t.normalized not in stop]


def starts_with_name(sentence: Sentence, entry: ApiEntry) -> bool:
    words = _leading_words(sentence)
    if not words:
        return False
    first = set(name_tokens(words[0]))
    if not first:
        return False
    names = [entry.name] + [m.name for m in entry.modules]
    return any(first & set(name_tokens(n)) for n in names)


def _first_word(sentence: Sentence) -> str:
    for t in sentence.tokens:
        if t.normalized:
            return t.normalized
    return ""


def refers_to_other_api(sentence: Sentence, entry: ApiEntry, db: ApiDatabase) -> bool:
    owners = db.link_owners()
    for link in sentence.links:
        norm = normalize_url(link)
        for known, owner in owners.items():
            if owner != entry.id and (norm == known or norm.startswith(known + "/")):
                return True
    words = [name_tokens(t.surface) for t in sentence.tokens if t.normalized]
    for dep_id in entry.dependencies:
        dep = db[dep_id]
        for name in {dep.name, dep.id}:
            target = name_tokens(name)
            for i in range(len(words)):
                for j in range(i + 1, min(len(words), i + len(target)) + 1):
                    span = [t for w in words[i:j] for t in w]
                    kind, _ = _similarity_tokens(span, target)
                    if kind in (MatchKind.EXACT, MatchKind.PREFIX):
                        return True
    return False


def _select(sentences: list[Sentence], entry: ApiEntry, db: ApiDatabase) -> list[Sentence]:
    kept = []
    prev_rule1 = False
    for s in sentences:
        rule1 = starts_with_name(s, entry)
        rule2 = prev_rule1 and _first_word(s) in SUBJECT_PRONOUNS
        if rule1 or rule2 or refers_to_other_api(s, entry, db):
            kept.append(s)
        prev_rule1 = rule1
    return kept


def select_description_sentences(entry: ApiEntry | str, db: ApiDatabase) -> CandidateDescription:
    """Keep the description sentences that say something about the API's features.

    Results are cached on the database, which is immutable after load.
    """
    if isinstance(entry, str):
        entry = db[entry]
    cache = db.cache.setdefault("descriptions", {})
    if entry.id in cache:
        return cache[entry.id]
    kept: list[Sentence] = []
    for text in (entry.portal_description, entry.homepage_description):
        if text:
            kept += _select(split_sentences(text), entry, db)
    nouns, verbs = set(), set()
    for s in kept:
        for t in s.tokens:
            if not _keep(t):
                continue
            if t.pos is Pos.NOUN:
                nouns.add(t.normalized)
            elif t.pos is Pos.VERB:
                verbs.add(t.normalized)
    desc = CandidateDescription(entry.id, tuple(kept), frozenset(nouns), frozenset(verbs))
    cache[entry.id] = desc
    return desc


def context_similarity(ctx: FeatureContext, desc: CandidateDescription) -> tuple[float, float]:
    """(noun similarity, verb similarity) as Jaccard indices."""
    return jaccard(ctx.nouns(), desc.noun_set), jaccard(ctx.verbs(), desc.verb_set)
