"""Thread preprocessing: markup stripping, snippet extraction, sentences, tokens, POS tags."""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from apimention.errors import ParseError

PACKAGE_PREFIXES = frozenset({"com", "org", "net", "io", "www"})


class Pos(str, Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    OTHER = "OTHER"


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    pos: Pos = Pos.OTHER


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...] = ()
    links: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return " ".join(t.surface for t in self.tokens)


@dataclass(frozen=True)
class Snippet:
    text: str
    position: int  # number of sentences of the post that precede the snippet


@dataclass(frozen=True)
class Post:
    post_id: str
    sentences: tuple[Sentence, ...] = ()
    snippets: tuple[Snippet, ...] = ()


@dataclass(frozen=True)
class ThreadDoc:
    thread_id: str
    title: Sentence
    posts: tuple[Post, ...] = field(default_factory=tuple)

    def post(self, post_id: str) -> Post:
        for p in self.posts:
            if p.post_id == post_id:
                return p
        raise KeyError(post_id)


# --- embedded language data -------------------------------------------------


def _data_text(name: str) -> str:
    return resources.files("apimention").joinpath("data", name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    words: set[str] = set()
    for line in _data_text("stopwords.txt").splitlines():
        if not line.startswith("#"):
            words.update(line.split())
    return frozenset(words)


@lru_cache(maxsize=None)
def lexicon() -> dict[str, Pos]:
    lex: dict[str, Pos] = {}
    tag = None
    for line in _data_text("lexicon.txt").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            tag = Pos(line.strip("[]"))
            continue
        for word in line.split():
            if word in lex:
                raise ValueError(f"lexicon lists {word!r} twice")
            lex[word] = tag
    return lex


IRREGULAR_VERBS = frozenset(
    """was were been am is are got gotten gave given went gone made took taken
    found knew known thought told said wrote written built ran saw seen came sent
    kept brought bought chose chosen did done held meant spent began begun broke
    broken shown threw thrown understood wrote felt led lost paid sold stood
    struck won""".split()
)


# --- name tokenization --------------------------------------------------------

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_NON_ALNUM = re.compile(r"[^A-Za-z0-9]+")


def name_tokens(name: str) -> list[str]:
    """Ordered name tokens: split on non-alphanumerics and camel humps, lowercased,
    stopwords and package prefixes dropped."""
    stop = stopwords()
    out = []
    for chunk in _NON_ALNUM.split(name):
        for piece in _CAMEL.split(chunk):
            tok = piece.lower()
            if tok and tok not in stop and tok not in PACKAGE_PREFIXES:
                out.append(tok)
    return out


def tokenize_name(name: str) -> frozenset[str]:
    return frozenset(name_tokens(name))


# --- POS tagging ------------------------------------------------------------------


def _plural_lemmas(word: str) -> Iterable[str]:
    if word.endswith("ies") and len(word) > 4:
        yield word[:-3] + "y"
    if word.endswith("es") and len(word) > 3:
        yield word[:-2]
    if word.endswith("s") and not word.endswith("ss") and len(word) > 2:
        yield word[:-1]


def _verb_lemmas(word: str) -> Iterable[str]:
    if word.endswith("ied") and len(word) > 4:
        yield word[:-3] + "y"
    for suffix, min_len in (("ed", 4), ("ing", 5)):
        if word.endswith(suffix) and len(word) >= min_len:
            stem = word[: -len(suffix)]
            yield stem
            yield stem + "e"
            if len(stem) > 2 and stem[-1] == stem[-2]:
                yield stem[:-1]


def tag_word(surface: str) -> Pos:
    word = _strip_punct(surface.lower())
    if not word or not any(c.isalpha() for c in word):
        return Pos.OTHER
    if word in IRREGULAR_VERBS:
        return Pos.VERB
    lex = lexicon()
    if word in lex:
        return lex[word]
    for lemma in _plural_lemmas(word):
        if lemma in lex:
            return lex[lemma]
    # "routed", "switching": an inflected known word is used as a verb
    if any(lemma in lex for lemma in _verb_lemmas(word)):
        return Pos.VERB
    if re.search(r"[A-Za-z][.\-][A-Za-z]", word):
        return Pos.NOUN
    base = word[:-1] if word.endswith("s") and not word.endswith("ss") else word
    if word.endswith(("ing", "ize", "izes", "ed")):
        return Pos.VERB
    if base.endswith(("tion", "ment", "er", "or")):
        return Pos.NOUN
    if surface[:1].isupper():
        return Pos.NOUN
    return Pos.OTHER


def pos_tag(sentence: Sentence) -> Sentence:
    """Tag every token; deterministic (lexicon, then suffix rules, then casing)."""
    if not sentence.tokens:
        return sentence
    tokens = tuple(replace(t, pos=tag_word(t.surface)) for t in sentence.tokens)
    return replace(sentence, tokens=tokens)


# --- tokenization and sentence splitting -----------------------------------------

_URL = r"(?:https?://|www\.)[^\s<>\"']+"
_ABBREV = r"(?i:e\.g\.|i\.e\.|etc\.|vs\.|cf\.)"
_WORD = r"[A-Za-z0-9_$#+]+(?:[.\-'][A-Za-z0-9_$#+]+)*"
_TOKEN_RE = re.compile(rf"(?P<url>{_URL})|(?P<abbr>{_ABBREV})|(?P<word>{_WORD})|(?P<para>\n\s*\n)|(?P<punct>[^\s])")
_URL_TRAIL = ".,;:!?)]}'\""
_PUNCT = "\"'`.,;:!?()[]{}<>*_~"


def _strip_punct(s: str) -> str:
    return s.strip(_PUNCT)


def make_token(surface: str) -> Token:
    return Token(surface=surface, normalized=_strip_punct(surface.lower()))


def _raw_tokens(text: str) -> list[tuple[str, str]]:
    """(kind, surface) pairs; kind in {url, abbr, word, para, punct}."""
    out: list[tuple[str, str]] = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        surface = m.group()
        if kind == "url":
            stripped = surface.rstrip(_URL_TRAIL)
            out.append(("url", stripped))
            for ch in surface[len(stripped):]:
                out.append(("punct", ch))
            continue
        out.append((kind, surface))
    return out


def split_sentences(text: str) -> list[Sentence]:
    """Split prose into tagged sentences.

    A sentence ends at ``.``, ``!`` or ``?`` followed by a token that starts with
    an uppercase letter or a digit, or at a paragraph break. URLs and a few
    abbreviations are single tokens and never end a sentence.
    """
    raw = _raw_tokens(text)
    sentences: list[Sentence] = []
    cur: list[Token] = []
    links: list[str] = []

    def flush() -> None:
        if cur:
            sentences.append(pos_tag(Sentence(tuple(cur), tuple(links))))
        cur.clear()
        links.clear()

    for i, (kind, surface) in enumerate(raw):
        if kind == "para":
            flush()
            continue
        cur.append(make_token(surface))
        if kind == "url":
            links.append(surface)
        if kind == "punct" and surface in ".!?":
            nxt = next((s for k, s in raw[i + 1:] if k != "punct" or s not in "\"')"), None)
            if nxt is None or nxt[:1].isupper() or nxt[:1].isdigit():
                flush()
    flush()
    return sentences


# --- markup handling ----------------------------------------------------------------

_PRE_CODE = re.compile(r"<pre[^>]*>\s*<code[^>]*>(.*?)</code>\s*</pre>", re.S | re.I)
_PRE = re.compile(r"<pre[^>]*>(.*?)</pre>", re.S | re.I)
_FENCE = re.compile(r"^[ \t]*```[^\n]*\n(.*?)^[ \t]*```[ \t]*$", re.S | re.M)
_ANCHOR = re.compile(r"<a\s[^>]*href\s*=\s*[\"']([^\"']+)[\"'][^>]*>(.*?)</a>", re.S | re.I)
_BLOCK_BREAK = re.compile(r"</?(?:p|div|li|ul|ol|h[1-6]|blockquote|table|tr)\b[^>]*>|<br\s*/?>", re.I)
_TAG = re.compile(r"<[^>]+>")
_MARK = "\x00{}\x00"
_MARK_RE = re.compile(r"\x00(\d+)\x00")


def _extract_snippets(body: str) -> tuple[str, list[str]]:
    snippets: list[str] = []

    def grab(m: re.Match) -> str:
        snippets.append(m.group(1))
        return "\n\n" + _MARK.format(len(snippets) - 1) + "\n\n"

    for pattern in (_PRE_CODE, _PRE, _FENCE):
        body = pattern.sub(grab, body)
    return body, snippets


def _anchor_text(m: re.Match) -> str:
    href, text = m.group(1), _TAG.sub("", m.group(2))
    if href.strip() == text.strip():
        return text
    return f"{text} {href}"


def strip_markup(text: str) -> str:
    text = _ANCHOR.sub(_anchor_text, text)
    text = _BLOCK_BREAK.sub("\n\n", text)
    text = _TAG.sub("", text)
    return html.unescape(text)


def preprocess_post(post_id: str, body: str) -> Post:
    body, snippet_texts = _extract_snippets(body)
    sentences: list[Sentence] = []
    snippets: list[Snippet] = []
    pos = 0
    for m in _MARK_RE.finditer(body):
        sentences.extend(split_sentences(strip_markup(body[pos:m.start()])))
        snippets.append(Snippet(snippet_texts[int(m.group(1))], len(sentences)))
        pos = m.end()
    sentences.extend(split_sentences(strip_markup(body[pos:])))
    return Post(post_id=post_id, sentences=tuple(sentences), snippets=tuple(snippets))


def _title_sentence(title: str) -> Sentence:
    tokens: list[Token] = []
    links: list[str] = []
    for s in split_sentences(strip_markup(title)):
        tokens.extend(s.tokens)
        links.extend(s.links)
    return Sentence(tuple(tokens), tuple(links))


def preprocess_thread(raw: dict[str, Any] | str, source: str | None = None) -> ThreadDoc:
    """Build a :class:`ThreadDoc` from a thread record (dict or JSON text).

    Expected shape: ``{"thread_id": str, "title": str, "posts": [{"id": str,
    "body": str}, ...]}``. Code blocks are ``<pre><code>`` elements or fenced
    with triple backticks.
    """
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed thread document: {exc.msg}", exc.lineno, source) from None
    if not isinstance(raw, dict):
        raise ParseError("thread document must be a JSON object", source=source)
    thread_id = raw.get("thread_id")
    posts = raw.get("posts")
    title = raw.get("title", "")
    if not isinstance(thread_id, str) or not thread_id:
        raise ParseError("thread_id must be a non-empty string", source=source)
    if not isinstance(title, str):
        raise ParseError("title must be a string", source=source)
    if not isinstance(posts, list) or not posts:
        raise ParseError("posts must be a non-empty list", source=source)
    built = []
    seen = set()
    for i, p in enumerate(posts):
        if not isinstance(p, dict) or not isinstance(p.get("body"), str):
            raise ParseError(f"post {i} must be an object with a string body", source=source)
        post_id = str(p.get("id", f"p{i + 1}"))
        if post_id in seen:
            raise ParseError(f"duplicate post id {post_id!r}", source=source)
        seen.add(post_id)
        built.append(preprocess_post(post_id, p["body"]))
    return ThreadDoc(thread_id=thread_id, title=_title_sentence(title), posts=tuple(built))


def load_thread(path: str | Path) -> ThreadDoc:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read thread: {exc.strerror}", source=str(path)) from None
    return preprocess_thread(text, source=str(path))


def load_threads(path: str | Path) -> list[ThreadDoc]:
    """Load one thread file, or every ``*.json`` file of a directory (sorted by name)."""
    path = Path(path)
    if path.is_dir():
        return [load_thread(p) for p in sorted(path.glob("*.json"))]
    return [load_thread(path)]
