"""Code contexts for mentions: island parsing of snippets and type-to-API linking."""

from __future__ import annotations

import html
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from apimention.db import ApiDatabase
from apimention.detect import Mention
from apimention.text import Post, ThreadDoc


class SnippetStatus(str, Enum):
    VALID_JAVA_LIKE = "VALID_JAVA_LIKE"
    DISCARDED_NON_JAVA = "DISCARDED_NON_JAVA"
    DISCARDED_MALFORMED = "DISCARDED_MALFORMED"


@dataclass(frozen=True)
class CodeSnippet:
    raw: str
    status: SnippetStatus
    imports: tuple[str, ...] = ()
    declared_types: frozenset[str] = frozenset()
    used_types: frozenset[str] = frozenset()


@dataclass(frozen=True)
class CodeContext:
    mention: Mention
    types: frozenset[str] = frozenset()


JAVA_LANG_TYPES = frozenset(
    """Object String StringBuilder StringBuffer Integer Long Short Byte Double Float
    Boolean Character Number Math System Thread Runnable Exception RuntimeException
    Error Throwable Class ClassLoader Enum Iterable Comparable CharSequence Void
    Override Deprecated SuppressWarnings FunctionalInterface SafeVarargs
    IllegalArgumentException IllegalStateException NullPointerException
    IndexOutOfBoundsException ArrayIndexOutOfBoundsException ClassCastException
    UnsupportedOperationException InterruptedException CloneNotSupportedException
    ArithmeticException NumberFormatException StackOverflowError OutOfMemoryError
    AutoCloseable Cloneable Process ProcessBuilder Runtime StrictMath""".split()
)

JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default
    do double else enum extends final finally float for goto if implements import
    instanceof int interface long native new package private protected public return
    short static strictfp super switch synchronized this throw throws transient try
    void volatile while var null true false""".split()
)

# Signals of other ecosystems; any hit discards the snippet unless it also has
# unmistakable Java structure.
_NON_JAVA = [
    re.compile(p, re.M)
    for p in (
        r"^\s*using\s+[A-Z][\w.]*\s*;",  # C#
        r"^\s*namespace\s+[\w.]+",
        r"\bConsole\.Write(?:Line)?\s*\(",
        r"^\s*#include\s*[<\"]",  # C/C++
        r"\bstd::",
        r"<\?php",
        r"^\s*def\s+\w+\s*\(.*\)\s*:\s*$",  # Python
        r"^\s*(?:elif|except)\b.*:\s*$",
        r"^\s*(?:from\s+[\w.]+\s+)?import\s+\w+(?:\s+as\s+\w+)?\s*$",
        r"\bfunction\s*\w*\s*\([^)]*\)\s*\{",  # JavaScript
        r"\bconsole\.log\s*\(",
        r"^\s*(?:let|const)\s+\w+\s*=",
        r"^\s*func\s+\w+\s*\(",  # Go
        r"^\s*fn\s+\w+\s*\(",  # Rust
        r"\$\w+\s*=",  # PHP / Perl / shell
    )
]
_STRONG_JAVA = re.compile(
    r"^\s*(?:import\s+(?:static\s+)?[\w.]+\.(?:\*|[A-Za-z_]\w*)\s*;?|package\s+[\w.]+\s*;)\s*$"
    r"|\b(?:public|private|protected)\s+(?:static\s+)?(?:final\s+)?(?:class|interface|enum|void)\b",
    re.M,
)
_XML_LINE = re.compile(r"^\s*<(?:\?xml|!--|/?[A-Za-z][\w:.-]*(?:\s[^>]*)?/?>)")
_STRING = re.compile(r'"(?:\\.|[^"\\\n])*"|\'(?:\\.|[^\'\\\n])*\'')
_BLOCK_COMMENT = re.compile(r"/\*.*?\*/", re.S)
_LINE_COMMENT = re.compile(r"//[^\n]*")
_IMPORT = re.compile(r"^\s*import\s+(?:static\s+)?([\w.]+(?:\.\*)?)\s*;?\s*$", re.M)
_PACKAGE = re.compile(r"^\s*package\s+[\w.]+\s*;?\s*$", re.M)
_DECL = re.compile(r"\b(?i:class|interface|enum)\s+([A-Z]\w*)|@interface\s+([A-Z]\w*)")
_FQN_USE = re.compile(r"\b(?:[a-z_][\w]*\.)+[A-Z]\w*")
_TYPE_USE = re.compile(r"(?<![\w.])[A-Z]\w*")
_LINE_OK_END = (";", "{", "}", ")", "(", ",", "+", "-", "&&", "||", ".", ":", "?", "=", "*/", "...")
_LINE_OK_START = ("@", "//", "/*", "*", "import", "package", "else", "try", "finally", "do", "case", "default")


def _strip_literals(code: str) -> str:
    code = _BLOCK_COMMENT.sub(" ", code)
    code = _STRING.sub('""', code)
    return _LINE_COMMENT.sub("", code)


def _balanced(code: str) -> bool:
    pairs = {")": "(", "]": "[", "}": "{"}
    stack = []
    for ch in code:
        if ch in "([{":
            stack.append(ch)
        elif ch in pairs:
            if not stack or stack.pop() != pairs[ch]:
                return False
    return not stack


def is_camel_type(name: str) -> bool:
    """Java naming convention for types: leading capital, at least one lowercase letter."""
    return bool(name) and name[0].isupper() and any(c.islower() for c in name)


def parse_snippet(raw: str) -> CodeSnippet:
    """Island-parse a snippet: imports, declared types and used types.

    Snippets that look like another language are DISCARDED_NON_JAVA; snippets
    that fail the validity gate (unbalanced delimiters, XML, prose, too few
    statement-shaped lines) are DISCARDED_MALFORMED.
    """
    text = html.unescape(raw) if "&" in raw else raw
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return CodeSnippet(raw, SnippetStatus.DISCARDED_MALFORMED)

    strong_java = bool(_STRONG_JAVA.search(text))
    if not strong_java and any(p.search(text) for p in _NON_JAVA):
        return CodeSnippet(raw, SnippetStatus.DISCARDED_NON_JAVA)

    xml_lines = sum(1 for ln in lines if _XML_LINE.match(ln))
    if xml_lines and xml_lines * 3 >= len(lines):
        return CodeSnippet(raw, SnippetStatus.DISCARDED_MALFORMED)

    code = _strip_literals(text)
    if not _balanced(code.replace("...", "")):
        return CodeSnippet(raw, SnippetStatus.DISCARDED_MALFORMED)
    code_lines = [ln.strip() for ln in code.splitlines() if ln.strip()]
    if not code_lines:
        return CodeSnippet(raw, SnippetStatus.DISCARDED_MALFORMED)
    shaped = sum(1 for ln in code_lines if ln.endswith(_LINE_OK_END) or ln.startswith(_LINE_OK_START))
    words = re.findall(r"[A-Za-z_]\w*", code)
    keywords = sum(1 for w in words if w in JAVA_KEYWORDS)
    if shaped * 5 < len(code_lines) * 3 or (keywords == 0 and ";" not in code):
        return CodeSnippet(raw, SnippetStatus.DISCARDED_MALFORMED)

    imports = tuple(m.group(1) for m in _IMPORT.finditer(code))
    body = _PACKAGE.sub("", _IMPORT.sub("", code))
    declared = set()
    decl_spans = []
    for m in _DECL.finditer(body):
        name = m.group(1) or m.group(2)
        declared.add(name)
        decl_spans.append(m.span(1) if m.group(1) else m.span(2))
    used = set()
    fqn_spans = []
    for m in _FQN_USE.finditer(body):
        used.add(m.group())
        fqn_spans.append(m.span())
    for m in _TYPE_USE.finditer(body):
        start = m.start()
        if any(a <= start < b for a, b in fqn_spans) or any(a <= start < b for a, b in decl_spans):
            continue
        if m.group() in JAVA_KEYWORDS:
            continue
        if is_camel_type(m.group()):
            used.add(m.group())
    return CodeSnippet(
        raw,
        SnippetStatus.VALID_JAVA_LIKE,
        imports=imports,
        declared_types=frozenset(declared),
        used_types=frozenset(used),
    )


# --- assigning types to mentions -------------------------------------------------------

_PROSE_CAMEL = re.compile(r"^[A-Z][a-z0-9]+(?:[A-Z][A-Za-z0-9]*)+$")
_PROSE_FQN = re.compile(r"^(?:[a-z_]\w*\.)+[A-Z]\w*$")


def is_prose_type(surface: str) -> bool:
    """Code terms written inline in prose: ObjectMapper, com.foo.Bar."""
    return bool(_PROSE_CAMEL.match(surface) or _PROSE_FQN.match(surface))


def simple_name(type_name: str) -> str:
    return type_name.rsplit(".", 1)[-1]


def _nearest(mentions: Sequence[Mention], sentence: int, token: int | None) -> Mention | None:
    """Nearest mention for a code term at (sentence, token); token None = snippet slot."""
    if token is not None:
        same = [m for m in mentions if m.sentence_index == sentence]
        if same:
            def dist(m: Mention) -> tuple[int, int]:
                if m.start > token:
                    return (m.start - token, 1)
                return (max(0, token - (m.end - 1)), 0)  # preceding wins ties

            return min(same, key=dist)
        before = [m for m in mentions if m.sentence_index < sentence]
    else:
        before = [m for m in mentions if m.sentence_index < sentence]
    if before:
        return before[-1]
    after = [m for m in mentions if m.sentence_index >= sentence]
    return after[0] if after else None


def post_snippets(post: Post) -> list[CodeSnippet]:
    return [parse_snippet(s.text) for s in post.snippets]


def extract_code_context(
    doc: ThreadDoc,
    mentions: Iterable[Mention],
    keep_default_types: bool = False,
    parsed: Mapping[str, list[CodeSnippet]] | None = None,
) -> dict[Mention, CodeContext]:
    """Assign the code types of each post to the post's mentions.

    One mention in a post takes every type. With several, each type goes to
    the nearest mention in its sentence (ties to the preceding one), else to
    the last mention seen before it. Types declared in the post and, unless
    ``keep_default_types``, java.lang types are dropped.
    """
    mentions = sorted(mentions, key=lambda m: (m.sentence_index, m.start))
    out: dict[Mention, set[str]] = {m: set() for m in mentions}
    for post in doc.posts:
        in_post = [m for m in mentions if m.post_id == post.post_id]
        if not in_post:
            continue
        snippets = parsed[post.post_id] if parsed is not None else post_snippets(post)
        declared: set[str] = set()
        occurrences: list[tuple[str, int, int | None]] = []
        for snip, meta in zip(snippets, post.snippets):
            if snip.status is not SnippetStatus.VALID_JAVA_LIKE:
                continue
            declared |= snip.declared_types
            for t in sorted(snip.used_types):
                occurrences.append((t, meta.position, None))
        for si, sentence in enumerate(post.sentences):
            for ti, tok in enumerate(sentence.tokens):
                if not is_prose_type(tok.surface):
                    continue
                if any(m.sentence_index == si and m.start <= ti < m.end for m in in_post):
                    continue
                occurrences.append((tok.surface, si, ti))
        for type_name, sentence, token in occurrences:
            short = simple_name(type_name)
            if short in declared or type_name in declared:
                continue
            if not keep_default_types and (short in JAVA_LANG_TYPES and "." not in type_name
                                           or type_name.startswith("java.lang.")):
                continue
            target = in_post[0] if len(in_post) == 1 else _nearest(in_post, sentence, token)
            if target is not None:
                out[target].add(type_name)
    return {m: CodeContext(m, frozenset(types)) for m, types in out.items()}


# --- linking types to candidates ------------------------------------------------------------


def processed_import(statement: str) -> str:
    """Strip ``import``, ``static``, ``;`` and ``*`` (and the dangling dot) from an import."""
    s = statement.strip()
    if s.startswith("import"):
        s = s[len("import"):].strip()
    if s.startswith("static "):
        s = s[len("static "):].strip()
    s = s.replace(";", "").replace("*", "").strip()
    return s.rstrip(".")


def is_in_imported(type_name: str, fqn: str, imports: Iterable[str]) -> bool:
    """True if some import turns ``type_name`` into ``fqn``.

    A wildcard import contributes ``package.TypeName``; a single-type import
    contributes itself when its last segment is ``type_name``.
    """
    for imp in imports:
        path = processed_import(imp)
        if not path:
            continue
        if path + "." + type_name == fqn:
            return True
        if simple_name(path) == type_name and path == fqn:
            return True
    return False


def link_type(
    candidate_ids: Iterable[str],
    type_name: str,
    snippets: Iterable[CodeSnippet],
    db: ApiDatabase,
) -> frozenset[str]:
    """Candidates a type name may belong to.

    An exact fully-qualified match wins. For a simple name, candidates whose
    type index holds it under an imported package are kept; if imports
    confirm none, every candidate holding the simple name is returned.
    """
    candidate_ids = list(candidate_ids)
    imports = [i for s in snippets if s.status is SnippetStatus.VALID_JAVA_LIKE for i in s.imports]
    linked: set[str] = set()
    by_simple: dict[str, list[str]] = {}
    unqualified: set[str] = set()
    for cid in candidate_ids:
        for t in db[cid].type_index:
            if t == type_name:
                linked.add(cid)
            elif simple_name(t) == type_name:
                by_simple.setdefault(cid, []).append(t)
                unqualified.add(cid)
    for cid, fqns in by_simple.items():
        if any(is_in_imported(type_name, t, imports) for t in fqns):
            linked.add(cid)
    if not linked:
        return frozenset(unqualified)
    return frozenset(linked)


def structural_similarity(types: Iterable[str], api_id: str, links: Mapping[str, frozenset[str]]) -> float:
    """Share of the mention's code types linked to ``api_id``; 0 without types."""
    types = set(types)
    if not types:
        return 0.0
    return sum(1 for t in types if api_id in links.get(t, frozenset())) / len(types)
