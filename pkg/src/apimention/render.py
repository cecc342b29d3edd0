"""Output formats for resolution decisions: line-delimited records and annotated HTML."""

from __future__ import annotations

import html
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from apimention.context import select_description_sentences
from apimention.db import ApiDatabase
from apimention.detect import TITLE_POST_ID, Mention
from apimention.errors import InputError, ParseError
from apimention.pipeline import ResolutionDecision
from apimention.text import Sentence, ThreadDoc

RECORDS_FORMAT = "apimention.records/1"
TRUE_OUTCOME = "TRUE"
FALSE_OUTCOME = "FALSE_MENTION"
EXCERPT_CHARS = 160

# --- records --------------------------------------------------------------------------------


def decision_record(d: ResolutionDecision) -> dict:
    m = d.mention
    return {
        "format": RECORDS_FORMAT,
        "thread_id": m.thread_id,
        "post_id": m.post_id,
        "sentence_index": m.sentence_index,
        "start": m.start,
        "end": m.end,
        "surface": m.surface,
        "outcome": TRUE_OUTCOME if d.is_true else FALSE_OUTCOME,
        "api_id": d.api_id,
        "module": d.module,
        "url": d.url,
        "provenance": d.provenance,
        "confidence": d.confidence,
        "candidates": {k: v for k, v in d.candidates},
    }


def render_records(decisions: Iterable[ResolutionDecision]) -> str:
    return "".join(json.dumps(decision_record(d), sort_keys=True, ensure_ascii=False) + "\n" for d in decisions)


def record_decision(rec: dict) -> ResolutionDecision:
    if rec.get("format") != RECORDS_FORMAT:
        raise ValueError(f"unsupported records format {rec.get('format')!r}")
    outcome = rec["outcome"]
    if outcome not in (TRUE_OUTCOME, FALSE_OUTCOME):
        raise ValueError(f"unknown outcome {outcome!r}")
    api_id = rec["api_id"] if outcome == TRUE_OUTCOME else None
    if outcome == TRUE_OUTCOME and not isinstance(api_id, str):
        raise ValueError("true outcome without api_id")
    confidence = float(rec["confidence"])
    if not math.isfinite(confidence):
        raise ValueError("confidence is not finite")
    mention = Mention(
        str(rec["thread_id"]),
        str(rec["post_id"]),
        int(rec["sentence_index"]),
        int(rec["start"]),
        int(rec["end"]),
        str(rec["surface"]),
    )
    cands = rec.get("candidates") or {}
    return ResolutionDecision(
        mention=mention,
        api_id=api_id,
        module=rec.get("module"),
        url=rec.get("url"),
        provenance=str(rec["provenance"]),
        confidence=confidence,
        candidates=tuple(sorted((str(k), float(v)) for k, v in cands.items())),
    )


def parse_records(text: str, source: str | None = None) -> list[ResolutionDecision]:
    out = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if not raw.strip():
            continue
        try:
            out.append(record_decision(json.loads(raw)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed decision record: {exc}", lineno, source) from None
    return out


def read_records(path: str | Path) -> list[ResolutionDecision]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read records: {exc.strerror}", source=str(path)) from None
    return parse_records(text, str(path))


# --- annotated HTML ----------------------------------------------------------------------------

_NO_SPACE_BEFORE = set(".,;:!?)]}'\"")
_NO_SPACE_AFTER = set("([{")

_STYLE = """\
body { font-family: sans-serif; max-width: 50em; margin: 2em auto; line-height: 1.5; }
.post { border-top: 1px solid #ccc; padding: 0.5em 0; }
.post-id { color: #888; font-size: 0.8em; }
.mention-true { background: #c8f0c8; }
.mention-false { background: #f5c2c2; }
pre { background: #f4f4f4; padding: 0.5em; overflow-x: auto; }
"""


def _join(surfaces: Sequence[str]) -> list[str]:
    """Pieces with the separating whitespace each token needs in front of it."""
    out = []
    for i, s in enumerate(surfaces):
        if i == 0 or (s and s[0] in _NO_SPACE_BEFORE) or (surfaces[i - 1] and surfaces[i - 1][-1] in _NO_SPACE_AFTER):
            out.append("")
        else:
            out.append(" ")
    return out


def _excerpt(api_id: str, db: ApiDatabase) -> str:
    desc = select_description_sentences(api_id, db)
    entry = db[api_id]
    if desc.selected_sentences:
        surfaces = [t.surface for t in desc.selected_sentences[0].tokens]
        text = "".join(sp + w for sp, w in zip(_join(surfaces), surfaces))
    else:
        text = entry.portal_description or entry.homepage_description
    text = " ".join(text.split())
    return text if len(text) <= EXCERPT_CHARS else text[: EXCERPT_CHARS - 3].rstrip() + "..."


def _tooltip(d: ResolutionDecision, db: ApiDatabase | None) -> str:
    parts = [d.api_id or ""]
    if db is not None and d.api_id in db:
        parts = [db[d.api_id].name]
        if d.module:
            parts[0] += f" / {d.module}"
        excerpt = _excerpt(d.api_id, db)  # type: ignore[arg-type]
        if excerpt:
            parts.append(excerpt)
    elif d.module:
        parts[0] += f" / {d.module}"
    if d.url:
        parts.append(d.url)
    return "\n".join(parts)


def _mention_html(d: ResolutionDecision, inner: str, db: ApiDatabase | None) -> str:
    if not d.is_true:
        return f'<span class="mention-false" title="not an API">{inner}</span>'
    tip = html.escape(_tooltip(d, db), quote=True)
    attrs = f'class="mention-true" title="{tip}" data-api="{html.escape(d.api_id or "", quote=True)}"'
    if d.url:
        inner = f'<a href="{html.escape(d.url, quote=True)}">{inner}</a>'
    return f"<span {attrs}>{inner}</span>"


def _sentence_html(sentence: Sentence, decisions: Sequence[ResolutionDecision], db: ApiDatabase | None) -> str:
    surfaces = [t.surface for t in sentence.tokens]
    spaces = _join(surfaces)
    starts = {d.mention.start: d for d in decisions}
    out = []
    i = 0
    while i < len(surfaces):
        d = starts.get(i)
        if d is None:
            out.append(spaces[i] + html.escape(surfaces[i], quote=False))
            i += 1
            continue
        inner = "".join(
            (spaces[j] if j > i else "") + html.escape(surfaces[j], quote=False) for j in range(i, d.mention.end)
        )
        out.append(spaces[i] + _mention_html(d, inner, db))
        i = d.mention.end
    return "".join(out)


def _check(decisions: Sequence[ResolutionDecision], doc: ThreadDoc) -> dict[tuple[str, int], list[ResolutionDecision]]:
    grouped: dict[tuple[str, int], list[ResolutionDecision]] = {}
    for d in decisions:
        m = d.mention
        if m.thread_id != doc.thread_id:
            raise InputError(f"decision for thread {m.thread_id!r} does not belong to {doc.thread_id!r}")
        if m.post_id == TITLE_POST_ID:
            sentences: Sequence[Sentence] = (doc.title,)
        else:
            try:
                sentences = doc.post(m.post_id).sentences
            except KeyError:
                raise InputError(f"decision references unknown post {m.post_id!r}") from None
        if not 0 <= m.sentence_index < len(sentences):
            raise InputError(f"decision references sentence {m.sentence_index} outside post {m.post_id!r}")
        if not 0 <= m.start < m.end <= len(sentences[m.sentence_index].tokens):
            raise InputError(f"decision span [{m.start}, {m.end}) outside its sentence")
        grouped.setdefault((m.post_id, m.sentence_index), []).append(d)
    for key, ds in grouped.items():
        ds.sort(key=lambda d: d.mention.start)
        for a, b in zip(ds, ds[1:]):
            if b.mention.start < a.mention.end:
                raise InputError(f"overlapping decisions in {key[0]!r} sentence {key[1]}")
    return grouped


def render_html(decisions: Sequence[ResolutionDecision], doc: ThreadDoc, db: ApiDatabase | None = None) -> str:
    """Standalone HTML page of the thread: true mentions in green, false mentions in red."""
    grouped = _check(decisions, doc)
    esc = lambda s: html.escape(s, quote=False)  # noqa: E731
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{esc(doc.title.text) or esc(doc.thread_id)}</title>",
        f"<style>\n{_STYLE}</style>",
        "</head>",
        "<body>",
        f'<h1 data-thread="{html.escape(doc.thread_id, quote=True)}">'
        f"{_sentence_html(doc.title, grouped.get((TITLE_POST_ID, 0), []), db)}</h1>",
    ]
    for post in doc.posts:
        lines.append(f'<div class="post" id="post-{html.escape(post.post_id, quote=True)}">')
        lines.append(f'<div class="post-id">{esc(post.post_id)}</div>')
        by_pos: dict[int, list[str]] = {}
        for sn in post.snippets:
            by_pos.setdefault(sn.position, []).append(sn.text)
        para: list[str] = []

        def flush():
            if para:
                lines.append("<p>" + " ".join(para) + "</p>")
                para.clear()

        for si in range(len(post.sentences) + 1):
            for code in by_pos.get(si, []):
                flush()
                lines.append(f"<pre><code>{esc(code)}</code></pre>")
            if si < len(post.sentences):
                para.append(_sentence_html(post.sentences[si], grouped.get((post.post_id, si), []), db))
        flush()
        lines.append("</div>")
    lines += ["</body>", "</html>", ""]
    return "\n".join(lines)
