from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from apimention.errors import ParseError
from apimention.text import (
    Pos,
    Sentence,
    lexicon,
    name_tokens,
    pos_tag,
    preprocess_post,
    preprocess_thread,
    split_sentences,
    stopwords,
    tag_word,
    tokenize_name,
)


class TestPreprocess:
    def test_simple_sentence(self):
        post = preprocess_post("p", "I use Jackson to parse JSON messages.")
        assert len(post.sentences) == 1
        tokens = post.sentences[0].tokens
        assert len(tokens) == 8
        assert tokens[2].surface == "Jackson" and tokens[2].normalized == "jackson"

    def test_snippet_between_sentences(self):
        post = preprocess_post("p", "First one here. <pre><code>int x = 1;</code></pre> Second one here.")
        assert len(post.sentences) == 2
        assert [(s.text, s.position) for s in post.snippets] == [("int x = 1;", 1)]

    def test_url_is_one_token(self):
        (s,) = split_sentences("see https://spring.io/ for docs")
        assert [t.surface for t in s.tokens] == ["see", "https://spring.io/", "for", "docs"]
        assert s.links == ("https://spring.io/",)

    def test_url_with_trailing_period(self):
        sentences = split_sentences("Docs are at https://spring.io/guide. Read them.")
        assert len(sentences) == 2
        assert sentences[0].links == ("https://spring.io/guide",)

    def test_sentence_split_rules(self):
        texts = [s.text for s in split_sentences("Use it, e.g. Jackson. It works! Does it? yes 2 things. Version 2.9 is out.")]
        assert texts == ["Use it , e.g. Jackson .", "It works !", "Does it ? yes 2 things .", "Version 2.9 is out ."]

    def test_markup_stripped(self):
        post = preprocess_post("p", "<p>Try <b>Gson</b> &amp; <a href='https://github.com/google/gson'>this</a>.</p>")
        s = post.sentences[0]
        assert [t.surface for t in s.tokens] == ["Try", "Gson", "&", "this", "https://github.com/google/gson", "."]
        assert s.links == ("https://github.com/google/gson",)

    def test_fenced_block(self):
        post = preprocess_post("p", "Like this:\n```java\nnew Gson();\n```\nDone.")
        assert [s.text for s in post.snippets] == ["new Gson();\n"]
        assert post.snippets[0].position == 1

    def test_normalized_is_lowercase_stripped(self):
        for t in split_sentences('He said "Gson," then (Jackson).')[0].tokens:
            assert t.normalized == t.surface.lower().strip("\"'`.,;:!?()[]{}<>*_~")

    def test_thread(self):
        doc = preprocess_thread(
            {"thread_id": "t", "title": "Gson vs Jackson", "posts": [{"id": "a", "body": "x."}, {"body": "y."}]}
        )
        assert doc.title.text == "Gson vs Jackson"
        assert [p.post_id for p in doc.posts] == ["a", "p2"]

    @pytest.mark.parametrize(
        "raw",
        [
            "{not json",
            "[]",
            '{"thread_id": "t", "posts": []}',
            '{"thread_id": "", "posts": [{"body": "x"}]}',
            '{"thread_id": "t", "posts": [{"id": 1}]}',
            '{"thread_id": "t", "posts": [{"id": "a", "body": ""}, {"id": "a", "body": ""}]}',
        ],
    )
    def test_malformed(self, raw):
        with pytest.raises(ParseError):
            preprocess_thread(raw)

    @given(st.text(alphabet=st.characters(blacklist_characters="<\x00", blacklist_categories=("Cs",))))
    def test_snippet_text_is_verbatim(self, code):
        post = preprocess_post("p", f"Before.<pre><code>{code}</code></pre>After.")
        assert [s.text for s in post.snippets] == [code]

    @given(st.text(max_size=80))
    def test_snippet_positions_in_range(self, text):
        post = preprocess_post("p", f"{text}<pre><code>x;</code></pre>{text}")
        for s in post.snippets:
            assert 0 <= s.position <= len(post.sentences)


class TestTokenizeName:
    @pytest.mark.parametrize(
        "name, tokens",
        [
            ("com.fasterxml.jackson.core", {"fasterxml", "jackson", "core"}),
            ("gson", {"gson"}),
            ("Jackson JSON parser", {"jackson", "json", "parser"}),
            ("ObjectMapper", {"object", "mapper"}),
            ("org.apache.camel", {"apache", "camel"}),
            ("camel-jackson", {"camel", "jackson"}),
            ("the", set()),
        ],
    )
    def test_examples(self, name, tokens):
        assert tokenize_name(name) == tokens

    def test_order_preserved(self):
        assert name_tokens("com.google.code.gson") == ["google", "code", "gson"]

    @given(st.text(max_size=40))
    def test_idempotent(self, name):
        once = tokenize_name(name)
        assert tokenize_name(" ".join(sorted(once))) == once

    @given(st.text(max_size=40))
    def test_no_stopwords_or_prefixes(self, name):
        toks = tokenize_name(name)
        assert not toks & stopwords()
        assert not toks & {"com", "org", "net", "io", "www"}
        assert all(t == t.lower() for t in toks)


class TestPosTag:
    def test_parser_is_noun(self):
        assert tag_word("parser") is Pos.NOUN

    def test_parse_is_lexicon_verb(self):
        assert lexicon()["parse"] is Pos.VERB
        assert tag_word("parse") is Pos.VERB

    def test_empty_sentence(self):
        assert pos_tag(Sentence()) == Sentence()

    @pytest.mark.parametrize(
        "word, pos",
        [
            ("messages", Pos.NOUN),
            ("switched", Pos.VERB),
            ("routed", Pos.VERB),
            ("tokenizing", Pos.VERB),
            ("modularize", Pos.VERB),
            ("serialization", Pos.NOUN),
            ("deployment", Pos.NOUN),
            ("data-binding", Pos.NOUN),
            ("Zorblax", Pos.NOUN),
            ("zorblax", Pos.OTHER),
            ("42", Pos.OTHER),
            ("!", Pos.OTHER),
        ],
    )
    def test_rules(self, word, pos):
        assert tag_word(word) is pos

    def test_lexicon_size(self):
        assert 1500 <= len(lexicon()) <= 2500

    @given(st.text(max_size=60))
    def test_total_and_deterministic(self, text):
        for s in split_sentences(text):
            again = pos_tag(s)
            assert again == s
            assert all(isinstance(t.pos, Pos) for t in s.tokens)
