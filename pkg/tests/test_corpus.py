import html
import json
import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagforge.corpus import (
    RowParseError,
    TagFieldError,
    build_dataset,
    parse_dump_row,
    parse_tags,
    post_from_json_line,
    read_dataset,
    split_body,
    split_latest,
    strip_html,
    validate_post,
)

DATA = Path(__file__).parent / "data"

# Hand-derived expectations for tests/data/golden_posts.xml: description is the
# body minus <pre><code> blocks with markup dropped, entities decoded once, and
# whitespace runs collapsed; code is the block contents entity-decoded verbatim.
GOLDEN = [
    {
        "id": 101,
        "title": "Pass a function result to a second call",
        "description": "Why does this fail at the second call?",
        "code": "def f(x):\n    return x ** 2\n\nprint(f(2))\n",
        "tags": ["python"],
    },
    {
        "id": 102,
        "title": "Assignment works once then stops",
        "description": "First I tried then",
        "code": "a = 1\nb = 2",
        "tags": ["python", "variables"],
    },
    {
        "id": 103,
        "title": "Markdown shows my pre tags literally",
        "description": "Writing <pre><code> in markdown shows the tags.",
        "code": "",
        "tags": ["html"],
    },
    {
        "id": 104,
        "title": "Cron job never starts",
        "description": "no code here",
        "code": "",
        "tags": ["linux", "bash"],
    },
    {
        "id": 105,
        "title": "Counting items in a sequence",
        "description": "Use the len() builtin for this.",
        "code": "",
        "tags": ["python"],
    },
    {
        "id": 106,
        "title": "Highlighted block is ignored",
        "description": "Styled block:var x = 1;",
        "code": "",
        "tags": ["javascript"],
    },
    {
        "id": 107,
        "title": "Comparison inside a condition",
        "description": "Condition check",
        "code": "if (a && b) { return a < b; }",
        "tags": ["javascript"],
    },
    {
        "id": 108,
        "title": "Emphasis spacing is off",
        "description": "x y",
        "code": "",
        "tags": ["css"],
    },
    {
        "id": 109,
        "title": "Numeric character references",
        "description": "AB and C",
        "code": "",
        "tags": ["encoding", "unicode"],
    },
    {
        "id": 110,
        "title": "Accented names break my export",
        "description": "Text café and snowman ☃",
        "code": "",
        "tags": ["python", "unicode"],
    },
    {
        "id": 111,
        "title": "Bold run never ends",
        "description": "broken bold text",
        "code": "",
        "tags": ["html"],
    },
    {
        "id": 112,
        "title": "Line break element misbehaves",
        "description": "line1line2",
        "code": "",
        "tags": ["html", "css"],
    },
    {
        "id": 113,
        "title": "Why are both assignments needed?",
        "description": "",
        "code": "x = 1\n\ny = 2\n",
        "tags": ["python"],
    },
    {
        "id": 114,
        "title": "Entity manager fails on startup",
        "description": "ORM mapping fails on startup",
        "code": "",
        "tags": ["java", "spring", "hibernate", "jpa", "mysql"],
    },
    {
        "id": 115,
        "title": "Index column appears twice",
        "description": "dedupe check",
        "code": "",
        "tags": ["python", "pandas"],
    },
    {
        "id": 116,
        "title": "Stream insertion prints the address",
        "description": "Which language?",
        "code": "std::cout << x;",
        "tags": ["c++", "c#"],
    },
    {
        "id": 117,
        "title": 'Why does "a & b" fail?',
        "description": "quotes",
        "code": "",
        "tags": ["bash"],
    },
    {
        "id": 118,
        "title": "List items collapse together",
        "description": "onetwo",
        "code": "",
        "tags": ["html"],
    },
    {
        "id": 119,
        "title": "Full scan on a small table",
        "description": "Why slow?",
        "code": "SELECT * FROM t;",
        "tags": ["sql", "performance"],
    },
    {
        "id": 120,
        "title": "Tab separated values split wrong",
        "description": "a b",
        "code": "",
        "tags": ["regex"],
    },
]


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("golden") / "dataset.jsonl"
    with open(DATA / "golden_posts.xml", encoding="utf-8") as fh:
        summary = build_dataset(fh, out)
    return summary, out


class TestGoldenCorpus:
    def test_summary_counts(self, built):
        summary, _ = built
        assert summary.kept == 20
        assert summary.skipped_non_question == 1
        assert summary.skipped_missing_fields == 1
        assert summary.skipped_empty_title == 1
        assert summary.skipped_too_many_tags == 1
        # one syntactically broken row, one row with stray text between tags
        assert summary.malformed == 2
        assert summary.rows_seen == 26

    def test_byte_exact_fields(self, built):
        _, out = built
        posts = list(read_dataset(out))
        assert len(posts) == len(GOLDEN)
        for post, expected in zip(posts, GOLDEN):
            assert post.id == expected["id"]
            assert post.title == expected["title"]
            assert post.description == expected["description"]
            assert post.code == expected["code"]
            assert list(post.tags) == expected["tags"]

    def test_record_field_order(self, built):
        _, out = built
        first = out.read_text(encoding="utf-8").splitlines()[0]
        keys = re.findall(r'"(id|created_at|title|description|code|tags)":', first)
        assert keys == ["id", "created_at", "title", "description", "code", "tags"]

    def test_created_at_sorted(self, built):
        _, out = built
        stamps = [post.created_at for post in read_dataset(out)]
        assert stamps == sorted(stamps)

    def test_all_posts_valid(self, built):
        _, out = built
        for post in read_dataset(out):
            validate_post(post)


class TestParseDumpRow:
    def test_answer_row_skipped(self):
        row = '<row Id="9" PostTypeId="2" CreationDate="2018-01-01T00:00:00.000" Body="&lt;p&gt;a&lt;/p&gt;" />'
        assert parse_dump_row(row) is None

    def test_attribute_unescaping(self):
        row = (
            '<row Id="7" PostTypeId="1" CreationDate="2018-01-01T00:00:00.000" '
            'Title="A" Body="&lt;p&gt;b&lt;/p&gt;" Tags="&lt;python&gt;" />'
        )
        raw = parse_dump_row(row)
        assert raw.title == "A"
        assert raw.body_html == "<p>b</p>"
        assert raw.tag_field == "<python>"

    def test_missing_tags_skipped(self):
        row = (
            '<row Id="7" PostTypeId="1" CreationDate="2018-01-01T00:00:00.000" '
            'Title="A" Body="&lt;p&gt;b&lt;/p&gt;" />'
        )
        assert parse_dump_row(row) is None

    def test_malformed_row_raises_with_offset(self):
        with pytest.raises(RowParseError) as err:
            parse_dump_row('<row Id="1" Body="<p>raw</p>" />', offset=17)
        assert err.value.offset == 17

    def test_non_row_element_rejected(self):
        with pytest.raises(RowParseError):
            parse_dump_row("<posts>")


class TestSplitBody:
    def test_single_block(self):
        desc, code = split_body("<p>How do I print?</p><pre><code>print(1)</code></pre>")
        assert desc == "<p>How do I print?</p>"
        assert code == "print(1)"

    def test_no_blocks(self):
        assert split_body("<p>no code here</p>") == ("<p>no code here</p>", "")

    def test_two_blocks_document_order(self):
        _, code = split_body(
            "<pre><code>a</code></pre><p>mid</p><pre><code>b</code></pre>"
        )
        assert code == "a\nb"

    def test_inline_code_stays(self):
        desc, code = split_body("<p>use <code>len()</code></p>")
        assert code == ""
        assert "<code>len()</code>" in desc

    def test_attributed_pre_not_matched(self):
        desc, code = split_body('<pre class="x"><code>y</code></pre>')
        assert code == ""
        assert desc == '<pre class="x"><code>y</code></pre>'


class TestStripHtml:
    def test_entity_decoded_once(self):
        assert strip_html("<p>a &amp; b</p>") == "a & b"

    def test_empty(self):
        assert strip_html("") == ""

    def test_whitespace_collapse(self):
        assert strip_html("<em>x</em>  <strong>y</strong>") == "x y"

    def test_double_escaped_entity_stays_encoded_once(self):
        assert strip_html("<p>&amp;lt;pre&amp;gt;</p>") == "&lt;pre&gt;"


class TestParseTags:
    def test_basic(self):
        assert parse_tags("<python><pandas>") == ["python", "pandas"]

    def test_empty(self):
        assert parse_tags("") == []

    def test_duplicates_first_occurrence(self):
        assert parse_tags("<a><a><b>") == ["a", "b"]

    def test_stray_characters_rejected(self):
        with pytest.raises(TagFieldError):
            parse_tags("<a>junk<b>")


# Bodies assembled from known text and code parts: the pipeline must recover
# exactly the parts that went in.
_text = st.text(alphabet="ab <>&", min_size=0, max_size=30)
_code = st.text(alphabet="xy=<>&\n ", min_size=1, max_size=40)


@st.composite
def assembled_bodies(draw):
    paragraphs = draw(st.lists(_text, min_size=0, max_size=3))
    codes = draw(st.lists(_code, min_size=0, max_size=3))
    pieces = [f"<p>{html.escape(p)}</p>" for p in paragraphs]
    for snippet in codes:
        pieces.append(f"<pre><code>{html.escape(snippet)}</code></pre>")
    order = draw(st.permutations(range(len(pieces))))
    body = "".join(pieces[i] for i in order)
    ordered_codes = [codes[i - len(paragraphs)] for i in order if i >= len(paragraphs)]
    ordered_texts = [paragraphs[i] for i in order if i < len(paragraphs)]
    return body, ordered_texts, ordered_codes


@given(assembled_bodies())
@settings(max_examples=200)
def test_split_recovers_code_and_text(assembled):
    body, texts, codes = assembled
    desc_html, code_html = split_body(body)
    assert html.unescape(code_html) == "\n".join(codes)
    expected_desc = re.sub(r"\s+", " ", "".join(texts)).strip()
    assert strip_html(desc_html) == expected_desc


@given(assembled_bodies())
@settings(max_examples=200)
def test_split_idempotent_on_description(assembled):
    body, _, _ = assembled
    desc_html, _ = split_body(body)
    _, second_code = split_body(desc_html)
    assert second_code == ""


_tag_name = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789.+-#", min_size=1, max_size=12)


@given(st.lists(_tag_name, min_size=1, max_size=5, unique=True))
def test_parse_tags_roundtrip(names):
    field = "".join(f"<{n}>" for n in names)
    assert parse_tags(field) == names


class TestBuildDataset:
    def test_empty_stream(self, tmp_path):
        summary = build_dataset([], tmp_path / "out.jsonl")
        assert summary.kept == 0

    def test_limit(self, tmp_path):
        with open(DATA / "golden_posts.xml", encoding="utf-8") as fh:
            summary = build_dataset(fh, tmp_path / "out.jsonl", limit=3)
        assert summary.kept == 3

    def test_partial_marker_blocks_reads(self, tmp_path):
        out = tmp_path / "out.jsonl"
        with open(DATA / "golden_posts.xml", encoding="utf-8") as fh:
            build_dataset(fh, out)
        (tmp_path / "out.jsonl.partial").write_text("", encoding="utf-8")
        with pytest.raises(RuntimeError, match="incomplete"):
            list(read_dataset(out))

    def test_json_roundtrip(self, tmp_path):
        out = tmp_path / "out.jsonl"
        with open(DATA / "golden_posts.xml", encoding="utf-8") as fh:
            build_dataset(fh, out)
        for line in out.read_text(encoding="utf-8").splitlines():
            post = post_from_json_line(line)
            record = json.loads(line)
            assert record["id"] == post.id


class TestSplitLatest:
    def test_latest_go_to_test(self, tmp_path):
        with open(DATA / "golden_posts.xml", encoding="utf-8") as fh:
            build_dataset(fh, tmp_path / "d.jsonl")
        posts = list(read_dataset(tmp_path / "d.jsonl"))
        train, test = split_latest(posts, 5)
        assert len(train) == 15 and len(test) == 5
        assert max(p.created_at for p in train) <= min(p.created_at for p in test)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            split_latest([], 1)
