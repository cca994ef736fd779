import re
from dataclasses import dataclass, field

import pytest
from hypothesis import given, strategies as st

from qcpd.wikitext import (
    MarkerCounts,
    iter_templates,
    link_namespace,
    normalize_template_name,
    parse_wikitext_markers,
    plain_text,
    split_top_level,
)


# -- independent reference: recursive descent over balanced wikitext ---------------

@dataclass
class Node:
    kind: str  # "tpl" or "link"
    head: str = ""  # text before the first top-level pipe
    children: list = field(default_factory=list)


_REF_OPEN = re.compile(r"<ref(\s[^<>]*)?>", re.I)


def _parse(text, i, close, refs):
    """Parse until ``close``; returns (children, head, index after close)."""
    children, head, seen_pipe = [], [], False
    while i < len(text):
        if close and text.startswith(close, i):
            return children, "".join(head), i + len(close)
        if text.startswith("<!--", i):
            j = text.find("-->", i)
            i = len(text) if j < 0 else j + 3
            continue
        m = _REF_OPEN.match(text, i)
        if m:
            refs.append(i)
            i = m.end()
            continue
        for opener, kind, closer in (("{{", "tpl", "}}"), ("[[", "link", "]]")):
            if text.startswith(opener, i):
                kids, h, i = _parse(text, i + 2, closer, refs)
                children.append(Node(kind, h, kids))
                break
        else:
            if text[i] == "|":
                seen_pipe = True
            elif not seen_pipe:
                head.append(text[i])
            i += 1
    if close:
        raise ValueError("unbalanced")
    return children, "".join(head), i


def reference_markers(text):
    refs = []
    roots, _, _ = _parse(text, 0, None, refs)
    counts = dict(refs=len(refs), wikilinks=0, citation_templates=0, noncitation_templates=0,
                  categories=0, images=0, has_infobox=False)

    def walk(nodes, depth):
        for nd in nodes:
            if nd.kind == "tpl":
                name = nd.head.strip().lower().replace("_", " ")
                for p in ("subst:", "template:"):
                    if name.startswith(p):
                        name = name[len(p):].strip()
                if name.startswith(("cite", "citation")):
                    counts["citation_templates"] += 1
                elif name.startswith("infobox"):
                    counts["has_infobox"] = True
                elif depth == 0 and name and not name.startswith("#"):
                    counts["noncitation_templates"] += 1
                walk(nd.children, depth + 1)
            else:
                prefix = nd.head.split(":", 1)[0].strip().lower() if ":" in nd.head else ""
                if prefix == "category":
                    counts["categories"] += 1
                elif prefix in ("file", "image"):
                    counts["images"] += 1
                elif not prefix and nd.head.strip():
                    counts["wikilinks"] += 1
                walk(nd.children, depth)

    walk(roots, 0)
    no_comments = re.sub(r"<!--.*?-->", "", text, flags=re.S)
    l2 = l3 = 0
    for line in no_comments.split("\n"):
        m = re.fullmatch(r"(=+)(.*[^=].*?)(=+)[ \t]*", line)
        if m:
            level = min(len(m.group(1)), len(m.group(3)))
            l2 += level == 2
            l3 += level >= 3
    counts.update(level2_headings=l2, level3plus_headings=l3)
    return counts


SNIPPETS = [
    "",
    "Plain prose without markup.",
    "[[Paris]] and [[London|the capital]].",
    "== History ==\n[[Paris]] <ref>x</ref> {{cite web|url=http://a}}",
    "{{Infobox city|name=X|image=[[File:X.png|thumb]]}}\n[[Category:Cities]]",
    "{{cite book|title={{lang|fr|Le}}}}",
    "{{citation needed}} {{Cite journal|a=b}}",
    "{{main|Foo}} {{see also|Bar}} {{reflist}}",
    "{{outer|{{inner|{{innermost}}}}}}",
    "<!-- {{hidden}} [[Hidden]] --> visible [[Shown]]",
    "=== Sub ===\n==== Deeper ====\n= Top =\n== Two ==",
    "== [[Linked]] heading ==",
    "[[Image:A.jpg|left|[[Caption link]]]] [[File:B.svg]]",
    "[[:Category:Not a category member]]",
    "[[fr:Paris]] interlanguage plus [[Paris]]",
    "<ref name=\"a\">{{cite web|title=T}}</ref><ref name=\"a\" />",
    "{{#if:{{{1|}}}|[[Yes]]|[[No]]}}",
    "{{Template:Navbox|list=[[A]] [[B]]}}",
    "{{subst:unsigned|User}} text",
    "{{Infobox person\n| name = Ada\n| birth = {{birth date|1815|12|10}}\n}}",
    "Line one.\n\n== Notes ==\n{{reflist|30em}}\n[[Category:1815 births]]\n[[Category:Mathematicians]]",
    "{{WikiProject banner shell|1={{WikiProject France|class=GA}}}}",
    "[[Talk:Paris]] [[User:X]] [[Wikipedia:Policy]] [[Paris#History|h]]",
    "Text ''italic'' '''bold''' [[Link]]s {{Cite news |title=N}}<ref>{{cite web}}</ref>",
]


@pytest.mark.parametrize("text", SNIPPETS)
def test_markers_match_reference(text):
    got = parse_wikitext_markers(text)
    want = reference_markers(text)
    for key, value in want.items():
        assert getattr(got, key) == value, key
    assert got.byte_length == len(text.encode("utf-8"))


def test_fixture_counts():
    m = parse_wikitext_markers("== History ==\n[[Paris]] <ref>x</ref> {{cite web}}")
    assert (m.level2_headings, m.wikilinks, m.refs, m.citation_templates) == (1, 1, 1, 1)
    m = parse_wikitext_markers(SNIPPETS[4])
    assert m.has_infobox and m.categories == 1 and m.noncitation_templates == 0
    assert m.images == 1


def test_unclosed_constructs_not_counted():
    m = parse_wikitext_markers("{{unclosed [[Link]] and [[broken")
    assert m.noncitation_templates == 0 and m.wikilinks == 1


def test_external_links():
    m = parse_wikitext_markers("[http://example.org Example] and [https://x.y] [not a link]")
    assert m.external_links == 2


def test_empty_markers():
    assert parse_wikitext_markers("") == MarkerCounts()


def test_template_helpers():
    assert normalize_template_name(" Template:Cite_web ") == "cite web"
    assert split_top_level("a|b={{x|y}}|[[c|d]]") == ["a", "b={{x|y}}", "[[c|d]]"]
    tpls = iter_templates("{{A|{{B}}}} {{C}}")
    assert [(t.name, t.depth) for t in tpls] == [("a", 0), ("b", 1), ("c", 0)]
    assert tpls[0].params() == ["{{B}}"]


@pytest.mark.parametrize("target,ns", [("Category:X", "category"), ("File:a.png", "file"),
                                       ("image:b.jpg", "image"), ("Paris", None),
                                       (":Category:X", None), ("de:Berlin", "de"),
                                       ("Star Wars: A New Hope", None)])
def test_link_namespace(target, ns):
    assert link_namespace(target) == ns


def test_plain_text():
    text = ("== Head ==\n'''Paris''' is the [[capital city|capital]] of [[France]]."
            "<ref>{{cite web|title=x}}</ref> {{citation needed}}\n"
            "[[Category:Cities]] <!-- note -->\n* It is [http://x.org large].")
    assert plain_text(text) == "Paris is the capital of France.\nIt is large."


atoms = st.sampled_from(["word ", "[[L]]", "[[Category:C]]", "{{t}}", "{{cite x}}", "<ref>r</ref>",
                         "\n== H ==\n", "[[File:f|c]]", "{{Infobox}}"])


@st.composite
def balanced(draw, depth=0):
    parts = draw(st.lists(atoms, max_size=6))
    if depth < 3 and draw(st.booleans()):
        inner = draw(balanced(depth + 1))
        parts.append("{{wrap|" + inner + "}}")
    return "".join(parts)


@given(balanced())
def test_generated_snippets_match_reference(text):
    got = parse_wikitext_markers(text)
    for key, value in reference_markers(text).items():
        assert getattr(got, key) == value, key
