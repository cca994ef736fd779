"""Wikitext marker counting and plain-text extraction.

The scanner is a single left-to-right pass with a frame stack, so nested
templates and links are handled and unbalanced markup only loses the
constructs that never close.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

CATEGORY_NS = frozenset({"category"})
IMAGE_NS = frozenset({"file", "image"})
OTHER_NS = frozenset({
    "talk", "user", "user talk", "wikipedia", "wikipedia talk", "wp", "project",
    "portal", "help", "template", "template talk", "draft", "module", "mediawiki",
    "special", "media", "wiktionary", "wikt", "commons", "wikisource", "wikiquote",
    "wikibooks", "wikinews", "wikiversity", "wikivoyage", "species", "meta", "d",
    "w", "s", "q", "b", "n", "v", "category talk", "file talk",
})
_LANG_PREFIX = re.compile(r"^[a-z]{2,3}(?:-[a-z]+)?$")
_REF_TAG = re.compile(r"<ref(?:\s[^<>]*)?>", re.I)
_URL_START = re.compile(r"\[(?:https?:|ftp:|//)", re.I)
_HEADING = re.compile(r"(=+)(.*?[^=].*?)(=+)[ \t]*$", re.M)


@dataclass(frozen=True)
class MarkerCounts:
    refs: int = 0
    wikilinks: int = 0
    external_links: int = 0
    citation_templates: int = 0
    noncitation_templates: int = 0
    categories: int = 0
    images: int = 0
    level2_headings: int = 0
    level3plus_headings: int = 0
    has_infobox: bool = False
    byte_length: int = 0


@dataclass(frozen=True)
class Template:
    name: str
    body: str
    start: int
    depth: int

    def params(self) -> list[str]:
        return split_top_level(self.body)[1:]


def normalize_template_name(raw: str) -> str:
    name = raw.strip().replace("_", " ")
    low = name.lower()
    for prefix in ("subst:", "safesubst:", "template:"):
        if low.startswith(prefix):
            name = name[len(prefix):].strip()
            low = name.lower()
    return low


def split_top_level(body: str) -> list[str]:
    """Split a template body on ``|`` not nested inside braces or brackets."""
    parts, depth, cur = [], 0, []
    i = 0
    while i < len(body):
        two = body[i:i + 2]
        if two in ("{{", "[["):
            depth += 1
            cur.append(two)
            i += 2
            continue
        if two in ("}}", "]]") and depth:
            depth -= 1
            cur.append(two)
            i += 2
            continue
        if body[i] == "|" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(body[i])
        i += 1
    parts.append("".join(cur))
    return parts


def link_namespace(target: str) -> str | None:
    """Lowercased namespace prefix of a link target, or None for article links."""
    t = target.strip()
    if t.startswith(":") or ":" not in t:
        return None
    prefix = t.split(":", 1)[0].strip().lower().replace("_", " ")
    if prefix in CATEGORY_NS or prefix in IMAGE_NS or prefix in OTHER_NS:
        return prefix
    if _LANG_PREFIX.match(prefix):
        return prefix
    return None


def _scan(text: str) -> Iterator[tuple]:
    """Yield ``(kind, start, end, depth)`` for every completed construct.

    Kinds: ``tpl`` (depth counts enclosing templates), ``link``, ``ext``,
    ``ref`` and ``heading`` (depth holds the heading level).
    """
    stack: list[list] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "<":
            if text.startswith("<!--", i):
                j = text.find("-->", i + 4)
                i = n if j < 0 else j + 3
                continue
            m = _REF_TAG.match(text, i)
            if m:
                yield ("ref", i, m.end(), 0)
                i = m.end()
                continue
        elif c == "{" and text.startswith("{{", i):
            if text.startswith("{{{", i) and not text.startswith("{{{{", i):
                stack.append(["param", i])
                i += 3
            else:
                stack.append(["tpl", i])
                i += 2
            continue
        elif c == "}" and text.startswith("}}", i):
            if text.startswith("}}}", i) and stack and stack[-1][0] == "param":
                stack.pop()
                i += 3
                continue
            k = _innermost(stack, "tpl")
            if k is not None:
                start = stack[k][1]
                del stack[k:]
                depth = sum(1 for f in stack if f[0] == "tpl")
                yield ("tpl", start, i + 2, depth)
            i += 2
            continue
        elif c == "[":
            if text.startswith("[[", i):
                stack.append(["link", i])
                i += 2
                continue
            if _URL_START.match(text, i):
                stack.append(["ext", i])
                i += 1
                continue
        elif c == "]":
            if text.startswith("]]", i):
                k = _innermost(stack, "link")
                if k is not None:
                    start = stack[k][1]
                    del stack[k:]
                    yield ("link", start, i + 2, 0)
                    i += 2
                    continue
            if stack and stack[-1][0] == "ext":
                yield ("ext", stack.pop()[1], i + 1, 0)
                i += 1
                continue
        elif c == "\n":
            while stack and stack[-1][0] == "ext":
                stack.pop()
        elif c == "=" and (i == 0 or text[i - 1] == "\n"):
            m = _HEADING.match(text, i)
            if m:
                level = min(len(m.group(1)), len(m.group(3)))
                yield ("heading", i, m.end(), level)
        i += 1


def _innermost(stack, kind):
    for k in range(len(stack) - 1, -1, -1):
        if stack[k][0] == kind:
            return k
    return None


def iter_templates(text: str) -> list[Template]:
    """All completed templates in document (start-position) order."""
    out = []
    for kind, s, e, depth in _scan(text):
        if kind == "tpl":
            body = text[s + 2:e - 2]
            name = normalize_template_name(split_top_level(body)[0])
            out.append(Template(name, body, s, depth))
    out.sort(key=lambda t: t.start)
    return out


def is_citation(name: str) -> bool:
    return name.startswith("cite") or name.startswith("citation")


def parse_wikitext_markers(text: str) -> MarkerCounts:
    """Count structural markers of an article revision.

    Citation templates and infoboxes are recognized at any depth; every
    other template counts as non-citation only when it is not nested in
    another template. Parser functions (``{{#if:...}}``) are not counted.
    Infoboxes set ``has_infobox`` and are not counted as non-citation.
    """
    c = dict(refs=0, wikilinks=0, external_links=0, citation_templates=0,
             noncitation_templates=0, categories=0, images=0,
             level2_headings=0, level3plus_headings=0)
    infobox = False
    for kind, s, e, depth in _scan(text):
        if kind == "ref":
            c["refs"] += 1
        elif kind == "ext":
            c["external_links"] += 1
        elif kind == "heading":
            if depth == 2:
                c["level2_headings"] += 1
            elif depth >= 3:
                c["level3plus_headings"] += 1
        elif kind == "link":
            target = split_top_level(text[s + 2:e - 2])[0]
            ns = link_namespace(target)
            if ns is None:
                if target.strip():
                    c["wikilinks"] += 1
            elif ns in CATEGORY_NS:
                c["categories"] += 1
            elif ns in IMAGE_NS:
                c["images"] += 1
        elif kind == "tpl":
            name = normalize_template_name(split_top_level(text[s + 2:e - 2])[0])
            if not name or name.startswith("#"):
                continue
            if is_citation(name):
                c["citation_templates"] += 1
            elif name.startswith("infobox"):
                infobox = True
            elif depth == 0:
                c["noncitation_templates"] += 1
    return MarkerCounts(has_infobox=infobox, byte_length=len(text.encode("utf-8")), **c)


_COMMENT = re.compile(r"<!--.*?(?:-->|$)", re.S)
_REF_BLOCK = re.compile(r"<ref(?:\s[^<>]*)?(?:/>|>.*?</ref\s*>)", re.S | re.I)
_INNER_TEMPLATE = re.compile(r"\{\{[^{}]*\}\}")
_TABLE = re.compile(r"^\{\|.*?^\|\}", re.S | re.M)
_INNER_LINK = re.compile(r"\[\[([^\[\]]*)\]\]")
_EXT_LINK = re.compile(r"\[(?:https?:|ftp:|//)[^\s\]]*\s*([^\]]*)\]", re.I)
_TAG = re.compile(r"<[^<>]+>")
_HEADING_LINE = re.compile(r"^=+.*?=+[ \t]*$", re.M)
_QUOTES = re.compile(r"'{2,}")
_LIST_MARK = re.compile(r"^[*#:;]+\s*", re.M)
_MAGIC = re.compile(r"__[A-Z]+__")


def _replace_link(m: re.Match) -> str:
    parts = split_top_level(m.group(1))
    if link_namespace(parts[0]) is not None:
        return ""
    return parts[-1].strip() if len(parts) > 1 else parts[0].strip().lstrip(":")


def plain_text(text: str) -> str:
    """Readable prose: templates, refs, tables and headings dropped, link text kept."""
    t = _COMMENT.sub("", text)
    t = _REF_BLOCK.sub("", t)
    while True:
        t2 = _INNER_TEMPLATE.sub("", t)
        if t2 == t:
            break
        t = t2
    t = _TABLE.sub("", t)
    while True:
        t2 = _INNER_LINK.sub(_replace_link, t)
        if t2 == t:
            break
        t = t2
    t = _EXT_LINK.sub(lambda m: m.group(1), t)
    t = _HEADING_LINE.sub("", t)
    t = _TAG.sub("", t)
    t = _QUOTES.sub("", t)
    t = _LIST_MARK.sub("", t)
    t = _MAGIC.sub("", t)
    lines = (re.sub(r"[ \t]+", " ", line).strip() for line in t.split("\n"))
    return "\n".join(line for line in lines if line)
