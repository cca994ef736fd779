"""Ingestion: MediaWiki XML export fragments, revision/label JSONL, talk banners."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping, Sequence
from xml.parsers import expat

from .core import (
    PageHistory,
    PageKind,
    QualityLabelEvent,
    Revision,
    format_timestamp,
    normalize_raw_class,
    parse_timestamp,
)
from .wikitext import CATEGORY_NS, IMAGE_NS, OTHER_NS, iter_templates, split_top_level

TALK_PREFIX = "Talk:"
DELETED_EDITOR = "(deleted)"


class DumpFormatError(ValueError):
    """Malformed XML; ``byte_offset`` points into the input stream."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} at byte {byte_offset}")
        self.byte_offset = byte_offset


@dataclass
class RawPage:
    title: str = ""
    ns: str | None = None
    revisions: list[Revision] = field(default_factory=list)

    @property
    def kind(self) -> PageKind | None:
        if self.ns is not None:
            return {"0": PageKind.MAIN, "1": PageKind.TALK}.get(self.ns.strip())
        if self.title.startswith(TALK_PREFIX):
            return PageKind.TALK
        prefix = self.title.split(":", 1)[0].strip().lower() if ":" in self.title else ""
        if prefix in OTHER_NS or prefix in CATEGORY_NS or prefix in IMAGE_NS:
            return None
        return PageKind.MAIN

    @property
    def subject(self) -> str:
        if self.kind is PageKind.TALK and self.title.startswith(TALK_PREFIX):
            return self.title[len(TALK_PREFIX):]
        return self.title


class _DumpHandler:
    _CAPTURE = {
        ("page", "title"), ("page", "ns"), ("revision", "timestamp"),
        ("contributor", "username"), ("contributor", "ip"), ("revision", "text"),
    }

    def __init__(self):
        self.stack: list[str] = []
        self.buf: list[str] | None = None
        self.page: RawPage | None = None
        self.rev: dict | None = None
        self.done: list[RawPage] = []

    @staticmethod
    def _local(name: str) -> str:
        return name.rsplit(":", 1)[-1].rsplit("}", 1)[-1]

    def start(self, name, attrs):
        name = self._local(name)
        parent = self.stack[-1] if self.stack else None
        self.stack.append(name)
        if name == "page":
            self.page = RawPage()
        elif name == "revision" and self.page is not None:
            self.rev = {"text": "", "editor": None, "ip": False}
        elif name == "contributor" and self.rev is not None and "deleted" in attrs:
            self.rev["deleted"] = True
        if (parent, name) in self._CAPTURE:
            self.buf = []

    def data(self, text):
        if self.buf is not None:
            self.buf.append(text)

    def end(self, name):
        name = self._local(name)
        self.stack.pop()
        parent = self.stack[-1] if self.stack else None
        if (parent, name) in self._CAPTURE and self.buf is not None:
            value = "".join(self.buf)
            self.buf = None
            if name == "title" and self.page is not None:
                self.page.title = value
            elif name == "ns" and self.page is not None:
                self.page.ns = value
            elif self.rev is not None:
                if name == "timestamp":
                    self.rev["timestamp"] = value
                elif name == "username":
                    self.rev["editor"] = value
                elif name == "ip":
                    self.rev["editor"] = value
                    self.rev["ip"] = True
                elif name == "text":
                    self.rev["text"] = value
        elif name == "revision" and self.rev is not None and self.page is not None:
            r = self.rev
            self.rev = None
            editor = r["editor"] or DELETED_EDITOR
            kind = self.page.kind or PageKind.MAIN
            self.page.revisions.append(Revision(
                parse_timestamp(r["timestamp"]), editor,
                registered=not r["ip"] and editor != DELETED_EDITOR,
                page_kind=kind, wikitext=r["text"]))
        elif name == "page" and self.page is not None:
            self.done.append(self.page)
            self.page = None


def iter_pages(stream: IO, chunk_size: int = 1 << 16) -> Iterator[RawPage]:
    """Stream pages out of a MediaWiki export document.

    Pages are yielded as soon as their closing tag is seen. Unknown elements
    are ignored; talk pages are recognized by ``<ns>1</ns>`` or, without a
    namespace element, by the ``Talk:`` title prefix.
    """
    h = _DumpHandler()
    p = expat.ParserCreate()
    p.buffer_text = True
    p.StartElementHandler = h.start
    p.EndElementHandler = h.end
    p.CharacterDataHandler = h.data
    while True:
        chunk = stream.read(chunk_size)
        final = not chunk
        if isinstance(chunk, str):
            chunk = chunk.encode("utf-8")
        try:
            p.Parse(chunk, final)
        except expat.ExpatError as e:
            raise DumpFormatError(expat.errors.messages[e.code], p.ErrorByteIndex) from None
        except ValueError as e:  # bad timestamp
            raise DumpFormatError(str(e), p.CurrentByteIndex) from None
        while h.done:
            yield h.done.pop(0)
        if final:
            break


def parse_mediawiki_xml(stream: IO | str | bytes) -> list[PageHistory]:
    """Page histories from an export document, talk pages paired with subjects.

    ``stream`` may be a file object or the document itself. Pages outside
    the main and talk namespaces are skipped. Output order follows the first
    appearance of each subject title.
    """
    if isinstance(stream, str):
        stream = io.BytesIO(stream.encode("utf-8"))
    elif isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    main: dict[str, list[Revision]] = {}
    talk: dict[str, list[Revision]] = {}
    order: list[str] = []
    for page in iter_pages(stream):
        kind = page.kind
        if kind is None:
            continue
        key = page.subject
        if key not in main and key not in talk:
            order.append(key)
        target = talk if kind is PageKind.TALK else main
        target.setdefault(key, []).extend(page.revisions)
    return [
        PageHistory(key,
                    tuple(sorted(main.get(key, ()), key=lambda r: r.timestamp)),
                    tuple(sorted(talk.get(key, ()), key=lambda r: r.timestamp)))
        for key in order
    ]


# -- JSONL ------------------------------------------------------------------------

def revision_record(article_id: str, rev: Revision) -> dict:
    return {"article_id": article_id, "ts": format_timestamp(rev.timestamp),
            "editor": rev.editor_id, "registered": rev.registered,
            "kind": rev.page_kind.value, "text": rev.wikitext}


def write_revisions_jsonl(histories: Iterable[PageHistory], fp: IO[str]) -> int:
    n = 0
    for h in histories:
        for rev in (*h.main_revisions, *h.talk_revisions):
            fp.write(json.dumps(revision_record(h.article_id, rev), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_revisions_jsonl(fp: IO[str]) -> list[PageHistory]:
    revs: dict[str, list[Revision]] = {}
    for lineno, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            rev = Revision(parse_timestamp(rec["ts"]), rec["editor"], bool(rec["registered"]),
                           PageKind(rec["kind"]), rec.get("text") or "")
        except (KeyError, ValueError, TypeError) as e:
            raise ValueError(f"revision record on line {lineno}: {e}") from None
        revs.setdefault(rec["article_id"], []).append(rev)
    return [PageHistory.from_revisions(aid, rs) for aid, rs in revs.items()]


def write_labels_jsonl(labels: Mapping[str, Sequence[QualityLabelEvent]], fp: IO[str]) -> int:
    n = 0
    for aid, events in labels.items():
        for ev in events:
            fp.write(json.dumps({"article_id": aid, "ts": format_timestamp(ev.timestamp),
                                 "class": ev.raw_class}) + "\n")
            n += 1
    return n


def read_labels_jsonl(fp: IO[str]) -> dict[str, list[QualityLabelEvent]]:
    out: dict[str, list[QualityLabelEvent]] = {}
    for lineno, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            ev = QualityLabelEvent(parse_timestamp(rec["ts"]), rec["class"])
        except (KeyError, ValueError, TypeError) as e:
            raise ValueError(f"label record on line {lineno}: {e}") from None
        out.setdefault(rec["article_id"], []).append(ev)
    for evs in out.values():
        evs.sort(key=lambda e: e.timestamp)
    return out


# -- assessment banners -------------------------------------------------------------

BANNER_NAMES = frozenset({"wpb", "wpbs", "wpbannermeta", "banner holder"})


def _is_banner(name: str) -> bool:
    return name.startswith("wikiproject") or name in BANNER_NAMES


def banner_class(wikitext: str) -> str | None:
    """Raw class from the first parseable ``class=`` of an assessment banner.

    Banners are templates named ``WikiProject ...`` (including the banner
    shell) or a known alias, visited in document order. Values such as
    ``List`` or an empty ``class=`` are skipped.
    """
    for tpl in iter_templates(wikitext):
        if not _is_banner(tpl.name):
            continue
        for part in split_top_level(tpl.body)[1:]:
            key, eq, value = part.partition("=")
            if eq and key.strip().lower() == "class":
                raw = normalize_raw_class(value)
                if raw is not None:
                    return raw
    return None


def extract_quality_labels(talk_revisions: Iterable[Revision]) -> list[QualityLabelEvent]:
    """Label events at the talk revisions where the banner class changes."""
    events: list[QualityLabelEvent] = []
    prev = None
    for rev in talk_revisions:
        raw = banner_class(rev.wikitext)
        if raw is None or raw == prev:
            continue
        events.append(QualityLabelEvent(rev.timestamp, raw))
        prev = raw
    return events


def merge_histories(histories: Iterable[PageHistory]) -> list[PageHistory]:
    """Merge histories sharing an article id (e.g. talk and subject in different files)."""
    revs: dict[str, list[Revision]] = {}
    for h in histories:
        revs.setdefault(h.article_id, []).extend((*h.main_revisions, *h.talk_revisions))
    return [PageHistory.from_revisions(aid, rs) for aid, rs in revs.items()]
