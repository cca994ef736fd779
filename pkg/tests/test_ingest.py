import io
from datetime import datetime, timezone

import pytest

from qcpd.core import PageHistory, PageKind, QualityClass, QualityLabelEvent, Revision
from qcpd.ingest import (
    DELETED_EDITOR,
    DumpFormatError,
    banner_class,
    extract_quality_labels,
    iter_pages,
    merge_histories,
    parse_mediawiki_xml,
    read_labels_jsonl,
    read_revisions_jsonl,
    write_labels_jsonl,
    write_revisions_jsonl,
)

NS = 'xmlns="http://www.mediawiki.org/xml/export-0.10/"'


def page(title, revisions, ns=None):
    ns_el = f"<ns>{ns}</ns>" if ns is not None else ""
    return f"<page><title>{title}</title>{ns_el}<id>1</id>{''.join(revisions)}</page>"


def revision(ts, who, text="", ip=False, deleted=False):
    if deleted:
        contrib = '<contributor deleted="deleted" />'
    elif ip:
        contrib = f"<contributor><ip>{who}</ip></contributor>"
    else:
        contrib = f"<contributor><username>{who}</username><id>7</id></contributor>"
    return (f"<revision><id>1</id><timestamp>{ts}</timestamp>{contrib}"
            f"<comment>c</comment><text xml:space=\"preserve\">{text}</text></revision>")


def doc(*pages):
    return f"<mediawiki {NS}><siteinfo><sitename>W</sitename></siteinfo>{''.join(pages)}</mediawiki>"


def utc(*a):
    return datetime(*a, tzinfo=timezone.utc)


def test_registered_user():
    [h] = parse_mediawiki_xml(doc(page("Foo", [revision("2010-01-02T03:04:05Z", "Alice", "Hi")])))
    assert h == PageHistory("Foo", (Revision(utc(2010, 1, 2, 3, 4, 5), "Alice", True,
                                             PageKind.MAIN, "Hi"),))


def test_ip_user():
    [h] = parse_mediawiki_xml(doc(page("Foo", [revision("2010-01-02T03:04:05Z", "127.0.0.1",
                                                        ip=True)])))
    r = h.main_revisions[0]
    assert (r.editor_id, r.registered) == ("127.0.0.1", False)


def test_talk_pairing_and_order():
    xml = doc(page("Talk:Foo", [revision("2011-01-01T00:00:00Z", "Bob", "{{WikiProject X|class=B}}")]),
              page("Bar", [revision("2011-02-01T00:00:00Z", "Cy")]),
              page("Foo", [revision("2010-01-01T00:00:00Z", "Ann")]))
    hs = parse_mediawiki_xml(xml)
    assert [h.article_id for h in hs] == ["Foo", "Bar"]
    foo = hs[0]
    assert len(foo.main_revisions) == 1 and len(foo.talk_revisions) == 1
    assert foo.talk_revisions[0].page_kind is PageKind.TALK
    assert foo.creation_time == utc(2010, 1, 1)


def test_namespace_element_and_other_namespaces():
    xml = doc(page("User:Zed", [revision("2010-01-01T00:00:00Z", "Zed")], ns=2),
              page("Template:Box", [revision("2010-01-01T00:00:00Z", "Zed")]),
              page("Talk:Foo", [revision("2010-01-01T00:00:00Z", "A")], ns=1),
              page("Star Wars: Episode I", [revision("2010-01-01T00:00:00Z", "A")], ns=0))
    hs = parse_mediawiki_xml(xml)
    assert [h.article_id for h in hs] == ["Foo", "Star Wars: Episode I"]


def test_deleted_contributor_and_escapes():
    xml = doc(page("Foo", [revision("2010-01-01T00:00:00Z", "", "a &lt;ref&gt; &amp; b",
                                    deleted=True)]))
    r = parse_mediawiki_xml(xml)[0].main_revisions[0]
    assert r.editor_id == DELETED_EDITOR and not r.registered
    assert r.wikitext == "a <ref> & b"


def test_unknown_elements_skipped_and_small_chunks():
    xml = doc(page("Foo", [revision("2010-01-01T00:00:00Z", "A", "x" * 50),
                           "<upload><timestamp>2000-01-01T00:00:00Z</timestamp></upload>",
                           revision("2010-01-03T00:00:00Z", "B", "é" * 40)]))
    pages = list(iter_pages(io.BytesIO(xml.encode()), chunk_size=7))
    assert [r.editor_id for r in pages[0].revisions] == ["A", "B"]
    assert pages[0].revisions[1].wikitext == "é" * 40


def test_text_stream_accepted():
    xml = doc(page("Foo", [revision("2010-01-01T00:00:00Z", "A")]))
    assert parse_mediawiki_xml(io.StringIO(xml))[0].article_id == "Foo"


def test_malformed_reports_byte_offset():
    good = doc(page("Foo", [revision("2010-01-01T00:00:00Z", "A")]))
    bad = good.replace("</title>", "</titel>")
    with pytest.raises(DumpFormatError) as e:
        parse_mediawiki_xml(bad)
    # expat points at the offending tag name
    start = bad.index("</titel>")
    assert start <= e.value.byte_offset < start + len("</titel>")


def test_jsonl_roundtrip_lossless():
    xml = doc(page("Foo", [revision("2010-01-01T00:00:00Z", "A", "line1\nline2 ünï"),
                           revision("2010-03-01T00:00:00Z", "1.2.3.4", ip=True)]),
              page("Talk:Foo", [revision("2010-02-01T00:00:00Z", "B", "{{WikiProject F|class=GA}}")]),
              page("Lonely", [revision("2011-01-01T00:00:00Z", "C", "")]))
    hs = parse_mediawiki_xml(xml)
    buf = io.StringIO()
    assert write_revisions_jsonl(hs, buf) == 4
    buf.seek(0)
    assert read_revisions_jsonl(buf) == hs


def test_jsonl_errors_name_line():
    with pytest.raises(ValueError, match="line 2"):
        read_revisions_jsonl(io.StringIO('{"article_id":"a","ts":"2010-01-01T00:00:00Z",'
                                         '"editor":"x","registered":true,"kind":"main"}\n{"bad":1}\n'))


def test_labels_jsonl_roundtrip():
    labels = {"Foo": [QualityLabelEvent(utc(2010, 1, 1), "Stub"),
                      QualityLabelEvent(utc(2011, 1, 1), "GA")]}
    buf = io.StringIO()
    write_labels_jsonl(labels, buf)
    buf.seek(0)
    assert read_labels_jsonl(buf) == labels


def talk(day, text):
    return Revision(utc(2010, 1, day), "ed", True, PageKind.TALK, text)


def test_banner_fixture():
    [ev] = extract_quality_labels([talk(1, "{{WikiProject France|class=GA|importance=high}}")])
    assert ev.raw_class == "GA" and ev.merged_class is QualityClass.AGA


def test_banner_dedup_and_normalization():
    evs = extract_quality_labels([talk(1, "{{WikiProject X|class=B}}"),
                                  talk(2, "{{WikiProject X|class=B}}"),
                                  talk(3, "{{WikiProject X|class = start }}"),
                                  talk(4, "no banner at all"),
                                  talk(5, "{{WikiProject X|class=List}}"),
                                  talk(6, "{{WikiProject X|class=Start}}")])
    assert [(e.timestamp.day, e.raw_class) for e in evs] == [(1, "B"), (3, "Start")]


def test_banner_first_in_document_order():
    text = ("{{WikiProject banner shell|class=|1=\n{{WikiProject A|class=C}}\n"
            "{{WikiProject B|class=FA}}}}")
    assert banner_class(text) == "C"
    assert banner_class("{{Other|class=FA}}") is None
    assert banner_class("{{WPBS|CLASS=fa}}") == "FA"


def test_merge_histories():
    a = PageHistory("Foo", (Revision(utc(2010, 1, 1), "a", True, PageKind.MAIN),))
    b = PageHistory("Foo", (), (Revision(utc(2009, 1, 1), "b", True, PageKind.TALK),))
    [m] = merge_histories([a, b])
    assert len(m.main_revisions) == 1 and len(m.talk_revisions) == 1
    assert m.creation_time == utc(2009, 1, 1)
