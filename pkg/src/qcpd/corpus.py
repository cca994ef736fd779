"""On-disk corpus format and versioned JSON documents.

A corpus directory holds ``manifest.json`` (calendar and article list),
``ground_truth.json`` and one CSV per article with columns
``month,F1..Fd,valid,is_change_point``. Floats are written with ``repr``
so a write/read cycle reproduces the matrix bit for bit.
"""
from __future__ import annotations

import csv
import json
import os
import re
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .core import MonthCalendar, QualityClass
from .features import ArticleSeries

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"
GROUND_TRUTH = "ground_truth.json"


def dump_json(obj: Any, path: str | os.PathLike | None = None) -> str:
    """Deterministic JSON text (sorted keys, fixed indent); written when ``path`` is given."""
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_json(path: str | os.PathLike, kind: str | None = None) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ValueError(f"{path}: missing schema_version")
    if doc["schema_version"] > SCHEMA_VERSION:
        raise ValueError(f"{path}: schema version {doc['schema_version']} is newer than supported")
    if kind is not None and doc.get("kind") != kind:
        raise ValueError(f"{path}: expected a {kind!r} document, got {doc.get('kind')!r}")
    return doc


def calendar_dict(cal: MonthCalendar) -> dict:
    return {"start": cal.label, "n_months": cal.n_months}


def calendar_from(d: Mapping) -> MonthCalendar:
    return MonthCalendar.parse(d["start"], int(d["n_months"]))


def _safe_name(article_id: str) -> str:
    stem = re.sub(r"[^A-Za-z0-9._-]+", "_", article_id).strip("._") or "article"
    return stem[:80]


def _file_names(ids: Sequence[str]) -> dict[str, str]:
    out, used = {}, set()
    for aid in ids:
        base = _safe_name(aid)
        name, k = base, 1
        while name.lower() in used:
            k += 1
            name = f"{base}-{k}"
        used.add(name.lower())
        out[aid] = name + ".csv"
    return out


def write_series_csv(series: ArticleSeries, path: str | os.PathLike) -> None:
    cal = series.calendar
    gt = set(series.ground_truth)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["month", *series.feature_names, "valid", "is_change_point"])
        for k in range(1, cal.n_months + 1):
            y, m = cal.year_month(k)
            w.writerow([f"{y:04d}-{m:02d}", *(repr(float(v)) for v in series.matrix[k - 1]),
                        int(series.valid[k - 1]), int(k in gt)])


def read_series_csv(path: str | os.PathLike, article_id: str, cal: MonthCalendar,
                    latest_class: QualityClass | None = None) -> ArticleSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "month" or header[-2:] != ["valid", "is_change_point"]:
        raise ValueError(f"{path}: unexpected header")
    if len(body) != cal.n_months:
        raise ValueError(f"{path}: {len(body)} rows for a {cal.n_months}-month calendar")
    names = tuple(header[1:-2])
    mat = np.array([[float(v) for v in r[1:-2]] for r in body], dtype=np.float64)
    mat = mat.reshape(cal.n_months, len(names))
    valid = np.array([r[-2] == "1" for r in body])
    gt = tuple(k for k, r in enumerate(body, 1) if r[-1] == "1")
    return ArticleSeries(article_id, cal, mat, valid, gt, latest_class, names)


def write_corpus(directory: str | os.PathLike, corpus: Sequence[ArticleSeries],
                 meta: Mapping | None = None) -> Path:
    if not corpus:
        raise ValueError("empty corpus")
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    cal = corpus[0].calendar
    if any(s.calendar != cal for s in corpus):
        raise ValueError("articles must share a calendar")
    names = _file_names([s.article_id for s in corpus])
    for s in corpus:
        write_series_csv(s, d / names[s.article_id])
    dump_json({
        "schema_version": SCHEMA_VERSION,
        "kind": "corpus",
        "calendar": calendar_dict(cal),
        "meta": dict(meta or {}),
        "articles": [{"id": s.article_id, "file": names[s.article_id],
                      "latest_class": s.latest_class.name if s.latest_class is not None else None,
                      "n_features": int(s.matrix.shape[1])} for s in corpus],
    }, d / MANIFEST)
    write_ground_truth(d / GROUND_TRUTH, corpus)
    return d


def read_corpus(directory: str | os.PathLike) -> list[ArticleSeries]:
    d = Path(directory)
    man = load_json(d / MANIFEST, "corpus")
    cal = calendar_from(man["calendar"])
    out = []
    for a in man["articles"]:
        cls = QualityClass[a["latest_class"]] if a.get("latest_class") else None
        out.append(read_series_csv(d / a["file"], a["id"], cal, cls))
    return out


def write_ground_truth(path: str | os.PathLike, corpus: Sequence[ArticleSeries]) -> None:
    dump_json({
        "schema_version": SCHEMA_VERSION,
        "kind": "ground_truth",
        "calendar": calendar_dict(corpus[0].calendar),
        "articles": {s.article_id: {"points": list(s.ground_truth), "start": s.first_valid,
                                    "n_months": s.calendar.n_months} for s in corpus},
    }, path)


def read_ground_truth(path: str | os.PathLike) -> dict[str, dict]:
    """``{article_id: {"points", "start", "n_months"}}`` from a ground-truth file or corpus dir."""
    p = Path(path)
    if p.is_dir():
        p = p / GROUND_TRUTH
    return load_json(p, "ground_truth")["articles"]


def predictions_doc(run: Mapping, predictions: Mapping[str, Sequence[int]]) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "predictions", "run": dict(run),
            "predictions": {k: [int(p) for p in v] for k, v in predictions.items()}}


def read_predictions(path: str | os.PathLike) -> tuple[dict, dict[str, tuple[int, ...]]]:
    doc = load_json(path, "predictions")
    return doc["run"], {k: tuple(v) for k, v in doc["predictions"].items()}
