"""Corpus records, prompt formatting, datapoint construction and file-wise splits.

Interchange is JSONL so an external exporter can produce records without
depending on this package.  Record line schema:

    {"id": s, "theory": s, "name": s, "term": s-expr,
     "symbols": [{"name": s, "type": s-expr, "def": s|null}]}

Datapoint line schema:

    {"id": s, "theory": s, "mode": s, "target_kind": s, "input": s, "target": s}
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .templates import Whitelist, abstract, default_whitelist
from .terms import (
    LemmakitError,
    Signature,
    SignatureEntry,
    Term,
    const_names,
    parse_term,
    parse_type,
    render_term,
    render_type,
    typecheck,
)

MODES = ("types+defs", "types", "defs")
TARGET_KINDS = ("template", "lemma")


class FewerTheoriesThanPartitions(LemmakitError):
    pass


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    theory: str
    lemma_name: str
    term: Term
    symbols: tuple[SignatureEntry, ...]


@dataclass(frozen=True)
class Datapoint:
    id: str
    input: str
    target_kind: str
    target: str
    mode: str
    theory: str


def make_record(
    id: str,
    theory: str,
    name: str,
    t: Term,
    sig: Signature,
    w: Whitelist | None = None,
) -> CorpusRecord:
    """Record with symbols = the distinct non-whitelist constants of t, in
    first-occurrence order, with types and definitions copied from sig."""
    if w is None:
        w = default_whitelist()
    typecheck(t, sig)
    symbols = []
    for cname in const_names(t):
        if w.contains(cname):
            continue
        entry = sig[cname]
        symbols.append(entry)
    return CorpusRecord(id=id, theory=theory, lemma_name=name, term=t, symbols=tuple(symbols))


def format_symbols_prompt(symbols, mode: str) -> str:
    """The prompt string for a symbol list.

    Exact shape: `[Symbols: n1, n2] [Types: n1 : T1 ; n2 : T2]
    [Defs: n1 := D1 ;; n2 := D2]`, sections per mode; a missing definition
    renders as `<none>`; definition newlines are flattened to spaces.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    sections = [f"[Symbols: {', '.join(s.name for s in symbols)}]"]
    if mode in ("types+defs", "types"):
        types = " ; ".join(f"{s.name} : {render_type(s.type)}" for s in symbols)
        sections.append(f"[Types: {types}]")
    if mode in ("types+defs", "defs"):
        def flat(d: str | None) -> str:
            if d is None:
                return "<none>"
            return " ".join(d.splitlines())

        defs = " ;; ".join(f"{s.name} := {flat(s.definition)}" for s in symbols)
        sections.append(f"[Defs: {defs}]")
    return " ".join(sections)


def format_prompt(r: CorpusRecord, mode: str) -> str:
    return format_symbols_prompt(r.symbols, mode)


def make_datapoint(
    r: CorpusRecord, mode: str, target_kind: str, w: Whitelist | None = None
) -> Datapoint:
    if target_kind not in TARGET_KINDS:
        raise ValueError(f"unknown target kind {target_kind!r}")
    if target_kind == "template":
        target = abstract(r.term, w).canonical
    else:
        target = render_term(r.term)
    return Datapoint(
        id=r.id,
        input=format_prompt(r, mode),
        target_kind=target_kind,
        target=target,
        mode=mode,
        theory=r.theory,
    )


def split_filewise(
    records: list[CorpusRecord], ratios: tuple[float, ...], seed: int
) -> tuple[list[CorpusRecord], ...]:
    """Partition records by theory so no theory straddles two partitions.

    Theory counts approximate the ratios (floor allocation, remainders to the
    largest fractional parts); deterministic given the seed.
    """
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    theories = sorted({r.theory for r in records})
    if len(theories) < len(ratios):
        raise FewerTheoriesThanPartitions(
            f"{len(theories)} theories cannot fill {len(ratios)} partitions"
        )
    rng = random.Random(seed)
    rng.shuffle(theories)

    n = len(theories)
    raw = [n * r for r in ratios]
    counts = [int(x) for x in raw]
    remainder = n - sum(counts)
    by_frac = sorted(range(len(ratios)), key=lambda i: (raw[i] - counts[i], -i), reverse=True)
    for i in by_frac[:remainder]:
        counts[i] += 1
    # Every partition must be nonempty.
    for i in range(len(counts)):
        while counts[i] == 0:
            j = max(range(len(counts)), key=lambda k: counts[k])
            counts[j] -= 1
            counts[i] += 1

    parts: list[list[CorpusRecord]] = []
    start = 0
    for c in counts:
        chunk = set(theories[start : start + c])
        start += c
        parts.append([r for r in records if r.theory in chunk])
    return tuple(parts)


# ---------------------------------------------------------------------------
# JSONL


def record_to_dict(r: CorpusRecord) -> dict:
    return {
        "id": r.id,
        "theory": r.theory,
        "name": r.lemma_name,
        "term": render_term(r.term),
        "symbols": [
            {"name": s.name, "type": render_type(s.type), "def": s.definition}
            for s in r.symbols
        ],
    }


def record_from_dict(d: dict) -> CorpusRecord:
    return CorpusRecord(
        id=d["id"],
        theory=d["theory"],
        lemma_name=d["name"],
        term=parse_term(d["term"]),
        symbols=tuple(
            SignatureEntry(s["name"], parse_type(s["type"]), s.get("def"))
            for s in d["symbols"]
        ),
    )


def datapoint_to_dict(d: Datapoint) -> dict:
    return {
        "id": d.id,
        "theory": d.theory,
        "mode": d.mode,
        "target_kind": d.target_kind,
        "input": d.input,
        "target": d.target,
    }


def datapoint_from_dict(d: dict) -> Datapoint:
    return Datapoint(
        id=d["id"],
        theory=d["theory"],
        mode=d["mode"],
        target_kind=d["target_kind"],
        input=d["input"],
        target=d["target"],
    )


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise LemmakitError(f"{path}:{i}: malformed JSON line: {e}") from e
    return out


def write_jsonl(path, dicts) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dicts:
            fh.write(json.dumps(d, sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def load_records(path) -> list[CorpusRecord]:
    return [record_from_dict(d) for d in read_jsonl(path)]


def save_records(path, records) -> None:
    write_jsonl(path, (record_to_dict(r) for r in records))


def load_signature(path) -> list[SignatureEntry]:
    """Signature file: JSON array of {"name", "type": s-expr, "def"|null}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [
        SignatureEntry(d["name"], parse_type(d["type"]), d.get("def")) for d in data
    ]
