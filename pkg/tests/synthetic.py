"""Synthetic multi-theory corpus generator for retrieval evaluation.

20 theory families over 6 symbol-shape profiles sharing 30 distinct templates
(5 per profile).  Profiles are chosen so feasibility separates them:

  unary       u : s -> s
  binary      f : s -> s -> s
  mixed2      u + f                       (every template uses both)
  ternary     g : s -> s -> s -> s
  mixed3      f + g                       (every template uses both)
  mixed13     u + g                       (every template uses both)

A theory with only a unary symbol can instantiate exactly the 5 unary-profile
templates; a mixed theory can also instantiate the pure profiles it contains,
but its own 5 templates occur more often in the corpus, so frequency ranking
keeps them in the top 5.  Each family contributes two indexed theories and one
held-out theory.
"""

from __future__ import annotations

from lemmakit.corpus import CorpusRecord, make_datapoint, make_record
from lemmakit.terms import App, Const, Free, Signature, SignatureEntry, TCon, fun

BOOL = TCon("HOL.bool")

# profile -> (symbol kinds, number of families, lemmas per template per theory)
PROFILES = {
    "unary": (("u",), 3, 1),
    "binary": (("f",), 3, 1),
    "mixed2": (("u", "f"), 4, 3),
    "ternary": (("g",), 3, 1),
    "mixed3": (("f", "g"), 4, 3),
    "mixed13": (("u", "g"), 3, 3),
}


def _symbols(profile: str, family: str):
    sort = TCon(f"{family}.sort")
    types = {
        "u": fun(sort, sort),
        "f": fun(sort, fun(sort, sort)),
        "g": fun(sort, fun(sort, fun(sort, sort))),
    }
    kinds, _, _ = PROFILES[profile]
    entries = [
        SignatureEntry(f"{family}.{k}", types[k], f"{k} = <defn in {family}>")
        for k in kinds
    ]
    return sort, {k: e for k, e in zip(kinds, entries)}, entries


def _lemma_shapes(profile: str):
    """Five equations per profile, as (lhs, rhs) builders over symbol
    applicators and free variables x1..x4."""

    def shapes_unary(u, f, g, x):
        return [
            (u(x[1]), x[1]),
            (u(u(x[1])), x[1]),
            (u(u(x[1])), u(x[1])),
            (u(u(u(x[1]))), x[1]),
            (u(u(u(x[1]))), u(x[1])),
        ]

    def shapes_binary(u, f, g, x):
        return [
            (f(x[1], x[2]), f(x[2], x[1])),
            (f(x[1], f(x[2], x[3])), f(f(x[1], x[2]), x[3])),
            (f(x[1], x[1]), x[1]),
            (f(x[1], f(x[1], x[2])), f(x[1], x[2])),
            (f(f(x[1], x[2]), x[1]), f(x[1], x[2])),
        ]

    def shapes_mixed2(u, f, g, x):
        return [
            (u(f(x[1], x[2])), f(u(x[1]), u(x[2]))),
            (u(f(x[1], x[2])), f(x[1], x[2])),
            (f(u(x[1]), x[2]), f(x[1], u(x[2]))),
            (u(f(x[1], x[1])), u(x[1])),
            (f(u(x[1]), u(x[2])), f(x[2], x[1])),
        ]

    def shapes_ternary(u, f, g, x):
        return [
            (g(x[1], x[2], x[3]), g(x[3], x[2], x[1])),
            (g(x[1], x[2], x[3]), g(x[2], x[1], x[3])),
            (g(x[1], x[1], x[2]), g(x[1], x[2], x[2])),
            (g(x[1], x[2], x[3]), g(x[1], x[3], x[2])),
            (g(g(x[1], x[2], x[3]), x[2], x[3]), g(x[1], x[2], x[3])),
        ]

    def shapes_mixed3(u, f, g, x):
        return [
            (g(x[1], x[2], f(x[1], x[2])), f(x[1], x[2])),
            (f(g(x[1], x[2], x[3]), x[1]), g(x[1], x[2], x[3])),
            (g(f(x[1], x[1]), x[2], x[3]), g(x[1], x[2], x[3])),
            (f(g(x[1], x[1], x[1]), x[2]), f(x[1], x[2])),
            (g(x[1], f(x[2], x[3]), x[1]), g(x[1], x[2], x[3])),
        ]

    def shapes_mixed13(u, f, g, x):
        return [
            (u(g(x[1], x[2], x[3])), g(u(x[1]), x[2], x[3])),
            (u(g(x[1], x[2], x[3])), g(x[1], x[2], x[3])),
            (g(u(x[1]), x[2], x[3]), g(x[1], x[2], u(x[3]))),
            (u(g(x[1], x[1], x[2])), u(x[2])),
            (g(u(x[1]), u(x[2]), u(x[3])), g(x[1], x[2], x[3])),
        ]

    return {
        "unary": shapes_unary,
        "binary": shapes_binary,
        "mixed2": shapes_mixed2,
        "ternary": shapes_ternary,
        "mixed3": shapes_mixed3,
        "mixed13": shapes_mixed13,
    }[profile]


FREE_NAME_SETS = [("a", "b", "c", "d"), ("p", "q", "r", "s"), ("m", "n", "k", "l")]


def _theory_records(profile: str, family: str, theory: str, copies: int):
    sort, by_kind, entries = _symbols(profile, family)
    sig = Signature(entries)

    def mk_apply(kind):
        entry = by_kind.get(kind)
        if entry is None:
            return None

        def call(*args):
            out = Const(entry.name, entry.type)
            for a in args:
                out = App(out, a)
            return out

        return call

    u, f, g = mk_apply("u"), mk_apply("f"), mk_apply("g")
    eq_ty = fun(sort, fun(sort, BOOL))
    records = []
    for copy in range(copies):
        names = FREE_NAME_SETS[copy % len(FREE_NAME_SETS)]
        x = {i + 1: Free(names[i], sort) for i in range(4)}
        for j, (lhs, rhs) in enumerate(_lemma_shapes(profile)(u, f, g, x)):
            term = App(App(Const("HOL.eq", eq_ty), lhs), rhs)
            records.append(
                make_record(
                    id=f"{theory}.lemma{j}c{copy}",
                    theory=theory,
                    name=f"lemma{j}c{copy}",
                    t=term,
                    sig=sig,
                )
            )
    return records


def build_synthetic_corpus():
    """Returns (train_records, heldout_records).

    Train: 2 theories per family, every lemma repeated per the profile's copy
    count (mixed profiles dominate the frequency index).  Held out: 1 theory
    per family, one lemma per template.
    """
    train: list[CorpusRecord] = []
    heldout: list[CorpusRecord] = []
    fam_no = 0
    for profile, (_, n_families, copies) in PROFILES.items():
        for _ in range(n_families):
            fam_no += 1
            family = f"Fam{fam_no}"
            for t in (1, 2):
                train.extend(
                    _theory_records(profile, family, f"{family}.Theory{t}", copies)
                )
            heldout.extend(
                _theory_records(profile, family, f"{family}.Heldout", 1)
            )
    return train, heldout


def build_train_datapoints():
    train, _ = build_synthetic_corpus()
    return [make_datapoint(r, "types+defs", "template") for r in train]
