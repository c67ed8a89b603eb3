import json
import random

import pytest

from lemmakit.corpus import (
    FewerTheoriesThanPartitions,
    CorpusRecord,
    Datapoint,
    datapoint_from_dict,
    datapoint_to_dict,
    format_prompt,
    format_symbols_prompt,
    load_records,
    make_datapoint,
    make_record,
    read_jsonl,
    record_from_dict,
    record_to_dict,
    save_records,
    split_filewise,
)
from lemmakit.templates import abstract, parse_template
from lemmakit.terms import (
    LemmakitError,
    Signature,
    SignatureEntry,
    TCon,
    TVar,
    alpha_equal,
    fun,
    parse_term,
    render_type,
)

OCTO = TCon("Octonions.octo")


@pytest.fixture
def distrib_record(lemma_distrib_left, octo_signature):
    return make_record(
        id="octo.distrib",
        theory="Octonions",
        name="octo_distrib_left",
        t=lemma_distrib_left,
        sig=octo_signature,
    )


class TestMakeRecord:
    def test_symbols_in_first_occurrence_order(self, distrib_record):
        assert [s.name for s in distrib_record.symbols] == [
            "Octonions.octo_times",
            "Octonions.octo_plus",
        ]

    def test_whitelist_only_term(self):
        eq = parse_term(
            '(app (app (const "HOL.eq" (tc "fun" (tv "a") (tc "fun" (tv "a")'
            ' (tc "HOL.bool")))) (free "x" (tv "a"))) (free "x" (tv "a")))'
        )
        r = make_record("t.0", "T", "refl", eq, Signature([]))
        assert r.symbols == ()

    def test_repeated_constant_listed_once(self, lemma_assoc_plus, octo_signature):
        r = make_record("t.1", "T", "assoc", lemma_assoc_plus, octo_signature)
        assert [s.name for s in r.symbols] == ["Octonions.octo_plus"]


class TestFormatPrompt:
    def test_full_mode(self, distrib_record):
        got = format_prompt(distrib_record, "types+defs")
        binop = render_type(fun(OCTO, fun(OCTO, OCTO)))
        expected = (
            "[Symbols: Octonions.octo_times, Octonions.octo_plus] "
            f"[Types: Octonions.octo_times : {binop} ; "
            f"Octonions.octo_plus : {binop}] "
            "[Defs: Octonions.octo_times := octo_times a b = Octo (Re a * Re b - ...) ... ;; "
            "Octonions.octo_plus := octo_plus a b = Octo (Re a + Re b) ...]"
        )
        assert got == expected

    def test_types_mode_has_no_defs(self, distrib_record):
        got = format_prompt(distrib_record, "types")
        assert "[Defs:" not in got and "[Types:" in got

    def test_defs_mode_has_no_types(self, distrib_record):
        got = format_prompt(distrib_record, "defs")
        assert "[Types:" not in got and "[Defs:" in got

    def test_missing_def_renders_none(self):
        s = SignatureEntry("X.f", fun(OCTO, OCTO), None)
        assert "X.f := <none>" in format_symbols_prompt([s], "defs")

    def test_newlines_flattened(self):
        s = SignatureEntry("X.f", fun(OCTO, OCTO), "line one\nline two")
        assert "X.f := line one line two" in format_symbols_prompt([s], "defs")

    def test_empty_symbols(self):
        assert format_symbols_prompt([], "types") == "[Symbols: ] [Types: ]"

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            format_symbols_prompt([], "nonsense")


class TestMakeDatapoint:
    def test_template_target(self, distrib_record, lemma_distrib_left):
        dp = make_datapoint(distrib_record, "types+defs", "template")
        assert dp.target == abstract(lemma_distrib_left).canonical
        assert parse_template(dp.target) == abstract(lemma_distrib_left)

    def test_lemma_target_round_trips(self, distrib_record, lemma_distrib_left):
        dp = make_datapoint(distrib_record, "types", "lemma")
        assert alpha_equal(parse_term(dp.target), lemma_distrib_left)

    def test_unknown_kind(self, distrib_record):
        with pytest.raises(ValueError):
            make_datapoint(distrib_record, "types", "proof")


def _records(n_theories, per_theory=3):
    sig = Signature([SignatureEntry("X.f", fun(OCTO, fun(OCTO, OCTO)), None)])
    term = parse_term(
        '(app (app (const "HOL.eq" (tc "fun" (tc "Octonions.octo")'
        ' (tc "fun" (tc "Octonions.octo") (tc "HOL.bool"))))'
        ' (app (app (const "X.f" (tc "fun" (tc "Octonions.octo")'
        ' (tc "fun" (tc "Octonions.octo") (tc "Octonions.octo"))))'
        ' (free "a" (tc "Octonions.octo"))) (free "b" (tc "Octonions.octo"))))'
        ' (free "a" (tc "Octonions.octo")))'
    )
    out = []
    for t in range(n_theories):
        for i in range(per_theory):
            out.append(
                make_record(f"T{t}.l{i}", f"T{t}", f"l{i}", term, sig)
            )
    return out


class TestSplit:
    def test_ratio_counts(self):
        parts = split_filewise(_records(10), (0.8, 0.1, 0.1), seed=7)
        theory_counts = [len({r.theory for r in p}) for p in parts]
        assert theory_counts == [8, 1, 1]

    def test_deterministic(self):
        a = split_filewise(_records(10), (0.8, 0.1, 0.1), seed=3)
        b = split_filewise(_records(10), (0.8, 0.1, 0.1), seed=3)
        assert [[r.id for r in p] for p in a] == [[r.id for r in p] for p in b]

    def test_theory_closed_partition(self):
        records = _records(9)
        parts = split_filewise(records, (0.5, 0.3, 0.2), seed=11)
        seen = {}
        total = 0
        for i, p in enumerate(parts):
            for r in p:
                total += 1
                assert seen.setdefault(r.theory, i) == i
        assert total == len(records)

    def test_too_few_theories(self):
        with pytest.raises(FewerTheoriesThanPartitions):
            split_filewise(_records(2), (0.5, 0.3, 0.2), seed=0)

    def test_bad_ratios(self):
        with pytest.raises(ValueError):
            split_filewise(_records(5), (0.5, 0.6), seed=0)


class TestJsonl:
    def test_record_round_trip(self, distrib_record, tmp_path):
        path = tmp_path / "corpus.jsonl"
        save_records(path, [distrib_record])
        loaded = load_records(path)
        assert loaded == [distrib_record]

    def test_datapoint_round_trip(self, distrib_record):
        dp = make_datapoint(distrib_record, "types", "template")
        assert datapoint_from_dict(datapoint_to_dict(dp)) == dp

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"ok": 1}\nnot json\n')
        with pytest.raises(LemmakitError) as exc:
            read_jsonl(path)
        assert ":2:" in str(exc.value)

    def test_record_dict_schema(self, distrib_record):
        d = record_to_dict(distrib_record)
        assert set(d) == {"id", "theory", "name", "term", "symbols"}
        assert set(d["symbols"][0]) == {"name", "type", "def"}
