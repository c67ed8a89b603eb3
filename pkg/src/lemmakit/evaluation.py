"""Evaluation harness: lemma success rate, template exact match, instantiation
rate, per-theory breakdowns, report ensembles, deduplication and conjecture
categorization.

Suites run task-parallel under a bounded worker pool, but the report is
assembled single-threaded in task-id order, so the output is identical for any
worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .corpus import CorpusRecord
from .instantiation import Budget, Conjecture, InstantiationResult, instantiate
from .proposer import ProposalRequest, ProposalSet, TransportError
from .quickspec import InterpretedSignature, NotTestable, find_counterexample
from .templates import Template, Whitelist, abstract
from .terms import LemmakitError, Term, alpha_equal

CATEGORY_GOLD = "gold"
CATEGORY_FALSE = "false_by_testing"
CATEGORY_UNKNOWN = "unknown"


class TaskSetMismatch(LemmakitError):
    pass


@dataclass(frozen=True)
class EvalTask:
    record: CorpusRecord
    gold_template: Template
    mode: str = "types+defs"
    k: int = 5


def make_task(
    record: CorpusRecord,
    mode: str = "types+defs",
    k: int = 5,
    w: Whitelist | None = None,
) -> EvalTask:
    return EvalTask(
        record=record, gold_template=abstract(record.term, w), mode=mode, k=k
    )


@dataclass
class TaskResult:
    id: str
    theory: str
    proposed_templates: list[str] = field(default_factory=list)
    template_exact_match: bool = False
    lemma_success: bool = False
    conjecture_count: int = 0
    timed_out: bool = False
    capped: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "theory": self.theory,
            "proposed_templates": list(self.proposed_templates),
            "template_exact_match": self.template_exact_match,
            "lemma_success": self.lemma_success,
            "conjecture_count": self.conjecture_count,
            "timed_out": self.timed_out,
            "capped": self.capped,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TaskResult":
        return cls(
            id=d["id"],
            theory=d["theory"],
            proposed_templates=list(d.get("proposed_templates", [])),
            template_exact_match=d["template_exact_match"],
            lemma_success=d["lemma_success"],
            conjecture_count=d.get("conjecture_count", 0),
            timed_out=d.get("timed_out", False),
            capped=d.get("capped", False),
            error=d.get("error"),
        )


@dataclass
class EvalReport:
    per_task: list[TaskResult]
    lemma_success_rate: float
    template_match_rate: float
    per_theory: dict[str, float]
    instantiation_rate: float | None = None
    categories: dict[str, int] | None = None
    errored_tasks: int = 0
    strict_denominator: bool = False

    def to_dict(self) -> dict:
        aggregates = {
            "lemma_success_rate": self.lemma_success_rate,
            "template_match_rate": self.template_match_rate,
            "errored_tasks": self.errored_tasks,
            "strict_denominator": self.strict_denominator,
        }
        if self.instantiation_rate is not None:
            aggregates["instantiation_rate"] = self.instantiation_rate
        out = {
            "aggregates": aggregates,
            "per_theory": dict(sorted(self.per_theory.items())),
            "per_task": [r.to_dict() for r in self.per_task],
        }
        if self.categories is not None:
            out["categories"] = dict(sorted(self.categories.items()))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        agg = d["aggregates"]
        return cls(
            per_task=[TaskResult.from_dict(r) for r in d["per_task"]],
            lemma_success_rate=agg["lemma_success_rate"],
            template_match_rate=agg["template_match_rate"],
            per_theory=dict(d.get("per_theory", {})),
            instantiation_rate=agg.get("instantiation_rate"),
            categories=d.get("categories"),
            errored_tasks=agg.get("errored_tasks", 0),
            strict_denominator=agg.get("strict_denominator", False),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def evaluate_task(task: EvalTask, proposer, budget: Budget | None = None) -> TaskResult:
    """Run one gold-lemma regeneration task.

    `proposer` is a callable ProposalRequest -> ProposalSet.  Template exact
    match compares canonical strings; lemma success holds when any conjecture
    from any proposed template is alpha-equivalent to the gold term.
    Transport errors mark the task errored rather than raising.
    """
    if budget is None:
        budget = Budget()
    result = TaskResult(id=task.record.id, theory=task.record.theory)
    req = ProposalRequest(
        symbols=task.record.symbols, mode=task.mode, k=task.k
    )
    try:
        proposals: ProposalSet = proposer(req)
    except TransportError as e:
        result.error = str(e)
        return result

    gold_canonical = task.gold_template.canonical
    candidates = list(task.record.symbols)
    for tpl in proposals.templates():
        result.proposed_templates.append(tpl.canonical)
        if tpl.canonical == gold_canonical:
            result.template_exact_match = True
        inst: InstantiationResult = instantiate(tpl, candidates, budget)
        result.conjecture_count += len(inst.conjectures)
        result.timed_out = result.timed_out or inst.timed_out
        result.capped = result.capped or inst.capped
        if not result.lemma_success:
            for conj in inst.conjectures:
                if alpha_equal(conj.term, task.record.term):
                    result.lemma_success = True
                    break
    return result


def _aggregate(
    results: list[TaskResult], strict_denominator: bool
) -> tuple[float, float, dict[str, float], int]:
    errored = sum(1 for r in results if r.error is not None)
    if strict_denominator:
        counted = [r for r in results if r.error is None]
    else:
        counted = results
    n = len(counted)
    success_rate = sum(r.lemma_success for r in counted) / n if n else 0.0
    match_rate = sum(r.template_exact_match for r in counted) / n if n else 0.0
    per_theory: dict[str, float] = {}
    theories = sorted({r.theory for r in counted})
    for th in theories:
        group = [r for r in counted if r.theory == th]
        per_theory[th] = sum(r.lemma_success for r in group) / len(group)
    return success_rate, match_rate, per_theory, errored


def evaluate_suite(
    tasks: list[EvalTask],
    proposer,
    budget: Budget | None = None,
    workers: int = 1,
    strict_denominator: bool = False,
) -> EvalReport:
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        results = [evaluate_task(t, proposer, budget) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda t: evaluate_task(t, proposer, budget), tasks)
            )
    results.sort(key=lambda r: r.id)
    success, match, per_theory, errored = _aggregate(results, strict_denominator)
    return EvalReport(
        per_task=results,
        lemma_success_rate=success,
        template_match_rate=match,
        per_theory=per_theory,
        errored_tasks=errored,
        strict_denominator=strict_denominator,
    )


def instantiation_rate(tasks: list[EvalTask], budget: Budget | None = None) -> float:
    """Fraction of tasks whose gold template, instantiated with the record's
    own symbols, recovers a term alpha-equivalent to the gold lemma."""
    if not tasks:
        return 0.0
    hits = 0
    for task in tasks:
        inst = instantiate(task.gold_template, list(task.record.symbols), budget)
        if any(alpha_equal(c.term, task.record.term) for c in inst.conjectures):
            hits += 1
    return hits / len(tasks)


def combine_reports(reports: list[EvalReport]) -> EvalReport:
    """Ensemble union: per-task OR of successes across reports covering the
    same task ids; aggregates recomputed."""
    if not reports:
        raise ValueError("need at least one report")
    base_ids = [r.id for r in reports[0].per_task]
    for rep in reports[1:]:
        if [r.id for r in rep.per_task] != base_ids:
            raise TaskSetMismatch("reports cover different task id sets")
    combined: list[TaskResult] = []
    for i, tid in enumerate(base_ids):
        rows = [rep.per_task[i] for rep in reports]
        templates: list[str] = []
        for row in rows:
            for t in row.proposed_templates:
                if t not in templates:
                    templates.append(t)
        combined.append(
            TaskResult(
                id=tid,
                theory=rows[0].theory,
                proposed_templates=templates,
                template_exact_match=any(r.template_exact_match for r in rows),
                lemma_success=any(r.lemma_success for r in rows),
                conjecture_count=sum(r.conjecture_count for r in rows),
                timed_out=any(r.timed_out for r in rows),
                capped=any(r.capped for r in rows),
                error=next((r.error for r in rows if r.error), None)
                if all(r.error for r in rows)
                else None,
            )
        )
    strict = reports[0].strict_denominator
    success, match, per_theory, errored = _aggregate(combined, strict)
    return EvalReport(
        per_task=combined,
        lemma_success_rate=success,
        template_match_rate=match,
        per_theory=per_theory,
        errored_tasks=errored,
        strict_denominator=strict,
    )


def dedupe(conjectures: list[Conjecture]) -> tuple[list[Conjecture], int]:
    """Drop alpha-equivalent duplicates, keeping the first in input order.

    Returns the survivors and the number removed.
    """
    kept: list[Conjecture] = []
    removed = 0
    for conj in conjectures:
        if any(alpha_equal(conj.term, k.term) for k in kept):
            removed += 1
            continue
        kept.append(conj)
    return kept, removed


def categorize(
    conjectures: list[Conjecture],
    gold: Term,
    interp: InterpretedSignature | None = None,
    tests: int = 400,
    seed: int = 0,
) -> tuple[list[str], dict[str, int]]:
    """Label each conjecture gold / false-by-testing / unknown.

    A conjecture is false-by-testing when an interpretation is supplied, the
    term is ground-testable over it, and a counterexample shows up within
    `tests` sampled valuations.  Everything else that is not the gold lemma is
    unknown (this build has no prover to separate "provable" from "open").
    """
    labels: list[str] = []
    for conj in conjectures:
        if alpha_equal(conj.term, gold):
            labels.append(CATEGORY_GOLD)
            continue
        label = CATEGORY_UNKNOWN
        if interp is not None:
            try:
                cex = find_counterexample(conj.term, interp, tests, seed)
            except NotTestable:
                cex = None
            if cex is not None:
                label = CATEGORY_FALSE
        labels.append(label)
    counts = {
        CATEGORY_GOLD: labels.count(CATEGORY_GOLD),
        CATEGORY_FALSE: labels.count(CATEGORY_FALSE),
        CATEGORY_UNKNOWN: labels.count(CATEGORY_UNKNOWN),
    }
    return labels, counts
