"""Word-level lemma accuracy and macro-averaged error rates."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .conllu import Treebank


class TokenizationMismatch(ValueError):
    pass


@dataclass(frozen=True)
class EvalResult:
    name: str
    total: int
    correct: int
    excluded: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def error_rate(self) -> float:
        return 1.0 - self.accuracy


@dataclass(frozen=True)
class GroupSummary:
    name: str
    members: tuple = field(default=())

    @property
    def macro_error_rate(self) -> float:
        return sum(r.error_rate for r in self.members) / len(self.members)


def evaluate(pred: Treebank, gold: Treebank, name: str | None = None) -> EvalResult:
    """Exact-match lemma accuracy over tokens with a gold lemma."""
    if len(pred.sentences) != len(gold.sentences):
        raise TokenizationMismatch(f"sentence counts differ: {len(pred.sentences)} predicted vs {len(gold.sentences)} gold")
    total = correct = excluded = 0
    for n, (ps, gs) in enumerate(zip(pred.sentences, gold.sentences), start=1):
        if len(ps.tokens) != len(gs.tokens):
            raise TokenizationMismatch(f"sentence {n}: {len(ps.tokens)} predicted vs {len(gs.tokens)} gold tokens")
        for pt, gt in zip(ps.tokens, gs.tokens):
            if pt.form != gt.form:
                raise TokenizationMismatch(f"sentence {n}, token {gt.id}: form {pt.form!r} vs gold {gt.form!r}")
            if gt.lemma is None:
                excluded += 1
                continue
            total += 1
            correct += pt.lemma == gt.lemma
    return EvalResult(name if name is not None else gold.name, total, correct, excluded)


def macro_average(results, name: str = "all") -> GroupSummary:
    results = tuple(results)
    if not results:
        raise ValueError("macro average over zero treebanks")
    return GroupSummary(name, results)


def relative_error_reduction(base: float, ours: float) -> float | None:
    """(base - ours) / base; None when the baseline makes no errors."""
    if base == 0:
        return None
    return (base - ours) / base


def results_csv(results, summaries=()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["treebank", "tokens", "correct", "accuracy", "error_rate"])
    for r in results:
        w.writerow([r.name, r.total, r.correct, f"{r.accuracy:.4f}", f"{100 * r.error_rate:.2f}"])
    for s in summaries:
        w.writerow([f"macro:{s.name}", sum(r.total for r in s.members), "", "", f"{100 * s.macro_error_rate:.2f}"])
    return buf.getvalue()
