"""Evaluation metrics: multi-reference corpus BLEU, macro-F1 and Pearson r.

BLEU follows the original corpus-level definition: geometric mean of clipped
modified n-gram precisions (n = 1..4) times a brevity penalty, with
max-over-references clipping and the closest-reference-length rule. Corpus
BLEU is unsmoothed; the sentence-level variant (debug output) applies add-one
smoothing for n >= 2.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DataError

Tokens = Sequence[str]


@dataclass
class EvalReport:
    metric: str
    value: float
    n_examples: int
    config: dict = field(default_factory=dict)
    per_example: list | None = None

    def to_json_line(self) -> str:
        payload = {
            "metric": self.metric,
            "value": self.value,
            "n_examples": self.n_examples,
            "config": self.config,
        }
        if self.per_example is not None:
            payload["per_example"] = self.per_example
        return json.dumps(payload, sort_keys=True)


def format_report_table(reports: Sequence[EvalReport]) -> str:
    """Human-readable fixed-width table for a list of reports."""
    header = f"{'metric':<14} {'value':>10} {'n':>6}  config"
    lines = [header, "-" * len(header)]
    for r in reports:
        cfg = json.dumps(r.config, sort_keys=True) if r.config else ""
        lines.append(f"{r.metric:<14} {r.value:>10.4f} {r.n_examples:>6}  {cfg}")
    return "\n".join(lines)


def _ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_statistics(hypotheses: Sequence[Tokens], reference_sets: Sequence[Sequence[Tokens]], max_n: int = 4) -> dict:
    """Pooled corpus statistics: clipped matches and totals per n, plus the
    hypothesis/reference length sums for the brevity penalty."""
    if not hypotheses:
        raise DataError("corpus BLEU needs at least one hypothesis")
    if len(hypotheses) != len(reference_sets):
        raise DataError(
            f"hypothesis/reference count mismatch: {len(hypotheses)} vs {len(reference_sets)}"
        )
    matches = [0] * max_n
    totals = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, refs in zip(hypotheses, reference_sets):
        if not refs:
            raise DataError("empty reference set")
        hyp = list(hyp)
        refs = [list(r) for r in refs]
        hyp_len += len(hyp)
        # Closest reference length; ties broken toward the shorter reference.
        ref_len += min((abs(len(r) - len(hyp)), len(r)) for r in refs)[1]
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            if not hyp_counts:
                continue
            max_ref: Counter = Counter()
            for r in refs:
                for ng, c in _ngram_counts(r, n).items():
                    if c > max_ref[ng]:
                        max_ref[ng] = c
            matches[n - 1] += sum(min(c, max_ref[ng]) for ng, c in hyp_counts.items())
            totals[n - 1] += sum(hyp_counts.values())
    return {"matches": matches, "totals": totals, "hyp_len": hyp_len, "ref_len": ref_len}


def _bleu_from_stats(stats: dict, max_n: int, smooth_add_one: bool) -> tuple[float, list[float], float]:
    precisions: list[float] = []
    for n in range(1, max_n + 1):
        num = stats["matches"][n - 1]
        den = stats["totals"][n - 1]
        if smooth_add_one and n >= 2:
            num, den = num + 1, den + 1
        precisions.append(num / den if den > 0 else 0.0)
    hyp_len, ref_len = stats["hyp_len"], stats["ref_len"]
    if hyp_len == 0:
        return 0.0, precisions, 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    if any(p == 0.0 for p in precisions):
        return 0.0, precisions, bp
    log_mean = sum(math.log(p) for p in precisions) / max_n
    return 100.0 * bp * math.exp(log_mean), precisions, bp


def corpus_bleu(hypotheses: Sequence[Tokens], reference_sets: Sequence[Sequence[Tokens]], max_n: int = 4) -> float:
    """Corpus BLEU in [0, 100]."""
    stats = bleu_statistics(hypotheses, reference_sets, max_n)
    score, _, _ = _bleu_from_stats(stats, max_n, smooth_add_one=False)
    return score


def corpus_bleu_report(hypotheses: Sequence[Tokens], reference_sets: Sequence[Sequence[Tokens]], max_n: int = 4) -> EvalReport:
    stats = bleu_statistics(hypotheses, reference_sets, max_n)
    score, precisions, bp = _bleu_from_stats(stats, max_n, smooth_add_one=False)
    return EvalReport(
        metric="bleu",
        value=score,
        n_examples=len(hypotheses),
        config={
            "max_n": max_n,
            "smoothing": "none",
            "precisions": precisions,
            "brevity_penalty": bp,
            "hyp_len": stats["hyp_len"],
            "ref_len": stats["ref_len"],
        },
    )


def sentence_bleu(hypothesis: Tokens, references: Sequence[Tokens], max_n: int = 4) -> float:
    """Add-one smoothed (n >= 2) sentence-level BLEU, for debugging output."""
    stats = bleu_statistics([hypothesis], [references], max_n)
    score, _, _ = _bleu_from_stats(stats, max_n, smooth_add_one=True)
    return score


def macro_f1(predictions: Sequence, golds: Sequence, labels: Sequence) -> float:
    """Unweighted mean of per-class F1 over `labels`; classes absent from both
    predictions and golds contribute 0."""
    report = macro_f1_report(predictions, golds, labels)
    return report.value


def macro_f1_report(predictions: Sequence, golds: Sequence, labels: Sequence) -> EvalReport:
    if len(predictions) != len(golds):
        raise DataError(f"length mismatch: {len(predictions)} predictions vs {len(golds)} golds")
    labels = list(labels)
    observed = set(predictions) | set(golds)
    missing = observed - set(labels)
    if missing:
        raise DataError(f"labels {sorted(missing)} observed but not declared")
    f1s = []
    absent = []
    for lab in labels:
        tp = sum(1 for p, g in zip(predictions, golds) if p == lab and g == lab)
        fp = sum(1 for p, g in zip(predictions, golds) if p == lab and g != lab)
        fn = sum(1 for p, g in zip(predictions, golds) if p != lab and g == lab)
        if tp == fp == fn == 0:
            absent.append(lab)
            f1s.append(0.0)
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    return EvalReport(
        metric="macro_f1",
        value=sum(f1s) / len(f1s) if f1s else 0.0,
        n_examples=len(golds),
        config={"labels": labels, "absent_classes": absent, "per_class_f1": f1s},
    )


def pearson_r(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation. Constant input is an error, not a silent 0."""
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise DataError("pearson_r needs at least 2 points")
    mx = sum(x) / n
    my = sum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = sum(v * v for v in dx)
    syy = sum(v * v for v in dy)
    if sxx == 0.0 or syy == 0.0:
        raise DataError("pearson_r undefined for constant input")
    sxy = sum(a * b for a, b in zip(dx, dy))
    return sxy / math.sqrt(sxx * syy)


def accuracy(predictions: Sequence, golds: Sequence) -> float:
    if len(predictions) != len(golds):
        raise DataError(f"length mismatch: {len(predictions)} vs {len(golds)}")
    if not golds:
        raise DataError("accuracy needs at least one example")
    return sum(1 for p, g in zip(predictions, golds) if p == g) / len(golds)
