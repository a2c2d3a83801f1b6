"""Declarative rewrite rules, exhaustive matching and context extraction.

Rule file format (UTF-8, one rule per line):

    id<TAB>pattern<TAB>alt1|alt2|...

`#` starts a comment line. Pattern and alternatives are space-separated
tokens; patterns match case-insensitively against whole tokens. File order is
significant: it defines first-come-first-served priority downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import DataError

# Context window default: the empirical peak of the window-size sweep.
DEFAULT_WINDOW = 3


@dataclass(frozen=True)
class Rule:
    id: str
    pattern: tuple[str, ...]
    alternatives: tuple[tuple[str, ...], ...]
    source: str = ""

    def __post_init__(self):
        if not self.pattern or any(not t for t in self.pattern):
            raise DataError(f"rule {self.id!r}: empty pattern")
        if not self.alternatives:
            raise DataError(f"rule {self.id!r}: no alternatives")
        if any(not alt or any(not t for t in alt) for alt in self.alternatives):
            raise DataError(f"rule {self.id!r}: empty alternative")
        if len(set(self.alternatives)) != len(self.alternatives):
            raise DataError(f"rule {self.id!r}: duplicate alternatives")
        object.__setattr__(self, "pattern", tuple(t.lower() for t in self.pattern))


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise DataError(f"duplicate rule id {dup!r}")

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __getitem__(self, i: int) -> Rule:
        return self.rules[i]


@dataclass(frozen=True)
class RuleMatch:
    """One occurrence of a rule in a sentence, with its context window."""

    rule_id: str
    start: int
    end: int
    matched_text: tuple[str, ...]
    context_left: tuple[str, ...]
    context_right: tuple[str, ...]
    alternatives: tuple[tuple[str, ...], ...]

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class RuleMatchSet:
    matches: tuple[RuleMatch, ...] = ()

    @property
    def count(self) -> int:
        return len(self.matches)

    def __len__(self) -> int:
        return len(self.matches)

    def __iter__(self) -> Iterator[RuleMatch]:
        return iter(self.matches)

    def __getitem__(self, i: int) -> RuleMatch:
        return self.matches[i]


def parse_rule_line(line: str, lineno: int, source: str = "") -> Rule:
    parts = line.split("\t")
    if len(parts) != 3:
        raise DataError(f"{source or 'rules'}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
    rule_id, pattern_s, alts_s = (p.strip() for p in parts)
    if not rule_id:
        raise DataError(f"{source or 'rules'}:{lineno}: empty rule id")
    pattern = tuple(pattern_s.split())
    if not pattern:
        raise DataError(f"{source or 'rules'}:{lineno}: empty pattern")
    alternatives = tuple(tuple(a.split()) for a in alts_s.split("|"))
    if any(not alt for alt in alternatives):
        raise DataError(f"{source or 'rules'}:{lineno}: empty alternative")
    try:
        return Rule(rule_id, pattern, alternatives, source=source)
    except DataError as e:
        raise DataError(f"{source or 'rules'}:{lineno}: {e}") from None


def load_rules(path) -> RuleSet:
    """Load a rule file, preserving file order (= FCFS priority)."""
    rules: list[Rule] = []
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.readlines()
    except UnicodeDecodeError as e:
        raise DataError(f"{path}: not valid UTF-8: {e}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        rules.append(parse_rule_line(line, lineno, source=str(path)))
    try:
        return RuleSet(tuple(rules))
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def save_rules(rules: RuleSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in rules:
            alts = "|".join(" ".join(alt) for alt in r.alternatives)
            f.write(f"{r.id}\t{' '.join(r.pattern)}\t{alts}\n")


def extract_context(tokens: Sequence[str], span: tuple[int, int], w: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Up to w tokens on each side of a half-open span, clipped at sentence
    boundaries."""
    start, end = span
    if w < 0:
        raise ValueError("window size must be >= 0")
    if not (0 <= start <= end <= len(tokens)):
        raise ValueError(f"span {span} out of bounds for {len(tokens)} tokens")
    left = tuple(tokens[max(0, start - w) : start])
    right = tuple(tokens[end : end + w])
    return left, right


def match_rules(tokens: Sequence[str], rules: RuleSet, w: int = DEFAULT_WINDOW) -> RuleMatchSet:
    """Every (position, rule) occurrence, including overlaps, sorted by
    (start, rule file order). Matching is case-insensitive; matched_text
    keeps the original casing."""
    if w < 0:
        raise ValueError("window size must be >= 0")
    lowered = [t.lower() for t in tokens]
    n = len(tokens)
    matches: list[RuleMatch] = []
    for start in range(n):
        for rule in rules:
            end = start + len(rule.pattern)
            if end > n:
                continue
            if tuple(lowered[start:end]) != rule.pattern:
                continue
            left, right = extract_context(tokens, (start, end), w)
            matches.append(
                RuleMatch(
                    rule_id=rule.id,
                    start=start,
                    end=end,
                    matched_text=tuple(tokens[start:end]),
                    context_left=left,
                    context_right=right,
                    alternatives=rule.alternatives,
                )
            )
    return RuleMatchSet(tuple(matches))
