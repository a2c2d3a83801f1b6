"""Tokenization, tweet normalization and vocabulary handling.

Everything downstream (rule matching, serialization, the model) works on the
token sequences produced here, so scores are only comparable within this
toolkit.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataError

PAD, BOS, EOS, SEP, UNK, CLS = "[PAD]", "[BOS]", "[EOS]", "[SEP]", "[UNK]", "[CLS]"
SPECIAL_TOKENS = (PAD, BOS, EOS, SEP, UNK, CLS)
PAD_ID, BOS_ID, EOS_ID, SEP_ID, UNK_ID, CLS_ID = range(6)

# Tokens that survive tokenization verbatim (case preserved, never split).
PLACEHOLDERS = frozenset({"@USER", "HTTPURL", *SPECIAL_TOKENS})

_MENTION_RE = re.compile(r"@\w+")
_URL_RE = re.compile(r"(?:https?://\S+|www\.\S+)")
_WORD_OR_PUNCT = re.compile(r"\w+|[^\w\s]")

# Bundled emoji -> name-string table (underscore-joined so each maps to one
# token). Deliberately small; unmapped codepoints pass through untouched.
EMOJI_NAMES = {
    "\U0001f600": "grinning_face",
    "\U0001f601": "beaming_face",
    "\U0001f602": "face_with_tears_of_joy",
    "\U0001f603": "grinning_face_with_big_eyes",
    "\U0001f604": "grinning_face_with_smiling_eyes",
    "\U0001f605": "grinning_face_with_sweat",
    "\U0001f606": "grinning_squinting_face",
    "\U0001f607": "smiling_face_with_halo",
    "\U0001f609": "winking_face",
    "\U0001f60a": "smiling_face_with_smiling_eyes",
    "\U0001f60d": "smiling_face_with_heart_eyes",
    "\U0001f60e": "smiling_face_with_sunglasses",
    "\U0001f610": "neutral_face",
    "\U0001f612": "unamused_face",
    "\U0001f614": "pensive_face",
    "\U0001f618": "face_blowing_a_kiss",
    "\U0001f61a": "kissing_face_with_closed_eyes",
    "\U0001f61b": "face_with_tongue",
    "\U0001f61c": "winking_face_with_tongue",
    "\U0001f61e": "disappointed_face",
    "\U0001f620": "angry_face",
    "\U0001f621": "pouting_face",
    "\U0001f622": "crying_face",
    "\U0001f624": "face_with_steam_from_nose",
    "\U0001f625": "sad_but_relieved_face",
    "\U0001f628": "fearful_face",
    "\U0001f629": "weary_face",
    "\U0001f62a": "sleepy_face",
    "\U0001f62b": "tired_face",
    "\U0001f62d": "loudly_crying_face",
    "\U0001f631": "face_screaming_in_fear",
    "\U0001f633": "flushed_face",
    "\U0001f637": "face_with_medical_mask",
    "\U0001f641": "slightly_frowning_face",
    "\U0001f642": "slightly_smiling_face",
    "\U0001f643": "upside_down_face",
    "\U0001f644": "face_with_rolling_eyes",
    "\U0001f923": "rolling_on_the_floor_laughing",
    "\U0001f97a": "pleading_face",
    "\U0001f914": "thinking_face",
    "\U0001f44d": "thumbs_up",
    "\U0001f44e": "thumbs_down",
    "\U0001f494": "broken_heart",
    "❤️": "red_heart",
    "❤": "red_heart",
    "\U0001f525": "fire",
    "\U0001f389": "party_popper",
}


def tokenize(s: str) -> list[str]:
    """Lowercase and split on whitespace, with punctuation chars as their own
    tokens. @USER / HTTPURL placeholders and reserved tokens pass through
    verbatim."""
    out: list[str] = []
    for chunk in s.split():
        if chunk in PLACEHOLDERS:
            out.append(chunk)
        else:
            out.extend(_WORD_OR_PUNCT.findall(chunk.lower()))
    return out


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def normalize_tweet(s: str) -> str:
    """Map user mentions to @USER, URLs to HTTPURL and known emoji to their
    name strings."""
    s = _URL_RE.sub("HTTPURL", s)
    s = _MENTION_RE.sub("@USER", s)
    for emoji in sorted(EMOJI_NAMES, key=len, reverse=True):
        if emoji in s:
            s = s.replace(emoji, " " + EMOJI_NAMES[emoji] + " ")
    return " ".join(s.split())


@dataclass(frozen=True)
class Vocabulary:
    """Token <-> id map with reserved ids 0..5 for the special tokens."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.tokens[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise DataError("vocabulary must start with the reserved tokens")
        index = {t: i for i, t in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise DataError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        idx = self._index
        return [idx.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        out = []
        for i in ids:
            if not 0 <= i < len(self.tokens):
                raise DataError(f"token id {i} out of range for vocabulary of size {len(self.tokens)}")
            out.append(self.tokens[i])
        return out

    def content_hash(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for t in self.tokens:
                f.write(t + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f]
        while tokens and tokens[-1] == "":
            tokens.pop()
        return cls(tuple(tokens))


def build_vocab(corpus: Iterable[Sequence[str]], min_freq: int = 1) -> Vocabulary:
    """Build a vocabulary from an iterable of token sequences.

    Tokens occurring fewer than min_freq times are left out (they encode to
    [UNK]). Ordering is by descending frequency, ties broken alphabetically,
    so construction is deterministic.
    """
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    counts = Counter()
    for tokens in corpus:
        counts.update(tokens)
    for special in SPECIAL_TOKENS:
        counts.pop(special, None)
    kept = sorted(
        (t for t, c in counts.items() if c >= min_freq),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(SPECIAL_TOKENS + tuple(kept))
