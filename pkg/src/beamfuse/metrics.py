"""Edit-distance error rates for word and character sequences."""

from __future__ import annotations

from typing import Sequence


def edit_distance(hyp: Sequence, ref: Sequence) -> int:
    """Levenshtein distance with unit substitution/insertion/deletion costs."""
    if len(hyp) < len(ref):
        hyp, ref = ref, hyp
    previous = list(range(len(ref) + 1))
    for i, x in enumerate(hyp, start=1):
        current = [i]
        for j, y in enumerate(ref, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (x != y)))
        previous = current
    return previous[-1]


def edit_distance_rate(hyp: Sequence, ref: Sequence) -> float:
    """Levenshtein distance normalized by the reference length."""
    if not ref:
        raise ValueError("empty reference")
    return edit_distance(hyp, ref) / len(ref)


def word_error_rate(hyp_words: Sequence[str], ref_words: Sequence[str]) -> float:
    return edit_distance_rate(list(hyp_words), list(ref_words))


def char_error_rate(hyp_text: str, ref_text: str) -> float:
    """Character-level rate over the raw text, spaces included."""
    return edit_distance_rate(list(hyp_text), list(ref_text))
