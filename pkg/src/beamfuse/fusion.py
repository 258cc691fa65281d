"""Character-level LM fusion scorers for label-synchronous beam search.

Three interchangeable strategies share one interface (``initial_state`` /
``score`` / ``final``): a plain character LM, a multi-level scorer that swaps
accumulated character mass for word probabilities at word boundaries, and a
prefix-tree look-ahead scorer that charges word-mass ratios while a word is
still being spelled.  ``score`` returns a natural-log value per label; a
returned value may exceed zero because boundary corrections are ratios, not
probabilities.  States are immutable and cheap to fork per hypothesis, and
repeated calls with the same state and label agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ngram import NGramModel
from .trie import PrefixTree
from .vocab import EOS, WORD_END_LABELS, Vocabulary


class EmptyWordError(ValueError):
    """A word-end label arrived with no pending characters."""


def lookahead_prob(tree: PrefixTree, node: int, sums: np.ndarray) -> float:
    """Probability mass of every word anticipated at *node*.

    *sums* holds leading-zero cumulative sums of a word distribution, so the
    mass of the contiguous anticipated interval [lo, hi] is one subtraction,
    ``sums[hi + 1] - sums[lo]``.
    """
    lo, hi = tree.interval(node)
    return float(sums[hi + 1] - sums[lo])


# ======================================================================
# plain character LM
# ======================================================================


@dataclass(frozen=True, slots=True)
class CharState:
    context: tuple[int, ...]


class CharLMScorer:
    """Every label costs its character-LM conditional probability.

    Also serves as the stand-in attention scorer: any object with this
    interface can sit in the attention slot of the decoder.
    """

    def __init__(self, model: NGramModel):
        if model.level != "char":
            raise ValueError("character scorer requires a character-level model")
        self.model = model
        self.labels = frozenset(model.tokens)
        self._ids = model.token_ids
        self._eos = model.token_ids[EOS]
        self._keep = model.order - 1

    def initial_state(self, context: Sequence[str] = ()) -> CharState:
        return CharState(tuple(self._ids[label] for label in context)[-self._keep :] if self._keep else ())

    def score(self, state: CharState, label: str) -> tuple[float, CharState]:
        token = self._ids.get(label)
        if token is None:
            raise ValueError(f"unknown label {label!r}")
        logp = math.log(self.model.prob(token, state.context))
        context = (state.context + (token,))[-self._keep :] if self._keep else ()
        return logp, CharState(context)

    def final(self, state: CharState) -> float:
        return math.log(self.model.prob(self._eos, state.context))

    def future_score_bound(self, state: CharState) -> float:
        """Upper bound on log mass any completion can still add (here zero)."""
        return 0.0


class NullScorer:
    """Scores every label with probability one; stands in for absent models."""

    labels = None

    def initial_state(self):
        return None

    def score(self, state, label: str) -> tuple[float, None]:
        return 0.0, None

    def final(self, state) -> float:
        return 0.0

    def future_score_bound(self, state) -> float:
        return 0.0


# ======================================================================
# multi-level character/word LM
# ======================================================================


@dataclass(frozen=True, slots=True)
class MultiLevelState:
    char_context: tuple[int, ...]
    word_history: tuple[int, ...]
    pending: tuple[str, ...]
    pending_logp: float  # character-LM log mass accumulated for the pending word


class MultiLevelScorer:
    """Character-LM scores in-word, replaced by word probabilities at boundaries.

    Inside a word every label costs its character-LM probability and that
    cost is remembered.  A word-end label closing a known word cancels the
    remembered character mass and charges the word-LM probability instead,
    so a completed in-vocabulary word costs exactly its word-LM probability.
    Unknown words keep their character mass and additionally pay the word
    LM's ``<UNK>`` probability scaled by *oov_scale*.
    """

    def __init__(
        self,
        char_model: NGramModel,
        word_model: NGramModel,
        vocab: Vocabulary,
        oov_scale: float = 1.0,
    ):
        if char_model.level != "char":
            raise ValueError("multi-level scorer requires a character-level model")
        _check_word_model(word_model, vocab)
        if oov_scale <= 0.0:
            raise ValueError("oov_scale must be positive")
        self.char_model = char_model
        self.word_model = word_model
        self.vocab = vocab
        self.oov_scale = oov_scale
        self.labels = frozenset(char_model.tokens)
        self._ids = char_model.token_ids
        self._keep_chars = char_model.order - 1
        self._keep_words = word_model.order - 1
        self._log_oov_scale = math.log(oov_scale)

    def initial_state(self, word_history: Sequence[int] = ()) -> MultiLevelState:
        return MultiLevelState((), self._clip(tuple(word_history)), (), 0.0)

    def score(self, state: MultiLevelState, label: str) -> tuple[float, MultiLevelState]:
        token = self._ids.get(label)
        if token is None:
            raise ValueError(f"unknown label {label!r}")
        char_context = (
            (state.char_context + (token,))[-self._keep_chars :] if self._keep_chars else ()
        )
        if label in WORD_END_LABELS:
            if not state.pending:
                raise EmptyWordError("empty word at boundary")
            logp, word_id = self._close_word(state)
            history = self._clip(state.word_history + (word_id,))
            return logp, MultiLevelState(char_context, history, (), 0.0)
        logp = math.log(self.char_model.prob(token, state.char_context))
        return logp, MultiLevelState(
            char_context, state.word_history, state.pending + (label,), state.pending_logp + logp
        )

    def final(self, state: MultiLevelState) -> float:
        """Boundary correction for any pending word, then the <eos> word term."""
        total = 0.0
        history = state.word_history
        if state.pending:
            boundary, word_id = self._close_word(state)
            total = boundary
            history = self._clip(history + (word_id,))
        return total + math.log(self.word_model.prob(self.vocab.eos_id, history))

    def future_score_bound(self, state: MultiLevelState) -> float:
        # Closing the pending word can recover at most its accumulated
        # character mass; with oov_scale <= 1 every later factor is <= 1.
        if self.oov_scale <= 1.0:
            return -state.pending_logp
        return math.inf

    def _close_word(self, state: MultiLevelState) -> tuple[float, int]:
        word_id = self.vocab.lookup("".join(state.pending))
        logp = math.log(self.word_model.prob(word_id, state.word_history))
        if word_id == self.vocab.unk_id:
            return logp + self._log_oov_scale, word_id
        return logp - state.pending_logp, word_id

    def _clip(self, history: tuple[int, ...]) -> tuple[int, ...]:
        return history[-self._keep_words :] if self._keep_words else ()


# ======================================================================
# prefix-tree look-ahead word LM
# ======================================================================


@dataclass(frozen=True, slots=True, eq=False)
class LookAheadState:
    node: int | None  # trie position; None after leaving every spelling
    node_log_mass: float  # log anticipated-word mass at node (0.0 when node is None)
    word_history: tuple[int, ...]
    pending: tuple[str, ...]
    sums: np.ndarray  # cached cumulative word distribution for word_history


class LookAheadScorer:
    """Word-LM look-ahead over a prefix tree; no character LM involved.

    While a word is being spelled the hypothesis walks the tree and each
    label costs the ratio of anticipated-word mass between the child and the
    current node, read from cached cumulative sums of the full word
    distribution.  A word-end label at a complete spelling cancels the
    accumulated look-ahead mass against the actual word probability.
    Leaving every spelling charges the word LM's ``<UNK>`` probability once
    (scaled by *oov_scale*); labels after that are free until the next
    word-end label commits ``<UNK>`` and re-enters at the root.
    """

    def __init__(
        self,
        word_model: NGramModel,
        vocab: Vocabulary,
        tree: PrefixTree | None = None,
        oov_scale: float = 1.0,
    ):
        _check_word_model(word_model, vocab)
        if oov_scale <= 0.0:
            raise ValueError("oov_scale must be positive")
        self.word_model = word_model
        self.vocab = vocab
        self.tree = tree if tree is not None else PrefixTree.build(vocab)
        self.oov_scale = oov_scale
        self.labels = frozenset(vocab.label_set)
        self._keep_words = word_model.order - 1
        self._log_oov_scale = math.log(oov_scale)

    def initial_state(self, word_history: Sequence[int] = ()) -> LookAheadState:
        return self._root_state(self._clip(tuple(word_history)))

    def score(self, state: LookAheadState, label: str) -> tuple[float, LookAheadState]:
        if label not in self.labels:
            raise ValueError(f"unknown label {label!r}")
        if label in WORD_END_LABELS:
            if state.node == PrefixTree.ROOT and not state.pending:
                raise EmptyWordError("empty word at boundary")
            logp, word_id = self._close_word(state)
            return logp, self._root_state(self._clip(state.word_history + (word_id,)))
        node = state.node
        if node is None:
            # OOV probability was already charged when the tree was left.
            return 0.0, LookAheadState(
                None, 0.0, state.word_history, state.pending + (label,), state.sums
            )
        child = self.tree.descend(node, label)
        if child is not None:
            child_mass = math.log(lookahead_prob(self.tree, child, state.sums))
            return child_mass - state.node_log_mass, LookAheadState(
                child, child_mass, state.word_history, state.pending + (label,), state.sums
            )
        # No vocabulary word continues this spelling: pay the OOV charge now.
        logp = self._unk_logp(state.word_history)
        return logp, LookAheadState(
            None, 0.0, state.word_history, state.pending + (label,), state.sums
        )

    def final(self, state: LookAheadState) -> float:
        """Word-end handling for <eos>, then the <eos> word-LM term."""
        if state.node == PrefixTree.ROOT and not state.pending:
            boundary = 0.0
            history = state.word_history
        else:
            boundary, word_id = self._close_word(state)
            history = self._clip(state.word_history + (word_id,))
        return boundary + math.log(self.word_model.prob(self.vocab.eos_id, history))

    def future_score_bound(self, state: LookAheadState) -> float:
        # Interval masses shrink along every spelling and the word-end
        # correction cancels at most the accumulated mass, so with
        # oov_scale <= 1 no completion adds positive log mass.
        return 0.0 if self.oov_scale <= 1.0 else math.inf

    def _close_word(self, state: LookAheadState) -> tuple[float, int]:
        node = state.node
        if node is None:
            return 0.0, self.vocab.unk_id
        word_id = self.tree.word_end(node)
        if word_id is not None:
            logp = math.log(self.word_model.prob(word_id, state.word_history))
            return logp - state.node_log_mass, word_id
        # The spelling stops short of every vocabulary word.
        return self._unk_logp(state.word_history), self.vocab.unk_id

    def _root_state(self, history: tuple[int, ...]) -> LookAheadState:
        sums = self.word_model.cumulative_distribution(history)
        mass = math.log(lookahead_prob(self.tree, PrefixTree.ROOT, sums))
        return LookAheadState(PrefixTree.ROOT, mass, history, (), sums)

    def _unk_logp(self, history: tuple[int, ...]) -> float:
        return math.log(self.word_model.prob(self.vocab.unk_id, history)) + self._log_oov_scale

    def _clip(self, history: tuple[int, ...]) -> tuple[int, ...]:
        return history[-self._keep_words :] if self._keep_words else ()


def _check_word_model(word_model: NGramModel, vocab: Vocabulary) -> None:
    if word_model.level != "word":
        raise ValueError("fusion requires a word-level model")
    if word_model.tokens != vocab.lm_tokens:
        raise ValueError("word model inventory does not match the vocabulary")
