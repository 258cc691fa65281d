"""Label-synchronous beam search over CTC posteriors with score fusion.

Hypotheses grow one character label at a time.  Each one carries three
accumulated log scores: the CTC prefix probability (replaced, not summed, on
every extension), an attention-style character score, and an LM fusion
score.  The joint ranking score is

    joint = ctc_weight * ctc + (1 - ctc_weight) * att + lm_weight * lm

Extending by ``<eos>`` finalizes a hypothesis: the CTC term switches to the
exact-match probability and both scorers contribute their end-of-sentence
terms.  Pruning keeps the best ``beam_width`` incomplete hypotheses of equal
length; ties break lexicographically on the label sequence, which makes the
search deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

from .ctc import CtcPrefixScorer, CtcState, PosteriorMatrix, ctc_final
from .fusion import EmptyWordError, NullScorer
from .vocab import EOS, from_char_labels

_ENUM_LIMIT = 1_000_000


@dataclass(frozen=True)
class DecodeConfig:
    """Search weights and limits.

    ``max_len`` caps the number of character labels per hypothesis and
    defaults to the frame count of the posterior matrix.
    """

    ctc_weight: float = 0.2
    lm_weight: float = 1.0
    beam_width: int = 30
    max_len: int | None = None
    n_best: int = 1

    def __post_init__(self):
        if not 0.0 <= self.ctc_weight <= 1.0:
            raise ValueError("ctc_weight must lie in [0, 1]")
        if self.lm_weight < 0.0:
            raise ValueError("lm_weight must be >= 0")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_len is not None and self.max_len < 0:
            raise ValueError("max_len must be >= 0")
        if self.n_best < 1:
            raise ValueError("n_best must be >= 1")


def combine_scores(
    ctc_score: float, att_score: float, lm_score: float, config: DecodeConfig
) -> float:
    """Joint hypothesis score; zero-weight components are dropped outright."""
    total = 0.0
    if config.ctc_weight != 0.0:
        total += config.ctc_weight * ctc_score
    if config.ctc_weight != 1.0:
        total += (1.0 - config.ctc_weight) * att_score
    if config.lm_weight != 0.0:
        total += config.lm_weight * lm_score
    return total


@dataclass(frozen=True)
class Hypothesis:
    labels: tuple[str, ...]
    ctc_score: float
    att_score: float
    lm_score: float
    joint: float
    complete: bool
    ctc_state: CtcState
    lm_state: Any
    att_state: Any

    @property
    def text(self) -> str:
        return " ".join(from_char_labels(self.labels))


@dataclass(frozen=True)
class DecodeResult:
    """Ranked hypotheses; ``complete`` is False only when the search exhausted
    without a single finalized hypothesis and fell back to incomplete ones."""

    hypotheses: list[Hypothesis]
    complete: bool


def _rank(hyp: Hypothesis) -> tuple[float, tuple[str, ...]]:
    return (-hyp.joint, hyp.labels)


def _finalize(hyp: Hypothesis, lm, att, config: DecodeConfig) -> Hypothesis:
    ctc = ctc_final(hyp.ctc_state)
    att_total = hyp.att_score + att.final(hyp.att_state)
    lm_total = hyp.lm_score + lm.final(hyp.lm_state)
    return Hypothesis(
        hyp.labels,
        ctc,
        att_total,
        lm_total,
        combine_scores(ctc, att_total, lm_total, config),
        True,
        hyp.ctc_state,
        hyp.lm_state,
        hyp.att_state,
    )


def _initial_hypothesis(scorer: CtcPrefixScorer, lm, att, config: DecodeConfig) -> Hypothesis:
    return Hypothesis(
        (),
        0.0,
        0.0,
        0.0,
        combine_scores(0.0, 0.0, 0.0, config),
        False,
        scorer.initial_state(),
        lm.initial_state(),
        att.initial_state(),
    )


def _check_labels(labels: Sequence[str], scorer, role: str) -> None:
    inventory = getattr(scorer, "labels", None)
    if inventory is None:
        return
    for label in (*labels, EOS):
        if label not in inventory:
            raise ValueError(f"{role} scorer cannot score label {label!r}")


def _upper_bound(hyp: Hypothesis, lm, att, config: DecodeConfig) -> float:
    """Joint score no completion of *hyp* can exceed."""
    return combine_scores(
        hyp.ctc_score,
        hyp.att_score + att.future_score_bound(hyp.att_state),
        hyp.lm_score + lm.future_score_bound(hyp.lm_state),
        config,
    )


def decode(
    posteriors: PosteriorMatrix,
    lm=None,
    att=None,
    config: DecodeConfig = DecodeConfig(),
) -> DecodeResult:
    """Beam search returning the top ``config.n_best`` complete hypotheses.

    Parameters
    ----------
    posteriors : PosteriorMatrix
        Frame posteriors; its non-blank labels form the extension set.
    lm, att : scorer or None
        LM fusion scorer and attention-slot scorer.  ``None`` means score
        one everywhere.
    """
    lm = lm if lm is not None else NullScorer()
    att = att if att is not None else NullScorer()
    scorer = CtcPrefixScorer(posteriors)
    labels = sorted(posteriors.char_labels)
    _check_labels(labels, lm, "lm")
    _check_labels(labels, att, "att")
    columns = [scorer.column(label) for label in labels]
    max_len = config.max_len if config.max_len is not None else posteriors.n_frames

    beam = [_initial_hypothesis(scorer, lm, att, config)]
    complete: list[Hypothesis] = []

    for step in range(max_len + 1):
        for hyp in beam:
            complete.append(_finalize(hyp, lm, att, config))
        complete.sort(key=_rank)
        del complete[config.n_best :]
        if step == max_len or not beam:
            break

        ctc_scores = scorer.candidate_scores([hyp.ctc_state for hyp in beam], columns)
        candidates = []
        for j, hyp in enumerate(beam):
            for i, label in enumerate(labels):
                try:
                    lm_step, lm_state = lm.score(hyp.lm_state, label)
                except EmptyWordError:
                    continue
                att_step, att_state = att.score(hyp.att_state, label)
                ctc = float(ctc_scores[j, i])
                att_total = hyp.att_score + att_step
                lm_total = hyp.lm_score + lm_step
                joint = combine_scores(ctc, att_total, lm_total, config)
                candidates.append(
                    (joint, hyp.labels + (label,), j, i, ctc, att_total, lm_total, lm_state, att_state)
                )
        candidates.sort(key=lambda cand: (-cand[0], cand[1]))
        del candidates[config.beam_width :]
        if not candidates:
            beam = []
            continue
        states = scorer.extended_states(
            [(beam[cand[2]].ctc_state, columns[cand[3]]) for cand in candidates]
        )
        beam = [
            Hypothesis(cand[1], cand[4], cand[5], cand[6], cand[0], False, state, cand[7], cand[8])
            for cand, state in zip(candidates, states)
        ]
        # Stop once no live hypothesis can still beat the worst kept
        # complete one; the bound is only tight for OOV scales <= 1, and
        # scorers report an infinite bound otherwise, which disables this.
        if len(complete) == config.n_best:
            worst = complete[-1].joint
            if all(_upper_bound(hyp, lm, att, config) < worst for hyp in beam):
                break

    if complete:
        return DecodeResult(complete, True)
    fallback = sorted(beam, key=_rank)[: config.n_best]
    return DecodeResult(fallback, False)


def exhaustive_decode(
    posteriors: PosteriorMatrix,
    lm=None,
    att=None,
    config: DecodeConfig = DecodeConfig(),
) -> DecodeResult:
    """Score every label sequence up to ``max_len``; oracle for ``decode``.

    Shares the scoring code paths with the beam search so a saturated beam
    reproduces its ranking exactly, including floating-point behavior.
    """
    lm = lm if lm is not None else NullScorer()
    att = att if att is not None else NullScorer()
    scorer = CtcPrefixScorer(posteriors)
    labels = sorted(posteriors.char_labels)
    _check_labels(labels, lm, "lm")
    _check_labels(labels, att, "att")
    columns = [scorer.column(label) for label in labels]
    max_len = config.max_len if config.max_len is not None else posteriors.n_frames
    if sum(len(labels) ** length for length in range(max_len + 1)) > _ENUM_LIMIT:
        raise ValueError("search space too large to enumerate")

    results: list[Hypothesis] = []

    def expand(hyp: Hypothesis, depth: int) -> None:
        results.append(_finalize(hyp, lm, att, config))
        if depth == max_len:
            return
        ctc_scores = scorer.candidate_scores([hyp.ctc_state], columns)[0]
        for i, label in enumerate(labels):
            try:
                lm_step, lm_state = lm.score(hyp.lm_state, label)
            except EmptyWordError:
                continue
            att_step, att_state = att.score(hyp.att_state, label)
            state = scorer.extended_states([(hyp.ctc_state, columns[i])])[0]
            att_total = hyp.att_score + att_step
            lm_total = hyp.lm_score + lm_step
            child = Hypothesis(
                hyp.labels + (label,),
                float(ctc_scores[i]),
                att_total,
                lm_total,
                combine_scores(float(ctc_scores[i]), att_total, lm_total, config),
                False,
                state,
                lm_state,
                att_state,
            )
            expand(child, depth + 1)

    expand(_initial_hypothesis(scorer, lm, att, config), 0)
    results.sort(key=_rank)
    return DecodeResult(results[: config.n_best], True)
