"""Forced alignment of romanized tokens against frame emission matrices.

The aligner runs a max-probability Viterbi pass over the standard
blank-interleaved label trellis: the label sequence (the concatenated
characters of all tokens) is expanded to ``blank c1 blank c2 ... cL blank``,
and each frame either stays in its state, advances to the next state, or
skips the intervening blank when two neighboring labels differ. Word
boundaries fall out of which character owns each frame.

Emission matrices hold per-frame log-posteriors over a character vocabulary
with the blank at index 0, and can be stored either as .npz archives or as a
simple whitespace-separated text format with a one-line header.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .manifest import WordSpan

BLANK_TOKEN = "<blank>"

# Each row of log-probs must sum to one in probability space within this.
_ROW_NORM_TOL = 1e-3

_TEXT_SUFFIX = ".emit"
_NPZ_SUFFIX = ".npz"


class AlignmentError(Exception):
    pass


class EmissionFormatError(AlignmentError):
    """The emission matrix or its file form is malformed."""


class UnknownTokenError(AlignmentError):
    """A token contains a character missing from the emission vocabulary."""

    def __init__(self, char: str, token: str):
        super().__init__(f"character {char!r} of token {token!r} is not in "
                         f"the emission vocabulary")
        self.char = char
        self.token = token


class InfeasibleAlignmentError(AlignmentError):
    """Too few frames to traverse every label state."""

    def __init__(self, n_frames: int, min_frames: int):
        super().__init__(f"{n_frames} frames cannot fit a label sequence "
                         f"needing at least {min_frames}")
        self.n_frames = n_frames
        self.min_frames = min_frames


def _logsumexp_rows(log_probs: np.ndarray) -> np.ndarray:
    peak = log_probs.max(axis=1, keepdims=True)
    return (peak + np.log(np.exp(log_probs - peak).sum(axis=1, keepdims=True))).ravel()


@dataclass(frozen=True)
class EmissionMatrix:
    """Per-frame log-posteriors, shape (frames, vocab); vocab[0] is blank."""

    log_probs: np.ndarray
    frame_dur_s: float
    vocab: tuple[str, ...]

    def __post_init__(self):
        lp = np.asarray(self.log_probs, dtype=np.float64)
        object.__setattr__(self, "log_probs", lp)
        object.__setattr__(self, "vocab", tuple(self.vocab))
        if lp.ndim != 2 or lp.shape[0] < 1:
            raise EmissionFormatError(f"log_probs must be 2-D with at least one "
                                      f"frame, got shape {lp.shape}")
        if lp.shape[1] != len(self.vocab):
            raise EmissionFormatError(f"{lp.shape[1]} columns but "
                                      f"{len(self.vocab)} vocabulary entries")
        if len(set(self.vocab)) != len(self.vocab):
            raise EmissionFormatError("vocabulary entries must be unique")
        if len(self.vocab) < 2:
            raise EmissionFormatError("vocabulary needs the blank plus at "
                                      "least one label")
        if self.vocab[0] != BLANK_TOKEN:
            raise EmissionFormatError(f"vocab[0] must be {BLANK_TOKEN!r}, "
                                      f"got {self.vocab[0]!r}")
        if not (self.frame_dur_s > 0):
            raise EmissionFormatError(f"frame_dur_s must be positive, got "
                                      f"{self.frame_dur_s}")
        if not np.isfinite(lp).all():
            raise EmissionFormatError("log_probs contain non-finite values")
        norms = _logsumexp_rows(lp)
        worst = float(np.abs(norms).max())
        if worst > _ROW_NORM_TOL:
            raise EmissionFormatError(f"rows are not normalized log-"
                                      f"distributions (max |logsumexp| {worst:.2e})")

    @property
    def n_frames(self) -> int:
        return int(self.log_probs.shape[0])

    @property
    def duration_s(self) -> float:
        return self.n_frames * self.frame_dur_s


@dataclass(frozen=True)
class AlignmentResult:
    """Word spans plus the per-frame path that produced them."""

    words: tuple[WordSpan, ...]
    path: tuple[int, ...]        # vocab index per frame, 0 = blank
    path_logprob: float          # total log-probability of the chosen path
    score: float                 # mean word score
    frame_dur_s: float


def _labels_for_tokens(tokens: Sequence[str], vocab: Sequence[str]) -> tuple[list[int], list[int]]:
    """Concatenate token characters into vocab indices plus owner word ids."""
    index = {ch: i for i, ch in enumerate(vocab)}
    labels: list[int] = []
    owners: list[int] = []
    for w, token in enumerate(tokens):
        if not token:
            raise AlignmentError(f"token {w} is empty")
        for ch in token:
            ix = index.get(ch)
            if ix is None or ix == 0:
                raise UnknownTokenError(ch, token)
            labels.append(ix)
            owners.append(w)
    return labels, owners


def min_frames_required(labels: Sequence[int]) -> int:
    """L frames plus one separating blank per adjacent duplicate label."""
    repeats = sum(1 for a, b in zip(labels, labels[1:]) if a == b)
    return len(labels) + repeats


def force_align(emissions: EmissionMatrix, tokens: Sequence[str], *,
                score_mode: str = "geometric") -> AlignmentResult:
    """Viterbi-align token characters to frames and score each word.

    Word scores aggregate the log-posteriors of the frames assigned to the
    word's characters: geometric mode (default) exponentiates their mean,
    arithmetic mode averages the posteriors directly. Score ties in the
    trellis resolve advance over self-loop over blank-skip, so results are
    deterministic.
    """
    if score_mode not in ("geometric", "arithmetic"):
        raise ValueError(f"unknown score_mode {score_mode!r}")
    if not tokens:
        raise AlignmentError("need at least one token to align")

    labels, owners = _labels_for_tokens(tokens, emissions.vocab)
    lp = emissions.log_probs
    n_frames = emissions.n_frames
    needed = min_frames_required(labels)
    if n_frames < needed:
        raise InfeasibleAlignmentError(n_frames, needed)

    n_labels = len(labels)
    n_states = 2 * n_labels + 1
    # ext[s]: vocab index emitted in state s (even states are blanks)
    ext = np.zeros(n_states, dtype=np.int64)
    ext[1::2] = labels

    neg_inf = -np.inf
    score = np.full(n_states, neg_inf)
    score[0] = lp[0, 0]
    score[1] = lp[0, ext[1]]
    # back[t, s]: 0 = stay, 1 = advance from s-1, 2 = skip from s-2
    back = np.zeros((n_frames, n_states), dtype=np.int8)

    can_skip = np.zeros(n_states, dtype=bool)
    for s in range(3, n_states, 2):
        can_skip[s] = ext[s] != ext[s - 2]

    for t in range(1, n_frames):
        prev = score
        stay = prev
        advance = np.concatenate(([neg_inf], prev[:-1]))
        skip = np.concatenate(([neg_inf, neg_inf], prev[:-2]))
        skip = np.where(can_skip, skip, neg_inf)
        # Tie order: advance beats stay beats skip.
        best = advance.copy()
        choice = np.ones(n_states, dtype=np.int8)
        better = stay > best
        best[better] = stay[better]
        choice[better] = 0
        better = skip > best
        best[better] = skip[better]
        choice[better] = 2
        score = best + lp[t, ext]
        back[t] = choice

    # Valid endings: final blank or final label; prefer the label on a tie.
    end_label, end_blank = n_states - 2, n_states - 1
    if score[end_label] >= score[end_blank]:
        state = end_label
    else:
        state = end_blank
    total = float(score[state])
    if not np.isfinite(total):
        raise InfeasibleAlignmentError(n_frames, needed)

    states = np.zeros(n_frames, dtype=np.int64)
    for t in range(n_frames - 1, -1, -1):
        states[t] = state
        if t:
            state -= back[t, state]

    path = tuple(int(ext[s]) for s in states)

    # Group frames by owning word through the label states they occupy.
    first_frame = np.full(len(tokens), -1, dtype=np.int64)
    last_frame = np.zeros(len(tokens), dtype=np.int64)
    logp_sums = np.zeros(len(tokens))
    prob_sums = np.zeros(len(tokens))
    counts = np.zeros(len(tokens), dtype=np.int64)
    for t, s in enumerate(states):
        if s % 2 == 0:
            continue
        w = owners[(s - 1) // 2]
        if first_frame[w] < 0:
            first_frame[w] = t
        last_frame[w] = t
        frame_lp = lp[t, ext[s]]
        logp_sums[w] += frame_lp
        prob_sums[w] += np.exp(frame_lp)
        counts[w] += 1

    fd = emissions.frame_dur_s
    words = []
    for w, token in enumerate(tokens):
        if counts[w] == 0:
            raise AlignmentError(f"token {w} ({token!r}) received no frames")
        if score_mode == "geometric":
            word_score = float(np.exp(logp_sums[w] / counts[w]))
        else:
            word_score = float(prob_sums[w] / counts[w])
        words.append(WordSpan(
            word=token,
            start_s=float(first_frame[w] * fd),
            end_s=float((last_frame[w] + 1) * fd),
            score=min(1.0, word_score),
        ))

    mean_score = float(sum(w.score for w in words) / len(words))
    return AlignmentResult(words=tuple(words), path=path, path_logprob=total,
                           score=mean_score, frame_dur_s=fd)


def score_utterance(result: AlignmentResult) -> float:
    """Unweighted mean of the word scores."""
    if not result.words:
        raise AlignmentError("alignment has no words to score")
    return float(sum(w.score for w in result.words) / len(result.words))


def unaligned_gaps(words: Iterable[WordSpan] | AlignmentResult,
                   duration_s: float) -> list[tuple[float, float]]:
    """Regions of [0, duration_s] not covered by any word span."""
    if isinstance(words, AlignmentResult):
        words = words.words
    if duration_s <= 0:
        raise ValueError(f"duration must be positive, got {duration_s}")
    gaps: list[tuple[float, float]] = []
    cursor = 0.0
    for span in words:
        if span.start_s < cursor - 1e-9:
            raise ValueError(f"span {span.word!r} overlaps or precedes the "
                             f"previous one")
        if span.start_s > cursor:
            gaps.append((cursor, span.start_s))
        cursor = max(cursor, span.end_s)
    if cursor < duration_s:
        gaps.append((cursor, duration_s))
    return gaps


def save_emissions(emissions: EmissionMatrix, path: str | Path) -> None:
    """Write an emission matrix as .npz or .emit text, chosen by suffix."""
    path = Path(path)
    if path.suffix == _NPZ_SUFFIX:
        np.savez(path, log_probs=emissions.log_probs,
                 frame_dur_s=np.float64(emissions.frame_dur_s),
                 vocab=np.array(emissions.vocab, dtype=np.str_))
    elif path.suffix == _TEXT_SUFFIX:
        with open(path, "w", encoding="utf-8") as fh:
            header = " ".join([repr(emissions.frame_dur_s), *emissions.vocab])
            fh.write(header + "\n")
            for row in emissions.log_probs:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    else:
        raise EmissionFormatError(f"unsupported emission file suffix: {path.name}")


def load_emissions(path: str | Path) -> EmissionMatrix:
    """Read an emission matrix saved by save_emissions."""
    path = Path(path)
    if path.suffix == _NPZ_SUFFIX:
        with np.load(path, allow_pickle=False) as data:
            try:
                return EmissionMatrix(
                    log_probs=data["log_probs"],
                    frame_dur_s=float(data["frame_dur_s"]),
                    vocab=tuple(str(v) for v in data["vocab"]),
                )
            except KeyError as exc:
                raise EmissionFormatError(f"{path.name}: missing array {exc}") from exc
    if path.suffix == _TEXT_SUFFIX:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) < 3:
                raise EmissionFormatError(f"{path.name}: header needs frame "
                                          f"duration plus at least two vocab entries")
            try:
                frame_dur = float(header[0])
            except ValueError as exc:
                raise EmissionFormatError(f"{path.name}: bad frame duration "
                                          f"{header[0]!r}") from exc
            vocab = tuple(header[1:])
            rows = []
            for line_no, line in enumerate(fh, 2):
                if not line.strip():
                    continue
                values = line.split()
                if len(values) != len(vocab):
                    raise EmissionFormatError(
                        f"{path.name}:{line_no}: expected {len(vocab)} values, "
                        f"got {len(values)}")
                rows.append([float(v) for v in values])
            if not rows:
                raise EmissionFormatError(f"{path.name}: no frames")
            return EmissionMatrix(log_probs=np.array(rows), frame_dur_s=frame_dur,
                                  vocab=vocab)
    raise EmissionFormatError(f"unsupported emission file suffix: {path.name}")


def find_emissions(directory: str | Path, key: str) -> Path | None:
    """Locate the emission sidecar for an utterance key, if present."""
    directory = Path(directory)
    for suffix in (_NPZ_SUFFIX, _TEXT_SUFFIX):
        candidate = directory / f"{key}{suffix}"
        if candidate.is_file():
            return candidate
    return None
