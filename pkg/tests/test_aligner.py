import math

import numpy as np
import pytest

from voxkit import (
    AlignmentError,
    EmissionMatrix,
    InfeasibleAlignmentError,
    UnknownTokenError,
    find_emissions,
    force_align,
    load_emissions,
    min_frames_required,
    save_emissions,
    unaligned_gaps,
)

LETTERS = "abc"


def emissions_from_logits(logits, frame_dur_s=0.02):
    logits = np.asarray(logits, dtype=np.float64)
    log_probs = logits - np.log(np.sum(np.exp(logits), axis=1, keepdims=True))
    vocab = ("<blank>",) + tuple(LETTERS[: logits.shape[1] - 1])
    return EmissionMatrix(log_probs=log_probs, vocab=vocab,
                          frame_dur_s=frame_dur_s)


def peaked_emissions(targets, vocab_size, peak=8.0, frame_dur_s=0.02):
    logits = np.zeros((len(targets), vocab_size))
    for t, target in enumerate(targets):
        logits[t, target] = peak
    return emissions_from_logits(logits, frame_dur_s)


def best_path_by_enumeration(log_probs, labels):
    """Walk every legal blank-interleaved path and keep the best total.

    Intentionally brute force: start at the leading blank or first label,
    move stay/advance/skip (skips only land on a label different from the
    one two states back), and finish on the last label or trailing blank.
    Returns -inf when no complete path exists.
    """
    ext = [0]
    for label in labels:
        ext.extend([label, 0])
    n_frames = log_probs.shape[0]
    n_states = len(ext)
    best = -math.inf

    def walk(t, s, acc):
        nonlocal best
        acc += log_probs[t, ext[s]]
        if t == n_frames - 1:
            if s >= n_states - 2:
                best = max(best, acc)
            return
        walk(t + 1, s, acc)
        if s + 1 < n_states:
            walk(t + 1, s + 1, acc)
        if s + 2 < n_states and ext[s + 2] != 0 and ext[s + 2] != ext[s]:
            walk(t + 1, s + 2, acc)

    for start in (0, 1):
        if start < n_states:
            walk(0, start, 0.0)
    return best


def test_matches_enumeration_on_random_cases():
    rng = np.random.default_rng(20240817)
    checked_infeasible = 0
    for _ in range(500):
        n_frames = int(rng.integers(1, 9))
        vocab_size = int(rng.integers(2, 5))
        n_labels = int(rng.integers(1, 4))
        labels = [int(rng.integers(1, vocab_size)) for _ in range(n_labels)]
        logits = rng.normal(scale=2.0, size=(n_frames, vocab_size))
        emissions = emissions_from_logits(logits)
        tokens = [emissions.vocab[i] for i in labels]
        expected = best_path_by_enumeration(emissions.log_probs, labels)
        if expected == -math.inf:
            checked_infeasible += 1
            with pytest.raises(InfeasibleAlignmentError):
                force_align(emissions, tokens)
            continue
        result = force_align(emissions, tokens)
        assert abs(result.path_logprob - expected) <= 1e-9
    assert checked_infeasible > 10


def test_single_frame_single_label():
    emissions = EmissionMatrix(log_probs=np.log([[0.1, 0.9]]),
                               vocab=("<blank>", "a"), frame_dur_s=0.02)
    result = force_align(emissions, ["a"])
    span = result.words[0]
    assert (span.start_s, span.end_s) == (0.0, 0.02)
    assert abs(span.score - 0.9) < 1e-12
    assert result.path == (1,)


def test_infeasible_when_frames_cannot_hold_labels():
    emissions = emissions_from_logits(np.zeros((2, 4)))
    with pytest.raises(InfeasibleAlignmentError):
        force_align(emissions, ["abc"])


def test_duplicate_labels_need_separating_blank():
    assert min_frames_required([1, 1]) == 3
    assert min_frames_required([1, 2, 1]) == 3
    assert min_frames_required([1, 1, 1]) == 5
    emissions = emissions_from_logits(np.zeros((2, 2)))
    with pytest.raises(InfeasibleAlignmentError):
        force_align(emissions, ["aa"])
    emissions = emissions_from_logits(np.zeros((3, 2)))
    result = force_align(emissions, ["aa"])
    assert result.path == (1, 0, 1)


def test_word_spans_cover_peaked_path():
    # frames: a a blank b b blank -> word1 frames 0-1, word2 frames 3-4
    emissions = peaked_emissions([1, 1, 0, 2, 2, 0], vocab_size=3)
    result = force_align(emissions, ["a", "b"])
    first, second = result.words
    assert (first.start_s, first.end_s) == (0.0, 0.04)
    assert (second.start_s, second.end_s) == (0.06, 0.10)
    assert first.score > 0.99 and second.score > 0.99
    assert result.score == pytest.approx((first.score + second.score) / 2)


def test_multi_char_token_spans_all_its_frames():
    emissions = peaked_emissions([1, 2, 3], vocab_size=4)
    result = force_align(emissions, ["abc"])
    assert len(result.words) == 1
    assert (result.words[0].start_s, result.words[0].end_s) == (0.0, 0.06)


def test_score_modes_agree_on_constant_rows():
    log_probs = np.log(np.full((4, 2), 0.5))
    emissions = EmissionMatrix(log_probs=log_probs, vocab=("<blank>", "a"),
                               frame_dur_s=0.02)
    geometric = force_align(emissions, ["a"], score_mode="geometric")
    arithmetic = force_align(emissions, ["a"], score_mode="arithmetic")
    assert geometric.words[0].score == pytest.approx(arithmetic.words[0].score)


def test_uniform_shift_does_not_change_the_path():
    rng = np.random.default_rng(7)
    logits = rng.normal(size=(6, 3))
    base = force_align(emissions_from_logits(logits), ["ab"])
    shifted = force_align(emissions_from_logits(logits + 3.5), ["ab"])
    assert base.path == shifted.path


def test_tie_break_is_deterministic_on_uniform_emissions():
    # Every path ties here. Advance beats stay in the back pointers, so the
    # label is entered at the latest tied frame, and the ending prefers the
    # label state over the trailing blank.
    emissions = emissions_from_logits(np.zeros((4, 2)))
    result = force_align(emissions, ["a"])
    assert result.path == (0, 0, 0, 1)
    again = force_align(emissions, ["a"])
    assert again.path == result.path


def test_unknown_token_character():
    emissions = emissions_from_logits(np.zeros((4, 3)))
    with pytest.raises(UnknownTokenError):
        force_align(emissions, ["az"])


def test_empty_tokens_rejected():
    emissions = emissions_from_logits(np.zeros((4, 3)))
    with pytest.raises(AlignmentError):
        force_align(emissions, [])
    with pytest.raises(AlignmentError):
        force_align(emissions, ["a", ""])


def test_emission_matrix_validates_rows():
    from voxkit.aligner import EmissionFormatError
    bad = np.zeros((2, 3))  # rows sum to 3, not 1
    with pytest.raises(EmissionFormatError):
        EmissionMatrix(log_probs=bad, vocab=("<blank>", "a", "b"),
                       frame_dur_s=0.02)
    with pytest.raises(EmissionFormatError):
        EmissionMatrix(log_probs=np.log(np.full((2, 2), 0.5)),
                       vocab=("a", "b"), frame_dur_s=0.02)


def test_unaligned_gaps():
    emissions = peaked_emissions([1, 0, 0, 2], vocab_size=3)
    result = force_align(emissions, ["a", "b"])
    assert unaligned_gaps(result, 0.08) == [(0.02, 0.06)]
    # trailing region counts as a gap too
    assert unaligned_gaps(result, 0.1) == [(0.02, 0.06), (0.08, 0.1)]


def test_npz_round_trip(tmp_path):
    emissions = peaked_emissions([1, 2, 0], vocab_size=3, frame_dur_s=0.04)
    path = tmp_path / "utt1.npz"
    save_emissions(emissions, path)
    back = load_emissions(path)
    assert np.allclose(back.log_probs, emissions.log_probs)
    assert back.vocab == emissions.vocab
    assert back.frame_dur_s == 0.04


def test_emit_text_round_trip(tmp_path):
    emissions = peaked_emissions([1, 2], vocab_size=3)
    path = tmp_path / "utt1.emit"
    save_emissions(emissions, path)
    back = load_emissions(path)
    assert np.array_equal(back.log_probs, emissions.log_probs)
    assert back.vocab == emissions.vocab


def test_find_emissions_prefers_npz(tmp_path):
    emissions = peaked_emissions([1], vocab_size=2)
    save_emissions(emissions, tmp_path / "k1.npz")
    save_emissions(emissions, tmp_path / "k1.emit")
    assert find_emissions(tmp_path, "k1").suffix == ".npz"
    assert find_emissions(tmp_path, "k2") is None
