"""Generation-time edit control: repetition penalty, re-generation retries,
and chunked synthesis with cross-fade stitching.

The repetition penalty grows linearly with how much has been generated, so
long outputs get pushed harder away from their own history. The retry state
machine re-runs a span when the generator either raised its own retry flag
or produced suspiciously few frames for the text, widening the edit mask and
raising the penalty each round until a retry budget runs out. Long texts are
synthesized in overlapping chunks and spliced back together at zero
crossings with a short linear cross-fade.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

# A retry fires when the output is shorter than this fraction of the
# expected frame count for the text.
SHORTFALL_FRACTION = 0.5


class EditControlError(Exception):
    pass


class StitchError(EditControlError):
    pass


# ---------------------------------------------------------------- penalty

@dataclass(frozen=True)
class PenaltyParams:
    """Scaling of the history penalty with generated length.

    The effective factor is ``repetition_penalty / 100 * num_generated + 1``:
    neutral at zero length and growing linearly from there.
    """

    repetition_penalty: float = 1.0

    def __post_init__(self):
        if self.repetition_penalty < 0:
            raise EditControlError(f"repetition_penalty must be non-negative, "
                                   f"got {self.repetition_penalty}")

    def bumped(self, delta: float) -> "PenaltyParams":
        return PenaltyParams(self.repetition_penalty + delta)


def penalty_factor(params: PenaltyParams, num_generated: int) -> float:
    """Length-scaled penalty factor, >= 1 whenever the penalty is."""
    if num_generated < 0:
        raise EditControlError(f"num_generated must be non-negative, got "
                               f"{num_generated}")
    return params.repetition_penalty / 100.0 * num_generated + 1.0


def apply_penalty(logits: np.ndarray, history_tokens: Sequence[int],
                  factor: float) -> np.ndarray:
    """Discount the logits of already-emitted tokens.

    Positive logits divide by the factor and negative ones multiply, so the
    likelihood of a history token never increases. Returns a new array.
    """
    if factor <= 0:
        raise EditControlError(f"penalty factor must be positive, got {factor}")
    out = np.array(logits, dtype=np.float64, copy=True)
    if out.ndim != 1:
        raise EditControlError(f"logits must be 1-D, got shape {out.shape}")
    for token in set(history_tokens):
        if not 0 <= token < out.shape[0]:
            raise EditControlError(f"history token {token} outside vocabulary "
                                   f"of {out.shape[0]}")
        value = out[token]
        if value > 0:
            out[token] = value / factor
        elif value < 0:
            out[token] = value * factor
    return out


def avg_speed(frame_count: int, token_count: int) -> float:
    """Acoustic frames emitted per text token."""
    if token_count <= 0:
        raise EditControlError(f"token_count must be positive, got {token_count}")
    if frame_count < 0:
        raise EditControlError(f"frame_count must be non-negative, got {frame_count}")
    return frame_count / token_count


# ---------------------------------------------------------------- retries

@dataclass(frozen=True)
class RegenController:
    """State for the bounded re-generation loop around one edit span.

    Mask boundaries are in frames; each retry widens the mask by
    ``mask_expand_s`` of context per side (converted at ``frame_rate_hz``)
    and bumps the repetition penalty by ``penalty_delta``.
    """

    avg_speed: float
    target_tokens: int
    mask_start: int
    mask_end: int
    penalty: PenaltyParams = field(default_factory=PenaltyParams)
    round: int = 0
    max_rounds: int = 3
    frame_rate_hz: float = 50.0
    mask_expand_s: float = 0.5
    penalty_delta: float = 1.0

    def __post_init__(self):
        if self.avg_speed <= 0 or self.target_tokens <= 0:
            raise EditControlError("avg_speed and target_tokens must be positive")
        if not 0 <= self.mask_start < self.mask_end:
            raise EditControlError(f"bad mask [{self.mask_start}, {self.mask_end})")
        if self.round < 0 or self.max_rounds < 0 or self.round > self.max_rounds:
            raise EditControlError(f"round {self.round} outside [0, {self.max_rounds}]")
        if self.frame_rate_hz <= 0:
            raise EditControlError("frame_rate_hz must be positive")

    @property
    def expected_frames(self) -> float:
        return self.avg_speed * self.target_tokens


@dataclass(frozen=True)
class GenerationOutcome:
    """What one generation attempt reported back."""

    generated_frames: int
    re_gen_flag: bool = False


ACCEPT = "accept"
RETRY = "retry"
GIVE_UP = "give_up"


@dataclass(frozen=True)
class RegenDecision:
    action: str
    controller: RegenController
    too_short: bool = False
    flagged: bool = False


def regen_step(controller: RegenController,
               outcome: GenerationOutcome) -> RegenDecision:
    """Advance the retry state machine by one generation attempt.

    An attempt fails when the generator flagged it or when it produced fewer
    than half the expected frames. Failures retry with a widened mask and a
    bumped penalty until the round budget is exhausted, then give up.
    """
    too_short = outcome.generated_frames < SHORTFALL_FRACTION * controller.expected_frames
    flagged = outcome.re_gen_flag
    if not (too_short or flagged):
        return RegenDecision(ACCEPT, controller, too_short, flagged)
    if controller.round >= controller.max_rounds:
        return RegenDecision(GIVE_UP, controller, too_short, flagged)
    expand = round(controller.mask_expand_s * controller.frame_rate_hz)
    widened = replace(
        controller,
        round=controller.round + 1,
        mask_start=max(0, controller.mask_start - expand),
        mask_end=controller.mask_end + expand,
        penalty=controller.penalty.bumped(controller.penalty_delta),
    )
    return RegenDecision(RETRY, widened, too_short, flagged)


def run_regen(controller: RegenController,
              outcomes: Sequence[GenerationOutcome]) -> list[RegenDecision]:
    """Feed outcomes through the machine until it accepts or gives up."""
    decisions: list[RegenDecision] = []
    for outcome in outcomes:
        decision = regen_step(controller, outcome)
        decisions.append(decision)
        if decision.action != RETRY:
            break
        controller = decision.controller
    return decisions


# ---------------------------------------------------------------- chunking

def chunk(duration_s: float, max_chunk_s: float,
          overlap_s: float) -> list[tuple[float, float]]:
    """Cover [0, duration_s] with intervals of at most max_chunk_s seconds.

    Adjacent intervals overlap by exactly overlap_s; a final shorter chunk
    absorbs the remainder.
    """
    if duration_s <= 0:
        raise EditControlError(f"duration must be positive, got {duration_s}")
    if not (0 < overlap_s < max_chunk_s):
        raise EditControlError(f"need 0 < overlap_s < max_chunk_s, got "
                               f"overlap {overlap_s}, max {max_chunk_s}")
    intervals: list[tuple[float, float]] = []
    start = 0.0
    while True:
        end = min(start + max_chunk_s, duration_s)
        intervals.append((start, end))
        if end >= duration_s:
            return intervals
        start = end - overlap_s


# ---------------------------------------------------------------- stitching

@dataclass(frozen=True)
class SplicePoint:
    """Where one overlap was joined, in output sample coordinates."""

    boundary: int            # which segment pair (0 joins segments 0 and 1)
    overlap_start: int       # absolute sample where the overlap begins
    splice: int              # absolute sample of the chosen splice point
    fade_start: int          # absolute first sample of the cross-fade window
    zero_crossing: bool      # False when the midpoint fallback was used

    def to_json_dict(self) -> dict:
        return {
            "boundary": self.boundary,
            "overlap_start": self.overlap_start,
            "splice": self.splice,
            "fade_start": self.fade_start,
            "zero_crossing": self.zero_crossing,
        }


@dataclass(frozen=True)
class StitchPlan:
    segment_offsets: tuple[int, ...]  # output sample offset of each segment
    overlap_samples: tuple[int, ...]  # samples shared by each adjacent pair
    fade_samples: int
    splices: tuple[SplicePoint, ...]

    def to_json_dict(self) -> dict:
        return {
            "segment_offsets": list(self.segment_offsets),
            "overlap_samples": list(self.overlap_samples),
            "fade_samples": self.fade_samples,
            "splices": [s.to_json_dict() for s in self.splices],
        }


def _nearest_zero_crossing(samples: np.ndarray, target: int) -> tuple[int, bool]:
    """Index of the sign change closest to target; ties pick the earlier one.

    A crossing sits between samples i and i+1 when their product is <= 0.
    Returns (index, found); when no crossing exists the target comes back
    with found=False.
    """
    values = samples.astype(np.float64)
    products = values[:-1] * values[1:]
    crossings = np.nonzero(products <= 0.0)[0]
    if crossings.size == 0:
        return target, False
    distances = np.abs(crossings - target)
    best = int(crossings[int(np.argmin(distances))])  # argmin takes the first
    return best, True


def stitch(segments: Sequence[np.ndarray], sample_rate: int, fade_s: float,
           overlap_s: float | Sequence[float]) -> tuple[np.ndarray, StitchPlan]:
    """Join overlapping segments into one waveform.

    ``overlap_s`` gives the overlap between each adjacent pair (one value for
    all pairs or a sequence with one entry per boundary). Within each
    overlap the splice lands on the zero crossing of the earlier segment
    nearest the overlap midpoint, and a linear cross-fade of ``fade_s``
    blends the two sides; everything outside the fade windows is copied
    sample-exact from its source segment.
    """
    if not segments:
        raise StitchError("need at least one segment")
    arrays = [np.asarray(s) for s in segments]
    for i, arr in enumerate(arrays):
        if arr.ndim != 1:
            raise StitchError(f"segment {i} must be mono, got shape {arr.shape}")
    dtype = arrays[0].dtype
    if any(arr.dtype != dtype for arr in arrays):
        raise StitchError("segments must share one sample dtype")
    if sample_rate <= 0:
        raise StitchError(f"sample_rate must be positive, got {sample_rate}")

    n_boundaries = len(arrays) - 1
    if isinstance(overlap_s, (int, float)):
        overlaps_s = [float(overlap_s)] * n_boundaries
    else:
        overlaps_s = [float(v) for v in overlap_s]
        if len(overlaps_s) != n_boundaries:
            raise StitchError(f"{n_boundaries} boundaries but "
                              f"{len(overlaps_s)} overlap values")

    n_fade = max(1, round(fade_s * sample_rate))
    overlaps = [round(v * sample_rate) for v in overlaps_s]
    for b, n_ov in enumerate(overlaps):
        if n_ov < n_fade:
            raise StitchError(f"boundary {b}: overlap of {n_ov} samples is "
                              f"shorter than the {n_fade}-sample fade window")
        left, right = arrays[b], arrays[b + 1]
        if len(left) < n_ov or len(right) < n_ov:
            raise StitchError(f"boundary {b}: segments shorter than the overlap")
    for i, arr in enumerate(arrays):
        need = (overlaps[i - 1] if i > 0 else 0) + (overlaps[i] if i < n_boundaries else 0)
        if len(arr) < need:
            raise StitchError(f"segment {i} is shorter than its combined overlaps")

    if len(arrays) == 1:
        plan = StitchPlan((0,), (), n_fade, ())
        return arrays[0].copy(), plan

    total_len = sum(len(a) for a in arrays) - sum(overlaps)
    out = np.zeros(total_len, dtype=dtype)

    offsets = [0]
    for arr, n_ov in zip(arrays, overlaps):
        offsets.append(offsets[-1] + len(arr) - n_ov)

    # Lay segments front to back so the later one wins inside each overlap,
    # then hand the stretch before the fade window back to the earlier one.
    for i in range(len(arrays)):
        out[offsets[i]:offsets[i] + len(arrays[i])] = arrays[i]

    splices = []
    for b in range(n_boundaries):
        n_ov = overlaps[b]
        left, right = arrays[b], arrays[b + 1]
        overlap_start = offsets[b + 1]
        left_tail = left[len(left) - n_ov:]
        midpoint = n_ov // 2
        splice_local, found = _nearest_zero_crossing(left_tail, midpoint)

        fade_lo = splice_local - n_fade // 2
        fade_lo = min(max(fade_lo, 0), n_ov - n_fade)
        ramp = np.linspace(0.0, 1.0, n_fade)
        left_win = left_tail[fade_lo:fade_lo + n_fade].astype(np.float64)
        right_win = right[fade_lo:fade_lo + n_fade].astype(np.float64)
        mixed = (1.0 - ramp) * left_win + ramp * right_win
        if np.issubdtype(dtype, np.integer):
            mixed = np.rint(mixed).astype(dtype)
        else:
            mixed = mixed.astype(dtype)

        # Left of the fade window the earlier segment wins.
        left_region_start = overlap_start
        left_region_end = overlap_start + fade_lo
        out[left_region_start:left_region_end] = left_tail[:fade_lo]
        out[left_region_end:left_region_end + n_fade] = mixed

        splices.append(SplicePoint(
            boundary=b,
            overlap_start=overlap_start,
            splice=overlap_start + splice_local,
            fade_start=overlap_start + fade_lo,
            zero_crossing=found,
        ))

    plan = StitchPlan(tuple(offsets), tuple(overlaps), n_fade, tuple(splices))
    return out, plan
