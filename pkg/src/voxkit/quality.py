"""Rule-based quality filtering of aligned utterance records.

Each filter fragment returns the reason codes it found; run_chain runs every
fragment and accumulates reasons rather than short-circuiting, so a verdict
lists everything wrong with a record. A record passes exactly when no reason
fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .aligner import unaligned_gaps
from .manifest import UtteranceRecord
from .textnorm import (
    DEFAULT_MAX_SYMBOL_FRACTION,
    LanguageProfile,
    SUPPORTED_LANGUAGES,
    char_ratio,
    load_profiles,
    validate_charset,
)

# Canonical reason codes in report order.
LOW_CONFIDENCE = "low_confidence"
TOO_SHORT = "too_short"
TOO_LONG = "too_long"
LONG_GAP = "long_gap"
RATE_LOW = "rate_low"
RATE_HIGH = "rate_high"
BAD_CHARSET = "bad_charset"
BAD_LANGUAGE = "bad_language"

REASON_ORDER = (LOW_CONFIDENCE, TOO_SHORT, TOO_LONG, LONG_GAP, RATE_LOW,
                RATE_HIGH, BAD_CHARSET, BAD_LANGUAGE)


class QualityError(ValueError):
    pass


class MissingConfidenceError(QualityError):
    """The record has no alignment confidence to test (bad input, not a fail)."""


class InsufficientDataError(QualityError):
    """Too few records to fit ratio bounds."""


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds and lookups for the filter chain.

    Confidence thresholds resolve most-specific first: the (source, language)
    pair, then the source, then the language, then the global default. A
    record passes the confidence check only when its confidence exceeds the
    resolved threshold.
    """

    default_confidence_threshold: float = 0.3
    thresholds_by_source_language: Mapping[tuple[str, str], float] = field(default_factory=dict)
    thresholds_by_source: Mapping[str, float] = field(default_factory=dict)
    thresholds_by_language: Mapping[str, float] = field(default_factory=dict)
    min_duration_s: float = 0.5
    max_duration_s: float = 30.0
    max_gap_s: float = 4.0
    languages: tuple[str, ...] = SUPPORTED_LANGUAGES
    profiles: Mapping[str, LanguageProfile] = field(default_factory=dict)
    max_symbol_fraction: float = DEFAULT_MAX_SYMBOL_FRACTION

    def __post_init__(self):
        thresholds = [self.default_confidence_threshold,
                      *self.thresholds_by_source_language.values(),
                      *self.thresholds_by_source.values(),
                      *self.thresholds_by_language.values()]
        for value in thresholds:
            if not (0.0 <= value <= 1.0):
                raise QualityError(f"confidence threshold {value} outside [0, 1]")
        if not (0 < self.min_duration_s < self.max_duration_s):
            raise QualityError(f"need 0 < min_duration_s < max_duration_s, got "
                               f"[{self.min_duration_s}, {self.max_duration_s}]")
        if self.max_gap_s <= 0:
            raise QualityError(f"max_gap_s must be positive, got {self.max_gap_s}")

    @classmethod
    def with_default_profiles(cls, profiles_dir=None, **kwargs) -> "FilterConfig":
        languages = kwargs.get("languages", SUPPORTED_LANGUAGES)
        profiles = load_profiles(tuple(languages), profiles_dir)
        return cls(profiles=profiles, **kwargs)

    def confidence_threshold(self, source: str, language: str) -> float:
        pair = self.thresholds_by_source_language.get((source, language))
        if pair is not None:
            return pair
        by_source = self.thresholds_by_source.get(source)
        if by_source is not None:
            return by_source
        by_language = self.thresholds_by_language.get(language)
        if by_language is not None:
            return by_language
        return self.default_confidence_threshold


@dataclass(frozen=True)
class FilterVerdict:
    key: str
    passed: bool
    reasons: tuple[str, ...]

    def __post_init__(self):
        if self.passed != (not self.reasons):
            raise QualityError("verdict passes exactly when no reason fired")


def filter_confidence(record: UtteranceRecord, config: FilterConfig) -> list[str]:
    """Fails unless confidence strictly exceeds the resolved threshold."""
    if record.avg_confidence is None:
        raise MissingConfidenceError(
            f"record {record.key!r} has no avg_confidence; align it first")
    threshold = config.confidence_threshold(record.source, record.language)
    if record.avg_confidence <= threshold:
        return [LOW_CONFIDENCE]
    return []


def filter_duration(record: UtteranceRecord, config: FilterConfig) -> list[str]:
    """Boundary durations are inclusive: exactly min or max passes."""
    if record.duration_s < config.min_duration_s:
        return [TOO_SHORT]
    if record.duration_s > config.max_duration_s:
        return [TOO_LONG]
    return []


def filter_gaps(record: UtteranceRecord, config: FilterConfig) -> list[str]:
    """Fails when any unaligned stretch strictly exceeds the gap cap.

    A record with no aligned words counts as one gap spanning the whole
    duration.
    """
    for start, end in unaligned_gaps(record.words, record.duration_s):
        if end - start > config.max_gap_s:
            return [LONG_GAP]
    return []


def filter_rate(record: UtteranceRecord, config: FilterConfig) -> list[str]:
    """Characters-per-second must fall inside the profile bounds, inclusive."""
    profile = config.profiles.get(record.language)
    if profile is None:
        return []  # no profile to judge against; the language check reports it
    ratio = char_ratio(record.normalized_text, record.duration_s)
    if ratio < profile.min_ratio:
        return [RATE_LOW]
    if ratio > profile.max_ratio:
        return [RATE_HIGH]
    return []


def filter_language(record: UtteranceRecord, config: FilterConfig) -> list[str]:
    """Whitelist the language, then validate the raw text's characters."""
    if record.language not in config.languages:
        return [BAD_LANGUAGE]
    profile = config.profiles.get(record.language)
    if profile is None:
        return [BAD_LANGUAGE]
    verdict = validate_charset(record.raw_text, profile, config.max_symbol_fraction)
    if not verdict.ok:
        return [BAD_CHARSET]
    return []


_FRAGMENTS = (filter_confidence, filter_duration, filter_gaps, filter_rate,
              filter_language)


def run_chain(record: UtteranceRecord, config: FilterConfig) -> FilterVerdict:
    """Run every filter fragment and accumulate reasons in canonical order."""
    reasons: set[str] = set()
    for fragment in _FRAGMENTS:
        reasons.update(fragment(record, config))
    ordered = tuple(r for r in REASON_ORDER if r in reasons)
    return FilterVerdict(key=record.key, passed=not ordered, reasons=ordered)


def fit_ratio_bounds(records: Iterable[UtteranceRecord], language: str,
                     percentile: float = 1.0) -> tuple[float, float]:
    """Fit [min_ratio, max_ratio] from a corpus sample of one language.

    Returns the p-th smallest and p-th largest character ratios by the
    nearest-rank rule: with n records the bounds are the ceil(p/100*n)-th
    value from each end of the sorted ratios. Needs at least 20 records.
    """
    if not (0 < percentile < 50):
        raise QualityError(f"percentile must be in (0, 50), got {percentile}")
    ratios = sorted(
        char_ratio(r.normalized_text, r.duration_s)
        for r in records if r.language == language
    )
    if len(ratios) < 20:
        raise InsufficientDataError(
            f"need at least 20 {language!r} records to fit bounds, "
            f"got {len(ratios)}")
    rank = math.ceil(percentile / 100.0 * len(ratios))
    rank = min(max(rank, 1), len(ratios))
    return ratios[rank - 1], ratios[len(ratios) - rank]
