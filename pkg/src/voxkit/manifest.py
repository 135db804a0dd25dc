"""Utterance manifests: the JSONL interchange format between pipeline stages.

A manifest is a UTF-8 JSONL file, one utterance record per line. Field names
and serialization are part of the on-disk contract: times are written at
millisecond (3-decimal) precision, keys are unique within a file, and writing
the same records twice produces byte-identical output. Unknown fields found
in input lines are carried through untouched so foreign annotations survive a
round-trip.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator

# Canonical field order for serialization. Extra fields follow, sorted by name.
_FIELD_ORDER = (
    "key",
    "language",
    "audio_ref",
    "duration_s",
    "raw_text",
    "normalized_text",
    "romanized_tokens",
    "words",
    "avg_confidence",
    "source",
)

# Fields a record cannot exist without. The remaining canonical fields are
# filled by later pipeline stages and default to empty when absent on read.
_REQUIRED_FIELDS = ("key", "language", "audio_ref", "duration_s", "raw_text")

_WORD_FIELDS = ("word", "start_s", "end_s", "score")

# Tolerance for checking avg_confidence against the mean of word scores.
_CONFIDENCE_TOL = 1e-6


class ManifestError(Exception):
    """Base class for manifest validation and I/O problems."""

    def __init__(self, message: str, *, line_no: int | None = None,
                 field_name: str | None = None, key: str | None = None):
        parts = []
        if line_no is not None:
            parts.append(f"line {line_no}")
        if key is not None:
            parts.append(f"key {key!r}")
        if field_name is not None:
            parts.append(f"field {field_name!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.line_no = line_no
        self.field_name = field_name
        self.key = key


class SchemaError(ManifestError):
    """A line or record does not conform to the manifest schema."""


class DuplicateKeyError(ManifestError):
    """The same key appears more than once in a manifest."""


def quantize_time(value: float) -> float:
    """Round a time in seconds to the manifest's millisecond precision."""
    return round(float(value), 3)


@dataclass(frozen=True)
class WordSpan:
    """One aligned word: surface form, time span in seconds, score in [0, 1]."""

    word: str
    start_s: float
    end_s: float
    score: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "word": self.word,
            "start_s": quantize_time(self.start_s),
            "end_s": quantize_time(self.end_s),
            "score": self.score,
        }


@dataclass(frozen=True)
class UtteranceRecord:
    """One utterance with text, optional alignment, and provenance.

    ``words`` and ``avg_confidence`` stay empty/None until alignment has run;
    ``normalized_text`` and ``romanized_tokens`` until normalization has.
    ``extra`` holds unknown input fields verbatim for round-tripping.
    """

    key: str
    language: str
    audio_ref: str
    duration_s: float
    raw_text: str
    normalized_text: str = ""
    romanized_tokens: tuple[str, ...] = ()
    words: tuple[WordSpan, ...] = ()
    avg_confidence: float | None = None
    source: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        # Canonicalize container types so equality is insensitive to whether
        # the caller passed lists or tuples.
        object.__setattr__(self, "romanized_tokens", tuple(self.romanized_tokens))
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "duration_s", float(self.duration_s))

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "key": self.key,
            "language": self.language,
            "audio_ref": self.audio_ref,
            "duration_s": quantize_time(self.duration_s),
            "raw_text": self.raw_text,
            "normalized_text": self.normalized_text,
            "romanized_tokens": list(self.romanized_tokens),
            "words": [w.to_json_dict() for w in self.words],
            "avg_confidence": self.avg_confidence,
            "source": self.source,
        }
        for name in sorted(self.extra):
            if name not in _FIELD_ORDER:
                out[name] = self.extra[name]
        return out


def _type_error(line_no: int | None, field_name: str, expected: str, got: Any) -> SchemaError:
    return SchemaError(
        f"expected {expected}, got {type(got).__name__}",
        line_no=line_no, field_name=field_name,
    )


def _check_str(obj: dict, name: str, line_no: int | None, default: str | None = None) -> str:
    if name not in obj:
        if default is not None:
            return default
        raise SchemaError("missing required field", line_no=line_no, field_name=name)
    value = obj[name]
    if not isinstance(value, str):
        raise _type_error(line_no, name, "string", value)
    return value


def _check_number(obj: dict, name: str, line_no: int | None) -> float:
    if name not in obj:
        raise SchemaError("missing required field", line_no=line_no, field_name=name)
    value = obj[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _type_error(line_no, name, "number", value)
    return float(value)


def _parse_word(obj: Any, line_no: int | None, index: int) -> WordSpan:
    if not isinstance(obj, dict):
        raise _type_error(line_no, f"words[{index}]", "object", obj)
    for name in _WORD_FIELDS:
        if name not in obj:
            raise SchemaError("missing required field", line_no=line_no,
                              field_name=f"words[{index}].{name}")
    word = obj["word"]
    if not isinstance(word, str):
        raise _type_error(line_no, f"words[{index}].word", "string", word)
    values = {}
    for name in ("start_s", "end_s", "score"):
        v = obj[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise _type_error(line_no, f"words[{index}].{name}", "number", v)
        values[name] = float(v)
    return WordSpan(word=word, **values)


def record_from_json_dict(obj: dict[str, Any], line_no: int | None = None) -> UtteranceRecord:
    """Build a validated record from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise _type_error(line_no, "<line>", "object", obj)

    key = _check_str(obj, "key", line_no)
    language = _check_str(obj, "language", line_no)
    audio_ref = _check_str(obj, "audio_ref", line_no)
    duration_s = _check_number(obj, "duration_s", line_no)
    raw_text = _check_str(obj, "raw_text", line_no)
    normalized_text = _check_str(obj, "normalized_text", line_no, default="")
    source = _check_str(obj, "source", line_no, default="")

    tokens_raw = obj.get("romanized_tokens", [])
    if not isinstance(tokens_raw, list) or any(not isinstance(t, str) for t in tokens_raw):
        raise _type_error(line_no, "romanized_tokens", "list of strings", tokens_raw)

    words_raw = obj.get("words", [])
    if not isinstance(words_raw, list):
        raise _type_error(line_no, "words", "list", words_raw)
    words = tuple(_parse_word(w, line_no, i) for i, w in enumerate(words_raw))

    avg_confidence = obj.get("avg_confidence")
    if avg_confidence is not None:
        if isinstance(avg_confidence, bool) or not isinstance(avg_confidence, (int, float)):
            raise _type_error(line_no, "avg_confidence", "number or null", avg_confidence)
        avg_confidence = float(avg_confidence)

    extra = {k: v for k, v in obj.items() if k not in _FIELD_ORDER}

    record = UtteranceRecord(
        key=key, language=language, audio_ref=audio_ref, duration_s=duration_s,
        raw_text=raw_text, normalized_text=normalized_text,
        romanized_tokens=tuple(tokens_raw), words=words,
        avg_confidence=avg_confidence, source=source, extra=extra,
    )
    validate_record(record, line_no=line_no)
    return record


def validate_record(record: UtteranceRecord, line_no: int | None = None) -> None:
    """Raise SchemaError if the record violates a manifest invariant."""
    if not record.key:
        raise SchemaError("key must be non-empty", line_no=line_no, field_name="key")
    if not record.language:
        raise SchemaError("language must be non-empty", line_no=line_no,
                          field_name="language", key=record.key)
    if not (math.isfinite(record.duration_s) and record.duration_s > 0):
        raise SchemaError(f"duration_s must be finite and positive, got {record.duration_s}",
                          line_no=line_no, field_name="duration_s", key=record.key)
    if record.avg_confidence is not None and not (0.0 <= record.avg_confidence <= 1.0):
        raise SchemaError(f"avg_confidence {record.avg_confidence} outside [0, 1]",
                          line_no=line_no, field_name="avg_confidence", key=record.key)

    prev_end = None
    for i, span in enumerate(record.words):
        name = f"words[{i}]"
        if not (0.0 <= span.start_s < span.end_s):
            raise SchemaError(
                f"span [{span.start_s}, {span.end_s}) is empty or negative",
                line_no=line_no, field_name=name, key=record.key)
        if quantize_time(span.end_s) > quantize_time(record.duration_s):
            raise SchemaError(
                f"span ends at {span.end_s} beyond duration {record.duration_s}",
                line_no=line_no, field_name=name, key=record.key)
        if not (0.0 <= span.score <= 1.0):
            raise SchemaError(f"score {span.score} outside [0, 1]",
                              line_no=line_no, field_name=name, key=record.key)
        if prev_end is not None and span.start_s < prev_end:
            raise SchemaError(
                f"span starts at {span.start_s} before previous end {prev_end}",
                line_no=line_no, field_name=name, key=record.key)
        prev_end = span.end_s

    if record.words:
        if record.romanized_tokens and len(record.words) != len(record.romanized_tokens):
            raise SchemaError(
                f"{len(record.words)} word spans but {len(record.romanized_tokens)} "
                "romanized tokens", line_no=line_no, field_name="words", key=record.key)
        if record.avg_confidence is not None:
            mean_score = sum(w.score for w in record.words) / len(record.words)
            if abs(record.avg_confidence - mean_score) > _CONFIDENCE_TOL:
                raise SchemaError(
                    f"avg_confidence {record.avg_confidence} does not match word "
                    f"score mean {mean_score}", line_no=line_no,
                    field_name="avg_confidence", key=record.key)


def record_to_line(record: UtteranceRecord) -> str:
    """Serialize one record to its canonical JSONL line (no newline)."""
    return json.dumps(record.to_json_dict(), ensure_ascii=False)


def read_manifest(path: str | Path) -> Iterator[UtteranceRecord]:
    """Yield records from a JSONL manifest in file order.

    Raises SchemaError with the 1-based line number for malformed lines and
    DuplicateKeyError when a key repeats within the file.
    """
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", line_no=line_no) from exc
            record = record_from_json_dict(obj, line_no=line_no)
            if record.key in seen:
                raise DuplicateKeyError("key appears more than once",
                                        line_no=line_no, key=record.key)
            seen.add(record.key)
            yield record


def write_manifest(records: Iterable[UtteranceRecord], path: str | Path) -> int:
    """Write records as JSONL. Returns the number of records written.

    Output is byte-stable: the same records always produce the same file.
    Duplicate keys are rejected before anything is written.
    """
    records = list(records)
    seen: set[str] = set()
    for record in records:
        validate_record(record)
        if record.key in seen:
            raise DuplicateKeyError("key appears more than once", key=record.key)
        seen.add(record.key)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_line(record))
            fh.write("\n")
    return len(records)


@dataclass(frozen=True)
class SourceAdapterSpec:
    """How to map one source corpus's row schema onto utterance records.

    ``field_map`` maps record field names to source row keys; ``defaults``
    supplies constant values for fields the source lacks. Every one of the
    required record fields must be reachable through one of the two.
    """

    source: str
    field_map: dict[str, str] = field(default_factory=dict)
    defaults: dict[str, Any] = field(default_factory=dict)

    # Record fields an adapter is allowed to populate.
    _ADAPTABLE = ("key", "language", "audio_ref", "duration_s", "raw_text")


class AdapterError(ManifestError):
    """A source row cannot be mapped onto a record."""


def adapt(source_row: dict[str, Any], spec: SourceAdapterSpec) -> UtteranceRecord:
    """Map one raw source row to a record, leaving alignment fields empty."""
    values: dict[str, Any] = {}
    for name in SourceAdapterSpec._ADAPTABLE:
        if name in spec.field_map:
            src_key = spec.field_map[name]
            if src_key in source_row:
                values[name] = source_row[src_key]
                continue
        if name in spec.defaults:
            values[name] = spec.defaults[name]
            continue
        raise AdapterError("no mapping or default for required field",
                           field_name=name)

    for name in ("key", "language", "audio_ref", "raw_text"):
        if not isinstance(values[name], str):
            values[name] = str(values[name])
    try:
        values["duration_s"] = float(values["duration_s"])
    except (TypeError, ValueError) as exc:
        raise AdapterError(f"duration_s not numeric: {values['duration_s']!r}",
                           field_name="duration_s", key=values["key"]) from exc

    record = UtteranceRecord(source=spec.source, **values)
    validate_record(record)
    return record


def with_words(record: UtteranceRecord, words: Iterable[WordSpan],
               avg_confidence: float) -> UtteranceRecord:
    """Return a copy of the record with alignment results attached."""
    return replace(record, words=tuple(words), avg_confidence=avg_confidence)
