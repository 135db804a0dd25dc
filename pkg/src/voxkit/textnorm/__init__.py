"""Language-aware text normalization and romanization."""

from .core import (
    CharsetVerdict,
    DEFAULT_MAX_SYMBOL_FRACTION,
    EmptyTextError,
    PauseTagging,
    char_ratio,
    normalize,
    pause_tags,
    validate_charset,
)
from .numbers import NumberExpansionError, number_to_words
from .profiles import (
    LanguageProfile,
    ProfileError,
    SUPPORTED_LANGUAGES,
    load_profile,
    load_profiles,
    parse_profile,
)
from .romanize import UnmappableCharacterError, romanize

__all__ = [
    "CharsetVerdict",
    "DEFAULT_MAX_SYMBOL_FRACTION",
    "EmptyTextError",
    "LanguageProfile",
    "NumberExpansionError",
    "PauseTagging",
    "ProfileError",
    "SUPPORTED_LANGUAGES",
    "UnmappableCharacterError",
    "char_ratio",
    "load_profile",
    "load_profiles",
    "normalize",
    "number_to_words",
    "parse_profile",
    "pause_tags",
    "romanize",
    "validate_charset",
]
