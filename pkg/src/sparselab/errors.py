"""Error taxonomy shared across the package.

The CLI maps these onto its exit-code contract: malformed input -> 2,
parameter errors -> 3, failed verification assertions -> 1.
"""

from __future__ import annotations


class SparselabError(Exception):
    """Base class for package errors."""


class ParameterError(SparselabError):
    """An argument is outside the admissible range of the operation."""


class NormalizationError(ParameterError):
    """An input required to be normalized deviates beyond tolerance."""


class MalformedInputError(SparselabError):
    """Unparseable or structurally invalid serialized input."""


class GenerationError(SparselabError):
    """A randomized generator exhausted its rejection budget."""


class HypothesisError(SparselabError):
    """A lemma hypothesis fails for the supplied data (names the witness)."""


class VerificationError(SparselabError):
    """A checked inequality failed in assert mode (names seed and step)."""
