"""Bridge from causal language models to surpmark's surprisal JSONL."""

from .extract import (ExtractionError, ExtractionJob, ModelLoadError,
                      TextItem, TokenizationError, extract, extract_to_jsonl,
                      read_text_items)
from .validate import ValidationReport, validate_jsonl

__version__ = "0.1.0"

__all__ = [
    "ExtractionError",
    "ExtractionJob",
    "ModelLoadError",
    "TextItem",
    "TokenizationError",
    "ValidationReport",
    "extract",
    "extract_to_jsonl",
    "read_text_items",
    "validate_jsonl",
]
