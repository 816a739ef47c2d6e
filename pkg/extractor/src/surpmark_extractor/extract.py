"""Per-token surprisal extraction from a causal language model.

Surprisals come from a single teacher-forced forward pass over each full
sequence: the value at position t is -log p(token_{t+1} | tokens_{1..t}) in
nats, so a text of T tokens yields T-1 values (the first token has no
conditional). Output records are byte-compatible with the surpmark JSONL
interface.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import torch

log = logging.getLogger(__name__)

LABELS = ("human", "machine")


class ExtractionError(Exception):
    pass


class ModelLoadError(ExtractionError):
    pass


class TokenizationError(ExtractionError):
    def __init__(self, text_id, message):
        super().__init__(f"text {text_id!r}: {message}")
        self.text_id = text_id


@dataclass(frozen=True)
class TextItem:
    id: str
    text: str
    label: Optional[str] = None


@dataclass(frozen=True)
class ExtractionJob:
    """One extraction run: a checkpoint identifier plus texts to score.

    ``label`` applies to every record unless a text carries its own.
    ``max_tokens`` caps the scored sequence length; longer texts are
    truncated and flagged in the output record.
    """

    model_identifier: str
    texts: tuple
    label: Optional[str] = None
    device: str = "cpu"
    max_tokens: int = 512
    batch_size: int = 8

    def __post_init__(self):
        if self.max_tokens < 2:
            raise ValueError("max_tokens must be >= 2")
        if self.label is not None and self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS} or None")
        object.__setattr__(self, "texts", tuple(self.texts))


def load_model(identifier, device="cpu"):
    """Load tokenizer and model; deterministic inference mode."""
    from transformers import AutoModelForCausalLM, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(identifier)
        model = AutoModelForCausalLM.from_pretrained(identifier)
    except Exception as exc:
        raise ModelLoadError(f"cannot load {identifier!r}: {exc}") from exc
    model.to(device)
    model.eval()
    return tokenizer, model


def _pad_id(tokenizer, model):
    if tokenizer.pad_token_id is not None:
        return tokenizer.pad_token_id
    if tokenizer.eos_token_id is not None:
        return tokenizer.eos_token_id
    return 0


@torch.no_grad()
def _batch_surprisals(model, id_lists, pad_id, device):
    """Teacher-forced surprisals for a batch of token-id lists (nats)."""
    lengths = [len(ids) for ids in id_lists]
    width = max(lengths)
    batch = torch.full((len(id_lists), width), pad_id, dtype=torch.long)
    mask = torch.zeros((len(id_lists), width), dtype=torch.long)
    for row, ids in enumerate(id_lists):
        batch[row, :len(ids)] = torch.as_tensor(ids, dtype=torch.long)
        mask[row, :len(ids)] = 1
    logits = model(input_ids=batch.to(device),
                   attention_mask=mask.to(device)).logits
    logprobs = torch.log_softmax(logits.float(), dim=-1)
    out = []
    for row, ids in enumerate(id_lists):
        positions = torch.arange(len(ids) - 1)
        targets = batch[row, 1:len(ids)]
        out.append((-logprobs[row, positions, targets]).cpu().double().tolist())
    return out


def extract(job):
    """Run the job; returns record dicts in input order.

    Texts shorter than 2 tokens are reported with a warning line and
    skipped (they carry no conditional probability).
    """
    tokenizer, model = load_model(job.model_identifier, job.device)
    pad_id = _pad_id(tokenizer, model)

    tokenized = []
    for item in job.texts:
        if not isinstance(item, TextItem):
            item = TextItem(**item)
        try:
            ids = tokenizer(item.text, add_special_tokens=False)["input_ids"]
        except Exception as exc:
            raise TokenizationError(item.id, str(exc)) from exc
        truncated = len(ids) > job.max_tokens
        if truncated:
            ids = ids[:job.max_tokens]
        if len(ids) < 2:
            log.warning("skipping %r: %d token(s), need at least 2",
                        item.id, len(ids))
            continue
        tokenized.append((item, ids, truncated))

    records = []
    for start in range(0, len(tokenized), job.batch_size):
        chunk = tokenized[start:start + job.batch_size]
        values = _batch_surprisals(model, [ids for _, ids, _ in chunk],
                                   pad_id, job.device)
        for (item, ids, truncated), surprisals in zip(chunk, values):
            record = {
                "id": item.id,
                "label": item.label if item.label is not None else job.label,
                "surprisals": surprisals,
                "num_tokens": len(ids),
            }
            if truncated:
                record["truncated"] = True
            records.append(record)
    return records


def extract_to_jsonl(job, destination):
    records = extract(job)
    with open(destination, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return records


def read_text_items(path, default_label=None):
    """Read input texts: one {"id", "text"[, "label"]} object per line."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExtractionError(f"line {line_no}: invalid JSON: {exc}")
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise ExtractionError(f"line {line_no}: need 'id' and 'text'")
            items.append(TextItem(id=str(obj["id"]), text=str(obj["text"]),
                                  label=obj.get("label", default_label)))
    return items
