"""Build the tiny fixture checkpoint and fixture texts.

Creates a word-level tokenizer and a small GPT-2-style model, trains it
briefly on a synthetic word-Markov corpus (CPU, ~a minute), verifies that
natural text scores lower mean surprisal than uniformly random token
strings, and saves everything under tests/fixtures/tiny-lm plus five
fixture texts in tests/fixtures/texts.jsonl.

Run from the extractor directory:

    python3 tests/fixtures/make_checkpoint.py
"""

import json
import os

import numpy as np
import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

HERE = os.path.dirname(os.path.abspath(__file__))
CKPT_DIR = os.path.join(HERE, "tiny-lm")
TEXTS_PATH = os.path.join(HERE, "texts.jsonl")

WORDS = [
    "the", "a", "stone", "river", "lantern", "old", "quiet", "sings",
    "falls", "turns", "under", "over", "beside", "wind", "harbor",
    "slowly", "brightly", "then", "and", "of", "gate", "winter",
    "morning", "voice", "returns", "rises", "dims", "far", "near", "still",
]
SEED = 20250810


def language_matrix(rng, size):
    m = rng.dirichlet(np.full(size, 0.15), size=size)
    m = 0.95 * m + 0.05 / size
    return m / m.sum(axis=1, keepdims=True)


def sample_doc(rng, matrix, length):
    v = matrix.shape[0]
    state = int(rng.integers(v))
    out = [state]
    for _ in range(length - 1):
        state = int(rng.choice(v, p=matrix[state]))
        out.append(state)
    return out


def build_tokenizer():
    vocab = {"[PAD]": 0, "[UNK]": 1}
    for word in WORDS:
        vocab[word] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    return PreTrainedTokenizerFast(tokenizer_object=tok,
                                   unk_token="[UNK]", pad_token="[PAD]")


def main():
    rng = np.random.default_rng(SEED)
    torch.manual_seed(SEED)

    matrix = language_matrix(rng, len(WORDS))
    docs = [sample_doc(rng, matrix, int(rng.integers(30, 60)))
            for _ in range(400)]

    tokenizer = build_tokenizer()
    offset = 2  # word id -> token id shift past the special tokens
    stream = [w + offset for doc in docs for w in doc]

    config = GPT2Config(vocab_size=len(WORDS) + offset, n_positions=128,
                        n_embd=32, n_layer=2, n_head=2,
                        bos_token_id=0, eos_token_id=0, pad_token_id=0)
    model = GPT2LMHeadModel(config)
    optimizer = torch.optim.Adam(model.parameters(), lr=3e-3)

    block, batch = 32, 16
    data = torch.as_tensor(stream[:len(stream) // block * block],
                           dtype=torch.long).view(-1, block)
    model.train()
    for step in range(400):
        idx = torch.as_tensor(
            rng.integers(0, data.shape[0], size=batch), dtype=torch.long)
        chunk = data[idx]
        loss = model(input_ids=chunk, labels=chunk).loss
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if step % 100 == 0:
            print(f"step {step}: loss {loss.item():.3f}")
    model.eval()

    # sanity: natural text must score below uniformly random token strings
    def mean_surprisal(token_ids):
        ids = torch.as_tensor([token_ids], dtype=torch.long)
        with torch.no_grad():
            logprobs = torch.log_softmax(model(input_ids=ids).logits.float(), -1)
        targets = ids[0, 1:]
        return float((-logprobs[0, torch.arange(len(token_ids) - 1),
                                targets]).mean())

    natural = [sample_doc(rng, matrix, 50) for _ in range(20)]
    random_docs = [rng.integers(0, len(WORDS), size=50).tolist()
                   for _ in range(20)]
    nat = np.mean([mean_surprisal([w + offset for w in d]) for d in natural])
    rnd = np.mean([mean_surprisal([w + offset for w in d]) for d in random_docs])
    print(f"mean surprisal: natural={nat:.3f} random={rnd:.3f} "
          f"(log V = {np.log(len(WORDS)):.3f})")
    assert nat < rnd, "checkpoint failed the natural-vs-random sanity check"

    os.makedirs(CKPT_DIR, exist_ok=True)
    model.save_pretrained(CKPT_DIR)
    tokenizer.save_pretrained(CKPT_DIR)
    print(f"checkpoint saved to {CKPT_DIR}")

    with open(TEXTS_PATH, "w", encoding="utf-8") as fh:
        for i in range(5):
            words = [WORDS[w] for w in sample_doc(rng, matrix, 40)]
            fh.write(json.dumps({"id": f"fixture-{i}",
                                 "text": " ".join(words)}) + "\n")
    print(f"fixture texts written to {TEXTS_PATH}")


if __name__ == "__main__":
    main()
