"""CLI: extract surprisals from a causal LM, validate surprisal JSONL."""

import argparse
import json
import logging
import sys

from .extract import (ExtractionError, ExtractionJob, extract_to_jsonl,
                      read_text_items)
from .validate import validate_jsonl


def cmd_extract(args):
    items = read_text_items(args.infile, default_label=args.label)
    job = ExtractionJob(model_identifier=args.model, texts=items,
                        label=args.label, device=args.device,
                        max_tokens=args.max_tokens,
                        batch_size=args.batch_size)
    records = extract_to_jsonl(job, args.out)
    print(f"{len(records)} record(s) written to {args.out}", file=sys.stderr)
    return 0


def cmd_validate(args):
    report = validate_jsonl(args.path)
    print(json.dumps(report.to_dict(), indent=2))
    return 0 if report.ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="surpmark-extract",
        description="Bridge causal language models to surpmark's surprisal "
                    "JSONL interchange format")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="compute per-token surprisals")
    p.add_argument("--model", required=True,
                   help="checkpoint identifier or local path")
    p.add_argument("--in", dest="infile", required=True,
                   help="input texts JSONL: {\"id\", \"text\"[, \"label\"]}")
    p.add_argument("--out", required=True, help="surprisal JSONL output")
    p.add_argument("--max-tokens", type=int, default=512)
    p.add_argument("--label", choices=("human", "machine"), default=None)
    p.add_argument("--device", default="cpu")
    p.add_argument("--batch-size", type=int, default=8)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("validate", help="check a surprisal JSONL file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="warning: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
