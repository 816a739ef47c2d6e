"""Command-line surface.

Subcommands map 1:1 onto library operations; all results go to files or
stdout as JSON/CSV and diagnostics to stderr. Exit codes: 0 success, 2
usage error (argparse), 1 runtime error.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import backend, detector, evaluation, theory
from .errors import ConfigError, SurpMarkError
from .synth import ChainSpec, EmissionSpec, sample_chain, sample_surprisals
from ._rng import STREAM_EXPERIMENT, make_rng

MODES = {"joint": "joint", "constant-mix": "constant_mix"}
ALPHA_MODES = ("per-side", "single")


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path, what):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SurpMarkError(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SurpMarkError(f"{what} {path} is not valid JSON: {exc}") from exc


def cmd_build_ref(args):
    human = detector.read_records(args.human)
    machine = detector.read_records(args.machine)
    meta = dict(kv.split("=", 1) for kv in args.meta or [])
    pack = detector.build_references(
        human, machine, args.k,
        on_short="skip" if args.skip_short else "error", metadata=meta)
    detector.save_pack(pack, args.out)
    print(f"pack written to {args.out} "
          f"(k={pack.k}, n_machine={pack.n_machine}, n_human={pack.n_human})",
          file=sys.stderr)
    return 0


def cmd_score(args):
    pack = detector.load_pack(args.pack)
    docs = detector.read_records(args.infile)
    results = detector.score_batch(pack, docs, tau=args.tau,
                                   mode=MODES[args.mode],
                                   alpha_mode=args.alpha)
    lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in results]
    _emit("\n".join(lines) + "\n", args.out)
    failures = sum(isinstance(r, detector.ScoreFailure) for r in results)
    if failures:
        print(f"{failures} document(s) failed to score", file=sys.stderr)
    return 0


def cmd_eval(args):
    pack = detector.load_pack(args.pack)
    docs = detector.read_records(args.infile)
    unlabeled = [d.id for d in docs if d.label is None]
    if unlabeled:
        raise SurpMarkError(f"{len(unlabeled)} record(s) carry no label, "
                            f"first: {unlabeled[0]!r}")
    scores = {"human": [], "machine": []}
    for doc in docs:
        report = detector.score_text(pack, doc, mode=MODES[args.mode],
                                     alpha_mode=args.alpha)
        scores[doc.label].append(report.delta_gjs)
    result = evaluation.auroc(scores["human"], scores["machine"])
    payload = {"auroc": result.auroc, "n_positive": result.n_positive,
               "n_negative": result.n_negative,
               "score_summary": result.score_summary}
    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def cmd_sweep(args):
    config = _load_json(args.config, "config")
    kind = config.get("experiment")
    if kind == "detection":
        if args.seed is not None:
            config["seed"] = args.seed
        path = evaluation.run_experiment(config, args.out_dir)
        print(f"results written to {path}", file=sys.stderr)
        return 0
    if kind == "k-tradeoff":
        import os
        for field in ("source_a", "source_b", "n_values", "k_values",
                      "trials", "seed"):
            if field not in config:
                raise ConfigError(field, "missing")
        seed = args.seed if args.seed is not None else config["seed"]
        result = theory.k_tradeoff_sweep(
            EmissionSpec.from_dict(config["source_a"]),
            EmissionSpec.from_dict(config["source_b"]),
            config["n_values"], config["k_values"], config["trials"], seed,
            fine_bins=config.get("fine_bins", 256))
        os.makedirs(args.out_dir, exist_ok=True)
        theory.write_sweep_outputs(
            result,
            os.path.join(args.out_dir, "sweep.csv"),
            os.path.join(args.out_dir, "sweep_summary.json"))
        print(f"sweep written to {args.out_dir}", file=sys.stderr)
        return 0
    raise ConfigError("experiment", "must be 'detection' or 'k-tradeoff'")


def cmd_simulate_theory(args):
    config = _load_json(args.config, "config")
    for field in ("m_p", "m_q", "n_ref", "n_test", "trials", "seed"):
        if field not in config:
            raise ConfigError(field, "missing")
    m_p = np.asarray(config["m_p"], dtype=np.float64)
    m_q = np.asarray(config["m_q"], dtype=np.float64)
    seed = args.seed if args.seed is not None else config["seed"]
    from .markov import stationary_distribution
    pi_p = stationary_distribution(m_p)
    pi_q = stationary_distribution(m_q)
    report = {
        # measured assumptions, reported but never enforced
        "diagnostics": {"pi_min": float(min(pi_p.min(), pi_q.min())),
                        "pi_p": pi_p.tolist(), "pi_q": pi_q.tolist()},
    }
    for hyp in config.get("hypotheses", ["H0", "H1"]):
        predicted = theory.theoretical_moments(
            m_p, m_q, config["n_ref"], config["n_test"], hyp)
        mc = theory.mc_delta_gjs(m_p, m_q, config["n_ref"], config["n_test"],
                                 config["trials"], seed, hyp)
        normality = theory.normality_report(mc.samples)
        se = (mc.variance / len(mc.samples)) ** 0.5
        report[hyp] = {
            "predicted": {"mu": predicted.mu, "var": predicted.var,
                          "sigma1_sq": predicted.sigma1_sq,
                          "sigma2_sq": predicted.sigma2_sq,
                          "alpha": predicted.alpha},
            "empirical": {"mean": mc.mean, "variance": mc.variance,
                          "skewness": mc.skewness},
            "normality": normality,
            "mean_z": (mc.mean - predicted.mu) / se if se else 0.0,
            "variance_ratio": mc.variance / predicted.var
            if predicted.var else float("nan"),
        }
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def cmd_gen_synthetic(args):
    config = _load_json(args.config, "config")
    kind = config.get("kind")
    if kind not in ("emission", "chain"):
        raise ConfigError("kind", "must be 'emission' or 'chain'")
    for field in ("spec", "docs", "length"):
        if field not in config:
            raise ConfigError(field, "missing")
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    docs = int(config["docs"])
    length = int(config["length"])
    label = config.get("label")
    prefix = config.get("id_prefix", "doc")
    records = []
    for i in range(docs):
        rng = make_rng(seed, STREAM_EXPERIMENT, i)
        if kind == "emission":
            spec = EmissionSpec.from_dict(config["spec"])
            values = sample_surprisals(spec, length, rng)
        else:
            spec = ChainSpec.from_dict(config["spec"])
            values = sample_chain(spec, length, rng).astype(np.float64)
        records.append(detector.SurprisalRecord(
            id=f"{prefix}-{i}", surprisals=values, label=label))
    detector.write_records(args.out, records)
    print(f"{docs} records written to {args.out}", file=sys.stderr)
    return 0


def cmd_pack_info(args):
    pack = detector.load_pack(args.pack)
    info = {"format_version": pack.format_version, "k": pack.k,
            "n_machine": pack.n_machine, "n_human": pack.n_human,
            "quantizer_fitted_on": pack.quantizer.fitted_on,
            "metadata": pack.metadata}
    print(json.dumps(info, sort_keys=True, indent=2))
    return 0


def cmd_bench(args):
    if args.kernels:
        report = evaluation.bench_kernels()
        print(json.dumps(report, sort_keys=True, indent=2))
        return 0
    if not (args.pack and args.infile):
        raise SurpMarkError("bench needs --pack and --in (or --kernels)")
    t0 = time.perf_counter()
    pack = detector.load_pack(args.pack)
    build_seconds = time.perf_counter() - t0
    docs = detector.read_records(args.infile)
    report = evaluation.throughput_bench(pack, docs, args.repetitions,
                                         build_seconds=build_seconds)
    report["backend"] = backend.BACKEND
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="surpmark",
        description="Reference-based machine-text detection over "
                    "surprisal-state transition dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-ref", help="build a reference pack (offline stage)")
    p.add_argument("--human", required=True, help="human surprisal JSONL")
    p.add_argument("--machine", required=True, help="machine surprisal JSONL")
    p.add_argument("--out", required=True, help="pack output path")
    p.add_argument("--k", type=int, default=None,
                   help="bin count (default: from reference size)")
    p.add_argument("--skip-short", action="store_true",
                   help="warn and skip records shorter than 2 surprisals")
    p.add_argument("--meta", action="append", metavar="KEY=VALUE",
                   help="provenance metadata entries")
    p.set_defaults(func=cmd_build_ref)

    p = sub.add_parser("score", help="score documents against a pack")
    p.add_argument("--pack", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None, help="JSONL output (default stdout)")
    p.add_argument("--tau", type=float, default=None,
                   help="decision threshold; verdicts only when given")
    p.add_argument("--mode", choices=sorted(MODES), default="joint")
    p.add_argument("--alpha", choices=ALPHA_MODES, default="per-side")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="AUROC of a pack on a labeled test set")
    p.add_argument("--pack", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--mode", choices=sorted(MODES), default="joint")
    p.add_argument("--alpha", choices=ALPHA_MODES, default="per-side")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="detection or bin-count sweep from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate-theory",
                       help="moment predictions vs Monte Carlo on fixture chains")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate_theory)

    p = sub.add_parser("gen-synthetic",
                       help="generate surprisal JSONL from a synthetic source")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("pack-info", help="print pack summary")
    p.add_argument("pack")
    p.set_defaults(func=cmd_pack_info)

    p = sub.add_parser("bench", help="throughput or kernel benchmarks")
    p.add_argument("--pack")
    p.add_argument("--in", dest="infile")
    p.add_argument("--out", default=None)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--kernels", action="store_true",
                   help="compare compiled and pure-Python kernels")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SurpMarkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
