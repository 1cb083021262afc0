"""Command-line harness: train, eval, gradcheck, predict, compare-topologies.

Exit codes: 0 on success, 1 on any validation or runtime failure (argparse
itself exits 2 on unknown flags). Failures print one ``error: ...`` line to
stderr; checkpoints are written atomically so a failed run leaves no partial
file behind.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

import numpy as np

from sentpair import encoder
from sentpair.autodiff import GradCheckReport, constant, grad_check, sum_all
from sentpair.checkpoint import load_model, save_model
from sentpair.config import Config, load_config, serialize_config
from sentpair.data import SPLITS, load_sick, make_example, split_examples
from sentpair.embeddings import tokenize
from sentpair.model import build_model
from sentpair.training import evaluate, train

DATA_BASENAMES = ("SICK.txt", "sick.txt", "SICK.tsv", "sick.tsv")


def resolve_data_path(path: str) -> str:
    """Accept a data file directly, or a directory holding one."""
    if os.path.isdir(path):
        for name in DATA_BASENAMES:
            candidate = os.path.join(path, name)
            if os.path.isfile(candidate):
                return candidate
        raise ValueError(
            f"no data file in {path}; looked for {', '.join(DATA_BASENAMES)}"
        )
    if not os.path.isfile(path):
        raise ValueError(f"data path {path} does not exist")
    return path


def _load_examples(data_path: str):
    return load_sick(resolve_data_path(data_path))


def _by_split(examples):
    by_split = {name: split_examples(examples, name) for name in SPLITS}
    if not by_split["train"]:
        raise ValueError("data holds no training-split rows")
    return by_split


def cmd_train(args) -> int:
    config = load_config(args.config)
    examples = _load_examples(args.data)
    by_split = _by_split(examples)
    # vocabulary covers every split so later evaluation sees no surprise words
    model = build_model(config, examples)
    stats = train(model, by_split["train"], config, log_path=args.out + ".log")
    save_model(args.out, model, serialize_config(config))
    last = stats[-1]
    print(
        f"trained {len(by_split['train'])} pairs for {last.epoch} epochs; "
        f"final mean loss {last.mean_loss:.6f}"
    )
    print(f"wrote checkpoint to {args.out}")
    return 0


def cmd_eval(args) -> int:
    model, _ = load_model(args.ckpt)
    examples = _load_examples(args.data)
    selected = split_examples(examples, args.split)
    if not selected:
        raise ValueError(f"data holds no rows for split {args.split!r}")
    report = evaluate(model, selected)
    print(f"task: {model.config.task}  split: {args.split}")
    print(report.format())
    return 0


GRADCHECK_TOL = 1e-4

# tokens are alphabet-only and fill the char grid: zero-padded rows would park
# conv pre-activations exactly on the relu kink, where central differences
# and the subgradient legitimately disagree
_SYNTH_BATCH = [
    ("abcd efgh ijkl", "mnop qrst", 3.6, "NEUTRAL"),
    ("uvwx yzab cdef", "ghij klmn opqr", 4.2, "ENTAILMENT"),
]


def _gradcheck_config(seed: int) -> Config:
    # char_hidden must not be tiny: a token whose whole hidden layer lands
    # dead (probability 2^-hidden) zeroes the highway input exactly, putting
    # its bias pre-activations on the relu kink where central differences
    # and the subgradient legitimately disagree
    return Config(
        task="relatedness",
        d=6,
        layers=2,
        word_dim=8,
        char_l0=4,
        char_width=2,
        char_frames=5,
        char_hidden=16,
        char_dim=6,
        stage1_frames=7,
        stage2_frames=7,
        seed=seed,
    )


def _check_model(task: str, seed: int, rng: np.random.RandomState) -> GradCheckReport:
    config = dataclasses.replace(_gradcheck_config(seed), task=task)
    batch = [make_example(str(i), a, b, s, l) for i, (a, b, s, l) in enumerate(_SYNTH_BATCH)]
    model = build_model(config, batch)
    params = list(model.parameters().values())
    return grad_check(lambda: model.loss(batch), params, max_entries=4, rng=rng)


def _check_tree(seed: int, rng: np.random.RandomState) -> GradCheckReport:
    init_rng = np.random.RandomState(seed)
    p = encoder.init_lstm(init_rng, in_dim=5, d=6, prefix="tree")
    x = np.asarray(init_rng.uniform(-1.0, 1.0, size=(4, 5)))
    tree = encoder.parse_tree("(2 (1) (4 (3)))")

    def f():
        h, _ = encoder.tree_lstm_encode(constant(x), tree, p)
        return sum_all(h)

    return grad_check(f, [t for _, t in p.named_tensors("tree")], max_entries=4, rng=rng)


def cmd_gradcheck(args) -> int:
    start = time.monotonic()
    rng = np.random.RandomState(args.seed)
    sections = [
        ("relatedness model", _check_model("relatedness", args.seed, rng)),
        ("entailment model", _check_model("entailment", args.seed, rng)),
        ("tree composition", _check_tree(args.seed, rng)),
    ]
    worst = 0.0
    entries = 0
    for title, report in sections:
        print(f"== {title} ==")
        print(report.format())
        worst = max(worst, report.max_rel_error)
        entries += sum(n for _, _, n in report.entries)
    elapsed = time.monotonic() - start
    verdict = "PASS" if worst <= GRADCHECK_TOL else "FAIL"
    print(
        f"gradcheck: max relative error {worst:.3e} over {entries} entries "
        f"(tolerance {GRADCHECK_TOL:.0e}, {elapsed:.1f}s): {verdict}"
    )
    return 0 if verdict == "PASS" else 1


def cmd_predict(args) -> int:
    model, _ = load_model(args.ckpt)
    max_len = model.config.max_len
    for lineno, raw in enumerate(sys.stdin, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ValueError(
                f"stdin line {lineno}: expected 2 tab-separated sentences, got {len(fields)}"
            )
        tokens_a = tuple(tokenize(fields[0]))[:max_len]
        tokens_b = tuple(tokenize(fields[1]))[:max_len]
        if not tokens_a or not tokens_b:
            raise ValueError(f"stdin line {lineno}: sentence has no tokens")
        if model.config.task == "relatedness":
            print(model.predict_score(tokens_a, tokens_b))
        else:
            print(model.predict_label(tokens_a, tokens_b))
    return 0


def _topology_row(report) -> str:
    cells = []
    if report.pearson_r is not None:
        cells.append(f"pearson={report.pearson_r:.6f}")
    if report.spearman_rho is not None:
        cells.append(f"spearman={report.spearman_rho:.6f}")
    if report.mse is not None:
        cells.append(f"mse={report.mse:.6f}")
    if report.accuracy is not None:
        cells.append(f"accuracy={report.accuracy:.6f}")
    return "  ".join(cells)


def cmd_compare_topologies(args) -> int:
    config = load_config(args.config)
    examples = _load_examples(args.data)
    by_split = _by_split(examples)
    eval_split = "test" if by_split["test"] else "trial" if by_split["trial"] else "train"
    print(f"task: {config.task}  eval split: {eval_split}")
    for topology in ("I", "II"):
        variant = dataclasses.replace(config, topology=topology)
        model = build_model(variant, examples)
        train(model, by_split["train"], variant)
        report = evaluate(model, by_split[eval_split])
        print(f"topology {topology:3s} {_topology_row(report)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentpair", description="sentence-pair relatedness and entailment toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--data", required=True, help="data file or directory")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on one split")
    p.add_argument("--ckpt", required=True, help="checkpoint path")
    p.add_argument("--data", required=True, help="data file or directory")
    p.add_argument("--split", default="test", choices=SPLITS)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of all parameters")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("predict", help="score tab-separated pairs from stdin")
    p.add_argument("--ckpt", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare-topologies", help="train both stage orders and report")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--data", required=True, help="data file or directory")
    p.set_defaults(func=cmd_compare_topologies)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
