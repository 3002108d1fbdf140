"""Fixture corpora and a config that exercises every analysis through the CLI."""

from __future__ import annotations

import json
from pathlib import Path

from tokenstat.synth import zipfian_corpus

FULL_SUITE = """\
seed = {seed}
out = "{out}"
analyses = ["ingest", "zipf", "heaps", "yule", "benford", "compress", "purity", "pcfg", "embed", "align"]

[[corpus]]
name = "alpha"
path = "alpha.jsonl"

[[corpus]]
name = "beta"
path = "beta.jsonl"

[zipf]
cap = 5000

[purity]
granularity = "part"

[pcfg]
nt = 3
pt = 4
epochs = 3
seeds = 2
test_frac = 0.2

[embed]
dim = 6
window = 3
epochs = 8

[align]
k = 4
iters = 20
"""


def write_labelled_corpus(path: Path, num_tokens: int, seed: int) -> Path:
    """Zipfian sentences of 10 tokens with part labels derived from the tokens."""
    corpus = zipfian_corpus(1.8, num_tokens, seed, sentence_length=10)
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus:
            toks = s.tokens.tolist()
            labels = {"part": sorted({t % 3 for t in toks})}
            fh.write(json.dumps({"id": s.id, "tokens": toks, "labels": labels}) + "\n")
    return path


def write_full_suite(root: Path, seed: int = 0, out: str = "out") -> Path:
    write_labelled_corpus(root / "alpha.jsonl", 4000, 1)
    write_labelled_corpus(root / "beta.jsonl", 4000, 2)
    config = root / "suite.toml"
    config.write_text(FULL_SUITE.format(seed=seed, out=out), encoding="utf-8")
    return config


def bundle(directory: Path) -> dict[str, bytes]:
    return {p.relative_to(directory).as_posix(): p.read_bytes()
            for p in sorted(directory.rglob("*")) if p.is_file()}
