"""Run configuration, per-analysis runners and report bundles.

A run applies a set of analyses to one or more corpora and writes, into the
output directory, one ``<corpus>.<analysis>.json`` report per pair, plot-ready
CSVs next to it, and a ``summary.json``.  Reports are serialized with sorted
keys and carry no timestamps or output paths, so equal configs and seeds give
byte-identical bundles.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .benford import benford_digits
from .coding import DEFAULT_STREAM_CAP, compression_report
from .corpus import Corpus, load_corpus, ngram_windows
from .embedding import (
    build_window_cooc,
    compare_centers,
    glove_train,
    quantize,
    read_vectors,
    write_distance_csv,
    write_vectors,
)
from .grammar import induce_grammar, parse_corpus, perplexity, tree_stats
from .grammar.trees import ParseTree
from .innovation import fit_heaps, fit_yule_simon, frequency_histogram, heaps_curve, yule_simon_pmf
from .ngrams import DEFAULT_CAP, count_ngrams, rank_frequency
from .powerlaw import compare_power_law_lognormal, fit_lognormal, fit_power_law
from .purity import build_part_cooc, purity_report
from .synth import SYNTH_KINDS, synth_corpus

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists every issue found."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


# name -> {param: default}; the default's type is the accepted type
# (None means an optional int).
ANALYSIS_PARAMS: dict[str, dict[str, Any]] = {
    "ingest": {},
    "zipf": {"n": 1, "cap": DEFAULT_CAP, "xmin": None},
    "heaps": {"n": 1, "stride": 1},
    "yule": {"n": 1, "cap": DEFAULT_CAP},
    "benford": {"n": 1, "cap": DEFAULT_CAP},
    "compress": {"n": 1, "cap": DEFAULT_STREAM_CAP},
    "purity": {"granularity": "part"},
    "pcfg": {"nt": 30, "pt": 60, "epochs": 15, "seeds": 5, "max_len": 40, "min_len": 2,
             "test_frac": 0.1, "max_sentences": None},
    "embed": {"dim": 100, "window": 10, "weighting": "inverse-distance", "epochs": 50, "lr": 0.05,
              "xmax": 100.0, "a": 0.75},
    "align": {"k": 256, "iters": 100, "center": False},
}
ANALYSES = tuple(ANALYSIS_PARAMS)
CORPUS_KEYS = {"name", "path", "format", "vocab_size", "synth", "params"}
TOP_KEYS = {"seed", "out", "analyses", "corpus", "vectors"} | set(ANALYSES)


def subseed(seed: int, name: str) -> int:
    """Deterministic per-analysis seed derived from the run seed and a name."""
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode())]).generate_state(1)[0])


@dataclass
class CorpusSpec:
    name: str
    path: str | None = None
    format: str = "jsonl"
    vocab_size: int | None = None
    synth: str | None = None
    params: dict = field(default_factory=dict)

    def stamp(self) -> dict:
        out = {"name": self.name, "format": self.format, "vocab_size": self.vocab_size}
        if self.synth is not None:
            out.update(synth=self.synth, params=dict(self.params))
        else:
            out["path"] = self.path
        return out

    def load(self, seed: int, base_dir: Path | None = None) -> Corpus:
        if self.synth is not None:
            corpus = synth_corpus(self.synth, subseed(seed, "synth:" + self.name), **self.params)
            return Corpus(self.name, corpus.sentences, corpus.vocab_size)
        return load_corpus((base_dir or Path.cwd()) / self.path, self.format, self.vocab_size, self.name)


@dataclass
class RunConfig:
    corpora: list[CorpusSpec]
    analyses: list[str]
    params: dict[str, dict[str, Any]]
    out: Path
    seed: int = 0
    vectors: dict[str, str] = field(default_factory=dict)

    def stamp(self) -> dict:
        """Everything that determines the results (the output directory does not)."""
        return {
            "seed": self.seed,
            "analyses": list(self.analyses),
            "corpora": [c.stamp() for c in self.corpora],
            "params": {a: dict(self.params[a]) for a in self.analyses},
            "vectors": dict(self.vectors),
        }


def _coerce(name: str, key: str, value, default, problems: list[str]):
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif default is None or isinstance(default, int):
        ok = (value is None and default is None) or (isinstance(value, int) and not isinstance(value, bool))
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = isinstance(value, type(default))
    if not ok:
        problems.append(f"[{name}] {key}: expected {type(default).__name__ if default is not None else 'int'},"
                        f" got {value!r}")
    return value


def build_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a raw mapping (parsed TOML merged with flags) into a :class:`RunConfig`.

    Every problem is collected before raising, and referenced files must
    exist.  Relative paths resolve against ``base_dir`` for the existence
    check but are recorded as written.
    """
    problems: list[str] = []
    base_dir = base_dir or Path.cwd()
    for key in sorted(set(raw) - TOP_KEYS):
        problems.append(f"unknown config key {key!r}")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        problems.append(f"seed must be a non-negative integer, got {seed!r}")
        seed = 0

    analyses = raw.get("analyses", [])
    if isinstance(analyses, str):
        analyses = [analyses]
    if not analyses:
        problems.append("no analyses selected")
    for a in analyses:
        if a not in ANALYSIS_PARAMS:
            problems.append(f"unknown analysis {a!r} (choose from {', '.join(ANALYSES)})")
    analyses = [a for a in ANALYSES if a in analyses]

    params: dict[str, dict[str, Any]] = {}
    for a in ANALYSES:
        section = raw.get(a, {})
        if not isinstance(section, dict):
            problems.append(f"[{a}] must be a table")
            section = {}
        merged = dict(ANALYSIS_PARAMS[a])
        for key, value in section.items():
            if key not in merged:
                problems.append(f"[{a}] unknown parameter {key!r}")
                continue
            merged[key] = _coerce(a, key, value, ANALYSIS_PARAMS[a][key], problems)
        params[a] = merged

    corpora: list[CorpusSpec] = []
    for i, c in enumerate(raw.get("corpus", [])):
        where = f"corpus #{i + 1}"
        unknown = set(c) - CORPUS_KEYS
        if unknown:
            problems.append(f"{where}: unknown key(s) {sorted(unknown)}")
        has_path, has_synth = "path" in c, "synth" in c
        if has_path == has_synth:
            problems.append(f"{where}: give exactly one of 'path' or 'synth'")
            continue
        fmt = c.get("format", "jsonl")
        if fmt not in ("jsonl", "binary", "bin"):
            problems.append(f"{where}: unknown format {fmt!r}")
        if has_path:
            path = str(c["path"])
            if not (base_dir / path).is_file():
                problems.append(f"{where}: corpus file not found: {path}")
            name = c.get("name", Path(path).stem)
        else:
            if c["synth"] not in SYNTH_KINDS:
                problems.append(f"{where}: unknown synthetic kind {c['synth']!r}")
            path = None
            name = c.get("name", c["synth"])
        corpora.append(CorpusSpec(str(name), path, fmt, c.get("vocab_size"), c.get("synth"),
                                  dict(c.get("params", {}))))
    names = [c.name for c in corpora]
    for n in sorted({n for n in names if names.count(n) > 1}):
        problems.append(f"duplicate corpus name {n!r}")

    vectors = {str(k): str(v) for k, v in raw.get("vectors", {}).items()}
    for name, path in sorted(vectors.items()):
        if not (base_dir / path).is_file():
            problems.append(f"vector file not found: {path}")

    needs_corpus = [a for a in analyses if a != "align" or not vectors]
    if needs_corpus and not corpora:
        problems.append(f"analyses {needs_corpus} need at least one corpus")
    if "align" in analyses and not vectors:
        if "embed" not in analyses:
            problems.append("align needs [vectors] files or the embed analysis in the same run")
        elif len(corpora) < 2:
            problems.append("align over trained embeddings needs at least two corpora")
    if "align" in analyses and vectors and len(vectors) < 2:
        problems.append("align needs at least two vector files")

    if problems:
        raise ConfigError(problems)
    return RunConfig(corpora, analyses, params, Path(raw.get("out", "tokenstat-out")), seed, vectors)


# --- serialization ------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj), encoding="utf-8")


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


# --- analyses -------------------------------------------------------------------

@dataclass
class Context:
    """What an analysis runner gets besides the corpus."""

    params: dict
    seed: int
    out_dir: Path
    prefix: str
    artifacts: dict = field(default_factory=dict)

    def path(self, suffix: str) -> Path:
        return self.out_dir / f"{self.prefix}.{suffix}"


def run_ingest(corpus: Corpus, ctx: Context) -> dict:
    lengths = np.array([len(s) for s in corpus], dtype=np.int64)
    stream = corpus.stream()
    granularities = sorted({g for s in corpus for g in s.labels})
    return {
        "num_sentences": len(corpus),
        "num_tokens": int(lengths.sum()),
        "unique_tokens": int(np.unique(stream).size),
        "declared_vocab_size": corpus.vocab_size,
        "max_token_id": int(stream.max()) if stream.size else None,
        "sentence_length": {"min": int(lengths.min()), "max": int(lengths.max()),
                            "mean": float(lengths.mean())} if lengths.size else None,
        "label_granularities": granularities,
    }


def run_zipf(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    table = count_ngrams(corpus, p["n"], p["cap"])
    counts = table.counts_array
    fit = fit_power_law(counts, xmin=p["xmin"])
    ln = fit_lognormal(counts, xmin=fit.xmin)
    try:
        lr = compare_power_law_lognormal(counts, xmin=fit.xmin)
        comparison = {"R": lr.R, "p": lr.p, "xmin": lr.xmin}
    except ValueError as exc:
        comparison = {"error": str(exc)}
    rf = rank_frequency(table)
    write_csv(ctx.path("rank_frequency.csv"), ["rank", "freq", "norm_log_rank", "norm_log_freq"],
              zip(rf.ranks.tolist(), rf.freqs.tolist(), rf.norm_log_rank.tolist(), rf.norm_log_freq.tolist()))
    return {
        "n": p["n"],
        "total_ngrams": table.total,
        "unique_ngrams": len(table),
        "power_law": fit.to_dict(),
        "lognormal": {"mu": ln.mu, "sigma": ln.sigma, "mean_loglik": ln.mean_loglik, "xmin": fit.xmin},
        "likelihood_ratio": comparison,
    }


def run_heaps(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    curve = heaps_curve(corpus, p["n"], p["stride"])
    pts = [(d, v) for d, v in curve if v > 0]
    fit = fit_heaps(pts)
    write_csv(ctx.path("heaps.csv"), ["documents", "unique", "fitted"],
              [(d, v, float(fit.predict(d))) for d, v in curve])
    return {"n": p["n"], "k": fit.k, "beta": fit.beta, "num_points": len(curve),
            "final_unique": curve[-1][1]}


def run_yule(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    table = count_ngrams(corpus, p["n"], p["cap"])
    hist = frequency_histogram(table.counts_array)
    fit = fit_yule_simon(hist)
    types = sum(hist.values())
    ms = sorted(hist)
    write_csv(ctx.path("frequency_histogram.csv"), ["m", "types", "expected"],
              [(m, hist[m], float(types * yule_simon_pmf(fit.alpha, m))) for m in ms])
    return {"n": p["n"], "alpha": fit.alpha, "nll": fit.nll, "converged": fit.converged,
            "grad": fit.grad, "num_types": types}


def run_benford(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    report = benford_digits(count_ngrams(corpus, p["n"], p["cap"]))
    write_csv(ctx.path("digits.csv"), ["digit", "observed", "expected"],
              zip(range(1, 10), report.observed.tolist(), report.expected.tolist()))
    return {"n": p["n"], **report.to_dict()}


def run_compress(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    if p["n"] == 1:
        stream = corpus.stream()
    else:
        stream = []
        for s in corpus:
            stream.extend(ngram_windows(s, p["n"]))
            if p["cap"] is not None and len(stream) >= p["cap"]:
                break
    return {"n": p["n"], **compression_report(stream, p["cap"]).to_dict()}


def run_purity(corpus: Corpus, ctx: Context) -> dict:
    g = ctx.params["granularity"]
    return {"granularity": g, **purity_report(build_part_cooc(corpus, g))}


def _remap(sentences: list[np.ndarray], vocab: np.ndarray) -> list[np.ndarray]:
    return [np.searchsorted(vocab, s) for s in sentences]


def _relabel(t: ParseTree, vocab: np.ndarray) -> ParseTree:
    if t.is_leaf:
        return ParseTree.leaf(t.label, int(vocab[t.token]))
    return ParseTree.node(t.label, _relabel(t.left, vocab), _relabel(t.right, vocab))


def run_pcfg(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    rng = np.random.default_rng(ctx.seed)
    sents = [s.tokens for s in corpus if p["min_len"] <= len(s) <= p["max_len"] and len(s) >= 2]
    skipped = len(corpus) - len(sents)
    if p["max_sentences"] is not None and len(sents) > p["max_sentences"]:
        keep = np.sort(rng.choice(len(sents), p["max_sentences"], replace=False))
        sents = [sents[i] for i in keep]
    if len(sents) < 2:
        raise ValueError("fewer than two sentences within the length limits")
    order = rng.permutation(len(sents))
    n_test = min(len(sents) - 1, max(1, int(round(p["test_frac"] * len(sents)))))
    test = [sents[i] for i in np.sort(order[:n_test])]
    train = [sents[i] for i in np.sort(order[n_test:])]
    # the grammar's terminals are the training vocabulary; test sentences
    # with unseen tokens have probability 0 and are left out
    vocab = np.unique(np.concatenate(train))
    known = [s for s in test if np.isin(s, vocab).all()]
    if not known:
        raise ValueError("no test sentence is covered by the training vocabulary")
    train_ids, test_ids = _remap(train, vocab), _remap(known, vocab)
    seeds = [int(x) for x in np.random.SeedSequence(ctx.seed).generate_state(p["seeds"])]
    result = induce_grammar(train_ids, test_ids, vocab.size, p["nt"], p["pt"], p["epochs"], seeds, p["max_len"])
    best = result.best
    trees = parse_corpus(best.grammar, test_ids)
    stats = tree_stats(trees, best.grammar, best.ppl, best.ppl_init)
    with open(ctx.path("trees.txt"), "w", encoding="utf-8") as fh:
        for t in trees:
            fh.write(_relabel(t, vocab).to_sexpr() + "\n")
    write_csv(ctx.path("nonterminals.csv"), ["nonterminal", "frequency"],
              stats.nonterminal_frequencies.items())
    return {
        "num_train": len(train_ids),
        "num_test": len(test_ids),
        "num_test_oov_dropped": len(test) - len(known),
        "num_length_filtered": skipped,
        "num_terminals": int(vocab.size),
        "best_seed": best.seed,
        "runs": [{"seed": r.seed, "ppl": r.ppl, "ppl_init": r.ppl_init, "loglik_history": r.history}
                 for r in result.runs],
        "train_ppl": perplexity(best.grammar, train_ids),
        **stats.to_dict(),
    }


def run_embed(corpus: Corpus, ctx: Context) -> dict:
    p = ctx.params
    X = build_window_cooc(corpus, p["window"], p["weighting"], corpus.vocab_size)
    emb = glove_train(X, p["dim"], p["epochs"], p["lr"], p["xmax"], p["a"], ctx.seed)
    present = np.flatnonzero(np.diff(X.indptr) > 0)
    vectors = emb.vectors()[present]
    write_vectors(ctx.path("vec"), present.tolist(), vectors)
    ctx.artifacts["vectors"] = vectors
    return {"vocab_size": int(X.shape[0]), "num_vectors": int(present.size), "nnz": int(X.nnz),
            "losses": emb.losses, "final_loss": emb.losses[-1]}


def run_align_spaces(spaces: dict[str, np.ndarray], params: dict, seed: int, out_dir: Path) -> dict:
    """Pairwise alignment of named spaces; writes two CSV matrices."""
    names = sorted(spaces)
    k = min([params["k"]] + [spaces[n].shape[0] for n in names])
    dims = {spaces[n].shape[1] for n in names}
    if len(dims) != 1:
        raise ValueError(f"embedding dimensions differ: {sorted(dims)}")
    centers = {n: quantize(spaces[n], k, subseed(seed, n), params["iters"], params["center"]) for n in names}
    m = len(names)
    dist = np.zeros((m, m))
    haus = np.zeros((m, m))
    pairs = []
    for i in range(m):
        for j in range(i + 1, m):
            rep = compare_centers(centers[names[i]], centers[names[j]])
            dist[i, j] = dist[j, i] = rep.procrustes_distance
            haus[i, j], haus[j, i] = rep.hausdorff_ab, rep.hausdorff_ba
            pairs.append({"a": names[i], "b": names[j], **rep.to_dict()})
    write_distance_csv(out_dir / "align.procrustes_similarity.csv", names, dist, similarity=True)
    write_distance_csv(out_dir / "align.hausdorff.csv", names, haus, similarity=False)
    return {"spaces": names, "num_centers": k, "pairs": pairs}


RUNNERS: dict[str, Callable[[Corpus, Context], dict]] = {
    "ingest": run_ingest,
    "zipf": run_zipf,
    "heaps": run_heaps,
    "yule": run_yule,
    "benford": run_benford,
    "compress": run_compress,
    "purity": run_purity,
    "pcfg": run_pcfg,
    "embed": run_embed,
}


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def run(config: RunConfig, base_dir: Path | None = None, report_path: Path | None = None,
        write_summary: bool = True, jobs: int | None = None) -> int:
    """Execute every selected analysis; returns the exit status (0 ok, 1 if any failed).

    Corpora are processed in parallel on up to ``jobs`` threads (default: one
    per corpus, capped by the CPU count).  Each analysis draws from its own
    sub-seed and writes its own files, so the bundle does not depend on
    scheduling.  ``report_path`` renames the report of a single-analysis run.
    """
    base_dir = base_dir or Path.cwd()
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    stamp = config.stamp()
    spaces: dict[str, np.ndarray] = {}

    def record(prefix: str, analysis: str, corpus: str | None, fn) -> dict:
        seed = subseed(config.seed, f"{analysis}:{corpus}" if corpus else analysis)
        report = {"analysis": analysis, "corpus": corpus, "seed": config.seed, "subseed": seed,
                  "params": config.params[analysis], "config": stamp, "version": __version__}
        try:
            report["result"] = fn(seed)
            report["status"] = "ok"
        except Exception as exc:  # isolate failures per analysis
            logger.error("%s failed: %s", prefix, exc)
            report["status"] = "error"
            report["error"] = f"{type(exc).__name__}: {exc}"
        target = report_path if report_path is not None else out / f"{prefix}.json"
        write_json(target, report)
        return {"analysis": analysis, "corpus": corpus, "file": target.name, "status": report["status"],
                **({"error": report["error"]} if "error" in report else {})}

    corpus_analyses = [a for a in config.analyses if a != "align"]

    def run_corpus(spec: CorpusSpec) -> list[dict]:
        cname = _safe_name(spec.name)
        try:
            corpus = spec.load(config.seed, base_dir)
        except Exception as exc:
            logger.error("cannot load corpus %s: %s", spec.name, exc)

            def failed(_seed, exc=exc):
                raise exc

            return [record(f"{cname}.{a}", a, spec.name, failed) for a in corpus_analyses]
        done = []
        for a in corpus_analyses:
            ctx = Context(config.params[a], 0, out, f"{cname}.{a}")

            def fn(seed, a=a, ctx=ctx):
                ctx.seed = seed
                res = RUNNERS[a](corpus, ctx)
                if a == "embed":
                    spaces[spec.name] = ctx.artifacts["vectors"]
                return res

            logger.info("running %s on %s", a, spec.name)
            done.append(record(f"{cname}.{a}", a, spec.name, fn))
        return done

    entries: list[dict] = []
    if corpus_analyses and config.corpora:
        workers = jobs or min(len(config.corpora), os.cpu_count() or 1)
        if workers <= 1:
            per_corpus = [run_corpus(spec) for spec in config.corpora]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                per_corpus = list(pool.map(run_corpus, config.corpora))
        for done in per_corpus:
            entries.extend(done)

    if "align" in config.analyses:
        def align_fn(seed):
            if config.vectors:
                loaded = {n: read_vectors(base_dir / p)[1] for n, p in config.vectors.items()}
            else:
                loaded = {spec.name: spaces[spec.name] for spec in config.corpora if spec.name in spaces}
                if len(loaded) < 2:
                    raise ValueError("fewer than two embedding spaces were trained successfully")
            return run_align_spaces(loaded, config.params["align"], seed, out)

        entries.append(record("align", "align", None, align_fn))

    status = "ok" if all(e["status"] == "ok" for e in entries) else "error"
    if write_summary:
        write_json(out / "summary.json", {"config": stamp, "version": __version__, "status": status,
                                          "reports": entries})
    for e in entries:
        logger.info("%s: %s", e["file"], e["status"])
    return 0 if status == "ok" else 1
