"""``tokenstat`` command-line entry point.

Every analysis subcommand builds the same raw configuration mapping that a
``--config`` TOML file provides; flags given on the command line override
values from the file.  Exit status: 0 on success, 1 when an analysis fails,
2 for configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import write_binary, write_jsonl
from .reports import ANALYSIS_PARAMS, ConfigError, build_config, dumps, run
from .synth import SYNTH_KINDS, synth_corpus

EXIT_OK, EXIT_ANALYSIS, EXIT_CONFIG = 0, 1, 2
CORPUS_ANALYSES = ("ingest", "zipf", "heaps", "yule", "benford", "compress", "purity", "pcfg", "embed")
NESTED = {"pcfg": "train", "embed": "train"}
HELP = {
    "ingest": "validate a corpus and summarize it",
    "zipf": "power-law and lognormal fits of n-gram frequencies",
    "heaps": "vocabulary growth curve and Heaps' law fit",
    "yule": "Yule-Simon fit of the frequency histogram",
    "benford": "leading digits of n-gram frequencies",
    "compress": "entropy and Huffman compression",
    "purity": "token/label purity and PNMI",
    "pcfg": "induce a PCFG with inside-outside EM and report tree statistics",
    "embed": "train co-occurrence embeddings",
}

logger = logging.getLogger("tokenstat")


def _flag(param: str) -> str:
    return "--" + param.replace("_", "-")


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--out", default=d, help="output directory, or a .json file for single analyses")
    p.add_argument("--seed", type=int, default=d, help="run seed (default 0)")
    p.add_argument("--config", default=d, help="TOML run configuration")
    p.add_argument("--jobs", type=int, default=d, help="corpora processed in parallel (default: one per corpus, at most the CPU count)")
    p.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def _add_params(p: argparse.ArgumentParser, analysis: str) -> None:
    for key, default in ANALYSIS_PARAMS[analysis].items():
        if isinstance(default, bool):
            p.add_argument(_flag(key), dest=f"param_{key}", action="store_const", const=True, default=None)
        else:
            kind = float if isinstance(default, float) else str if isinstance(default, str) else int
            p.add_argument(_flag(key), dest=f"param_{key}", type=kind, default=None,
                           help=f"default {default}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tokenstat", description="Statistics of discrete token corpora.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in CORPUS_ANALYSES:
        p = sub.add_parser(name, help=HELP[name])
        _add_globals(p, suppress=True)
        if name in NESTED:
            p.add_argument("action", choices=[NESTED[name]])
        p.add_argument("corpus", nargs="?", help="corpus file (or [[corpus]] entries in --config)")
        p.add_argument("--format", choices=["jsonl", "binary", "bin"], default=None)
        p.add_argument("--vocab-size", type=int, default=None)
        p.add_argument("--synth", choices=SYNTH_KINDS, default=None,
                       help="use a synthetic corpus of this kind instead of a file")
        if name == "ingest":
            p.add_argument("--convert", help="also write the corpus in canonical form (.jsonl or .bin)")
        _add_params(p, name)

    p = sub.add_parser("align", help="compare embedding spaces")
    _add_globals(p, suppress=True)
    p.add_argument("--a", help="first vector file")
    p.add_argument("--b", help="second vector file")
    p.add_argument("--space", action="append", default=[], metavar="NAME=PATH",
                   help="additional named vector file (repeatable)")
    _add_params(p, "align")

    p = sub.add_parser("synth", help="write a synthetic corpus")
    _add_globals(p, suppress=True)
    p.add_argument("kind", choices=SYNTH_KINDS)
    p.add_argument("--output", required=True, help="destination (.jsonl or .bin)")
    p.add_argument("--num-tokens", type=int)
    p.add_argument("--num-sentences", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--vocab-size", type=int)
    p.add_argument("--sentence-length", type=int)
    p.add_argument("--max-len", type=int)

    for name in ("report", "run"):
        p = sub.add_parser(name, help="run every analysis selected in --config")
        _add_globals(p, suppress=True)
    return parser


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError([f"config file not found: {path}"]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None


def _write_corpus(corpus, path: Path) -> None:
    if path.suffix in (".bin", ".tks"):
        write_binary(corpus, path)
    else:
        write_jsonl(corpus, path)


def _raw_config(args) -> tuple[dict, Path | None]:
    """Merge the config file with command-line flags; returns (raw, report path)."""
    raw = _load_toml(args.config) if args.config else {}
    # relative paths in a config file are relative to that file; make flag
    # paths absolute so they keep meaning "relative to the working directory"
    fix = (lambda p: str(Path(p).resolve())) if args.config else str
    if args.seed is not None:
        raw["seed"] = args.seed
    report_path = None
    if args.out is not None:
        out = Path(args.out)
        if out.suffix == ".json" and args.command not in ("report", "run"):
            report_path = out
            out = out.parent
        raw["out"] = str(out)
    if args.command in ("report", "run"):
        if not args.config:
            raise ConfigError(["report needs --config"])
        return raw, None

    raw["analyses"] = [args.command]
    section = dict(raw.get(args.command, {}))
    for key in ANALYSIS_PARAMS[args.command]:
        value = getattr(args, f"param_{key}")
        if value is not None:
            section[key] = value
    raw[args.command] = section

    if args.command == "align":
        vectors = dict(raw.get("vectors", {}))
        for flag in ("a", "b"):
            path = getattr(args, flag)
            if path:
                vectors[Path(path).stem] = fix(path)
        for item in args.space:
            name, sep, path = item.partition("=")
            if not sep:
                raise ConfigError([f"--space expects NAME=PATH, got {item!r}"])
            vectors[name] = fix(path)
        raw["vectors"] = vectors
        raw.pop("corpus", None)
        return raw, report_path

    if args.corpus or args.synth:
        entry = {"synth": args.synth} if args.synth else {"path": fix(args.corpus)}
        if args.format:
            entry["format"] = args.format
        if args.vocab_size is not None:
            entry["vocab_size"] = args.vocab_size
        raw["corpus"] = [entry]
    if len(raw.get("corpus", [])) != 1:
        report_path = None
    return raw, report_path


def _synth(args) -> int:
    params = {k: getattr(args, k) for k in ("num_tokens", "num_sentences", "alpha", "vocab_size",
                                            "sentence_length", "max_len") if getattr(args, k) is not None}
    seed = args.seed if args.seed is not None else 0
    corpus = synth_corpus(args.kind, seed, **params)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_corpus(corpus, out)
    sys.stdout.write(dumps({"kind": args.kind, "seed": seed, "params": params, "output": str(out),
                            "num_sentences": len(corpus), "num_tokens": corpus.num_tokens}))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for attr, default in (("out", None), ("seed", None), ("config", None), ("jobs", None), ("verbose", 0)):
        if not hasattr(args, attr):
            setattr(args, attr, default)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return _synth(args)
        raw, report_path = _raw_config(args)
        base = Path(args.config).resolve().parent if args.config else Path.cwd()
        config = build_config(raw, base)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS

    if args.command == "ingest" and getattr(args, "convert", None):
        spec = config.corpora[0]
        try:
            corpus = spec.load(config.seed, base)
            _write_corpus(corpus, Path(args.convert))
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ANALYSIS

    single = args.command not in ("report", "run")
    if args.jobs is not None and args.jobs < 1:
        print("config error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    status = run(config, base, report_path=report_path, write_summary=not single, jobs=args.jobs)
    if status != EXIT_OK:
        print("one or more analyses failed; see the reports for details", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
