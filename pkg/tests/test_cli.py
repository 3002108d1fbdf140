from __future__ import annotations

import json

import numpy as np
import pytest

from cli_suite import bundle, write_full_suite, write_labelled_corpus
from tokenstat.cli import main
from tokenstat.coding import compression_report
from tokenstat.corpus import load_corpus
from tokenstat.embedding import write_vectors
from tokenstat.grammar import Pcfg, ParseTree, perplexity, train_em
from tokenstat.powerlaw import fit_power_law
from tokenstat.reports import subseed
from tokenstat.ngrams import count_ngrams
from tokenstat.synth import synth_corpus


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_labelled_corpus(tmp_path / "fixture.jsonl", 3000, 7)
    return tmp_path


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def load(path):
    return json.loads(path.read_text(encoding="utf-8"))


class TestReportRun:
    def test_two_analyses(self, workdir):
        cfg = write_config(workdir / "c.toml", 'analyses = ["zipf", "benford"]\nout = "o"\n'
                                              '[[corpus]]\npath = "fixture.jsonl"\n')
        assert main(["report", "--config", cfg]) == 0
        reports = sorted(p.name for p in (workdir / "o").glob("*.json"))
        assert reports == ["fixture.benford.json", "fixture.zipf.json", "summary.json"]
        summary = load(workdir / "o" / "summary.json")
        assert [r["file"] for r in summary["reports"]] == ["fixture.zipf.json", "fixture.benford.json"]
        assert (workdir / "o" / "fixture.zipf.rank_frequency.csv").exists()

    def test_missing_path_lists_it(self, workdir, capsys):
        cfg = write_config(workdir / "c.toml", 'analyses = ["zipf"]\n[[corpus]]\npath = "nope/absent.jsonl"\n'
                                              '[[corpus]]\npath = "also-missing.bin"\nformat = "bin"\n')
        assert main(["report", "--config", cfg]) == 2
        err = capsys.readouterr().err
        assert "nope/absent.jsonl" in err and "also-missing.bin" in err
        assert not (workdir / "tokenstat-out").exists()

    def test_config_problems_are_collected(self, workdir, capsys):
        cfg = write_config(workdir / "c.toml", 'seed = -1\nbogus = 1\nanalyses = ["zipf", "dance"]\n'
                                              '[[corpus]]\npath = "fixture.jsonl"\n')
        assert main(["report", "--config", cfg]) == 2
        err = capsys.readouterr().err
        assert "bogus" in err and "seed" in err and "dance" in err

    def test_report_needs_config(self, workdir):
        assert main(["report"]) == 2

    def test_byte_identical_reruns(self, workdir):
        cfg = write_config(workdir / "c.toml", 'analyses = ["zipf", "compress", "pcfg"]\nseed = 11\n'
                                              '[[corpus]]\npath = "fixture.jsonl"\n'
                                              '[pcfg]\nnt = 2\npt = 3\nepochs = 2\nseeds = 2\n')
        assert main(["report", "--config", cfg, "--out", "r1"]) == 0
        assert main(["report", "--config", cfg, "--out", "r2"]) == 0
        assert bundle(workdir / "r1") == bundle(workdir / "r2")

    def test_parallel_matches_serial(self, workdir):
        cfg = write_full_suite(workdir, seed=4)
        assert main(["report", "--config", str(cfg), "--out", "serial", "--jobs", "1"]) == 0
        assert main(["report", "--config", str(cfg), "--out", "parallel", "--jobs", "3"]) == 0
        assert bundle(workdir / "serial") == bundle(workdir / "parallel")

    def test_failure_is_isolated(self, workdir):
        (workdir / "plain.jsonl").write_text('{"id": "a", "tokens": [1, 2, 3]}\n')
        cfg = write_config(workdir / "c.toml", 'analyses = ["compress", "purity"]\nout = "o"\n'
                                              '[[corpus]]\npath = "plain.jsonl"\n')
        assert main(["report", "--config", cfg]) == 1
        assert load(workdir / "o" / "plain.compress.json")["status"] == "ok"
        failed = load(workdir / "o" / "plain.purity.json")
        assert failed["status"] == "error" and "part" in failed["error"]
        assert load(workdir / "o" / "summary.json")["status"] == "error"

    def test_reports_carry_stamp(self, workdir):
        cfg = write_config(workdir / "c.toml", 'analyses = ["benford"]\nseed = 9\nout = "o"\n'
                                              '[benford]\nn = 2\n[[corpus]]\npath = "fixture.jsonl"\n')
        assert main(["report", "--config", cfg]) == 0
        rep = load(workdir / "o" / "fixture.benford.json")
        assert rep["seed"] == 9 and rep["subseed"] == subseed(9, "benford:fixture")
        assert rep["config"]["params"]["benford"]["n"] == 2
        assert rep["config"]["corpora"][0]["path"] == "fixture.jsonl"
        assert "out" not in rep["config"]

    def test_flags_override_config(self, workdir):
        cfg = write_config(workdir / "c.toml", 'seed = 3\n[zipf]\ncap = 400\n[[corpus]]\npath = "fixture.jsonl"\n')
        assert main(["zipf", "--config", cfg, "--seed", "5", "--cap", "200", "--out", "o"]) == 0
        rep = load(workdir / "o" / "fixture.zipf.json")
        assert rep["seed"] == 5
        assert rep["params"]["cap"] == 200
        assert rep["result"]["total_ngrams"] == 200

    def test_relative_paths_follow_config_file(self, workdir, monkeypatch):
        (workdir / "sub").mkdir()
        cfg = write_config(workdir / "sub" / "c.toml", 'analyses = ["compress"]\nout = "o"\n'
                                                       '[[corpus]]\npath = "../fixture.jsonl"\n')
        monkeypatch.chdir(workdir / "sub")
        assert main(["report", "--config", "c.toml"]) == 0
        assert (workdir / "sub" / "o" / "fixture.compress.json").exists()


class TestSubcommands:
    def test_single_analysis_report_file(self, workdir):
        assert main(["compress", "fixture.jsonl", "--out", "res/compress.json"]) == 0
        rep = load(workdir / "res" / "compress.json")
        assert rep["analysis"] == "compress" and rep["status"] == "ok"
        assert rep["result"]["num_tokens"] == 3000
        assert not (workdir / "res" / "summary.json").exists()

    def test_global_flags_before_subcommand(self, workdir):
        assert main(["--seed", "2", "--out", "o", "benford", "fixture.jsonl"]) == 0
        assert load(workdir / "o" / "fixture.benford.json")["seed"] == 2

    def test_missing_corpus_file(self, workdir, capsys):
        assert main(["zipf", "absent.jsonl"]) == 2
        assert "absent.jsonl" in capsys.readouterr().err

    def test_bad_corpus_is_analysis_error(self, workdir):
        (workdir / "bad.jsonl").write_text('{"id": "a", "tokens": []}\n')
        assert main(["zipf", "bad.jsonl", "--out", "o"]) == 1
        assert "empty token list" in load(workdir / "o" / "bad.zipf.json")["error"]

    def test_ingest_convert(self, workdir):
        assert main(["ingest", "fixture.jsonl", "--convert", "fixture.bin", "--out", "o"]) == 0
        a = load_corpus(workdir / "fixture.jsonl")
        b = load_corpus(workdir / "fixture.bin", format="bin")
        assert [s.tokens.tolist() for s in a] == [s.tokens.tolist() for s in b]
        assert load(workdir / "o" / "fixture.ingest.json")["result"]["num_tokens"] == 3000

    def test_pcfg_train(self, workdir):
        args = ["pcfg", "train", "fixture.jsonl", "--nt", "2", "--pt", "3", "--epochs", "2", "--seeds", "2",
                "--out", "o"]
        assert main(args) == 0
        rep = load(workdir / "o" / "fixture.pcfg.json")["result"]
        assert rep["ppl"] < rep["ppl_init"]
        lines = (workdir / "o" / "fixture.pcfg.trees.txt").read_text().splitlines()
        assert lines and all(ParseTree.from_sexpr(line).num_leaves >= 2 for line in lines)

    def test_embed_and_align(self, workdir):
        write_labelled_corpus(workdir / "other.jsonl", 3000, 8)
        for name in ("fixture", "other"):
            assert main(["embed", "train", f"{name}.jsonl", "--dim", "4", "--window", "2", "--epochs", "3",
                         "--out", "e"]) == 0
        assert main(["align", "--a", "e/fixture.embed.vec", "--b", "e/other.embed.vec", "--k", "4",
                     "--out", "a/report.json"]) == 0
        rep = load(workdir / "a" / "report.json")["result"]
        assert rep["spaces"] == ["fixture.embed", "other.embed"]
        pair = rep["pairs"][0]
        assert 0.0 <= pair["procrustes_distance"] <= 1.0
        assert pair["pairing"] == "greedy-nearest-center"
        assert (workdir / "a" / "align.procrustes_similarity.csv").exists()

    def test_align_named_spaces(self, workdir, rng):
        for name in ("x", "y", "z"):
            write_vectors(workdir / f"{name}.vec", range(30), rng.normal(size=(30, 3)))
        args = ["align", "--space", "x=x.vec", "--space", "y=y.vec", "--space", "z=z.vec", "--k", "5", "--out", "o"]
        assert main(args) == 0
        header = (workdir / "o" / "align.hausdorff.csv").read_text().splitlines()[0]
        assert header == ",x,y,z"

    def test_align_needs_two_spaces(self, workdir):
        write_vectors(workdir / "x.vec", range(3), np.eye(3))
        assert main(["align", "--a", "x.vec"]) == 2

    def test_synth_command(self, workdir, capsys):
        args = ["synth", "zipfian", "--output", "z.jsonl", "--num-tokens", "5000", "--alpha", "2.0", "--seed", "3"]
        assert main(args) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["num_tokens"] == 5000
        first = (workdir / "z.jsonl").read_bytes()
        assert main(args) == 0
        assert (workdir / "z.jsonl").read_bytes() == first

    def test_synth_corpus_in_config(self, workdir):
        cfg = write_config(workdir / "c.toml", 'analyses = ["compress"]\nout = "o"\n[[corpus]]\nname = "u"\n'
                                              'synth = "uniform"\nparams = {vocab_size = 64, num_tokens = 2000}\n')
        assert main(["report", "--config", cfg]) == 0
        assert load(workdir / "o" / "u.compress.json")["result"]["num_tokens"] == 2000


class TestSynthLoops:
    def test_zipfian_recovers_alpha(self):
        # token id r - 1 is drawn with probability proportional to r^-alpha
        corpus = synth_corpus("zipfian", 5, alpha=2.0, num_tokens=1_000_000)
        fit = fit_power_law(corpus.stream() + 1)
        assert abs(fit.alpha - 2.0) <= 0.05

    def test_zipfian_count_exponent(self):
        # ranks with exponent s give per-type counts with exponent 1 + 1/s
        stream = synth_corpus("zipfian", 5, alpha=2.0, num_tokens=1_000_000).stream()
        counts = np.bincount(stream)
        assert abs(fit_power_law(counts[counts > 0]).alpha - 1.5) <= 0.05

    def test_zipfian_ids_are_ranks(self):
        table = count_ngrams(synth_corpus("zipfian", 1, alpha=2.0, num_tokens=50_000), 1)
        top = sorted(table.items(), key=lambda kv: -kv[1])[:3]
        assert [k for k, _ in top] == [(0,), (1,), (2,)]

    def test_uniform_incompressible(self):
        stream = synth_corpus("uniform", 0, vocab_size=2**13, num_tokens=200_000).stream()
        assert compression_report(stream).pct_reduction < 5

    def test_grammar_sampler_trains(self):
        corpus = synth_corpus("grammar", 2, num_sentences=200)
        g0 = Pcfg.random(3, 3, 6, seed=0)
        g, _ = train_em(g0, corpus, epochs=5)
        assert perplexity(g, corpus) < perplexity(g0, corpus)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            synth_corpus("gaussian", 0)
