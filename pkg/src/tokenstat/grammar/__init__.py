"""PCFG inference, inside-outside training and parse-tree statistics."""

from .em import (
    TreeStatsReport,
    induce_grammar,
    parse_corpus,
    perplexity,
    ppl_reduction,
    train_em,
    tree_stats,
)
from .inside import expected_counts, inside_logprob, viterbi_parse
from .pcfg import Pcfg, toy_grammar
from .trees import ParseTree, codebook_utilization, fr, mbf, nonterminal_frequencies

__all__ = [
    "Pcfg", "ParseTree", "TreeStatsReport", "codebook_utilization", "expected_counts", "fr",
    "induce_grammar", "inside_logprob", "mbf", "nonterminal_frequencies", "parse_corpus",
    "perplexity", "ppl_reduction", "toy_grammar", "train_em", "tree_stats", "viterbi_parse",
]
