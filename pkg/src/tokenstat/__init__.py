"""Statistical analysis of discrete token streams.

Submodules cover frequency laws (:mod:`~tokenstat.powerlaw`,
:mod:`~tokenstat.innovation`, :mod:`~tokenstat.benford`), entropy coding
(:mod:`~tokenstat.coding`), label purity (:mod:`~tokenstat.purity`), grammar
induction (:mod:`~tokenstat.grammar`) and embedding alignment
(:mod:`~tokenstat.embedding`).
"""

from .corpus import Corpus, CorpusError, TokenSentence, load_corpus

__version__ = "0.1.0"

__all__ = ["Corpus", "CorpusError", "TokenSentence", "load_corpus", "__version__"]
