"""Probabilistic context-free grammars in the (S, N, P, Sigma, R) normal form.

Rules are S -> A (A in N), A -> B C (A in N; B, C in N u P) and T -> w
(T in P, w in Sigma).  Symbols are indexed jointly: 0..N-1 are nonterminals
and N..N+P-1 preterminals, so ``rules`` has shape (N, N+P, N+P).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9


@dataclass
class Pcfg:
    root: np.ndarray   # (N,)          P(S -> A)
    rules: np.ndarray  # (N, S, S)     P(A -> B C), S = N + P
    emit: np.ndarray   # (P, V)        P(T -> w)

    def __post_init__(self):
        self.root = np.asarray(self.root, dtype=float)
        self.rules = np.asarray(self.rules, dtype=float)
        self.emit = np.asarray(self.emit, dtype=float)
        n, p = self.num_nt, self.num_pt
        if self.rules.shape != (n, n + p, n + p):
            raise ValueError(f"rules must have shape {(n, n + p, n + p)}, got {self.rules.shape}")

    @property
    def num_nt(self) -> int:
        return self.root.shape[0]

    @property
    def num_pt(self) -> int:
        return self.emit.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.num_nt + self.num_pt

    @property
    def num_terminals(self) -> int:
        return self.emit.shape[1]

    def validate(self, tol: float = NORM_TOL) -> None:
        for name, arr in (("root", self.root), ("rules", self.rules), ("emit", self.emit)):
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has negative or non-finite probabilities")
        sums = np.concatenate([
            [self.root.sum()],
            self.rules.reshape(self.num_nt, -1).sum(axis=1),
            self.emit.sum(axis=1),
        ])
        bad = np.abs(sums - 1.0) > tol
        if bad.any():
            raise ValueError(f"rule distributions not normalized (worst sum {sums[bad][0]!r})")

    def symbol_name(self, sym: int) -> str:
        return f"NT{sym}" if sym < self.num_nt else f"T{sym - self.num_nt}"

    def copy(self) -> "Pcfg":
        return Pcfg(self.root.copy(), self.rules.copy(), self.emit.copy())

    @classmethod
    def random(cls, num_nt: int, num_pt: int, num_terminals: int, seed: int, scale: float = 1.0) -> "Pcfg":
        """Softmax of Gaussian logits for every rule distribution."""
        rng = np.random.default_rng(seed)
        s = num_nt + num_pt

        def softmax(x):
            x = x - x.max(axis=-1, keepdims=True)
            e = np.exp(x)
            return e / e.sum(axis=-1, keepdims=True)

        root = softmax(scale * rng.standard_normal(num_nt))
        rules = softmax(scale * rng.standard_normal((num_nt, s * s))).reshape(num_nt, s, s)
        emit = softmax(scale * rng.standard_normal((num_pt, num_terminals)))
        return cls(root, rules, emit)

    def sample(self, rng: np.random.Generator, max_len: int = 40):
        """Draw one sentence; returns None when it would exceed ``max_len`` tokens."""
        n = self.num_nt
        flat = self.rules.reshape(n, -1)
        s = self.num_symbols
        out: list[int] = []
        stack = [int(rng.choice(n, p=self.root))]
        pending = 1
        while stack:
            sym = stack.pop()
            if sym >= n:
                out.append(int(rng.choice(self.num_terminals, p=self.emit[sym - n])))
                pending -= 1
                continue
            bc = int(rng.choice(s * s, p=flat[sym]))
            b, c = divmod(bc, s)
            stack.append(c)
            stack.append(b)
            pending += 1
            if len(out) + pending > max_len:
                return None
        return out


def toy_grammar() -> Pcfg:
    """A fixed two-nonterminal grammar with three preterminals over six terminals."""
    n, p, v = 2, 3, 6
    s = n + p
    root = np.array([0.7, 0.3])
    rules = np.zeros((n, s, s))
    NT0, NT1, T0, T1, T2 = range(5)
    rules[NT0, T0, NT1] = 0.4
    rules[NT0, T0, T1] = 0.3
    rules[NT0, NT1, T2] = 0.3
    rules[NT1, T1, T2] = 0.5
    rules[NT1, T1, NT0] = 0.3
    rules[NT1, T2, T2] = 0.2
    emit = np.zeros((p, v))
    emit[0, [0, 1]] = [0.6, 0.4]
    emit[1, [2, 3]] = [0.7, 0.3]
    emit[2, [4, 5]] = [0.5, 0.5]
    return Pcfg(root, rules, emit)
