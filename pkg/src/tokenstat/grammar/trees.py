"""Binary parse trees and their shape statistics."""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Iterator

# Leaves hold (preterminal, token); internal nodes hold a nonterminal label
# and exactly two children.  Leaf counts are cached at construction.


class ParseTree:
    __slots__ = ("label", "left", "right", "token", "num_leaves")

    def __init__(self, label: int, left: "ParseTree | None" = None, right: "ParseTree | None" = None,
                 token: int | None = None):
        if (left is None) != (right is None):
            raise ValueError("internal nodes need exactly two children")
        if left is None and token is None:
            raise ValueError("a leaf needs a token")
        self.label = label
        self.left = left
        self.right = right
        self.token = token
        self.num_leaves = 1 if left is None else left.num_leaves + right.num_leaves

    @classmethod
    def leaf(cls, preterminal: int, token: int) -> "ParseTree":
        return cls(preterminal, token=token)

    @classmethod
    def node(cls, label: int, left: "ParseTree", right: "ParseTree") -> "ParseTree":
        return cls(label, left, right)

    @classmethod
    def from_nested(cls, spec, label: int = 0) -> "ParseTree":
        """Unlabelled shape from nested pairs, e.g. ``((0, 1), (2, 3))``; ints are leaf tokens."""
        if isinstance(spec, int):
            return cls.leaf(0, spec)
        left, right = spec
        return cls.node(label, cls.from_nested(left, label), cls.from_nested(right, label))

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def __eq__(self, other) -> bool:
        return isinstance(other, ParseTree) and self.to_sexpr() == other.to_sexpr()

    def __hash__(self) -> int:
        return hash(self.to_sexpr())

    def __repr__(self) -> str:
        return f"ParseTree({self.to_sexpr()!r})"

    def nodes(self) -> Iterator["ParseTree"]:
        stack = [self]
        while stack:
            t = stack.pop()
            yield t
            if not t.is_leaf:
                stack.append(t.right)
                stack.append(t.left)

    def internal_nodes(self) -> Iterator["ParseTree"]:
        return (t for t in self.nodes() if not t.is_leaf)

    def leaves(self) -> list["ParseTree"]:
        return [t for t in self.nodes() if t.is_leaf]

    def tokens(self) -> list[int]:
        return [t.token for t in self.leaves()]

    def height(self) -> int:
        """Edges on the longest root-to-leaf path."""
        if self.is_leaf:
            return 0
        best = 0
        stack = [(self, 0)]
        while stack:
            t, d = stack.pop()
            if t.is_leaf:
                best = max(best, d)
            else:
                stack.append((t.left, d + 1))
                stack.append((t.right, d + 1))
        return best

    def mirror(self) -> "ParseTree":
        if self.is_leaf:
            return self
        return ParseTree.node(self.label, self.right.mirror(), self.left.mirror())

    def to_sexpr(self, nt_prefix: str = "NT", pt_prefix: str = "T") -> str:
        if self.is_leaf:
            return f"({pt_prefix}{self.label} {self.token})"
        return f"({nt_prefix}{self.label} {self.left.to_sexpr(nt_prefix, pt_prefix)} " \
               f"{self.right.to_sexpr(nt_prefix, pt_prefix)})"

    @classmethod
    def from_sexpr(cls, text: str, nt_prefix: str = "NT", pt_prefix: str = "T") -> "ParseTree":
        toks = re.findall(r"\(|\)|[^\s()]+", text)
        pos = 0

        def parse() -> ParseTree:
            nonlocal pos
            if toks[pos] != "(":
                raise ValueError(f"expected '(' at token {pos}")
            label = toks[pos + 1]
            pos += 2
            if toks[pos] != "(":
                token = int(toks[pos])
                if toks[pos + 1] != ")":
                    raise ValueError("malformed leaf")
                pos += 2
                return cls.leaf(int(label[len(pt_prefix):]), token)
            left = parse()
            right = parse()
            if toks[pos] != ")":
                raise ValueError("internal nodes must have two children")
            pos += 1
            return cls.node(int(label[len(nt_prefix):]), left, right)

        tree = parse()
        if pos != len(toks):
            raise ValueError("trailing input after tree")
        return tree


def mbf(t: ParseTree) -> float:
    """Mean over internal nodes of right-leaf-count / left-leaf-count."""
    ratios = [n.right.num_leaves / n.left.num_leaves for n in t.internal_nodes()]
    if not ratios:
        raise ValueError("MBF needs at least one internal node")
    return sum(ratios) / len(ratios)


def fr(t: ParseTree) -> float:
    """Height over log2(leaves): 1 for perfect binary trees."""
    if t.num_leaves < 2:
        raise ValueError("FR needs at least two leaves")
    return t.height() / math.log2(t.num_leaves)


def codebook_utilization(trees: Iterable[ParseTree], num_nt: int) -> float:
    """Fraction of the ``num_nt`` nonterminal labels that label some internal node."""
    trees = list(trees)
    if not trees:
        raise ValueError("no trees")
    used = {n.label for t in trees for n in t.internal_nodes()}
    return len(used) / num_nt


def nonterminal_frequencies(trees: Iterable[ParseTree]) -> dict[int, float]:
    """Normalized internal-node label histogram, most frequent first (ties by label)."""
    c = Counter(n.label for t in trees for n in t.internal_nodes())
    total = sum(c.values())
    if total == 0:
        return {}
    return {lab: cnt / total for lab, cnt in sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))}
