"""Union-find over dense integer ids, with the merge direction reported."""

from __future__ import annotations


class UnionFind:
    def __init__(self) -> None:
        self.parent: list[int] = []
        self.rank: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        self.rank.append(0)
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:  # path halving
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> tuple[int, int] | None:
        """Merge the classes of ``a`` and ``b``.

        Returns ``(root, absorbed)`` so callers can migrate per-class data,
        or None when they were already one class.
        """
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        elif self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.parent[rb] = ra
        return ra, rb
