"""Small shared helpers: union-find, permutation arrays, worker pool."""

from __future__ import annotations

import os
from multiprocessing import Pool


class UnionFind:
    """Plain union-find over 0..n-1 with path compression."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.count = n

    def find(self, x: int) -> int:
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        self.count -= 1
        return True


def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def perm_compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """(p o q)(x) = p[q[x]]."""
    return tuple(p[q[x]] for x in range(len(q)))


def perm_inverse(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, v in enumerate(p):
        inv[v] = i
    return tuple(inv)


def perm_cycles(p: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Cycles of a permutation array, each starting at its smallest element,
    sorted by that element. Fixed points included."""
    seen = [False] * len(p)
    cycles = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = True
            cyc.append(x)
            x = p[x]
        cycles.append(tuple(cyc))
    return cycles


def cycles_to_perm(n: int, cycles) -> tuple[int, ...]:
    p = list(range(n))
    for cyc in cycles:
        m = len(cyc)
        for i, x in enumerate(cyc):
            p[x] = cyc[(i + 1) % m]
    return tuple(p)


def lehmer_rank(p) -> int:
    """Rank of a permutation tuple in lexicographic order, 0-based."""
    n = len(p)
    rank = 0
    fact = 1
    for i in range(2, n + 1):
        fact *= i
    for i in range(n):
        fact //= (n - i) if n - i else 1
        smaller = 0
        pi = p[i]
        for j in range(i + 1, n):
            if p[j] < pi:
                smaller += 1
        rank += smaller * fact
    return rank


def default_workers() -> int:
    env = os.environ.get("QUARTN_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def parallel_map(fn, items, workers: int | None = None):
    """Ordered map over items; uses a process pool when workers > 1."""
    items = list(items)
    w = workers if workers is not None else default_workers()
    if w <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with Pool(min(w, len(items))) as pool:
        return pool.map(fn, items)
