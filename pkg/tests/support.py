"""Seeded graph generators and deliberately naive reference implementations."""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np

from netreport.graph import Graph

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "sample"
GOLDEN = Path(__file__).resolve().parent / "golden" / "sample"


def graph_from_pairs(n, pairs, directed=False, multigraph=False, **kw) -> Graph:
    return Graph.from_edges(n, list(pairs), directed=directed, multigraph=multigraph, **kw)


def er_graph(n: int, p: float, seed: int, directed: bool = False, loops: bool = False) -> Graph:
    rng = np.random.default_rng(seed)
    pairs = []
    for u in range(n):
        for v in range(n) if directed else range(u, n):
            if u == v and not loops:
                continue
            if rng.random() < p:
                pairs.append((u, v))
    return graph_from_pairs(n, pairs, directed=directed)


def complete_graph(n: int) -> Graph:
    return graph_from_pairs(n, itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    return graph_from_pairs(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> Graph:
    return graph_from_pairs(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def paw_graph() -> Graph:
    return graph_from_pairs(4, [(0, 1), (1, 2), (0, 2), (2, 3)])


def heavy_tailed_edges(n: int, m: int, gamma: float, seed: int) -> np.ndarray:
    """Chung–Lu style simple undirected edges with a power-law weight sequence."""
    rng = np.random.default_rng(seed)
    w = (np.arange(1, n + 1) / n) ** (-1.0 / (gamma - 1.0))
    p = w / w.sum()
    chosen = np.empty((0, 2), dtype=np.int64)
    while len(chosen) < m:
        need = int((m - len(chosen)) * 1.15) + 1000
        u = rng.choice(n, need, p=p)
        v = rng.choice(n, need, p=p)
        e = np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1)
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([chosen, e])
        _, first = np.unique(both[:, 0] * n + both[:, 1], return_index=True)
        chosen = both[np.sort(first)]
    return chosen[:m]


def path_plus_chords(n: int, m: int, seed: int) -> list[tuple[int, int]]:
    """A spanning path plus random chords: exactly ``n`` nodes touched and ``m`` simple edges."""
    rng = np.random.default_rng(seed)
    seen = {(i, i + 1) for i in range(n - 1)}
    while len(seen) < m:
        u, v = sorted(rng.integers(0, n, 2).tolist())
        if u != v:
            seen.add((u, v))
    return sorted(seen)


def write_edges(path: Path, edges: np.ndarray) -> None:
    with open(path, "w") as f:
        for u, v in edges.tolist():
            f.write(f"{u} {v}\n")


# ---- naive oracles ----------------------------------------------------


def dense_simple(g: Graph) -> np.ndarray:
    """Symmetric 0/1 adjacency without loops, built edge by edge."""
    a = np.zeros((g.node_count, g.node_count), dtype=np.int64)
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        if u != v:
            a[u, v] = a[v, u] = 1
    return a


def dense_adjacency(g: Graph) -> np.ndarray:
    a = np.zeros((g.node_count, g.node_count))
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        a[u, v] = 1
        if not g.directed:
            a[v, u] = 1
    return a


def bfs_components(n: int, neighbors) -> list[int]:
    seen = [False] * n
    sizes = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack, size = [s], 0
        while stack:
            u = stack.pop()
            size += 1
            for v in neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        sizes.append(size)
    return sorted(sizes, reverse=True)


def naive_strong_sizes(g: Graph) -> list[int]:
    n = g.node_count
    reach = np.eye(n, dtype=bool)
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        reach[u, v] = True
    for k in range(n):  # Floyd–Warshall transitive closure
        reach |= reach[:, [k]] & reach[[k], :]
    mutual = reach & reach.T
    return bfs_components(n, lambda u: np.flatnonzero(mutual[u]).tolist())


def naive_triangles(a: np.ndarray) -> int:
    return int(np.trace(a @ a @ a)) // 6


def naive_local_clustering(a: np.ndarray) -> list[float]:
    out = []
    for u in range(len(a)):
        nb = np.flatnonzero(a[u])
        k = len(nb)
        if k < 2:
            out.append(0.0)
            continue
        links = sum(a[x, y] for x, y in itertools.combinations(nb, 2))
        out.append(links / (k * (k - 1) / 2))
    return out


def naive_global_clustering(a: np.ndarray) -> float:
    deg = a.sum(axis=1)
    wedges = sum(d * (d - 1) / 2 for d in deg)
    return 0.0 if wedges == 0 else 3 * naive_triangles(a) / wedges


def naive_assortativity(a: np.ndarray) -> float | None:
    """Pearson correlation over ordered endpoint pairs (both orientations)."""
    deg = a.sum(axis=1)
    xs, ys = [], []
    for u, v in zip(*np.nonzero(a)):
        xs.append(float(deg[u]))
        ys.append(float(deg[v]))
    if not xs:
        return None
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def naive_max_core(a: np.ndarray) -> int:
    """Largest k whose k-core is nonempty, by repeated peeling for every k."""
    n = len(a)
    best = 0
    for k in range(1, n):
        alive = np.ones(n, dtype=bool)
        changed = True
        while changed:
            deg = (a[alive][:, alive]).sum(axis=1)
            drop = deg < k
            changed = bool(drop.any())
            idx = np.flatnonzero(alive)
            alive[idx[drop]] = False
        if alive.any():
            best = k
        else:
            break
    return best


def permuted(g: Graph, seed: int) -> Graph:
    """Same graph with node ids shuffled (labels follow their nodes)."""
    perm = np.random.default_rng(seed).permutation(g.node_count)
    labels = [None] * g.node_count
    for old, new in enumerate(perm.tolist()):
        labels[new] = g.labels[old]
    return Graph(
        g.node_count,
        perm[g.src],
        perm[g.dst],
        directed=g.directed,
        multigraph=g.multigraph,
        labels=tuple(labels),
    )


# ---- end-to-end helpers -----------------------------------------------


def sample_generate_args(out: Path) -> list[str]:
    return [
        "generate",
        "--edges", str(SAMPLE / "contacts.txt"),
        "--timestamped",
        "--node-attrs", str(SAMPLE / "nodes.csv"),
        "--manifest", str(SAMPLE / "manifest.yaml"),
        "--out", str(out),
    ]


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
