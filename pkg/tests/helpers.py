"""Independent oracles and generators shared by the test suite.

Everything here is deliberately brute-force and written without reusing the
library's own code paths, so it can serve as a second opinion.
"""

import random
from itertools import combinations

from admire.table import CAT, NUM, Table

# --- data generators ---------------------------------------------------------


def random_num_table(rng: random.Random, rows: int, cols: int) -> Table:
    schema = [(f"c{i}", NUM) for i in range(cols)]
    data = [[rng.uniform(-10, 10) for _ in range(cols)] for _ in range(rows)]
    return Table(schema, data)


def random_mixed_table(rng: random.Random, rows: int, missing_rate=0.0) -> Table:
    schema = [("a", NUM), ("b", CAT), ("c", NUM), ("d", CAT)]
    data = []
    for _ in range(rows):
        row = [
            rng.uniform(0, 5),
            rng.choice(["x", "y", "z"]),
            rng.uniform(-3, 3),
            rng.choice(["p", "q"]),
        ]
        for i in range(4):
            if rng.random() < missing_rate:
                row[i] = None
        data.append(row)
    return Table(schema, data)


def gaussian_mixture_2d(rng: random.Random, n: int) -> Table:
    centers = [(-4.0, -4.0), (0.0, 3.0), (5.0, -1.0)]
    rows = []
    for _ in range(n):
        cx, cy = rng.choice(centers)
        rows.append([rng.gauss(cx, 1.0), rng.gauss(cy, 1.0)])
    return Table([("x", NUM), ("y", NUM)], rows)


def random_transactions(rng: random.Random, n: int, items: int):
    universe = [chr(ord("A") + i) for i in range(items)]
    out = []
    for _ in range(n):
        size = rng.randint(1, items)
        out.append(frozenset(rng.sample(universe, size)))
    return out


# --- DAG oracles -------------------------------------------------------------


def random_dag_edges(rng: random.Random, n: int, density=0.4):
    """Edges over task ids t0..t{n-1}; i -> j only when i < j, so acyclic."""
    ids = [f"t{i}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges.append((ids[i], ids[j]))
    return ids, edges


def all_paths(ids, edges):
    succs = {i: [] for i in ids}
    preds = {i: [] for i in ids}
    for a, b in edges:
        succs[a].append(b)
        preds[a], preds[b] = preds[a], preds[b] + [a]
    sources = [i for i in ids if not preds[i]]
    paths = []

    def walk(node, path):
        path = path + [node]
        if not succs[node]:
            paths.append(path)
        for s in succs[node]:
            walk(s, path)

    for s in sources:
        walk(s, [])
    return paths


def longest_path_depth(ids, edges):
    """Per-node longest path length (in edges) from any source, brute force."""
    preds = {i: [] for i in ids}
    for a, b in edges:
        preds[b].append(a)

    def depth(node):
        if not preds[node]:
            return 0
        return 1 + max(depth(p) for p in preds[node])

    return {i: depth(i) for i in ids}


def reachable(ids, edges, src):
    succs = {i: set() for i in ids}
    for a, b in edges:
        succs[a].add(b)
    seen = set()
    frontier = [src]
    while frontier:
        node = frontier.pop()
        for s in succs[node]:
            if s not in seen:
                seen.add(s)
                frontier.append(s)
    return seen


# --- clustering oracle -------------------------------------------------------


def centralized_lloyd(rows, k, init, max_iter, tol):
    """Reference Lloyd's on a list of row vectors: returns the centroid
    trajectory (one snapshot per iteration) and the final SSE."""
    centroids = [list(c) for c in init]
    trajectory = []
    for _ in range(max_iter):
        sums = [[0.0] * len(centroids[0]) for _ in range(k)]
        counts = [0] * k
        for row in rows:
            best, best_d = 0, None
            for ci, cen in enumerate(centroids):
                d = sum((x - c) ** 2 for x, c in zip(row, cen))
                if best_d is None or d < best_d:
                    best, best_d = ci, d
            counts[best] += 1
            for j, x in enumerate(row):
                sums[best][j] += x
        new = []
        for ci in range(k):
            if counts[ci] == 0:
                new.append(list(centroids[ci]))
            else:
                new.append([s / counts[ci] for s in sums[ci]])
        moved = max(
            abs(a - b) for cen, prev in zip(new, centroids) for a, b in zip(cen, prev)
        )
        centroids = new
        trajectory.append([list(c) for c in centroids])
        if moved < tol:
            break
    sse = 0.0
    for row in rows:
        sse += min(
            sum((x - c) ** 2 for x, c in zip(row, cen)) for cen in centroids
        )
    return trajectory, centroids, sse


# --- itemset oracle ----------------------------------------------------------


def brute_force_frequent(transactions, minsup):
    """Supports of every frequent itemset by enumerating the whole powerset."""
    universe = sorted({item for t in transactions for item in t})
    total = len(transactions)
    out = {}
    for size in range(1, len(universe) + 1):
        for combo in combinations(universe, size):
            cset = set(combo)
            count = sum(1 for t in transactions if cset <= t)
            if total and count / total >= minsup:
                out[combo] = count / total
    return out


def brute_force_rules(frequent, minconf):
    """All rules X -> Z\\X with confidence >= minconf from frequent supports."""
    out = set()
    for itemset, sup in frequent.items():
        if len(itemset) < 2:
            continue
        for size in range(1, len(itemset)):
            for ante in combinations(itemset, size):
                conf = sup / frequent[tuple(sorted(ante))]
                if conf >= minconf:
                    cons = tuple(sorted(set(itemset) - set(ante)))
                    out.add((tuple(sorted(ante)), cons, sup, conf))
    return out


# --- topology oracle ---------------------------------------------------------


def random_connected_topology(rng: random.Random, n: int, max_latency=4):
    """(nodes, edges) with a random spanning tree plus extra edges."""
    nodes = [f"n{i:02d}" for i in range(n)]
    edges = []
    for i in range(1, n):
        j = rng.randrange(i)
        edges.append((nodes[i], nodes[j], rng.randint(1, max_latency)))
    extra = rng.randint(0, n)
    for _ in range(extra):
        a, b = rng.sample(nodes, 2)
        if not any({a, b} == {x, y} for x, y, _ in edges):
            edges.append((a, b, rng.randint(1, max_latency)))
    return nodes, edges


def bfs_within_ttl(nodes, edges, origin, ttl):
    """Set of nodes within ttl hops of origin, ignoring latencies."""
    neighbors = {n: set() for n in nodes}
    for a, b, _ in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    seen = {origin}
    frontier = {origin}
    for _ in range(ttl):
        frontier = {nb for n in frontier for nb in neighbors[n]} - seen
        seen |= frontier
    return seen


def hop_diameter(nodes, edges):
    best = 0
    for origin in nodes:
        dist = {origin: 0}
        frontier = [origin]
        neighbors = {n: set() for n in nodes}
        for a, b, _ in edges:
            neighbors[a].add(b)
            neighbors[b].add(a)
        while frontier:
            nxt = []
            for n in frontier:
                for nb in neighbors[n]:
                    if nb not in dist:
                        dist[nb] = dist[n] + 1
                        nxt.append(nb)
            frontier = nxt
        best = max(best, max(dist.values()))
    return best
