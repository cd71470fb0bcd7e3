"""Directed user-interaction graph, PageRank by power iteration, and the
topology measures used to describe the network.

PageRank here is the un-normalized fixed point

    x_i = alpha * sum_k a_ki / d_k * x_k + beta_i

with ``d_k`` the out-degree of ``k``. A vertex with no out-edges simply has
no outgoing terms, so its mass leaves the system and only ``beta`` refills
it.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConvergenceError, InputError, ParameterError


@dataclass
class InteractionGraph:
    """Immutable-by-convention directed graph over integer user IDs.

    ``weights`` maps each edge to its weight; it is 1 for every edge unless
    the graph was built with ``weighted=True``.
    """

    vertices: list
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = sorted(set(self.vertices))
        self.index = {v: i for i, v in enumerate(self.vertices)}
        succ = [[] for _ in self.vertices]
        for (u, v) in sorted(self.weights):
            if u == v:
                raise ValueError(f"self-loop on {u}")
            succ[self.index[u]].append(self.index[v])
        self.succ = succ

    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Iterable = ()) -> "InteractionGraph":
        edges = list(edges)
        vs = set(vertices)
        for u, v in edges:
            vs.add(u)
            vs.add(v)
        return cls(list(vs), {(u, v): 1.0 for u, v in edges if u != v})

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> set:
        return set(self.weights)

    def out_degree(self) -> dict:
        deg = dict.fromkeys(self.vertices, 0)
        for u, _ in self.weights:
            deg[u] += 1
        return deg

    def adjacency(self, weighted: bool = False) -> sp.csr_matrix:
        """Sparse ``A`` with ``A[i, j] = 1`` (or the weight) for edge i -> j."""
        n = self.n
        if not self.weights:
            return sp.csr_matrix((n, n))
        rows, cols, data = [], [], []
        for (u, v), w in self.weights.items():
            rows.append(self.index[u])
            cols.append(self.index[v])
            data.append(w if weighted else 1.0)
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def transition(self, weighted: bool = False) -> sp.csr_matrix:
        """``D^-1 A`` with zero rows for dangling vertices."""
        a = self.adjacency(weighted)
        out = np.asarray(a.sum(axis=1)).ravel()
        inv = np.divide(1.0, out, out=np.zeros_like(out), where=out > 0)
        return sp.diags(inv) @ a

    def undirected_neighbours(self) -> list[set]:
        nbrs = [set() for _ in self.vertices]
        for i, succ in enumerate(self.succ):
            for j in succ:
                nbrs[i].add(j)
                nbrs[j].add(i)
        return nbrs

    def relabel(self, mapping: Mapping) -> "InteractionGraph":
        return InteractionGraph([mapping[v] for v in self.vertices],
                                {(mapping[u], mapping[v]): w
                                 for (u, v), w in self.weights.items()})


def build_graph(records: Iterable, weighted: bool = False) -> InteractionGraph:
    """Vertices are every sender and every addressed receiver; one edge per
    distinct (sender, receiver) pair.

    With ``weighted=True`` an edge carries the summed retweet counts of its
    interactions (zero counts taken as 1). The default graph is unweighted.
    """
    vertices = set()
    weights: dict = {}
    for rec in records:
        u = rec.from_user_id
        vertices.add(u)
        v = rec.to_user_id
        if v < 1 or v == u:
            continue
        vertices.add(v)
        if weighted:
            weights[(u, v)] = weights.get((u, v), 0.0) + max(rec.retweet_count, 1)
        else:
            weights[(u, v)] = 1.0
    return InteractionGraph(list(vertices), weights)


# --------------------------------------------------------------------------
# PageRank

@dataclass(frozen=True)
class PageRankParams:
    alpha: float = 0.85
    beta: float | None = None  # None -> (1 - alpha) / n
    tolerance: float = 1e-10
    max_iterations: int = 10_000
    alpha_cap: float = 1.0  # upper bound on alpha when rho == 0
    weighted: bool = False

    def __post_init__(self):
        if self.beta is not None and self.beta <= 0:
            raise ParameterError("beta must be positive")
        if self.tolerance <= 0:
            raise ParameterError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be >= 1")


@dataclass
class CentralityScores:
    vertices: list
    x: np.ndarray
    iterations_used: int
    residual: float
    spectral_radius: float | None = None
    _idx: dict | None = field(default=None, repr=False, compare=False)

    @property
    def values(self) -> dict:
        return dict(zip(self.vertices, self.x.tolist()))

    def __getitem__(self, v):
        return float(self.x[self._index()[v]])

    def get(self, v, default=0.0):
        idx = self._index()
        return float(self.x[idx[v]]) if v in idx else default

    def _index(self):
        if self._idx is None:
            self._idx = {v: i for i, v in enumerate(self.vertices)}
        return self._idx


def check_alpha(alpha: float, rho: float, cap: float = 1.0) -> None:
    """``alpha`` must satisfy ``0 <= alpha < 1/rho`` (``<= cap`` when rho = 0)."""
    if not math.isfinite(alpha) or alpha < 0:
        raise ParameterError(f"damping factor {alpha} must be non-negative")
    if rho > 0 and alpha * rho >= 1:
        raise ParameterError(
            f"damping factor {alpha} is not below 1/rho = {1 / rho:.6g}")
    if rho == 0 and alpha > cap:
        raise ParameterError(f"damping factor {alpha} exceeds cap {cap}")


def pagerank(graph: InteractionGraph, params: PageRankParams = PageRankParams(),
             rho: float | None = None) -> CentralityScores:
    """Power iteration for ``x = alpha x D^-1 A + beta``.

    Stops when successive iterates agree to ``params.tolerance`` in max-norm.
    The returned vector is the last iterate ``x_k`` and ``residual`` is
    exactly ``||x_k - (alpha x_k D^-1 A + beta)||_inf``.
    """
    n = graph.n
    if n == 0:
        raise ParameterError("PageRank of an empty graph")
    if rho is None:
        rho = spectral_radius(graph, weighted=params.weighted)
    check_alpha(params.alpha, rho, params.alpha_cap)

    beta = params.beta if params.beta is not None else (1.0 - params.alpha) / n
    if beta <= 0:
        raise ParameterError("alpha >= 1 needs an explicit positive beta")
    pt = graph.transition(params.weighted).T.tocsr()
    alpha = params.alpha
    x = np.full(n, beta, dtype=float)
    residual = math.inf
    for it in range(1, params.max_iterations + 1):
        x_new = alpha * (pt @ x) + beta
        residual = float(np.max(np.abs(x_new - x)))
        if residual <= params.tolerance:
            return CentralityScores(graph.vertices, x, it, residual, rho)
        x = x_new
    raise ConvergenceError(
        f"PageRank did not converge in {params.max_iterations} iterations",
        residual=residual, iterations=params.max_iterations)


def spectral_radius(graph: InteractionGraph, weighted: bool = False,
                    tol: float = 1e-12, max_iterations: int = 100_000) -> float:
    """Largest eigenvalue modulus of ``D^-1 A``.

    The matrix is non-negative, so its spectral radius is the largest
    Perron root over the strongly connected components. Each non-trivial
    component is irreducible; power iteration on the lazy matrix
    ``(I + P)/2`` is then aperiodic and converges, and the Collatz-Wielandt
    bounds ``min (Mv)_i / v_i <= mu <= max (Mv)_i / v_i`` give the stopping
    rule. Acyclic parts contribute 0.
    """
    n = graph.n
    if n == 0 or not graph.weights:
        return 0.0
    p = graph.transition(weighted)
    ncomp, labels = connected_components(p, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=ncomp)
    rho = 0.0
    for c in np.flatnonzero(sizes > 1):
        idx = np.flatnonzero(labels == c)
        sub = p[idx][:, idx].tocsr()
        rho = max(rho, _perron_root(sub, tol, max_iterations))
        if rho >= 1.0 - tol:
            break
    return float(min(rho, 1.0))


def _perron_root(m: sp.csr_matrix, tol: float, max_iterations: int) -> float:
    v = np.ones(m.shape[0])
    lo, hi = 0.0, 1.0
    for _ in range(max_iterations):
        w = 0.5 * (v + m @ v)
        ratios = w / v
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= tol:
            break
        v = w / w.max()
    return 2.0 * (0.5 * (lo + hi)) - 1.0


def top_k_by_centrality(scores, k: int) -> list:
    """Top ``k`` vertices by score, ties broken by ascending ID."""
    if k <= 0:
        return []
    items = scores.values.items() if isinstance(scores, CentralityScores) \
        else dict(scores).items()
    ranked = sorted(items, key=lambda kv: (-kv[1], kv[0]))
    return [v for v, _ in ranked[:k]]


# --------------------------------------------------------------------------
# topology

class PathLength(NamedTuple):
    mean: float | None  # None when no ordered pair is reachable
    pairs: int


SWEEP_BLOCK = 256


def _sweep(graph: InteractionGraph, betweenness: bool = True):
    """Breadth-first search from every source, a block of sources at a time.

    Each BFS level is a sparse ``n x block`` matrix of shortest-path counts;
    the next level is ``A^T`` times it restricted to unvisited entries, and
    the Brandes dependency pass walks the levels back with ``A``. Work is
    proportional to the entries actually reached.

    Returns the total of all finite distances, the number of reachable
    ordered pairs, and the betweenness array (zeros if not requested).
    """
    n = graph.n
    cb = np.zeros(n)
    total, pairs = 0, 0
    if n == 0:
        return total, pairs, cb
    a = graph.adjacency(weighted=False)
    at = a.T.tocsr()
    for lo in range(0, n, SWEEP_BLOCK):
        b = min(SWEEP_BLOCK, n - lo)
        visited = np.zeros((n, b), dtype=bool)
        cols = np.arange(b)
        visited[lo + cols, cols] = True
        level = sp.csr_matrix((np.ones(b), (lo + cols, cols)), shape=(n, b))
        levels = []
        depth = 0
        while True:
            nxt = (at @ level).tocoo()
            keep = ~visited[nxt.row, nxt.col]
            if not keep.any():
                break
            r, c, v = nxt.row[keep], nxt.col[keep], nxt.data[keep]
            visited[r, c] = True
            depth += 1
            total += depth * r.size
            pairs += r.size
            level = sp.csr_matrix((v, (r, c)), shape=(n, b))
            levels.append((r, c, v))
        if not betweenness:
            continue
        # levels[k] holds distance k + 1; dependencies at the deepest level are 0
        scratch = np.zeros((n, b))
        delta_next = None
        for k in range(len(levels) - 1, 0, -1):
            r1, c1, s1 = levels[k]
            d1 = delta_next if delta_next is not None else np.zeros(r1.size)
            coeff = sp.csr_matrix(((1.0 + d1) / s1, (r1, c1)), shape=(n, b))
            contrib = (a @ coeff).tocoo()
            scratch[contrib.row, contrib.col] = contrib.data
            r0, c0, s0 = levels[k - 1]
            delta = s0 * scratch[r0, c0]
            scratch[contrib.row, contrib.col] = 0.0
            np.add.at(cb, r0, delta)
            delta_next = delta
    return total, pairs, cb


def average_path_length(graph: InteractionGraph) -> PathLength:
    """Mean directed shortest-path length over ordered reachable pairs."""
    total, pairs, _ = _sweep(graph, betweenness=False)
    return PathLength(total / pairs if pairs else None, pairs)


def global_clustering(graph: InteractionGraph) -> float:
    """3 * triangles / connected triplets on the undirected projection."""
    nbrs = graph.undirected_neighbours()
    triplets = sum(len(nb) * (len(nb) - 1) // 2 for nb in nbrs)
    if triplets == 0:
        return 0.0
    # each triangle is seen once from every corner and every edge orientation
    closed = 0
    for i, nb in enumerate(nbrs):
        for j in nb:
            if j > i:
                closed += len(nb & nbrs[j])
    triangles = closed // 3
    return 3.0 * triangles / triplets


def vertex_betweenness(graph: InteractionGraph) -> dict:
    """Sum over ordered pairs (u, w), u != v != w, of the fraction of
    shortest u -> w paths through v (Brandes accumulation)."""
    return dict(zip(graph.vertices, _sweep(graph)[2].tolist()))


def path_statistics(graph: InteractionGraph) -> tuple[PathLength, dict]:
    """Average path length and betweenness from a single sweep."""
    total, pairs, cb = _sweep(graph)
    return (PathLength(total / pairs if pairs else None, pairs),
            dict(zip(graph.vertices, cb.tolist())))


def mean_betweenness(graph: InteractionGraph) -> float:
    bc = vertex_betweenness(graph)
    return float(np.mean(list(bc.values()))) if bc else 0.0


# --------------------------------------------------------------------------
# files

def write_edge_list(graph: InteractionGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for u, v in sorted(graph.weights):
            fh.write(f"{u}\t{v}\n")


def read_edge_list(path) -> InteractionGraph:
    edges = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip() or line.startswith("#"):
                    continue
                try:
                    u, v = (int(t) for t in line.split("\t"))
                except ValueError:
                    raise InputError(f"{path}:{lineno}: expected from<TAB>to") from None
                edges.append((u, v))
    except OSError as exc:
        raise InputError(f"cannot read edge list {path}: {exc}") from exc
    return InteractionGraph.from_edges(edges)


def write_centrality_csv(scores: CentralityScores, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "pagerank"])
        for v, x in zip(scores.vertices, scores.x):
            w.writerow([v, repr(float(x))])


def read_centrality_csv(path) -> dict:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return {int(r["user_id"]): float(r["pagerank"]) for r in csv.DictReader(fh)}
    except OSError as exc:
        raise InputError(f"cannot read centrality {path}: {exc}") from exc
