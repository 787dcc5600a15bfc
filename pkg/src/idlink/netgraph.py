"""Conversation graph construction and per-account network features.

The graph is directed and weighted: an edge u -> v accumulates one unit per
mention of v by u, per reply from u to v, and per retweet by u of v.
Self-interactions are dropped. Centralities are computed over the weighted
digraph; triangles and clustering over its undirected, unweighted
projection.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import ConvergenceError, DataFormatError
from .textfeat import CATEGORY_NETWORK, FeatureVector

log = logging.getLogger(__name__)

NETWORK_KEYS = ("authority", "hub", "triangles", "eigenvector", "pagerank", "clustering")


@dataclass(eq=False)
class ConversationGraph:
    """Frozen after construction; metric results are cached on first use."""

    nodes: tuple[str, ...]
    out_edges: dict[str, dict[str, float]]
    _metrics: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        for u, nbrs in self.out_edges.items():
            for v, w in nbrs.items():
                if u == v:
                    raise ValueError(f"self-loop on {u!r}")
                if w < 1:
                    raise ValueError(f"edge weight must be >= 1, got {w} on {u!r}->{v!r}")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.out_edges.values())

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src_idx, dst_idx, weight) arrays in a fixed node order."""
        index = {n: i for i, n in enumerate(self.nodes)}
        src, dst, w = [], [], []
        for u in self.nodes:
            for v, weight in sorted(self.out_edges.get(u, {}).items()):
                src.append(index[u])
                dst.append(index[v])
                w.append(weight)
        return (
            np.array(src, dtype=int),
            np.array(dst, dtype=int),
            np.array(w, dtype=float),
        )


def build_graph(corpus: Corpus, accounts) -> ConversationGraph:
    """Aggregate mention/reply/retweet edges over the posts of `accounts`.

    Targets outside the account set still become nodes (neighborhood
    context); isolated accounts stay as nodes without edges.
    """
    accounts = sorted(set(accounts))
    nodes = set(accounts)
    edges: dict[str, dict[str, float]] = {}
    for account in accounts:
        posts = corpus.posts_by_author.get(account, ())
        for post in posts:
            targets = list(post.mentions)
            if post.reply_to is not None:
                targets.append(post.reply_to)
            if post.retweet_of is not None:
                targets.append(post.retweet_of)
            for target in targets:
                if target == account:
                    continue
                nodes.add(target)
                bucket = edges.setdefault(account, {})
                bucket[target] = bucket.get(target, 0.0) + 1.0
    return ConversationGraph(nodes=tuple(sorted(nodes)), out_edges=edges)


def pagerank(g: ConversationGraph, damping: float = 0.85, tol: float = 1e-8,
             max_iter: int = 1000) -> dict[str, float]:
    """Weighted PageRank; dangling mass spreads uniformly; scores sum to 1.

    Converges when the L1 change drops below tol, else raises
    ConvergenceError carrying the last iterate.
    """
    if g.n_nodes == 0:
        raise ValueError("pagerank requires a nonempty graph")
    n = g.n_nodes
    src, dst, w = g.edge_arrays()
    out_weight = np.zeros(n)
    np.add.at(out_weight, src, w)
    dangling = out_weight == 0.0
    rank = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        contrib = rank[src] * w / out_weight[src]
        nxt = np.zeros(n)
        np.add.at(nxt, dst, contrib)
        nxt = (1.0 - damping) / n + damping * (nxt + rank[dangling].sum() / n)
        if np.abs(nxt - rank).sum() < tol:
            return dict(zip(g.nodes, nxt.tolist()))
        rank = nxt
    raise ConvergenceError(
        f"pagerank did not converge within {max_iter} iterations",
        last_scores=dict(zip(g.nodes, rank.tolist())),
    )


def hits(g: ConversationGraph, tol: float = 1e-8, max_iter: int = 1000
         ) -> tuple[dict[str, float], dict[str, float]]:
    """Hub/authority scores on the weighted adjacency, L2-normalized.

    A graph with no edges yields all-zero scores (logged, not an error).
    """
    if g.n_nodes == 0:
        raise ValueError("hits requires a nonempty graph")
    n = g.n_nodes
    src, dst, w = g.edge_arrays()
    if len(src) == 0:
        log.warning("hits: graph has no edges; returning all-zero scores")
        zeros = dict.fromkeys(g.nodes, 0.0)
        return dict(zeros), dict(zeros)
    hub = np.full(n, 1.0 / np.sqrt(n))
    auth = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        new_auth = np.zeros(n)
        np.add.at(new_auth, dst, hub[src] * w)
        new_auth /= np.linalg.norm(new_auth)
        new_hub = np.zeros(n)
        np.add.at(new_hub, src, new_auth[dst] * w)
        new_hub /= np.linalg.norm(new_hub)
        delta = np.abs(new_hub - hub).sum() + np.abs(new_auth - auth).sum()
        hub, auth = new_hub, new_auth
        if delta < tol:
            return dict(zip(g.nodes, hub.tolist())), dict(zip(g.nodes, auth.tolist()))
    raise ConvergenceError(
        f"hits did not converge within {max_iter} iterations",
        last_scores=(dict(zip(g.nodes, hub.tolist())), dict(zip(g.nodes, auth.tolist()))),
    )


def eigenvector_centrality(g: ConversationGraph, tol: float = 1e-8,
                           max_iter: int = 1000) -> dict[str, float]:
    """Power iteration on the in-edge weighted adjacency, L2-normalized.

    When an iterate v reaches A@v = 0 (the adjacency is nilpotent along the
    iteration, e.g. DAGs), v itself is an exact eigenvector for eigenvalue 0
    and is returned. A graph with no edges yields all-zero scores.
    """
    if g.n_nodes == 0:
        raise ValueError("eigenvector_centrality requires a nonempty graph")
    n = g.n_nodes
    src, dst, w = g.edge_arrays()
    if len(src) == 0:
        log.warning("eigenvector_centrality: graph has no edges; returning all-zero scores")
        return dict.fromkeys(g.nodes, 0.0)
    vec = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        nxt = np.zeros(n)
        np.add.at(nxt, dst, vec[src] * w)
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return dict(zip(g.nodes, vec.tolist()))
        nxt /= norm
        if np.abs(nxt - vec).sum() < tol:
            return dict(zip(g.nodes, nxt.tolist()))
        vec = nxt
    raise ConvergenceError(
        f"eigenvector centrality did not converge within {max_iter} iterations",
        last_scores=dict(zip(g.nodes, vec.tolist())),
    )


def undirected_neighbors(g: ConversationGraph) -> dict[str, set[str]]:
    nbrs: dict[str, set[str]] = {node: set() for node in g.nodes}
    for u, targets in g.out_edges.items():
        for v in targets:
            nbrs[u].add(v)
            nbrs[v].add(u)
    return nbrs


def triangles_and_clustering(g: ConversationGraph
                             ) -> tuple[dict[str, int], dict[str, float]]:
    """Per-node triangle counts and clustering on the undirected projection."""
    nbrs = undirected_neighbors(g)
    triangles = {}
    coeff = {}
    for node in g.nodes:
        ns = nbrs[node]
        deg = len(ns)
        links = sum(len(ns & nbrs[other]) for other in ns) // 2
        triangles[node] = links
        coeff[node] = 2.0 * links / (deg * (deg - 1)) if deg >= 2 else 0.0
    return triangles, coeff


def graph_metrics(g: ConversationGraph) -> dict[str, dict[str, float]]:
    """All six per-node metrics, computed once and cached on the graph."""
    if g._metrics is None:
        hub, auth = hits(g)
        tri, clust = triangles_and_clustering(g)
        g._metrics = {
            "authority": auth,
            "hub": hub,
            "triangles": {k: float(v) for k, v in tri.items()},
            "eigenvector": eigenvector_centrality(g),
            "pagerank": pagerank(g),
            "clustering": clust,
        }
    return g._metrics


def network_features(g: ConversationGraph, account: str) -> FeatureVector:
    """The six network scores for one account, in fixed key order."""
    if account not in g.nodes:
        raise ValueError(f"unknown account {account!r}")
    metrics = graph_metrics(g)
    return FeatureVector(
        CATEGORY_NETWORK,
        {key: metrics[key][account] for key in NETWORK_KEYS},
    )


def write_edge_list(g: ConversationGraph, path, header_comment: str | None = None) -> None:
    """Export as CSV (source, target, weight)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "weight"])
        for u in g.nodes:
            for v, w in sorted(g.out_edges.get(u, {}).items()):
                writer.writerow([u, v, w])


def read_edge_list(path) -> ConversationGraph:
    """Import a CSV edge list written by write_edge_list."""
    edges: dict[str, dict[str, float]] = {}
    nodes: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    reader = csv.reader(rows)
    header = next(reader, None)
    if header != ["source", "target", "weight"]:
        raise DataFormatError(f"{path}: expected edge-list header source,target,weight")
    for row in reader:
        if len(row) != 3:
            raise DataFormatError(f"{path}: malformed edge row {row!r}")
        u, v, w = row[0], row[1], float(row[2])
        nodes.add(u)
        nodes.add(v)
        edges.setdefault(u, {})[v] = w
    return ConversationGraph(nodes=tuple(sorted(nodes)), out_edges=edges)
