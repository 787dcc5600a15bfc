from __future__ import annotations

import numpy as np
import pytest

from idlink.corpus import Corpus
from idlink.netgraph import (
    NETWORK_KEYS,
    ConversationGraph,
    build_graph,
    eigenvector_centrality,
    graph_metrics,
    hits,
    network_features,
    pagerank,
    read_edge_list,
    triangles_and_clustering,
    write_edge_list,
)

from conftest import post


def graph_from_edges(edges, extra_nodes=()):
    """edges: iterable of (u, v, w)."""
    out: dict[str, dict[str, float]] = {}
    nodes = set(extra_nodes)
    for u, v, w in edges:
        out.setdefault(u, {})[v] = float(w)
        nodes.add(u)
        nodes.add(v)
    return ConversationGraph(nodes=tuple(sorted(nodes)), out_edges=out)


def random_graph(rng, n, p=0.2, max_w=4):
    edges = []
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < p:
                edges.append((f"n{u:02d}", f"n{v:02d}", int(rng.integers(1, max_w + 1))))
    return graph_from_edges(edges, extra_nodes=[f"n{u:02d}" for u in range(n)])


def dense_adjacency(g):
    idx = {node: i for i, node in enumerate(g.nodes)}
    mat = np.zeros((len(g.nodes), len(g.nodes)))
    for u, nbrs in g.out_edges.items():
        for v, w in nbrs.items():
            mat[idx[u], idx[v]] = w
    return mat


def pagerank_oracle(g, damping=0.85, iters=5000):
    """Dense-matrix power iteration, written independently of the library."""
    mat = dense_adjacency(g)
    n = mat.shape[0]
    out_w = mat.sum(axis=1)
    trans = np.zeros_like(mat)
    nonzero = out_w > 0
    trans[nonzero] = mat[nonzero] / out_w[nonzero, None]
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        dangling_mass = r[~nonzero].sum()
        r_next = (1 - damping) / n + damping * (trans.T @ r + dangling_mass / n)
        if np.abs(r_next - r).sum() < 1e-13:
            r = r_next
            break
        r = r_next
    return dict(zip(g.nodes, r))


def eigen_oracle(g, iters=5000):
    """Dense power iteration with the same eigenvalue-0 capture rule."""
    mat = dense_adjacency(g).T  # in-edge operator
    n = mat.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    if not mat.any():
        return dict(zip(g.nodes, np.zeros(n)))
    for _ in range(iters):
        nxt = mat @ v
        norm = np.linalg.norm(nxt)
        if norm == 0:
            break
        nxt /= norm
        if np.abs(nxt - v).sum() < 1e-13:
            v = nxt
            break
        v = nxt
    return dict(zip(g.nodes, v))


def triangles_oracle(g):
    """O(n^3) enumeration over the undirected projection."""
    nodes = list(g.nodes)
    idx = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    und = np.zeros((n, n), dtype=bool)
    for u, nbrs in g.out_edges.items():
        for v in nbrs:
            und[idx[u], idx[v]] = True
            und[idx[v], idx[u]] = True
    tri = dict.fromkeys(nodes, 0)
    for i in range(n):
        for j in range(i + 1, n):
            if not und[i, j]:
                continue
            for k in range(j + 1, n):
                if und[i, k] and und[j, k]:
                    tri[nodes[i]] += 1
                    tri[nodes[j]] += 1
                    tri[nodes[k]] += 1
    return tri


class TestBuildGraph:
    def test_double_mention_weight(self):
        corp = Corpus.from_posts([post("p1", author="u", text="@v hey @v")])
        g = build_graph(corp, ["u"])
        assert g.out_edges["u"]["v"] == 2.0

    def test_self_interaction_dropped(self):
        corp = Corpus.from_posts([post("p1", author="u", text="hi", retweet_of="u")])
        g = build_graph(corp, ["u"])
        assert g.out_edges.get("u", {}) == {}

    def test_no_interactions_isolated(self):
        corp = Corpus.from_posts([
            post("p1", author="u", text="hi"),
            post("p2", author="v", text="yo"),
        ])
        g = build_graph(corp, ["u", "v"])
        assert g.n_edges == 0
        assert set(g.nodes) == {"u", "v"}

    def test_replies_and_retweets_counted(self):
        corp = Corpus.from_posts([
            post("p1", author="u", text="x", reply_to="v"),
            post("p2", author="u", text="y", retweet_of="v"),
        ])
        g = build_graph(corp, ["u"])
        assert g.out_edges["u"]["v"] == 2.0

    def test_outside_targets_become_nodes(self):
        corp = Corpus.from_posts([post("p1", author="u", text="@w hi")])
        g = build_graph(corp, ["u"])
        assert "w" in g.nodes


class TestPagerank:
    def test_mutual_pair(self):
        g = graph_from_edges([("a", "b", 1), ("b", "a", 1)])
        pr = pagerank(g)
        assert pr["a"] == pytest.approx(0.5, abs=1e-9)
        assert pr["b"] == pytest.approx(0.5, abs=1e-9)

    def test_single_node(self):
        g = graph_from_edges([], extra_nodes=["a"])
        assert pagerank(g)["a"] == pytest.approx(1.0, abs=1e-9)

    def test_chain_matches_oracle(self):
        g = graph_from_edges([("a", "b", 1), ("b", "c", 1)])
        pr = pagerank(g)
        oracle = pagerank_oracle(g)
        for node in g.nodes:
            assert pr[node] == pytest.approx(oracle[node], abs=1e-6)

    def test_sums_to_one(self):
        rng = np.random.default_rng(0)
        g = random_graph(rng, 25)
        assert sum(pagerank(g).values()) == pytest.approx(1.0, abs=1e-9)

    def test_weight_scaling_invariance(self):
        g1 = graph_from_edges([("a", "b", 1), ("b", "c", 2), ("c", "a", 3)])
        g2 = graph_from_edges([("a", "b", 10), ("b", "c", 20), ("c", "a", 30)])
        p1, p2 = pagerank(g1), pagerank(g2)
        for node in g1.nodes:
            assert p1[node] == pytest.approx(p2[node], abs=1e-9)


class TestHits:
    def test_one_edge(self):
        g = graph_from_edges([("a", "b", 1)])
        hub, auth = hits(g)
        assert hub["a"] == pytest.approx(1.0)
        assert hub["b"] == pytest.approx(0.0, abs=1e-12)
        assert auth["b"] == pytest.approx(1.0)
        assert auth["a"] == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_pair(self):
        g = graph_from_edges([("a", "b", 1), ("b", "a", 1)])
        hub, auth = hits(g)
        assert hub["a"] == pytest.approx(hub["b"])
        assert hub["a"] == pytest.approx(auth["a"])

    def test_zero_adjacency_flagged_zeros(self):
        g = graph_from_edges([], extra_nodes=["a", "b"])
        hub, auth = hits(g)
        assert set(hub.values()) == {0.0}
        assert set(auth.values()) == {0.0}

    def test_fixed_point_of_update(self):
        rng = np.random.default_rng(1)
        g = random_graph(rng, 10, p=0.3)
        hub, auth = hits(g, tol=1e-12)
        mat = dense_adjacency(g)
        h = np.array([hub[n] for n in g.nodes])
        a = np.array([auth[n] for n in g.nodes])
        # one more update step leaves both vectors unchanged within tol
        a2 = mat.T @ h
        a2 /= np.linalg.norm(a2)
        h2 = mat @ a2
        h2 /= np.linalg.norm(h2)
        assert np.abs(a2 - a).max() < 1e-6
        assert np.abs(h2 - h).max() < 1e-6

    def test_weight_scaling_invariance(self):
        g1 = graph_from_edges([("a", "b", 1), ("c", "b", 2)])
        g2 = graph_from_edges([("a", "b", 3), ("c", "b", 6)])
        h1, a1 = hits(g1)
        h2, a2 = hits(g2)
        for node in g1.nodes:
            assert h1[node] == pytest.approx(h2[node], abs=1e-9)
            assert a1[node] == pytest.approx(a2[node], abs=1e-9)


class TestEigenvector:
    def test_symmetric_complete_three(self):
        g = graph_from_edges([
            (u, v, 1) for u in "abc" for v in "abc" if u != v
        ])
        ev = eigenvector_centrality(g)
        vals = list(ev.values())
        assert vals[0] == pytest.approx(vals[1]) == pytest.approx(vals[2])

    def test_single_node(self):
        g = graph_from_edges([], extra_nodes=["a"])
        assert eigenvector_centrality(g)["a"] == 0.0  # edgeless graph

    def test_star_center_dominates(self):
        g = graph_from_edges([(f"leaf{i}", "center", 1) for i in range(4)])
        ev = eigenvector_centrality(g)
        assert ev["center"] == pytest.approx(1.0)
        oracle = eigen_oracle(g)
        for node in g.nodes:
            assert ev[node] == pytest.approx(oracle[node], abs=1e-6)

    def test_random_graph_matches_oracle(self):
        rng = np.random.default_rng(2)
        for trial in range(5):
            g = random_graph(rng, 15, p=0.25)
            ev = eigenvector_centrality(g)
            oracle = eigen_oracle(g)
            for node in g.nodes:
                assert ev[node] == pytest.approx(oracle[node], abs=1e-6)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng, 12, p=0.3)
        assert all(v >= 0 for v in eigenvector_centrality(g).values())

    def test_weight_scaling_invariance(self):
        rng = np.random.default_rng(7)
        g1 = random_graph(rng, 10, p=0.3)
        g2 = ConversationGraph(
            nodes=g1.nodes,
            out_edges={u: {v: 5 * w for v, w in nbrs.items()}
                       for u, nbrs in g1.out_edges.items()},
        )
        e1 = eigenvector_centrality(g1)
        e2 = eigenvector_centrality(g2)
        for node in g1.nodes:
            assert e1[node] == pytest.approx(e2[node], abs=1e-9)


class TestTriangles:
    def test_triangle(self):
        g = graph_from_edges([("a", "b", 1), ("b", "c", 1), ("c", "a", 1)])
        tri, coeff = triangles_and_clustering(g)
        assert tri == {"a": 1, "b": 1, "c": 1}
        assert coeff == {"a": 1.0, "b": 1.0, "c": 1.0}

    def test_path(self):
        g = graph_from_edges([("a", "b", 1), ("b", "c", 1)])
        tri, coeff = triangles_and_clustering(g)
        assert set(tri.values()) == {0}
        assert coeff["b"] == 0.0

    def test_random_matches_bruteforce(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            g = random_graph(rng, int(rng.integers(5, 30)), p=0.25)
            tri, coeff = triangles_and_clustering(g)
            assert tri == triangles_oracle(g)
            assert all(0.0 <= c <= 1.0 for c in coeff.values())


class TestNetworkFeatures:
    def test_isolated_node_values(self):
        g = graph_from_edges([("a", "b", 1), ("b", "a", 1)], extra_nodes=["iso"])
        fv = network_features(g, "iso")
        vals = fv.values
        assert vals["authority"] == pytest.approx(0.0, abs=1e-12)
        assert vals["hub"] == pytest.approx(0.0, abs=1e-12)
        assert vals["triangles"] == 0.0
        assert vals["eigenvector"] == pytest.approx(0.0, abs=1e-12)
        assert vals["clustering"] == 0.0
        assert vals["pagerank"] == pytest.approx(pagerank_oracle(g)["iso"], abs=1e-6)
        assert vals["pagerank"] > 0.0  # teleport + dangling share

    def test_schema_has_six_keys(self):
        g = graph_from_edges([("a", "b", 1)])
        assert network_features(g, "a").names == NETWORK_KEYS

    def test_matches_standalone_ops(self):
        rng = np.random.default_rng(5)
        g = random_graph(rng, 10, p=0.3)
        node = g.nodes[0]
        fv = network_features(g, node)
        assert fv.values["pagerank"] == pagerank(g)[node]
        hub, auth = hits(g)
        assert fv.values["hub"] == hub[node]
        assert fv.values["authority"] == auth[node]

    def test_unknown_account(self):
        g = graph_from_edges([("a", "b", 1)])
        with pytest.raises(ValueError, match="unknown account"):
            network_features(g, "zz")

    def test_relabeling_isomorphism(self):
        rng = np.random.default_rng(6)
        g = random_graph(rng, 8, p=0.35)
        mapping = {n: f"x{n}" for n in g.nodes}
        relabeled = ConversationGraph(
            nodes=tuple(sorted(mapping[n] for n in g.nodes)),
            out_edges={mapping[u]: {mapping[v]: w for v, w in nbrs.items()}
                       for u, nbrs in g.out_edges.items()},
        )
        m1 = graph_metrics(g)
        m2 = graph_metrics(relabeled)
        for key in NETWORK_KEYS:
            for node in g.nodes:
                assert m1[key][node] == pytest.approx(m2[key][mapping[node]], abs=1e-9)


class TestEdgeListRoundTrip:
    def test_round_trip(self, tmp_path):
        g = graph_from_edges([("a", "b", 2), ("b", "c", 1)])
        path = tmp_path / "edges.csv"
        write_edge_list(g, path, header_comment="config=xyz")
        g2 = read_edge_list(path)
        assert g2.out_edges == g.out_edges
