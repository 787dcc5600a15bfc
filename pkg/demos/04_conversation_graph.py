"""The conversation graph and its six per-account network features.

Edges aggregate mentions, replies, and retweets; centralities run on the
weighted digraph, triangles and clustering on its undirected projection.
"""

from idlink import generate_synthetic_corpus
from idlink.netgraph import build_graph, graph_metrics, network_features

corpus = generate_synthetic_corpus(12, (15, 30), style_seed=5, seed=6)
accounts = corpus.authors()
graph = build_graph(corpus, accounts)
print(f"graph: {graph.n_nodes} nodes, {graph.n_edges} weighted edges")

some = accounts[0]
out = graph.out_edges.get(some, {})
print(f"{some} interacts with: {dict(sorted(out.items()))}")

metrics = graph_metrics(graph)
print("\ntop accounts by pagerank:")
ranked = sorted(metrics["pagerank"].items(), key=lambda kv: -kv[1])[:5]
for node, score in ranked:
    print(f"  {node}: pagerank={score:.4f} hub={metrics['hub'][node]:.4f} "
          f"authority={metrics['authority'][node]:.4f}")

fv = network_features(graph, some)
print(f"\nnetwork feature vector for {some}:")
for name, value in fv.values.items():
    print(f"  {name} = {value:.5f}")
