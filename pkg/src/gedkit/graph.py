"""Node-labeled undirected simple graphs, their file format, and generators."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Malformed graph file or record."""


class GraphValidationError(ValueError):
    """A graph violates the simple-undirected-graph invariants."""


class UnknownLabelError(ValueError):
    """A node label was not seen when the encoder was fitted."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with nodes ``0..N-1``.

    ``labels[n]`` is the label of node ``n``; an unlabeled graph has every
    label set to ``None``. ``edges`` holds sorted ``(u, v)`` pairs with
    ``u < v``.
    """

    labels: tuple
    edges: tuple
    id: str = field(default="", compare=True)

    def __post_init__(self):
        n = len(self.labels)
        kinds = {lab is None for lab in self.labels}
        if len(kinds) > 1:
            raise GraphValidationError(f"graph {self.id!r}: mixes labeled and unlabeled nodes")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise GraphValidationError(f"graph {self.id!r}: self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphValidationError(f"graph {self.id!r}: edge ({u}, {v}) has a dangling endpoint")
            if u > v:
                raise GraphValidationError(f"graph {self.id!r}: edge ({u}, {v}) is not in canonical order")
            if (u, v) in seen:
                raise GraphValidationError(f"graph {self.id!r}: duplicate edge ({u}, {v})")
            seen.add((u, v))
        if list(self.edges) != sorted(self.edges):
            raise GraphValidationError(f"graph {self.id!r}: edges are not sorted")

    @classmethod
    def from_edges(cls, labels: Sequence, edges: Iterable, id: str = "") -> "Graph":
        """Build a graph from any iterable of pairs; both orientations of an edge collapse."""
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            canon.add((min(u, v), max(u, v)))
        return cls(tuple(labels), tuple(sorted(canon)), id)

    @classmethod
    def unlabeled(cls, n: int, edges: Iterable, id: str = "") -> "Graph":
        return cls.from_edges([None] * n, edges, id)

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def is_labeled(self) -> bool:
        return self.num_nodes > 0 and self.labels[0] is not None

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def neighbors(self) -> tuple:
        adj = [[] for _ in range(self.num_nodes)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        deg.setflags(write=False)
        return deg

    @cached_property
    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        a.setflags(write=False)
        return a

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_set

    def is_connected(self) -> bool:
        if self.num_nodes <= 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            for m in self.neighbors[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return len(seen) == self.num_nodes

    def with_id(self, new_id: str) -> "Graph":
        return Graph(self.labels, self.edges, new_id)

    def to_dict(self) -> dict:
        nodes = []
        for i, lab in enumerate(self.labels):
            rec = {"i": i}
            if lab is not None:
                rec["label"] = lab
            nodes.append(rec)
        return {"id": self.id, "nodes": nodes, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Graph":
        if not isinstance(obj, dict):
            raise GraphFormatError("graph record must be a JSON object")
        try:
            gid = obj.get("id", "")
            raw_nodes = obj["nodes"]
            raw_edges = obj.get("edges", [])
        except KeyError as exc:
            raise GraphFormatError(f"graph record is missing {exc}") from None
        if not isinstance(gid, str):
            raise GraphFormatError("graph id must be a string")
        index = {}
        for rec in raw_nodes:
            if not isinstance(rec, dict) or not isinstance(rec.get("i"), int):
                raise GraphFormatError(f"graph {gid!r}: bad node record {rec!r}")
            label = rec.get("label")
            if label is not None and not isinstance(label, str):
                raise GraphFormatError(f"graph {gid!r}: node labels must be strings")
            if rec["i"] in index:
                raise GraphValidationError(f"graph {gid!r}: duplicate node index {rec['i']}")
            index[rec["i"]] = label
        # re-normalise arbitrary integer indices to 0..N-1, keeping their order
        order = sorted(index)
        remap = {old: new for new, old in enumerate(order)}
        labels = [index[old] for old in order]
        seen = set()
        edges = set()
        for e in raw_edges:
            if not isinstance(e, (list, tuple)) or len(e) != 2 or not all(isinstance(x, int) for x in e):
                raise GraphFormatError(f"graph {gid!r}: bad edge record {e!r}")
            u, v = e
            if u == v:
                raise GraphValidationError(f"graph {gid!r}: self-loop on node {u}")
            if u not in remap or v not in remap:
                raise GraphValidationError(f"graph {gid!r}: edge ({u}, {v}) has a dangling endpoint")
            if (u, v) in seen:
                raise GraphValidationError(f"graph {gid!r}: duplicate edge ({u}, {v})")
            seen.add((u, v))
            a, b = remap[u], remap[v]
            edges.add((min(a, b), max(a, b)))
        return cls(tuple(labels), tuple(sorted(edges)), gid)

    def __repr__(self) -> str:
        return f"Graph(id={self.id!r}, N={self.num_nodes}, E={self.num_edges})"


def load_graph(path) -> Graph:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None
    return Graph.from_dict(obj)


def save_graph(g: Graph, path) -> None:
    Path(path).write_text(json.dumps(g.to_dict()) + "\n", encoding="utf-8")


def load_graphs(path) -> list[Graph]:
    """Read a dataset file with one graph object per line."""
    graphs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            graphs.append(Graph.from_dict(obj))
    return graphs


def save_graphs(graphs: Iterable[Graph], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in graphs:
            fh.write(json.dumps(g.to_dict()) + "\n")


class LabelEncoder:
    """One-hot node encoder; falls back to a 1-d constant feature for unlabeled data."""

    def __init__(self, labels: Iterable[str] | None = None):
        labels = sorted(set(labels)) if labels else []
        self._index = {lab: i for i, lab in enumerate(labels)}

    @classmethod
    def fit(cls, graphs: Iterable[Graph]) -> "LabelEncoder":
        found = set()
        for g in graphs:
            found.update(lab for lab in g.labels if lab is not None)
        return cls(found)

    @property
    def labels(self) -> list[str]:
        return list(self._index)

    @property
    def is_constant(self) -> bool:
        return not self._index

    @property
    def dim(self) -> int:
        return len(self._index) or 1

    def encode(self, g: Graph) -> np.ndarray:
        if self.is_constant:
            if g.is_labeled:
                raise UnknownLabelError(f"constant encoder cannot encode labeled graph {g.id!r}")
            return np.ones((g.num_nodes, 1))
        x = np.zeros((g.num_nodes, self.dim))
        for n, lab in enumerate(g.labels):
            try:
                x[n, self._index[lab]] = 1.0
            except KeyError:
                raise UnknownLabelError(f"graph {g.id!r}: unknown label {lab!r}") from None
        return x

    def __eq__(self, other):
        return isinstance(other, LabelEncoder) and self._index == other._index

    def __repr__(self) -> str:
        return f"LabelEncoder({self.labels!r})"


def encode_nodes(g: Graph, enc: LabelEncoder) -> np.ndarray:
    return enc.encode(g)


def permute_nodes(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel node ``n`` as ``perm[n]``; labels travel with their nodes."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(g.num_nodes)):
        raise ValueError(f"not a permutation of 0..{g.num_nodes - 1}: {perm}")
    labels = [None] * g.num_nodes
    for old, new in enumerate(perm):
        labels[new] = g.labels[old]
    return Graph.from_edges(labels, ((perm[u], perm[v]) for u, v in g.edges), g.id)


def generate_graph(n: int, density: float, alphabet: Sequence[str] | None, seed: int, id: str = "") -> Graph:
    """Random connected graph: a random spanning tree plus each other edge with probability ``density``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        parent = order[rng.integers(k)]
        u, v = int(order[k]), int(parent)
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < density:
                edges.add((u, v))
    if alphabet:
        labels = [alphabet[i] for i in rng.integers(len(alphabet), size=n)]
    else:
        labels = [None] * n
    return Graph(tuple(labels), tuple(sorted(edges)), id)


def _bridges(g_adj: list[set], n: int) -> set:
    """Tarjan bridge finding on an adjacency-set list."""
    disc = [-1] * n
    low = [0] * n
    out = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        stack = [(root, -1, iter(sorted(g_adj[root])))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            u, parent, it = stack[-1]
            advanced = False
            for v in it:
                if disc[v] == -1:
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, u, iter(sorted(g_adj[v]))))
                    advanced = True
                    break
                if v != parent:
                    low[u] = min(low[u], disc[v])
            if not advanced:
                stack.pop()
                if parent != -1:
                    low[parent] = min(low[parent], low[u])
                    if low[u] > disc[parent]:
                        out.add((min(u, parent), max(u, parent)))
    return out


def perturb_graph(
    g: Graph,
    k: int,
    seed: int,
    *,
    alphabet: Sequence[str] | None = None,
    connected: bool = True,
    min_nodes: int = 1,
    max_nodes: int | None = None,
) -> tuple[Graph, int]:
    """Apply ``k`` unit-cost edit operations at random.

    Each step picks one applicable operation whose edit cost fits the
    remaining budget: relabel a node, insert or delete an edge, insert a
    node (with a connecting edge when ``connected``), or delete a leaf or
    isolated node together with its edges. With ``connected`` set, edge and
    node deletions never disconnect the graph. If nothing else fits, an
    isolated node is inserted. Returns the new graph and the number of unit
    edits applied, which always equals ``k``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    rng = np.random.default_rng(seed)
    labeled = g.is_labeled or (g.num_nodes == 0 and bool(alphabet))
    if alphabet is None:
        alphabet = sorted({lab for lab in g.labels if lab is not None})
    labels = list(g.labels)
    adj = [set(nb) for nb in g.neighbors]
    budget = k
    applied = 0
    cap = max_nodes if max_nodes is not None else float("inf")

    def edge_list():
        return sorted((u, v) for u in range(len(adj)) for v in adj[u] if u < v)

    while budget > 0:
        n = len(labels)
        ops = []
        if labeled and len(alphabet) >= 2 and n > 0:
            ops.append("relabel")
        if n * (n - 1) // 2 > sum(len(a) for a in adj) // 2:
            ops.append("insert_edge")
        edges = edge_list()
        bridges = _bridges(adj, n) if connected and edges else set()
        deletable = [e for e in edges if e not in bridges]
        if deletable:
            ops.append("delete_edge")
        if n + 1 <= cap and (budget >= 2 or not connected or n == 0):
            ops.append("insert_node")
        if n - 1 >= min_nodes:
            removable = []
            for u in range(n):
                cost = 1 + len(adj[u])
                if cost > budget:
                    continue
                if connected and len(adj[u]) > 1:
                    continue
                removable.append(u)
            if removable:
                ops.append("delete_node")
        if not ops:
            ops = ["insert_isolated"]
        op = ops[rng.integers(len(ops))]

        if op == "relabel":
            u = int(rng.integers(n))
            choices = [lab for lab in alphabet if lab != labels[u]]
            labels[u] = choices[rng.integers(len(choices))]
            cost = 1
        elif op == "insert_edge":
            missing = [(u, v) for u in range(n) for v in range(u + 1, n) if v not in adj[u]]
            u, v = missing[rng.integers(len(missing))]
            adj[u].add(v)
            adj[v].add(u)
            cost = 1
        elif op == "delete_edge":
            u, v = deletable[rng.integers(len(deletable))]
            adj[u].discard(v)
            adj[v].discard(u)
            cost = 1
        elif op in ("insert_node", "insert_isolated"):
            lab = alphabet[rng.integers(len(alphabet))] if labeled else None
            labels.append(lab)
            adj.append(set())
            cost = 1
            if op == "insert_node" and connected and n > 0:
                anchor = int(rng.integers(n))
                adj[n].add(anchor)
                adj[anchor].add(n)
                cost = 2
        else:
            u = removable[rng.integers(len(removable))]
            cost = 1 + len(adj[u])
            for v in adj[u]:
                adj[v].discard(u)
            del labels[u]
            del adj[u]
            adj = [{m - 1 if m > u else m for m in a} for a in adj]
        budget -= cost
        applied += cost

    edges = [(u, v) for u in range(len(adj)) for v in adj[u] if u < v]
    return Graph.from_edges(labels, edges, g.id), applied


def generate_corpus(
    n_graphs: int,
    min_nodes: int,
    max_nodes: int,
    alphabet: Sequence[str] | None,
    seed: int,
    *,
    density: float = 0.2,
    family_size: int = 5,
    max_edits: int = 3,
) -> list[Graph]:
    """Families of related connected graphs: random roots plus perturbed relatives.

    Relatives give the corpus a spread of small and large distances, like
    real datasets where many graphs share substructure.
    """
    rng = np.random.default_rng(seed)
    graphs = []
    width = len(str(max(n_graphs - 1, 0)))
    while len(graphs) < n_graphs:
        n = int(rng.integers(min_nodes, max_nodes + 1))
        root = generate_graph(n, density, alphabet, int(rng.integers(2**31)))
        members = [root]
        for _ in range(family_size - 1):
            k = int(rng.integers(1, max_edits + 1))
            rel, _ = perturb_graph(
                root, k, int(rng.integers(2**31)), alphabet=alphabet,
                min_nodes=min_nodes, max_nodes=max_nodes,
            )
            members.append(rel)
        for m in members:
            if len(graphs) == n_graphs:
                break
            graphs.append(m.with_id(f"g{len(graphs):0{width}d}"))
    return graphs


def degree_multiset(g: Graph) -> Counter:
    return Counter(g.degrees.tolist())
