"""Edit cost model, node mappings, edit paths and result records."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..graph import Graph

EXACT = "exact"
UPPER_BOUND = "upper-bound"


class SizeLimitError(ValueError):
    pass


class BudgetExceededError(RuntimeError):
    def __init__(self, expansions: int, msg: str | None = None):
        super().__init__(msg or f"search budget of {expansions} expansions exhausted")
        self.expansions = expansions


@dataclass(frozen=True)
class CostModel:
    node_insert: float = 1.0
    node_delete: float = 1.0
    node_relabel: float = 1.0
    edge_insert: float = 1.0
    edge_delete: float = 1.0

    def __post_init__(self):
        for name in ("node_insert", "node_delete", "node_relabel", "edge_insert", "edge_delete"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


UNIT_COSTS = CostModel()


@dataclass(frozen=True)
class EditOp:
    """One edit. Nodes are named by their ``g1`` index, or ``"+j"`` for the node inserted to stand for ``g2`` node ``j``."""

    kind: str
    nodes: tuple
    label: str | None = None

    def to_json(self) -> dict:
        rec = {"op": self.kind, "nodes": list(self.nodes)}
        if self.kind in ("relabel", "insert_node"):
            rec["label"] = self.label
        return rec


@dataclass
class GedResult:
    distance: float
    kind: str
    algorithm: str
    mapping: tuple | None = None
    edit_path: list | None = None
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)

    def to_json(self, with_path: bool = True) -> dict:
        out = {
            "algorithm": self.algorithm,
            "distance": self.distance,
            "kind": self.kind,
            "elapsed_ms": self.elapsed * 1e3,
        }
        if self.details:
            out["details"] = self.details
        if with_path and self.edit_path is not None:
            out["edit_path"] = [op.to_json() for op in self.edit_path]
        return out


def mapping_cost(g1: Graph, g2: Graph, f, cm: CostModel = UNIT_COSTS) -> float:
    """Cost of the edit path induced by ``f``: ``f[u]`` is the ``g2`` image of ``u`` or ``-1`` for deletion."""
    cost = 0.0
    used = 0
    for u, v in enumerate(f):
        if v < 0:
            cost += cm.node_delete
        else:
            used += 1
            if g1.labels[u] != g2.labels[v]:
                cost += cm.node_relabel
    cost += cm.node_insert * (g2.num_nodes - used)
    matched = 0
    for u, w in g1.edges:
        a, b = f[u], f[w]
        if a >= 0 and b >= 0 and g2.has_edge(a, b):
            matched += 1
    cost += cm.edge_delete * (g1.num_edges - matched) + cm.edge_insert * (g2.num_edges - matched)
    return cost


def check_mapping(f, n1: int, n2: int) -> None:
    if len(f) != n1:
        raise ValueError("mapping length must equal the number of g1 nodes")
    images = [v for v in f if v >= 0]
    if len(set(images)) != len(images) or any(v >= n2 for v in images):
        raise ValueError("mapping is not injective into g2's nodes")


def invert_mapping(f, n2: int) -> tuple:
    inv = [-1] * n2
    for u, v in enumerate(f):
        if v >= 0:
            inv[v] = u
    return tuple(inv)


def edit_path_from_mapping(g1: Graph, g2: Graph, f) -> list[EditOp]:
    """Ordered operations turning ``g1`` into a copy of ``g2`` according to ``f``."""
    check_mapping(f, g1.num_nodes, g2.num_nodes)
    inv = invert_mapping(f, g2.num_nodes)

    def name(v):
        return inv[v] if inv[v] >= 0 else f"+{v}"

    ops = []
    for u, w in g1.edges:
        a, b = f[u], f[w]
        if not (a >= 0 and b >= 0 and g2.has_edge(a, b)):
            ops.append(EditOp("delete_edge", (u, w)))
    for u, v in enumerate(f):
        if v < 0:
            ops.append(EditOp("delete_node", (u,)))
        elif g1.labels[u] != g2.labels[v]:
            ops.append(EditOp("relabel", (u,), g2.labels[v]))
    for v in range(g2.num_nodes):
        if inv[v] < 0:
            ops.append(EditOp("insert_node", (f"+{v}",), g2.labels[v]))
    for a, b in g2.edges:
        u, w = inv[a], inv[b]
        if not (u >= 0 and w >= 0 and g1.has_edge(u, w)):
            ops.append(EditOp("insert_edge", (name(a), name(b))))
    return ops


def path_cost(ops, cm: CostModel = UNIT_COSTS) -> float:
    price = {
        "delete_edge": cm.edge_delete,
        "insert_edge": cm.edge_insert,
        "delete_node": cm.node_delete,
        "insert_node": cm.node_insert,
        "relabel": cm.node_relabel,
    }
    return float(sum(price[op.kind] for op in ops))


def apply_edit_path(g: Graph, ops) -> Graph:
    """Replay ``ops`` on ``g``; raises ValueError on an operation that does not apply."""
    labels = {u: lab for u, lab in enumerate(g.labels)}
    edges = {frozenset(e) for e in g.edges}
    for op in ops:
        if op.kind == "delete_edge":
            e = frozenset(op.nodes)
            if e not in edges:
                raise ValueError(f"{op}: edge absent")
            edges.remove(e)
        elif op.kind == "insert_edge":
            e = frozenset(op.nodes)
            if len(e) != 2 or e in edges or not e <= labels.keys():
                raise ValueError(f"{op}: cannot insert")
            edges.add(e)
        elif op.kind == "delete_node":
            (u,) = op.nodes
            if u not in labels or any(u in e for e in edges):
                raise ValueError(f"{op}: node missing or still has edges")
            del labels[u]
        elif op.kind == "insert_node":
            (u,) = op.nodes
            if u in labels:
                raise ValueError(f"{op}: node exists")
            labels[u] = op.label
        elif op.kind == "relabel":
            (u,) = op.nodes
            if u not in labels or labels[u] == op.label:
                raise ValueError(f"{op}: not a relabel")
            labels[u] = op.label
        else:
            raise ValueError(f"unknown edit operation {op.kind!r}")
    names = sorted(labels, key=lambda x: (isinstance(x, str), x if isinstance(x, int) else int(x[1:])))
    index = {nm: i for i, nm in enumerate(names)}
    return Graph.from_edges([labels[nm] for nm in names],
                            ((index[a], index[b]) for a, b in (tuple(e) for e in edges)), g.id)


def are_isomorphic(a: Graph, b: Graph) -> bool:
    """Label-preserving isomorphism by backtracking (fine for small graphs)."""
    if a.num_nodes != b.num_nodes or a.num_edges != b.num_edges:
        return False
    if sorted(a.labels, key=_label_key) != sorted(b.labels, key=_label_key):
        return False
    if sorted(a.degrees.tolist()) != sorted(b.degrees.tolist()):
        return False
    n = a.num_nodes
    adj_a, adj_b = a.adjacency, b.adjacency
    img = [-1] * n
    taken = [False] * n

    def extend(u):
        if u == n:
            return True
        for v in range(n):
            if taken[v] or a.labels[u] != b.labels[v] or a.degrees[u] != b.degrees[v]:
                continue
            if any(adj_a[u, w] != adj_b[v, img[w]] for w in range(u)):
                continue
            img[u] = v
            taken[v] = True
            if extend(u + 1):
                return True
            taken[v] = False
        img[u] = -1
        return False

    return extend(0)


def _label_key(lab):
    return (lab is not None, lab or "")


def orientation_key(g: Graph) -> tuple:
    """Total order on graph content; equal keys mean identical graphs."""
    return (g.num_nodes, g.num_edges, tuple("" if lab is None else lab for lab in g.labels), g.edges)
