"""SimGNN: learned graph-pair similarity.

Pipeline per pair: one-hot node features -> three GCN layers -> attention
pooling to a graph vector -> neural tensor network interaction between the
two graph vectors, optionally concatenated with a histogram of pairwise node
similarities -> fully connected head ending in a sigmoid.

All functions work on batches: the graphs of a batch form one disjoint union
(``GraphBatch``) so every layer runs as a handful of dense operations.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit

from . import numerics as nx
from .graph import Graph, LabelEncoder
from .numerics import Tensor
from .numerics.gradcheck import analytic_gradients

POOLING_VARIANTS = ("simple-mean", "degree", "global-context", "learnable-gc")


@dataclass
class SimGNNConfig:
    gcn_dims: tuple = (64, 32, 16)
    ntn_k: int = 16
    bins: int = 16
    fc_dims: tuple = (16, 8, 4, 1)
    pooling: str = "learnable-gc"
    strategy2: bool = True
    seed: int = 0

    def __post_init__(self):
        self.gcn_dims = tuple(int(d) for d in self.gcn_dims)
        self.fc_dims = tuple(int(d) for d in self.fc_dims)
        if self.pooling not in POOLING_VARIANTS:
            raise ValueError(f"unknown pooling variant {self.pooling!r}; choose from {POOLING_VARIANTS}")
        if not self.gcn_dims or not self.fc_dims or self.fc_dims[-1] != 1:
            raise ValueError("need at least one GCN layer and an FC stack ending in width 1")
        if self.ntn_k < 1 or self.bins < 1:
            raise ValueError("K and B must be positive")

    @property
    def fc_input_dim(self) -> int:
        return self.ntn_k + (self.bins if self.strategy2 else 0)

    def to_json(self) -> dict:
        return {
            "gcn_dims": list(self.gcn_dims), "K": self.ntn_k, "B": self.bins,
            "fc_dims": list(self.fc_dims), "pooling_variant": self.pooling,
            "strategy2": self.strategy2, "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimGNNConfig":
        return cls(tuple(obj["gcn_dims"]), obj["K"], obj["B"], tuple(obj["fc_dims"]),
                   obj["pooling_variant"], obj["strategy2"], obj.get("seed", 0))


@dataclass
class GcnLayer:
    weight: Tensor
    bias: Tensor
    activation: str = "relu"


@dataclass
class NtnLayer:
    weight: Tensor  # D x D x K
    V: Tensor  # K x 2D
    bias: Tensor  # K


@lru_cache(maxsize=65536)
def _gcn_structure(g: Graph):
    """Self-loop-augmented edge lists with symmetric 1/sqrt(d_n d_m) weights, d = degree + 1."""
    n = g.num_nodes
    src = [i for i in range(n)]
    dst = [i for i in range(n)]
    for u, v in g.edges:
        src += [u, v]
        dst += [v, u]
    src = np.array(src, dtype=np.intp)
    dst = np.array(dst, dtype=np.intp)
    d = g.degrees.astype(float) + 1.0
    w = 1.0 / np.sqrt(d[src] * d[dst]) if n else np.zeros(0)
    return src, dst, w


@dataclass
class GraphBatch:
    """Disjoint union of graphs; node rows are stacked in graph order."""

    graphs: list
    segment: np.ndarray
    counts: np.ndarray
    offsets: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    degrees: np.ndarray

    @classmethod
    def of(cls, graphs) -> "GraphBatch":
        graphs = list(graphs)
        counts = np.array([g.num_nodes for g in graphs], dtype=np.intp)
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.intp)
        seg = np.repeat(np.arange(len(graphs)), counts)
        srcs, dsts, ws, degs = [], [], [], []
        for g, off in zip(graphs, offsets):
            s, d, w = _gcn_structure(g)
            srcs.append(s + off)
            dsts.append(d + off)
            ws.append(w)
            degs.append(g.degrees)
        cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)  # noqa: E731
        return cls(graphs, seg, counts, offsets, cat(srcs, np.intp), cat(dsts, np.intp),
                   cat(ws, float), cat(degs, float))

    @property
    def num_nodes(self) -> int:
        return int(self.counts.sum())

    def node_slice(self, i: int) -> slice:
        return slice(int(self.offsets[i]), int(self.offsets[i] + self.counts[i]))


def gcn_forward(features, batch: GraphBatch, layers: list[GcnLayer]) -> Tensor:
    """Stacked graph convolutions; each layer aggregates normalised neighbour-plus-self rows."""
    x = nx.as_tensor(features)
    if x.shape[0] != batch.num_nodes:
        raise nx.ShapeError(f"{x.shape[0]} feature rows for {batch.num_nodes} nodes")
    for layer in layers:
        if x.shape[1] != layer.weight.shape[0]:
            raise nx.ShapeError(f"layer expects {layer.weight.shape[0]} inputs, got {x.shape[1]}")
        x = nx.aggregate(x @ layer.weight, batch.src, batch.dst, batch.weight, batch.num_nodes) + layer.bias
        if layer.activation == "relu":
            x = nx.relu(x)
    return x


def _inverse_counts(batch: GraphBatch) -> np.ndarray:
    return (1.0 / np.maximum(batch.counts, 1))[:, None]


def attention_weights(U: Tensor, batch: GraphBatch, variant: str, W2: Tensor | None = None) -> Tensor:
    """Per-node weights ``a_n`` (length = total nodes). Not normalised to sum to one."""
    n_graphs = len(batch.graphs)
    if variant == "simple-mean":
        return Tensor(np.repeat(_inverse_counts(batch)[:, 0], batch.counts))
    if variant == "degree":
        return Tensor(np.log(batch.degrees + 1.0))
    mean = nx.segment_sum(U, batch.segment, n_graphs) * _inverse_counts(batch)
    if variant == "global-context":
        context = mean
    elif variant == "learnable-gc":
        if W2 is None:
            raise ValueError("learnable-gc pooling needs the W2 matrix")
        context = nx.tanh(mean @ nx.transpose(W2))
    else:
        raise ValueError(f"unknown pooling variant {variant!r}")
    scores = nx.sum(U * nx.take(context, batch.segment), axis=1)
    return nx.sigmoid(scores)


def pool(U: Tensor, batch: GraphBatch, variant: str, W2: Tensor | None = None) -> Tensor:
    """Graph-level embeddings, one row per graph of the batch."""
    a = attention_weights(U, batch, variant, W2)
    return nx.segment_sum(U * nx.reshape(a, (-1, 1)), batch.segment, len(batch.graphs))


def ntn_interact(hi: Tensor, hj: Tensor, ntn: NtnLayer) -> Tensor:
    """``sigmoid(hi^T W[:, :, k] hj + V_k [hi; hj] + b_k)`` for each k; rows are pairs."""
    hi, hj = nx.as_tensor(hi), nx.as_tensor(hj)
    if hi.ndim == 1:
        hi, hj = nx.reshape(hi, (1, -1)), nx.reshape(hj, (1, -1))
    bilinear = nx.einsum("pa,abk,pb->pk", hi, ntn.weight, hj)
    linear = nx.concat([hi, hj], axis=1) @ nx.transpose(ntn.V)
    return nx.sigmoid(bilinear + linear + ntn.bias)


def pairwise_similarity_matrix(Ui: np.ndarray, Uj: np.ndarray) -> np.ndarray:
    """``sigmoid(Ui Uj^T)`` after zero-padding the smaller graph to ``max(Ni, Nj)`` rows."""
    n = max(len(Ui), len(Uj))
    d = Ui.shape[1] if Ui.ndim == 2 else Uj.shape[1]
    pi = np.zeros((n, d))
    pj = np.zeros((n, d))
    pi[: len(Ui)] = Ui
    pj[: len(Uj)] = Uj
    return expit(pi @ pj.T)


def pairwise_histogram(Ui, Uj, bins: int) -> np.ndarray:
    """Normalised histogram of the padded pairwise similarity matrix over ``bins`` equal bins of [0, 1].

    Returned as a plain array: the histogram is a constant to backpropagation.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    Ui = np.asarray(getattr(Ui, "data", Ui), dtype=float)
    Uj = np.asarray(getattr(Uj, "data", Uj), dtype=float)
    S = pairwise_similarity_matrix(Ui, Uj)
    if S.size == 0:
        return np.zeros(bins)
    counts, _ = np.histogram(S, bins=bins, range=(0.0, 1.0))
    return counts / S.size


def pair_loss(pred, target) -> Tensor:
    """Mean squared error over a batch (a single pair is a batch of one)."""
    pred = nx.as_tensor(pred)
    target = np.asarray(target, dtype=float).reshape(pred.shape)
    return nx.mean(nx.square(pred - target))


class SimGNN:
    def __init__(self, config: SimGNNConfig | None = None, encoder: LabelEncoder | None = None,
                 params: dict | None = None):
        self.config = config or SimGNNConfig()
        self.encoder = encoder or LabelEncoder()
        self.params = self._init_params() if params is None else params
        self._features = {}

    def _init_params(self) -> dict:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        p = {}
        dims = (self.encoder.dim,) + cfg.gcn_dims
        for l, (a, b) in enumerate(zip(dims[:-1], dims[1:])):
            p[f"gcn.{l}.weight"] = nx.glorot_uniform(rng, (a, b))
            p[f"gcn.{l}.bias"] = Tensor(np.zeros(b), requires_grad=True)
        d, k = cfg.gcn_dims[-1], cfg.ntn_k
        if cfg.pooling == "learnable-gc":
            p["att.weight"] = nx.glorot_uniform(rng, (d, d))
        p["ntn.weight"] = nx.glorot_uniform(rng, (d, d, k), fan_in=d, fan_out=d)
        p["ntn.V"] = nx.glorot_uniform(rng, (k, 2 * d))
        p["ntn.bias"] = Tensor(np.zeros(k), requires_grad=True)
        widths = (cfg.fc_input_dim,) + cfg.fc_dims
        for l, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
            if l == 0:
                p["fc.0.weight"] = nx.glorot_uniform(rng, (k, b), fan_in=a, fan_out=b)
                if cfg.strategy2:
                    p["fc.0.hist_weight"] = nx.glorot_uniform(rng, (cfg.bins, b), fan_in=a, fan_out=b)
            else:
                p[f"fc.{l}.weight"] = nx.glorot_uniform(rng, (a, b))
            p[f"fc.{l}.bias"] = Tensor(np.zeros(b), requires_grad=True)
        return p

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    @property
    def gcn_layers(self) -> list[GcnLayer]:
        n = len(self.config.gcn_dims)
        # last layer stays linear so embeddings can be negative
        return [GcnLayer(self.params[f"gcn.{l}.weight"], self.params[f"gcn.{l}.bias"],
                         "relu" if l < n - 1 else "linear") for l in range(n)]

    @property
    def ntn(self) -> NtnLayer:
        return NtnLayer(self.params["ntn.weight"], self.params["ntn.V"], self.params["ntn.bias"])

    def features(self, g: Graph) -> np.ndarray:
        x = self._features.get(g)
        if x is None:
            if len(self._features) > 65536:
                self._features.clear()
            x = self._features[g] = self.encoder.encode(g)
        return x

    def embed(self, graphs) -> tuple[GraphBatch, Tensor, Tensor]:
        """Node embeddings and pooled graph embeddings for a list of graphs."""
        batch = GraphBatch.of(graphs)
        dim = self.encoder.dim
        x = np.concatenate([self.features(g) for g in batch.graphs]) if batch.graphs else np.zeros((0, dim))
        U = gcn_forward(x, batch, self.gcn_layers)
        H = pool(U, batch, self.config.pooling, self.params.get("att.weight"))
        return batch, U, H

    def forward(self, pairs) -> Tensor:
        """Predicted similarity for each ``(g1, g2)`` pair, as a length-P tensor."""
        pairs = list(pairs)
        slot = {}
        unique = []
        left, right = [], []
        for g1, g2 in pairs:
            for g, side in ((g1, left), (g2, right)):
                key = id(g)
                if key not in slot:
                    slot[key] = len(unique)
                    unique.append(g)
                side.append(slot[key])
        batch, U, H = self.embed(unique)
        scores = ntn_interact(nx.take(H, left), nx.take(H, right), self.ntn)
        x = scores @ self.params["fc.0.weight"]
        if self.config.strategy2:
            hist = np.array([pairwise_histogram(U.data[batch.node_slice(i)], U.data[batch.node_slice(j)],
                                                self.config.bins)
                             for i, j in zip(left, right)]).reshape(len(pairs), self.config.bins)
            x = x + Tensor(hist) @ self.params["fc.0.hist_weight"]
        x = x + self.params["fc.0.bias"]
        n_fc = len(self.config.fc_dims)
        for l in range(1, n_fc):
            x = nx.relu(x)
            x = x @ self.params[f"fc.{l}.weight"] + self.params[f"fc.{l}.bias"]
        return nx.reshape(nx.sigmoid(x), (-1,))

    def predict_many(self, pairs) -> np.ndarray:
        return self.forward(pairs).data.copy()

    def predict(self, g1: Graph, g2: Graph) -> float:
        return float(self.predict_many([(g1, g2)])[0])

    def loss(self, pairs, targets) -> Tensor:
        return pair_loss(self.forward(pairs), targets)

    def attention(self, g: Graph) -> np.ndarray:
        """Attention weight of every node of ``g`` under the model's pooling variant."""
        batch, U, _ = self.embed([g])
        return attention_weights(U, batch, self.config.pooling, self.params.get("att.weight")).data.copy()

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def gradients(self, pairs, targets) -> dict:
        """Per-parameter gradients of the batch loss (zeros where a parameter is unused)."""
        return analytic_gradients(lambda: self.loss(pairs, targets), self.params)

    def state_dict(self) -> dict:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_dict(self, state: dict) -> None:
        if set(state) != set(self.params):
            raise ValueError(f"parameter names differ: {sorted(set(state) ^ set(self.params))}")
        for name, value in state.items():
            value = np.asarray(value, dtype=np.float64)
            if value.shape != self.params[name].shape:
                raise nx.ShapeError(f"{name}: expected {self.params[name].shape}, got {value.shape}")
            self.params[name].data = value.copy()

    def save(self, path, **extra) -> None:
        nx.save_checkpoint(path, self.params, config=self.config.to_json(),
                           label_encoder=self.encoder.labels, **extra)

    @classmethod
    def load(cls, path) -> "SimGNN":
        arrays, meta = nx.load_checkpoint(path)
        model = cls(SimGNNConfig.from_json(meta["config"]), LabelEncoder(meta.get("label_encoder") or []))
        model.load_state_dict(arrays)
        model.meta = meta
        return model

    def __repr__(self) -> str:
        return f"SimGNN({asdict(self.config)})"
