"""Robot-object interaction graph and its EdgeConv graph-level embedding.

Nine nodes: the quadruped base (n0), six arm joints (n1..n6), the end-effector (n7)
and the grasped object (n8). Undirected edges connect the base to n1..n7, the arm
chain n1-n2-...-n7 and the end-effector to the object; each is used in both
directions. Only the forward pass is implemented; weights are seeded or loaded.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, MalformedState

N_NODES = 9
N_JOINTS = 6
RAW_DIM = 11
NODE_DIM = RAW_DIM + 4
EDGE_DIM = 7
EMBED_DIM = 128
QUAT_TOL = 1e-9

BASE, JOINT, END_EFFECTOR, OBJECT = range(4)
NODE_TYPES = (BASE,) + (JOINT,) * N_JOINTS + (END_EFFECTOR, OBJECT)

UNDIRECTED_EDGES = tuple([(0, j) for j in range(1, 8)] + [(j, j + 1) for j in range(1, 7)] + [(7, 8)])

WEIGHT_MAGIC = b"IGW1"


# --- quaternions (w, x, y, z), Hamilton convention ------------------------------


def quat_mul(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conj(q) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]], dtype=float)


@dataclass(frozen=True)
class Pose3:
    """Position (m) and unit quaternion (w, x, y, z)."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    orientation: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        p = tuple(float(v) for v in self.position)
        q = tuple(float(v) for v in self.orientation)
        if len(p) != 3 or len(q) != 4:
            raise MalformedState("Pose3 needs a 3-vector position and a 4-vector quaternion")
        if not all(math.isfinite(v) for v in p + q):
            raise MalformedState("Pose3 components must be finite")
        if abs(math.sqrt(sum(v * v for v in q)) - 1.0) > QUAT_TOL:
            raise MalformedState(f"quaternion {q} is not unit length")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", q)

    def as_vector(self) -> np.ndarray:
        return np.array(self.position + self.orientation)


IDENTITY = Pose3()


# --- state inputs ------------------------------------------------------------------


@dataclass(frozen=True)
class BaseState:
    orientation: Sequence[float]  # planar orientation, 2
    angular_velocity: Sequence[float]  # 3


@dataclass(frozen=True)
class JointState:
    pose: Pose3  # link pose relative to the base
    q: float
    q_default: float
    qdot: float


@dataclass(frozen=True)
class EndEffectorState:
    pose: Pose3
    contact: bool


@dataclass(frozen=True)
class ObjectState:
    pose: Pose3  # geometric center in the base frame
    command: Sequence[float]  # (v_x, v_y, omega_z) in the base frame


@dataclass(frozen=True)
class InteractionGraph:
    """Node features (n, 15), directed edges (E, 2) as (src, dst) and edge features (E, 7).

    The feature of edge src->dst is [p_dst - p_src, q_dst * q_src^-1]: the message
    into a target node i from neighbor j uses [p_i - p_j, q_i * q_j^-1].
    """

    nodes: np.ndarray
    edges: np.ndarray
    edge_features: np.ndarray
    node_types: tuple[int, ...] = field(default=NODE_TYPES)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        ef = np.asarray(self.edge_features, dtype=float).reshape(len(edges), -1)
        if nodes.ndim != 2:
            raise DimensionMismatch("node features must be 2-D")
        if len(edges) and (edges.min() < 0 or edges.max() >= len(nodes)):
            raise DimensionMismatch("edge endpoint outside the node range")
        if len(self.node_types) != len(nodes):
            raise DimensionMismatch("one node type per node is required")
        for a in (nodes, edges, ef):
            a.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "edge_features", ef)
        object.__setattr__(self, "node_types", tuple(self.node_types))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def incoming(self, i: int) -> set[int]:
        return {int(s) for s, d in self.edges if d == i}

    def permuted(self, perm: Sequence[int]) -> InteractionGraph:
        """Relabel node k as ``perm[k]``, moving edges with their endpoints."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        return InteractionGraph(
            self.nodes[inv],
            perm[self.edges],
            self.edge_features,
            tuple(self.node_types[k] for k in inv),
        )


def _vec(v, n: int, what: str) -> np.ndarray:
    a = np.asarray(v, dtype=float).ravel()
    if a.shape != (n,):
        raise MalformedState(f"{what} must have {n} components, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise MalformedState(f"{what} must be finite")
    return a


def _node_row(raw: np.ndarray, kind: int) -> np.ndarray:
    row = np.zeros(NODE_DIM)
    row[: len(raw)] = raw
    row[RAW_DIM + kind] = 1.0
    return row


def build_graph(base: BaseState, joints: Sequence[JointState], ee: EndEffectorState, obj: ObjectState) -> InteractionGraph:
    """Assemble node and edge features for one time step.

    Poses are relative to the base, whose own pose is the identity.
    """
    if len(joints) != N_JOINTS:
        raise MalformedState(f"expected {N_JOINTS} joints, got {len(joints)}")
    for k, item in enumerate(list(joints) + [ee, obj]):
        if not isinstance(item.pose, Pose3):
            raise MalformedState(f"node {k + 1}: pose must be a Pose3")
    rows = [_node_row(np.concatenate([_vec(base.orientation, 2, "base orientation"), _vec(base.angular_velocity, 3, "base angular velocity")]), BASE)]
    for k, j in enumerate(joints, start=1):
        q, qd = float(j.q), float(j.q_default)
        raw = np.concatenate([j.pose.as_vector(), [q, qd, q - qd, float(j.qdot)]])
        if not np.all(np.isfinite(raw)):
            raise MalformedState(f"joint {k} state must be finite")
        rows.append(_node_row(raw, JOINT))
    rows.append(_node_row(np.concatenate([ee.pose.as_vector(), [1.0 if ee.contact else 0.0]]), END_EFFECTOR))
    rows.append(_node_row(np.concatenate([obj.pose.as_vector(), _vec(obj.command, 3, "object command")]), OBJECT))

    poses = [IDENTITY] + [j.pose for j in joints] + [ee.pose, obj.pose]
    edges, feats = [], []
    for a, b in UNDIRECTED_EDGES:
        f = edge_feature(poses[b], poses[a])  # message a -> b
        edges.append((a, b))
        feats.append(f)
        # the reverse direction is the exact negation / conjugate
        edges.append((b, a))
        feats.append(np.concatenate([-f[:3], quat_conj(f[3:])]))
    return InteractionGraph(np.array(rows), np.array(edges), np.array(feats), NODE_TYPES)


def edge_feature(target: Pose3, source: Pose3) -> np.ndarray:
    """[p_i - p_j, q_i * q_j^-1] for target i and source j."""
    dp = np.subtract(target.position, source.position)
    dq = quat_mul(target.orientation, quat_conj(source.orientation))
    return np.concatenate([dp, dq])


# --- perceptrons and weights --------------------------------------------------------


def elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


ACTIVATIONS = {"elu": elu, "relu": lambda x: np.maximum(x, 0.0), "tanh": np.tanh, "identity": lambda x: x}


@dataclass(frozen=True)
class Dense:
    """y = W x + b with W of shape (out, in)."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float)
        b = np.asarray(self.bias, dtype=float).ravel()
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise DimensionMismatch(f"weight {w.shape} and bias {b.shape} do not agree")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]


def mlp_forward(layers: Sequence[Dense], x: np.ndarray, activation: str = "elu") -> np.ndarray:
    """Rows of ``x`` through ``layers``; the activation follows every layer but the last."""
    act = ACTIVATIONS[activation]
    h = np.asarray(x, dtype=float)
    for k, layer in enumerate(layers):
        if h.shape[-1] != layer.n_in:
            raise DimensionMismatch(f"layer {k} expects {layer.n_in} inputs, got {h.shape[-1]}")
        h = h @ layer.weight.T + layer.bias
        if k < len(layers) - 1:
            h = act(h)
    return h


def _seeded_dense(rng: np.random.Generator, n_in: int, n_out: int) -> Dense:
    # Glorot-uniform weights, small biases; rounded to float32 so that files round-trip exactly
    lim = math.sqrt(6.0 / (n_in + n_out))
    w = rng.uniform(-lim, lim, size=(n_out, n_in)).astype(np.float32).astype(float)
    b = rng.uniform(-0.1, 0.1, size=n_out).astype(np.float32).astype(float)
    return Dense(w, b)


@dataclass(frozen=True)
class GnnWeights:
    """Two EdgeConv message perceptrons (three dense layers each) and a readout perceptron."""

    conv: tuple[tuple[Dense, ...], tuple[Dense, ...]]
    readout: tuple[Dense, ...]
    activation: str = "elu"
    seed: int | None = None

    def __post_init__(self):
        if len(self.conv) != 2:
            raise DimensionMismatch("exactly two EdgeConv layers are required")
        d = NODE_DIM
        for k, layers in enumerate(self.conv):
            if len(layers) != 3:
                raise DimensionMismatch(f"EdgeConv layer {k}: message perceptron needs two hidden layers")
            if layers[0].n_in != 2 * d + EDGE_DIM:
                raise DimensionMismatch(f"EdgeConv layer {k} expects input {layers[0].n_in}, needs {2 * d + EDGE_DIM}")
            _chain(layers, f"EdgeConv layer {k}")
            d = layers[-1].n_out
        if not self.readout or self.readout[0].n_in != d:
            raise DimensionMismatch(f"readout must take the {d}-dim pooled feature")
        _chain(self.readout, "readout")
        if self.readout[-1].n_out != EMBED_DIM:
            raise DimensionMismatch(f"readout must produce {EMBED_DIM} features")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @classmethod
    def seeded(cls, seed: int = 0, hidden: int = 64, conv_out: int = 64, readout_hidden: tuple[int, ...] = (128,), activation: str = "elu") -> GnnWeights:
        rng = np.random.default_rng(seed)
        conv = []
        d = NODE_DIM
        for _ in range(2):
            dims = [2 * d + EDGE_DIM, hidden, hidden, conv_out]
            conv.append(tuple(_seeded_dense(rng, a, b) for a, b in zip(dims[:-1], dims[1:])))
            d = conv_out
        dims = [d, *readout_hidden, EMBED_DIM]
        readout = tuple(_seeded_dense(rng, a, b) for a, b in zip(dims[:-1], dims[1:]))
        return cls((conv[0], conv[1]), readout, activation, seed)

    def layers(self) -> list[Dense]:
        return [*self.conv[0], *self.conv[1], *self.readout]


def _chain(layers, what):
    for a, b in zip(layers[:-1], layers[1:]):
        if a.n_out != b.n_in:
            raise DimensionMismatch(f"{what}: {a.n_out} outputs feed {b.n_in} inputs")


def save_weights(weights: GnnWeights, path: str | Path) -> None:
    """Little-endian file: magic, layer count, (rows, cols) per layer, then float32 data.

    Each layer is stored as a rows x (in + 1) matrix with the bias as last column,
    row-major, in order: EdgeConv 1 (3 layers), EdgeConv 2 (3 layers), readout.
    """
    layers = weights.layers()
    header = [WEIGHT_MAGIC, struct.pack("<I", len(layers))]
    blobs = []
    for layer in layers:
        m = np.hstack([layer.weight, layer.bias[:, None]])
        header.append(struct.pack("<II", *m.shape))
        blobs.append(m.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(header + blobs))


def load_weights(path: str | Path, activation: str = "elu") -> GnnWeights:
    data = Path(path).read_bytes()
    if data[:4] != WEIGHT_MAGIC:
        raise DimensionMismatch(f"{path}: bad magic {data[:4]!r}")
    (count,) = struct.unpack_from("<I", data, 4)
    if count < 7:
        raise DimensionMismatch(f"{path}: {count} layers, need at least 7")
    off = 8
    shapes = []
    for _ in range(count):
        shapes.append(struct.unpack_from("<II", data, off))
        off += 8
    layers = []
    for rows, cols in shapes:
        n = rows * cols
        if off + 4 * n > len(data):
            raise DimensionMismatch(f"{path}: truncated weight data")
        m = np.frombuffer(data, dtype="<f4", count=n, offset=off).reshape(rows, cols).astype(float)
        off += 4 * n
        layers.append(Dense(m[:, :-1], m[:, -1]))
    if off != len(data):
        raise DimensionMismatch(f"{path}: {len(data) - off} trailing bytes")
    return GnnWeights((tuple(layers[0:3]), tuple(layers[3:6])), tuple(layers[6:]), activation)


# --- forward pass -----------------------------------------------------------------


def edge_conv(graph: InteractionGraph, layers: Sequence[Dense], h: np.ndarray | None = None, activation: str = "elu") -> np.ndarray:
    """One message-passing step with max aggregation.

    The message into node i along edge j -> i is ``mlp([h_i, h_j, f_e])``; node i's
    new feature is the element-wise max over its incoming messages (zeros when it
    has none). ``h`` defaults to the graph's node features.
    """
    h = graph.nodes if h is None else np.asarray(h, dtype=float)
    if h.shape[0] != graph.n_nodes:
        raise DimensionMismatch(f"{h.shape[0]} hidden rows for {graph.n_nodes} nodes")
    src, dst = graph.edges[:, 0], graph.edges[:, 1]
    x = np.hstack([h[dst], h[src], graph.edge_features])
    if x.shape[1] != layers[0].n_in:
        raise DimensionMismatch(f"message input has {x.shape[1]} features, perceptron expects {layers[0].n_in}")
    msgs = mlp_forward(layers, x, activation)
    out = np.full((graph.n_nodes, msgs.shape[1]), -np.inf)
    np.maximum.at(out, dst, msgs)
    out[np.isneginf(out).all(axis=1)] = 0.0
    return out


def graph_embed(graph: InteractionGraph, weights: GnnWeights) -> np.ndarray:
    """Two EdgeConv layers (edge features reused), mean pooling, readout to 128."""
    if graph.nodes.shape[1] != NODE_DIM or graph.edge_features.shape[1] != EDGE_DIM:
        raise DimensionMismatch(f"graph features {graph.nodes.shape[1]}/{graph.edge_features.shape[1]}, expected {NODE_DIM}/{EDGE_DIM}")
    h = graph.nodes
    for layers in weights.conv:
        h = edge_conv(graph, layers, h, weights.activation)
    pooled = h.mean(axis=0)
    return mlp_forward(weights.readout, pooled[None, :], weights.activation)[0]
