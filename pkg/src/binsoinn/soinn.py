"""Self-organising incremental neural network (single layer, online).

Nodes carry a weight vector, a win count and a tally of class labels seen
while winning. Edges between nodes carry an age. For each input the two
nearest nodes (winner, second winner) are found; if the input lies outside
either node's similarity threshold a new node is created, otherwise the two
winners are linked and the winner's neighbourhood is adapted. Every
``lambda_`` steps nodes with few neighbours and few wins are pruned.

Node ids only grow, and internal rows are kept sorted by id, so the first
minimum of a distance array is always the smallest id among ties.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

NEIGHBOR_RATE_DIVISOR = 100.0


class SoinnError(Exception):
    pass


class DegenerateInitError(SoinnError, ValueError):
    pass


class NetworkStateError(SoinnError, RuntimeError):
    pass


class ModelIntegrityError(SoinnError, ValueError):
    pass


@dataclass
class TrainParams:
    """Training knobs.

    ``isolated_threshold`` picks how a node without neighbours measures its
    similarity radius: ``"max"`` uses the farthest other node, ``"min"`` the
    nearest. ``noise_factor`` is the fraction of the mean win count below which
    a node with one or two neighbours is pruned.
    """

    lambda_: int = 290
    age_max: int = 170
    layer2_threshold: float | None = None
    rng_seed: int = 0
    isolated_threshold: str = "max"
    noise_factor: float = 0.5

    def __post_init__(self) -> None:
        if self.lambda_ < 1:
            raise ValueError("lambda_ must be >= 1")
        if self.age_max < 1:
            raise ValueError("age_max must be >= 1")
        if self.layer2_threshold is not None and not self.layer2_threshold >= 0:
            raise ValueError("layer2_threshold must be non-negative")
        if self.isolated_threshold not in ("max", "min"):
            raise ValueError("isolated_threshold must be 'max' or 'min'")
        if self.noise_factor < 0:
            raise ValueError("noise_factor must be non-negative")


@dataclass
class StepReport:
    inserted: bool
    winner: int
    second: int
    winner_dist: float
    second_dist: float
    winner_threshold: float
    second_threshold: float
    new_node: int | None = None
    removed_edges: list[tuple[int, int]] = field(default_factory=list)
    denoised: list[int] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return "inserted" if self.inserted else "connected"


@dataclass
class Verdict:
    label: str
    winner_id: int
    distance: float
    votes: dict[str, int]


def _edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _as_vector(u) -> np.ndarray:
    values = getattr(u, "values", u)
    return np.asarray(values, dtype=np.float64)


def majority_label(votes: Mapping[str, int]) -> str:
    """Most voted label; ties go to the lexicographically smallest."""
    if not votes:
        raise ModelIntegrityError("node has no label votes")
    return min(votes, key=lambda lab: (-votes[lab], lab))


class Soinn:
    def __init__(self, dim: int, params: TrainParams | None = None, fixed_threshold: float | None = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.params = params or TrainParams()
        self.fixed_threshold = fixed_threshold
        self.steps_seen = 0
        self._W = np.empty((16, dim), dtype=np.float64)
        self._ids: list[int] = []
        self._row: dict[int, int] = {}
        self._wins: list[int] = []
        self._votes: list[Counter] = []
        self._adj: dict[int, set[int]] = {}
        self._edges: dict[tuple[int, int], int] = {}
        self._next_id = 0

    # -- construction -------------------------------------------------------

    @classmethod
    def init(cls, first, second, params: TrainParams | None = None, labels=(None, None)) -> Soinn:
        a, b = _as_vector(first), _as_vector(second)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
        if np.array_equal(a, b):
            raise DegenerateInitError("initial vectors are identical; thresholds would be zero")
        net = cls(len(a), params)
        net.add_node(a, label=labels[0])
        net.add_node(b, label=labels[1])
        return net

    def add_node(
        self,
        weight,
        label: str | None = None,
        win_count: int = 1,
        votes: Mapping[str, int] | None = None,
        node_id: int | None = None,
    ) -> int:
        w = _as_vector(weight)
        if w.shape != (self.dim,):
            raise ValueError(f"expected weight of length {self.dim}, got shape {w.shape}")
        if win_count < 1:
            raise ValueError("win_count must be >= 1")
        if node_id is None:
            node_id = self._next_id
        if self._ids and node_id <= self._ids[-1]:
            raise ValueError(f"node ids must be added in increasing order (got {node_id})")
        n = len(self._ids)
        if n == len(self._W):
            grown = np.empty((2 * n, self.dim), dtype=np.float64)
            grown[:n] = self._W[:n]
            self._W = grown
        self._W[n] = w
        self._ids.append(node_id)
        self._row[node_id] = n
        self._wins.append(int(win_count))
        tally = Counter(votes or {})
        if label is not None:
            tally[label] += 1
        self._votes.append(tally)
        self._adj[node_id] = set()
        self._next_id = node_id + 1
        return node_id

    def add_edge(self, i: int, j: int, age: int = 0) -> None:
        if i == j:
            raise ValueError("self loops are not allowed")
        if i not in self._row or j not in self._row:
            raise KeyError(f"edge ({i}, {j}) references a missing node")
        self._edges[_edge(i, j)] = age
        self._adj[i].add(j)
        self._adj[j].add(i)

    def remove_edge(self, i: int, j: int) -> None:
        del self._edges[_edge(i, j)]
        self._adj[i].discard(j)
        self._adj[j].discard(i)

    def remove_nodes(self, ids: Iterable[int]) -> None:
        doomed = set(ids)
        if not doomed:
            return
        for i in doomed:
            for j in list(self._adj[i]):
                self.remove_edge(i, j)
        keep = [r for r, i in enumerate(self._ids) if i not in doomed]
        n = len(keep)
        self._W[:n] = self._W[keep]
        self._ids = [self._ids[r] for r in keep]
        self._wins = [self._wins[r] for r in keep]
        self._votes = [self._votes[r] for r in keep]
        self._row = {i: r for r, i in enumerate(self._ids)}
        for i in doomed:
            del self._adj[i]

    # -- read access ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def node_ids(self) -> list[int]:
        return list(self._ids)

    @property
    def weights(self) -> np.ndarray:
        """Rows aligned with :attr:`node_ids` (a view; do not mutate)."""
        return self._W[: len(self._ids)]

    @property
    def edges(self) -> dict[tuple[int, int], int]:
        return dict(self._edges)

    @property
    def next_id(self) -> int:
        return self._next_id

    def weight(self, i: int) -> np.ndarray:
        return self._W[self._row[i]]

    def win_count(self, i: int) -> int:
        return self._wins[self._row[i]]

    def votes(self, i: int) -> dict[str, int]:
        return dict(self._votes[self._row[i]])

    def neighbors(self, i: int) -> set[int]:
        return set(self._adj[i])

    def label(self, i: int) -> str:
        return majority_label(self._votes[self._row[i]])

    def connected_components(self) -> list[list[int]]:
        seen: set[int] = set()
        comps = []
        for start in self._ids:
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in self._adj[i]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            comps.append(sorted(comp))
        return comps

    # -- core rules -------------------------------------------------------------

    def _check_input(self, u) -> np.ndarray:
        x = _as_vector(u)
        if x.shape != (self.dim,):
            raise ValueError(f"expected input of length {self.dim}, got shape {x.shape}")
        return x

    def distances(self, u) -> np.ndarray:
        x = self._check_input(u)
        diff = self.weights - x
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def winners(self, u) -> tuple[int, int, float, float]:
        """Nearest and second nearest node ids with their distances."""
        if len(self._ids) < 2:
            raise NetworkStateError("need at least two nodes to find winners")
        d = self.distances(u)
        r1 = int(np.argmin(d))
        d1 = d[r1]
        d[r1] = np.inf
        r2 = int(np.argmin(d))
        return self._ids[r1], self._ids[r2], float(d1), float(d[r2])

    def similarity_threshold(self, i: int) -> float:
        if self.fixed_threshold is not None:
            return self.fixed_threshold
        if len(self._ids) < 2:
            raise NetworkStateError("need at least two nodes for a similarity threshold")
        w = self.weight(i)
        nbrs = self._adj[i]
        if nbrs:
            rows = [self._row[j] for j in nbrs]
            diff = self._W[rows] - w
            return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).max())
        diff = self.weights - w
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if self.params.isolated_threshold == "max":
            return float(d.max())
        d[self._row[i]] = np.inf
        return float(d.min())

    def train_step(self, u, label: str | None = None) -> StepReport:
        x = self._check_input(u)
        win, sec, d1, d2 = self.winners(x)
        t1 = self.similarity_threshold(win)
        t2 = self.similarity_threshold(sec)
        report = StepReport(d1 > t1 or d2 > t2, win, sec, d1, d2, t1, t2)
        if report.inserted:
            report.new_node = self.add_node(x, label=label)
        else:
            self._connect(win, sec, report)
            r = self._row[win]
            self._wins[r] += 1
            if label is not None:
                self._votes[r][label] += 1
            m = self._wins[r]
            self._W[r] += (x - self._W[r]) / m
            for j in self._adj[win]:
                rj = self._row[j]
                self._W[rj] += (x - self._W[rj]) / (NEIGHBOR_RATE_DIVISOR * m)
        self.steps_seen += 1
        if self.steps_seen % self.params.lambda_ == 0:
            report.denoised = self.denoise()
        return report

    def _connect(self, win: int, sec: int, report: StepReport) -> None:
        key = _edge(win, sec)
        if key not in self._edges:
            self.add_edge(win, sec)
        self._edges[key] = 0
        for j in sorted(self._adj[win]):
            e = _edge(win, j)
            if e != key:
                self._edges[e] += 1
        for j in sorted(self._adj[win]):
            e = _edge(win, j)
            if self._edges[e] > self.params.age_max:
                self.remove_edge(*e)
                report.removed_edges.append(e)

    def denoise(self) -> list[int]:
        """Drop isolated nodes and weakly used nodes with one or two neighbours.

        Never shrinks the network below two nodes; when that limit binds, the
        candidates with the most wins (then smallest id) survive.
        """
        n = len(self._ids)
        if n <= 2:
            return []
        cutoff = self.params.noise_factor * (sum(self._wins) / n)
        doomed = []
        for r, i in enumerate(self._ids):
            deg = len(self._adj[i])
            if deg == 0 or (deg <= 2 and self._wins[r] < cutoff):
                doomed.append(i)
        if len(doomed) > n - 2:
            doomed.sort(key=lambda i: (self.win_count(i), -i))
            doomed = doomed[: n - 2]
        doomed.sort()
        self.remove_nodes(doomed)
        return doomed

    def classify(self, u) -> Verdict:
        if len(self._ids) < 2:
            raise NetworkStateError("network is not trained")
        d = self.distances(u)
        r = int(np.argmin(d))
        votes = self._votes[r]
        if not votes:
            raise ModelIntegrityError(f"node {self._ids[r]} carries no label votes")
        return Verdict(majority_label(votes), self._ids[r], float(d[r]), dict(sorted(votes.items())))

    def check_invariants(self) -> None:
        """Raise :class:`ModelIntegrityError` on any structural inconsistency."""
        ids = self._ids
        if any(a >= b for a, b in zip(ids, ids[1:])):
            raise ModelIntegrityError("node ids are not strictly increasing")
        if ids and self._next_id <= ids[-1]:
            raise ModelIntegrityError("next id collides with an existing node")
        for (i, j), age in self._edges.items():
            if i == j or i not in self._row or j not in self._row:
                raise ModelIntegrityError(f"edge ({i}, {j}) references a missing node")
            if age < 0:
                raise ModelIntegrityError(f"edge ({i}, {j}) has negative age")
        for i, nbrs in self._adj.items():
            for j in nbrs:
                if _edge(i, j) not in self._edges:
                    raise ModelIntegrityError(f"adjacency ({i}, {j}) has no edge")
        if sum(len(s) for s in self._adj.values()) != 2 * len(self._edges):
            raise ModelIntegrityError("adjacency and edge set disagree")
        if any(w < 1 for w in self._wins):
            raise ModelIntegrityError("win counts must be >= 1")
        if not np.all(np.isfinite(self.weights)):
            raise ModelIntegrityError("non-finite weight")


def train_layer2(
    net: Soinn | None,
    inputs: Iterable[tuple[np.ndarray, str | None]] | None,
    constant_t: float,
    params: TrainParams | None = None,
) -> Soinn:
    """Second layer: same rules with one constant similarity threshold.

    ``inputs`` defaults to the first layer's node weights paired with their
    majority labels. The first two inputs seed the new network.
    """
    if not constant_t >= 0:
        raise ValueError("constant threshold must be non-negative")
    if inputs is None:
        if net is None:
            raise ValueError("need a first-layer network or explicit inputs")
        inputs = [
            (net.weight(i), net.label(i) if net.votes(i) else None) for i in net.node_ids
        ]
    items = [(_as_vector(u), lab) for u, lab in inputs]
    if len(items) < 2:
        raise NetworkStateError("second layer needs at least two inputs")
    params = params or TrainParams(layer2_threshold=constant_t)
    first, second = items[0], items[1]
    out = Soinn.init(first[0], second[0], params, labels=(first[1], second[1]))
    out.fixed_threshold = float(constant_t)
    for u, lab in items[2:]:
        out.train_step(u, lab)
    return out
