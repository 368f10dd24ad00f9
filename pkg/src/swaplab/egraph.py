"""Point clouds, their quantum encodings, and epsilon-graph constructors.

Three routes produce the same graph object: exact brute force over all
n(n-1)/2 distances, a kd-tree fixed-radius search (identical edge set,
different work pattern, instrumented with visited-node counters), and the
simulated quantum pipeline (per-pair swap tests, the naive battery, or the
recursive multi-state circuit).

Edges use the strict inequality distance < eps.  The quantum routes operate
on amplitude-encoded *normalized* points and estimate sqrt(2*(1-|u.w|)), so
classical and quantum targets coincide exactly on unit-norm clouds with
non-negative pairwise dot products; tests use such clouds.

Constructors are pure given (inputs, seed).  Per-pair sampling streams are
derived from the master seed as SeedSequence([seed, i, j]), so results are
independent of evaluation order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal, Sequence

import numpy as np

from . import circuits, statevec, stats
from .statevec import ResourceError, StateVector


@dataclass(frozen=True)
class PointCloud:
    """Finite set of d-dimensional real points (rows of ``points``)."""

    points: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[1] < 1:
            raise ValueError("points must have dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must have finite coordinates")
        if self.labels is not None and len(self.labels) != pts.shape[0]:
            raise ValueError(
                f"{len(self.labels)} labels for {pts.shape[0]} points"
            )
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def load_point_cloud(path) -> PointCloud:
    """Read a CSV point cloud: one point per row, ``dim`` float columns,
    optional single header row.  Ragged or non-numeric rows are rejected
    with row/column diagnostics."""
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if not cells:
                continue
            if width is None:
                width = len(cells)
                try:
                    rows.append([float(c) for c in cells])
                    continue
                except ValueError:
                    # single header row
                    continue
            if len(cells) != width:
                raise ValueError(
                    f"{path}: row {lineno} has {len(cells)} columns, expected {width}"
                )
            parsed = []
            for col, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {lineno}, column {col}: "
                        f"not a number: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return PointCloud(np.array(rows))


@dataclass(frozen=True)
class EpsilonGraph:
    """Undirected graph with edges exactly between points at distance < eps.
    Edges are stored canonically as (i, j) with i < j."""

    n: int
    eps: float
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i}, {j}) invalid for n={self.n}")


@dataclass(frozen=True)
class GraphDiff:
    """Edges missing from the estimate (false negatives) and spurious edges
    present only in the estimate (false positives)."""

    false_negatives: frozenset[tuple[int, int]]
    false_positives: frozenset[tuple[int, int]]

    @property
    def fn_count(self) -> int:
        return len(self.false_negatives)

    @property
    def fp_count(self) -> int:
        return len(self.false_positives)


def brute_force_egraph(cloud: PointCloud, eps: float) -> EpsilonGraph:
    """All n(n-1)/2 squared distances against eps^2, strict inequality."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    pts = cloud.points
    n = len(cloud)
    eps_sq = eps * eps
    if n <= 2000:
        ii, jj = np.triu_indices(n, 1)
        d_sq = ((pts[ii] - pts[jj]) ** 2).sum(axis=1)
        mask = d_sq < eps_sq
        edges = frozenset(zip(ii[mask].tolist(), jj[mask].tolist()))
        return EpsilonGraph(n, eps, edges)
    # row-by-row variant keeps memory linear for large clouds
    edges = set()
    for i in range(n):
        d_sq = np.sum((pts[i + 1 :] - pts[i]) ** 2, axis=1)
        hits = np.nonzero(d_sq < eps_sq)[0]
        edges.update(zip([i] * hits.size, (hits + i + 1).tolist()))
    return EpsilonGraph(n, eps, frozenset(edges))


class KDTree:
    """Balanced kd-tree: median split on cycling axes, duplicates to the
    right subtree.  Instrumented with per-query visited-node counters."""

    def __init__(self, cloud: PointCloud):
        pts = cloud.points
        self.dim = cloud.dim
        self.n = len(cloud)
        # one record per node:
        #   (point index, coords, axis, left, right, seg_lo, seg_hi, bb_lo, bb_hi)
        # children are node ids or -1; [seg_lo, seg_hi) is the subtree's slice
        # of the pre-order point array _flat; bb_lo/bb_hi bound the subtree.
        self._nodes: list[tuple] = []
        self._flat: list[int] = []
        self.queries = 0
        self.total_visited = 0
        self.last_visited = 0
        if self.n:
            self._build(np.arange(self.n), pts, 0)

    def _build(self, idx: np.ndarray, pts: np.ndarray, depth: int) -> int:
        if idx.size == 0:
            return -1
        axis = depth % self.dim
        order = idx[np.argsort(pts[idx, axis], kind="stable")]
        mid = order.size // 2
        p_idx = int(order[mid])
        node = len(self._nodes)
        self._nodes.append(None)  # reserve slot; children are built below
        seg_lo = len(self._flat)
        self._flat.append(p_idx)
        left = self._build(order[:mid], pts, depth + 1)
        right = self._build(order[mid + 1 :], pts, depth + 1)
        sub = pts[idx]
        self._nodes[node] = (
            p_idx,
            tuple(pts[p_idx]),
            axis,
            left,
            right,
            seg_lo,
            len(self._flat),
            tuple(sub.min(axis=0)),
            tuple(sub.max(axis=0)),
        )
        return node

    def depth(self) -> int:
        if not self._nodes:
            return 0
        best = 1
        stack = [(0, 1)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            for child in self._nodes[node][3:5]:
                if child >= 0:
                    stack.append((child, d + 1))
        return best

    def __len__(self) -> int:
        return self.n

    def in_order(self) -> Iterable[int]:
        """In-order traversal of the stored point indices."""
        stack: list[tuple[int, bool]] = [(0, False)] if self._nodes else []
        while stack:
            node, expanded = stack.pop()
            if node < 0:
                continue
            if expanded:
                yield self._nodes[node][0]
            else:
                rec = self._nodes[node]
                stack.append((rec[4], False))
                stack.append((node, True))
                stack.append((rec[3], False))

    def range_query(self, center: Sequence[float], radius: float) -> list[int]:
        """Indices of the points at strict distance < radius from center.

        Subtrees whose splitting slab lies at distance >= radius are pruned
        (safe under the strict inequality); a subtree whose bounding box sits
        strictly inside the query ball is accepted wholesale, and one whose
        box lies entirely at distance >= radius is rejected without descent.
        """
        if radius <= 0:
            raise ValueError(f"radius must be positive, got {radius}")
        center = tuple(float(c) for c in center)
        if len(center) != self.dim:
            raise ValueError(
                f"query point has dimension {len(center)}, tree has {self.dim}"
            )
        r_sq = radius * radius
        nodes = self._nodes
        flat = self._flat
        dim = self.dim
        found: list[int] = []
        visited = 0
        stack = [0] if nodes else []
        # box accept/reject only pays off for subtrees of some size
        min_seg = 16
        if dim == 2:
            c0, c1 = center
            while stack:
                visited += 1
                p_idx, pt, axis, left, right, s0, s1, blo, bhi = nodes[stack.pop()]
                if s1 - s0 >= min_seg:
                    d1 = c0 - blo[0]
                    d2 = bhi[0] - c0
                    far0 = d1 if d1 > d2 else d2
                    gap0 = -d1 if d1 < 0.0 else (-d2 if d2 < 0.0 else 0.0)
                    d1 = c1 - blo[1]
                    d2 = bhi[1] - c1
                    far1 = d1 if d1 > d2 else d2
                    gap1 = -d1 if d1 < 0.0 else (-d2 if d2 < 0.0 else 0.0)
                    if far0 * far0 + far1 * far1 < r_sq:
                        found.extend(flat[s0:s1])
                        continue
                    if gap0 * gap0 + gap1 * gap1 >= r_sq:
                        continue
                da = pt[0] - c0
                db = pt[1] - c1
                if da * da + db * db < r_sq:
                    found.append(p_idx)
                delta = (c0 - pt[0]) if axis == 0 else (c1 - pt[1])
                near, far = (left, right) if delta < 0 else (right, left)
                if near >= 0:
                    stack.append(near)
                if far >= 0 and delta * delta < r_sq:
                    stack.append(far)
        elif dim == 3:
            c0, c1, c2 = center
            while stack:
                visited += 1
                p_idx, pt, axis, left, right, s0, s1, blo, bhi = nodes[stack.pop()]
                if s1 - s0 >= min_seg:
                    far_sq = 0.0
                    gap_sq = 0.0
                    for ca, lo, hi in zip(center, blo, bhi):
                        d1 = ca - lo
                        d2 = hi - ca
                        far = d1 if d1 > d2 else d2
                        far_sq += far * far
                        gap = -d1 if d1 < 0.0 else (-d2 if d2 < 0.0 else 0.0)
                        gap_sq += gap * gap
                    if far_sq < r_sq:
                        found.extend(flat[s0:s1])
                        continue
                    if gap_sq >= r_sq:
                        continue
                da = pt[0] - c0
                db = pt[1] - c1
                dc = pt[2] - c2
                if da * da + db * db + dc * dc < r_sq:
                    found.append(p_idx)
                delta = center[axis] - pt[axis]
                near, far = (left, right) if delta < 0 else (right, left)
                if near >= 0:
                    stack.append(near)
                if far >= 0 and delta * delta < r_sq:
                    stack.append(far)
        else:
            while stack:
                visited += 1
                p_idx, pt, axis, left, right, s0, s1, blo, bhi = nodes[stack.pop()]
                if s1 - s0 >= min_seg:
                    far_sq = 0.0
                    gap_sq = 0.0
                    for ca, lo, hi in zip(center, blo, bhi):
                        d1 = ca - lo
                        d2 = hi - ca
                        far = d1 if d1 > d2 else d2
                        far_sq += far * far
                        gap = -d1 if d1 < 0.0 else (-d2 if d2 < 0.0 else 0.0)
                        gap_sq += gap * gap
                    if far_sq < r_sq:
                        found.extend(flat[s0:s1])
                        continue
                    if gap_sq >= r_sq:
                        continue
                d_sq = 0.0
                for a, b in zip(pt, center):
                    diff = a - b
                    d_sq += diff * diff
                if d_sq < r_sq:
                    found.append(p_idx)
                delta = center[axis] - pt[axis]
                near, far = (left, right) if delta < 0 else (right, left)
                if near >= 0:
                    stack.append(near)
                if far >= 0 and delta * delta < r_sq:
                    stack.append(far)
        self.queries += 1
        self.last_visited = visited
        self.total_visited += visited
        return found


def kdtree_build(cloud: PointCloud) -> KDTree:
    return KDTree(cloud)


def kdtree_range_query(
    index: KDTree, center: Sequence[float], radius: float
) -> list[int]:
    return index.range_query(center, radius)


def kdtree_egraph(cloud: PointCloud, eps: float) -> EpsilonGraph:
    """Same edge set as brute_force_egraph, built with pruned range queries."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    tree = KDTree(cloud)
    edges = set()
    for i in range(len(cloud)):
        for j in tree.range_query(cloud.points[i], eps):
            if j != i:
                edges.add((min(i, j), max(i, j)))
    return EpsilonGraph(len(cloud), eps, frozenset(edges))


def encode_point(v: Sequence[float]) -> StateVector:
    """Amplitude encoding of v/||v|| into ceil(log2 len(v)) qubits (one qubit
    for length <= 2), padding with zero amplitudes up to a power of two.
    Inner products of encodings equal normalized dot products exactly."""
    vec = np.asarray(v, dtype=float).reshape(-1)
    if vec.size < 1:
        raise ValueError("cannot encode an empty vector")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot encode a zero or non-finite vector")
    num_qubits = max(1, math.ceil(math.log2(vec.size)))
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[: vec.size] = vec / norm
    return StateVector(num_qubits, amps)


GraphMode = Literal["standard", "naive", "multi"]

# picked up by tests and reports: quantum runs with a non-finite shot budget
# use exact marginals instead of sampling
EXACT_SHOTS = math.inf


def _is_exact(shots) -> bool:
    return not math.isfinite(shots)


def _swap_test_state(a: StateVector, b: StateVector) -> StateVector:
    circuit = circuits.build_swap_test(a.num_qubits)
    return circuits.simulate(circuit, [a, b])


def quantum_egraph(
    cloud: PointCloud,
    eps: float,
    shots,
    mode: GraphMode = "standard",
    seed: int = 0,
) -> tuple[EpsilonGraph, list[stats.OverlapEstimate]]:
    """Build the epsilon graph by simulated quantum distance estimation.

    standard/naive: one swap-test circuit per pair, ``shots`` repetitions
    each, edge iff p_hat > alpha_eps_standard(eps) (strictly).  The two modes
    share the decision path; they differ only in gate-count accounting.

    multi: one padded multi-state circuit, ``shots`` total executions; counts
    of (top=0, mid outcome) are aggregated per pair through the derived
    outcome map and compared against the pair's own calibrated threshold
    pair_constant * ((1-eps^2/2)^2 + 1), so the infinite-shot limit
    reproduces the brute-force graph regardless of outcome multiplicities.
    Pairs involving padding registers are discarded.

    Pass shots = math.inf for exact (infinite-shot) decisions.  Deterministic
    for a given seed.
    """
    if mode not in ("standard", "naive", "multi"):
        raise ValueError(f"unknown mode {mode!r}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not _is_exact(shots):
        shots = int(shots)
        if shots < 1:
            raise ValueError(f"shots must be >= 1, got {shots}")
    encoded = [encode_point(p) for p in cloud.points]
    n = len(encoded)
    if n < 2:
        return EpsilonGraph(n, eps, frozenset()), []
    if mode == "multi":
        return _multi_egraph(cloud, encoded, eps, shots, seed)

    alpha = stats.alpha_eps_standard(eps)
    edges = set()
    estimates = []
    for i, j in combinations(range(n), 2):
        state = _swap_test_state(encoded[i], encoded[j])
        if _is_exact(shots):
            p_hat = statevec.exact_marginal(state, [0])[(0,)]
            est = stats.estimate_from_probability(p_hat, "standard", pair=(i, j))
        else:
            rng = np.random.default_rng(np.random.SeedSequence([seed, i, j]))
            counts = statevec.sample_outcomes(state, [0], shots, rng)
            est = stats.estimate_from_counts(
                counts[(0,)], shots, "standard", pair=(i, j)
            )
        estimates.append(est)
        if est.p_hat > alpha:
            edges.add((i, j))
    return EpsilonGraph(n, eps, frozenset(edges)), estimates


def _multi_egraph(cloud, encoded, eps, shots, seed):
    w = encoded[0].num_qubits
    padded = circuits.pad_inputs(encoded, w)
    m = len(padded)
    circuit = circuits.build_multiswap_full(m, w)
    if circuit.layout.total_qubits > statevec.MAX_QUBITS:
        raise ResourceError(
            f"multi-state circuit needs {circuit.layout.total_qubits} qubits "
            f"for {m} padded inputs of width {w}"
        )
    pair_map = circuits.derive_pair_map(m)
    state = circuits.simulate(circuit, padded)
    measured = circuit.layout.measured_qubits
    threshold_scale = (1.0 - eps * eps / 2.0) ** 2 + 1.0
    if _is_exact(shots):
        table = statevec.exact_marginal(state, measured)
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed]))
        table = statevec.sample_outcomes(state, measured, shots, rng)

    n = len(cloud)
    hits_by_pair: dict[tuple[int, int], float] = {}
    for bits, value in table.items():
        if bits[0] != 0:
            continue
        a, b = pair_map.entries[bits[1:]]
        key = (min(a, b), max(a, b))
        hits_by_pair[key] = hits_by_pair.get(key, 0.0) + value

    edges = set()
    estimates = []
    for a, b in sorted(hits_by_pair):
        i, j = a - 1, b - 1  # register labels are 1-based
        if j >= n:
            continue  # padding register
        c_pair = pair_map.pair_constant(a, b)
        alpha_pair = c_pair * threshold_scale
        if _is_exact(shots):
            p_hat = hits_by_pair[(a, b)]
            est = stats.estimate_from_probability(
                p_hat, "multi", n=m, constant=c_pair, pair=(i, j)
            )
        else:
            hits = int(hits_by_pair[(a, b)])
            est = stats.estimate_from_counts(
                hits, shots, "multi", n=m, constant=c_pair, pair=(i, j)
            )
        estimates.append(est)
        if est.p_hat > alpha_pair:
            edges.add((i, j))
    return EpsilonGraph(n, eps, frozenset(edges)), estimates


def compare_graphs(reference: EpsilonGraph, estimate: EpsilonGraph) -> GraphDiff:
    """Exact edge-set differences: reference-only edges are false negatives,
    estimate-only edges are false positives."""
    if reference.n != estimate.n:
        raise ValueError(
            f"graphs have different vertex counts: {reference.n} vs {estimate.n}"
        )
    return GraphDiff(
        false_negatives=frozenset(reference.edges - estimate.edges),
        false_positives=frozenset(estimate.edges - reference.edges),
    )


def write_edge_list(
    path,
    graph: EpsilonGraph,
    estimates: Sequence[stats.OverlapEstimate] = (),
) -> None:
    """CSV edge list: columns i, j, distance_estimate (empty when no
    estimate exists for the pair, as in the classical modes)."""
    by_pair = {est.pair: est for est in estimates if est.pair is not None}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "distance_estimate"])
        for i, j in sorted(graph.edges):
            est = by_pair.get((i, j))
            writer.writerow(
                [i, j, "" if est is None else f"{est.distance_hat:.17g}"]
            )
