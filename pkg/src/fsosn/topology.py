"""Per-slot link graphs and shortest-path routing.

A slot graph holds one time slot's feasible laser links as an undirected
weighted edge list: satellite-satellite links capped by the configured
LISL range and by visibility (the chord between two satellites must clear
the atmosphere shell), plus ground-station links gated by a minimum
elevation angle. Edge weights are propagation distances in km.

Routing is Dijkstra's algorithm over that graph, run on a CSR adjacency
built per slot. The kernel is numba-compiled when numba is available and
falls back to the identical pure-Python code otherwise. Ties are broken
deterministically: the heap orders by (distance, node id) and an
equal-distance relaxation keeps the lowest predecessor id, so repeated
runs reconstruct identical paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, SnapshotPositions
from .geometry import EARTH, Vec3, elevation_angles

EDGE_LISL = 0
EDGE_UPLINK = 1
EDGE_DOWNLINK = 2


def _maybe_jit(func):
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return func
    return njit(cache=True)(func)


@dataclass(frozen=True)
class SlotGraph:
    """One time slot's laser-link graph.

    Nodes are satellite ids 0..n_sats-1 plus the source ground station
    (id n_sats) and destination ground station (id n_sats+1). Edges are
    undirected and stored once: (edge_u[i], edge_v[i]) with weight
    edge_km[i] and kind edge_kind[i].
    """
    time_slot: float
    n_sats: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_km: np.ndarray
    edge_kind: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.n_sats + 2

    @property
    def gs_source_id(self) -> int:
        return self.n_sats

    @property
    def gs_dest_id(self) -> int:
        return self.n_sats + 1

    @property
    def n_edges(self) -> int:
        return int(self.edge_u.size)


@dataclass(frozen=True)
class Path:
    """Shortest path g_s -> s_1 ... s_n -> g_d with per-link distances."""
    nodes: list[int]          # full node sequence including both gs ids
    link_km: np.ndarray       # length len(nodes)-1
    link_kind: np.ndarray

    @property
    def sat_nodes(self) -> list[int]:
        return self.nodes[1:-1]

    @property
    def n_sats(self) -> int:
        return len(self.nodes) - 2

    @property
    def total_km(self) -> float:
        return float(self.link_km.sum())


def segment_clears_shell(p1: np.ndarray, p2: np.ndarray, shell_radius_km: float) -> np.ndarray:
    """True where the segment p1->p2 stays outside the sphere of the given
    radius (vectorized over leading dimensions)."""
    d = p2 - p1
    dd = np.einsum("...i,...i->...", d, d)
    t = np.where(dd > 0, -np.einsum("...i,...i->...", p1, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = p1 + t[..., None] * d
    return np.einsum("...i,...i->...", closest, closest) >= shell_radius_km ** 2


def build_slot_graph(positions: SnapshotPositions, gs_source: Vec3, gs_dest: Vec3,
                     lisl_range_km: float, min_elevation_deg: float) -> SlotGraph:
    """Construct the laser-link graph for one snapshot.

    A satellite pair is linked when within lisl_range_km and the line of
    sight clears the atmosphere shell; a ground station links to every
    satellite at or above the minimum elevation. Ground stations never
    link to each other.
    """
    X = positions.positions
    n = X.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    diff = X[iu] - X[ju]
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    keep = d <= lisl_range_km
    iu, ju, d = iu[keep], ju[keep], d[keep]
    clear = segment_clears_shell(X[iu], X[ju], EARTH.radius_km + EARTH.atmosphere_km)
    iu, ju, d = iu[clear], ju[clear], d[clear]

    eu = [iu.astype(np.int32)]
    ev = [ju.astype(np.int32)]
    ew = [d]
    ek = [np.zeros(d.size, np.int8)]
    for gs, gs_id, kind in ((gs_source, n, EDGE_UPLINK), (gs_dest, n + 1, EDGE_DOWNLINK)):
        elev = elevation_angles(np.asarray(gs, float), X)
        vis = np.flatnonzero(elev >= min_elevation_deg)
        gd = np.linalg.norm(X[vis] - np.asarray(gs, float), axis=1)
        eu.append(vis.astype(np.int32))
        ev.append(np.full(vis.size, gs_id, np.int32))
        ew.append(gd)
        ek.append(np.full(vis.size, kind, np.int8))
    return SlotGraph(
        time_slot=positions.time_slot,
        n_sats=n,
        edge_u=np.concatenate(eu),
        edge_v=np.concatenate(ev),
        edge_km=np.concatenate(ew),
        edge_kind=np.concatenate(ek),
    )


def _build_csr_kernel(n_nodes, eu, ev, w, kinds):
    n_edges = eu.size
    indptr = np.zeros(n_nodes + 1, np.int64)
    for e in range(n_edges):
        indptr[eu[e] + 1] += 1
        indptr[ev[e] + 1] += 1
    for i in range(n_nodes):
        indptr[i + 1] += indptr[i]
    fill = indptr[:-1].copy()
    indices = np.empty(2 * n_edges, np.int32)
    weights = np.empty(2 * n_edges, np.float64)
    ekind = np.empty(2 * n_edges, np.int8)
    for e in range(n_edges):
        u, v = eu[e], ev[e]
        p = fill[u]
        indices[p] = v
        weights[p] = w[e]
        ekind[p] = kinds[e]
        fill[u] = p + 1
        p = fill[v]
        indices[p] = u
        weights[p] = w[e]
        ekind[p] = kinds[e]
        fill[v] = p + 1
    return indptr, indices, weights, ekind


_build_csr = _maybe_jit(_build_csr_kernel)


def _dijkstra_kernel(indptr, indices, weights, kinds, n_nodes, n_transit, src, dst,
                     lisl_cap, dist, pred, settled, heap_d, heap_n):
    """Dijkstra over a CSR adjacency, skipping LISL edges above lisl_cap.

    Nodes with id >= n_transit (ground stations) are endpoints only, never
    relays. Heap orders by (distance, node id); equal-distance relaxations
    keep the lowest predecessor id. Stops once the destination is settled.
    The last five arguments are reusable workspace (dist/pred/settled of
    n_nodes; heaps of at least indices.size + n_nodes + 1); they are reset
    here.
    """
    inf = np.inf
    for i in range(n_nodes):
        dist[i] = inf
        pred[i] = -1
        settled[i] = 0
    dist[src] = 0.0
    heap_d[0] = 0.0
    heap_n[0] = src
    size = 1
    while size > 0:
        d = heap_d[0]
        u = heap_n[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_n[0] = heap_n[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            m = i
            if l < size and (heap_d[l] < heap_d[m]
                             or (heap_d[l] == heap_d[m] and heap_n[l] < heap_n[m])):
                m = l
            if r < size and (heap_d[r] < heap_d[m]
                             or (heap_d[r] == heap_d[m] and heap_n[r] < heap_n[m])):
                m = r
            if m == i:
                break
            heap_d[i], heap_d[m] = heap_d[m], heap_d[i]
            heap_n[i], heap_n[m] = heap_n[m], heap_n[i]
            i = m
        if settled[u]:
            continue
        settled[u] = 1
        if u == dst:
            break
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if settled[v] or (v >= n_transit and v != dst):
                continue
            w = weights[k]
            if kinds[k] == 0 and w > lisl_cap:
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                j = size
                heap_d[j] = nd
                heap_n[j] = v
                size += 1
                while j > 0:
                    pj = (j - 1) // 2
                    if heap_d[pj] > heap_d[j] or (heap_d[pj] == heap_d[j]
                                                  and heap_n[pj] > heap_n[j]):
                        heap_d[pj], heap_d[j] = heap_d[j], heap_d[pj]
                        heap_n[pj], heap_n[j] = heap_n[j], heap_n[pj]
                        j = pj
                    else:
                        break
            elif nd == dist[v] and pred[v] > u:
                pred[v] = u
    return dist, pred


_dijkstra_csr_raw = _maybe_jit(_dijkstra_kernel)


class DijkstraWorkspace:
    """Reusable scratch arrays for repeated shortest-path runs."""

    def __init__(self):
        self.n_nodes = -1
        self.heap_cap = -1

    def ensure(self, n_nodes: int, heap_cap: int) -> None:
        if n_nodes > self.n_nodes:
            self.dist = np.empty(n_nodes, np.float64)
            self.pred = np.empty(n_nodes, np.int32)
            self.settled = np.empty(n_nodes, np.uint8)
            self.n_nodes = n_nodes
        if heap_cap > self.heap_cap:
            self.heap_d = np.empty(heap_cap, np.float64)
            self.heap_n = np.empty(heap_cap, np.int32)
            self.heap_cap = heap_cap


def _dijkstra_csr(indptr, indices, weights, kinds, n_nodes, n_transit, src, dst,
                  lisl_cap, ws: DijkstraWorkspace | None = None):
    if ws is None:
        ws = DijkstraWorkspace()
    ws.ensure(n_nodes, indices.size + n_nodes + 1)
    return _dijkstra_csr_raw(indptr, indices, weights, kinds, n_nodes, n_transit, src,
                             dst, lisl_cap, ws.dist, ws.pred, ws.settled, ws.heap_d,
                             ws.heap_n)


def _walk_predecessors(pred: np.ndarray, src: int, dst: int) -> list[int] | None:
    if pred[dst] < 0:
        return None
    nodes = [dst]
    node = dst
    while node != src:
        node = int(pred[node])
        nodes.append(node)
        if len(nodes) > pred.size:
            raise RuntimeError("predecessor chain does not terminate")
    nodes.reverse()
    return nodes


def dijkstra(g: SlotGraph, g_s: int | None = None, g_d: int | None = None) -> Path | None:
    """Shortest path by total propagation distance, or None if unreachable.

    Ground-station nodes are endpoints only; satellites relay.
    """
    src = g.gs_source_id if g_s is None else g_s
    dst = g.gs_dest_id if g_d is None else g_d
    indptr, indices, weights, kinds = _build_csr(g.n_nodes, g.edge_u, g.edge_v,
                                                 g.edge_km, g.edge_kind)
    dist, pred = _dijkstra_csr(indptr, indices, weights, kinds, g.n_nodes, g.n_sats,
                               src, dst, np.inf)
    nodes = _walk_predecessors(pred, src, dst)
    if nodes is None:
        return None
    link_km = np.empty(len(nodes) - 1)
    link_kind = np.empty(len(nodes) - 1, np.int8)
    for idx in range(len(nodes) - 1):
        u, v = nodes[idx], nodes[idx + 1]
        for k in range(indptr[u], indptr[u + 1]):
            if indices[k] == v:
                link_km[idx] = weights[k]
                link_kind[idx] = kinds[k]
                break
        else:  # pragma: no cover - predecessor edges always exist
            raise RuntimeError(f"edge {u}-{v} missing from graph")
    return Path(nodes=nodes, link_km=link_km, link_kind=link_kind)


@dataclass(frozen=True)
class PairGeometry:
    """Precomputed relative geometry of candidate satellite pairs.

    For two satellites of one circular shell the unit-vector dot product
    is cos(gamma)(t) = A + C cos(sum0 + 2 n t): A and C depend on the RAAN
    difference and phase difference only, so per-slot pair distances cost
    one fused multiply-add per pair. Pairs are pre-filtered to those whose
    minimum distance over an orbit is within `cap_km`.
    """
    iu: np.ndarray
    ju: np.ndarray
    a_const: np.ndarray
    c_cos: np.ndarray
    c_sin: np.ndarray
    mean_motion: float
    radius_km: float
    cap_km: float


def pair_geometry(c: Constellation, max_range_km: float) -> PairGeometry:
    """Precompute pair coefficients for all pairs that can ever be within
    max_range_km (additionally capped by the visibility chord)."""
    from .geometry import max_lisl_range, mean_motion

    r = c.orbit_radius_km
    cap = min(max_range_km, max_lisl_range(c.params.altitude_km))
    n = c.n_sats
    iu, ju = np.triu_indices(n, k=1)
    iu = iu.astype(np.int32)
    ju = ju.astype(np.int32)
    inc = np.radians(c.params.inclination_deg)
    ci, si = np.cos(inc), np.sin(inc)
    dr = c.raan[ju] - c.raan[iu]
    cos_d, sin_d = np.cos(dr), np.sin(dr)
    delta = c.arg_lat0[iu] - c.arg_lat0[ju]
    sum0 = c.arg_lat0[iu] + c.arg_lat0[ju]
    p = cos_d
    q = cos_d * ci * ci + si * si
    a_const = 0.5 * (p + q) * np.cos(delta) + sin_d * ci * np.sin(delta)
    c_amp = 0.5 * (p - q)
    thresh = 1.0 - cap * cap / (2.0 * r * r)
    keep = a_const + np.abs(c_amp) >= thresh
    return PairGeometry(
        iu=iu[keep],
        ju=ju[keep],
        a_const=a_const[keep],
        c_cos=c_amp[keep] * np.cos(sum0[keep]),
        c_sin=c_amp[keep] * np.sin(sum0[keep]),
        mean_motion=mean_motion(c.params.altitude_km),
        radius_km=r,
        cap_km=cap,
    )


def _pair_edges_kernel(iu, ju, a_const, c_cos, c_sin, ct, st, thresh, radius):
    n = iu.size
    eu = np.empty(n, np.int32)
    ev = np.empty(n, np.int32)
    ed = np.empty(n, np.float64)
    k = 0
    for i in range(n):
        cosg = a_const[i] + c_cos[i] * ct - c_sin[i] * st
        if cosg >= thresh:
            eu[k] = iu[i]
            ev[k] = ju[i]
            span = 2.0 - 2.0 * cosg
            ed[k] = radius * np.sqrt(span if span > 0.0 else 0.0)
            k += 1
    return eu[:k], ev[:k], ed[:k]


_pair_edges = _maybe_jit(_pair_edges_kernel)


def pair_distances_at(pg: PairGeometry, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distances (km) of the candidate pairs within the cap at time t.

    Returns (i, j, d) edge arrays, already filtered to d <= cap_km.
    """
    phase = 2.0 * pg.mean_motion * t
    thresh = 1.0 - pg.cap_km ** 2 / (2.0 * pg.radius_km ** 2)
    return _pair_edges(pg.iu, pg.ju, pg.a_const, pg.c_cos, pg.c_sin,
                       math.cos(phase), math.sin(phase), thresh, pg.radius_km)
