"""Latency and power figures for shortest paths, and their orbit-period means.

Network latency of a path is the end-to-end propagation delay plus a fixed
node delay per satellite:

    T_net = T_up + sum(T_k) + T_down + n * T_node

Each satellite's transmission power is the power of its incoming plus
outgoing link (uplink + first ISL for the ingress satellite, ISL + ISL for
intermediates, last ISL + downlink for the egress satellite); the path's
figure is the average over its n satellites. Sweeping the LISL range
produces the latency/power tradeoff curve; the crossing of the two
min-max-normalized series marks the balance range.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np

from . import link_budget as lb
from .constellation import Constellation, propagate
from .geometry import EARTH, elevation_angle, elevation_angles
from .topology import (EDGE_LISL, DijkstraWorkspace, PairGeometry, Path, _build_csr,
                       _dijkstra_csr, _walk_predecessors, pair_distances_at,
                       pair_geometry)

LIGHT_KM_PER_MS = EARTH.light_speed_m_s / 1e6

DEFAULT_NODE_DELAY_MS = 10.0
QUEUING_DELAY_MS = 4.0
PROCESSING_DELAY_MS = 6.0


@dataclass(frozen=True)
class NodeDelay:
    """Per-satellite delay components (ms)."""
    transmission_ms: float
    queuing_ms: float
    processing_ms: float

    @property
    def t_node_ms(self) -> float:
        return self.queuing_ms + self.processing_ms


def node_delay_components(packet_bytes: float, rate_gbps: float) -> NodeDelay:
    """Transmission delay from packet size and link rate; queuing and
    processing delays are the fixed 4 ms + 6 ms budget (transmission delay
    is negligible at laser-link rates and is excluded from t_node_ms)."""
    if packet_bytes <= 0 or rate_gbps <= 0:
        raise ValueError("packet size and data rate must be positive")
    l_t_ms = packet_bytes * 8.0 / (rate_gbps * 1e9) * 1e3
    return NodeDelay(transmission_ms=l_t_ms, queuing_ms=QUEUING_DELAY_MS,
                     processing_ms=PROCESSING_DELAY_MS)


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-link propagation delays and the resulting network latency (ms)."""
    t_up_ms: float
    isl_ms: np.ndarray
    t_down_ms: float
    n_sats: int
    t_node_ms: float

    @property
    def t_net_ms(self) -> float:
        return (self.t_up_ms + float(self.isl_ms.sum()) + self.t_down_ms
                + self.n_sats * self.t_node_ms)


def path_latency(path: Path, t_node_ms: float = DEFAULT_NODE_DELAY_MS) -> LatencyBreakdown:
    """Propagation delay of every link (d / c) plus node delays."""
    delays = path.link_km / LIGHT_KM_PER_MS
    return LatencyBreakdown(
        t_up_ms=float(delays[0]),
        isl_ms=delays[1:-1],
        t_down_ms=float(delays[-1]),
        n_sats=path.n_sats,
        t_node_ms=t_node_ms,
    )


@dataclass(frozen=True)
class PowerBreakdown:
    """Per-satellite transmission powers along a path (mW)."""
    up_mw: float
    isl_mw: np.ndarray
    down_mw: float
    sat_mw: np.ndarray
    feasible: bool = True

    @property
    def avg_mw(self) -> float:
        return float(self.sat_mw.mean())


def satellite_powers(up_mw: float, isl_mw, down_mw: float) -> PowerBreakdown:
    """Aggregate link powers into per-satellite powers.

    Ingress satellite: uplink + first ISL; intermediates: incoming +
    outgoing ISL; egress: last ISL + downlink. A single-satellite path has
    that satellite carrying uplink + downlink.
    """
    isl = np.asarray(isl_mw, dtype=float)
    n = isl.size + 1
    sat = np.empty(n)
    if n == 1:
        sat[0] = up_mw + down_mw
    else:
        sat[0] = up_mw + isl[0]
        sat[1:-1] = isl[:-1] + isl[1:]
        sat[-1] = isl[-1] + down_mw
    return PowerBreakdown(up_mw=up_mw, isl_mw=isl, down_mw=down_mw, sat_mw=sat)


def path_power(path: Path, params: lb.LinkBudgetParams, weather: lb.WeatherProfile,
               positions: np.ndarray, gs_source, gs_dest,
               gs_source_alt_km: float, gs_dest_alt_km: float) -> PowerBreakdown:
    """Transmission power of every satellite on a path.

    Uplink/downlink powers use the actual slot geometry (elevation angle of
    the ingress/egress satellite seen from its ground station). An opaque
    atmosphere marks the whole breakdown infeasible.
    """
    ingress = path.nodes[1]
    egress = path.nodes[-2]
    try:
        up_w = lb.updown_transmission_power(
            params, "up", float(path.link_km[0]),
            elevation_angle(gs_source, positions[ingress]), gs_source_alt_km, weather)
        down_w = lb.updown_transmission_power(
            params, "down", float(path.link_km[-1]),
            elevation_angle(gs_dest, positions[egress]), gs_dest_alt_km, weather)
    except lb.InfeasibleLinkError:
        n = path.n_sats
        return PowerBreakdown(up_mw=math.nan, isl_mw=np.full(max(n - 1, 0), math.nan),
                              down_mw=math.nan, sat_mw=np.full(n, math.nan), feasible=False)
    isl_mw = np.array([lb.lisl_transmission_power(params, float(d)) * 1e3
                       for d in path.link_km[1:-1]])
    return satellite_powers(up_w * 1e3, isl_mw, down_w * 1e3)


@dataclass(frozen=True)
class SlotMetrics:
    """One (slot, range) outcome of the sweep; `sat_nodes` is the satellite
    id sequence of the path (empty when unreachable)."""
    reachable: bool
    t_net_ms: float
    p_avg_mw: float
    n_sats: int
    sat_nodes: tuple[int, ...]


@dataclass(frozen=True)
class SweepRecords:
    """Per-slot outcomes for every swept LISL range."""
    lisl_ranges_km: tuple[float, ...]
    slot_count: int
    slot_seconds: float
    records: dict[float, list[SlotMetrics]]


@dataclass(frozen=True)
class TradeoffCurve:
    """Orbit-period means per LISL range (nan where no slot was usable)."""
    lisl_ranges_km: np.ndarray
    mean_t_net_ms: np.ndarray
    mean_p_avg_mw: np.ndarray
    unreachable_slots: np.ndarray
    slot_count: int


@dataclass(frozen=True)
class CurveIntersection:
    """Crossing of the normalized latency and power series."""
    lisl_range_km: float
    t_net_ms: float
    p_avg_mw: float


# ---------------------------------------------------------------------------
# sweep engine

@dataclass(frozen=True)
class _GsPair:
    source: np.ndarray
    dest: np.ndarray
    source_alt_km: float
    dest_alt_km: float


@dataclass(frozen=True)
class _EngineContext:
    constellation: Constellation
    pairs: PairGeometry
    gs_pairs: tuple[_GsPair, ...]
    min_elevation_deg: float
    ranges: tuple[float, ...]
    t_node_ms: float
    params: lb.LinkBudgetParams
    weather: lb.WeatherProfile
    slot_seconds: float


_CTX: _EngineContext | None = None
_WS = DijkstraWorkspace()


def _init_worker(ctx: _EngineContext) -> None:
    global _CTX
    _CTX = ctx


def _slot_metrics(ctx: _EngineContext, slot: int) -> list[list[SlotMetrics]]:
    """Outcomes for one slot: one list per ground-station pair, one entry
    per range. Pairs share the satellite-satellite edge work; ground
    stations enter the graph as endpoint-only nodes (two per pair)."""
    t = slot * ctx.slot_seconds
    X = propagate(ctx.constellation, t).positions
    n = ctx.constellation.n_sats

    si, sj, sd = pair_distances_at(ctx.pairs, t)
    eu = [si]
    ev = [sj]
    ew = [sd]
    ek = [np.zeros(sd.size, np.int8)]
    for p, pair in enumerate(ctx.gs_pairs):
        for gs, gs_id, kind in ((pair.source, n + 2 * p, 1),
                                (pair.dest, n + 2 * p + 1, 2)):
            elev = elevation_angles(gs, X)
            vis = np.flatnonzero(elev >= ctx.min_elevation_deg)
            eu.append(vis.astype(np.int32))
            ev.append(np.full(vis.size, gs_id, np.int32))
            ew.append(np.linalg.norm(X[vis] - gs, axis=1))
            ek.append(np.full(vis.size, kind, np.int8))
    n_nodes = n + 2 * len(ctx.gs_pairs)
    indptr, indices, weights, kinds = _build_csr(
        n_nodes, np.concatenate(eu), np.concatenate(ev),
        np.concatenate(ew), np.concatenate(ek))

    out = []
    for p, pair in enumerate(ctx.gs_pairs):
        src, dst = n + 2 * p, n + 2 * p + 1
        per_pair = []
        for rng in ctx.ranges:
            dist, pred = _dijkstra_csr(indptr, indices, weights, kinds, n_nodes, n,
                                       src, dst, rng, ws=_WS)
            nodes = _walk_predecessors(pred, src, dst)
            if nodes is None:
                per_pair.append(SlotMetrics(False, math.nan, math.nan, 0, ()))
                continue
            pts = [pair.source] + [X[s] for s in nodes[1:-1]] + [pair.dest]
            link_km = np.array([float(np.linalg.norm(pts[i + 1] - pts[i]))
                                for i in range(len(pts) - 1)])
            kind_arr = np.full(link_km.size, EDGE_LISL, np.int8)
            kind_arr[0], kind_arr[-1] = 1, 2
            path = Path(nodes=nodes, link_km=link_km, link_kind=kind_arr)
            latency = path_latency(path, ctx.t_node_ms)
            power = path_power(path, ctx.params, ctx.weather, X, pair.source, pair.dest,
                               pair.source_alt_km, pair.dest_alt_km)
            sat_nodes = tuple(nodes[1:-1])
            if not power.feasible:
                per_pair.append(SlotMetrics(False, latency.t_net_ms, math.nan,
                                            path.n_sats, sat_nodes))
                continue
            per_pair.append(SlotMetrics(True, latency.t_net_ms, power.avg_mw,
                                        path.n_sats, sat_nodes))
        out.append(per_pair)
    return out


def _worker_chunk(slots: list[int]) -> list[tuple[int, list[list[SlotMetrics]]]]:
    assert _CTX is not None
    return [(s, _slot_metrics(_CTX, s)) for s in slots]


def resolve_threads(requested: int | None = None) -> int:
    """Worker-process count: explicit argument, else the FSOSN_THREADS
    environment variable, else one per CPU (0 means auto)."""
    value = requested
    if value is None:
        env = os.environ.get("FSOSN_THREADS", "0")
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"FSOSN_THREADS must be an integer, got {env!r}") from None
    if value < 0:
        raise ValueError("thread count must be >= 0")
    if value == 0:
        value = os.cpu_count() or 1
    return value


def sweep_records_multi(constellation: Constellation, gs_pairs,
                        lisl_ranges_km, slot_count: int, slot_seconds: float,
                        min_elevation_deg: float, params: lb.LinkBudgetParams,
                        weather: lb.WeatherProfile,
                        t_node_ms: float = DEFAULT_NODE_DELAY_MS,
                        threads: int | None = None) -> list[SweepRecords]:
    """Per-slot shortest-path sweep for several ground-station pairs that
    share one constellation (the satellite-link work is done once per
    slot). `gs_pairs` is a sequence of (source_ecef, dest_ecef,
    source_alt_km, dest_alt_km) tuples; returns one SweepRecords per pair.

    Slots are independent; they fan out over worker processes and are
    reassembled in slot order, so results do not depend on the worker
    count.
    """
    ranges = tuple(float(r) for r in lisl_ranges_km)
    ctx = _EngineContext(
        constellation=constellation,
        pairs=pair_geometry(constellation, max(ranges)),
        gs_pairs=tuple(_GsPair(np.asarray(s, float), np.asarray(d, float),
                               float(sa), float(da))
                       for s, d, sa, da in gs_pairs),
        min_elevation_deg=min_elevation_deg,
        ranges=ranges,
        t_node_ms=t_node_ms,
        params=params,
        weather=weather,
        slot_seconds=slot_seconds,
    )
    slots = list(range(slot_count))
    n_workers = min(resolve_threads(threads), max(1, slot_count))
    if n_workers <= 1 or slot_count < 4:
        results = [(s, _slot_metrics(ctx, s)) for s in slots]
    else:
        chunk = max(1, math.ceil(slot_count / (4 * n_workers)))
        batches = [slots[i:i + chunk] for i in range(0, slot_count, chunk)]
        with get_context("fork").Pool(n_workers, initializer=_init_worker,
                                      initargs=(ctx,)) as pool:
            results = [item for batch in pool.imap(_worker_chunk, batches)
                       for item in batch]
    results.sort(key=lambda kv: kv[0])
    out = []
    for p in range(len(ctx.gs_pairs)):
        records = {rng: [results[s][1][p][i] for s in range(slot_count)]
                   for i, rng in enumerate(ranges)}
        out.append(SweepRecords(lisl_ranges_km=ranges, slot_count=slot_count,
                                slot_seconds=slot_seconds, records=records))
    return out


def sweep_records(constellation: Constellation, gs_source: np.ndarray, gs_dest: np.ndarray,
                  gs_source_alt_km: float, gs_dest_alt_km: float,
                  lisl_ranges_km, slot_count: int, slot_seconds: float,
                  min_elevation_deg: float, params: lb.LinkBudgetParams,
                  weather: lb.WeatherProfile, t_node_ms: float = DEFAULT_NODE_DELAY_MS,
                  threads: int | None = None) -> SweepRecords:
    """Single-pair form of sweep_records_multi."""
    return sweep_records_multi(
        constellation, [(gs_source, gs_dest, gs_source_alt_km, gs_dest_alt_km)],
        lisl_ranges_km, slot_count, slot_seconds, min_elevation_deg, params,
        weather, t_node_ms=t_node_ms, threads=threads)[0]


def curve_from_records(rec: SweepRecords) -> TradeoffCurve:
    """Means over the usable slots of each range (Eq.-style averages over
    the slot count, excluding slots with no path or no feasible power)."""
    ranges = np.array(rec.lisl_ranges_km)
    mean_t = np.full(ranges.size, math.nan)
    mean_p = np.full(ranges.size, math.nan)
    unreachable = np.zeros(ranges.size, dtype=int)
    for i, rng in enumerate(rec.lisl_ranges_km):
        ok = np.array([m.reachable for m in rec.records[rng]])
        unreachable[i] = int((~ok).sum())
        if ok.any():
            mean_t[i] = np.mean([m.t_net_ms for m in rec.records[rng] if m.reachable])
            mean_p[i] = np.mean([m.p_avg_mw for m in rec.records[rng] if m.reachable])
    return TradeoffCurve(lisl_ranges_km=ranges, mean_t_net_ms=mean_t,
                         mean_p_avg_mw=mean_p, unreachable_slots=unreachable,
                         slot_count=rec.slot_count)


def sweep(scenario, lisl_ranges_km=None, threads: int | None = None) -> TradeoffCurve:
    """Tradeoff curve for a Scenario (see fsosn.scenario)."""
    if lisl_ranges_km is not None:
        scenario = replace(scenario, lisl_ranges_km=tuple(lisl_ranges_km))
    rec = sweep_records(**scenario.engine_kwargs(), threads=threads)
    return curve_from_records(rec)


def find_intersection(curve: TradeoffCurve) -> CurveIntersection | None:
    """Crossing of the two curves after min-max normalization over the
    swept grid, located by piecewise-linear interpolation. Returns None
    when the normalized series never cross (or a series is degenerate)."""
    ok = ~(np.isnan(curve.mean_t_net_ms) | np.isnan(curve.mean_p_avg_mw))
    x = curve.lisl_ranges_km[ok]
    t = curve.mean_t_net_ms[ok]
    p = curve.mean_p_avg_mw[ok]
    if x.size < 2:
        return None
    t_span = t.max() - t.min()
    p_span = p.max() - p.min()
    if t_span == 0.0 or p_span == 0.0:
        return None
    tn = (t - t.min()) / t_span
    pn = (p - p.min()) / p_span
    diff = tn - pn
    for i in range(diff.size - 1):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0.0 or (d0 > 0) != (d1 > 0):
            frac = 0.0 if d0 == d1 else d0 / (d0 - d1)
            xc = x[i] + frac * (x[i + 1] - x[i])
            return CurveIntersection(
                lisl_range_km=float(xc),
                t_net_ms=float(t[i] + frac * (t[i + 1] - t[i])),
                p_avg_mw=float(p[i] + frac * (p[i + 1] - p[i])),
            )
    if diff[-1] == 0.0:
        return CurveIntersection(float(x[-1]), float(t[-1]), float(p[-1]))
    return None
