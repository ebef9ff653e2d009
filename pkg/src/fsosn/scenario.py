"""Scenario configuration, run orchestration, and result persistence.

A scenario bundles everything one end-to-end run needs: a constellation
(preset name or explicit Walker parameters), a ground-station pair, the
LISL range grid, weather, optical-terminal constants, the slot
discretization, and the outage-probability settings. Scenarios load from
a strict JSON schema (unknown keys are rejected) and serialize back to a
canonical form whose SHA-256 is the scenario digest.

`run` executes the sweep and the outage analysis; `export` writes the
CSV/JSON result files with fixed headers, 6-significant-digit numbers,
and newline-terminated UTF-8, so identical scenarios produce
byte-identical outputs.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path as FsPath

import numpy as np

from . import link_budget as lb
from . import metrics, turbulence
from .constellation import (CONSTELLATION_PRESETS, MIN_ELEVATION_PRESETS,
                            WalkerParams, generate)
from .geometry import GeoPoint, geodetic_to_ecef, max_lisl_range

SCHEMA_VERSION = 1

CITY_PRESETS = {
    "toronto": GeoPoint(43.65, -79.38, 0.1),
    "sydney": GeoPoint(-33.87, 151.21, 0.1),
    "istanbul": GeoPoint(41.01, 28.98, 0.1),
    "london": GeoPoint(51.51, -0.13, 0.1),
}

DEFAULT_LISL_RANGES = {
    "starlink-p1v3": (1575.0, 1731.0, 2000.0, 3000.0, 4000.0, 5016.0),
    "kuiper-shell2": (1515.0, 2000.0, 3000.0, 4000.0, 5339.0),
}


class ScenarioError(ValueError):
    """A scenario file failed to parse or violated an invariant."""


@dataclass(frozen=True)
class Scenario:
    constellation: WalkerParams
    gs_source: GeoPoint
    gs_destination: GeoPoint
    lisl_ranges_km: tuple[float, ...]
    weather: lb.WeatherProfile
    link_budget: lb.LinkBudgetParams
    min_elevation_deg: float
    turbulence: turbulence.TurbulenceParams
    t_node_ms: float = 10.0
    slot_count: int = 6000
    slot_seconds: float = 1.0
    op_snr_start_db: float = 0.0
    op_snr_stop_db: float = 60.0
    op_snr_step_db: float = 1.0
    gamma_th_db: float = 7.0
    constellation_name: str | None = None
    gs_source_name: str | None = None
    gs_destination_name: str | None = None

    def engine_kwargs(self) -> dict:
        """Arguments for metrics.sweep_records."""
        return dict(
            constellation=generate(self.constellation),
            gs_source=geodetic_to_ecef(self.gs_source),
            gs_dest=geodetic_to_ecef(self.gs_destination),
            gs_source_alt_km=self.gs_source.altitude_km,
            gs_dest_alt_km=self.gs_destination.altitude_km,
            lisl_ranges_km=self.lisl_ranges_km,
            slot_count=self.slot_count,
            slot_seconds=self.slot_seconds,
            min_elevation_deg=self.min_elevation_deg,
            params=self.link_budget,
            weather=self.weather,
            t_node_ms=self.t_node_ms,
        )

    def op_snr_grid_db(self) -> np.ndarray:
        n = int(round((self.op_snr_stop_db - self.op_snr_start_db) / self.op_snr_step_db))
        return self.op_snr_start_db + self.op_snr_step_db * np.arange(n + 1)


def _take(d: dict, key, default=None):
    return d.pop(key) if key in d else default

def _no_unknown_keys(d: dict, where: str) -> None:
    if d:
        raise ScenarioError(f"unknown key(s) in {where}: {', '.join(sorted(d))}")


def _parse_constellation(value) -> tuple[WalkerParams, str | None]:
    if isinstance(value, str):
        if value not in CONSTELLATION_PRESETS:
            raise ScenarioError(f"unknown constellation preset {value!r}; "
                                f"known: {sorted(CONSTELLATION_PRESETS)}")
        return CONSTELLATION_PRESETS[value], value
    if isinstance(value, dict):
        d = dict(value)
        try:
            params = WalkerParams(
                inclination_deg=float(_take(d, "inclination_deg")),
                total_sats=int(_take(d, "total_sats")),
                planes=int(_take(d, "planes")),
                phasing_f=int(_take(d, "phasing_f")),
                altitude_km=float(_take(d, "altitude_km")),
            )
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"bad constellation: {exc}") from exc
        _no_unknown_keys(d, "constellation")
        return params, None
    raise ScenarioError("constellation must be a preset name or parameter object")


def _parse_geopoint(value, field: str) -> tuple[GeoPoint, str | None]:
    if isinstance(value, str):
        if value not in CITY_PRESETS:
            raise ScenarioError(f"unknown city {value!r} for {field}; known: {sorted(CITY_PRESETS)}")
        return CITY_PRESETS[value], value
    if isinstance(value, dict):
        d = dict(value)
        try:
            p = GeoPoint(float(_take(d, "latitude_deg")), float(_take(d, "longitude_deg")),
                         float(_take(d, "altitude_km", 0.1)))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"bad {field}: {exc}") from exc
        _no_unknown_keys(d, field)
        return p, None
    raise ScenarioError(f"{field} must be a city name or a lat/lon object")


def _parse_weather(value) -> lb.WeatherProfile:
    if value is None:
        return lb.THIN_CIRRUS
    if isinstance(value, str):
        if value not in lb.WEATHER_PRESETS:
            raise ScenarioError(f"unknown weather preset {value!r}; known: {sorted(lb.WEATHER_PRESETS)}")
        return lb.WEATHER_PRESETS[value]
    if isinstance(value, dict):
        d = dict(value)
        try:
            w = lb.WeatherProfile(
                name=str(_take(d, "name", "custom")),
                number_cm3=float(_take(d, "number_cm3")),
                water_gm3=float(_take(d, "water_gm3")),
                particle_coeff=float(_take(d, "particle_coeff", 1.6)),
                tropo_alt_km=float(_take(d, "tropo_alt_km", 20.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"bad weather: {exc}") from exc
        _no_unknown_keys(d, "weather")
        return w
    raise ScenarioError("weather must be a preset name or profile object")


def scenario_from_dict(data: dict) -> Scenario:
    """Build a fully-defaulted Scenario from a parsed JSON object."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be a JSON object")
    d = dict(data)
    version = _take(d, "schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version} (expected {SCHEMA_VERSION})")

    try:
        constellation, cname = _parse_constellation(_take(d, "constellation", "starlink-p1v3"))
        gs_src, src_name = _parse_geopoint(_take(d, "gs_source", "toronto"), "gs_source")
        gs_dst, dst_name = _parse_geopoint(_take(d, "gs_destination", "sydney"), "gs_destination")
        weather = _parse_weather(_take(d, "weather"))

        lb_over = _take(d, "link_budget", {})
        if not isinstance(lb_over, dict):
            raise ScenarioError("link_budget must be an object")
        lb_over = dict(lb_over)
        lb_kwargs = {}
        for f in lb.LinkBudgetParams.__dataclass_fields__:
            if f in lb_over:
                lb_kwargs[f] = float(lb_over.pop(f))
        _no_unknown_keys(lb_over, "link_budget")
        budget = lb.LinkBudgetParams(**lb_kwargs)

        ranges = _take(d, "lisl_ranges_km")
        if ranges is None:
            if cname is None:
                raise ScenarioError("lisl_ranges_km is required for a custom constellation")
            ranges = DEFAULT_LISL_RANGES[cname]
        ranges = tuple(float(r) for r in ranges)
        if not ranges:
            raise ScenarioError("lisl_ranges_km must not be empty")

        min_elev = _take(d, "min_elevation_deg")
        if min_elev is None:
            if cname is None:
                raise ScenarioError("min_elevation_deg is required for a custom constellation")
            min_elev = MIN_ELEVATION_PRESETS[cname]
        min_elev = float(min_elev)

        turb_over = _take(d, "turbulence", {})
        if not isinstance(turb_over, dict):
            raise ScenarioError("turbulence must be an object")
        turb_over = dict(turb_over)
        turb = turbulence.TurbulenceParams(
            zenith_deg=float(_take(turb_over, "zenith_deg", 60.0)),
            gs_alt_m=gs_src.altitude_km * 1e3,
            sat_alt_m=constellation.altitude_km * 1e3,
            wavelength_nm=budget.wavelength_nm,
            wind_rms_m_s=float(_take(turb_over, "wind_rms_m_s", 21.0)),
            cn2_ground=float(_take(turb_over, "cn2_ground", 1.7e-14)),
            convention=str(_take(turb_over, "convention", "paper")),
        )
        _no_unknown_keys(turb_over, "turbulence")

        snr = _take(d, "op_snr_grid_db", {})
        if not isinstance(snr, dict):
            raise ScenarioError("op_snr_grid_db must be an object with start/stop/step")
        snr = dict(snr)
        scenario = Scenario(
            constellation=constellation,
            gs_source=gs_src,
            gs_destination=gs_dst,
            lisl_ranges_km=ranges,
            weather=weather,
            link_budget=budget,
            min_elevation_deg=min_elev,
            turbulence=turb,
            t_node_ms=float(_take(d, "t_node_ms", 10.0)),
            slot_count=int(_take(d, "slot_count", 6000)),
            slot_seconds=float(_take(d, "slot_seconds", 1.0)),
            op_snr_start_db=float(_take(snr, "start_db", 0.0)),
            op_snr_stop_db=float(_take(snr, "stop_db", 60.0)),
            op_snr_step_db=float(_take(snr, "step_db", 1.0)),
            gamma_th_db=float(_take(d, "gamma_th_db", 7.0)),
            constellation_name=cname,
            gs_source_name=src_name,
            gs_destination_name=dst_name,
        )
        _no_unknown_keys(snr, "op_snr_grid_db")
        _no_unknown_keys(d, "scenario")
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc

    _validate(scenario)
    return scenario


def _validate(s: Scenario) -> None:
    cap = max_lisl_range(s.constellation.altitude_km)
    for r in s.lisl_ranges_km:
        if r <= 0 or r > cap:
            raise ScenarioError(
                f"LISL range {r} km outside (0, {cap:.0f}] for altitude "
                f"{s.constellation.altitude_km} km")
    if s.slot_count < 1:
        raise ScenarioError("slot_count must be >= 1")
    if s.slot_seconds <= 0:
        raise ScenarioError("slot_seconds must be positive")
    if not 0 < s.min_elevation_deg <= 90:
        raise ScenarioError("min_elevation_deg must be in (0, 90]")
    if s.op_snr_step_db <= 0 or s.op_snr_stop_db < s.op_snr_start_db:
        raise ScenarioError("op_snr_grid_db must have positive step and stop >= start")
    if s.t_node_ms < 0:
        raise ScenarioError("t_node_ms must be >= 0")


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario JSON file."""
    p = FsPath(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {p}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


def scenario_to_dict(s: Scenario) -> dict:
    """Canonical, fully-explicit JSON form (load_scenario inverts it)."""
    return {
        "schema_version": SCHEMA_VERSION,
        "constellation": s.constellation_name or asdict(s.constellation),
        "gs_source": s.gs_source_name or asdict(s.gs_source),
        "gs_destination": s.gs_destination_name or asdict(s.gs_destination),
        "lisl_ranges_km": list(s.lisl_ranges_km),
        "weather": (s.weather.name if s.weather.name in lb.WEATHER_PRESETS
                    and lb.WEATHER_PRESETS[s.weather.name] == s.weather
                    else asdict(s.weather)),
        "link_budget": asdict(s.link_budget),
        "min_elevation_deg": s.min_elevation_deg,
        "turbulence": {
            "zenith_deg": s.turbulence.zenith_deg,
            "wind_rms_m_s": s.turbulence.wind_rms_m_s,
            "cn2_ground": s.turbulence.cn2_ground,
            "convention": s.turbulence.convention,
        },
        "t_node_ms": s.t_node_ms,
        "slot_count": s.slot_count,
        "slot_seconds": s.slot_seconds,
        "op_snr_grid_db": {
            "start_db": s.op_snr_start_db,
            "stop_db": s.op_snr_stop_db,
            "step_db": s.op_snr_step_db,
        },
        "gamma_th_db": s.gamma_th_db,
    }


def scenario_digest(s: Scenario) -> str:
    canonical = json.dumps(scenario_to_dict(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# running

@dataclass(frozen=True)
class RunResult:
    scenario: Scenario
    digest: str
    records: metrics.SweepRecords
    curve: metrics.TradeoffCurve
    intersection: metrics.CurveIntersection | None
    op_curves: dict[tuple[str, str], np.ndarray]  # (weather, direction) -> (n, 2)


def outage_curve(weather: lb.WeatherProfile, direction: str, snr_db: np.ndarray,
                 turb: turbulence.TurbulenceParams, gs_alt_km: float,
                 gamma_th_db: float) -> np.ndarray:
    """Outage probability over an SNR grid for one weather/direction.

    The attenuation uses the elevation complementary to the turbulence
    zenith angle; the fading parameters come from the profile's
    scintillation index.
    """
    sigma_i, sigma_r = turbulence.scintillation_from_profile(turb)
    ew = turbulence.ew_params(sigma_i, sigma_r)
    elevation = 90.0 - turb.zenith_deg
    l_a = lb.atmospheric_loss(direction, elevation, gs_alt_km, weather, turb.wavelength_nm)
    return np.array([turbulence.outage_probability(float(g), gamma_th_db, ew, l_a)
                     for g in snr_db])


def run(s: Scenario, threads: int | None = None) -> RunResult:
    """Execute the full scenario: sweep, tradeoff curve, intersection, and
    outage curves for the three cloud scenarios in both directions."""
    rec = metrics.sweep_records(**s.engine_kwargs(), threads=threads)
    curve = metrics.curve_from_records(rec)
    intersection = metrics.find_intersection(curve)
    snr = s.op_snr_grid_db()
    op_curves = {}
    for w in (lb.THIN_CIRRUS, lb.CIRRUS, lb.CUMULUS):
        for direction in ("up", "down"):
            p_out = outage_curve(w, direction, snr, s.turbulence,
                                 s.gs_source.altitude_km, s.gamma_th_db)
            op_curves[(w.name, direction)] = np.column_stack([snr, p_out])
    return RunResult(scenario=s, digest=scenario_digest(s), records=rec,
                     curve=curve, intersection=intersection, op_curves=op_curves)


# ---------------------------------------------------------------------------
# persistence

def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.6g}"


def _round6(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(f"{x:.6g}")


def _path_string(sat_nodes: tuple[int, ...]) -> str:
    if not sat_nodes:
        return ""
    return "|".join(["gs_s"] + [str(n) for n in sat_nodes] + ["gs_d"])


def export(result: RunResult, outdir) -> list[FsPath]:
    """Write the result files; returns the written paths.

    Files: scenario.json (canonical echo), tradeoff.csv, one
    slots_<range>.csv per range, outage_<weather>_<direction>.csv per
    cloud scenario and direction, and summary.json.
    """
    out = FsPath(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def write(name: str, text: str) -> None:
        p = out / name
        p.write_bytes(text.encode("utf-8"))
        written.append(p)

    canonical = json.dumps(scenario_to_dict(result.scenario), indent=2, sort_keys=True)
    write("scenario.json", canonical + "\n")

    c = result.curve
    lines = ["lisl_range_km,mean_T_net_ms,mean_P_TS_avg_mW,unreachable_slots"]
    for i in range(c.lisl_ranges_km.size):
        lines.append(",".join([
            _fmt(c.lisl_ranges_km[i]),
            _fmt(float(c.mean_t_net_ms[i])),
            _fmt(float(c.mean_p_avg_mw[i])),
            str(int(c.unreachable_slots[i])),
        ]))
    write("tradeoff.csv", "\n".join(lines) + "\n")

    for rng in result.records.lisl_ranges_km:
        lines = ["slot,T_net_ms,P_TS_avg_mW,n_sats,path"]
        for slot, m in enumerate(result.records.records[rng]):
            lines.append(",".join([
                str(slot),
                _fmt(m.t_net_ms),
                _fmt(m.p_avg_mw),
                str(m.n_sats),
                _path_string(m.sat_nodes),
            ]))
        write(f"slots_{rng:g}.csv", "\n".join(lines) + "\n")

    for (weather, direction), arr in sorted(result.op_curves.items()):
        lines = ["snr_dB,P_out"]
        for snr, p in arr:
            lines.append(f"{_fmt(snr)},{_fmt(p)}")
        write(f"outage_{weather}_{direction}.csv", "\n".join(lines) + "\n")

    summary = {
        "schema_version": SCHEMA_VERSION,
        "scenario_digest": result.digest,
        "slot_count": result.records.slot_count,
        "intersection": None if result.intersection is None else {
            "lisl_range_km": _round6(result.intersection.lisl_range_km),
            "mean_T_net_ms": _round6(result.intersection.t_net_ms),
            "mean_P_TS_avg_mW": _round6(result.intersection.p_avg_mw),
        },
        "ranges": [
            {
                "lisl_range_km": _round6(float(c.lisl_ranges_km[i])),
                "mean_T_net_ms": _round6(float(c.mean_t_net_ms[i])),
                "mean_P_TS_avg_mW": _round6(float(c.mean_p_avg_mw[i])),
                "unreachable_slots": int(c.unreachable_slots[i]),
            }
            for i in range(c.lisl_ranges_km.size)
        ],
    }
    write("summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return written
