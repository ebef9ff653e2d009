"""fsosn: free-space optical satellite network simulator.

Constellation generation and propagation, time-sliced laser-link graphs,
shortest-path routing, optical link budgets, the transmission-power /
network-latency tradeoff, and uplink/downlink outage probability under
atmospheric turbulence.
"""
from .constellation import (CONSTELLATION_PRESETS, KUIPER_SHELL2, STARLINK_P1V3,
                            Constellation, SnapshotPositions, WalkerParams, generate,
                            permanent_neighbor_count, propagate)
from .geometry import (EARTH, EarthConstants, GeoPoint, Vec3, elevation_angle,
                       elevation_from_slant, geodetic_to_ecef, max_lisl_range,
                       orbital_period, slant_distance, troposphere_path_length)
from .link_budget import (CIRRUS, CUMULUS, THIN_CIRRUS, WEATHER_PRESETS,
                          InfeasibleLinkError, LinkBudgetParams, WeatherProfile,
                          lisl_transmission_power, received_power,
                          updown_transmission_power)
from .metrics import (CurveIntersection, LatencyBreakdown, PowerBreakdown,
                      TradeoffCurve, find_intersection, node_delay_components,
                      path_latency, path_power, satellite_powers, sweep)
from .scenario import (CITY_PRESETS, RunResult, Scenario, ScenarioError, export,
                       load_scenario, outage_curve, run, scenario_digest,
                       scenario_from_dict)
from .topology import Path, SlotGraph, build_slot_graph, dijkstra
from .turbulence import (EWFadingParams, TurbulenceParams, cn2, ew_cdf, ew_params,
                         ew_pdf, outage_probability, rytov_variance,
                         scintillation_index)

__version__ = "0.1.0"
