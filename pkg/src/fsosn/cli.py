"""Command-line interface.

    fsosn run <scenario.json> [--out DIR]
    fsosn presets list
    fsosn validate <scenario.json>
    fsosn op-curve --weather W --direction up|down [--snr A:B:STEP] [--out FILE]

Exit codes: 0 success, 2 scenario/argument validation failure, 1 runtime
failure. Worker-process count is taken from the FSOSN_THREADS environment
variable (0 or unset = one per CPU).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import link_budget as lb
from . import scenario as sc
from . import turbulence
from .constellation import CONSTELLATION_PRESETS, MIN_ELEVATION_PRESETS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsosn",
                                     description="Free-space optical satellite network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario end to end and export results")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--out", default="out", help="output directory (default: ./out)")

    p_presets = sub.add_parser("presets", help="list built-in presets")
    p_presets.add_argument("what", choices=["list"])

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("scenario", help="scenario JSON file")

    p_op = sub.add_parser("op-curve", help="outage probability vs mean SNR")
    p_op.add_argument("--weather", required=True, choices=sorted(lb.WEATHER_PRESETS))
    p_op.add_argument("--direction", required=True, choices=["up", "down"])
    p_op.add_argument("--snr", default="0:60:1", metavar="A:B:STEP",
                      help="SNR grid in dB (default 0:60:1)")
    p_op.add_argument("--elevation", type=float, default=30.0,
                      help="ground-station elevation angle in degrees (default 30)")
    p_op.add_argument("--altitude", type=float, default=550.0,
                      help="satellite altitude in km (default 550)")
    p_op.add_argument("--gamma-th", type=float, default=7.0,
                      help="SNR threshold in dB (default 7)")
    p_op.add_argument("--convention", choices=turbulence.CONVENTIONS, default="paper",
                      help="turbulence-strength convention (default paper)")
    p_op.add_argument("--out", help="write CSV here instead of stdout")
    return parser


def _parse_snr(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise sc.ScenarioError(f"--snr must be A:B:STEP, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise sc.ScenarioError("--snr needs positive step and stop >= start")
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


def _cmd_run(args) -> int:
    s = sc.load_scenario(args.scenario)
    result = sc.run(s)
    written = sc.export(result, args.out)
    print(f"scenario {result.digest[:12]}: {s.slot_count} slots x "
          f"{len(s.lisl_ranges_km)} ranges")
    if result.intersection is not None:
        x = result.intersection
        print(f"curves intersect at {x.lisl_range_km:.0f} km "
              f"({x.t_net_ms:.1f} ms, {x.p_avg_mw:.1f} mW)")
    else:
        print("curves do not intersect over the swept ranges")
    for p in written:
        print(f"wrote {p}")
    return 0


def _cmd_presets() -> int:
    print("constellations:")
    for name, c in CONSTELLATION_PRESETS.items():
        print(f"  {name}: {c.inclination_deg:g} deg, {c.total_sats}/{c.planes}/"
              f"{c.phasing_f}, {c.altitude_km:g} km, min elevation "
              f"{MIN_ELEVATION_PRESETS[name]:g} deg, default ranges "
              f"{list(map(int, sc.DEFAULT_LISL_RANGES[name]))}")
    print("cities:")
    for name, p in sc.CITY_PRESETS.items():
        print(f"  {name}: ({p.latitude_deg}, {p.longitude_deg}), {p.altitude_km} km")
    print("weather:")
    for name, w in lb.WEATHER_PRESETS.items():
        print(f"  {name}: N={w.number_cm3:g} cm^-3, LW={w.water_gm3:g} g/m^3")
    return 0


def _cmd_validate(args) -> int:
    s = sc.load_scenario(args.scenario)
    print(f"ok: digest {sc.scenario_digest(s)}")
    return 0


def _cmd_op_curve(args) -> int:
    snr = _parse_snr(args.snr)
    turb = turbulence.TurbulenceParams(
        zenith_deg=90.0 - args.elevation,
        gs_alt_m=100.0,
        sat_alt_m=args.altitude * 1e3,
        convention=args.convention,
    )
    weather = lb.WEATHER_PRESETS[args.weather]
    p_out = sc.outage_curve(weather, args.direction, snr, turb, 0.1, args.gamma_th)
    lines = ["snr_dB,P_out"]
    lines += [f"{g:.6g},{p:.6g}" for g, p in zip(snr, p_out)]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "presets":
            return _cmd_presets()
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "op-curve":
            return _cmd_op_curve(args)
        raise AssertionError(f"unhandled command {args.command}")
    except sc.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
