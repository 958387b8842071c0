"""Command-line front end: ``snrwall bound | simulate | wall-search``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bounds
from .montecarlo import (
    ScenarioConfig,
    empirical_wall_search,
    fig2_config,
    fig3_config,
    run_scenario,
    write_samples_csv,
    write_summaries,
)
from .noise import CorrelationModel, NoiseModel, psd_of_ar1, write_diagnostic_csv

log = logging.getLogger("snrwall")

PRESETS = {"reproduce-fig2": fig2_config, "reproduce-fig3": fig3_config}

_REQUIRED = {"receivers", "smoothing", "oversampling", "lengths", "snr_db", "h0_noise", "instances"}
_OPTIONAL = {"h1_noise", "bins", "seed", "noise_variance", "output_dir"}
_NOISE_KEYS = {
    "white": {"kind"},
    "ar1": {"kind", "coefficient", "method"},
    "receiver_correlated": {"kind", "rho", "target"},
}


class ScenarioError(ValueError):
    pass


def _complex_matrix(rows) -> np.ndarray:
    """Nested lists; complex entries may be written as [re, im] pairs."""

    def entry(v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ScenarioError(f"complex entries must be [re, im] pairs, got {v!r}")
            return complex(v[0], v[1])
        return complex(v)

    return np.array([[entry(v) for v in row] for row in rows], dtype=np.complex128)


def _noise_from_dict(doc: dict, variance: float, receivers: int) -> NoiseModel:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ScenarioError("noise models need a 'kind'")
    kind = doc["kind"]
    if kind not in _NOISE_KEYS:
        raise ScenarioError(f"unknown noise kind {kind!r}")
    extra = set(doc) - _NOISE_KEYS[kind]
    if extra:
        raise ScenarioError(f"unknown keys for {kind} noise: {sorted(extra)}")
    if kind == "white":
        return NoiseModel.white(variance)
    if kind == "ar1":
        if "coefficient" not in doc:
            raise ScenarioError("ar1 noise needs 'coefficient'")
        return NoiseModel.ar1(float(doc["coefficient"]), variance, doc.get("method", "psd"))
    if ("rho" in doc) == ("target" in doc):
        raise ScenarioError("receiver_correlated noise needs exactly one of 'rho' or 'target'")
    if "target" in doc:
        corr = _complex_matrix(doc["target"])
    else:
        rho = complex(*doc["rho"]) if isinstance(doc["rho"], list) else complex(doc["rho"])
        corr = np.full((receivers, receivers), rho, dtype=np.complex128)
        corr[np.tril_indices(receivers, -1)] = np.conj(rho)
        np.fill_diagonal(corr, 1.0)
    return NoiseModel.receiver_correlated(variance * corr)


def load_scenario(path) -> tuple[ScenarioConfig, str | None]:
    """Parse a JSON scenario file into a config and its optional output directory.

    Units: ``snr_db`` in dB, ``noise_variance`` linear power.
    """
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ScenarioError("scenario file must hold a JSON object")
    missing = _REQUIRED - set(doc)
    if missing:
        raise ScenarioError(f"missing scenario keys: {sorted(missing)}")
    unknown = set(doc) - _REQUIRED - _OPTIONAL
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    variance = float(doc.get("noise_variance", 1.0))
    p = int(doc["receivers"])
    config = ScenarioConfig(
        receivers=p,
        smoothing=int(doc["smoothing"]),
        oversampling=int(doc["oversampling"]),
        lengths=tuple(doc["lengths"]),
        snr_db=tuple(doc["snr_db"]),
        h0_noise=_noise_from_dict(doc["h0_noise"], variance, p),
        h1_noise=_noise_from_dict(doc.get("h1_noise", {"kind": "white"}), variance, p),
        instances=int(doc["instances"]),
        bins=int(doc.get("bins", 12)),
        seed=int(doc.get("seed", 0)),
    )
    return config, doc.get("output_dir")


def _noise_to_dict(model: NoiseModel) -> dict:
    if model.kind == "white":
        return {"kind": "white"}
    if model.kind == "ar1":
        return {"kind": "ar1", "coefficient": model.coefficient, "method": model.method}
    corr = model.target / model.variance
    return {"kind": "receiver_correlated", "target": [[[z.real, z.imag] for z in row] for row in corr]}


def scenario_to_dict(config: ScenarioConfig) -> dict:
    return {
        "receivers": config.receivers,
        "smoothing": config.smoothing,
        "oversampling": config.oversampling,
        "lengths": list(config.lengths),
        "snr_db": list(config.snr_db),
        "noise_variance": config.noise_variance,
        "h0_noise": _noise_to_dict(config.h0_noise),
        "h1_noise": _noise_to_dict(config.h1_noise),
        "instances": config.instances,
        "bins": config.bins,
        "seed": config.seed,
    }


def _resolve_scenario(args) -> tuple[ScenarioConfig, str | None]:
    if bool(args.scenario) == bool(args.preset):
        raise ScenarioError("give exactly one of --scenario or --preset")
    if args.preset:
        n_max = None if args.long else args.n_max
        config = PRESETS[args.preset](n_max=n_max, seed=args.seed if args.seed is not None else 0)
        out = None
    else:
        config, out = load_scenario(args.scenario)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    if args.instances is not None:
        config = replace(config, instances=args.instances)
    if getattr(args, "h0_white", False):
        config = replace(config, h0_noise=NoiseModel.white(config.noise_variance))
    return config, out


def _out_dir(args, scenario_out) -> Path:
    out = args.out or scenario_out
    if not out:
        raise ScenarioError("no output directory: pass --out or set output_dir in the scenario")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt_cap(cap):
    if cap is None:
        return "n/a"
    return "unbounded" if math.isinf(cap) else f"{cap:.17g}"


def cmd_bound(args) -> int:
    if args.correlation_file:
        with open(args.correlation_file) as fh:
            doc = json.load(fh)
        unknown = set(doc) - {"signal_corr", "noise_corr_h1", "noise_corr_h0"}
        if unknown:
            raise ScenarioError(f"unknown correlation-file keys: {sorted(unknown)}")
        g = len(doc["signal_corr"])
        corr = CorrelationModel(
            np.real(_complex_matrix(doc["signal_corr"])),
            _complex_matrix(doc.get("noise_corr_h1", np.eye(g).tolist())),
            _complex_matrix(doc["noise_corr_h0"]),
        )
        rho = args.rho_max if args.rho_max is not None else bounds.largest_offdiagonal(corr.noise_corr_h0)[0]
        kappa = bounds.max_offdiag_row_sum(corr.signal_corr)
        h1_white = bounds.max_offdiag_row_sum(corr.noise_corr_h1) == 0
        if not 0 < rho < 1:
            report = bounds.BoundReport(kappa, math.inf, None, None, None, False, f"rho_max = {rho:g} outside (0, 1)")
        elif h1_white:
            report = bounds.snr_wall_lower_bound(bounds.h0_statistic_lower_bound(rho), kappa)
        else:
            wall = bounds.general_wall_bound(corr, rho)
            alpha = bounds.h0_statistic_lower_bound(rho)
            if wall > 0:
                report = bounds.BoundReport(kappa, alpha, None, wall, 10 * math.log10(wall), True)
            else:
                report = bounds.BoundReport(kappa, alpha, None, None, None, False, "non-robustness fails at SNR = 0")
    else:
        if args.rho_max is None:
            raise ScenarioError("--rho-max is required without --correlation-file")
        report = bounds.wall_bound(args.p, args.Q, args.M, args.rho_max)

    print(f"kappa_max        = {report.kappa_max:.17g}")
    print(f"alpha_max        = {report.alpha_max:.17g}")
    print(f"validity_snr_cap = {_fmt_cap(report.validity_snr_cap)}")
    if report.defined:
        print(f"wall_linear      = {report.wall_linear:.17g}")
        print(f"wall_db          = {report.wall_db:.17g}")
    else:
        print(f"bound undefined: {report.reason.replace('kappa_max', 'κ_max')}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "bound.json", "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
    return 0


def cmd_simulate(args) -> int:
    config, scenario_out = _resolve_scenario(args)
    out = _out_dir(args, scenario_out)
    t0 = time.perf_counter()
    samples = run_scenario(config, workers=args.workers)
    log.info("simulated %d statistics in %.1f s", len(samples), time.perf_counter() - t0)
    write_samples_csv(out / "samples.csv", samples)
    summary = write_summaries(out, samples, config.bins)
    with open(out / "scenario.json", "w") as fh:
        json.dump(scenario_to_dict(config), fh, indent=2)
    if config.h0_noise.kind == "ar1":
        k = 512
        write_diagnostic_csv(out / "h0_psd.csv", 2 * np.pi * np.arange(k) / k, psd_of_ar1(config.h0_noise.coefficient, k))
    for cell in summary["cells"]:
        snr = "" if cell["snr_db"] is None else f" SNR={cell['snr_db']:g} dB"
        print(f"{cell['hypothesis']} N={cell['N']}{snr}: median={cell['median']:.6f} mean={cell['mean']:.6f}")
    sentinels = sum(c["sentinels"] for c in summary["cells"])
    if sentinels:
        print(f"warning: {sentinels} statistics hit the lambda_min = 0 sentinel", file=sys.stderr)
    return 0


def cmd_wall_search(args) -> int:
    config, scenario_out = _resolve_scenario(args)
    out = _out_dir(args, scenario_out)
    grid = [float(g) for g in args.grid.split(",")] if args.grid else sorted(config.snr_db, reverse=True)
    result = empirical_wall_search(config, grid, workers=args.workers)
    print(f"N = {result.length}, median H0 = {result.median_h0:.6f}")
    for s, m in result.medians_h1.items():
        print(f"  SNR {s:g} dB: median H1 = {m:.6f}")
    if result.interval is None:
        print("no crossing")
    else:
        print(f"crossing between {result.interval[0]:g} dB and {result.interval[1]:g} dB")
    with open(out / "wall.json", "w") as fh:
        json.dump(result.to_dict(), fh, indent=2)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snrwall", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="closed-form SNR-wall lower bound")
    b.add_argument("--p", type=int, default=2, help="number of receivers")
    b.add_argument("--Q", type=int, default=0, help="smoothing factor minus one")
    b.add_argument("--M", type=int, default=4, help="oversampling factor")
    b.add_argument("--rho-max", type=float, help="largest H0 noise correlation modulus")
    b.add_argument("--correlation-file", help="JSON with signal_corr, noise_corr_h1, noise_corr_h0")
    b.add_argument("--out", help="directory for bound.json")
    b.set_defaults(func=cmd_bound)

    for name, func, help_ in (
        ("simulate", cmd_simulate, "Monte Carlo histograms"),
        ("wall-search", cmd_wall_search, "empirical SNR-wall via median crossing"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--scenario", help="JSON scenario file")
        s.add_argument("--preset", choices=sorted(PRESETS))
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--n-max", type=int, default=100_000, help="largest N for presets (default 1e5)")
        s.add_argument("--instances", type=int)
        s.add_argument("--long", action="store_true", help="presets at full table scale (N up to 999999)")
        s.add_argument("--workers", type=int, default=1)
        if name == "wall-search":
            s.add_argument("--grid", help="comma-separated descending dB grid")
            s.add_argument("--h0-white", action="store_true", help="replace the H0 noise with white noise")
        s.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
