"""Command line interface: scenario files in, reports and sweep data out.

Typical calls::

    stratcomm solve --scenario game.json --out report.json
    stratcomm sweep --panel fig3a --out fig3a.csv --gnuplot fig3a.gp
    stratcomm verify --quick --out summary.json

Scenario files are strict JSON with a version field (``"schema": 1``);
unknown or misspelled fields are rejected by name, never ignored.  Rates
are read in bits unless ``--rate-units nats`` is given, and reports quote
both units.  Exit codes: 0 on success, 1 on validation problems (the
message names the offending field), 2 on numerical failures such as
``NoRoot``.

Reports are JSON with sorted keys and full-precision floats, so a given
(scenario, seed, version) triple reproduces its report byte for byte.
Sweep CSVs use ``repr`` floats for the same reason: re-reading a row and
re-evaluating it reproduces the file.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import simkit, verify
from ._csvio import write_rows
from .control_games import QuadraticObjective, classification_report, solve_objectives
from .equilibrium import solve_noiseless
from .errors import (
    DegenerateDenominator,
    InfeasibleInterval,
    InvalidDistribution,
    InvalidModel,
    NonCanonicalizable,
    NoRoot,
    SingularObservation,
    ToolkitError,
    Unbounded,
    ZeroRate,
)
from .gausslin import (
    CostPair,
    LinearScheme,
    SideInfoModel,
    SourcePairModel,
    best_decoder,
    validate_model,
)
from .noisy_channel import ChannelSpec, capacity, opta_bound, power_sweep, solve_noisy
from .side_info import find_matched_rho_xw, match_condition, si_rd_point, solve_noiseless_si, solve_noisy_si_linear
from .strategic_rd import nats_to_bits, rd_point, rd_sweep

_NUMERICAL_ERRORS = (
    NoRoot,
    InfeasibleInterval,
    DegenerateDenominator,
    Unbounded,
    SingularObservation,
    ZeroRate,
    NonCanonicalizable,
)

_KINDS = ("noiseless", "rd", "noisy", "si_noiseless", "si_rd", "si_match", "control")
_PAIR_KINDS = frozenset({"noiseless", "rd", "noisy", "control"})
_RATE_KINDS = frozenset({"rd", "si_rd"})
_CHANNEL_REQUIRED = frozenset({"noisy", "si_match"})
_CHANNEL_ALLOWED = _CHANNEL_REQUIRED | {"control"}
_SIM_KINDS = frozenset({"noiseless", "rd", "noisy", "si_noiseless", "si_rd"})

_TOP_FIELDS = frozenset({"schema", "kind", "model", "channel", "rate", "objectives", "sim"})
_PAIR_FIELDS = frozenset({"sigma_x2", "rho", "r"})
_SI_FIELDS = frozenset({"sigma_x2", "rho_x_theta", "r_theta", "rho_x_w", "rho_theta_w", "r_w"})
_CHANNEL_FIELDS = frozenset({"power", "noise_var"})
_SIM_FIELDS = frozenset({"seed", "n", "chunk", "bins"})
_OBJECTIVE_FIELDS = frozenset({"encoder", "decoder"})


class SchemaError(ValueError):
    """A scenario file does not conform to the published schema."""


@dataclass(frozen=True)
class Scenario:
    kind: str
    model: SourcePairModel | SideInfoModel
    channel: ChannelSpec | None
    rate_bits: float | None
    objectives: tuple[QuadraticObjective, QuadraticObjective] | None
    sim: simkit.SimConfig | None


# ---------------------------------------------------------------------------
# Scenario parsing


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return value


def _reject_unknown(mapping: dict, allowed: frozenset, path: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise SchemaError(f"{path}: unknown field '{key}'")


def _number(mapping: dict, key: str, path: str, default: float | None = None) -> float:
    if key not in mapping:
        if default is not None:
            return default
        raise SchemaError(f"{path}.{key}: required field is missing")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}: expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(f"{path}.{key}: must be finite")
    return value


def _integer(mapping: dict, key: str, path: str, default: int | None = None) -> int:
    if key not in mapping:
        if default is not None:
            return default
        raise SchemaError(f"{path}.{key}: required field is missing")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{path}.{key}: expected an integer")
    return value


def _parse_pair_model(raw: dict) -> SourcePairModel:
    mapping = _require_mapping(raw, "model")
    _reject_unknown(mapping, _PAIR_FIELDS, "model")
    return SourcePairModel(
        sigma_x2=_number(mapping, "sigma_x2", "model", default=1.0),
        rho=_number(mapping, "rho", "model"),
        r=_number(mapping, "r", "model"),
    )


def _parse_si_model(raw: dict, rho_xw_free: bool) -> SideInfoModel:
    mapping = _require_mapping(raw, "model")
    _reject_unknown(mapping, _SI_FIELDS, "model")
    rho_x_w = (
        _number(mapping, "rho_x_w", "model", default=0.0)
        if rho_xw_free
        else _number(mapping, "rho_x_w", "model")
    )
    return SideInfoModel(
        sigma_x2=_number(mapping, "sigma_x2", "model", default=1.0),
        rho_x_theta=_number(mapping, "rho_x_theta", "model"),
        r_theta=_number(mapping, "r_theta", "model"),
        rho_x_w=rho_x_w,
        rho_theta_w=_number(mapping, "rho_theta_w", "model"),
        r_w=_number(mapping, "r_w", "model"),
    )


def _parse_channel(raw: dict) -> ChannelSpec:
    mapping = _require_mapping(raw, "channel")
    _reject_unknown(mapping, _CHANNEL_FIELDS, "channel")
    return ChannelSpec(
        power=_number(mapping, "power", "channel"),
        noise_var=_number(mapping, "noise_var", "channel"),
    )


def _parse_objective_table(raw: dict, path: str) -> QuadraticObjective:
    mapping = _require_mapping(raw, path)
    for key in mapping:
        _number(mapping, key, path)
    try:
        return QuadraticObjective.from_dict(mapping)
    except NonCanonicalizable as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _parse_sim(raw: dict) -> simkit.SimConfig:
    mapping = _require_mapping(raw, "sim")
    _reject_unknown(mapping, _SIM_FIELDS, "sim")
    seed = _integer(mapping, "seed", "sim")
    if not 0 <= seed < 2**64:
        raise SchemaError("sim.seed: must fit in an unsigned 64-bit integer")
    n = _integer(mapping, "n", "sim")
    if n < 1:
        raise SchemaError("sim.n: need at least one sample")
    chunk = _integer(mapping, "chunk", "sim", default=2**16)
    if chunk < 1:
        raise SchemaError("sim.chunk: must be positive")
    bins = _integer(mapping, "bins", "sim", default=64)
    if bins < 2:
        raise SchemaError("sim.bins: need at least two bins")
    return simkit.SimConfig(seed=seed, n=n, chunk=chunk, bins=bins)


def parse_scenario(raw: dict, rate_units: str = "bits") -> Scenario:
    """Validate a decoded scenario object against the schema, strictly."""
    mapping = _require_mapping(raw, "scenario")
    _reject_unknown(mapping, _TOP_FIELDS, "scenario")
    if "schema" not in mapping:
        raise SchemaError("schema: required field is missing")
    if mapping["schema"] != 1:
        raise SchemaError(f"schema: unsupported version {mapping['schema']!r}, expected 1")
    kind = mapping.get("kind")
    if kind not in _KINDS:
        raise SchemaError(f"kind: expected one of {', '.join(_KINDS)}")
    if "model" not in mapping:
        raise SchemaError("model: required field is missing")

    if kind in _PAIR_KINDS:
        model: SourcePairModel | SideInfoModel = _parse_pair_model(mapping["model"])
    else:
        model = _parse_si_model(mapping["model"], rho_xw_free=(kind == "si_match"))

    channel = None
    if "channel" in mapping:
        if kind not in _CHANNEL_ALLOWED:
            raise SchemaError(f"channel: not used for kind '{kind}'")
        channel = _parse_channel(mapping["channel"])
    elif kind in _CHANNEL_REQUIRED:
        raise SchemaError(f"channel: required for kind '{kind}'")

    rate_bits = None
    if "rate" in mapping:
        if kind not in _RATE_KINDS:
            raise SchemaError(f"rate: not used for kind '{kind}'")
        rate = _number(mapping, "rate", "scenario")
        if rate < 0.0:
            raise SchemaError("rate: must be nonnegative")
        rate_bits = rate if rate_units == "bits" else nats_to_bits(rate)
    elif kind in _RATE_KINDS:
        raise SchemaError(f"rate: required for kind '{kind}'")

    objectives = None
    if "objectives" in mapping:
        if kind != "control":
            raise SchemaError(f"objectives: not used for kind '{kind}'")
        table = _require_mapping(mapping["objectives"], "objectives")
        _reject_unknown(table, _OBJECTIVE_FIELDS, "objectives")
        if "encoder" not in table or "decoder" not in table:
            raise SchemaError("objectives: both 'encoder' and 'decoder' tables are required")
        objectives = (
            _parse_objective_table(table["encoder"], "objectives.encoder"),
            _parse_objective_table(table["decoder"], "objectives.decoder"),
        )
    elif kind == "control":
        raise SchemaError("objectives: required for kind 'control'")

    sim = None
    if "sim" in mapping:
        if kind not in _SIM_KINDS:
            raise SchemaError(f"sim: Monte Carlo cross-checks are not supported for kind '{kind}'")
        sim = _parse_sim(mapping["sim"])

    return Scenario(
        kind=kind,
        model=model,
        channel=channel,
        rate_bits=rate_bits,
        objectives=objectives,
        sim=sim,
    )


def load_scenario(path: str, rate_units: str = "bits") -> Scenario:
    raw = json.loads(Path(path).read_text())
    return parse_scenario(raw, rate_units=rate_units)


# ---------------------------------------------------------------------------
# Reports


def _model_dict(model: SourcePairModel | SideInfoModel) -> dict:
    if isinstance(model, SourcePairModel):
        return {"sigma_x2": model.sigma_x2, "rho": model.rho, "r": model.r}
    return {
        "sigma_x2": model.sigma_x2,
        "rho_x_theta": model.rho_x_theta,
        "r_theta": model.r_theta,
        "rho_x_w": model.rho_x_w,
        "rho_theta_w": model.rho_theta_w,
        "r_w": model.r_w,
    }


def _sim_block(model, scheme: LinearScheme, channel_noise: float, closed: CostPair, cfg) -> dict:
    table = simkit.sample(model, cfg)
    est = simkit.estimate_costs(table, scheme, channel_noise, cfg)
    return {
        "seed": cfg.seed,
        "n": cfg.n,
        "d_e": simkit.verification_report(est.costs.d_e, est.stderr_e, closed.d_e),
        "d_d": simkit.verification_report(est.costs.d_d, est.stderr_d, closed.d_d),
    }


def _rd_scheme(model, beta: float, sigma_s2: float) -> LinearScheme:
    if math.isfinite(sigma_s2):
        encoder = LinearScheme(enc_gain=1.0, enc_theta_weight=beta, enc_noise_var=sigma_s2)
    else:
        encoder = LinearScheme(enc_gain=0.0)
    solved, _ = best_decoder(model, encoder)
    return solved


def _payload_noiseless(scn: Scenario, sim) -> dict:
    rep = solve_noiseless(scn.model)
    payload = {
        "alpha": rep.alpha,
        "kappa": rep.kappa,
        "a_aux": rep.a_aux,
        "d_e": rep.costs.d_e,
        "d_d": rep.costs.d_d,
    }
    if sim:
        scheme = LinearScheme(enc_theta_weight=rep.alpha, dec_y_weight=rep.kappa)
        payload["sim"] = _sim_block(scn.model, scheme, 0.0, rep.costs, sim)
    return payload


def _payload_rd(scn: Scenario, sim) -> dict:
    point = rd_point(scn.model, scn.rate_bits)
    payload = {
        "rate_bits": point.rate,
        "rate_nats": point.rate * math.log(2.0),
        "beta": point.beta,
        "sigma_s2": point.sigma_s2,
        "d_e": point.costs.d_e,
        "d_d": point.costs.d_d,
    }
    if sim:
        scheme = _rd_scheme(scn.model, point.beta, point.sigma_s2)
        payload["sim"] = _sim_block(scn.model, scheme, 0.0, point.costs, sim)
    return payload


def _payload_noisy(scn: Scenario, sim) -> dict:
    scheme, costs = solve_noisy(scn.model, scn.channel)
    bound = opta_bound(scn.model, scn.channel)
    payload = {
        "capacity_bits": capacity(scn.channel),
        "gain": scheme.enc_gain,
        "theta_weight": scheme.enc_theta_weight,
        "dec_y_weight": scheme.dec_y_weight,
        "d_e": costs.d_e,
        "d_d": costs.d_d,
        "opta_d_e": bound,
        "gap": costs.d_e - bound,
    }
    if sim:
        payload["sim"] = _sim_block(scn.model, scheme, scn.channel.noise_var, costs, sim)
    return payload


def _payload_si_noiseless(scn: Scenario, sim) -> dict:
    rep = solve_noiseless_si(scn.model)
    payload = {
        "alpha_si": rep.alpha_si,
        "dec_y_weight": rep.dec_y,
        "dec_w_weight": rep.dec_w,
        "d_e": rep.costs.d_e,
        "d_d": rep.costs.d_d,
    }
    if sim:
        scheme = LinearScheme(
            enc_theta_weight=rep.alpha_si, dec_y_weight=rep.dec_y, dec_w_weight=rep.dec_w
        )
        payload["sim"] = _sim_block(scn.model, scheme, 0.0, rep.costs, sim)
    return payload


def _payload_si_rd(scn: Scenario, sim) -> dict:
    point = si_rd_point(scn.model, scn.rate_bits)
    payload = {
        "rate_bits": point.rate,
        "rate_nats": point.rate * math.log(2.0),
        "beta": point.beta,
        "sigma_s2": point.sigma_s2,
        "d_e": point.costs.d_e,
        "d_d": point.costs.d_d,
    }
    if sim:
        scheme = _rd_scheme(scn.model, point.beta, point.sigma_s2)
        payload["sim"] = _sim_block(scn.model, scheme, 0.0, point.costs, sim)
    return payload


def _payload_si_match(scn: Scenario, sim) -> dict:
    root = find_matched_rho_xw(scn.model, scn.channel)
    matched_model = replace(scn.model, rho_x_w=root)
    report = match_condition(matched_model, scn.channel)
    _, costs = solve_noisy_si_linear(matched_model, scn.channel)
    return {
        "rho_x_w_root": root,
        "capacity_bits": report.rate,
        "beta": report.beta,
        "residual": report.residual,
        "matched": report.matched,
        "gap": report.gap,
        "d_e": costs.d_e,
        "d_d": costs.d_d,
    }


def _payload_control(scn: Scenario, classify_only: bool) -> dict:
    phi_e, phi_d = scn.objectives
    noise_var = scn.channel.noise_var if scn.channel else 0.0
    payload: dict = {
        "noise_var": noise_var,
        "classification": classification_report(phi_e, phi_d),
    }
    if classify_only and not payload["classification"]["linear_solution_claimed"]:
        return payload
    cf, scheme, raw_e, raw_d = solve_objectives(scn.model, phi_e, phi_d, noise_var)
    payload["solution"] = {
        "gain": scheme.enc_gain,
        "theta_weight": scheme.enc_theta_weight,
        "dec_y_weight": scheme.dec_y_weight,
        "controller_cost": raw_e,
        "receiver_cost": raw_d,
    }
    return payload


def solve_scenario(scn: Scenario, sim=None, classify_only: bool = False) -> dict:
    """Produce the kind-appropriate JSON-ready report for one scenario."""
    payload = {"schema": 1, "kind": scn.kind, "model": _model_dict(scn.model)}
    if scn.channel is not None:
        payload["channel"] = {"power": scn.channel.power, "noise_var": scn.channel.noise_var}
    if scn.kind == "noiseless":
        payload.update(_payload_noiseless(scn, sim))
    elif scn.kind == "rd":
        payload.update(_payload_rd(scn, sim))
    elif scn.kind == "noisy":
        payload.update(_payload_noisy(scn, sim))
    elif scn.kind == "si_noiseless":
        payload.update(_payload_si_noiseless(scn, sim))
    elif scn.kind == "si_rd":
        payload.update(_payload_si_rd(scn, sim))
    elif scn.kind == "si_match":
        payload.update(_payload_si_match(scn, sim))
    else:
        payload.update(_payload_control(scn, classify_only))
    return payload


# ---------------------------------------------------------------------------
# Sweep panels


def panel_rows(
    panel: str,
    points: int | None = None,
    lo: float | None = None,
    hi: float | None = None,
    model: SourcePairModel | None = None,
    noise_var: float = 1.0,
) -> tuple[tuple[str, ...], list[tuple]]:
    """Grid rows for one sweep panel, in grid order.

    ``fig3a``: costs against the bias spread r at rho = 0.
    ``fig3b``: costs against the correlation rho at r = 1.
    ``fig3c``: rate curves for r = 1 and r = 0.1 at rho = 0.
    ``custom``: costs against the power ratio for a supplied noisy model.
    Grid points with an invalid model are kept, flagged valid = 0, and not
    evaluated.
    """
    if panel in ("fig3a", "fig3b"):
        if panel == "fig3a":
            grid = np.linspace(lo if lo is not None else 0.05, hi if hi is not None else 10.0, points or 200)
            models = [SourcePairModel(sigma_x2=1.0, rho=0.0, r=float(v)) for v in grid]
            header: tuple[str, ...] = ("r", "d_e", "d_d", "valid")
        else:
            grid = np.linspace(lo if lo is not None else -0.9, hi if hi is not None else 0.9, points or 181)
            models = [SourcePairModel(sigma_x2=1.0, rho=float(v), r=1.0) for v in grid]
            header = ("rho", "d_e", "d_d", "valid")
        rows: list[tuple] = []
        for value, m in zip(grid, models):
            if validate_model(m).ok:
                costs = solve_noiseless(m).costs
                rows.append((float(value), costs.d_e, costs.d_d, 1))
            else:
                rows.append((float(value), math.nan, math.nan, 0))
        return header, rows

    if panel == "fig3c":
        rates = np.linspace(lo if lo is not None else 0.0, hi if hi is not None else 5.0, points or 101)
        wide = rd_sweep(SourcePairModel(sigma_x2=1.0, rho=0.0, r=1.0), rates)
        narrow = rd_sweep(SourcePairModel(sigma_x2=1.0, rho=0.0, r=0.1), rates)
        header = ("rate_bits", "d_e_r1", "d_d_r1", "d_e_r01", "d_d_r01")
        rows = [
            (float(rate), w.costs.d_e, w.costs.d_d, n.costs.d_e, n.costs.d_d)
            for rate, w, n in zip(rates, wide, narrow)
        ]
        return header, rows

    if panel == "custom":
        if model is None:
            raise SchemaError("scenario: --scenario with a noisy-kind model is required for the custom panel")
        ratios = np.linspace(lo if lo is not None else 0.1, hi if hi is not None else 20.0, points or 60)
        header = ("p_over_n", "capacity_bits", "d_e", "d_d", "gain")
        rows = [
            (row.p_over_n, row.capacity_bits, row.d_e, row.d_d, row.gain)
            for row in power_sweep(model, ratios, noise_var=noise_var)
        ]
        return header, rows

    raise SchemaError(f"panel: unknown panel '{panel}'")


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    write_rows(path, header, rows)


def gnuplot_script(csv_path: str, header: Sequence[str]) -> str:
    """A minimal plotting script for a sweep CSV; no plotting dependency."""
    plots = [
        f"  '{csv_path}' using 1:{idx + 1} with lines title '{name}'"
        for idx, name in enumerate(header)
        if idx > 0 and name != "valid"
    ]
    lines = [
        "set datafile separator ','",
        "set key outside",
        f"set xlabel '{header[0]}'",
        "set ylabel 'cost'",
        "plot \\",
        ", \\\n".join(plots),
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Commands


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _effective_sim(scn: Scenario, seed: int | None, samples: int | None):
    sim = scn.sim
    if sim is None and samples is not None:
        sim = simkit.SimConfig(seed=seed if seed is not None else verify.DEFAULT_SEED, n=samples)
    elif sim is not None:
        if seed is not None:
            sim = replace(sim, seed=seed)
        if samples is not None:
            sim = replace(sim, n=samples)
    if sim is not None:
        if not 0 <= sim.seed < 2**64:
            raise SchemaError("seed: must fit in an unsigned 64-bit integer")
        if scn.kind not in _SIM_KINDS:
            raise SchemaError(
                f"sim: Monte Carlo cross-checks are not supported for kind '{scn.kind}'"
            )
    return sim


def run(
    scenario_path: str,
    out_path: str | None = None,
    *,
    rate_units: str = "bits",
    seed: int | None = None,
    samples: int | None = None,
    kinds: tuple[str, ...] | None = None,
    classify_only: bool = False,
) -> int:
    """Solve one scenario file and emit its JSON report; returns exit code 0."""
    scn = load_scenario(scenario_path, rate_units=rate_units)
    if kinds and scn.kind not in kinds:
        raise SchemaError(f"kind: this command handles {', '.join(kinds)}, got '{scn.kind}'")
    sim = _effective_sim(scn, seed, samples)
    payload = solve_scenario(scn, sim=sim, classify_only=classify_only)
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", out_path)
    return 0


def _cmd_solve(args) -> int:
    return run(
        args.scenario,
        args.out,
        rate_units=args.rate_units,
        seed=args.seed,
        samples=args.samples,
        kinds=args.kinds,
        classify_only=args.classify_only,
    )


def _cmd_sweep(args) -> int:
    model = None
    noise_var = 1.0
    if args.panel == "custom":
        if not args.scenario:
            raise SchemaError("scenario: --scenario is required for the custom panel")
        scn = load_scenario(args.scenario, rate_units=args.rate_units)
        if scn.kind != "noisy":
            raise SchemaError(f"kind: the custom panel needs a 'noisy' scenario, got '{scn.kind}'")
        model = scn.model
        noise_var = scn.channel.noise_var
    if args.points is not None and args.points < 2:
        raise SchemaError("points: need at least two grid points")
    if args.lo is not None and args.hi is not None and not args.lo < args.hi:
        raise SchemaError("lo: grid bounds must satisfy lo < hi")
    header, rows = panel_rows(
        args.panel, points=args.points, lo=args.lo, hi=args.hi, model=model, noise_var=noise_var
    )
    if "valid" in header:
        flag = header.index("valid")
        n_valid = sum(int(row[flag]) for row in rows)
    else:
        n_valid = len(rows)
    if n_valid == 0:
        print("error: grid: no valid grid points", file=sys.stderr)
        return 1
    write_csv(args.out, header, rows)
    if args.gnuplot:
        Path(args.gnuplot).write_text(gnuplot_script(args.out, header))
    return 0


def _cmd_verify(args) -> int:
    profile = "full" if args.full else "quick"
    summary = verify.run_suite(profile=profile, seed=args.seed)
    _emit(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.out)
    if args.out:
        for check in summary["checks"]:
            status = "pass" if check["passed"] else "FAIL"
            print(
                f"{status} {check['name']}: {check['measured']:.3e} "
                f"{check['comparator']} {check['tolerance']:.3e}"
            )
    return 0 if summary["passed"] else 2


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", required=True, help="path to a schema-1 scenario JSON file")
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario's sim seed")
    parser.add_argument(
        "--samples", type=int, default=None, help="sample count for Monte Carlo cross-checks"
    )
    parser.add_argument(
        "--rate-units", choices=("bits", "nats"), default="bits", dest="rate_units",
        help="units of the scenario's rate field (default bits)",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratcomm",
        description="Solvers and sweeps for leader-follower communication games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve any scenario kind")
    _add_scenario_flags(solve)
    solve.set_defaults(func=_cmd_solve, kinds=None, classify_only=False)

    rd = sub.add_parser("rd", help="evaluate one rate-limited disclosure point")
    _add_scenario_flags(rd)
    rd.set_defaults(func=_cmd_solve, kinds=("rd", "si_rd"), classify_only=False)

    si_match = sub.add_parser("si-match", help="solve the matched-correlation condition")
    _add_scenario_flags(si_match)
    si_match.set_defaults(func=_cmd_solve, kinds=("si_match",), classify_only=False)

    control = sub.add_parser("control-check", help="classify (and solve) a control game")
    _add_scenario_flags(control)
    control.set_defaults(func=_cmd_solve, kinds=("control",), classify_only=True)

    sweep = sub.add_parser("sweep", help="write one panel of sweep data as CSV")
    sweep.add_argument("--panel", required=True, choices=("fig3a", "fig3b", "fig3c", "custom"))
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.add_argument("--points", type=int, default=None, help="number of grid points")
    sweep.add_argument("--lo", type=float, default=None, help="grid lower bound")
    sweep.add_argument("--hi", type=float, default=None, help="grid upper bound")
    sweep.add_argument("--scenario", default=None, help="noisy scenario for the custom panel")
    sweep.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")
    sweep.add_argument(
        "--rate-units", choices=("bits", "nats"), default="bits", dest="rate_units"
    )
    sweep.set_defaults(func=_cmd_sweep)

    check = sub.add_parser("verify", help="run the named self-check battery")
    profile = check.add_mutually_exclusive_group()
    profile.add_argument("--quick", action="store_true", help="fast profile (default)")
    profile.add_argument("--full", action="store_true", help="adds million-sample checks")
    check.add_argument("--seed", type=int, default=verify.DEFAULT_SEED)
    check.add_argument("--out", default=None, help="write the JSON summary here")
    check.set_defaults(func=_cmd_verify)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (InvalidModel, InvalidDistribution) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
