"""Scenario-driven batch runner.

``photon-spinor run <config.toml>`` executes an ordered list of actions
against a configured state and writes a JSON report; ``describe`` prints the
parsed plan without executing; ``version`` prints build info.

Exit codes: 0 success, 1 when an action assertion failed (the full report is
still written), 2 on configuration errors (nothing is written).

Reports contain no timestamps or absolute paths, and all randomness flows
from the configured seed, so identical configs produce byte-identical
reports.  The environment variable PHOTON_SPINOR_THREADS caps BLAS/FFT
parallelism; it must take effect before the numeric stack loads, which is why
the engine modules are imported lazily inside the handlers.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ConfigError, PhotonSpinorError, ResourceError

SCHEMA_VERSION = 1

_TOP_KEYS = {"name", "units", "seed", "memory_budget_mb", "grid", "state",
             "output", "actions"}
_GRID_KEYS = {"n", "dx"}
_STATE_KEYS = {"modes", "random", "normalize"}
_MODE_KEYS = {"k", "a_plus", "a_minus", "weight"}
_RANDOM_KEYS = {"count", "k_min", "k_max"}
_OUTPUT_KEYS = {"report", "csv_dir"}
_ACTION_KEYS = {
    "identity_suite": {"type", "name"},
    "evolve": {"type", "name", "dt", "steps", "max_probability_drift"},
    "observables": {"type", "name", "orbital", "max_spin_discrepancy"},
    "density_variants": {"type", "name", "kind", "max_integral_disagreement",
                         "min_spread_fraction"},
    "covariance_check": {"type", "name", "betas", "max_darwin_residual",
                         "max_scaling_residual"},
    "kernel_check": {"type", "name", "which", "k_samples", "max_rel_error"},
}


def _line_of(text: str, key: str) -> str:
    """Best-effort line locator for config error messages."""
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(key) and (
                stripped[len(key):].lstrip().startswith(("=", ".", "["))
                or stripped == key):
            return f" (line {i})"
    return ""


def _check_keys(table: dict, allowed: set, where: str, text: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r} in {where}{_line_of(text, key)}")


@dataclass(frozen=True)
class Action:
    type: str
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    units_preset: str
    seed: int
    grid: dict | None
    state: dict | None
    output: dict
    actions: tuple
    memory_budget_mb: float | None
    base_dir: Path


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc

    _check_keys(raw, _TOP_KEYS, "top level", text)
    name = raw.get("name", path.stem)
    units_preset = raw.get("units", "natural")
    if units_preset not in ("natural", "si"):
        raise ConfigError(
            f"units must be 'natural' or 'si', got {units_preset!r}"
            f"{_line_of(text, 'units')}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer{_line_of(text, 'seed')}")

    grid = raw.get("grid")
    if grid is not None:
        _check_keys(grid, _GRID_KEYS, "[grid]", text)
        n = grid.get("n")
        if not isinstance(n, int) or n < 8 or (n & (n - 1)) != 0:
            raise ConfigError(
                f"grid.n must be a power of two >= 8{_line_of(text, 'n')}")
        if not isinstance(grid.get("dx"), (int, float)) or grid["dx"] <= 0:
            raise ConfigError(f"grid.dx must be positive{_line_of(text, 'dx')}")

    state = raw.get("state")
    if state is not None:
        _check_keys(state, _STATE_KEYS, "[state]", text)
        if ("modes" in state) == ("random" in state):
            raise ConfigError(
                "state requires exactly one of 'modes' or 'random'"
                f"{_line_of(text, 'state')}")
        for mode in state.get("modes", []):
            _check_keys(mode, _MODE_KEYS, "state.modes entry", text)
            for req in ("k", "a_plus", "a_minus"):
                if req not in mode:
                    raise ConfigError(f"mode entry missing {req!r}")
        if "random" in state:
            _check_keys(state["random"], _RANDOM_KEYS, "state.random", text)
            if not isinstance(state["random"].get("count"), int):
                raise ConfigError("state.random.count must be an integer"
                                  + _line_of(text, "count"))

    output = raw.get("output", {})
    _check_keys(output, _OUTPUT_KEYS, "[output]", text)

    actions = []
    seen = set()
    for i, entry in enumerate(raw.get("actions", [])):
        atype = entry.get("type")
        if atype not in _ACTION_KEYS:
            raise ConfigError(
                f"actions[{i}]: unknown type {atype!r}"
                f"{_line_of(text, 'type')}; expected one of "
                f"{sorted(_ACTION_KEYS)}")
        _check_keys(entry, _ACTION_KEYS[atype], f"actions[{i}] ({atype})", text)
        aname = entry.get("name", atype)
        if aname in seen:
            raise ConfigError(f"duplicate action name {aname!r}")
        seen.add(aname)
        params = {k: v for k, v in entry.items() if k not in ("type", "name")}
        _validate_action(atype, aname, params, state, grid, text)
        actions.append(Action(type=atype, name=aname, params=params))
    if not actions:
        raise ConfigError("no actions declared")

    budget = raw.get("memory_budget_mb")
    if budget is not None:
        if not isinstance(budget, (int, float)) or budget <= 0:
            raise ConfigError("memory_budget_mb must be positive"
                              + _line_of(text, "memory_budget_mb"))
        if grid is not None:
            # six complex components plus a handful of working copies
            need_mb = grid["n"] ** 3 * 16 * 6 * 6 / 2 ** 20
            if need_mb > budget:
                raise ResourceError(
                    f"grid n={grid['n']} needs about {need_mb:.0f} MiB, "
                    f"beyond the declared budget of {budget} MB")

    return Scenario(name=name, units_preset=units_preset, seed=seed,
                    grid=grid, state=state, output=output,
                    actions=tuple(actions), memory_budget_mb=budget,
                    base_dir=path.parent)


def _validate_action(atype, aname, params, state, grid, text) -> None:
    needs_state = atype in ("evolve", "observables", "density_variants",
                            "covariance_check")
    if needs_state and state is None:
        raise ConfigError(f"action {aname!r} requires a [state] table")
    if atype == "observables" and params.get("orbital") and grid is None:
        raise ConfigError(f"action {aname!r}: orbital = true requires a "
                          "[grid] table")
    if atype == "density_variants":
        if grid is None:
            raise ConfigError(f"action {aname!r} requires a [grid] table")
        kind = params.get("kind", "both")
        if kind not in ("spin", "probability", "both"):
            raise ConfigError(
                f"action {aname!r}: kind must be spin|probability|both"
                f"{_line_of(text, 'kind')}")
    if atype == "evolve":
        if not isinstance(params.get("dt"), (int, float)):
            raise ConfigError(f"action {aname!r}: dt must be a number")
        if not isinstance(params.get("steps", 1), int) or params.get("steps", 1) < 1:
            raise ConfigError(f"action {aname!r}: steps must be a positive integer")
    if atype == "covariance_check":
        betas = params.get("betas")
        if not betas:
            raise ConfigError(f"action {aname!r}: betas list required")
        for b in betas:
            if not isinstance(b, (int, float)) or not -1.0 < b < 1.0:
                raise ConfigError(
                    f"action {aname!r}: betas entries must lie in (-1, 1), "
                    f"got {b}{_line_of(text, 'betas')}")
    if atype == "kernel_check":
        which = params.get("which", ["inv_k", "inv_sqrt_k"])
        for wname in which:
            if wname not in ("inv_k", "inv_sqrt_k"):
                raise ConfigError(
                    f"action {aname!r}: which entries must be inv_k or "
                    f"inv_sqrt_k, got {wname!r}{_line_of(text, 'which')}")
        for k in params.get("k_samples", [1.0]):
            if not isinstance(k, (int, float)) or k <= 0:
                raise ConfigError(
                    f"action {aname!r}: k_samples must be positive numbers"
                    f"{_line_of(text, 'k_samples')}")


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _build_state(scenario: Scenario):
    import numpy as np

    from . import modes
    if scenario.state is None:
        return None
    if "modes" in scenario.state:
        ms = [modes.make_mode(m["k"], complex(*m["a_plus"]), complex(*m["a_minus"]),
                              m.get("weight", 1.0))
              for m in scenario.state["modes"]]
        state = modes.make_state(ms)
    else:
        rec = scenario.state["random"]
        rng = np.random.default_rng(scenario.seed)
        state = modes.random_state(rng, rec["count"], rec.get("k_min", 0.5),
                                   rec.get("k_max", 2.0))
    if scenario.state.get("normalize", False):
        state = modes.normalize(state)
    return state


def run_scenario(scenario: Scenario) -> tuple:
    """Execute the scenario; returns (report dict, exit code)."""
    import numpy as np

    from . import fields, lorentz, modes, observables
    from .algebra import OPERATORS, verify_identities
    from .units import NATURAL, SI

    units = SI if scenario.units_preset == "si" else NATURAL
    state = _build_state(scenario)
    grid = (fields.GridSpec(n=scenario.grid["n"], dx=float(scenario.grid["dx"]))
            if scenario.grid else None)
    csv_dir = scenario.output.get("csv_dir")
    if csv_dir is not None:
        csv_dir = scenario.base_dir / csv_dir
        csv_dir.mkdir(parents=True, exist_ok=True)

    results = []
    any_failed = False
    for action in scenario.actions:
        payload: dict = {}
        checks: list = []
        p = action.params
        if action.type == "identity_suite":
            report = verify_identities(OPERATORS, raise_on_failure=False)
            payload["checks"] = report.as_dicts()
            checks.append(("all_identities_exact", report.all_passed))
        elif action.type == "evolve":
            steps = p.get("steps", 1)
            p0 = observables.total_probability(state)
            for _ in range(steps):
                state = modes.evolve(state, p["dt"], c=units.c)
            p1 = observables.total_probability(state)
            drift = abs(p1 - p0) / p0 if p0 else 0.0
            payload.update({"dt": p["dt"], "steps": steps, "time": state.time,
                            "probability_before": p0, "probability_after": p1,
                            "probability_drift": drift})
            if "max_probability_drift" in p:
                checks.append(("probability_drift", drift <= p["max_probability_drift"]))
        elif action.type == "observables":
            target = state
            if p.get("orbital", False):
                if grid is None:
                    raise ResourceError("orbital observables require a [grid]")
                target = fields.state_to_grid(state, grid)
            rep = observables.observable_report(target, units,
                                                include_orbital=p.get("orbital", False))
            payload.update(rep.as_dict())
            if "max_spin_discrepancy" in p:
                worst = max(rep.pairwise_discrepancies.values())
                checks.append(("spin_methods_agree", worst <= p["max_spin_discrepancy"]))
        elif action.type == "density_variants":
            pos = fields.to_position(fields.state_to_grid(state, grid))
            kinds = (("spin", "probability") if p.get("kind", "both") == "both"
                     else (p["kind"],))
            for kind in kinds:
                fn = (observables.spin_density_variants if kind == "spin"
                      else observables.probability_density_variants)
                dv = fn(pos)
                payload[kind] = dv.as_dict()
                if "max_integral_disagreement" in p:
                    checks.append((f"{kind}_integrals_agree",
                                   dv.max_integral_disagreement
                                   <= p["max_integral_disagreement"]))
                if "min_spread_fraction" in p:
                    checks.append((f"{kind}_pointwise_spread",
                                   dv.spread_fraction >= p["min_spread_fraction"]))
                if csv_dir is not None:
                    observables.export_density_csv(
                        dv, csv_dir / f"{action.name}_{kind}.csv")
        elif action.type == "covariance_check":
            reports = [lorentz.covariance_check(state, lorentz.Boost(b), units)
                       for b in p["betas"]]
            payload["betas"] = [r.as_dict() for r in reports]
            if "max_darwin_residual" in p:
                checks.append(("darwin_residual",
                               max(r.darwin_residual for r in reports)
                               <= p["max_darwin_residual"]))
            if "max_scaling_residual" in p:
                checks.append(("rc_scaling",
                               max(r.rc_scaling_residual for r in reports)
                               <= p["max_scaling_residual"]))
        elif action.type == "kernel_check":
            which = p.get("which", ["inv_k", "inv_sqrt_k"])
            samples = p.get("k_samples", [0.5, 1.0, 2.0, 4.0])
            for wname in which:
                recs = fields.kernel_pair_check(wname, samples)
                payload[wname] = recs
                if "max_rel_error" in p:
                    checks.append((f"{wname}_rel_error",
                                   max(r["rel_error"] for r in recs)
                                   <= p["max_rel_error"]))
        status = "ok" if all(ok for _, ok in checks) else "failed"
        any_failed = any_failed or status == "failed"
        results.append({
            "name": action.name,
            "type": action.type,
            "status": status,
            "assertions": [{"name": n, "passed": ok} for n, ok in checks],
            "payload": payload,
        })

    from . import __version__
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "photon-spinor",
        "version": __version__,
        "name": scenario.name,
        "units": scenario.units_preset,
        "seed": scenario.seed,
        "status": "failed" if any_failed else "ok",
        "actions": results,
    }
    return report, (1 if any_failed else 0)


def _write_report(scenario: Scenario, report: dict) -> None:
    from ._json import dumps_17g
    rel = scenario.output.get("report")
    if rel is None:
        print(dumps_17g(report))
        return
    out = scenario.base_dir / rel
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps_17g(report) + "\n")


def cmd_run(config_path) -> int:
    try:
        scenario = parse_scenario(config_path)
    except (ConfigError, ResourceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        report, code = run_scenario(scenario)
    except PhotonSpinorError as exc:
        # config-induced runtime failure (e.g. a mode the grid cannot hold):
        # nothing is written, matching the no-partial-reports contract
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _write_report(scenario, report)
    return code


def cmd_describe(config_path) -> int:
    try:
        scenario = parse_scenario(config_path)
    except (ConfigError, ResourceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(f"scenario: {scenario.name}")
    print(f"units: {scenario.units_preset}")
    print(f"seed: {scenario.seed}")
    if scenario.grid:
        print(f"grid: n={scenario.grid['n']} dx={scenario.grid['dx']}")
    if scenario.state:
        if "modes" in scenario.state:
            print(f"state: {len(scenario.state['modes'])} explicit modes")
        else:
            print(f"state: {scenario.state['random']['count']} random modes")
    print("plan:")
    for i, action in enumerate(scenario.actions, start=1):
        print(f"  {i}. {action.name} ({action.type})")
    return 0


def cmd_version() -> int:
    from . import __version__
    print(f"photon-spinor {__version__} (report schema {SCHEMA_VERSION})")
    return 0


def main(argv=None) -> int:
    threads = os.environ.get("PHOTON_SPINOR_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    parser = argparse.ArgumentParser(prog="photon-spinor",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("config")
    p_desc = sub.add_parser("describe", help="print the parsed plan")
    p_desc.add_argument("config")
    sub.add_parser("version", help="print version and build info")

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config)
    if args.command == "describe":
        return cmd_describe(args.config)
    return cmd_version()


if __name__ == "__main__":
    sys.exit(main())
