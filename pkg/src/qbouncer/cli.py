"""Experiment runner: config parsing, presets, artifact output, verification.

Configs are plain JSON; presets are checked-in config files shipped with the
package (``fig1``, ``fig2``, ``fig3``, ``threshold-demo``).  A run writes a
deterministic artifact tree into the output directory:

    manifest.json            fully resolved config, scales, diagnostics
    observables.csv          spectral occupations and derived observables
    observables_grid.csv     same layout from the grid solver (if enabled)
    wigner_<k>.json          phase-space snapshots (if requested)
    classical.csv            reduced (I, Phi) trajectory (single-resonance mode)
    classical_ensemble.csv   ensemble energy statistics (bouncer-ensemble mode)
    basis_levels.csv etc.    eigenbasis dump (if dump_basis is set)

All numeric output is formatted with %.17g and no timestamps are recorded,
so re-running the same config yields byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .classical import (
    action_of_energy,
    bouncer_ensemble,
    matched_start,
    simulate_single_resonance,
)
from .drive import (
    DriveProgram,
    omega_at,
    schedule_from_dict,
    schedule_to_dict,
    time_at_omega,
)
from .eigenbasis import build_basis, dump_basis_csv
from .errors import ConfigError, PropagationError
from .gridprop import GridSpec, init_from_level, propagate_grid
from .qdyn import propagate, pure_state, wavefunction_on_grid
from .units import PEV, PhysicalConstants, ScaledUnits, derive_scales
from .wigner import wigner_transform

PRESET_NAMES = ("fig1", "fig2", "fig3", "threshold-demo")
SOLVERS = ("spectral", "grid", "both", "none")
CLASSICAL_MODES = ("off", "single-resonance", "bouncer-ensemble")

_DEFAULTS = {
    "constants": None,
    "epsilon": 0.228,
    "schedule": {"type": "optimal-chirp", "omega0": 1.205, "q": 0.5},
    "t_final": 160.0,
    "n_basis": 40,
    "dt": 1e-3,
    "sample_every": 100,
    "initial_level": 1,
    "solver": "spectral",
    "classical": {"mode": "off"},
    "wigner_snapshots": [],
    "wigner": {"x_max": 32.0, "n_points": 384, "p_max": None},
    "grid": {"x_max": 80.0, "n_points": 4096, "dt": 5e-4},
    "dump_basis": False,
    "output_dir": "qbouncer-out",
}

_CLASSICAL_DEFAULTS = {
    "single-resonance": {"dt": 5e-3, "sample_every": 20, "keep_cos_term": True},
    "bouncer-ensemble": {"size": 100, "dt": 1e-3, "sample_every": 100, "initial_action": None},
}


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


@dataclasses.dataclass
class ExperimentConfig:
    """Validated, fully resolved experiment description."""

    raw: dict

    def __getitem__(self, key):
        return self.raw[key]

    @property
    def constants(self) -> PhysicalConstants:
        over = self.raw.get("constants") or {}
        return PhysicalConstants(**over)

    @property
    def program(self) -> DriveProgram:
        return DriveProgram(
            epsilon=self.raw["epsilon"],
            schedule=schedule_from_dict(self.raw["schedule"]),
            t_final=self.raw["t_final"],
        )


def _fail(field: str, message: str) -> None:
    raise ConfigError(f"config field '{field}': {message}")


def resolve_config(data: dict) -> ExperimentConfig:
    """Merge defaults, validate every field, and freeze the result."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(data) - set(_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    cfg = {**_DEFAULTS, **data}

    if cfg["constants"] is not None:
        if not isinstance(cfg["constants"], dict):
            _fail("constants", "must be an object")
        bad = set(cfg["constants"]) - {"neutron_mass", "gravity_g", "hbar"}
        if bad:
            _fail("constants", f"unknown keys {sorted(bad)}")
        try:
            PhysicalConstants(**cfg["constants"])
        except ValueError as exc:
            _fail("constants", str(exc))
    if not isinstance(cfg["epsilon"], (int, float)) or cfg["epsilon"] < 0:
        _fail("epsilon", "must be a non-negative number")
    try:
        schedule_from_dict(cfg["schedule"])
    except ValueError as exc:
        _fail("schedule", str(exc))
    if not isinstance(cfg["t_final"], (int, float)) or cfg["t_final"] <= 0:
        _fail("t_final", "must be a positive number")
    if not isinstance(cfg["n_basis"], int) or not 1 <= cfg["n_basis"] <= 200:
        _fail("n_basis", "must be an integer in [1, 200]")
    if not isinstance(cfg["dt"], (int, float)) or cfg["dt"] <= 0:
        _fail("dt", "must be a positive number")
    if not isinstance(cfg["sample_every"], int) or cfg["sample_every"] < 1:
        _fail("sample_every", "must be a positive integer")
    if not isinstance(cfg["initial_level"], int) or not 1 <= cfg["initial_level"] <= cfg["n_basis"]:
        _fail("initial_level", f"must be an integer in [1, n_basis={cfg['n_basis']}]")
    if cfg["solver"] not in SOLVERS:
        _fail("solver", f"must be one of {SOLVERS}")

    classical = dict(cfg["classical"]) if isinstance(cfg["classical"], dict) else None
    if classical is None or "mode" not in classical:
        _fail("classical", "must be an object with a 'mode' key")
    if classical["mode"] not in CLASSICAL_MODES:
        _fail("classical.mode", f"must be one of {CLASSICAL_MODES}")
    if classical["mode"] != "off":
        merged = {**_CLASSICAL_DEFAULTS[classical["mode"]], **classical}
        extra = set(merged) - set(_CLASSICAL_DEFAULTS[classical["mode"]]) - {"mode"}
        if extra:
            _fail("classical", f"unknown keys {sorted(extra)} for mode {classical['mode']}")
        classical = merged
    cfg["classical"] = classical

    if not isinstance(cfg["wigner_snapshots"], list):
        _fail("wigner_snapshots", "must be a list")
    for i, snap in enumerate(cfg["wigner_snapshots"]):
        if not isinstance(snap, dict) or len(snap) != 1:
            _fail(f"wigner_snapshots[{i}]", "must be an object with exactly one key")
        key = next(iter(snap))
        if key not in ("t", "omega_d", "omega_d_hz"):
            _fail(f"wigner_snapshots[{i}]", "key must be 't', 'omega_d' or 'omega_d_hz'")
        if not isinstance(snap[key], (int, float)) or snap[key] <= 0:
            _fail(f"wigner_snapshots[{i}]", "value must be a positive number")
    wig = {**_DEFAULTS["wigner"], **(cfg["wigner"] or {})}
    if set(wig) - {"x_max", "n_points", "p_max"}:
        _fail("wigner", "unknown keys")
    cfg["wigner"] = wig
    grid = {**_DEFAULTS["grid"], **(cfg["grid"] or {})}
    if set(grid) - {"x_max", "n_points", "dt"}:
        _fail("grid", "unknown keys")
    try:
        GridSpec(x_max=grid["x_max"], n_points=grid["n_points"], dt=grid["dt"])
    except ConfigError as exc:
        _fail("grid", str(exc))
    cfg["grid"] = grid
    if not isinstance(cfg["dump_basis"], bool):
        _fail("dump_basis", "must be a boolean")
    if not isinstance(cfg["output_dir"], str) or not cfg["output_dir"]:
        _fail("output_dir", "must be a non-empty string")
    return ExperimentConfig(raw=cfg)


def load_preset(name: str) -> dict:
    """Read one of the checked-in preset config files."""
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    text = resources.files("qbouncer.presets").joinpath(f"{name}.json").read_text("utf-8")
    return json.loads(text)


def load_config_file(path) -> dict:
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")


def _snapshot_times(config: ExperimentConfig, scales: ScaledUnits) -> list[dict]:
    """Resolve snapshot requests to scaled times (and keep both views)."""
    program = config.program
    resolved = []
    for snap in config["wigner_snapshots"]:
        key, value = next(iter(snap.items()))
        if key == "t":
            t = float(value)
            if t > program.t_final:
                raise ConfigError(f"wigner snapshot time {t} beyond t_final")
        elif key == "omega_d":
            t = time_at_omega(program, float(value))
        else:  # omega_d_hz
            t = time_at_omega(program, 2.0 * math.pi * float(value) * scales.time_T)
        omega = float(omega_at(program, t))
        resolved.append(
            {
                "request": snap,
                "t": t,
                "omega_d": omega,
                "omega_d_hz": omega / (2.0 * math.pi * scales.time_T),
            }
        )
    return resolved


def _observables_csv(path: Path, records, scales: ScaledUnits, n_levels: int, solver: str) -> None:
    cols = ["solver", "t", "t_ms", "omega_d", "omega_d_hz"]
    cols += [f"P_{n}" for n in range(1, n_levels + 1)]
    cols += ["mean_n", "delta_n", "mean_energy", "mean_energy_pev", "h0_classical"]
    e0_pev = scales.energy_E0 / PEV
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for rec in records:
            row = [
                solver,
                _fmt(rec.t),
                _fmt(rec.t * scales.time_T * 1e3),
                _fmt(rec.omega_d),
                _fmt(rec.omega_d / (2.0 * math.pi * scales.time_T)),
            ]
            row += [_fmt(p) for p in rec.occupations]
            row += [
                _fmt(rec.mean_n),
                _fmt(rec.delta_n),
                _fmt(rec.mean_energy),
                _fmt(rec.mean_energy * e0_pev),
                _fmt(math.pi**2 / (8.0 * rec.omega_d**2)),
            ]
            fh.write(",".join(row) + "\n")


def _wigner_snapshot_json(path: Path, grid, scales: ScaledUnits, mean_energy: float) -> None:
    blob = {
        "schema_version": 1,
        "t": grid.t,
        "t_ms": grid.t * scales.time_T * 1e3,
        "omega_d": grid.omega_d,
        "omega_d_hz": grid.omega_d / (2.0 * math.pi * scales.time_T),
        "mean_energy": mean_energy,
        "classical_orbit": "p = sqrt(2*mean_energy - x)",
        "hbar_phase_space_area": 1.0,
        "xs": [float(v) for v in grid.xs],
        "ps": [float(v) for v in grid.ps],
        "w": [[float(v) for v in row] for row in grid.w],
    }
    path.write_text(json.dumps(blob, sort_keys=True, separators=(",", ":")), encoding="utf-8")


def run(config: ExperimentConfig, out_dir=None, quiet: bool = False) -> dict:
    """Execute an experiment and write its artifact tree.

    Returns the manifest dictionary.  Raises ConfigError before any output is
    written; on solver aborts a partial manifest with status "aborted" is
    still produced.
    """
    out = Path(out_dir if out_dir is not None else config["output_dir"])
    out.mkdir(parents=True, exist_ok=True)

    def say(msg: str) -> None:
        if not quiet:
            print(msg)

    constants = config.constants
    scales = derive_scales(constants)
    program = config.program
    snapshots = _snapshot_times(config, scales)

    manifest = {
        "schema_version": 1,
        "package_version": __version__,
        "config": config.raw,
        "scales": {
            "length_a_m": scales.length_a,
            "time_T_s": scales.time_T,
            "energy_E0_J": scales.energy_E0,
            "energy_E0_pev": scales.energy_E0 / PEV,
            "frequency_f0_hz": scales.frequency_f0,
        },
        "wigner_snapshot_times": snapshots,
        "outputs": [],
        "diagnostics": {},
        "status": "ok",
    }

    def emit_manifest() -> None:
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
        )

    basis = None
    try:
        if config["solver"] != "none" or config["dump_basis"] or snapshots:
            say(f"building eigenbasis (N = {config['n_basis']}) ...")
            basis = build_basis(config["n_basis"])
        if config["dump_basis"]:
            for p in dump_basis_csv(basis, out):
                manifest["outputs"].append(p.name)

        if config["solver"] in ("spectral", "both"):
            say(f"spectral propagation to t = {program.t_final} (dt = {config['dt']}) ...")
            result = propagate(
                basis,
                program,
                pure_state(config["n_basis"], config["initial_level"]),
                dt=config["dt"],
                sample_every=config["sample_every"],
                snapshot_times=[s["t"] for s in snapshots],
            )
            _observables_csv(
                out / "observables.csv", result.records, scales, config["n_basis"], "spectral"
            )
            manifest["outputs"].append("observables.csv")
            manifest["diagnostics"]["spectral_norm_drift"] = result.norm_drift
            for k, (snap_info, state) in enumerate(zip(snapshots, result.snapshots), start=1):
                wig_cfg = config["wigner"]
                xs = np.linspace(0.0, wig_cfg["x_max"], wig_cfg["n_points"])
                psi = wavefunction_on_grid(basis, state, xs)
                psi = psi / math.sqrt(float(np.sum(np.abs(psi) ** 2)) * (xs[1] - xs[0]))
                grid = wigner_transform(
                    psi, xs, p_max=wig_cfg["p_max"], t=state.t, omega_d=snap_info["omega_d"]
                )
                energy = float(
                    np.dot(basis.energies, np.abs(state.coeffs) ** 2)
                    / float(np.sum(np.abs(state.coeffs) ** 2))
                )
                name = f"wigner_{k}.json"
                _wigner_snapshot_json(out / name, grid, scales, energy)
                manifest["outputs"].append(name)

        if config["solver"] in ("grid", "both"):
            spec = GridSpec(**config["grid"])
            say(
                f"grid propagation to t = {program.t_final} "
                f"({spec.n_points} points, dt = {spec.dt}) ..."
            )
            sample_every = max(1, int(round(config["sample_every"] * config["dt"] / spec.dt)))
            gres = propagate_grid(
                init_from_level(basis, config["initial_level"], spec),
                program,
                spec,
                basis=basis,
                sample_every=sample_every,
            )
            _observables_csv(
                out / "observables_grid.csv", gres.records, scales, config["n_basis"], "grid"
            )
            manifest["outputs"].append("observables_grid.csv")
            manifest["diagnostics"]["grid_norm_drift"] = gres.norm_drift
            manifest["diagnostics"]["grid_tail_fraction"] = gres.max_tail_fraction

        mode = config["classical"]["mode"]
        if mode == "single-resonance":
            say("single-resonance classical run ...")
            cc = config["classical"]
            start = matched_start(config["epsilon"], program)
            sres = simulate_single_resonance(
                config["epsilon"],
                program,
                start,
                dt=cc["dt"],
                sample_every=cc["sample_every"],
                keep_cos_term=cc["keep_cos_term"],
            )
            with (out / "classical.csv").open("w", encoding="utf-8", newline="\n") as fh:
                fh.write("t,t_ms,action,phase_mismatch,omega_bounce,omega_d\n")
                for i in range(len(sres.ts)):
                    fh.write(
                        ",".join(
                            _fmt(v)
                            for v in (
                                sres.ts[i],
                                sres.ts[i] * scales.time_T * 1e3,
                                sres.actions[i],
                                sres.phases[i],
                                sres.omegas_bounce[i],
                                sres.omegas_drive[i],
                            )
                        )
                        + "\n"
                    )
            manifest["outputs"].append("classical.csv")
            manifest["diagnostics"]["classical_trapped"] = sres.trapped
            manifest["diagnostics"]["classical_max_abs_phase"] = sres.max_abs_phase
        elif mode == "bouncer-ensemble":
            say("bouncer ensemble run ...")
            cc = config["classical"]
            action = cc["initial_action"]
            if action is None:
                ground = basis.energies[0] if basis is not None else build_basis(1).energies[0]
                action = action_of_energy(float(ground))
            eres = bouncer_ensemble(
                config["epsilon"],
                program,
                action,
                n_particles=cc["size"],
                dt=cc["dt"],
                sample_every=cc["sample_every"],
            )
            with (out / "classical_ensemble.csv").open("w", encoding="utf-8", newline="\n") as fh:
                fh.write("t,t_ms,omega_d,h0_mean,h0_std,h0_classical\n")
                for i in range(len(eres.ts)):
                    fh.write(
                        ",".join(
                            _fmt(v)
                            for v in (
                                eres.ts[i],
                                eres.ts[i] * scales.time_T * 1e3,
                                eres.omegas_drive[i],
                                eres.h0_mean[i],
                                eres.h0_std[i],
                                math.pi**2 / (8.0 * eres.omegas_drive[i] ** 2),
                            )
                        )
                        + "\n"
                    )
            manifest["outputs"].append("classical_ensemble.csv")
            manifest["diagnostics"]["ensemble_initial_action"] = action
            manifest["diagnostics"]["ensemble_mean_bounces"] = float(eres.bounce_counts.mean())
    except PropagationError as exc:
        manifest["status"] = "aborted"
        manifest["error"] = str(exc)
        emit_manifest()
        raise

    emit_manifest()
    say(f"artifacts written to {out}")
    return manifest


# ---------------------------------------------------------------------------
# Command line interface.


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbouncer",
        description="Chirped-drive excitation of the quantum bouncer: run experiments "
        "and verify the acceptance suite.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a preset or config file")
    run_p.add_argument("--preset", choices=PRESET_NAMES, help="checked-in experiment preset")
    run_p.add_argument("--config", help="path to a JSON config file")
    run_p.add_argument("--out", help="output directory (overrides config output_dir)")
    run_p.add_argument("--solver", choices=SOLVERS, help="override the solver choice")
    run_p.add_argument("--quiet", action="store_true", help="suppress progress output")

    ver_p = sub.add_parser("verify", help="run acceptance checks and print pass/fail lines")
    ver_p.add_argument(
        "target",
        nargs="?",
        default="all",
        help="'all' (default), a criterion subset like 'eigenbasis'/'units', or a preset name",
    )
    ver_p.add_argument("--config", help="verify a custom config (reduced checks)")
    ver_p.add_argument("--quick", action="store_true", help="reduced-scale subset of the suite")
    ver_p.add_argument("--quiet", action="store_true", help="only print the final summary")

    args = parser.parse_args(argv)

    if args.command == "run":
        if bool(args.preset) == bool(args.config):
            parser.error("exactly one of --preset or --config is required")
        try:
            data = load_preset(args.preset) if args.preset else load_config_file(args.config)
            config = resolve_config(data)
            run(config, out_dir=args.out, quiet=args.quiet)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except PropagationError as exc:
            print(f"solver abort: {exc}", file=sys.stderr)
            return 2
        return 0

    from .acceptance import run_verification

    try:
        results = run_verification(
            target=args.target, config_path=args.config, quick=args.quick, quiet=args.quiet
        )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
