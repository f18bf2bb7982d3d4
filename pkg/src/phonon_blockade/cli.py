"""Command-line pipelines: figure-style runs, sweeps, protocol and reports.

Exit codes: 0 success, 2 configuration error, 3 integrator abort,
4 a regime or oracle check failed.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import _kernels
from .config import ConfigError, RunConfig, apply_overrides, config_hash, emit_config, parse_config
from .dynamics import IntegratorAbort, LindbladSpec, evolve, run_adiabatic_sweep
from .fock import annihilation, thermal_state
from .model import build_effective_hamiltonian, check_regime, derive
from .observables import find_g2_minimum
from .oracle import run_all
from .svgplot import emit_plot
from .tables import ResultTable, REPORT_HEADER, fmt, oracle_rows, regime_rows, sweep_table, trajectory_table, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATOR = 3
EXIT_CHECK_FAILED = 4

SUMMARY_HEADER = ("label", "n_th", "omega_tilde_kHz", "t_min_ms", "g2_min", "p1_at_tmin",
                  "p1_max", "t_p1max_ms", "g2_at_tmax", "interior_minimum",
                  "max_trace_err", "min_eigenvalue", "max_top_pop")


def _provenance(cfg: RunConfig, derived, regime) -> list[str]:
    n_fail = sum(1 for r in regime if not r.passed)
    lines = [
        f"config_hash={config_hash(cfg)}",
        f"g_nl_kHz={derived.g_nl!r} gamma_kHz={derived.gamma_total!r} "
        f"omega_tilde_kHz={derived.omega_tilde!r}",
        f"regime_pass={len(regime.rows) - n_fail}/{len(regime.rows)}"
        + ("" if n_fail == 0 else " failing=" + ";".join(r.name for r in regime if not r.passed)),
    ]
    return lines


def _point_label(n_th: float, ratio: float) -> str:
    return f"nth{n_th:g}_drive{ratio:g}"


def _hamiltonian_with_drive(d, cutoff: int, omega_tilde: float):
    """Effective Hamiltonian with an explicit dark-mode drive (kHz)."""
    return build_effective_hamiltonian(replace(d, omega_tilde=omega_tilde), cutoff, drive_on=True)


def _run_point(cfg: RunConfig, n_th: float, drive_ratio: float, out: Path,
               backend: str | None) -> tuple:
    """One master-equation run; writes its own CSV/SVG, returns a summary row."""
    params = cfg.physical()
    d = derive(params)
    regime = check_regime(d)
    omega_tilde = drive_ratio * d.g_nl
    h = _hamiltonian_with_drive(d, cfg.cutoff, omega_tilde)
    spec = LindbladSpec(hamiltonian=h, jump_down=annihilation(cfg.cutoff),
                        gamma=d.gamma_total, n_th=n_th)
    rho0 = thermal_state(n_th, cfg.cutoff)
    t_max = cfg.t_max / d.g_nl
    try:
        traj = evolve(rho0, spec, t_max, cfg.samples, time_scale=d.g_nl, backend=backend)
    except IntegratorAbort as e:
        raise IntegratorAbort(f"point {_point_label(n_th, drive_ratio)}: {e}") from e
    table = trajectory_table(traj)
    label = _point_label(n_th, drive_ratio)
    prov = _provenance(cfg, d, regime) + [f"point n_th={n_th!r} omega_tilde_kHz={omega_tilde!r}"]
    write_csv(out / f"sim_{label}.csv", table, prov)
    emit_plot(table, out / f"sim_{label}.svg")

    g2min = find_g2_minimum(traj)
    ip1 = int(max(range(len(traj.p1)), key=lambda i: traj.p1[i]))
    g2_end = float(traj.g2[-1])
    return (
        label, n_th, omega_tilde,
        g2min.t_min, g2min.g2_min, g2min.p1_at_tmin,
        float(traj.p1[ip1]), float(traj.times_ms[ip1]),
        g2_end, g2_end > g2min.g2_min,
        float(traj.trace_err.max()), float(traj.min_eig.min()), float(traj.top_pop.max()),
    )


def _run_points(cfg: RunConfig, points: list[tuple[float, float]], out: Path,
                backend: str | None, workers: int) -> list[tuple]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_point, cfg, n, r, out, backend) for n, r in points]
            return [f.result() for f in futures]
    return [_run_point(cfg, n, r, out, backend) for n, r in points]


def _write_summary(out: Path, rows: list[tuple], provenance: list[str]) -> None:
    write_csv(out / "summary.csv", ResultTable(SUMMARY_HEADER, tuple(rows)), provenance)


def _write_regime(cfg: RunConfig, derived, out: Path):
    regime = check_regime(derived)
    table = ResultTable(REPORT_HEADER, tuple(regime_rows(regime)))
    write_csv(out / "regime.csv", table, _provenance(cfg, derived, regime))
    return regime


def cmd_simulate(cfg: RunConfig, out: Path, backend: str | None, workers: int) -> int:
    d = derive(cfg.physical())
    regime = _write_regime(cfg, d, out)
    ratio = d.omega_tilde / d.g_nl
    rows = _run_points(cfg, [(cfg.n_th, ratio)], out, backend, workers)
    _write_summary(out, rows, _provenance(cfg, d, regime))
    return EXIT_OK


def cmd_sweep_thermal(cfg: RunConfig, out: Path, backend: str | None, workers: int) -> int:
    d = derive(cfg.physical())
    regime = _write_regime(cfg, d, out)
    ratio = d.omega_tilde / d.g_nl
    rows = _run_points(cfg, [(n, ratio) for n in cfg.n_th_sweep], out, backend, workers)
    _write_summary(out, rows, _provenance(cfg, d, regime))
    return EXIT_OK


def cmd_sweep_drive(cfg: RunConfig, out: Path, backend: str | None, workers: int) -> int:
    d = derive(cfg.physical())
    regime = _write_regime(cfg, d, out)
    rows = _run_points(cfg, [(cfg.n_th, r) for r in cfg.drive_sweep], out, backend, workers)
    _write_summary(out, rows, _provenance(cfg, d, regime))
    return EXIT_OK


def cmd_adiabatic(cfg: RunConfig, out: Path, backend: str | None) -> int:
    d = derive(cfg.physical())
    regime = _write_regime(cfg, d, out)
    velocity = cfg.sweep_velocity * d.g13_tilde          # 1/ms
    t_end = cfg.sweep_t_end / d.g13_tilde                # ms
    damping = d.gamma_p if cfg.sweep_phonon_decay else 0.0
    res = run_adiabatic_sweep(d, velocity, t_end, n_samples=cfg.samples,
                              phonon_damping=damping, dwell=cfg.dwell_ms, backend=backend)
    prov = _provenance(cfg, d, regime) + [
        f"velocity_per_ms={velocity!r} t_end_ms={t_end!r} dwell_ms={cfg.dwell_ms!r} "
        f"phonon_damping_kHz={damping!r}",
    ]
    table = sweep_table(res)
    write_csv(out / "adiabatic.csv", table, prov)
    emit_plot(table, out / "adiabatic.svg", x_column="t_ms",
              observables=("omega_d_kHz", "phonon_fraction", "dark_pop", "bright_leak"))
    inv_gamma_p = 1.0 / d.gamma_p
    summary = ResultTable(
        ("final_phonon_fraction", "final_dark_pop", "final_bright_leak",
         "state_phonon_prob", "survival", "t_end_ms", "inv_gamma_p_ms", "t_end_gamma_p_ratio"),
        ((float(res.phonon_fraction[-1]), float(res.dark_pop[-1]), float(res.bright_leak[-1]),
          res.state_phonon_prob, res.survival, t_end + cfg.dwell_ms, inv_gamma_p,
          (t_end + cfg.dwell_ms) / inv_gamma_p),),
    )
    write_csv(out / "adiabatic_summary.csv", summary, prov)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out: Path) -> int:
    d = derive(cfg.physical())
    reports = run_all(d)
    table = ResultTable(REPORT_HEADER, tuple(oracle_rows(reports)))
    write_csv(out / "oracle.csv", table, _provenance(cfg, d, check_regime(d)))
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"{status:4s}  {r.check:32s} analytic={fmt(r.analytic):>24s} "
              f"numeric={fmt(r.numeric):>24s} rel_dev={r.rel_dev:.3e}  [{r.dims}]")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


def cmd_check_regime(cfg: RunConfig, out: Path) -> int:
    d = derive(cfg.physical())
    regime = _write_regime(cfg, d, out)
    for r in regime:
        status = "pass" if r.passed else "FAIL"
        print(f"{status:4s}  {r.name:28s} lhs={r.lhs:14.6g} rhs={r.rhs:14.6g} "
              f"ratio={r.ratio:10.4g} threshold={r.threshold:g}")
    return EXIT_OK if regime.all_pass else EXIT_CHECK_FAILED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-blockade",
        description="Dark-polariton blockade simulator: master-equation runs, "
                    "adiabatic phonon conversion, regime and oracle reports.",
    )
    parser.add_argument("--config", type=Path, default=None, help="key = value config file")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    parser.add_argument("--cutoff", type=int, default=None, help="Fock truncation")
    parser.add_argument("--tmax", type=float, default=None, help="time window in units of 1/g_nl")
    parser.add_argument("--samples", type=int, default=None, help="sample intervals")
    parser.add_argument("--backend", choices=_kernels.BACKENDS, default=None,
                        help="kernel flavor (default: numba when available)")
    parser.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    parser.add_argument("--print-config", action="store_true",
                        help="print the canonical resolved config and exit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep-thermal", "sweep-drive", "adiabatic", "oracle", "check-regime"):
        sub.add_parser(name)
    return parser


def _load_config(args) -> RunConfig:
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    cfg = parse_config(text)
    sets = list(args.set)
    if args.cutoff is not None:
        sets.append(f"cutoff={args.cutoff}")
    if args.tmax is not None:
        sets.append(f"t_max={args.tmax}")
    if args.samples is not None:
        sets.append(f"samples={args.samples}")
    if sets:
        cfg = apply_overrides(cfg, sets)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        print(emit_config(cfg), end="")
        return EXIT_OK
    out = args.out if args.out is not None else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.backend, args.workers)
        if args.command == "sweep-thermal":
            return cmd_sweep_thermal(cfg, out, args.backend, args.workers)
        if args.command == "sweep-drive":
            return cmd_sweep_drive(cfg, out, args.backend, args.workers)
        if args.command == "adiabatic":
            return cmd_adiabatic(cfg, out, args.backend)
        if args.command == "oracle":
            return cmd_oracle(cfg, out)
        if args.command == "check-regime":
            return cmd_check_regime(cfg, out)
        raise AssertionError(f"unhandled command {args.command}")
    except IntegratorAbort as e:
        print(f"integrator abort: {e}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
