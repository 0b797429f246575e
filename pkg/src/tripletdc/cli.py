"""Command line front end.

Subcommands: threshold, simulate, steady-scan, spectrum, mcwf-compare, kappa,
fluctuation-check. Every data-producing command writes one CSV plus a JSON
manifest with the resolved config, seed, version, wall time and checksums.
Column orders are fixed; see the README table. Exit codes: 0 success, 2 bad
configuration or arguments, 3 failed mcwf-compare verdict, 1 anything else.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from tripletdc import config as cfgmod
from tripletdc.ensemble import (EnsembleConfig, quadrature_statistics,
                                run_ensemble, transition_region_flag)
from tripletdc.exceptions import ConfigurationError, InvalidParameterError, TripletDCError
from tripletdc.mcwf import OBSERVABLES, compare_methods, mcwf_ensemble
from tripletdc.nonlinearity import (ModeProfileGrid, estimate_kappa,
                                    gaussian_sigma, modal_overlap)
from tripletdc.semiclassical import (SystemParams, integrate_semiclassical,
                                     pump_threshold, steady_state_branches)
from tripletdc.spectra import (drift_matrix, diffusion_matrix, duan_simon,
                               make_omega_grid, output_covariances,
                               quadrature_spectrum, select_operating_point,
                               spectrum_matrix)

SIMULATE_HEADER = ["t", "na_mean", "na_stderr", "nb_mean", "nb_stderr",
                   "Xa_mean", "Ya_mean", "dXa", "dYa",
                   "Xb_mean", "Yb_mean", "dXb", "dYb", "n_diverged"]
SC_TRACE_HEADER = ["sc_na", "sc_nb"]
SCAN_HEADER = ["epsilon_b", "epsilon_a", "alpha0", "branch",
               "branch_alpha_abs", "branch_beta_abs", "branch_stable",
               "sde_abs_alpha_mean", "sde_abs_alpha_stderr",
               "sde_na_mean", "sde_na_stderr", "flagged", "valid"]
SPECTRUM_HEADER = ["omega", "V_Xa", "V_Ya", "V_Xb", "V_Yb",
                   "C_XaXb", "C_YaYb", "DS_plus", "DS_minus", "valid"]
FLUCT_HEADER = ["parameter", "value", "mean_Xa", "delta_Xa", "mean_Ya", "delta_Ya",
                "mean_Xb", "delta_Xb", "mean_Yb", "delta_Yb",
                "ratio_a", "ratio_b", "flagged"]


def _mcwf_header():
    cols = ["t"]
    for name in OBSERVABLES:
        cols += [f"mcwf_{name}", f"mcwf_{name}_stderr",
                 f"sde_{name}", f"sde_{name}_stderr", f"z_{name}"]
    return cols


def _effective_config(args) -> dict:
    cfg = cfgmod.load_config(args.config)
    cfg = cfgmod.apply_overrides(cfg, args.set)
    if getattr(args, "full_scale", False):
        cfg["ensemble"]["n_traj"] = 1_000_000
    if args.seed is not None:
        cfg["ensemble"]["master_seed"] = int(args.seed)
    if args.backend is not None:
        cfg["ensemble"]["backend"] = args.backend
    if getattr(args, "semiclassical", False):
        cfg["output"]["semiclassical_trace"] = True
    return cfg


def _out_path(args, cfg, suffix: str) -> str:
    if args.out:
        return args.out
    out = cfg["output"]
    return os.path.join(out["dir"], f"{out['prefix']}-{suffix}.csv")


def _scan_variants(cfg, name, value):
    """(params, schedule, initial) with the scanned parameter replaced."""
    sys_cfg = dict(cfg["system"])
    drv_cfg = dict(cfg["drive"])
    ini_cfg = dict(cfg["initial"])
    if name == "epsilon_b":
        sys_cfg["epsilon_b"], sys_cfg["epsilon_b_im"] = float(value), 0.0
    elif name == "epsilon_a":
        drv_cfg["epsilon_a"], drv_cfg["epsilon_a_im"] = float(value), 0.0
    else:
        ini_cfg["alpha_re"], ini_cfg["alpha_im"] = float(value), 0.0
    sub = dict(cfg)
    sub["system"], sub["drive"], sub["initial"] = sys_cfg, drv_cfg, ini_cfg
    return (cfgmod.system_params(sub), cfgmod.drive_schedule(sub),
            cfgmod.initial_point(sub))


def cmd_threshold(args) -> int:
    cfg = _effective_config(args)
    params = cfgmod.system_params(cfg)
    value = pump_threshold(params)
    print(f"pump threshold: epsilon_b = {value!r} (inverse-time units of the rates)")
    return 0


def cmd_simulate(args) -> int:
    cfg = _effective_config(args)
    t0 = time.perf_counter()
    seed = cfgmod.resolve_seed(cfg)
    params = cfgmod.system_params(cfg)
    schedule = cfgmod.drive_schedule(cfg)
    initial = cfgmod.initial_point(cfg)
    econf = cfgmod.ensemble_config(cfg, seed)
    series = run_ensemble(params, schedule, econf, initial)

    header = list(SIMULATE_HEADER)
    widths = {q: series.quadrature_width(q) for q in ("Xa", "Ya", "Xb", "Yb")}
    trace = None
    if cfg["output"]["semiclassical_trace"]:
        sc = integrate_semiclassical(params, schedule, alpha0=initial.alpha,
                                     beta0=initial.beta,
                                     t_final=float(series.times[-1]),
                                     t_eval=series.times)
        trace = (np.abs(sc.alpha) ** 2, np.abs(sc.beta) ** 2)
        header += SC_TRACE_HEADER

    rows = []
    for i, t in enumerate(series.times):
        row = [float(t),
               series.real_mean("na")[i], series.sem_re["na"][i],
               series.real_mean("nb")[i], series.sem_re["nb"][i],
               series.real_mean("Xa")[i], series.real_mean("Ya")[i],
               widths["Xa"][i], widths["Ya"][i],
               series.real_mean("Xb")[i], series.real_mean("Yb")[i],
               widths["Xb"][i], widths["Yb"][i],
               series.n_diverged]
        if trace is not None:
            row += [trace[0][i], trace[1][i]]
        rows.append(row)

    path = _out_path(args, cfg, "simulate")
    cfgmod.write_csv(path, header, rows)
    cfgmod.write_manifest(path, cfg, seed, time.perf_counter() - t0,
                          extra={"n_diverged": series.n_diverged,
                                 "n_kept": series.n_kept, "valid": series.valid})
    if not series.valid:
        print(f"warning: {series.n_diverged}/{series.n_traj} trajectories diverged;"
              " run flagged invalid", file=sys.stderr)
    print(f"wrote {path} ({len(rows)} rows, {series.n_diverged} diverged)")
    return 0


def cmd_steady_scan(args) -> int:
    cfg = _effective_config(args)
    t0 = time.perf_counter()
    seed = cfgmod.resolve_seed(cfg)
    name, values = cfgmod.scan_values(cfg)
    econf = cfgmod.ensemble_config(cfg, seed)
    rows = []
    total_diverged = 0
    for value in values:
        params, schedule, initial = _scan_variants(cfg, name, value)
        series, snapshot = run_ensemble(params, schedule, econf, initial,
                                        return_snapshot=True)
        total_diverged += series.n_diverged
        flagged = transition_region_flag(quadrature_statistics(snapshot))
        sde = [series.real_mean("abs_a")[-1], series.sem_re["abs_a"][-1],
               series.real_mean("na")[-1], series.sem_re["na"][-1]]
        for sol in steady_state_branches(params):
            if sol.phase_index != 0:
                continue
            rows.append([float(np.real(params.epsilon_b)),
                         float(np.real(schedule.epsilon_a)),
                         abs(initial.alpha), sol.branch,
                         abs(sol.alpha_s), abs(sol.beta_s), sol.stable,
                         *sde, flagged, series.valid])
    path = _out_path(args, cfg, "steady-scan")
    cfgmod.write_csv(path, SCAN_HEADER, rows)
    cfgmod.write_manifest(path, cfg, seed, time.perf_counter() - t0,
                          extra={"n_diverged": total_diverged,
                                 "scan_parameter": name})
    print(f"wrote {path} ({len(rows)} rows over {len(values)} scan points)")
    return 0


def _spectrum_rows(params, cfg, omegas, valid):
    sol = select_operating_point(params)
    A = drift_matrix(sol, params)
    D = diffusion_matrix(sol, params)
    S = spectrum_matrix(A, D, omegas)
    out = output_covariances(quadrature_spectrum(S), omegas, params,
                             b_lo_flip=bool(cfg["spectrum"]["b_lo_flip"]))
    ds = duan_simon(out)
    rows = []
    for i, w in enumerate(omegas):
        rows.append([float(w), out.V_Xa[i], out.V_Ya[i], out.V_Xb[i], out.V_Yb[i],
                     out.C_XaXb[i], out.C_YaYb[i],
                     ds.ds_plus[i], ds.ds_minus[i], valid])
    return rows


def _validity_from_fluctuations(cfg, params, schedule, initial, seed) -> bool:
    # the trivial branch is exactly linear (vanishing diffusion), so the
    # large-relative-fluctuation gate only applies to non-trivial operating
    # points; below threshold the spectra are valid by construction
    if select_operating_point(params).branch == "trivial":
        return True
    sp = cfg["spectrum"]
    econf = EnsembleConfig(
        n_traj=int(sp["check_n_traj"]), t_final=float(sp["check_t_final"]),
        dt=float(cfg["ensemble"]["dt"]),
        sample_stride=int(cfg["ensemble"]["sample_stride"]),
        master_seed=seed, batch_size=int(cfg["ensemble"]["batch_size"]),
        backend=cfg["ensemble"].get("backend"))
    _, snapshot = run_ensemble(params, schedule, econf, initial, return_snapshot=True)
    return not transition_region_flag(quadrature_statistics(snapshot))


def cmd_spectrum(args) -> int:
    cfg = _effective_config(args)
    t0 = time.perf_counter()
    seed = cfgmod.resolve_seed(cfg)
    sp = cfg["spectrum"]
    omegas = make_omega_grid(float(sp["omega_max"]), int(sp["n_linear"]),
                             int(sp["n_log"]))
    check = bool(sp["check_validity"]) or args.check_validity
    if args.scan:
        name, values = cfgmod.scan_values(cfg)
        if name != "epsilon_b":
            raise ConfigurationError("spectrum --scan only scans epsilon_b")
        rows = []
        for value in values:
            params, schedule, initial = _scan_variants(cfg, name, value)
            valid = (_validity_from_fluctuations(cfg, params, schedule, initial, seed)
                     if check else True)
            rows += [[value] + r for r in _spectrum_rows(params, cfg, omegas, valid)]
        header = ["epsilon_b"] + SPECTRUM_HEADER
        suffix = "spectrum-surface"
    else:
        params = cfgmod.system_params(cfg)
        schedule = cfgmod.drive_schedule(cfg)
        initial = cfgmod.initial_point(cfg)
        valid = (_validity_from_fluctuations(cfg, params, schedule, initial, seed)
                 if check else True)
        rows = _spectrum_rows(params, cfg, omegas, valid)
        header = SPECTRUM_HEADER
        suffix = "spectrum"
    path = _out_path(args, cfg, suffix)
    cfgmod.write_csv(path, header, rows)
    cfgmod.write_manifest(path, cfg, seed, time.perf_counter() - t0)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_mcwf_compare(args) -> int:
    cfg = _effective_config(args)
    t0 = time.perf_counter()
    seed = cfgmod.resolve_seed(cfg)
    params = cfgmod.system_params(cfg)
    schedule = cfgmod.drive_schedule(cfg)
    initial = cfgmod.initial_point(cfg)
    fock = cfgmod.fock_config(cfg, seed)
    econf = cfgmod.ensemble_config(cfg, seed)

    mseries = mcwf_ensemble(params, schedule, fock,
                            initial=(initial.alpha, initial.beta))
    sseries = run_ensemble(params, schedule, econf, initial)
    result = compare_methods(mseries, sseries)

    rows = []
    for k, t in enumerate(result.times):
        i = int(np.argmin(np.abs(mseries.times - t)))
        j = int(np.argmin(np.abs(sseries.times - t)))
        row = [float(t)]
        for name in OBSERVABLES:
            row += [mseries.mean[name][i], mseries.sem[name][i],
                    sseries.mean[name].real[j], sseries.sem_re[name][j],
                    result.z[name][k]]
        rows.append(row)

    path = _out_path(args, cfg, "mcwf-compare")
    cfgmod.write_csv(path, _mcwf_header(), rows)
    threshold = float(cfg["mcwf"]["z_threshold"])
    passed = result.mean_abs_z < threshold
    cfgmod.write_manifest(path, cfg, seed, time.perf_counter() - t0,
                          extra={"mean_abs_z": result.mean_abs_z,
                                 "max_abs_z": result.max_abs_z,
                                 "n_points": result.n_points,
                                 "cutoff_leak": mseries.cutoff_leak,
                                 "verdict": "pass" if passed else "fail"})
    print(f"{'PASS' if passed else 'FAIL'}: mean|z| = {result.mean_abs_z:.3f},"
          f" max|z| = {result.max_abs_z:.3f} over {result.n_points} points"
          f" (threshold {threshold})")
    print(f"wrote {path}")
    return 0 if passed else 3


def cmd_kappa(args) -> int:
    cfg = _effective_config(args)
    kc = cfg["kappa"]
    geom = cfgmod.material_geometry(cfg)
    if "profile_a" in kc and "profile_b" in kc:
        sigma = modal_overlap(ModeProfileGrid.from_file(kc["profile_a"]),
                              ModeProfileGrid.from_file(kc["profile_b"]))
        source = "mode profile overlap"
    elif "w_a" in kc and "w_b" in kc:
        sigma = gaussian_sigma(float(kc["w_a"]), float(kc["w_b"]))
        source = "Gaussian waists"
    else:
        sigma = float(kc["sigma"])
        source = "configured value"
    kappa = estimate_kappa(geom, sigma)
    print(f"sigma = {sigma!r} 1/m^2 ({source})")
    print(f"kappa = {kappa!r} 1/s")
    if kappa == 0.0:
        print(f"selection rule m_b = 3 m_a not met (m_a={geom.m_a}, m_b={geom.m_b})")
    else:
        gamma_ref = float(kc["gamma_a_ref"])
        print(f"kappa / gamma_a = {kappa / gamma_ref!r} with gamma_a = {gamma_ref!r} 1/s")
    return 0


def cmd_fluctuation_check(args) -> int:
    cfg = _effective_config(args)
    t0 = time.perf_counter()
    seed = cfgmod.resolve_seed(cfg)
    name, values = cfgmod.scan_values(cfg)
    econf = cfgmod.ensemble_config(cfg, seed)
    rows = []
    for value in values:
        params, schedule, initial = _scan_variants(cfg, name, value)
        _, snapshot = run_ensemble(params, schedule, econf, initial,
                                   return_snapshot=True)
        st = quadrature_statistics(snapshot)
        rows.append([name, float(value),
                     st.mean_Xa, st.delta_Xa, st.mean_Ya, st.delta_Ya,
                     st.mean_Xb, st.delta_Xb, st.mean_Yb, st.delta_Yb,
                     st.ratio_a, st.ratio_b, transition_region_flag(st)])
    path = _out_path(args, cfg, "fluctuation-check")
    cfgmod.write_csv(path, FLUCT_HEADER, rows)
    cfgmod.write_manifest(path, cfg, seed, time.perf_counter() - t0,
                          extra={"scan_parameter": name})
    flagged = sum(1 for r in rows if r[-1])
    print(f"wrote {path} ({flagged}/{len(rows)} scan points flagged)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a config value (repeatable)")
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--backend", choices=["numba", "numpy"],
                        help="trajectory kernel path")
    common.add_argument("--full-scale", action="store_true",
                        help="raise the ensemble to 1e6 trajectories")

    parser = argparse.ArgumentParser(
        prog="tripletdc",
        description="Stochastic and wave-function simulation of intracavity "
                    "triplet down conversion (3w -> w+w+w)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("threshold", parents=[common],
                   help="print the pump amplitude threshold").set_defaults(fn=cmd_threshold)

    p = sub.add_parser("simulate", parents=[common],
                       help="trajectory ensemble time series to CSV")
    p.add_argument("--semiclassical", action="store_true",
                   help="append a mean-field trace (sc_na, sc_nb columns)")
    p.set_defaults(fn=cmd_simulate)

    sub.add_parser("steady-scan", parents=[common],
                   help="branch structure and ensemble steady state over a scan"
                   ).set_defaults(fn=cmd_steady_scan)

    p = sub.add_parser("spectrum", parents=[common],
                       help="output quadrature spectra and two-mode witnesses")
    p.add_argument("--scan", action="store_true",
                   help="scan epsilon_b from [scan] into one surface CSV")
    p.add_argument("--check-validity", action="store_true",
                   help="set the valid column from a fluctuation ensemble")
    p.set_defaults(fn=cmd_spectrum)

    sub.add_parser("mcwf-compare", parents=[common],
                   help="cross-validate trajectory ensembles against the "
                        "wave-function method").set_defaults(fn=cmd_mcwf_compare)

    sub.add_parser("kappa", parents=[common],
                   help="estimate the coupling rate from material data"
                   ).set_defaults(fn=cmd_kappa)

    sub.add_parser("fluctuation-check", parents=[common],
                   help="flag scan regions with large relative fluctuations"
                   ).set_defaults(fn=cmd_fluctuation_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigurationError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TripletDCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
