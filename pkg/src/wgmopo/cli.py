"""Command-line front end: ``wgmopo <command> [--config FILE] [--out DIR] ...``.

Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure,
4 nothing found (no phase match in the requested window).
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import load_config
from .correlation import bandwidth_from_time, fit_histogram, load_histogram
from .dispersion import C, ResonatorGeometry, eigenfrequency, find_azimuthal_number, free_spectral_range, ModeIndex
from .errors import ConfigError, DomainError, NotFoundError, NumericalError, RangeError
from .io import provenance, write_json, write_table
from .material import load_material
from .opo import external_rates, output_power, pair_rate_internal, threshold
from .phasematch import operating_point, scan_channels, scan_radius_wavelength, step_tuning
from .tuning import electrooptic_mechanism, load_mechanism, null_mechanism, reach, retune

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NOT_FOUND = 0, 2, 3, 4

CHANNEL_HEADER = [
    "channel", "q_s", "q_i", "p_s", "p_i", "m_p", "m_s", "m_i",
    "T_raw_C", "T_cal_C", "lambda_s_nm", "lambda_i_nm", "residual_Hz",
]


class Context:
    """Resolved configuration, material and geometry for one invocation."""

    def __init__(self, args, command):
        overrides = {
            ("material", "path"): args.material,
            ("output", "dir"): args.out,
            ("output", "threads"): args.threads,
            ("output", "format"): args.format,
        }
        self.cfg = load_config(args.config, overrides=overrides)
        try:
            self.mat = load_material(self.cfg.material_path)
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        g = self.cfg.geometry
        self.geom = ResonatorGeometry(g.R_mm * 1e-3, g.rho_mm * 1e-3, g.h_mm * 1e-3, g.T_ref_C)
        self.lam_p = self.cfg.lambda_p_nm * 1e-9
        self.prov = provenance(command, self.cfg.sha256, self.mat.digest)

    def table(self, stem, header, rows, extra=None):
        return write_table(self.cfg.out_dir, stem, header, rows, self.prov, self.cfg.format, extra)

    def json(self, stem, payload):
        return write_json(self.cfg.out_dir, stem, payload, self.prov)


def _solution_record(sol):
    t = sol.triplet
    return {
        "m_p": t.pump.m, "m_s": t.signal.m, "m_i": t.idler.m,
        "q_p": t.pump.q, "q_s": t.signal.q, "q_i": t.idler.q,
        "p_p": t.pump.p, "p_s": t.signal.p, "p_i": t.idler.p,
        "T_raw_C": sol.T_raw, "T_cal_C": sol.T_cal,
        "nu_p_Hz": sol.nu_p, "nu_s_Hz": sol.nu_s, "nu_i_Hz": sol.nu_i,
        "lambda_p_nm": sol.lambda_p * 1e9, "lambda_s_nm": sol.lambda_s * 1e9, "lambda_i_nm": sol.lambda_i * 1e9,
        "residual_Hz": sol.residual,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(ctx):
    """Modes of the configured polarization over a window starting at the pump frequency."""
    sp = ctx.cfg.spectrum
    nu0 = C / ctx.lam_p
    fsr = None
    rows = []
    for q in range(1, sp.q_max + 1):
        for p in range(0, sp.p_max + 1):
            m, _ = find_azimuthal_number(ctx.geom, ctx.mat, nu0, q, p, sp.pol, sp.T_C)
            if fsr is None:
                fsr = free_spectral_range(ctx.geom, ctx.mat, ModeIndex(m, q, p, sp.pol), sp.T_C)
            span = sp.span_fsr * fsr
            cand = np.arange(m - int(sp.span_fsr) - 2, m + int(sp.span_fsr) + 3)
            nu = eigenfrequency(ctx.geom, ctx.mat, cand, q, p, sp.pol, sp.T_C)
            for mm, f in zip(cand, nu):
                if nu0 <= f < nu0 + span:
                    rows.append({
                        "nu_Hz": float(f), "detuning_GHz": (float(f) - nu0) / 1e9, "lambda_nm": C / f * 1e9,
                        "m": int(mm), "q": q, "p": p, "pol": sp.pol,
                    })
    rows.sort(key=lambda r: (r["nu_Hz"], r["q"], r["p"]))
    ctx.table("spectrum", ["nu_Hz", "detuning_GHz", "lambda_nm", "m", "q", "p", "pol"], rows,
              {"fsr_Hz": fsr, "T_C": sp.T_C})
    return EXIT_OK


def cmd_channels(ctx):
    sc = ctx.cfg.scan
    window = (sc.T_min_C, sc.T_max_C)
    if sc.temperature_scale == "calibrated":
        window = tuple(float(ctx.mat.calibration.invert(t)) for t in window)
    curves = scan_channels(ctx.geom, ctx.mat, ctx.lam_p, list(sc.channels), window,
                           sc.T_step_C, sc.window_K, ctx.cfg.threads)
    rows = []
    for curve in curves:
        ch = curve.channel
        for s in curve.samples:
            t = s.triplet
            rows.append({
                "channel": ch.label, "q_s": ch.q_s, "q_i": ch.q_i, "p_s": ch.p_s, "p_i": ch.p_i,
                "m_p": t.pump.m, "m_s": t.signal.m, "m_i": t.idler.m, "T_raw_C": s.T_raw, "T_cal_C": s.T_cal,
                "lambda_s_nm": s.lambda_s * 1e9, "lambda_i_nm": s.lambda_i * 1e9, "residual_Hz": s.residual,
            })
    ctx.table("channels", CHANNEL_HEADER, rows)
    if sc.channels and not rows:
        print("no phase-matched triplet in the scan window", file=sys.stderr)
        return EXIT_NOT_FOUND
    return EXIT_OK


def _map_one(args):
    geom, mat, mode, value, targets, lam_p, T_range, T_step = args
    return scan_radius_wavelength(geom, mat, mode, [value], targets, lam_p, T_range, T_step=T_step)[0]


def cmd_map(ctx):
    mc = ctx.cfg.map
    values = [v * 1e-3 for v in mc.R_mm] if mc.mode == "radius" else [v * 1e-9 for v in mc.lambda_nm]
    targets = sorted(ctx.cfg.targets.items())
    jobs = [(ctx.geom, ctx.mat, mc.mode, v, targets, ctx.lam_p, (mc.T_min_C, mc.T_max_C), mc.T_step_C)
            for v in values]
    if ctx.cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ctx.cfg.threads) as ex:
            entries = list(ex.map(_map_one, jobs))
    else:
        entries = [_map_one(j) for j in jobs]
    cal = ctx.mat.calibration.apply
    summary, curves = [], []
    names = [n for n, _ in targets]
    for e in entries:
        row = {"R_mm": e.R * 1e3, "lambda_p_nm": e.lam_p * 1e9,
               "T_deg_raw_C": e.T_degenerate, "T_deg_cal_C": None if e.T_degenerate is None else cal(e.T_degenerate)}
        for n in names:
            T = e.crossings.get(n)
            row[f"{n}_raw_C"] = T
            row[f"{n}_cal_C"] = None if T is None else cal(T)
        summary.append(row)
        for T, ls, li in zip(e.T_grid, e.lambda_s, e.lambda_i):
            if np.isfinite(ls):
                curves.append({"R_mm": e.R * 1e3, "lambda_p_nm": e.lam_p * 1e9, "T_raw_C": float(T),
                               "T_cal_C": float(cal(T)), "lambda_s_nm": ls * 1e9, "lambda_i_nm": li * 1e9})
    header = ["R_mm", "lambda_p_nm", "T_deg_raw_C", "T_deg_cal_C"]
    header += [f"{n}_{k}_C" for n in names for k in ("raw", "cal")]
    ctx.table("map_summary", header, summary, {"mode": mc.mode})
    ctx.table("map_curves", ["R_mm", "lambda_p_nm", "T_raw_C", "T_cal_C", "lambda_s_nm", "lambda_i_nm"], curves)
    return EXIT_OK


def _operating_point(ctx, target):
    """Phase-matched triplet whose signal sits nearest the named target line."""
    return operating_point(ctx.geom, ctx.mat, ctx.lam_p, ctx.cfg.targets[target], ctx.cfg.triplet_channel)


def cmd_triplet(ctx, target=None):
    target = target or ctx.cfg.triplet_target
    if target not in ctx.cfg.targets:
        raise ConfigError(f"unknown target {target!r}; known: {sorted(ctx.cfg.targets)}")
    sol = _operating_point(ctx, target)
    rows = []
    for method in ("coarse", "fine-signal", "fine-idler"):
        for st in step_tuning(ctx.geom, ctx.mat, sol, method):
            rec = {"method": method, "direction": st.direction, "dnu_s_Hz": st.dnu_s, "dnu_i_Hz": st.dnu_i,
                   "dT_K": st.dT}
            if st.solution is not None:
                rec.update({k: v for k, v in _solution_record(st.solution).items()
                            if k in ("m_p", "m_s", "m_i", "T_raw_C", "T_cal_C")})
            rows.append(rec)
    header = ["method", "direction", "m_p", "m_s", "m_i", "T_raw_C", "T_cal_C", "dnu_s_Hz", "dnu_i_Hz", "dT_K"]
    ctx.json("triplet", {
        "target": target,
        "target_lambda_nm": ctx.cfg.targets[target] * 1e9,
        "signal_offset_from_target_Hz": sol.nu_s - C / ctx.cfg.targets[target],
        "solution": _solution_record(sol),
        "steps": [{k: r.get(k) for k in header} for r in rows],
    })
    write_table(ctx.cfg.out_dir, "triplet_steps", header, rows, ctx.prov, "csv")
    return EXIT_OK


def cmd_opo(ctx):
    o = ctx.cfg.opo
    P0 = o.P0_uW * 1e-6
    gs, gi = o.gamma_s_MHz * 1e6, o.gamma_i_MHz * 1e6
    Delta = o.mismatch_MHz * 1e6 / (0.5 * (gs + gi))
    Pth = threshold(P0, o.delta_p, Delta)
    nu_p = C / ctx.lam_p
    rows = []
    for P in np.linspace(o.P_min_uW, o.P_max_uW, o.n_points) * 1e-6:
        pr = pair_rate_internal(gs, gi, P, Pth)
        R_s, R_i, R_si = external_rates(pr.rate, o.kappa_s, o.kappa_i)
        out = output_power(P, P0, o.delta_p, Delta, o.kappa_p, o.kappa_s, nu_p / 2, nu_p)
        above = P >= Pth
        rows.append({
            "P_pump_W": float(P), "P_th_W": Pth, "Delta": Delta,
            "r_si_per_s": None if above else pr.rate, "R_s_per_s": None if above else R_s,
            "R_i_per_s": None if above else R_i, "R_si_per_s": None if above else R_si,
            "low_gain_exceeded": pr.beyond_low_gain, "P_signal_W": out.power, "below_threshold": out.below_threshold,
        })
    header = ["P_pump_W", "P_th_W", "Delta", "r_si_per_s", "R_s_per_s", "R_i_per_s", "R_si_per_s",
              "low_gain_exceeded", "P_signal_W", "below_threshold"]
    ctx.table("opo", header, rows)
    return EXIT_OK


def _mechanism(ctx, sol):
    t = ctx.cfg.tune
    if t.mechanism == "null":
        return null_mechanism()
    if t.mechanism == "electrooptic":
        return electrooptic_mechanism(ctx.geom, ctx.mat, sol, t.fringe_factor, (t.U_min_V, t.U_max_V))
    try:
        return load_mechanism(t.mechanism_path or None)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def cmd_tune(ctx, target=None):
    tgt_line = target or ctx.cfg.triplet_target
    base = _operating_point(ctx, tgt_line)
    mech = _mechanism(ctx, base)
    lo, hi = reach(ctx.geom, ctx.mat, base, mech)
    results, failed = [], False
    for t_MHz in ctx.cfg.tune.targets_MHz:
        try:
            r = retune(ctx.geom, ctx.mat, base, mech, t_MHz * 1e6)
        except RangeError as exc:
            failed = True
            results.append({"target_MHz": t_MHz, "error": str(exc)})
            continue
        results.append({
            "target_MHz": t_MHz, "control": r.control, "control_unit": mech.unit, "T_raw_C": r.T,
            "T_cal_C": r.solution.T_cal, "nu_pump_laser_Hz": r.nu_pump_laser,
            "signal_offset_Hz": r.solution.nu_s - base.nu_s, "residual_Hz": r.solution.residual,
        })
    ctx.json("tune", {
        "base": _solution_record(base),
        "mechanism": {"kind": mech.kind, "rate_p_Hz": mech.rate_p, "rate_s_Hz": mech.rate_s,
                      "rate_i_Hz": mech.rate_i, "u_min": mech.u_min, "u_max": mech.u_max, "unit": mech.unit},
        "reach_Hz": [lo, hi],
        "results": results,
    })
    if failed:
        print("some targets lie outside the reachable range; see tune.json", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_corrfit(ctx, path, family):
    try:
        hist = load_histogram(path)
    except OSError as exc:
        raise ConfigError(f"cannot read histogram {path}: {exc}") from None
    res = fit_histogram(hist, family)
    if res.flat:
        payload = {"family": family, "flat": True, "n_bins": res.n_bins, "t1_ns": None, "t2_ns": None,
                   "gamma_s_MHz": None, "errors": {}, "chi2": res.chi2}
    else:
        m = res.model
        scale = {"t1": 1e9, "t2": 1e9, "offset": 1e9}
        payload = {
            "family": family, "flat": False, "n_bins": res.n_bins,
            "t1_ns": m.t1 * 1e9, "t2_ns": None if m.t2 is None else m.t2 * 1e9,
            "gamma_s_MHz": bandwidth_from_time(m.t1) / 1e6,
            "gamma_t2_MHz": None if m.t2 is None else bandwidth_from_time(m.t2) / 1e6,
            "amplitude": m.amplitude, "background": m.background, "offset_ns": m.offset * 1e9,
            "errors": {(f"{k}_ns" if k in scale else k): v * scale.get(k, 1.0) for k, v in res.errors.items()},
            "chi2": res.chi2, "residual_norm": res.residual_norm,
        }
    ctx.json("corrfit", payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--material", help="material asset (INI); default: bundled 5 mol%% MgO:LN")
    common.add_argument("--out", help="output directory")
    common.add_argument("--threads", type=int, help="worker processes for scans")
    common.add_argument("--format", choices=("csv", "json", "both"), help="table output format")

    ap = argparse.ArgumentParser(prog="wgmopo", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"wgmopo {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="mode spectrum over one free spectral range")
    sub.add_parser("channels", parents=[common], help="temperature tuning curves of conversion channels")
    sub.add_parser("map", parents=[common], help="phase matching versus radius or pump wavelength")
    p = sub.add_parser("triplet", parents=[common], help="triplet at a target line plus tuning steps")
    p.add_argument("--target", help="target line name, e.g. Cs_D1")
    sub.add_parser("opo", parents=[common], help="threshold, pair rate and output power sweep")
    p = sub.add_parser("tune", parents=[common], help="continuous tuning with a second mechanism")
    p.add_argument("--target", help="target line of the base operating point")
    p = sub.add_parser("corrfit", parents=[common], help="fit a coincidence histogram")
    p.add_argument("histogram", help="CSV time_ns,counts or two-column text")
    p.add_argument("--family", choices=("pair", "heralded"), default="pair")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        ctx = Context(args, args.command)
        if args.command == "spectrum":
            return cmd_spectrum(ctx)
        if args.command == "channels":
            return cmd_channels(ctx)
        if args.command == "map":
            return cmd_map(ctx)
        if args.command == "triplet":
            return cmd_triplet(ctx, args.target)
        if args.command == "opo":
            return cmd_opo(ctx)
        if args.command == "tune":
            return cmd_tune(ctx, args.target)
        return cmd_corrfit(ctx, args.histogram, args.family)
    except (ConfigError, DomainError) as exc:
        print(f"wgmopo: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"wgmopo: numerical failure: {exc} {exc.detail}", file=sys.stderr)
        return EXIT_NUMERIC
    except NotFoundError as exc:
        print(f"wgmopo: not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND


if __name__ == "__main__":
    sys.exit(main())
