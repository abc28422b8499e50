"""Batch command-line front-end.

Subcommands: lambert, seqcheck, assoc, bump, faa, pw, wf.  Reports are JSON
with sorted keys and floats rendered at 15 significant digits; grids and
heatmaps are CSV.  Every artifact embeds the resolved configuration and its
SHA-256 hash, so reruns are replayable and byte-identical.  Files are
written atomically (temp file in the target directory, then rename).

Exit codes: 0 success, 2 contract/usage errors, 3 I/O errors.  Scan
parallelism is bounded by the GEVREY_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict

import numpy as np

from . import __version__
from .associated import (
    AssociatedEval,
    asymptotic_T,
    carleman_mu,
    komatsu_T,
    two_param_T,
)
from .bump import (
    build_bump,
    default_bump_grid,
    derivative_growth_profile,
    symmetric_grid,
)
from .errors import ContractError
from .faa import decomposition_count_bound, enumerate_decompositions, faa_di_bruno
from .grids import GridSignal, GridSpec
from .lambert import lambert_w
from .sequences import (
    DefiningSequence,
    check_m1,
    fit_m2_tilde,
    fit_m2prime_tilde,
    m3prime_partial_sum,
)
from .spectral import dft, pw_decay_fit
from .wavefront import FitConfig, stft, wavefront_scan, window_from_bump

EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_IO = 3


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------


def _render(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".15g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(_render(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        return "{" + ",".join(json.dumps(str(k)) + ":" + _render(v) for k, v in items) + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def canonical_json(obj) -> str:
    return _render(obj)


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def fmt_float(x: float) -> str:
    return format(float(x), ".15g")


def atomic_write(path: str, data: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-gevreylab-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, text: str, suffix: str = "") -> None:
    out = getattr(args, "out", None)
    if out:
        atomic_write(out + suffix if suffix else out, text)
    else:
        sys.stdout.write(text)


def report(config: dict, results) -> str:
    doc = {
        "tool": f"gevreylab {__version__}",
        "config": config,
        "config_hash": config_hash(config),
        "results": results,
    }
    return canonical_json(doc) + "\n"


def read_signal_csv(path: str) -> GridSignal:
    """Read a `x,value` CSV with uniformly spaced x; errors name the line."""
    xs, vals = [], []
    try:
        fh = open(path)
    except OSError as e:
        raise e
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if lineno == 1 or (not xs and line.lower().replace(" ", "") == "x,value"):
                if line.lower().replace(" ", "") == "x,value":
                    continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ContractError(f"{path}:{lineno}: expected two columns, got {line!r}")
            try:
                xs.append(float(parts[0]))
                vals.append(float(parts[1]))
            except ValueError:
                raise ContractError(f"{path}:{lineno}: cannot parse numbers in {line!r}")
    if len(xs) < 16:
        raise ContractError(f"{path}: need at least 16 samples, got {len(xs)}")
    x = np.asarray(xs)
    steps = np.diff(x)
    dx = steps[0]
    if dx <= 0 or np.any(np.abs(steps - dx) > 1e-9 * max(abs(dx), 1.0)):
        raise ContractError(f"{path}: x column is not uniformly spaced")
    return GridSignal(np.asarray(vals), float(dx), float(x[0]))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_lambert(args) -> int:
    if args.selftest:
        return _selftest_lambert()
    config = {"subcommand": "lambert", "eval": args.eval, "tol": args.tol,
              "seed": args.seed}
    lines = []
    for x in args.eval:
        ev = lambert_w(x, rel_tol=args.tol)
        doc = {"x": ev.x, "w": ev.w, "residual": ev.residual,
               "config_hash": config_hash(config)}
        lines.append(canonical_json(doc))
    emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_seqcheck(args) -> int:
    if args.selftest:
        return _selftest_seqcheck()
    seq = DefiningSequence(args.tau, args.sigma)
    conditions = [args.condition] if args.condition else ["m1", "m2t", "m2pt", "m3p"]
    config = {"subcommand": "seqcheck", "tau": args.tau, "sigma": args.sigma,
              "pmax": args.pmax, "conditions": conditions, "seed": args.seed}
    results = {}
    for cond in conditions:
        if cond == "m1":
            rep = check_m1(seq, args.pmax)
            results["m1"] = {"passed": rep.passed, "violations": rep.violations,
                             "p_max": rep.p_max, **rep.details}
        elif cond == "m2t":
            results["m2t"] = {"smallest_log_C": fit_m2_tilde(seq, args.pmax),
                              "p_max": args.pmax}
        elif cond == "m2pt":
            results["m2pt"] = {"smallest_log_C": fit_m2prime_tilde(seq, args.pmax),
                               "p_max": args.pmax}
        elif cond == "m3p":
            partial, tail = m3prime_partial_sum(seq, args.pmax)
            results["m3p"] = {"partial": partial, "tail_bound": tail,
                              "p_max": args.pmax}
        else:
            raise ContractError(f"unknown condition {cond!r}")
    emit(args, report(config, results))
    return EXIT_OK


def _parse_h_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ContractError(f"--h-range must be lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0 < lo < hi) or n < 2:
        raise ContractError(f"--h-range needs 0 < lo < hi and n >= 2, got {text!r}")
    return [float(v) for v in np.geomspace(lo, hi, n)]


def cmd_assoc(args) -> int:
    if args.selftest:
        return _selftest_assoc()
    seq = DefiningSequence(args.tau, args.sigma)
    ev = AssociatedEval(seq)
    config = {"subcommand": "assoc", "tau": args.tau, "sigma": args.sigma,
              "h": args.h, "h_range": args.h_range, "two_param": args.two_param,
              "seed": args.seed}
    if args.two_param:
        h, k = args.two_param
        res = two_param_T(ev, h, k)
        emit(args, report(config, {"h": h, "k": k, "value": res.value,
                                   "arg_p": res.arg_p, "flag": res.flag}))
        return EXIT_OK
    hs = list(args.h or [])
    if args.h_range:
        hs.extend(_parse_h_range(args.h_range))
    if not hs:
        raise ContractError("provide --h values or --h-range lo:hi:n")
    rows = ["# config_hash=" + config_hash(config),
            "h,T,arg_p,mu,asymptotic,ratio"]
    for h in hs:
        T = komatsu_T(ev, h)
        mu = carleman_mu(ev, h)
        if h > math.e:
            asym = asymptotic_T(args.tau, args.sigma, h)
            ratio = T.value / asym if asym > 0 else float("nan")
        else:
            asym, ratio = float("nan"), float("nan")
        rows.append(",".join([fmt_float(h), fmt_float(T.value), str(T.arg_p),
                              fmt_float(mu.value), fmt_float(asym), fmt_float(ratio)]))
    emit(args, "\n".join(rows) + "\n")
    return EXIT_OK


def cmd_bump(args) -> int:
    if args.selftest:
        return _selftest_bump()
    if args.samples % 2 == 0:
        raise ContractError("--samples must be odd (symmetric grid)")
    config = {"subcommand": "bump", "tau": args.tau, "sigma": args.sigma,
              "a": args.a, "samples": args.samples, "mmax": args.mmax,
              "seed": args.seed}
    halfwidth = args.a * 1.15
    spec = GridSpec(-halfwidth, halfwidth, args.samples)
    res = build_bump(args.tau, args.sigma, args.a, spec, args.mmax)
    phi = res.signal
    xs = phi.x()
    rows = ["# config_hash=" + config_hash(config), "x,phi"]
    rows.extend(
        fmt_float(x) + "," + fmt_float(v) for x, v in zip(xs, phi.samples)
    )
    if not args.out:
        raise ContractError("bump requires --out FILE.csv")
    atomic_write(args.out, "\n".join(rows) + "\n")
    prof = derivative_growth_profile(phi, args.sigma, args.nmax)
    sidecar = {
        "integral": phi.integral(),
        "support": list(phi.support_interval()),
        "stage_widths": res.widths,
        "band_thresholds": res.thresholds,
        "first_skipped_stage": res.first_skipped_stage,
        "profile": {
            "orders": prof.orders,
            "log_sup": prof.log_sup,
            "fitted_tau": prof.fitted_tau,
            "fitted_logC": prof.fitted_logC,
            "residual": prof.residual,
        },
    }
    atomic_write(os.path.splitext(args.out)[0] + ".json", report(config, sidecar))
    return EXIT_OK


def cmd_faa(args) -> int:
    if args.selftest:
        return _selftest_faa()
    alpha = tuple(int(v) for v in args.alpha.split(","))
    config = {"subcommand": "faa", "alpha": list(alpha),
              "count_only": args.count_only, "seed": args.seed}
    decs = enumerate_decompositions(alpha)
    if args.count_only:
        results = {"count": len(decs), "bound": decomposition_count_bound(alpha)}
    else:
        results = {
            "count": len(decs),
            "bound": decomposition_count_bound(alpha),
            "decompositions": [
                {"parts": [list(p) for p in d.parts], "mults": list(d.mults)}
                for d in decs
            ],
        }
    emit(args, report(config, results))
    return EXIT_OK


def cmd_pw(args) -> int:
    if args.selftest:
        return _selftest_pw()
    sig = read_signal_csv(args.infile)
    config = {"subcommand": "pw", "in": os.path.basename(args.infile),
              "tau": args.tau, "sigma": args.sigma, "pad": args.pad,
              "seed": args.seed}
    spec = dft(sig, pad_factor=args.pad)
    fit = pw_decay_fit(spec, args.tau, args.sigma)
    emit(args, report(config, {
        "fitted_h": fit.fitted_h,
        "fitted_logC": fit.fitted_logC,
        "r2": fit.r2,
        "xi_range": list(fit.xi_range),
        "n_used": fit.n_used,
    }))
    return EXIT_OK


def _scan_window(sig: GridSignal, args) -> GridSignal:
    if args.window == "bump":
        wspec = symmetric_grid(args.window_a * 1.25, sig.dx)
        wres = build_bump(args.tau, args.sigma, args.window_a, wspec, args.window_mmax)
        return window_from_bump(wres.signal)
    g = read_signal_csv(args.window)
    if abs(g.dx - sig.dx) > 1e-9 * sig.dx:
        raise ContractError("window file spacing does not match the signal")
    return window_from_bump(g)


def cmd_wf(args) -> int:
    if args.selftest:
        return _selftest_wf()
    sig = read_signal_csv(args.infile)
    if not args.points:
        raise ContractError("wf requires a nonempty --points list")
    points = [float(v) for v in args.points.split(",")]
    grid_pts = []
    for p in points:
        j = round((p - float(sig.origin)) / sig.dx)
        grid_pts.append(float(sig.origin) + j * sig.dx)
    config = {"subcommand": "wf", "in": os.path.basename(args.infile),
              "tau": args.tau, "sigma": args.sigma, "points": grid_pts,
              "window": args.window, "window_a": args.window_a,
              "window_mmax": args.window_mmax, "hop": args.hop,
              "k_rel": args.k_rel, "r2_min": args.r2_min, "seed": args.seed}
    g = _scan_window(sig, args)
    cfg = FitConfig(k_rel=args.k_rel, r2_min=args.r2_min)
    verdicts = wavefront_scan(sig, g, args.tau, args.sigma, grid_pts, cfg)
    results = [
        {"x0": v.x0, "direction": v.direction, "class": v.klass,
         "fitted_k": v.fitted_k, "fitted_logC": v.fitted_logC, "r2": v.r2}
        for v in verdicts
    ]
    emit(args, report(config, results))
    if args.heatmap:
        S = stft(sig, g, hop=args.hop * sig.dx if args.hop else sig.dx * 8)
        rows = ["# config_hash=" + config_hash(config), "x,xi,log_abs_v"]
        mag = np.abs(S.values)
        floor = mag.max() * 1e-300 + 1e-300
        for i, x in enumerate(S.x_positions):
            for j, xi in enumerate(S.xi):
                rows.append(",".join([fmt_float(x), fmt_float(xi),
                                      fmt_float(math.log(max(mag[i, j], floor)))]))
        atomic_write(args.heatmap, "\n".join(rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Selftests: each runs the module's built-in fixture checks and exits 0
# ---------------------------------------------------------------------------


def _selftest_lambert() -> int:
    assert abs(lambert_w(math.e).w - 1.0) < 1e-12
    assert lambert_w(0.0).w == 0.0
    for x in np.geomspace(1e-6, 1e8, 25):
        ev = lambert_w(float(x))
        assert abs(ev.w * math.exp(ev.w) - x) <= 1e-10 * max(x, 1.0)
    print("lambert selftest: ok")
    return EXIT_OK


def _selftest_seqcheck() -> int:
    seq = DefiningSequence(1.0, 2.0)
    assert check_m1(seq, 100).passed
    partial, tail = m3prime_partial_sum(seq, 3)
    assert abs(partial - 1.0633128842148047) < 1e-12
    assert fit_m2_tilde(seq, 8) <= 4.0
    print("seqcheck selftest: ok")
    return EXIT_OK


def _selftest_assoc() -> int:
    seq = DefiningSequence(1.0, 2.0)
    ev = AssociatedEval(seq)
    for h in np.geomspace(1.0, 1e8, 25):
        mu = carleman_mu(ev, float(h)).value
        T = komatsu_T(ev, float(h)).value
        assert mu <= 1.0 + 1e-15
        assert abs(mu - math.exp(-T)) <= 1e-12 * mu
        assert two_param_T(ev, 1.0, float(h)).value == T
    print("assoc selftest: ok")
    return EXIT_OK


def _selftest_bump() -> int:
    spec = default_bump_grid(0.5, 1.0 / 1024)
    res = build_bump(1.0, 2.0, 0.5, spec, m_max=2)
    assert abs(res.signal.integral() - 1.0) < 1e-8
    lo, hi = res.signal.support_interval()
    assert lo >= -0.5 - res.signal.dx and hi <= 0.5 + res.signal.dx
    assert res.signal.samples.min() >= 0.0
    print("bump selftest: ok")
    return EXIT_OK


def _selftest_faa() -> int:
    assert len(enumerate_decompositions((3,))) == 3
    assert len(enumerate_decompositions((1, 1))) == 2
    f = {0: 1.0, 1: 2.0, 2: 2.0}
    gd = {(1,): 3.0, (2,): 6.0}
    assert abs(faa_di_bruno(f, gd, (2,)) - 30.0) < 1e-12
    print("faa selftest: ok")
    return EXIT_OK


def _selftest_pw() -> int:
    spec = symmetric_grid(0.12, 1.0 / 8192)
    res = build_bump(1.0, 2.0, 0.08, spec, m_max=2)
    fit = pw_decay_fit(dft(res.signal, pad_factor=8), 1.0, 2.0)
    assert fit.fitted_h > 0 and fit.r2 >= 0.9
    print("pw selftest: ok")
    return EXIT_OK


def _selftest_wf() -> int:
    dx = 1.0 / 1024
    wres = build_bump(1.0, 2.0, 0.12, symmetric_grid(0.15, dx), m_max=2)
    g = window_from_bump(wres.signal)
    host = build_bump(1.0, 2.0, 1.2, symmetric_grid(1.4, dx), m_max=2)
    u = host.signal
    pts = [0.0]
    v1 = wavefront_scan(u, g, 1.0, 2.0, pts)
    v2 = wavefront_scan(u, g, 1.0, 2.0, pts)
    assert v1 == v2
    assert all(v.klass == "regular" for v in v1)
    print("wf selftest: ok")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gevreylab",
        description="Numerics for extended Gevrey regularity: gauges, bumps, "
        "decay fits, and directional regularity scans.",
    )
    p.add_argument("--seed", type=int, default=0, help="seed recorded in artifacts")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--selftest", action="store_true",
                        help="run built-in fixture checks and exit")

    sp = sub.add_parser("lambert", help="evaluate W(x) with residual")
    sp.add_argument("--eval", type=float, action="append", default=None,
                    metavar="X", help="argument (repeatable)")
    sp.add_argument("--tol", type=float, default=1e-12)
    common(sp)
    sp.set_defaults(func=cmd_lambert)

    sp = sub.add_parser("seqcheck", help="growth-condition reports")
    sp.add_argument("--tau", type=float, required=False, default=1.0)
    sp.add_argument("--sigma", type=float, required=False, default=2.0)
    sp.add_argument("--pmax", type=int, default=100)
    sp.add_argument("--condition", choices=["m1", "m2t", "m2pt", "m3p"])
    common(sp)
    sp.set_defaults(func=cmd_seqcheck)

    sp = sub.add_parser("assoc", help="associated-function tables")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=2.0)
    sp.add_argument("--h", type=float, action="append")
    sp.add_argument("--h-range", dest="h_range", metavar="LO:HI:N")
    sp.add_argument("--two-param", dest="two_param", nargs=2, type=float,
                    metavar=("H", "K"))
    common(sp)
    sp.set_defaults(func=cmd_assoc)

    sp = sub.add_parser("bump", help="build a compactly supported test function")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=2.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=8193)
    sp.add_argument("--mmax", type=int, default=3)
    sp.add_argument("--nmax", type=int, default=8)
    common(sp)
    sp.set_defaults(func=cmd_bump)

    sp = sub.add_parser("faa", help="multi-index decompositions")
    sp.add_argument("--alpha", default="3", metavar="A1,A2,...")
    sp.add_argument("--count-only", dest="count_only", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_faa)

    sp = sub.add_parser("pw", help="transform decay fit of a sampled signal")
    sp.add_argument("--in", dest="infile", metavar="CSV")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=2.0)
    sp.add_argument("--pad", type=int, default=4)
    common(sp)
    sp.set_defaults(func=cmd_pw)

    sp = sub.add_parser("wf", help="directional regularity scan")
    sp.add_argument("--in", dest="infile", metavar="CSV")
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=2.0)
    sp.add_argument("--points", default="", metavar="X1,X2,...")
    sp.add_argument("--window", default="bump",
                    help="'bump' or a window CSV path")
    sp.add_argument("--window-a", dest="window_a", type=float, default=0.1)
    sp.add_argument("--window-mmax", dest="window_mmax", type=int, default=2)
    sp.add_argument("--hop", type=int, default=None,
                    help="hop in grid cells for the heatmap")
    sp.add_argument("--k-rel", dest="k_rel", type=float, default=0.6)
    sp.add_argument("--r2-min", dest="r2_min", type=float, default=0.8)
    sp.add_argument("--heatmap", help="also write a ln|V| heatmap CSV here")
    common(sp)
    sp.set_defaults(func=cmd_wf)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cmd", None) == "lambert" and not args.selftest and not args.eval:
        parser.error("lambert requires --eval X (or --selftest)")
    if getattr(args, "cmd", None) in ("pw", "wf") and not args.selftest and not args.infile:
        parser.error(f"{args.cmd} requires --in CSV (or --selftest)")
    try:
        return args.func(args)
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
