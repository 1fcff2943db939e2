"""``adlab`` command line: generate inputs, run estimators and studies, emit reports.

Exit codes: 0 success, 1 domain error (the error class name is printed on
stderr), 2 usage error.
"""

import argparse
import sys

import numpy as np

from . import io
from .estimator import cyclic_estimate_spectrum, group_averaged_estimate
from .exceptions import AdlabError
from .gevp import BASIS_NAMES, match_group
from .groups import GENERATOR_NAMES, GROUPS, make_generator, make_group
from .model import (Signal, lorentzian_psd, make_chirp_covariance, make_circulant_covariance,
                    make_fbm_covariance, white_noise)
from .residual import classify, fig3_table
from .studies import (DEFAULT_TONES, ToneSignal, affine_noise_floor_experiment,
                      commutator_generator_check, cross_term_decay, discretization_study,
                      gaussian_pulse, grid_tone, random_alignment_null, replacement_snr_sweep,
                      uncertainty_check)
from .transforms import (Wavelet, ambiguity, autocorrelation, calderon_reconstruct,
                         default_scales, dct_spectrum, log_scales, periodogram, scalogram)

REPORT_FORMAT = "adlab-report v1"
SCHEMA_VERSION = "1"


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") \
            from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") \
            from None


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _config(args):
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _report(args, **payload):
    return {"format": REPORT_FORMAT, "schema_version": SCHEMA_VERSION,
            "command": args.command, "config": _config(args), **payload}


def _emit(args, report):
    if getattr(args, "json", None):
        io.write_json(args.json, report)
    return report


def _complex_pairs(z):
    z = np.asarray(z, dtype=np.complex128)
    return [[float(v.real), float(v.imag)] for v in z]


# ------------------------------------------------------------ commands


def cmd_gen(args):
    M, dt = args.m, args.dt
    if args.kind in ("stationary", "self-similar", "chirp"):
        if args.kind == "stationary":
            R = make_circulant_covariance(lorentzian_psd(M, args.corner))
        elif args.kind == "self-similar":
            R = make_fbm_covariance(M, dt, args.hurst, args.sigma2, args.t0)
        else:
            R = make_chirp_covariance(M, dt, args.beta, args.width or 4 * dt, args.sigma2)
        io.write_matrix(args.out, R)
        summary = {"output": args.out, "type": "matrix", "M": M,
                   "trace": float(np.trace(R).real)}
    else:
        if args.kind == "noise":
            if args.seed is None:
                raise argparse.ArgumentTypeError("gen --kind noise requires --seed")
            sig = white_noise(M, args.sigma2, args.seed, dt)
        elif args.kind == "tone":
            sig = Signal(grid_tone(M, args.bin).samples, dt)
        elif args.kind == "gaussian":
            sig = gaussian_pulse(M, dt, beta=args.beta)
        else:
            sig = Signal(np.eye(M)[args.bin], dt)
        io.write_signal(args.out, sig)
        summary = {"output": args.out, "type": "signal", "M": M, "energy": sig.energy()}
    print(f"wrote {summary['type']} M={M} to {args.out}")
    return _emit(args, _report(args, result=summary))


def cmd_estimate(args):
    sig = io.read_signal(args.signal)
    G = make_group(args.group, sig.M)
    est = group_averaged_estimate(sig, G, args.chunk_size)
    if args.csv:
        io.write_matrix(args.csv, est.operator)
    result = {"group": G.name, "M": sig.M, "order": G.order,
              "eigenvalues": est.eigenvalues.tolist(), "rank": est.rank(args.rank_tol),
              "trace": float(np.trace(est.operator).real)}
    if args.group == "cyclic":
        result["periodogram_eigenvalues"] = cyclic_estimate_spectrum(sig).tolist()
    print(f"{G.name}: rank {result['rank']}, top eigenvalue {est.eigenvalues[0]:.6g}")
    return _emit(args, _report(args, result=result))


def _scales(args, sig):
    if args.a0 is not None:
        return log_scales(args.a0, args.octaves, args.voices)
    return default_scales(sig.M, sig.dt, args.voices)


def cmd_transform(args):
    sig = io.read_signal(args.signal)
    kind = args.kind
    result = {"kind": kind, "M": sig.M, "dt": sig.dt}
    if kind == "periodogram":
        values = periodogram(sig)
        result["values"] = values.tolist()
        grid, axes = values[None, :], ("one", "frequency")
    elif kind == "dct":
        values = dct_spectrum(sig)
        result["values"] = values.tolist()
        grid, axes = values[None, :], ("one", "dct-index")
    elif kind == "autocorr":
        values = autocorrelation(sig)
        result["values"] = _complex_pairs(values)
        grid, axes = values[None, :], ("one", "lag")
    elif kind == "ambiguity":
        surf = ambiguity(sig)
        nz = np.abs(surf.values) > 1e-12 * max(np.max(np.abs(surf.values)), 1e-300)
        result.update({"energy": surf.energy, "df": surf.df,
                       "nonzero_delays": np.flatnonzero(nz.any(axis=1)).tolist(),
                       "nonzero_dopplers": np.flatnonzero(nz.any(axis=0)).tolist()})
        # columns are delays, so an impulse shows up as a single column at k = 0
        grid, axes = surf.values.T, ("doppler", "delay")
    elif kind == "scalogram":
        psi = Wavelet(args.wavelet)
        scales = _scales(args, sig)
        sc = scalogram(sig, psi, scales, args.voices)
        j, n = sc.argmax()
        result.update({"scales": sc.scales.tolist(), "resolved": sc.resolved.tolist(),
                       "argmax": {"scale": float(sc.scales[j]), "position": n * sig.dt}})
        grid, axes = sc.values, ("scale", "time")
    else:
        psi = Wavelet(args.wavelet)
        rec = calderon_reconstruct(sig, psi, _scales(args, sig), args.tol)
        result.update({"rel_error": rec.rel_error, "in_band": rec.in_band,
                       "c_psi": rec.c_psi})
        if args.out:
            io.write_signal(args.out, Signal(rec.signal, sig.dt, sig.origin))
        grid, axes = rec.signal[None, :], ("one", "time")
    if args.csv:
        io.write_grid(args.csv, grid, *axes)
    print(f"{kind}: done (M={sig.M})")
    return _emit(args, _report(args, result=result))


def cmd_classify(args):
    R = io.read_matrix(args.covariance)
    gens = [make_generator(g, R.shape[0], args.beta, args.dt) for g in args.generators]
    row = classify(R, gens, signal_class=args.covariance)
    for g, d in row.cells:
        print(f"  {g:12s} delta = {d:.6e}")
    print(f"matched: {row.matched}{' (tie)' if row.tie else ''}")
    return _emit(args, _report(args, **row.to_dict()))


def cmd_fig3(args):
    rep = fig3_table(args.m, args.hurst, args.beta, args.dt, args.width)
    names = [g for g, _ in rep.rows[0].cells]
    print(f"{'':14s}" + "".join(f"{n:>14s}" for n in names))
    for row in rep.rows:
        print(f"{row.signal_class:14s}" + "".join(f"{d:14.4e}" for _, d in row.cells)
              + f"   -> {row.matched}")
    if args.csv:
        io.write_grid(args.csv, rep.table(), "class", "generator")
    body = rep.to_dict()
    body.pop("format")
    return _emit(args, _report(args, **body))


def cmd_match(args):
    R = io.read_matrix(args.covariance)
    sol = match_group(R, args.basis, args.beta, args.dt)
    print(f"lambda_min = {sol.lambda_min:.6e}, delta = {sol.delta:.6e}, "
          f"interpretation = {sol.interpretation}"
          f"{' (degenerate x%d)' % sol.multiplicity if sol.degenerate else ''}")
    if args.csv:
        io.write_matrix(args.csv, sol.generator)
    return _emit(args, _report(args, **sol.to_dict()))


def cmd_converge(args):
    sig = ToneSignal(tuple(args.freqs), tuple(args.amps), args.duration)
    res = discretization_study(sig, args.m_list)
    for M, e in zip(res.sizes, res.errors):
        print(f"  M={M:5d}  error={e:.6e}")
    print(f"slope = {res.slope:.4f}")
    if args.csv:
        io.write_grid(args.csv, np.array([res.sizes, res.errors, res.sup_errors], float),
                      "series", "grid-index")
    passed = bool(-1.3 <= res.slope <= -0.7) if np.isfinite(res.slope) else None
    return _emit(args, _report(args, result=res.to_dict(), passed=passed))


def cmd_uncertainty(args):
    if args.signal:
        sig = io.read_signal(args.signal)
    else:
        sig = gaussian_pulse(args.m, args.dt, beta=args.beta)
    u = uncertainty_check(sig)
    chk = commutator_generator_check(max(sig.M, 32), args.dt, args.stencil)
    print(f"dt={u.delta_t:.6g} domega={u.delta_omega:.6g} product={u.product:.12f}")
    print(f"commutator deviation ({args.stencil}) = {chk.deviation:.3e}")
    return _emit(args, _report(args, result=u.to_dict(), commutator=chk.to_dict()))


def cmd_replacement(args):
    s = grid_tone(args.m, args.bin)
    res = replacement_snr_sweep(s, args.snr, args.trials, args.seed)
    for snr, a in zip(res.snr_db, res.alignment_mean):
        print(f"  SNR {snr:6.1f} dB  alignment {a:.4f}")
    cross = cross_term_decay(grid_tone(args.cross_m, args.bin % args.cross_m),
                             repetitions=args.repetitions, seed=args.seed)
    print(f"cross-term slope = {cross.slope:.3f}")
    low = int(np.argmin(res.snr_db))
    null_p = random_alignment_null(res.M, round(res.alignment_mean[low] * res.trials),
                                   res.trials)
    if args.csv:
        io.write_grid(args.csv, np.array([res.snr_db, res.alignment_mean, res.alignment_sem]),
                      "series", "snr-index")
    return _emit(args, _report(args, result=res.to_dict(), cross_term=cross.to_dict(),
                               lowest_snr_null_pvalue=null_p))


def cmd_noisefloor(args):
    res = affine_noise_floor_experiment(args.m, None, args.trials, args.seed,
                                        wavelet=args.wavelet)
    for note in res.notes:
        print(f"  {note}")
    print(f"cyclic reference flat: {res.cyclic_flat} (max z {res.cyclic_max_z:.2f})")
    if args.csv:
        io.write_grid(args.csv, np.array([res.omega, res.affine_diagonal,
                                          res.affine_expected_diagonal, res.cyclic_diagonal]),
                      "series", "frequency-bin")
    return _emit(args, _report(args, result=res.to_dict()))


def _selftest_checks():
    rng = np.random.default_rng(20240601)
    checks = []

    x = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    for name in GROUPS:
        F = group_averaged_estimate(x, make_group(name, 12)).operator
        rel = abs(np.trace(F).real - np.vdot(x, x).real) / np.vdot(x, x).real
        checks.append((f"trace identity ({name})", rel <= 1e-10, rel))

    y = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    lhs = np.fft.fft(autocorrelation(y))
    rhs = 16 * periodogram(y)
    rel = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    checks.append(("Wiener-Khinchin constant", rel <= 1e-9, rel))

    surf = ambiguity(Signal(y))
    rel = abs(surf.energy / np.linalg.norm(y) ** 4 - 16) / 16
    checks.append(("discrete Moyal constant", rel <= 1e-9, rel))

    rep = fig3_table()
    ok = rep.matched == list(GENERATOR_NAMES)
    checks.append(("three-class matched generators", ok, rep.matched))

    R = make_circulant_covariance(lorentzian_psd(8))
    sol = match_group(R, "circulant-hermitian")
    checks.append(("GEVP circulant null", sol.lambda_min <= 1e-10 * np.linalg.norm(R) ** 2,
                   sol.lambda_min))

    from .transforms import calderon_constant
    c = calderon_constant(Wavelet("mexican-hat")).value
    rel = abs(c - 4 * np.sqrt(np.pi) / 3) / (4 * np.sqrt(np.pi) / 3)
    checks.append(("mexican-hat admissibility constant", rel <= 1e-9, rel))
    return checks


def cmd_selftest(args):
    checks = _selftest_checks()
    for name, ok, value in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {value}")
    passed = all(ok for _, ok, _ in checks)
    _emit(args, _report(args, passed=passed,
                        checks=[{"name": n, "passed": bool(ok), "value": str(v)}
                                for n, ok, v in checks]))
    return 0 if passed else 1


# ------------------------------------------------------------- parser


def _outputs(p, csv=True):
    p.add_argument("--json", metavar="PATH", help="write the JSON report here")
    if csv:
        p.add_argument("--csv", metavar="PATH", help="write the CSV output here")


def build_parser():
    parser = argparse.ArgumentParser(prog="adlab",
                                     description="Group-averaged covariance estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a model covariance or a test signal")
    p.add_argument("--kind", required=True,
                   choices=["stationary", "self-similar", "chirp", "noise", "tone", "gaussian",
                            "impulse"])
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--hurst", type=float, default=0.7)
    p.add_argument("--beta", type=float, default=0.02)
    p.add_argument("--width", type=float, default=None)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--corner", type=float, default=4.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--bin", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    _outputs(p, csv=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("estimate", help="group-averaged estimator of one signal")
    p.add_argument("--signal", required=True)
    p.add_argument("--group", default="cyclic", choices=sorted(GROUPS))
    p.add_argument("--chunk-size", type=int, default=256)
    p.add_argument("--rank-tol", type=float, default=1e-8)
    _outputs(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("transform", help="classical transforms of one signal")
    p.add_argument("--kind", required=True,
                   choices=["periodogram", "dct", "autocorr", "ambiguity", "scalogram",
                            "reconstruct"])
    p.add_argument("--signal", required=True)
    p.add_argument("--wavelet", default="mexican-hat", choices=["mexican-hat", "morlet",
                                                                "gaussian"])
    p.add_argument("--voices", type=int, default=8)
    p.add_argument("--octaves", type=float, default=5.0)
    p.add_argument("--a0", type=float, default=None)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--out", default=None, help="reconstructed signal file")
    _outputs(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("classify", help="residual of a covariance against named generators")
    p.add_argument("--covariance", required=True)
    p.add_argument("--generators", type=_names, default=list(GENERATOR_NAMES))
    p.add_argument("--beta", type=float, default=0.02)
    p.add_argument("--dt", type=float, default=1.0)
    _outputs(p, csv=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fig3", help="three signal classes against three generators")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--hurst", type=float, default=0.7)
    p.add_argument("--beta", type=float, default=0.02)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--width", type=float, default=None)
    _outputs(p)
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("match", help="blind generator search by the double-commutator GEVP")
    p.add_argument("--covariance", required=True)
    p.add_argument("--basis", default="circulant-hermitian", choices=list(BASIS_NAMES))
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=1.0)
    _outputs(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("converge", help="discretization convergence of the cyclic estimator")
    p.add_argument("--freqs", type=_floats, default=list(DEFAULT_TONES.freqs))
    p.add_argument("--amps", type=_floats, default=list(DEFAULT_TONES.amps))
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--m-list", type=_ints, default=[64, 128, 256, 512])
    _outputs(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("uncertainty", help="time-frequency spread product and commutator check")
    p.add_argument("--signal", default=None)
    p.add_argument("--m", type=int, default=512)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--stencil", default="spectral", choices=["central", "spectral"])
    _outputs(p, csv=False)
    p.set_defaults(func=cmd_uncertainty)

    p = sub.add_parser("replacement", help="signal-subspace alignment versus SNR")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--bin", type=int, default=5)
    p.add_argument("--snr", type=_floats, default=[-20, -10, 0, 10, 20, 30])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--cross-m", type=int, default=16)
    p.add_argument("--repetitions", type=int, default=32)
    p.add_argument("--seed", type=int, required=True)
    _outputs(p)
    p.set_defaults(func=cmd_replacement)

    p = sub.add_parser("noisefloor", help="exploratory affine versus cyclic noise floor")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--wavelet", default="mexican-hat", choices=["mexican-hat", "morlet"])
    p.add_argument("--seed", type=int, required=True)
    _outputs(p)
    p.set_defaults(func=cmd_noisefloor)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    _outputs(p, csv=False)
    p.set_defaults(func=cmd_selftest)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out = args.func(args)
    except AdlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return out if isinstance(out, int) else 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
