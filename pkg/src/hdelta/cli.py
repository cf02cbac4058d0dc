"""Command surface: sieve, moments, sample, verify, wforms, integrals,
recursion, thresholds.

Configuration precedence: command-line flags > HDELTA_THREADS (threads
only) > config file (plain `key = value` lines, --config) > defaults.
Every run emits a provenance header (parameters, seed, version) before
its data.  Exit codes: 0 success, 1 a mathematical check was falsified,
2 usage error.
"""

import argparse
import json

import os
import sys


from . import __version__, integrals, sampler, suites, sweeps, weights, wforms

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_USAGE = 2


def _parse_grid(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _read_config(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w"), True


def _provenance(args, extra=None):
    fields = {
        "version": __version__,
        "command": args.command,
    }
    for key in ("xmax", "t", "z", "T", "q", "c0", "frakc", "seed", "samples",
                "grid", "mode", "variant", "threads", "qmax", "delta", "stat",
                "event", "x"):
        if hasattr(args, key) and getattr(args, key) is not None:
            fields[key] = getattr(args, key)
    if extra:
        fields.update(extra)
    return fields


def _emit_header(fh, args, fmt="csv", extra=None):
    fields = _provenance(args, extra)
    if fmt == "jsonl":
        fh.write(json.dumps({"provenance": fields}, sort_keys=True) + "\n")
    else:
        for k, v in fields.items():
            fh.write(f"# {k} = {v}\n")


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def cmd_thresholds(args):
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args)
        out.write("t,z,beta,z_t,z_t_plus,frak_z,delta\n")
        for t in _parse_grid(args.t_list):
            for z in _parse_grid(args.z_list):
                e = weights.exponents(t, z)
                out.write(",".join(_fmt(v) for v in
                                   (e.t, e.z, e.beta, e.z_t, e.z_t_plus,
                                    e.frak_z_t, e.delta)) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_sieve(args):
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args, fmt=args.format)
        if args.format == "csv":
            out.write("n,tau,omega,mu2,delta,m2\n")
        if args.cache:
            sweeps.resume_delta_table(args.cache, int(args.xmax),
                                      n_workers=args.threads)
            _, cols = sweeps.read_cache(args.cache)
            blocks = [(1, cols)]
        else:
            blocks = sweeps.delta_table(int(args.xmax), n_workers=args.threads)
        for lo, cols in blocks:
            tau, om = cols["tau"], cols["omega"]
            mu2, de, m2 = cols["mu2"], cols["delta"], cols["m2"]
            for i in range(len(tau)):
                if args.format == "csv":
                    out.write(f"{lo + i},{int(tau[i])},{int(om[i])},{int(mu2[i])},"
                              f"{int(de[i])},{_fmt(float(m2[i]))}\n")
                else:
                    out.write(json.dumps({"n": lo + i, "tau": int(tau[i]),
                                          "omega": int(om[i]), "mu2": int(mu2[i]),
                                          "delta": int(de[i]), "m2": float(m2[i])})
                              + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_moments(args):
    grid = [int(v) for v in _parse_grid(args.grid)]
    recs = sweeps.s_moment_grid(grid, [args.t], args.z, n_workers=args.threads)[args.t]
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args)
        out.write("x,t,z,S,normalized\n")
        for r in recs:
            out.write(",".join(_fmt(v) for v in (r.x, r.t, r.z, r.S, r.normalized)) + "\n")
    finally:
        if close:
            out.close()
    if len(grid) >= 3:
        slope, intercept, resid = sweeps.fit_slope_loglog2(
            [r.x for r in recs], [r.S for r in recs])
        target = max(weights.exponents(args.t, args.z).beta, args.z) - 1.0
        fit = {"slope": slope, "intercept": intercept, "target": target,
               "residuals": list(resid)}
        if args.fit_out:
            with open(args.fit_out, "w") as fh:
                json.dump(fit, fh, indent=2, sort_keys=True)
        else:
            print(json.dumps(fit, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_sample(args):
    w = weights.WeightFamily(z=args.z)
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args, fmt="jsonl")
        if args.event:
            params = {"T": args.T, "variant": args.variant or "plain",
                      "t": args.t}
            if args.variant == "tz":
                params["trunc"] = weights.TruncationParams(
                    T=max(args.T, 2.0), t=args.t, z=args.z, frak_c=args.frakc,
                    b_variant=args.b_variant)
            if args.event == "delta_gt":
                params = {"lam": args.T}
            est = sampler.tail_prob(args.event, args.x, w, params,
                                    args.samples, args.seed,
                                    n_workers=args.threads)
            name = args.event
        else:
            params = {}
            if args.stat in ("delta_pow", "m2_over_tau_pow"):
                params["t"] = args.t
            if args.stat == "mq_over_tau":
                params["q"] = args.q
            if args.stat == "m2_chi_over_tau":
                params["h"] = args.q
            est = sampler.expect(args.stat, args.x, w, args.samples, args.seed,
                                 params=params, n_workers=args.threads)
            name = args.stat
        out.write(json.dumps({
            "stat": name, "x": args.x, "z": args.z, "T": est.T,
            "mean": est.mean, "std_error": est.std_error,
            "n_samples": est.n_samples, "seed": est.seed,
            "rejected_fraction": est.rejected_fraction,
        }, sort_keys=True) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_verify(args):
    xmax = int(args.xmax)
    from .factor import build_spf

    spf = build_spf(max(xmax, 2)).spf
    selected = {
        "ineq": ["m1", "m2", "brute", "lower", "chain", "wq", "root", "splits"],
        "sets": ["closure", "parseval"],
        "all": ["m1", "m2", "brute", "lower", "chain", "wq", "root", "splits",
                "closure", "parseval"],
    }[args.suite]
    runners = {
        "m1": lambda: suites.check_m1_equals_tau(xmax, spf=spf),
        "m2": lambda: suites.check_m2_oracle(min(xmax, 20000), spf=spf),
        "brute": lambda: suites.check_delta_brute(xmax, spf=spf),
        "lower": lambda: suites.check_lower_bound(xmax, spf=spf),
        "chain": lambda: suites.check_moment_chain(
            args.samples, xmax, 1000, seed=args.seed, spf=spf),
        "wq": lambda: suites.check_wq_random_v(
            max(args.samples // 10, 100), xmax, seed=args.seed, spf=spf),
        "root": lambda: suites.check_delta_root_bound(xmax, spf=spf),
        "splits": lambda: suites.check_splits(min(xmax, 30000), spf=spf),
        "closure": lambda: suites.check_et_closure(min(xmax, 100000), spf=spf),
        "parseval": lambda: suites.check_parseval_band(min(xmax, 10000), spf=spf),
    }
    ok = True
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args)
        out.write("check,ok,checked,violations,detail,seconds\n")
        for name in selected:
            r = runners[name]()
            ok = ok and r.ok
            out.write(f"{r.name},{r.ok},{r.checked},{r.violations},"
                      f"\"{r.detail}\",{r.seconds:.2f}\n")
    finally:
        if close:
            out.close()
    return EXIT_OK if ok else EXIT_FALSIFIED


def cmd_wforms(args):
    rep = wforms.verify_mass_bound(args.t, mode=args.mode, n_samples=args.samples,
                                seed=args.seed, collect_rows=True)
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args, extra={"n_bases": rep.n_bases,
                                       "n_distinct": rep.n_distinct})
        out.write("t,basis,origin,k,c_k_num,c_k_den,bound,verdict\n")
        for key, origin, k, mass, bound in rep.all_rows:
            basis = ";".join(" ".join(str(c) for c in w) for w in key)
            verdict = "ok" if mass <= bound else "VIOLATION"
            out.write(f"{args.t},\"{basis}\",{origin},{k},{mass.numerator},"
                      f"{mass.denominator},{bound},{verdict}\n")
    finally:
        if close:
            out.close()
    return EXIT_OK if rep.ok_realizable else EXIT_FALSIFIED


def cmd_integrals(args):
    grid = _parse_grid(args.grid)
    out, close = _open_out(args.out)
    results = []
    try:
        _emit_header(out, args)
        out.write("t,z,X,value,error_estimate,method\n")
        for X in grid:
            r = integrals.I_tz(int(args.t), args.z, X, seed=args.seed)
            results.append(r)
            out.write(",".join(_fmt(v) for v in
                               (r.t, r.z, r.X, r.value, r.error_estimate)) +
                      f",{r.method}\n")
    finally:
        if close:
            out.close()
    if len(results) >= 3:
        a, b = integrals.fit_loglog([r.X for r in results], [r.value for r in results])
        e = weights.exponents(args.t, args.z)
        fit = {"exponent": a, "log_power": b, "exponent_target": 2.0**args.t * args.z,
               "log_power_target": e.delta}
        if args.fit_out:
            with open(args.fit_out, "w") as fh:
                json.dump(fit, fh, indent=2, sort_keys=True)
        else:
            print(json.dumps(fit, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_recursion(args):
    rep = weights.check_recursion(args.qmax, args.T, args.delta, args.c0,
                                  variant=args.variant)
    out, close = _open_out(args.out)
    try:
        _emit_header(out, args, extra={
            "first_fail_lower": rep.first_fail_lower,
            "first_fail_conv": rep.first_fail_conv,
        })
        out.write("q,ok_lower_bound,ok_convolution,log_margin\n")
        for q, ok81, ok82, margin in rep.rows:
            out.write(f"{q},{ok81},{ok82},{_fmt(margin)}\n")
    finally:
        if close:
            out.close()
    # a reporter: the printed variants' validity ranges are findings, not failures
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hdelta",
        description="Divisor-concentration toolkit: exact Delta/moment "
                    "computation, model sampling and verification suites.",
    )
    parser.add_argument("--config", help="config file with key = value lines")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, **defaults):
        p.add_argument("--out", default=defaults.get("out"))
        p.add_argument("--seed", type=int, default=defaults.get("seed", 0))
        p.add_argument("--threads", type=int, default=defaults.get("threads", 1))

    p = sub.add_parser("sieve", help="per-n Delta statistics table")
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--cache", help="resumable binary cache path")
    common(p)
    p.set_defaults(fn=cmd_sieve)

    p = sub.add_parser("moments", help="weighted moment sums over a grid")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--grid", required=True, help="comma-separated x values")
    p.add_argument("--fit-out", dest="fit_out")
    common(p)
    p.set_defaults(fn=cmd_moments)

    p = sub.add_parser("sample", help="Monte Carlo estimates under the model")
    p.add_argument("--stat", default="omega")
    p.add_argument("--event", help="estimate an event probability instead")
    p.add_argument("--x", type=float, default=1e4)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--frakc", type=float, default=0.01)
    p.add_argument("--variant", choices=["plain", "tz"], default="plain")
    p.add_argument("--b-variant", dest="b_variant",
                   choices=["product", "power"], default="product",
                   help="reading of the damping constant denominator")
    p.add_argument("--samples", type=int, default=10000)
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("verify", help="identity and inequality suites")
    p.add_argument("--suite", choices=["ineq", "sets", "all"], default="ineq")
    p.add_argument("--xmax", type=float, default=1e5)
    p.add_argument("--samples", type=int, default=10000)
    common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("wforms", help="linear-form basis mass verification")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="sampled")
    p.add_argument("--samples", type=int, default=10000)
    common(p)
    p.set_defaults(fn=cmd_wforms)

    p = sub.add_parser("integrals", help="product integral values and growth fit")
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--grid", required=True, help="comma-separated X values")
    p.add_argument("--fit-out", dest="fit_out")
    common(p)
    p.set_defaults(fn=cmd_integrals)

    p = sub.add_parser("recursion", help="theta-sequence constraint reporter")
    p.add_argument("--qmax", type=int, default=200)
    p.add_argument("--T", type=float, default=10.0)
    p.add_argument("--c0", type=float, default=10.0)
    p.add_argument("--delta", type=int, choices=[0, 1], default=0)
    p.add_argument("--variant", choices=["A", "B"], default="A")
    common(p)
    p.set_defaults(fn=cmd_recursion)

    p = sub.add_parser("thresholds", help="exponent threshold table")
    p.add_argument("--t-list", dest="t_list", default="1,2,3,4")
    p.add_argument("--z-list", dest="z_list", default="1")
    common(p)
    p.set_defaults(fn=cmd_thresholds)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # config file and environment populate defaults; explicit flags win
    config = {}
    if "--config" in argv:
        idx = argv.index("--config")
        try:
            config = _read_config(argv[idx + 1])
        except (OSError, ValueError, IndexError) as exc:
            print(f"hdelta: bad config: {exc}", file=sys.stderr)
            return EXIT_USAGE
    env_threads = os.environ.get("HDELTA_THREADS")
    if env_threads is not None:
        config["threads"] = env_threads
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    for key, val in config.items():
        if hasattr(args, key) and f"--{key.replace('_', '-')}" not in argv:
            current = getattr(args, key)
            caster = type(current) if current is not None else str
            try:
                setattr(args, key, caster(val) if caster is not bool
                        else val.lower() in ("1", "true", "yes"))
            except ValueError:
                print(f"hdelta: bad config value for {key}: {val!r}", file=sys.stderr)
                return EXIT_USAGE
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"hdelta: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
