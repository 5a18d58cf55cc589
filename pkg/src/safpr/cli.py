"""Command-line entry point: ``safpr <command> [flags]``.

Commands: ``sweep``, ``snr``, ``bench``, ``cdp``, ``solve``, ``verify-kernel``.
Every flag may also come from a ``--config`` file of ``key = value`` lines;
flags given on the command line win.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import experiments as ex
from .fileio import (ParseError, format_values, read_model, read_observation, read_pgm, read_vector,
                     write_model, write_pgm, write_vector)
from .numerics import nmse
from .objective import verify_kernel_properties


def _floats(text):
    return tuple(float(t) for t in str(text).split(",") if t.strip())


def _ints(text):
    return tuple(int(t) for t in str(text).split(",") if t.strip())


def _names(text):
    return tuple(t.strip().lower() for t in str(text).split(",") if t.strip())


def _flag(text):
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# name -> (converter, default, help)
OPTIONS = {
    "n": (int, 100, "signal length for Gaussian experiments"),
    "ratios": (_floats, None, "comma-separated m/n grid"),
    "trials": (int, 50, "trials per grid point"),
    "seed": (int, 0, "base RNG seed"),
    "field": (str, "real", "real or complex"),
    "algo": (_names, ("saf",), "comma-separated algorithms: saf, af, wf"),
    "snr": (_floats, None, "comma-separated SNR values in dB ('inf' = noiseless)"),
    "masks": (_ints, (5,), "comma-separated mask counts K for CDP"),
    "out": (str, None, "output path (CSV results, or solution vector for 'solve')"),
    "workers": (int, 1, "parallel worker processes"),
    "mu": (float, None, "base step size (default 4 real / 7 complex)"),
    "k": (float, 4.0, "SAF smoothness exponent"),
    "gamma": (float, 1.0, "SAF smoothing scale"),
    "iters": (int, None, "maximum iterations T"),
    "success_nmse": (float, None, "success threshold on NMSE"),
    "paper_scale": (_flag, False, "full-size runs: n=1000, 256x256 images, 100 trials"),
    "large_steps": (_flag, False, "bench: larger base steps, 6 real / 10 complex"),
    "dft1d": (_flag, False, "cdp: 1-D DFT of the vectorised image instead of the 2-D DFT"),
    "size": (int, 64, "cdp: side length of the synthetic image"),
    "image": (str, None, "cdp: input PGM image"),
    "image_out": (str, None, "cdp: write the recovered image (PGM)"),
    "model_out": (str, None, "cdp: dump the K-mask model of the first trial"),
    "trace": (str, None, "solve: write the iteration trace CSV"),
    "truth": (str, None, "solve: reference signal for reporting NMSE"),
    "samples": (int, 100_000, "verify-kernel: random samples"),
    "grid": (int, 10_000, "verify-kernel: grid points"),
}

COMMAND_OPTIONS = {
    "sweep": ("n", "ratios", "trials", "seed", "field", "algo", "out", "workers", "mu", "k",
              "gamma", "iters", "success_nmse", "paper_scale"),
    "snr": ("n", "ratios", "trials", "seed", "field", "algo", "snr", "out", "workers", "mu",
            "k", "gamma", "iters", "paper_scale"),
    "bench": ("n", "ratios", "trials", "seed", "field", "algo", "out", "workers", "mu", "k",
              "gamma", "iters", "paper_scale", "large_steps"),
    "cdp": ("masks", "trials", "seed", "out", "workers", "mu", "k", "gamma", "iters",
            "success_nmse", "paper_scale", "dft1d", "size", "image", "image_out", "model_out"),
    "solve": ("seed", "algo", "out", "mu", "k", "gamma", "iters", "trace", "truth"),
    "verify-kernel": ("seed", "samples", "grid"),
}


def read_config(path):
    """Parse ``key = value`` lines (``#`` starts a comment); dashes in keys become underscores."""
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(prog="safpr", description="Smooth amplitude flow phase retrieval experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, names in COMMAND_OPTIONS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", help="key=value configuration file")
        if command == "solve":
            p.add_argument("model_file")
            p.add_argument("obs_file")
        for name in names:
            conv, default, help_ = OPTIONS[name]
            flag = "--" + name.replace("_", "-")
            if conv is _flag:
                p.add_argument(flag, action="store_const", const=True, default=None, help=help_)
            else:
                p.add_argument(flag, type=conv, default=None, help=f"{help_} (default: {default})")
    return parser


def resolve(args):
    """Merge command-line flags over the config file over built-in defaults."""
    cfg = read_config(args.config) if args.config else {}
    opts = {}
    for name in COMMAND_OPTIONS[args.command]:
        conv, default, _ = OPTIONS[name]
        value = getattr(args, name)
        if value is None and name in cfg:
            value = conv(cfg[name])
        opts[name] = default if value is None else value
    for name in ("model_file", "obs_file"):
        if hasattr(args, name):
            opts[name] = getattr(args, name)
    return opts


def _spec(kind, o, **extra):
    full = o.get("paper_scale", False)
    base = dict(
        kind=kind, trials=o["trials"], seed=o["seed"], out=o["out"], workers=o["workers"],
        mu=o["mu"], k=o["k"], gamma=o["gamma"])
    if o.get("iters") is not None:
        base["T"] = o["iters"]
    if full and o["trials"] == OPTIONS["trials"][1]:
        base["trials"] = 100
    base.update(extra)
    return ex.ExperimentSpec(**base)


def _gaussian_spec(kind, o, **extra):
    n = o["n"]
    if o.get("paper_scale") and n == OPTIONS["n"][1]:
        n = 1000
    return _spec(kind, o, n=n, field=o["field"], ratios=o["ratios"], algorithms=o["algo"], **extra)


def _emit(rows, o, columns=ex.CSV_FIELDS):
    if o["out"] is None:
        sys.stdout.write(ex.csv_header(columns))
        sys.stdout.write(ex.format_rows(rows, columns))


def cmd_sweep(o):
    extra = {} if o["success_nmse"] is None else {"success_nmse": o["success_nmse"]}
    rows = ex.run_success_sweep(_gaussian_spec(ex.SUCCESS_SWEEP, o, **extra))
    _emit(rows, o)
    for (algo, ratio), rate in sorted(ex.summarize_success(rows).items()):
        print(f"{algo} m/n={ratio:g} success={rate:.3f}", file=sys.stderr)


def cmd_snr(o):
    rows = ex.run_snr_sweep(_gaussian_spec(ex.SNR_SWEEP, o, snrs=o["snr"]))
    _emit(rows, o)
    for (algo, ratio, snr), med in sorted(ex.summarize_snr(rows).items(),
                                          key=lambda kv: (kv[0][0], kv[0][1], kv[0][2] or np.inf)):
        print(f"{algo} m/n={ratio:g} snr={snr} median_nmse={med:.3e}", file=sys.stderr)


def cmd_bench(o):
    rows = ex.run_timing_bench(_gaussian_spec(ex.TIMING_BENCH, o, large_steps=o["large_steps"]))
    _emit(rows, o)
    for (algo, ratio), s in sorted(ex.summarize_timing(rows).items()):
        print(f"{algo} m/n={ratio:g} mean_iterations={s['mean_iterations']:.2f} "
              f"mean_time={s['mean_time']:.4f}s successes={s['successes']} failures={s['failures']}",
              file=sys.stderr)


def cmd_cdp(o):
    size = o["size"]
    if o["paper_scale"] and size == OPTIONS["size"][1]:
        size = 256
    image = read_pgm(o["image"]) if o["image"] else None
    shape = image.shape if image is not None else (size, size)
    success = 1e-10 if o["success_nmse"] is None else o["success_nmse"]
    spec = _spec(ex.CDP_IMAGE, o, masks=o["masks"], image_shape=shape, success_nmse=success,
                 dft1d=o["dft1d"])
    recovered, rows = ex.run_cdp_image(spec, image)
    _emit(rows, o)
    if o["image_out"]:
        write_pgm(o["image_out"], recovered)
    if o["model_out"]:
        write_model(o["model_out"], ex.cdp_model_for(spec, shape, spec.masks[0], 0))
    rates = ex.summarize_success(rows)
    for (_, K), rate in sorted(rates.items()):
        errs = [r.rel_error for r in rows if r.ratio == K]
        print(f"K={K:g} success={rate:.3f} median_rel_error={np.median(errs):.3e}", file=sys.stderr)


def cmd_solve(o):
    model = read_model(o["model_file"])
    obs = read_observation(o["obs_file"])
    spec = ex.ExperimentSpec(kind=ex.SINGLE_SOLVE, seed=o["seed"], mu=o["mu"], k=o["k"],
                             gamma=o["gamma"], **({} if o["iters"] is None else {"T": o["iters"]}))
    z, trace = ex.run_single_solve(model, obs, spec, algorithm=o["algo"][0])
    if o["out"]:
        write_vector(o["out"], z, header=f"solution {z.size} {model.field}")
    else:
        sys.stdout.write(format_values(z))
    if o["trace"]:
        ex.write_trace(o["trace"], trace)
    msg = f"status={trace.status} iterations={trace.iterations} loss={trace.loss[-1]:.3e}"
    if o["truth"]:
        msg += f" nmse={nmse(z, read_vector(o['truth']).astype(z.dtype)):.3e}"
    print(msg, file=sys.stderr)


def cmd_verify_kernel(o):
    report = verify_kernel_properties(o["samples"], o["grid"], rng=np.random.default_rng(o["seed"]))
    for prop, r in sorted(report.items()):
        print(f"property {prop}: {'PASS' if r['passed'] else 'FAIL'} margin={r['margin']:.3e}")
    return 0 if all(r["passed"] for r in report.values()) else 1


COMMANDS = {"sweep": cmd_sweep, "snr": cmd_snr, "bench": cmd_bench, "cdp": cmd_cdp,
            "solve": cmd_solve, "verify-kernel": cmd_verify_kernel}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts) or 0
    except (ParseError, ValueError, OSError, ArithmeticError) as exc:
        print(f"safpr {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
