"""Seeded Monte-Carlo experiment drivers with deterministic CSV output.

Each trial draws everything it needs (signal, sensing model, noise and the
power-iteration start) from ``make_rng(seed, stream_id)`` where the stream id
hashes the grid value and the trial index. Results therefore do not depend
on grid order, worker count or completion order. Rows are written in
(grid, trial, algorithm) order and flushed after each trial.

Wall-clock times are not reproducible, so they go to a sidecar file
``<out>.timing.csv`` rather than into the results CSV.
"""
from __future__ import annotations

import csv
import hashlib
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .initialization import InitConfig, estimate_norm, initialize
from .measurement import build_cdp_model, build_gaussian_model, observe
from .numerics import REAL, align_phase, check_field, make_rng, nmse, sample_gaussian_vector
from .objective import make_objective
from .solver import SolverConfig, run

SUCCESS_SWEEP = "success_sweep"
SNR_SWEEP = "snr_sweep"
TIMING_BENCH = "timing_bench"
CDP_IMAGE = "cdp_image"
SINGLE_SOLVE = "single_solve"
KINDS = (SUCCESS_SWEEP, SNR_SWEEP, TIMING_BENCH, CDP_IMAGE, SINGLE_SOLVE)

BENCH_NMSE = 1e-14
BENCH_RATIO = {"real": 2.0, "complex": 4.0}
LARGE_BENCH_MU = {"real": 6.0, "complex": 10.0}
# WF steps are divided by the squared norm estimate (intensity loss scales as ||x||^2)
WF_MU = 0.4


@dataclass
class ExperimentSpec:
    """One sweep. ``ratios`` is the m/n grid (``masks`` plays that role for CDP).

    Left as ``None``, ``ratios`` defaults to 3 for success sweeps, 4 for SNR
    sweeps and 2 (real) / 4 (complex) for the timing bench; ``snrs`` defaults
    to 20, 30, 40 and 50 dB.
    """

    kind: str
    n: int = 100
    field: str = REAL
    ratios: tuple | None = None
    snrs: tuple | None = None
    masks: tuple = (5,)
    image_shape: tuple = (64, 64)
    trials: int = 50
    algorithms: tuple = ("saf",)
    success_nmse: float = 1e-5
    seed: int = 0
    out: str | None = None
    workers: int = 1
    mu: float | None = None
    k: float = 4.0
    gamma: float = 1.0
    T: int = 5000
    large_steps: bool = False
    dft1d: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        check_field(self.field)
        if self.ratios is None:
            self.ratios = {SNR_SWEEP: (4.0,), TIMING_BENCH: (BENCH_RATIO[self.field],)}.get(self.kind, (3.0,))
        if self.snrs is None:
            self.snrs = (20.0, 30.0, 40.0, 50.0) if self.kind == SNR_SWEEP else ()
        self.ratios = tuple(float(r) for r in self.ratios)
        self.snrs = tuple(float(x) for x in self.snrs)
        self.masks = tuple(int(K) for K in self.masks)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.success_nmse <= 0:
            raise ValueError("success_nmse must be positive")
        grid = self.masks if self.kind == CDP_IMAGE else self.ratios
        if self.kind in (SUCCESS_SWEEP, SNR_SWEEP, CDP_IMAGE) and len(grid) == 0:
            raise ValueError("experiment grid is empty")
        if self.kind == SNR_SWEEP and len(self.snrs) == 0:
            raise ValueError("snr sweep needs at least one SNR value")


@dataclass
class ResultRow:
    experiment: str
    algorithm: str
    field: str
    n: int
    m: int
    ratio: float
    snr_db: float | None
    sigma2: float | None
    trial: int
    seed: int
    stream_id: int
    success: bool
    nmse: float
    rel_error: float
    iterations: int
    status: str
    wall_time: float = 0.0


CSV_FIELDS = tuple(f.name for f in fields(ResultRow) if f.name != "wall_time")
TIMING_FIELDS = ("experiment", "algorithm", "ratio", "snr_db", "trial", "wall_time")


def stream_id(*key) -> int:
    """64-bit stream id from a grid key and trial index (order independent)."""
    text = "|".join(f"{k:.17g}" if isinstance(k, float) else str(k) for k in key)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def format_rows(rows, columns=CSV_FIELDS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        d = asdict(r) if isinstance(r, ResultRow) else r
        w.writerow([_cell(d[c]) for c in columns])
    return buf.getvalue()


def csv_header(columns=CSV_FIELDS) -> str:
    return ",".join(columns) + "\n"


class RowWriter:
    """Append-only CSV writer flushing after every trial; no-op without a path."""

    def __init__(self, path):
        self.path = path
        self._fh = self._tfh = None
        if path:
            self._fh = open(path, "w", newline="")
            self._fh.write(csv_header())
            self._tfh = open(os.fspath(path) + ".timing.csv", "w", newline="")
            self._tfh.write(csv_header(TIMING_FIELDS))

    def write(self, rows):
        if self._fh is None:
            return
        self._fh.write(format_rows(rows))
        self._fh.flush()
        self._tfh.write(format_rows(rows, TIMING_FIELDS))
        self._tfh.flush()

    def close(self):
        for fh in (self._fh, self._tfh):
            if fh is not None:
                fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _ordered_map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield fn(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, tasks)


def _drive(spec: ExperimentSpec, fn, tasks):
    rows = []
    with RowWriter(spec.out) as writer:
        for trial_rows in _ordered_map(fn, tasks, spec.workers):
            writer.write(trial_rows)
            rows.extend(trial_rows)
    return rows


def solver_config(spec: ExperimentSpec, algo: str, eta: float, stop_nmse=None) -> SolverConfig:
    """Per-algorithm solver settings shared by every driver."""
    objective = make_objective(algo, spec.k, spec.gamma)
    mu = spec.mu
    if algo == "wf":
        mu = (WF_MU if mu is None else mu) / max(eta, 1e-300) ** 2
    return SolverConfig(objective=objective, mu=mu, T=spec.T, stop_nmse_tol=stop_nmse)


def _gaussian_trial(args):
    spec, ratio, snr, trial, stop_nmse, success_nmse = args
    n = spec.n
    m = max(1, int(round(ratio * n)))
    key = (spec.field, ratio) if snr is None else (spec.field, ratio, snr)
    sid = stream_id(*key, trial)
    rng = make_rng(spec.seed, sid)
    x = sample_gaussian_vector(n, spec.field, rng)
    model = build_gaussian_model(m, n, spec.field, rng)
    obs = observe(model, x, snr, rng)
    z0 = initialize(model, obs, rng, InitConfig())
    eta = estimate_norm(obs)
    rows = []
    for algo in spec.algorithms:
        cfg = solver_config(spec, algo, eta, stop_nmse)
        t0 = time.perf_counter()
        z, trace = run(model, obs, cfg, z0, truth=x)
        wall = time.perf_counter() - t0
        err = nmse(z, x)
        rows.append(ResultRow(
            experiment=spec.kind, algorithm=algo, field=spec.field, n=n, m=m,
            ratio=float(ratio), snr_db=None if snr is None else float(snr),
            sigma2=obs.sigma2, trial=trial, seed=spec.seed, stream_id=sid,
            success=bool(err < success_nmse), nmse=err, rel_error=float(np.sqrt(err)),
            iterations=trace.iterations, status=trace.status, wall_time=wall))
    return rows


def run_success_sweep(spec: ExperimentSpec):
    """Noiseless success rate per m/n; every algorithm starts from the same initial point."""
    if spec.kind != SUCCESS_SWEEP:
        raise ValueError(f"expected a {SUCCESS_SWEEP} spec, got {spec.kind}")
    tasks = [(spec, float(r), None, t, spec.success_nmse, spec.success_nmse)
             for r in spec.ratios for t in range(spec.trials)]
    return _drive(spec, _gaussian_trial, tasks)


def _parse_snr(s):
    s = float(s)
    return None if np.isposinf(s) else s


def run_snr_sweep(spec: ExperimentSpec):
    """Final NMSE under intensity noise; runs until the gradient test or ``T``.

    An infinite SNR entry gives the noiseless problem.
    """
    if spec.kind != SNR_SWEEP:
        raise ValueError(f"expected a {SNR_SWEEP} spec, got {spec.kind}")
    tasks = [(spec, float(r), _parse_snr(s), t, None, spec.success_nmse)
             for r in spec.ratios for s in spec.snrs for t in range(spec.trials)]
    return _drive(spec, _gaussian_trial, tasks)


def run_timing_bench(spec: ExperimentSpec):
    """Iterations and wall time until NMSE <= 1e-14.

    ``large_steps`` raises the SAF/AF base step to 6 (real) or 10
    (complex).
    """
    if spec.kind != TIMING_BENCH:
        raise ValueError(f"expected a {TIMING_BENCH} spec, got {spec.kind}")
    if spec.large_steps and spec.mu is None:
        spec = ExperimentSpec(**{**asdict(spec), "mu": LARGE_BENCH_MU[spec.field]})
    tasks = [(spec, float(r), None, t, BENCH_NMSE, spec.success_nmse)
             for r in spec.ratios for t in range(spec.trials)]
    return _drive(spec, _gaussian_trial, tasks)


def summarize_success(rows):
    """``{(algorithm, ratio): success_rate}``."""
    acc = {}
    for r in rows:
        acc.setdefault((r.algorithm, r.ratio), []).append(r.success)
    return {k: float(np.mean(v)) for k, v in acc.items()}


def summarize_snr(rows):
    """``{(algorithm, ratio, snr_db): median final NMSE}``."""
    acc = {}
    for r in rows:
        acc.setdefault((r.algorithm, r.ratio, r.snr_db), []).append(r.nmse)
    return {k: float(np.median(v)) for k, v in acc.items()}


def snr_slope(rows, algorithm="saf", ratio=None):
    """Least-squares slope of log10(median NMSE) against SNR in dB."""
    med = summarize_snr(rows)
    pts = sorted((k[2], v) for k, v in med.items()
                 if k[0] == algorithm and k[2] is not None and (ratio is None or k[1] == ratio))
    snr, val = np.array(pts).T
    return float(np.polyfit(snr, np.log10(val), 1)[0])


def summarize_timing(rows, threshold=BENCH_NMSE):
    """Mean iterations/time over successful trials, per algorithm and ratio.

    Returns ``{(algorithm, ratio): {"mean_iterations", "mean_time", "successes", "failures"}}``.
    """
    acc = {}
    for r in rows:
        d = acc.setdefault((r.algorithm, r.ratio), {"it": [], "t": [], "fail": 0})
        if r.nmse <= threshold:
            d["it"].append(r.iterations)
            d["t"].append(r.wall_time)
        else:
            d["fail"] += 1
    return {k: {"mean_iterations": float(np.mean(d["it"])) if d["it"] else float("nan"),
                "mean_time": float(np.mean(d["t"])) if d["t"] else float("nan"),
                "successes": len(d["it"]), "failures": d["fail"]}
            for k, d in acc.items()}


def synthetic_image(h: int = 64, w: int = 64) -> np.ndarray:
    """Smooth test image in ``[0, 1]``: a diagonal ramp, a bright disc and a faint texture."""
    yy, xx = np.mgrid[0:h, 0:w]
    yy = yy / max(h - 1, 1)
    xx = xx / max(w - 1, 1)
    img = 0.1 + 0.25 * (xx + yy)
    img = img + 0.3 * ((xx - 0.5) ** 2 + (yy - 0.6) ** 2 < 0.08)
    img = img + 0.1 * np.sin(6 * np.pi * xx) * np.cos(4 * np.pi * yy)
    return np.clip(img, 0.0, 1.0)


def _cdp_trial(args):
    spec, image, K, trial = args
    shape = image.shape
    x = image.ravel().astype(np.float64)
    n = x.size
    sid = stream_id("cdp", shape, K, trial)
    rng = make_rng(spec.seed, sid)
    model = build_cdp_model(n, K, rng, shape=None if spec.dft1d else shape, field=REAL)
    obs = observe(model, x)
    z0 = initialize(model, obs, rng, InitConfig())
    cfg = solver_config(spec, "saf", 0.0, spec.success_nmse)
    t0 = time.perf_counter()
    z, trace = run(model, obs, cfg, z0, truth=x)
    wall = time.perf_counter() - t0
    err = nmse(z, x)
    row = ResultRow(
        experiment=CDP_IMAGE, algorithm="saf", field=REAL, n=n, m=model.m, ratio=float(K),
        snr_db=None, sigma2=None, trial=trial, seed=spec.seed, stream_id=sid,
        success=bool(err < spec.success_nmse), nmse=err, rel_error=float(np.sqrt(err)),
        iterations=trace.iterations, status=trace.status, wall_time=wall)
    recovered = align_phase(z, x).reshape(shape) if trial == 0 else None
    return [row], recovered


def run_cdp_image(spec: ExperimentSpec, image=None):
    """Recover a real grayscale image from coded diffraction patterns with SAF.

    Masks act on the image and a 2-D DFT follows; ``spec.dft1d`` switches to
    a 1-D DFT of the row-major vectorisation. ``spec.masks`` lists the K
    values; ``success_nmse`` is on the squared relative error. Returns ``(recovered image of the first (K, trial 0) run,
    rows)``; the recovered image is sign-aligned with the truth.
    """
    if spec.kind != CDP_IMAGE:
        raise ValueError(f"expected a {CDP_IMAGE} spec, got {spec.kind}")
    if image is None:
        image = synthetic_image(*spec.image_shape)
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {image.shape}")
    tasks = [(spec, image, int(K), t) for K in spec.masks for t in range(spec.trials)]
    rows, recovered = [], None
    with RowWriter(spec.out) as writer:
        for trial_rows, rec in _ordered_map(_cdp_trial, tasks, spec.workers):
            writer.write(trial_rows)
            rows.extend(trial_rows)
            if recovered is None and rec is not None:
                recovered = rec
    return recovered, rows


def cdp_model_for(spec: ExperimentSpec, shape, K: int, trial: int = 0):
    """The exact CDP model used by :func:`run_cdp_image` for ``(K, trial)``."""
    n = int(np.prod(shape))
    rng = make_rng(spec.seed, stream_id("cdp", tuple(shape), K, trial))
    return build_cdp_model(n, K, rng, shape=None if spec.dft1d else tuple(shape), field=REAL)


def run_single_solve(model, obs, spec: ExperimentSpec | None = None, algorithm: str = "saf",
                     rng=None):
    """Initialise and solve a user instance without ground truth.

    Stops on the relative-gradient test or after ``T`` iterations.
    Returns ``(z, trace)``.
    """
    from .numerics import ContractError

    if spec is None:
        spec = ExperimentSpec(kind=SINGLE_SOLVE)
    if obs.m != model.m:
        raise ContractError(f"observation file has {obs.m} entries but the model has m={model.m} rows")
    if rng is None:
        rng = make_rng(spec.seed, 0)
    z0 = initialize(model, obs, rng, InitConfig())
    cfg = solver_config(spec, algorithm, estimate_norm(obs))
    return run(model, obs, cfg, z0)


TRACE_FIELDS = ("t", "loss", "step", "backtracks", "armijo", "grad_norm", "nmse")


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        fh.write(csv_header(TRACE_FIELDS))
        fh.write(format_rows(trace.rows(), TRACE_FIELDS))
