"""Command-line front end: parse a config file, run a named experiment, and
emit results.csv, summary.json and (for planar membership experiments) a
portable greymap of the scanned fragment.

Config files are INI-style: one section per experiment run, flat key=value
entries.  Unknown keys are rejected.  Exit codes: 0 success, 1 experiment
failure (some check missed its band), 2 parse error, 3 validation error.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from . import __version__, analysis, dynamics, files, lattice, quasiperiodic
from ._kernels import BACKEND
from .imaging import render_fragment, write_pgm
from .lattice import Fragment
from .reports import ResultRow, fragment_label, write_csv, write_json

PARSE_ERROR, VALIDATION_ERROR, EXPERIMENT_FAILURE = 2, 3, 1


class ConfigError(ValueError):
    pass


def _parse_fragment(raw: str) -> Fragment:
    vals = [int(v) for v in raw.split()]
    if len(vals) % 2 or not vals:
        raise ConfigError(f"fragment needs 2n integers (corner then edges), got {raw!r}")
    n = len(vals) // 2
    if any(e <= 0 for e in vals[n:]):
        raise ConfigError(f"fragment edges must be positive, got {vals[n:]}")
    return Fragment(tuple(vals[:n]), tuple(vals[n:]))


def _floats(raw: str) -> list[float]:
    return [float(v) for v in raw.split()]


def _ints(raw: str) -> list[int]:
    return [int(v) for v in raw.split()]


class RunContext:
    def __init__(self, options: dict, base_dir: str, seed: int, threads: int):
        self.options = options
        self.base_dir = base_dir
        self.seed = seed
        self.threads = threads
        self.rows: list[ResultRow] = []
        self.images: dict[str, object] = {}
        self.diagnostics: dict[str, object] = {}

    def path(self, raw: str) -> str:
        return raw if os.path.isabs(raw) else os.path.join(self.base_dir, raw)

    def system(self) -> dynamics.QuantizedSystem:
        return files.load_system(self.path(self.options["system"]))

    def fragment(self) -> Fragment:
        return _parse_fragment(self.options["fragment"])

    def add(self, experiment, parameter, statistic, target, passed, frag=None):
        self.rows.append(
            ResultRow(
                experiment,
                parameter,
                float(statistic),
                float(target),
                float(statistic) - float(target),
                bool(passed),
                self.seed,
                fragment_label(frag),
            )
        )


def _rotation_angle_entries(sys: dynamics.QuantizedSystem) -> tuple[float, float]:
    L = sys.L
    if sys.dim != 2 or abs(np.linalg.det(L) - 1.0) > 1e-9 or np.max(np.abs(L @ L.T - np.eye(2))) > 1e-9:
        raise ConfigError("experiment requires a planar rotation system")
    return float(L[0, 0]), float(L[1, 0])


def _neutral_spec(sys: dynamics.QuantizedSystem) -> analysis.NeutralSpec:
    c, s = _rotation_angle_entries(sys)
    theta = float(np.arctan2(s, c)) % (2 * np.pi)
    return analysis.neutral_build(np.eye(2), [theta], sys.Psi)


def run_rotation_reach(ctx: RunContext) -> None:
    sys_ = ctx.system()
    frag = ctx.fragment()
    c, s = _rotation_angle_entries(sys_)
    target = 1.0 - (c + s - 1.0) ** 2
    counts, flags = dynamics.preimage_count_scan(sys_, frag, 1)
    ctx.diagnostics["grazing"] = flags
    value = int(np.count_nonzero(counts > 0)) / frag.count
    ctx.add("rotation-reach", "depth=1", value, target, abs(value - target) < 1e-3, frag)
    mask = (counts > 0).reshape(frag.ell)

    def member(pts):
        rel = pts - np.asarray(frag.a)
        return mask[rel[:, 0], rel[:, 1]]

    ctx.images["rotation-reach.pgm"] = render_fragment(member, frag, batch=True)


def run_hole_frequency(ctx: RunContext) -> None:
    thetas = _floats(ctx.options.get("thetas", "0.5235987755982988 0.6283185307179586 1.0"))
    samples = int(ctx.options.get("samples", "1000000"))
    origin = dynamics.FiniteLatticeSet.from_points([(0, 0)])
    for theta in thetas:
        sys_ = dynamics.rotation_system(theta)
        est = analysis.kernel_estimate(sys_, origin, samples, ctx.seed)
        beta = analysis.hole_frequency_2d(theta)
        measured = est.empty_probability()
        ctx.add("hole-frequency", f"theta={theta:g}", measured, beta, abs(measured - beta) < 2e-3)


def run_error_uniformity(ctx: RunContext) -> None:
    rep = analysis.error_uniformity_test(
        ctx.system(), ctx.fragment(), int(ctx.options.get("horizon", "4")),
        int(ctx.options.get("bins", "16")),
    )
    ctx.diagnostics["grazing"] = rep.meta["grazing"]
    ctx.diagnostics["max_bin_deviation"] = rep.meta.get("max_bin_deviation")
    ctx.add("error-uniformity", f"horizon={rep.meta['horizon']}", rep.statistic,
            rep.threshold, rep.passed, ctx.fragment())


def run_error_independence(ctx: RunContext) -> None:
    j, k = _ints(ctx.options.get("pair", "1 2"))
    rep = analysis.error_independence_test(
        ctx.system(), ctx.fragment(), j, k, int(ctx.options.get("bins", "8"))
    )
    ctx.add("error-independence", f"pair={j},{k}", rep.statistic, rep.threshold,
            rep.passed, ctx.fragment())


def run_mixing(ctx: RunContext) -> None:
    sys_ = ctx.system()
    frag = ctx.fragment()
    depth = int(ctx.options.get("depth", "2"))
    meas_a = float(ctx.options.get("measure_a", "0.3"))
    meas_b = float(ctx.options.get("measure_b", "0.4"))
    dim = depth * sys_.dim
    A = quasiperiodic.stack_event(sys_.L, depth, quasiperiodic.slab_window(dim, meas_a, 0))
    B = quasiperiodic.stack_event(sys_.L, depth, quasiperiodic.slab_window(dim, meas_b, 1))
    for rep in analysis.mixing_test(sys_, A, B, int(ctx.options.get("kmax", "8")), frag):
        ctx.add("mixing", f"k={rep.meta['k']}", rep.statistic, rep.threshold, rep.passed, frag)


def run_martingale(ctx: RunContext) -> None:
    sys_ = ctx.system()
    frag = ctx.fragment()
    event = None
    if "event_measure" in ctx.options:
        # restrict the comparison to a backward-stack event of this size
        event = quasiperiodic.stack_event(
            sys_.L, 1,
            quasiperiodic.slab_window(sys_.dim, float(ctx.options["event_measure"])),
            "backward",
        )
    for N in _ints(ctx.options.get("horizons", "1 2 3")):
        rep = analysis.martingale_check(sys_, frag, N, event)
        label = f"N={N}" if event is None else f"N={N},event"
        ctx.add("martingale", label, rep.statistic, rep.threshold, rep.passed, frag)


def run_clt(ctx: RunContext) -> None:
    sys_ = ctx.system()
    frag = ctx.fragment()
    spec = _neutral_spec(sys_)
    N = int(ctx.options.get("horizon", "400"))
    alphas = _floats(ctx.options.get("alphas", "0.5 1 2"))
    for rep in analysis.clt_experiment(sys_, spec, frag, N, alphas):
        ctx.add("clt", f"alpha={rep.meta['alpha']:g}", rep.meta["empirical"],
                rep.meta["target"], rep.passed, frag)


def run_max_deviation(ctx: RunContext) -> None:
    sys_ = ctx.system()
    frag = ctx.fragment()
    spec = _neutral_spec(sys_)
    N = int(ctx.options.get("horizon", "400"))
    reports, _ = analysis.max_deviation_experiment(
        sys_, spec, frag, N,
        oracle_paths=int(ctx.options.get("oracle_paths", "100000")),
        oracle_steps=int(ctx.options.get("oracle_steps", "1000")),
        seed=ctx.seed,
    )
    for rep in reports:
        ctx.add("max-deviation", f"plane={rep.meta['plane']}", rep.statistic,
                rep.threshold, rep.passed, frag)


def run_qp_frequency(ctx: RunContext) -> None:
    q = files.load_qpset(ctx.path(ctx.options["qpset"]))
    frag = ctx.fragment()
    if ctx.threads > 1:
        # generic chunked scan split across workers; counts merge exactly
        est = lattice.frequency(q.contains_many, frag, batch=True, workers=ctx.threads)
    else:
        est = quasiperiodic.fragment_frequency(q, frag)
    target = quasiperiodic.theoretical_frequency(q)
    ctx.add("qp-frequency", "window", est.value, target, abs(est.value - target) < 0.01, frag)


def run_frequency_preservation(ctx: RunContext) -> None:
    sys_ = ctx.system()
    frag = ctx.fragment()
    depth = int(ctx.options.get("depth", "2"))
    measure = float(ctx.options.get("measure", "0.3"))
    A = quasiperiodic.stack_event(
        sys_.L, depth, quasiperiodic.slab_window(depth * sys_.dim, measure, 0)
    )
    gap, f_a, _ = analysis.frequency_preservation_gap(sys_, A, frag)
    ctx.add("frequency-preservation", f"measure={measure:g}", gap, 0.0, gap < 0.01, frag)


def run_weyl(ctx: RunContext) -> None:
    trials = int(ctx.options.get("trials", "1000"))
    rng = np.random.Generator(np.random.Philox(key=ctx.seed))
    worst = 0.0
    bound_ok = True
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        frag = Fragment(
            tuple(int(v) for v in rng.integers(-20, 20, n)),
            tuple(int(v) for v in rng.integers(1, 9, n)),
        )
        omega = rng.uniform(-3, 3, n)
        omega[rng.random(n) < 0.2] = rng.integers(-3, 4)
        closed = lattice.trig_average(omega, frag)
        direct = lattice.trig_average_direct(omega, frag)
        worst = max(worst, abs(closed - direct))
        bound = lattice.weyl_bound(omega, frag.min_edge())
        if abs(closed) > bound + 1e-12:
            bound_ok = False
    ctx.add("weyl", f"trials={trials}", worst, 1e-10, worst < 1e-10 and bound_ok)


def run_kernel_mean(ctx: RunContext) -> None:
    sys_ = ctx.system()
    samples = int(ctx.options.get("samples", "200000"))
    sources = {
        "origin": dynamics.FiniteLatticeSet.from_points([(0,) * sys_.dim]),
        "origin,e1": dynamics.FiniteLatticeSet.from_points(
            [(0,) * sys_.dim, (1,) + (0,) * (sys_.dim - 1)]
        ),
    }
    name = ctx.options.get("source", "origin")
    if name not in sources:
        raise ConfigError(f"source must be one of {sorted(sources)}")
    A = sources[name]
    est = analysis.kernel_estimate(sys_, A, samples, ctx.seed)
    target = len(A) / abs(sys_.det)
    mean = est.mean_cardinality()
    ok = abs(mean - target) < 3 * est.mean_cardinality_sigma() + 1e-9
    ctx.add("kernel-mean", f"source={name}", mean, target, ok)


EXPERIMENTS = {
    "rotation-reach": (run_rotation_reach, {"system", "fragment"}),
    "hole-frequency": (run_hole_frequency, {"thetas", "samples"}),
    "error-uniformity": (run_error_uniformity, {"system", "fragment", "horizon", "bins"}),
    "error-independence": (run_error_independence, {"system", "fragment", "pair", "bins"}),
    "mixing": (run_mixing, {"system", "fragment", "depth", "kmax", "measure_a", "measure_b"}),
    "martingale": (run_martingale, {"system", "fragment", "horizons", "event_measure"}),
    "clt": (run_clt, {"system", "fragment", "horizon", "alphas"}),
    "max-deviation": (
        run_max_deviation,
        {"system", "fragment", "horizon", "oracle_paths", "oracle_steps"},
    ),
    "qp-frequency": (run_qp_frequency, {"qpset", "fragment"}),
    "frequency-preservation": (
        run_frequency_preservation,
        {"system", "fragment", "depth", "measure"},
    ),
    "weyl": (run_weyl, {"trials"}),
    "kernel-mean": (run_kernel_mean, {"system", "samples", "source"}),
}

COMMON_KEYS = {"experiment", "seed", "out"}


def _load_section(path: str, name: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if name not in parser:
        raise ConfigError(f"config has no section [{name}]")
    return dict(parser[name])


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="quantlat",
        description="Run lattice quantization experiments described in a config file.",
    )
    ap.add_argument("--config", help="config file path")
    ap.add_argument("--experiment", help="section name to run")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--seed", type=int, help="seed override")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for fragment scans")
    ap.add_argument("--list", action="store_true", help="list registered experiments and exit")
    args = ap.parse_args(argv)

    if args.list:
        for name in sorted(EXPERIMENTS):
            print(name)
        return 0
    if not args.config or not args.experiment:
        print("error: --config and --experiment are required (or use --list)", file=sys.stderr)
        return PARSE_ERROR

    try:
        options = _load_section(args.config, args.experiment)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return PARSE_ERROR

    kind = options.get("experiment", args.experiment)
    if kind not in EXPERIMENTS:
        print(f"error: unknown experiment {kind!r}; use --list", file=sys.stderr)
        return VALIDATION_ERROR
    runner, allowed = EXPERIMENTS[kind]
    unknown = set(options) - allowed - COMMON_KEYS
    if unknown:
        print(f"error: unknown config keys {sorted(unknown)} for {kind}", file=sys.stderr)
        return VALIDATION_ERROR

    seed = args.seed if args.seed is not None else int(options.get("seed", "0"))
    out_dir = args.out or options.get("out", ".")
    ctx = RunContext(options, os.path.dirname(os.path.abspath(args.config)), seed, args.threads)
    try:
        runner(ctx)
    except (ConfigError, files.FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VALIDATION_ERROR

    os.makedirs(out_dir, exist_ok=True)
    write_csv(ctx.rows, os.path.join(out_dir, "results.csv"))
    meta = {
        "experiment": kind,
        "section": args.experiment,
        "seed": seed,
        "threads": args.threads,
        "kernel_backend": BACKEND,
        "version": __version__,
        "config": {k: options[k] for k in sorted(options)},
        "diagnostics": ctx.diagnostics,
    }
    write_json(ctx.rows, meta, os.path.join(out_dir, "summary.json"))
    for fname, img in ctx.images.items():
        write_pgm(img, os.path.join(out_dir, fname))
    for row in ctx.rows:
        status = "pass" if row.passed else "FAIL"
        print(f"{row.experiment} {row.parameter}: {status} "
              f"statistic={row.statistic!r} target={row.target!r}")
    return 0 if all(r.passed for r in ctx.rows) else EXPERIMENT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
