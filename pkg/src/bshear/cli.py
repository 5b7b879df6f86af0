"""Command-line front end.

Subcommands: build (construct + cache systems), run {frame-sweep | gramian |
gelfand | nterm | cross-decay} (reports as CSV plus optional PNG), and
transform (analyze an image into stacked coefficients, or reconstruct one
through the inverse frame operator).

Configuration comes from an optional JSON file (--config) plus flags; flags
win.  Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import fileio
from .errors import ConfigurationError, ConvergenceError, NumericalError
from .experiments import (SystemParams, build_systems, cross_decay_curve,
                          frame_bound_sweep, frame_operator_handle,
                          gelfand_table, gramian_report, hybrid_for,
                          nterm_curve)
from .cartoon import random_cartoon_spec, rasterize_cartoon
from .geometry import build_domain
from .hybrid import HybridCoefficients
from .linalg import cg_solve
from .shearlet import default_ladder
from .wavelet import build_wavelet_system

DEFAULT_OFFSETS = (7.31, 5.72, 4.63, 3.18, 0.35, -3.0, -6.0)
DEFAULT_S_VALUES = (0.0, 0.5, 1.0, 1.5)


@dataclasses.dataclass
class RunConfig:
    n: int = 256
    scales: int = 4
    directions: tuple | None = None
    family: str = "db2"
    generator: str = "bspline"
    tau: float = 1.0 / 3.0
    offset: float = 4.0
    offsets: tuple = DEFAULT_OFFSETS
    s_values: tuple = DEFAULT_S_VALUES
    seed: int = 1234
    tol: float | None = None
    dense_limit: int = 4000
    cache_dir: str = "./cache"
    out_dir: str = "./out"
    plot: bool = False

    def system_params(self) -> SystemParams:
        directions = None if self.directions is None else tuple(self.directions)
        return SystemParams(n=self.n, scales=self.scales, directions=directions,
                            family=self.family, tau=self.tau,
                            generator=self.generator)

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["directions"] = list(self.directions) if self.directions else \
            default_ladder(self.scales)
        return d


def _parse_list(text, cast=float):
    return tuple(cast(v) for v in str(text).replace(" ", "").split(",") if v != "")


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        with open(args.config) as fh:
            data = json.load(fh)
        unknown = set(data) - {f.name for f in dataclasses.fields(RunConfig)}
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        for key, val in data.items():
            if key in ("directions", "offsets", "s_values") and val is not None:
                val = tuple(val)
            setattr(cfg, key, val)
    overrides = {
        "n": getattr(args, "n", None),
        "scales": getattr(args, "scales", None),
        "family": getattr(args, "family", None),
        "generator": getattr(args, "generator", None),
        "tau": getattr(args, "tau", None),
        "offset": getattr(args, "offset", None),
        "seed": getattr(args, "seed", None),
        "tol": getattr(args, "tol", None),
        "dense_limit": getattr(args, "dense_limit", None),
        "cache_dir": getattr(args, "cache_dir", None),
        "out_dir": getattr(args, "out", None),
    }
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "directions", None):
        cfg.directions = _parse_list(args.directions, int)
    if getattr(args, "offsets", None):
        cfg.offsets = _parse_list(args.offsets)
    if getattr(args, "s", None):
        cfg.s_values = _parse_list(args.s)
    if getattr(args, "plot", False):
        cfg.plot = True
    return cfg


def build_systems_cached(cfg: RunConfig, log=print):
    """Build (or load) the systems; every run reads filters back from the
    cache so that repeated runs see bit-identical operators."""
    os.makedirs(cfg.cache_dir, exist_ok=True)
    params = cfg.system_params()
    key = fileio.cache_key(cfg.n, cfg.scales, params.ladder(), cfg.generator)
    path = os.path.join(cfg.cache_dir, key)
    shearlets = None
    if os.path.exists(path):
        try:
            shearlets = fileio.read_filter_cache(path)
            log(f"cache hit: {path}")
        except ConfigurationError as exc:
            log(f"warning: rebuilding corrupt cache {path}: {exc}")
            shearlets = None
    if shearlets is None:
        _, _, fresh = build_systems(params)
        fileio.write_filter_cache(path, fresh)
        shearlets = fileio.read_filter_cache(path)
        log(f"built and cached: {path}")
    domain = build_domain(cfg.n)
    wavelets = build_wavelet_system(domain, cfg.family, cfg.scales)
    return domain, wavelets, shearlets


def cmd_build(cfg: RunConfig, log=print) -> int:
    domain, wavelets, shearlets = build_systems_cached(cfg, log)
    bss = hybrid_for(cfg.system_params(), cfg.offset, wavelets, shearlets)
    os.makedirs(cfg.out_dir, exist_ok=True)
    sel_path = os.path.join(cfg.out_dir, f"selection_t{cfg.offset:g}.csv")
    fileio.write_selection_csv(sel_path, bss)
    log(f"wavelet atoms kept: {bss.n_wavelet} / {wavelets.size}")
    log(f"shearlet atoms kept: {bss.n_shearlet} "
        f"({len(shearlets.channels)} channels)")
    log(f"selection written: {sel_path}")
    return 0


def _maybe_plot(cfg: RunConfig, report, path_png: str):
    if not cfg.plot:
        return
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    if report.kind == "frame_sweep":
        t = report.column("t")
        q = report.column("quotient")
        ax.plot(t, np.where(np.isfinite(q), q, np.nan), "o-")
        ax.set_xlabel("offset t")
        ax.set_ylabel("frame-bound quotient")
        ax.set_yscale("log")
    elif report.kind == "nterm":
        N = report.column("N")
        ax.loglog(N, report.column("err2_hybrid"), "o-", label="hybrid")
        ax.loglog(N, report.column("err2_wavelet"), "s--", label="wavelet")
        ax.set_xlabel("N")
        ax.set_ylabel("squared error")
        ax.legend()
    elif report.kind == "cross_decay":
        ax.semilogy(report.column("t"), report.column("E"), "o-")
        ax.set_xlabel("offset t")
        ax.set_ylabel("cross energy E(t)")
    elif report.kind == "gelfand":
        for s in sorted(set(report.column("s"))):
            rows = [r for r in report.rows if r["s"] == s]
            ax.plot([r["t"] for r in rows], [r["sigma_max"] for r in rows],
                    "o-", label=f"s={s:g}")
        ax.set_xlabel("offset t")
        ax.set_ylabel("sigma_max")
        ax.legend()
    elif report.kind == "gramian":
        G = report.metadata.get("dense_gramian")
        if G is None:
            plt.close(fig)
            return
        ax.imshow(np.log10(np.abs(G) + 1e-12), cmap="viridis")
        ax.set_title("log10 |Gramian|")
    fig.tight_layout()
    fig.savefig(path_png, dpi=130)
    plt.close(fig)


def cmd_run(kind: str, cfg: RunConfig, log=print) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    params = cfg.system_params()
    _, wavelets, shearlets = build_systems_cached(cfg, log)
    if kind == "frame-sweep":
        report = frame_bound_sweep(params, cfg.offsets,
                                   eig_tol=cfg.tol or 1.0e-3, seed=cfg.seed)
    elif kind == "gramian":
        bss = hybrid_for(params, cfg.offset, wavelets, shearlets)
        report = gramian_report(bss, dense_limit=cfg.dense_limit, seed=cfg.seed)
    elif kind == "gelfand":
        report = gelfand_table(params, cfg.offsets, cfg.s_values,
                               eig_tol=cfg.tol or 3.0e-3, seed=cfg.seed)
    elif kind == "nterm":
        bss = hybrid_for(params, cfg.offset, wavelets, shearlets)
        spec = random_cartoon_spec(cfg.seed, crossing=True)
        f = rasterize_cartoon(spec, bss.domain)
        N_list = np.unique(np.geomspace(8, cfg.n**2 // 8, 10).astype(int))
        report = nterm_curve(bss, f, N_list, cg_tol=cfg.tol or 1.0e-8)
    elif kind == "cross-decay":
        report = cross_decay_curve(params, cfg.offsets, seed=cfg.seed)
    else:
        raise ConfigurationError(
            f"unknown experiment {kind!r}; choose from frame-sweep, gramian, "
            "gelfand, nterm, cross-decay"
        )
    report.params["config"] = cfg.echo()
    path = os.path.join(cfg.out_dir, f"{report.kind}.csv")
    fileio.write_report_csv(path, report)
    _maybe_plot(cfg, report, os.path.join(cfg.out_dir, f"{report.kind}.png"))
    log(f"report written: {path}")
    failures = [r for r in report.rows if r.get("error")]
    if failures:
        log(f"{len(failures)} rows failed")
        return 3
    return 0


def cmd_transform(direction: str, input_path: str, cfg: RunConfig, log=print) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    _, wavelets, shearlets = build_systems_cached(cfg, log)
    bss = hybrid_for(cfg.system_params(), cfg.offset, wavelets, shearlets)
    n = cfg.n
    if direction == "analyze":
        f = fileio.read_pgm(input_path) if input_path.endswith(".pgm") \
            else fileio.read_raw(input_path, (n, n))
        if f.shape != (n, n):
            raise ConfigurationError(f"image is {f.shape}, config grid is {n}")
        coeffs = bss.analysis(f)
        base = os.path.join(cfg.out_dir,
                            os.path.splitext(os.path.basename(input_path))[0])
        fileio.write_raw(base + ".coef.f64", coeffs.stacked())
        fileio.write_selection_csv(base + ".index.csv", bss)
        log(f"coefficients written: {base}.coef.f64 ({coeffs.size} entries)")
        return 0
    if direction == "reconstruct":
        data = np.fromfile(input_path, dtype="<f8")
        if data.size != bss.size:
            raise fileio.FormatError(
                f"coefficient file holds {data.size} values, system has {bss.size}",
                offset=data.size * 8,
            )
        c = HybridCoefficients(data[: bss.n_wavelet], data[bss.n_wavelet :],
                               bss.scale_of)
        g = bss.synthesis(c)
        x = cg_solve(frame_operator_handle(bss), g.ravel(),
                     tol=cfg.tol or 1.0e-8, max_iter=4000)
        base = os.path.join(cfg.out_dir,
                            os.path.splitext(os.path.basename(input_path))[0])
        fileio.write_pgm(base + ".rec.pgm", x.reshape(n, n))
        log(f"reconstruction written: {base}.rec.pgm (+.f64 sidecar)")
        return 0
    raise ConfigurationError(f"unknown transform direction {direction!r}")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bshear",
        description="Hybrid shearlet/wavelet frames on the unit square",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--n", type=int)
        p.add_argument("--scales", type=int)
        p.add_argument("--directions", help="shear ladder, e.g. 1,1,2,2")
        p.add_argument("--family")
        p.add_argument("--generator")
        p.add_argument("--tau", type=float)
        p.add_argument("--offset", type=float)
        p.add_argument("--offsets", help="comma-separated offsets")
        p.add_argument("--s", help="comma-separated Sobolev orders")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--dense-limit", dest="dense_limit", type=int)
        p.add_argument("--cache-dir", dest="cache_dir")
        p.add_argument("--out")
        p.add_argument("--plot", action="store_true")

    common(sub.add_parser("build", help="build and cache the filter systems"))
    runp = sub.add_parser("run", help="run an experiment")
    runp.add_argument("kind", choices=["frame-sweep", "gramian", "gelfand",
                                       "nterm", "cross-decay"])
    common(runp)
    tr = sub.add_parser("transform", help="analyze or reconstruct an image")
    tr.add_argument("direction", choices=["analyze", "reconstruct"])
    tr.add_argument("input", help="PGM or raw float64 input file")
    common(tr)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "run":
            return cmd_run(args.kind, cfg)
        if args.command == "transform":
            return cmd_transform(args.direction, args.input, cfg)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
