"""Command-line interface: ``grainspec <subcommand> --config FILE [--out FILE]``."""
import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager

import numpy as np

from . import __version__
from .config import ConfigError, SUBCOMMANDS, load_config
from .discretize import GridError, GridSpec
from .eigensolve import ConvergenceError, FactorizationError
from .io import ResultTable, TableWriter
from .potentials import GrainPotential, PeriodicPotential

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 3
EXIT_GRID = 4
EXIT_NUMERICS = 5
EXIT_FLOW = 6
EXIT_MUFFIN = 7
EXIT_DECOUPLE = 8
EXIT_INTERRUPT = 130


class NoGapError(RuntimeError):
    """The periodic operator shows no spectral gap at this resolution."""


def _exit_code(exc):
    from .experiments import ConstructionError, DecouplingError, FlowError
    from .muffin import CutDiscError, MuffinError

    table = ((ConfigError, EXIT_CONFIG), (GridError, EXIT_GRID),
             (FactorizationError, EXIT_NUMERICS), (ConvergenceError, EXIT_NUMERICS),
             (FlowError, EXIT_FLOW), (ConstructionError, EXIT_FLOW), (NoGapError, EXIT_FLOW),
             (MuffinError, EXIT_MUFFIN), (CutDiscError, EXIT_MUFFIN),
             (DecouplingError, EXIT_DECOUPLE))
    for cls, code in table:
        if isinstance(exc, cls):
            return code
    return EXIT_OTHER


@contextmanager
def _mapper(workers):
    """Ordered map over work items; a process pool when workers > 1."""
    if workers <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield lambda fn, items: pool.map(fn, list(items), chunksize=1)


def build_potential(cfg):
    family = cfg["potential"]
    if family == "cosine":
        return PeriodicPotential.cosine(cfg["A"])
    if family == "smooth-muffin":
        return PeriodicPotential.smooth_muffin(cfg["A"], cfg["profile_r"], cfg["profile_w"])
    return PeriodicPotential.flat()


def _gap(cfg, V):
    from .experiments import find_gap

    gap = find_gap(V, float(cfg["h"]), cfg["momentum_grid"])
    if gap is None:
        raise NoGapError("no spectral gap found for this potential and mesh")
    return gap


def _middle_energies(gap, count):
    lo, hi = gap.middle_half()
    return list(np.linspace(lo, hi, count)) if count > 1 else [gap.center]


def _flow(cfg, V, gap, mapper, energies):
    from .experiments import dislocation_flow

    return dislocation_flow(V, gap, cfg["flow_n"], cfg["t_steps"], h=float(cfg["h"]),
                            energies=energies, mapper=mapper)


def _sibling(path, tag):
    stem, ext = os.path.splitext(path)
    return f"{stem}_{tag}{ext or '.csv'}"


def run_bands(cfg, mapper):
    from .experiments import band_table

    V = build_potential(cfg)
    ks, table = band_table(V, float(cfg["h"]), cfg["momentum_grid"])
    rows = [(float(kx), float(ky), b + 1, float(lam))
            for (kx, ky), vals in zip(ks, table) for b, lam in enumerate(vals)]
    return {"bands": rows}


def run_flow(cfg, mapper):
    from .experiments import crossing_eigenvalue

    V = build_potential(cfg)
    gap = _gap(cfg, V)
    record = _flow(cfg, V, gap, mapper, _middle_energies(gap, cfg["energies"]))
    rows = [(float(t), int(b), float(lam), int(c)) for t, b, lam, c in record.rows()]
    crossings = []
    for E, tE in sorted(record.crossings):
        lam = crossing_eigenvalue(V, record.n, record.h, E, tE).value
        crossings.append((float(E), float(tE), float(lam)))
    return {"flow": rows, "crossings": crossings}


def run_fill(cfg, mapper):
    from .experiments import build_approximate_eigenfunction, rotation_gap_fill

    V = build_potential(cfg)
    gap = _gap(cfg, V)
    lo, hi = gap.middle_half() if cfg["fill_window"] == "middle" else (gap.a, gap.b)
    eps = cfg.get("eps", (gap.b - gap.a) / 8)
    if not eps < gap.width / 2:
        raise ConfigError([f"eps={eps!r} must be below half the gap width {gap.width / 2!r}"])
    energies = _middle_energies(gap, 5)
    record = _flow(cfg, V, gap, mapper, energies)
    aef = build_approximate_eigenfunction(record, energies[2], cfg["aef_n"], strict=False)
    report = rotation_gap_fill(V, gap, eps, cfg["thetas"], cfg["n"], h=float(cfg["h"]),
                               window=(lo, hi), aef=aef, flow=record,
                               placement=cfg["placement"], m_max=cfg["m_max"], mapper=mapper)
    rows = [(r.theta, r.n, r.alpha, r.beta, r.count, r.residual, r.interface_count,
             float("nan") if r.center is None else r.center) for r in report.rows]
    return {"fill": rows}


def run_scaling(cfg, mapper):
    from .experiments import count_scaling

    V = build_potential(cfg)
    gap = _gap(cfg, V)
    if cfg["alpha"] is not None:
        alpha, beta = cfg["alpha"], cfg["beta"]
    elif cfg["control"]:
        alpha, beta = gap.middle_half()
    else:
        alpha, beta = gap.a + gap.width / 10, gap.b - gap.width / 10
    spec = GrainPotential.two_sided(V, V) if cfg["control"] else cfg["scaling_theta"]
    report = count_scaling(V, gap, spec, alpha, beta, cfg["n_list"], h=float(cfg["h"]),
                           mapper=mapper, width_fraction=cfg["width_fraction"])
    rows = [(r.n, r.theta, r.alpha, r.beta, r.N, r.N_over_n, r.N_over_nlogn)
            for r in report.rows]
    return {"scaling": rows}


def run_align(cfg, mapper):
    from .alignment import find_spaced_alignments

    found = find_spaced_alignments(cfg["align_theta"], cfg["align_t"], cfg["align_eps"],
                                   cfg["nu"], cfg["horizon"])
    return {"align": [(s.m, s.N, s.residual_x, s.residual_y) for s in found.solutions]}


class _StripState:
    def __init__(self, V, gap, n, h, guesses):
        self.V, self.gap, self.n, self.h, self.guesses = V, gap, n, h, guesses

    def __call__(self, E):
        from .eigensolve import eigenpairs_near
        from .experiments import localization_profile, stretched_operator
        from .experiments.flow import _crossing_near

        tE = _crossing_near(self.V, self.n, self.h, E, self.guesses[E])
        op = stretched_operator(self.V, self.n, tE, self.h)
        pair = eigenpairs_near(op, E, 1)[0]
        return tE, localization_profile(pair, op.x, self.n, self.gap)


class _RotationStates:
    def __init__(self, V, gap, theta, h, window):
        self.V, self.gap, self.theta, self.h, self.window = V, gap, theta, h, window

    def __call__(self, n):
        from .experiments import interface_pairs, localization_profile, rotation_box

        op = rotation_box(self.V, self.theta, n, self.h)
        return [localization_profile(p, op.x, n, self.gap)
                for p in interface_pairs(op, *self.window, n)]


def run_localize(cfg, mapper):
    V = build_potential(cfg)
    gap = _gap(cfg, V)
    h = float(cfg["h"])
    energies = _middle_energies(gap, cfg["energies"])
    record = _flow(cfg, V, gap, mapper, energies)
    n = cfg["localize_n"]
    guesses = {E: record.crossing(E) for E in energies}
    rows = []
    for tE, prof in mapper(_StripState(V, gap, n, h, guesses), energies):
        rows.extend(("strip", n, tE, prof.value, float(w), float(M), prof.slope)
                    for w, M in zip(prof.widths, prof.mass))
    window = (gap.a + gap.width / 10, gap.b - gap.width / 10)
    theta = cfg["localize_theta"]
    boxes = cfg["localize_boxes"]
    for nb, profiles in zip(boxes, mapper(_RotationStates(V, gap, theta, h, window), boxes)):
        for prof in profiles:
            rows.extend(("rotation", nb, theta, prof.value, float(w), float(M), prof.slope)
                        for w, M in zip(prof.widths, prof.mass))
    return {"localize": rows}


def _muffin_angle(cfg):
    from .potentials import RotationAngle

    if cfg["tan_theta"] is not None:
        return RotationAngle(math.atan2(cfg["tan_theta"].numerator, cfg["tan_theta"].denominator))
    return RotationAngle(cfg["theta"])


def run_muffin(cfg, mapper):
    from .muffin import disc_eigenvalues, finite_height_convergence, muffin_surface_spectrum

    r = cfg["r"]
    theta = _muffin_angle(cfg)
    k = cfg["gap_index"]
    mu = disc_eigenvalues(r, k + 1)
    gap = (float(mu[k - 1]), float(mu[k]))
    disc_h = float(cfg["disc_h"]) if cfg["disc_h"] is not None else r / 64
    spec = muffin_surface_spectrum(r, theta, gap, cfg["y_max"], h=disc_h, mapper=mapper)
    by_j = dict(spec.rows)
    rows = []
    for d in spec.discs:
        vals = by_j[d.j]
        if len(vals) == 0:
            rows.append((d.j, d.xi, d.eta, 0, float("nan")))
        rows.extend((d.j, d.xi, d.eta, i + 1, float(v)) for i, v in enumerate(vals))
    out = {"muffin": rows}
    if cfg["heights"] is not None:
        table = finite_height_convergence(r, theta, cfg["heights"], gap, float(cfg["box_h"]),
                                          mapper=mapper)
        out["heights"] = table.rows()
    return out


def run_decouple(cfg, mapper):
    from .experiments import barrier_grid_masks, decoupling_check

    tan = cfg["decouple_tan"]
    theta = math.atan2(tan.numerator, tan.denominator)
    grid = GridSpec.box(cfg["decouple_n"], float(cfg["decouple_h"]))
    U, S = barrier_grid_masks(grid, cfg["decouple_r"], theta)
    return {"decouple": decoupling_check(grid, U, S, cfg["barrier_heights"], mapper=mapper)}


RUNNERS = {
    "bands": run_bands, "flow": run_flow, "fill": run_fill, "scaling": run_scaling,
    "align": run_align, "localize": run_localize, "muffin": run_muffin,
    "decouple": run_decouple,
}


def run(cfg, subcommand, out=None, workers=None):
    """Run one experiment and write its CSV table(s); returns the written paths."""
    out = out or cfg["out"] or f"{subcommand}.csv"
    workers = workers or cfg["workers"]
    primary = ResultTable(subcommand, config_sha256=cfg.sha256)
    with TableWriter(out, primary):
        with _mapper(workers) as mapper:
            tables = RUNNERS[subcommand](cfg, mapper)
        primary.rows = tables.pop(subcommand)
    paths = [out]
    for tag, rows in tables.items():
        path = _sibling(out, tag)
        with TableWriter(path, ResultTable(tag, rows, config_sha256=cfg.sha256)):
            pass
        paths.append(path)
    return paths


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="experiment config file")
    common.add_argument("--out", metavar="PATH", help="output CSV (default: <subcommand>.csv)")
    common.add_argument("--workers", type=int, metavar="INT", help="worker processes")
    common.add_argument("--seed", type=int, metavar="INT",
                        help="seed for randomized test matrices; experiment numerics ignore it")
    parser = argparse.ArgumentParser(prog="grainspec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"grainspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
        if name == "muffin":
            p.add_argument("--r", type=float, help="disc radius")
            p.add_argument("--theta", type=float, help="rotation angle in radians")
            p.add_argument("--ymax", type=float, help="height of the enumerated interface")
            p.add_argument("--heights", type=lambda s: [float(v) for v in s.split(",")],
                           help="comma-separated barrier heights")
    return parser


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        overrides = {}
        if args.command == "muffin":
            overrides = {"r": args.r, "theta": args.theta, "y_max": args.ymax,
                         "heights": args.heights}
        cfg = load_config(args.config)
        if any(v is not None for v in overrides.values()):
            if args.theta is not None:
                cfg.values.pop("tan_theta", None)
            cfg = cfg.with_overrides(**overrides)
        from .config import validate
        problems = validate(cfg, args.command)
        if problems:
            raise ConfigError(problems)
        if args.workers is not None and args.workers < 1:
            raise ConfigError(["--workers must be >= 1"])
        paths = run(cfg, args.command, out=args.out, workers=args.workers)
    except KeyboardInterrupt:
        print("grainspec: interrupted; partial output marked INCOMPLETE", file=sys.stderr)
        return EXIT_INTERRUPT
    except FileNotFoundError as exc:
        print(f"grainspec: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        code = _exit_code(exc)
        print(f"grainspec: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
