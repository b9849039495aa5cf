"""Command-line harness: scenario files in, report.json and CSV traces out.

Usage:
    statdiscs run --config scenario.json --out results/
    statdiscs indices --config scenario.json
    statdiscs check --config scenario.json --seed 3

Every subcommand other than ``run`` executes the scenario with only that
analysis requested. Exit codes: 0 all requested assertions pass, 1 an analysis
failed or was skipped, 2 the configuration could not be parsed.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as sio
from .analysis import (automorphism_corpus, center_jacobian, dilate,
                       jet_determination_experiment, jet_jacobian_matrix, jet_map,
                       recover_from_jet, RankReport)
from .conormal import build_initial_lift, eval_conormal, verify_stationary
from .discs import DEFAULT_ALPHA
from .geometry import (DEFAULT_SEED, DefiningFunction, is_invertible_combination,
                       nondegeneracy_report)
from .rh_linear import (assemble_G, maslov_index, numeric_kernel,
                        partial_indices_structured, StructureError)
from .solver import SolverConfig, SolverError, continuation, family_chart, lift_norm

ANALYSES = ("check", "disc", "indices", "kernel", "solve", "centers", "jets", "determine")
DEFAULT_TOL = 1e-10
DEFAULT_TDIL = 0.1
JET_SAMPLES = 3
RECOVERY_TOL = 1e-8


class Skip(Exception):
    """Prerequisite of an analysis is not satisfiable."""


class Pipeline:
    """Lazily computed state shared by the analyses of one scenario."""

    def __init__(self, scenario, args, out_dir):
        self.scenario = scenario
        self.out_dir = out_dir
        self.seed = int(scenario.get("seed", DEFAULT_SEED)) if args.seed is None else args.seed
        self.pencil = sio.parse_pencil(scenario["pencil"])
        n, d = self.pencil.n, self.pencil.d
        self.perturbation, t = sio.parse_perturbation(scenario.get("perturbation"), n, d)
        self.t = t if args.t is None else args.t
        if self.t < 0:
            raise sio.ConfigError("perturbation scale t must be nonnegative")
        self.def_fn = DefiningFunction(self.pencil, self.perturbation, self.t)
        opts = scenario.get("options", {})
        self.alpha = float(args.alpha if args.alpha is not None else opts.get("alpha", DEFAULT_ALPHA))
        self.tol = float(args.tol if args.tol is not None else opts.get("tol", DEFAULT_TOL))
        self.tdil = float(args.tdil if args.tdil is not None else opts.get("tdil", DEFAULT_TDIL))
        self.automorphism = opts.get("automorphism", "identity")
        overrides = dict(scenario.get("solver", {}))
        if args.nf is not None:
            overrides["nf"] = args.nf
        if args.grid is not None:
            overrides["M"] = args.grid
        try:
            self.config = SolverConfig().with_overrides(**overrides)
        except (TypeError, ValueError) as exc:
            raise sio.ConfigError(f"solver: {exc}") from exc
        chart = scenario.get("chart", {})
        self.chart_mode = chart.get("mode", "solver")
        if self.chart_mode not in ("solver", "tangent"):
            raise sio.ConfigError("chart.mode must be 'solver' or 'tangent'")
        self.chart_eps = chart.get("eps")
        wit = scenario.get("witnesses", {})
        self.V_given = sio._complex_vector(wit["V"], "witnesses.V") if "V" in wit else None
        self.c_given = np.array(wit["c"], dtype=float) if "c" in wit else None
        if self.V_given is not None and self.V_given.shape != (n,):
            raise sio.ConfigError("witnesses.V must have n entries")
        if self.c_given is not None and self.c_given.shape != (d,):
            raise sio.ConfigError("witnesses.c must have d entries")
        self.expect = scenario.get("expect", {})
        self._cache = {}

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def report(self):
        return self.cached("report", lambda: nondegeneracy_report(self.pencil, seed=self.seed))

    def witnesses(self):
        rep = self.report()
        V = self.V_given if self.V_given is not None else rep.witness_V
        c = self.c_given if self.c_given is not None else rep.witness_c
        if c is None or not is_invertible_combination(self.pencil, c):
            raise Skip("no invertible combination sum c_j A_j (condition (t) fails)")
        if V is None:
            raise Skip("no witness V for condition (f); supply witnesses.V")
        return V, c

    def initial_lift(self):
        V, c = self.witnesses()
        return self.cached("f0", lambda: build_initial_lift(self.pencil, V, c, M=self.config.M))

    def quadric_G(self):
        quad = self.def_fn.with_scale(0.0)
        return self.cached("G", lambda: assemble_G(quad, self.initial_lift(), M=self.config.M))

    def chart(self, def_fn=None, key="chart"):
        def_fn = def_fn or self.def_fn
        if def_fn.d > def_fn.n:
            raise Skip("the solver requires d <= n")
        V, c = self.witnesses()

        def build():
            eps = self.chart_eps
            if eps is None:
                f0 = self.initial_lift()
                eps = 0.1 * lift_norm(f0, self.alpha)
            return family_chart(def_fn, self.pencil, V, c, eps, self.config, self.chart_mode)
        return self.cached(key, build)

    def csv_path(self, name):
        return None if self.out_dir is None else Path(self.out_dir) / name


def _expected(pipe, key, value, default):
    """Assertion result: compare with an expectation from the scenario if one is given."""
    if key in pipe.expect:
        return value == pipe.expect[key]
    return default


def run_check(pipe):
    rep = pipe.report()
    out = rep.to_dict()
    ok = all(_expected(pipe, k, out[k], True) for k in ("beloshapka", "fully"))
    print(f"beloshapka={str(rep.beloshapka).lower()} fully={str(rep.fully).lower()}")
    return out, ok


def run_disc(pipe):
    f0 = pipe.initial_lift()
    stat = verify_stationary(pipe.def_fn.with_scale(0.0), f0)
    out = {"stationarity": stat.to_dict(), "lift": f0.to_json(),
           "norm": lift_norm(f0, pipe.alpha)}
    path = pipe.csv_path("boundary_trace.csv")
    if path is not None:
        sio.write_boundary_trace(path, f0.realize().samples())
        sio.write_residuals(pipe.csv_path("disc_residuals.csv"),
                            eval_conormal(pipe.def_fn.with_scale(0.0), f0))
    ok = stat.passes(pipe.tol)
    print(f"stationary={str(ok).lower()} attachment={stat.attachment_sup:.3e}")
    return out, ok


def run_indices(pipe):
    n, d = pipe.pencil.n, pipe.pencil.d
    G = pipe.quadric_G()
    maslov = maslov_index(G)
    try:
        partial = partial_indices_structured(G).partial_indices
    except StructureError:
        partial = None
    out = {"maslov": maslov, "partial_indices": partial, "expected_maslov": 2 * n + 2 * d}
    ok = _expected(pipe, "maslov", maslov, maslov == 2 * n + 2 * d)
    print(f"maslov={maslov}")
    if partial is not None:
        print("partial_indices=" + ",".join(str(k) for k in partial))
    return out, ok


def run_kernel(pipe):
    n, d = pipe.pencil.n, pipe.pencil.d
    G = pipe.quadric_G()
    out, ok = {}, True
    for label, constrained, expected in (("constrained", True, 2 * n + 2 * d),
                                         ("unconstrained", False, 4 * n + 4 * d)):
        kb = numeric_kernel(G, constrained=constrained, nf=pipe.config.nf)
        out[label] = {"dim": kb.dim, "expected": expected, "gap_ratio": kb.gap_ratio,
                      "basis": [b.to_json() for b in kb.basis]}
        path = pipe.csv_path(f"kernel_{label}_singular_values.csv")
        if path is not None:
            sio.write_singular_values(path, kb.singular_values)
        ok = ok and kb.dim == expected
    print(f"constrained dim {out['constrained']['dim']}, "
          f"unconstrained dim {out['unconstrained']['dim']}")
    return out, ok


def run_solve(pipe):
    if pipe.def_fn.d > pipe.def_fn.n:
        raise Skip("the solver requires d <= n")
    V, c = pipe.witnesses()
    # A chart on the quadric supplies the frame without solving anything.
    frame_chart = pipe.chart(pipe.def_fn.with_scale(0.0), key="quadric_chart")
    f0 = frame_chart.initial
    zero = np.zeros(frame_chart.dim)
    lift, infos = continuation(pipe.def_fn, zero, pipe.config, f0, frame_chart.frame,
                               return_info=True)
    infos = infos if isinstance(infos, list) else [infos]
    stat = verify_stationary(pipe.def_fn, lift)
    nf = pipe.config.nf
    out = {"t": pipe.t, "stationarity": stat.to_dict(), "lift": lift.to_json(),
           "iterations": [info.iterations for info in infos],
           "final_residual": infos[-1].residual,
           "distance_to_initial": float(np.linalg.norm(lift.cofactors(nf) - f0.cofactors(nf)))}
    trace = [(k, res, step) for info in infos for k, res, step in info.trace]
    path = pipe.csv_path("solver_trace.csv")
    if path is not None:
        sio.write_solver_trace(path, trace)
        sio.write_boundary_trace(pipe.csv_path("solution_trace.csv"), lift.realize().samples())
    ok = stat.passes(pipe.tol)
    print(f"solved={str(ok).lower()} attachment={stat.attachment_sup:.3e}")
    return out, ok


def run_centers(pipe):
    rank = center_jacobian(pipe.chart())
    out = rank.to_dict()
    out["relative_min"] = rank.relative_min
    path = pipe.csv_path("center_singular_values.csv")
    if path is not None:
        sio.write_singular_values(path, rank.singular_values)
    ok = _expected(pipe, "center_full_rank", rank.full_rank, rank.full_rank)
    print(f"center_rank={rank.rank}/{rank.expected}")
    return out, ok


def run_jets(pipe):
    chart = pipe.chart()
    J = jet_jacobian_matrix(chart)
    rank = RankReport.from_matrix(J, chart.dim)
    rng = np.random.default_rng(pipe.seed)
    errors = []
    for _ in range(JET_SAMPLES):
        s = rng.standard_normal(chart.dim)
        s *= 0.3 * chart.radius / np.linalg.norm(s)
        s_rec = recover_from_jet(chart, jet_map(chart, s), restarts=0, jacobian=J)
        errors.append(float(np.max(np.abs(s_rec - s))))
    out = rank.to_dict()
    out["recovery_errors"] = errors
    path = pipe.csv_path("jet_singular_values.csv")
    if path is not None:
        sio.write_singular_values(path, rank.singular_values)
    ok = _expected(pipe, "jet_full_rank", rank.full_rank, rank.full_rank) and max(errors) < RECOVERY_TOL
    print(f"jet_rank={rank.rank}/{rank.expected} max_recovery_error={max(errors):.3e}")
    return out, ok


def run_determine(pipe):
    corpus = automorphism_corpus(pipe.pencil.n, pipe.pencil.d)
    if pipe.automorphism not in corpus:
        raise sio.ConfigError(f"unknown automorphism {pipe.automorphism!r}; "
                              f"choose from {sorted(corpus)}")
    F = corpus[pipe.automorphism]
    dil = dilate(pipe.def_fn, pipe.tdil)
    chart = pipe.chart(dil, key=("chart", pipe.tdil))
    out = jet_determination_experiment(pipe.def_fn, F, chart, t_dil=pipe.tdil)
    out["experiment_status"] = out.pop("status")
    ok = out["experiment_status"] == pipe.expect.get("determine_status", "ok")
    print(f"determine={out['experiment_status']} max_fixed_point_defect={out.get('max_fixed_point_defect')}")
    return out, ok


RUNNERS = {"check": run_check, "disc": run_disc, "indices": run_indices, "kernel": run_kernel,
           "solve": run_solve, "centers": run_centers, "jets": run_jets,
           "determine": run_determine}


def _inputs(pipe):
    return {
        "name": pipe.scenario.get("name"),
        "n": pipe.pencil.n, "d": pipe.pencil.d,
        "pencil": [[[[float(x.real), float(x.imag)] for x in row] for row in a]
                   for a in pipe.pencil.A],
        "perturbation": pipe.scenario.get("perturbation", {}),
        "t": pipe.t, "alpha": pipe.alpha, "tol": pipe.tol, "tdil": pipe.tdil,
        "nf": pipe.config.nf, "grid": pipe.config.M,
        "chart_mode": pipe.chart_mode, "automorphism": pipe.automorphism,
    }


def execute(scenario, args, analyses, out_dir):
    """Run ``analyses`` in dependency order; returns ``(report, exit_code)``."""
    unknown = [a for a in analyses if a not in ANALYSES]
    if unknown:
        raise sio.ConfigError(f"unknown analyses {unknown}")
    pipe = Pipeline(scenario, args, out_dir)
    results, passed = {}, True
    for name in ANALYSES:
        if name not in analyses:
            continue
        try:
            out, ok = RUNNERS[name](pipe)
            out["status"] = "passed" if ok else "failed"
        except Skip as exc:
            out, ok = {"status": "skipped", "reason": str(exc)}, False
        except (SolverError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            if isinstance(exc, sio.ConfigError):
                raise
            out, ok = {"status": "error", "reason": f"{type(exc).__name__}: {exc}"}, False
        results[name] = out
        passed = passed and ok
    report = {
        "schema_version": sio.SCHEMA_VERSION,
        "version": __version__,
        "seed": pipe.seed,
        "inputs": _inputs(pipe),
        "requested": [a for a in ANALYSES if a in analyses],
        "results": results,
        "passed": passed,
    }
    return report, 0 if passed else 1


def run(scenario_path, out_dir, args=None, analyses=None):
    """Execute a scenario file and write ``report.json`` into ``out_dir``."""
    args = args or build_parser().parse_args(["run", "--config", str(scenario_path)])
    try:
        scenario = sio.load_scenario(scenario_path)
        listed = scenario.get("analyses", [])
        if not isinstance(listed, list) or any(a not in ANALYSES for a in listed):
            raise sio.ConfigError(f"analyses must be a list drawn from {list(ANALYSES)}")
        requested = list(listed) if analyses is None else analyses
        report, code = execute(scenario, args, requested, out_dir)
    except sio.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if out_dir is not None:
        sio.write_report(report, out_dir)
    return code


def build_parser():
    parser = argparse.ArgumentParser(prog="statdiscs",
                                     description="Stationary discs of generic quadrics and their perturbations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run",) + ANALYSES:
        p = sub.add_parser(name, help="execute the scenario's analyses" if name == "run"
                           else f"run only the '{name}' analysis")
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output directory for report.json and CSVs")
        p.add_argument("--seed", type=int, default=None, help="seed for witness searches")
        p.add_argument("--nf", type=int, default=None, help="Fourier truncation degree")
        p.add_argument("--grid", type=int, default=None, help="boundary grid size")
        p.add_argument("--alpha", type=float, default=None, help="Hoelder exponent")
        p.add_argument("--tol", type=float, default=None, help="verification tolerance")
        p.add_argument("--t", type=float, default=None, help="perturbation scale")
        p.add_argument("--tdil", type=float, default=None, help="dilation parameter")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    analyses = None if args.command == "run" else [args.command]
    if args.command == "run" and args.out is None:
        parser.error("run requires --out")
    return run(args.config, args.out, args, analyses)


if __name__ == "__main__":
    sys.exit(main())
