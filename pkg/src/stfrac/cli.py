"""Experiment harness: ``python3 -m stfrac <command> [--config file.json] [overrides]``.

Commands ``coeffs``, ``symbol``, ``spectrum``, ``cond``, ``svdist``,
``solve`` and ``table`` all print CSV (to ``--out`` or stdout). Exit status
is 0 on success, 1 when any grid point failed (its row carries the error in
the ``status`` column) and 2 on a configuration error.
"""

import argparse
import csv
import io
import itertools
import json
import statistics
import sys
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np
import scipy.integrate

from .diagnostics import (dense_eigenvalues, preconditioned_dense,
                          singular_value_distribution_check, system_condition_number)
from .gmres import gmres_solve
from .grunwald import coefficients
from .operators import AllAtOnceSystem, SpaceOperator1D
from .precond import KINDS, preconditioner_for
from .problems import (COEFFICIENTS_1D, COEFFICIENTS_2D, PROBLEM_NAMES, discretize_1d, discretize_2d,
                       final_time_error, named_problem)
from .symbols import (POLE_TOL, f_alpha, grid_points, precond_ratio_symbol_1d, precond_ratio_symbol_2d, q_theta,
                      spacetime_symbol_1d, spacetime_symbol_2d)

PRECOND_CHOICES = ("none",) + KINDS
SYMBOL_KINDS = ("falpha", "qtheta", "st1d", "st2d", "ratio1d", "ratio2d")
MAX_SYMBOL_SAMPLES = 2_000_000


class ConfigError(ValueError):
    pass


def _listify(value):
    if value is None:
        return []
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class ExperimentConfig:
    """One invocation's settings. Size, order and kind fields may be lists, which span a grid."""

    problem: str = "const1"
    n: list = field(default_factory=lambda: [16])
    n2: Optional[list] = None
    m: list = field(default_factory=lambda: [16])
    alpha: list = field(default_factory=lambda: [1.5])
    alpha2: Optional[float] = None
    theta: float = 0.5
    precond: list = field(default_factory=lambda: list(PRECOND_CHOICES))
    tol: float = 1e-8
    max_iters: Optional[int] = None
    out: Optional[str] = None
    repeats: int = 3
    timing: bool = False
    symbol_kind: str = "falpha"
    samples: int = 64
    gamma_star: float = 1.0
    count: int = 10
    gamma: Optional[float] = None

    @property
    def dimension(self):
        return 2 if self.problem in COEFFICIENTS_2D else 1

    def validate(self):
        if self.problem not in PROBLEM_NAMES:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEM_NAMES)}")
        for key in ("n", "m") + (("n2",) if self.n2 is not None else ()):
            values = getattr(self, key)
            for v in values:
                if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 2:
                    raise ConfigError(f"{key} entries must be integers >= 2, got {v!r}")
        for a in self.alpha + _listify(self.alpha2):
            if not 1.0 < float(a) < 2.0:
                raise ConfigError(f"alpha must lie in the open interval (1, 2), got {a!r}")
        if not 0.0 < float(self.theta) <= 1.0:
            raise ConfigError(f"theta must lie in (0, 1] (theta = 0 makes H_theta singular), got {self.theta!r}")
        for kind in self.precond:
            if kind not in PRECOND_CHOICES:
                raise ConfigError(f"precond must be one of {', '.join(PRECOND_CHOICES)}, got {kind!r}")
        if not float(self.tol) > 0:
            raise ConfigError(f"tol must be positive, got {self.tol!r}")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.symbol_kind not in SYMBOL_KINDS:
            raise ConfigError(f"symbol kind must be one of {', '.join(SYMBOL_KINDS)}")
        if self.gamma_star < 0:
            raise ConfigError("gamma_star must be nonnegative")
        if self.samples < 1 or self.count < 2:
            raise ConfigError("samples must be positive and count at least 2")
        if self.gamma is not None and (self.gamma < 0 or self.dimension != 1):
            raise ConfigError("gamma override must be nonnegative and is only available in 1D")
        return self


_LIST_KEYS = ("n", "n2", "m", "alpha", "precond")


def make_config(data=None, **overrides):
    """Build a validated :class:`ExperimentConfig` from a mapping plus overrides (``None`` ignored)."""
    merged = dict(data or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    for key in _LIST_KEYS:
        if key in merged and merged[key] is not None:
            merged[key] = _listify(merged[key])
    try:
        config = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return config.validate()


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return str(value)


class CsvTable:
    """Header plus rows; formats floats with 10 significant digits."""

    def __init__(self, header):
        self.header = list(header)
        self.rows = []

    def add(self, *values):
        if len(values) != len(self.header):
            raise ValueError("row width does not match header")
        self.rows.append([_fmt(v) for v in values])

    @property
    def failed(self):
        if "status" not in self.header:
            return False
        i = self.header.index("status")
        return any(r[i] not in ("ok", "pole") for r in self.rows)

    def to_string(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()


def _discretize(config, n, m, alpha):
    if config.dimension == 1:
        problem = named_problem(config.problem, alpha, config.theta)
        system, rhs, grid = discretize_1d(problem, n, m)
        if config.gamma is not None:
            space = system.space
            system = AllAtOnceSystem(SpaceOperator1D(space.alpha, space.N, space.coefficient, config.gamma),
                                     system.time)
        return problem, system, rhs, grid
    alpha2 = alpha if config.alpha2 is None else config.alpha2
    problem = named_problem(config.problem, alpha, config.theta, alpha2)
    n2 = n if config.n2 is None else config.n2[0]
    system, rhs, grid = discretize_2d(problem, n, n2, m)
    return problem, system, rhs, grid


def _n2(config, n):
    return n if config.n2 is None or config.dimension == 1 else config.n2[0]


def _grid(config):
    return itertools.product(config.n, config.m, config.alpha)


def _error_status(exc):
    return f"error: {type(exc).__name__}: {exc}".replace("\n", " ")


def run_table(config):
    """GMRES iteration table, one row per ``(N, M, alpha, kind)``."""
    header = ["problem", "N1", "N2", "M", "alpha", "theta", "precond", "iterations",
              "final_residual", "converged", "status"]
    if config.timing:
        header.append("wall_time")
    table = CsvTable(header)
    for n, m, alpha in _grid(config):
        for kind in config.precond:
            lead = (config.problem, n, _n2(config, n), m, alpha, config.theta, kind)
            try:
                _, system, rhs, _ = _discretize(config, n, m, alpha)
                P = None if kind == "none" else preconditioner_for(system, kind)
                times = []
                for _ in range(config.repeats if config.timing else 1):
                    _, report = gmres_solve(system, rhs, P, config.tol, config.max_iters)
                    times.append(report.wall_time)
                row = lead + (report.iterations, report.final_relative_residual, report.converged,
                              "ok" if report.converged else "not converged")
                if config.timing:
                    row += (statistics.median(times),)
            except Exception as exc:  # recorded per grid point; the run goes on
                row = lead + ("", "", False, _error_status(exc)) + (("",) if config.timing else ())
            table.add(*row)
    return table


def run_solve(config):
    """Single solves with the max-node error at the final time."""
    table = CsvTable(["problem", "N1", "N2", "M", "alpha", "theta", "precond", "iterations",
                      "final_residual", "converged", "max_error", "status"])
    for n, m, alpha in _grid(config):
        for kind in config.precond:
            lead = (config.problem, n, _n2(config, n), m, alpha, config.theta, kind)
            try:
                problem, system, rhs, grid = _discretize(config, n, m, alpha)
                P = None if kind == "none" else preconditioner_for(system, kind)
                x, report = gmres_solve(system, rhs, P, config.tol, config.max_iters)
                err = final_time_error(problem, x, grid)
                table.add(*lead, report.iterations, report.final_relative_residual, report.converged,
                          err, "ok" if report.converged else "not converged")
            except Exception as exc:
                table.add(*lead, "", "", False, "", _error_status(exc))
    return table


def run_cond(config):
    """2-norm condition numbers of ``A`` and of both preconditioned matrices."""
    table = CsvTable(["problem", "N1", "N2", "M", "alpha", "theta", "cond_A", "cond_strang",
                      "cond_first_column", "status"])
    for n, m, alpha in _grid(config):
        lead = (config.problem, n, _n2(config, n), m, alpha, config.theta)
        try:
            _, system, _, _ = _discretize(config, n, m, alpha)
            values = [system_condition_number(system)]
            values += [system_condition_number(system, preconditioner_for(system, k)) for k in KINDS]
            table.add(*lead, *values, "ok")
        except Exception as exc:
            table.add(*lead, "", "", "", _error_status(exc))
    return table


def _mean_of(name):
    """Continuous mean of the coefficient over the unit interval or square."""
    if name in COEFFICIENTS_1D:
        a = COEFFICIENTS_1D[name]
        return 1.0 if a is None else scipy.integrate.quad(a, 0.0, 1.0)[0]
    a = COEFFICIENTS_2D[name]
    return 1.0 if a is None else scipy.integrate.dblquad(lambda y, x: a(x, y), 0.0, 1.0, 0.0, 1.0)[0]


def _coefficient(name):
    a = COEFFICIENTS_1D.get(name, COEFFICIENTS_2D.get(name))
    return (lambda *x: np.ones_like(x[0])) if a is None else a


def _symbol_spec(config, alpha, gamma_star):
    """``(variable names, kinds, function, denominator)`` for the configured symbol.

    ``denominator`` is ``None`` except for the preconditioned ratios.
    """
    kind, theta = config.symbol_kind, config.theta
    alpha2 = alpha if config.alpha2 is None else config.alpha2
    g = gamma_star
    if kind == "falpha":
        return ("xi",), ("xi",), lambda xi: f_alpha(alpha, xi), None
    if kind == "qtheta":
        return ("xi",), ("xi",), lambda xi: q_theta(theta, xi), None
    one_d = ("x", "xi1", "xi3"), ("x", "xi", "xi")
    two_d = ("x1", "x2", "xi1", "xi2", "xi3"), ("x", "x", "xi", "xi", "xi")
    if kind in ("st1d", "ratio1d") and config.dimension != 1:
        raise ConfigError(f"symbol kind {kind} needs a 1D problem")
    if kind in ("st2d", "ratio2d") and config.dimension != 2:
        raise ConfigError(f"symbol kind {kind} needs a 2D problem")
    a = _coefficient(config.problem)
    if kind == "st1d":
        return (*one_d, lambda x, xi1, xi3: spacetime_symbol_1d(g, a, alpha, theta, x, xi1, xi3), None)
    if kind == "ratio1d":
        d = _mean_of(config.problem)
        return (*one_d, lambda x, xi1, xi3: precond_ratio_symbol_1d(g, a, d, alpha, theta, x, xi1, xi3),
                lambda x, xi1, xi3: spacetime_symbol_1d(g, d, alpha, theta, x, xi1, xi3))
    if kind == "st2d":
        return (*two_d, lambda x1, x2, xi1, xi2, xi3: spacetime_symbol_2d(
            g, g, a, alpha, alpha2, theta, x1, x2, xi1, xi2, xi3), None)
    d = _mean_of(config.problem)
    return (*two_d,
            lambda x1, x2, xi1, xi2, xi3: precond_ratio_symbol_2d(
                g, g, a, d, alpha, alpha2, theta, x1, x2, xi1, xi2, xi3),
            lambda x1, x2, xi1, xi2, xi3: spacetime_symbol_2d(
                g, g, d, alpha, alpha2, theta, x1, x2, xi1, xi2, xi3))


def _symbol_samples(config, alpha, gamma_star=None):
    """Coordinates, values and a pole mask on the tensor grid.

    The time symbol has a pole at ``xi = +-pi`` when ``theta = 1/2``, and
    that frequency is on the grid. The ratio symbols are also 0/0 at
    ``xi = 0``. Such samples are reported as NaN with ``pole`` set, so one
    bad point does not abort the whole cloud.
    """
    names, kinds, fn, den_fn = _symbol_spec(config, alpha, config.gamma_star if gamma_star is None else gamma_star)
    sizes = (config.samples,) * len(names)
    if int(np.prod(sizes, dtype=float)) > MAX_SYMBOL_SAMPLES:
        raise ConfigError(f"{config.samples}^{len(names)} symbol samples exceed {MAX_SYMBOL_SAMPLES}")
    coords = grid_points(sizes, kinds)
    time_axis = len(names) - 1 if names[-1] in ("xi", "xi3") and config.symbol_kind != "falpha" else None
    pole = np.zeros(len(coords), bool)
    if time_axis is not None:
        den = config.theta + (1.0 - config.theta) * np.exp(1j * coords[:, time_axis])
        pole = np.abs(den) < POLE_TOL
    if den_fn is not None:
        good = ~pole
        den = np.broadcast_to(den_fn(*coords[good].T), good.sum())
        pole[np.flatnonzero(good)[np.abs(den) < POLE_TOL]] = True
    values = np.full(len(coords), np.nan, dtype=complex)
    if np.any(~pole):
        values[~pole] = np.broadcast_to(fn(*coords[~pole].T), (~pole).sum())
    return names, coords, values, pole


def run_spectrum(config, with_symbol=True):
    """Eigenvalues of ``A`` or ``P^{-1} A`` and optionally symbol samples, in one sectioned CSV.

    Space-time symbols in this section use the grid's own ``gamma`` as ``gamma*``.
    """
    table = CsvTable(["section", "N1", "N2", "M", "alpha", "precond", "index", "re", "im", "status"])
    for n, m, alpha in _grid(config):
        for kind in config.precond:
            lead = (n, _n2(config, n), m, alpha, kind)
            try:
                _, system, _, grid = _discretize(config, n, m, alpha)
                if kind == "none":
                    mat = system.dense()
                else:
                    mat = preconditioned_dense(system, preconditioner_for(system, kind))
                lam = dense_eigenvalues(mat).eigenvalues
                order = np.lexsort((lam.imag, lam.real))
                for i, z in enumerate(lam[order]):
                    table.add("eigenvalues", *lead, i, z.real, z.imag, "ok")
            except Exception as exc:
                table.add("eigenvalues", *lead, "", "", "", _error_status(exc))
                continue
            if with_symbol:
                gamma = getattr(grid, "gamma", None)
                _, _, values, pole = _symbol_samples(config, alpha, gamma)
                for i, (z, p) in enumerate(zip(values, pole)):
                    table.add("symbol", *lead, i, z.real, z.imag, "pole" if p else "ok")
    return table


def run_symbol(config):
    """Symbol samples with their coordinates; pole samples carry ``status = pole``."""
    names = _symbol_spec(config, config.alpha[0], config.gamma_star)[0]
    table = CsvTable(["kind", "alpha", "theta", *names, "re", "im", "status"])
    for alpha in config.alpha:
        _, coords, values, pole = _symbol_samples(config, alpha)
        for c, z, p in zip(coords, values, pole):
            table.add(config.symbol_kind, alpha, config.theta, *c, z.real, z.imag, "pole" if p else "ok")
    return table


def run_coeffs(config):
    table = CsvTable(["alpha", "k", "g_k"])
    for alpha in config.alpha:
        for k, g in enumerate(coefficients(alpha, config.count).coeffs):
            table.add(alpha, k, g)
    return table


def run_svdist(config):
    """Singular values of ``D_N(a) Gbar`` against ``|a(x) f_alpha(xi)|`` (1D problems)."""
    from .operators import build_space_1d

    table = CsvTable(["problem", "N", "alpha", "discrepancy", "status"])
    if config.dimension != 1:
        raise ConfigError("svdist is defined for 1D problems")
    a = COEFFICIENTS_1D[config.problem]
    for n, alpha in itertools.product(config.n, config.alpha):
        try:
            G = build_space_1d(alpha, n, a).dense()

            def symbol(x, xi, alpha=alpha):
                return (1.0 if a is None else a(x)) * f_alpha(alpha, xi)

            table.add(config.problem, n, alpha, singular_value_distribution_check(G, symbol, (n, n)), "ok")
        except Exception as exc:
            table.add(config.problem, n, alpha, "", _error_status(exc))
    return table


COMMANDS = {
    "coeffs": run_coeffs,
    "symbol": run_symbol,
    "spectrum": run_spectrum,
    "cond": run_cond,
    "svdist": run_svdist,
    "solve": run_solve,
    "table": run_table,
}


def _parser():
    p = argparse.ArgumentParser(prog="stfrac", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--problem", choices=PROBLEM_NAMES)
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--alpha2", type=float)
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--n2", type=int, nargs="+")
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--theta", type=float)
    p.add_argument("--precond", nargs="+")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--kind", dest="symbol_kind", choices=SYMBOL_KINDS, help="symbol to sample")
    p.add_argument("--gamma-star", dest="gamma_star", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--gamma", type=float, help="override gamma (1D); 0 reduces A to I (x) Q")
    p.add_argument("--repeats", type=int)
    p.add_argument("--timing", action="store_true", default=None, help="add a median wall-time column")
    p.add_argument("--out", help="output CSV path (default stdout)")
    return p


def main(argv=None):
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        data = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ConfigError("the config file must hold a JSON object")
        overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
        config = make_config(data, **overrides)
        table = COMMANDS[args.command](config)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"stfrac: configuration error: {exc}", file=sys.stderr)
        return 2
    text = table.to_string()
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if table.failed else 0


if __name__ == "__main__":
    sys.exit(main())
