"""Command-line front end.

Subcommands evaluate the library quantities on points or grids, run the
cross-route consistency harness, and exercise the Gaussian identity suite.
All output is machine readable (JSON, or CSV for grids); identical jobs with
identical seeds produce byte-identical output. POINTINT_THREADS caps the
number of worker threads used for grid evaluation; the output order never
depends on it.
"""

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import click
import numpy as np

from . import bogolyubov, gaussian, greenfn, oracle, tau
from .errors import NumericalError
from .greenfn import PointInteractionConfig, SpectralParameter


def parse_complex(text: str) -> complex:
    """Parse 're', 're+imi' or 'imi' styles ('1', '1+0.3i', '-0.5i')."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as err:
        raise ValueError(f"cannot parse complex number from {text!r}") from err


def parse_config(inline: str | None, path: str | None) -> PointInteractionConfig:
    """Interaction config from inline 'a:V,a:V' syntax or a JSON file of
    [{"a": ..., "V": ...}] entries."""
    if inline and path:
        raise ValueError("give either an inline config or a config file, not both")
    entries = []
    if inline:
        for chunk in inline.split(","):
            left, sep, right = chunk.partition(":")
            if not sep:
                raise ValueError(f"config entry {chunk!r} is not of the form a:V")
            entries.append((float(left), float(right)))
    elif path:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, list):
            raise ValueError("config file must hold a JSON array of {a, V} objects")
        for item in data:
            entries.append((float(item["a"]), float(item["V"])))
    entries.sort(key=lambda e: e[0])
    return PointInteractionConfig(tuple(a for a, _ in entries), tuple(v for _, v in entries))


@dataclass(frozen=True)
class JobSpec:
    """A fully parsed unit of CLI work; invalid fields are rejected before
    any computation starts."""

    command: str
    m: complex = None
    config: PointInteractionConfig = None
    at: tuple = None
    grid: tuple = None
    output: str = "json"
    seed: int = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in ("green", "corr", "formfactor", "tau",
                                "crosscheck", "gaussian-check"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.output not in ("json", "csv"):
            raise ValueError("output must be json or csv")
        if self.grid is not None:
            x_min, x_max, steps = self.grid
            if int(steps) < 1:
                raise ValueError("grid steps must be at least 1")
            if not x_min <= x_max:
                raise ValueError("grid minimum must not exceed maximum")
            object.__setattr__(self, "grid", (float(x_min), float(x_max), int(steps)))


def _value_payload(value: complex) -> dict:
    # + 0.0 folds negative zero into plain zero for stable output
    return {"value_re": float(value.real) + 0.0, "value_im": float(value.imag) + 0.0}


def _grid_points(grid):
    x_min, x_max, steps = grid
    axis = np.linspace(x_min, x_max, steps) if steps > 1 else np.array([x_min])
    return [(float(x), float(y)) for x in axis for y in axis]


def _evaluate_grid(fn, points):
    workers = int(os.environ.get("POINTINT_THREADS", "1") or "1")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: fn(*p), points))
    return [fn(x, y) for x, y in points]


def _csv_lines(points, values):
    lines = ["x,y,re,im"]
    for (x, y), v in zip(points, values):
        lines.append(f"{x:.17g},{y:.17g},{v.real:.17g},{v.imag:.17g}")
    return lines


def _run_green(job, out):
    sp = SpectralParameter(job.m)
    cfg = job.config if job.config is not None else PointInteractionConfig((), ())

    def kernel(x, y):
        return greenfn.resolvent_kernel(sp, cfg, x, y)

    if job.at is not None:
        out.write(json.dumps(_value_payload(kernel(*job.at)), sort_keys=True) + "\n")
        return
    if job.grid is None:
        raise ValueError("green needs either --at or --grid")
    points = _grid_points(job.grid)
    values = _evaluate_grid(kernel, points)
    if job.output == "csv":
        out.write("\n".join(_csv_lines(points, values)) + "\n")
    else:
        rows = [{"x": x, "y": y, "re": v.real, "im": v.imag}
                for (x, y), v in zip(points, values)]
        out.write(json.dumps(rows, sort_keys=True) + "\n")


def _run_corr(job, out):
    sp = SpectralParameter(job.m)
    value = greenfn.correlator_det(sp, job.config)
    out.write(json.dumps(_value_payload(value), sort_keys=True) + "\n")


def _run_tau(job, out):
    sp = SpectralParameter(job.m)
    value = tau.tau_collapsed(sp, job.config)
    out.write(json.dumps(_value_payload(value), sort_keys=True) + "\n")


def _run_formfactor(job, out):
    p = bogolyubov.BogolyubovParams(job.extra["lam"], job.extra["mu"], job.extra["nu"])
    k, l = job.extra["k"], job.extra["l"]
    if job.extra.get("element"):
        value = bogolyubov.matrix_element(k, l, p)
    else:
        value = bogolyubov.form_factor(k, l, p)
    out.write(json.dumps(_value_payload(value), sort_keys=True) + "\n")


def _rel_dev(values):
    scale = max(max(abs(v) for v in values), 1e-300)
    return float(max(abs(u - v) for u in values for v in values) / scale)


def _run_crosscheck(job, out):
    """Random configuration, every quantity by every route, one report."""
    n = job.extra.get("n", 3)
    seed = job.seed if job.seed is not None else 0
    rng = np.random.default_rng(seed)
    m = float(rng.uniform(0.5, 2.0))
    sp = SpectralParameter(m)
    gaps = rng.uniform(0.5, 2.0, size=max(n - 1, 0))
    positions = tuple(np.concatenate([[0.0], np.cumsum(gaps)]))[:n]
    strengths = tuple(rng.uniform(0.5, 3.0, size=n))
    cfg = PointInteractionConfig(positions, strengths)

    checks = []
    lo, hi = positions[0], positions[-1]
    sample_points = [(lo - 0.6, lo - 0.6),
                     (0.5 * (lo + hi), 0.5 * (lo + hi) + 0.8),
                     (lo - 0.3, hi + 0.4)]
    for x, y in sample_points:
        routes = {
            "resolvent_kernel": greenfn.resolvent_kernel(sp, cfg, x, y),
            "transfer_green": oracle.transfer_green(sp, cfg, x, y),
            "resolvent_via_fields": bogolyubov.resolvent_via_fields(
                sp, cfg, x, y, dim=64, rtol=1e-11),
        }
        checks.append({"name": f"resolvent at ({x:.6g}, {y:.6g})",
                       "values": {k: _value_payload(v) for k, v in routes.items()},
                       "max_rel_dev": _rel_dev(list(routes.values()))})

    corr_routes = {
        "correlator_det": greenfn.correlator_det(sp, cfg),
        "fusion": bogolyubov.correlator_via_fusion(sp, cfg),
    }
    checks.append({"name": "correlator",
                   "values": {k: _value_payload(v) for k, v in corr_routes.items()},
                   "max_rel_dev": _rel_dev(list(corr_routes.values()))})

    tau_bits = {"tau_collapsed": tau.tau_collapsed(sp, cfg)}
    fin_tau, fin_corr = tau.fin_check(sp, cfg)
    tau_bits["correlator_ratio_power"] = fin_corr
    if n >= 1:
        tau_bits["tau_via_M"] = tau.tau_via_M(sp, tau.Localization.default_for(cfg), cfg)
    checks.append({"name": "tau",
                   "values": {k: _value_payload(v) for k, v in tau_bits.items()},
                   "max_rel_dev": _rel_dev(list(tau_bits.values()))})

    worst = max(c["max_rel_dev"] for c in checks)
    tol = job.extra.get("tol", 1e-9)
    report = {
        "seed": seed,
        "m": m,
        "config": [{"a": a, "V": v} for a, v in zip(positions, strengths)],
        "checks": checks,
        "max_rel_dev": worst,
        "tol": tol,
        "passed": worst <= tol,
    }
    out.write(json.dumps(report, sort_keys=True) + "\n")
    if worst > tol:
        raise NumericalError(f"cross-route deviation {worst:.3e} exceeds {tol:.3e}")


def _run_gaussian_check(job, out):
    seed = job.seed if job.seed is not None else 20_260_810
    kind = job.extra.get("kind", "real")
    samples = job.extra.get("samples", 1_000_000)
    m_dim = job.extra.get("m_dim", 2)
    n_dim = job.extra.get("n_dim", 2)
    rng = np.random.default_rng(seed)
    form = gaussian.random_quadratic_form(rng, m_dim, n_dim, kind=kind, with_source=True)
    report = gaussian.moment_check_mc(form, kind=kind, samples=samples, seed=seed)
    schur_residual = gaussian.schur_partition_identity(form)
    payload = {
        "kind": kind,
        "seed": seed,
        "samples": samples,
        "schur_residual": schur_residual,
        "checks": [{
            "name": c.name,
            "estimate_re": c.estimate.real, "estimate_im": c.estimate.imag,
            "exact_re": c.exact.real, "exact_im": c.exact.imag,
            "stderr": c.stderr, "n_sigma": c.n_sigma, "passed": c.passed,
        } for c in report.checks],
        "passed": report.passed,
    }
    out.write(json.dumps(payload, sort_keys=True) + "\n")
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        raise NumericalError(f"Monte Carlo checks beyond four sigma: {names}")


_DISPATCH = {
    "green": _run_green,
    "corr": _run_corr,
    "tau": _run_tau,
    "formfactor": _run_formfactor,
    "crosscheck": _run_crosscheck,
    "gaussian-check": _run_gaussian_check,
}


def run(job: JobSpec, out=None, err=None) -> int:
    """Execute a job; returns the exit code (0 ok, 2 validation failure,
    3 numerical failure) and writes a one-line error object on failure."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        _DISPATCH[job.command](job, out)
        return 0
    except NumericalError as failure:
        err.write(json.dumps({"error": str(failure), "kind": "numerical",
                              "type": type(failure).__name__}, sort_keys=True) + "\n")
        return 3
    except (ValueError, OSError, KeyError) as failure:
        err.write(json.dumps({"error": str(failure), "kind": "validation",
                              "type": type(failure).__name__}, sort_keys=True) + "\n")
        return 2


def _finish(job: JobSpec):
    sys.exit(run(job))


def _config_options(fn):
    fn = click.option("--points", default=None,
                      help="Inline config a:V,a:V (position:strength).")(fn)
    fn = click.option("--config", "config_path", default=None,
                      type=click.Path(), help="JSON file with [{a, V}, ...].")(fn)
    return fn


@click.group()
def main():
    """Point-interaction resolvents, field correlators and tau functions."""


@main.command()
@click.option("--m", "m_text", required=True, help="Spectral parameter m (Re m > 0).")
@_config_options
@click.option("--at", "at_text", default=None, help="Single evaluation point 'x,y'.")
@click.option("--grid", "grid_text", default=None, help="Grid 'min:max:steps' for x and y.")
@click.option("--output", type=click.Choice(["json", "csv"]), default="json")
def green(m_text, points, config_path, at_text, grid_text, output):
    """Evaluate the (perturbed) resolvent kernel."""
    try:
        at = None
        if at_text is not None:
            x_str, y_str = at_text.split(",")
            at = (float(x_str), float(y_str))
        grid = None
        if grid_text is not None:
            lo, hi, steps = grid_text.split(":")
            grid = (float(lo), float(hi), int(steps))
        job = JobSpec(command="green", m=parse_complex(m_text),
                      config=parse_config(points, config_path),
                      at=at, grid=grid, output=output)
    except ValueError as failure:
        click.echo(json.dumps({"error": str(failure), "kind": "validation"},
                              sort_keys=True), err=True)
        sys.exit(2)
    _finish(job)


@main.command()
@click.option("--m", "m_text", required=True)
@_config_options
def corr(m_text, points, config_path):
    """N-point correlator of the delta-interaction fields."""
    try:
        job = JobSpec(command="corr", m=parse_complex(m_text),
                      config=parse_config(points, config_path))
    except ValueError as failure:
        click.echo(json.dumps({"error": str(failure), "kind": "validation"},
                              sort_keys=True), err=True)
        sys.exit(2)
    _finish(job)


@main.command(name="tau")
@click.option("--m", "m_text", required=True)
@_config_options
def tau_command(m_text, points, config_path):
    """Tau function of the point-interaction family."""
    try:
        job = JobSpec(command="tau", m=parse_complex(m_text),
                      config=parse_config(points, config_path))
    except ValueError as failure:
        click.echo(json.dumps({"error": str(failure), "kind": "validation"},
                              sort_keys=True), err=True)
        sys.exit(2)
    _finish(job)


@main.command()
@click.option("--k", type=int, required=True)
@click.option("--l", type=int, required=True)
@click.option("--lam", "lam_text", required=True)
@click.option("--mu", "mu_text", required=True)
@click.option("--nu", "nu_text", required=True)
@click.option("--element", is_flag=True, help="Emit <k|O|l> instead of F_{k,l}.")
def formfactor(k, l, lam_text, mu_text, nu_text, element):
    """Form factor of a normal-ordered SL(2,R) operator."""
    try:
        job = JobSpec(command="formfactor", extra={
            "k": k, "l": l, "lam": parse_complex(lam_text),
            "mu": parse_complex(mu_text), "nu": parse_complex(nu_text),
            "element": element})
    except ValueError as failure:
        click.echo(json.dumps({"error": str(failure), "kind": "validation"},
                              sort_keys=True), err=True)
        sys.exit(2)
    _finish(job)


@main.command()
@click.option("--n", type=int, default=3, help="Number of interaction points.")
@click.option("--seed", type=int, default=0)
@click.option("--tol", type=float, default=1e-9)
def crosscheck(n, seed, tol):
    """Draw a random configuration and compare every route pairwise."""
    if n < 1:
        click.echo(json.dumps({"error": "n must be at least 1", "kind": "validation"},
                              sort_keys=True), err=True)
        sys.exit(2)
    _finish(JobSpec(command="crosscheck", seed=seed, extra={"n": n, "tol": tol}))


@main.command(name="gaussian-check")
@click.option("--kind", type=click.Choice(["real", "complex"]), default="real")
@click.option("--samples", type=int, default=1_000_000)
@click.option("--seed", type=int, default=20_260_810)
@click.option("--m-dim", type=int, default=2)
@click.option("--n-dim", type=int, default=2)
def gaussian_check(kind, samples, seed, m_dim, n_dim):
    """Monte Carlo validation of the Gaussian moment formulas."""
    if m_dim > 4 or n_dim > 4 or m_dim < 1 or n_dim < 1:
        click.echo(json.dumps({"error": "dimensions must be between 1 and 4",
                               "kind": "validation"}, sort_keys=True), err=True)
        sys.exit(2)
    _finish(JobSpec(command="gaussian-check", seed=seed,
                    extra={"kind": kind, "samples": samples,
                           "m_dim": m_dim, "n_dim": n_dim}))


if __name__ == "__main__":
    main()
