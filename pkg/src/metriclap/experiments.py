"""End-to-end experiment runners: distance profiles, pointwise convergence
ladders, eigenmap embeddings, radius sweeps, bias-bound sweeps and
assumption audits.

All runners are deterministic given (config, seed): per-trial generators are
derived from the root seed so trials are independent and reorderable, and
every CSV/JSON byte is reproducible. CSV schemas are versioned in a leading
'#' comment line; JSON output never contains NaN (missing values are null,
failures are explicit status fields).
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import geometry, oracles, spectral
from .laplacian import (
    ScheduleParams,
    build_weight_matrix,
    discrete_laplacian_apply,
    epsilon_schedule,
    scaling_constant,
)

TWO_PI = 2.0 * np.pi
CSV_VERSION = "v1"

EXPERIMENTS = (
    "distance-profile",
    "pointwise",
    "eigenmap",
    "radius-sweep",
    "bias-bounds",
    "audit",
)

# name -> (f, f', f'', positive laplacian -f'')
TEST_FUNCTIONS = {
    "sin": (np.sin, np.cos, lambda t: -np.sin(t), np.sin),
    "cos": (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.cos),
    "const": (
        lambda t: np.ones_like(np.asarray(t, dtype=float)),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "pointwise"
    metric: str = "chordal"
    metrics: tuple[str, ...] = ("ball-l1", "ball-l2", "chordal")
    n_ladder: tuple[int, ...] = (256, 1024, 4096)
    alpha: float = 0.01
    r: float = 0.75
    w1: float = 1.0
    w2: float = 2.0
    seed: int = 1234
    trials: int = 10
    test_function: str = "sin"
    output_dir: str = "out"
    sampler: str = "uniform"
    eval_angles: int = 64
    profile_points: int = 257
    eps_override: float | None = None
    radii: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    sweep_n: int = 1024
    eps_ladder: tuple[float, ...] = (0.1, 0.025, 0.00625, 0.001)
    eps0_values: tuple[float, ...] = (1.0, 0.5)
    c: float = 0.9
    x_eval: float = np.pi / 3.0
    audit_eps0: float = 1.0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if list(self.n_ladder) != sorted(self.n_ladder):
            raise ValueError("n_ladder must be ascending")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.test_function not in TEST_FUNCTIONS:
            raise ValueError(f"unknown test function {self.test_function!r}")


def make_metric(cfg: ExperimentConfig, name: str | None = None) -> oracles.MetricOracle:
    return oracles.make_oracle(
        name or cfg.metric, r=cfg.r, w1=cfg.w1, w2=cfg.w2
    )


def evaluation_grid(cfg: ExperimentConfig) -> np.ndarray:
    """Equispaced midpoint angles; offset avoids 0, pi/2, pi, 3pi/2."""
    k = np.arange(cfg.eval_angles)
    return TWO_PI * (k + 0.5) / cfg.eval_angles


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    """Per-trial generator derived from the root seed."""
    return np.random.default_rng([seed, n, trial])


def make_sampler(cfg: ExperimentConfig):
    """Return draw(rng, n) for the configured sampler."""
    if cfg.sampler == "uniform":
        return lambda rng, n: rng.uniform(0.0, TWO_PI, n)
    if cfg.sampler == "density:weighted-l1":
        # inverse-CDF table of the density proportional to
        # 1 / (w1 |sin| + w2 |cos|) with respect to d theta
        grid = np.linspace(0.0, TWO_PI, 2**16 + 1)
        pdf = 1.0 / geometry.weighted_l1_speed(cfg.w1, cfg.w2, grid)
        cdf = np.concatenate(
            ([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid)))
        )
        cdf /= cdf[-1]
        return lambda rng, n: np.interp(rng.uniform(0.0, 1.0, n), cdf, grid)
    raise ValueError(f"unknown sampler {cfg.sampler!r}")


def density_normalization(cfg: ExperimentConfig) -> float:
    """Normalizer Z of the weighted-l1 sampling density 1/(Z S(theta))."""
    grid = np.linspace(0.0, TWO_PI, 2**16 + 1)
    pdf = 1.0 / geometry.weighted_l1_speed(cfg.w1, cfg.w2, grid)
    return float(np.trapezoid(pdf, grid))


def limit_function(cfg: ExperimentConfig):
    """Analytic limit of the c_n-scaled discrete Laplacian on the eval grid.

    - uniform sampler, circle metrics: the positive Laplacian of f;
    - uniform sampler, weighted-l1 metric: 2 pi times the intrinsic
      limiting operator (c_n carries the extra volume factor 2 pi);
    - weighted-l1 density sampler, circle metrics: 2 pi times
      (P lap f - 2 f' P') for the normalized density P.
    """
    f, df, d2f, lap = TEST_FUNCTIONS[cfg.test_function]
    if cfg.sampler == "uniform":
        if cfg.metric == "weighted-l1":
            def truth(theta):
                return TWO_PI * geometry.limiting_operator_weighted_l1(
                    cfg.w1, cfg.w2, theta, f, df, d2f
                ).intrinsic

            return truth
        return lambda theta: float(lap(theta))
    if cfg.sampler == "density:weighted-l1":
        Z = density_normalization(cfg)

        def truth(theta):
            S = geometry.weighted_l1_speed(cfg.w1, cfg.w2, theta)
            Sp = geometry.weighted_l1_speed_derivative(cfg.w1, cfg.w2, theta)
            P = 1.0 / (Z * S)
            Pp = -Sp / (Z * S * S)
            return float(TWO_PI * (P * lap(theta) - 2.0 * df(theta) * Pp))

        return truth
    raise ValueError(f"no analytic limit for sampler {cfg.sampler!r}")


# ---------------------------------------------------------------------
# distance profiles
# ---------------------------------------------------------------------

def run_distance_profile(cfg: ExperimentConfig):
    """d(theta, 0) over a uniform grid in [-pi, pi] per configured metric."""
    thetas = np.linspace(-np.pi, np.pi, cfg.profile_points)
    columns: dict[str, np.ndarray] = {}
    columns["geodesic"] = np.asarray(
        oracles.geodesic_distance_circle(thetas, 0.0), dtype=float
    )
    for name in cfg.metrics:
        metric = make_metric(cfg, name)
        columns[name] = np.asarray(metric(thetas, 0.0), dtype=float)
    return thetas, columns


# ---------------------------------------------------------------------
# pointwise convergence
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRecord:
    n: int
    eps_n: float
    c_n: float
    theta_eval: float
    estimate: float
    truth: float
    abs_error: float
    trial: int
    seed: int


def run_pointwise_convergence(cfg: ExperimentConfig) -> list[ConvergenceRecord]:
    """Draw n samples per (n, trial), evaluate the scaled discrete Laplacian
    of f on a fixed angle grid, and record errors against the analytic limit."""
    metric = make_metric(cfg)
    f = TEST_FUNCTIONS[cfg.test_function][0]
    truth_fn = limit_function(cfg)
    draw = make_sampler(cfg)
    grid = evaluation_grid(cfg)
    records: list[ConvergenceRecord] = []
    for n in cfg.n_ladder:
        eps = cfg.eps_override or epsilon_schedule(ScheduleParams(n=n, alpha=cfg.alpha))
        c_n = scaling_constant(n, eps, m=1, vol=TWO_PI)
        for trial in range(cfg.trials):
            samples = draw(trial_rng(cfg.seed, n, trial), n)
            fs = np.asarray(f(samples), dtype=float)
            for x in grid:
                d = np.asarray(metric(x, samples), dtype=float)
                k = np.exp(-(d * d) / (2.0 * eps))
                est = c_n * float(np.sum(k * (float(f(x)) - fs)))
                truth = truth_fn(x)
                records.append(
                    ConvergenceRecord(
                        n=n,
                        eps_n=eps,
                        c_n=c_n,
                        theta_eval=float(x),
                        estimate=est,
                        truth=truth,
                        abs_error=abs(est - truth),
                        trial=trial,
                        seed=cfg.seed,
                    )
                )
    return records


def median_errors_by_n(records) -> dict[int, float]:
    """Median absolute error per sample size over trials and eval angles."""
    by_n: dict[int, list[float]] = {}
    for rec in records:
        by_n.setdefault(rec.n, []).append(rec.abs_error)
    return {n: float(np.median(v)) for n, v in sorted(by_n.items())}


# ---------------------------------------------------------------------
# eigenmaps
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class EigenmapResult:
    n: int
    eps_n: float
    fidelity: float
    thetas: np.ndarray
    embedding: np.ndarray


def run_eigenmap(cfg: ExperimentConfig, metric_name: str | None = None) -> list[EigenmapResult]:
    """Embed uniform circle samples with the first two non-trivial
    eigenvectors and score angular fidelity, per ladder size."""
    metric = make_metric(cfg, metric_name)
    draw = make_sampler(cfg)
    results = []
    for n in cfg.n_ladder:
        if n < 16:
            raise ValueError("eigenmap needs n >= 16")
        eps = cfg.eps_override or epsilon_schedule(ScheduleParams(n=n, alpha=cfg.alpha))
        thetas = np.sort(draw(trial_rng(cfg.seed, n, 0), n))
        graph = build_weight_matrix(thetas, metric, eps)
        emb = spectral.eigenmap_embedding(graph, 2)
        score = spectral.angular_fidelity(emb, thetas)
        results.append(
            EigenmapResult(n=n, eps_n=eps, fidelity=score, thetas=thetas, embedding=emb)
        )
    return results


# ---------------------------------------------------------------------
# radius sweep
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSweepResult:
    thetas: np.ndarray
    profiles: dict[float, np.ndarray]
    pointwise: list[tuple[float, int, float]]  # (r, trial, median_abs_error)
    fidelities: list[tuple[float, int, float]]  # (r, n, fidelity)


def run_radius_sweep(cfg: ExperimentConfig) -> RadiusSweepResult:
    """Distance profiles, pointwise errors and eigenmap fidelities over the
    radius ladder; enforces strict growth of the L1 profile in r."""
    thetas = np.linspace(-np.pi, np.pi, cfg.profile_points)
    profiles = {
        r: np.asarray(oracles.rotating_ball_l1(r, thetas, 0.0), dtype=float)
        for r in cfg.radii
    }
    interior = (thetas > 0) & (thetas <= np.pi)
    ordered = sorted(cfg.radii)
    for lo, hi in zip(ordered, ordered[1:]):
        if not np.all(profiles[lo][interior] < profiles[hi][interior]):
            raise RuntimeError(
                f"L1 profile not strictly increasing from r={lo} to r={hi}"
            )

    pointwise = []
    for r in cfg.radii:
        sub = replace(
            cfg,
            metric="ball-l1",
            r=r,
            n_ladder=(cfg.sweep_n,),
            experiment="pointwise",
        )
        recs = run_pointwise_convergence(sub)
        for trial in range(cfg.trials):
            errs = [rec.abs_error for rec in recs if rec.trial == trial]
            pointwise.append((r, trial, float(np.median(errs))))

    fidelities = []
    for r in cfg.radii:
        sub = replace(cfg, metric="ball-l1", r=r, experiment="eigenmap")
        for res in run_eigenmap(sub):
            fidelities.append((r, res.n, res.fidelity))

    return RadiusSweepResult(
        thetas=thetas, profiles=profiles, pointwise=pointwise, fidelities=fidelities
    )


# ---------------------------------------------------------------------
# bias bounds
# ---------------------------------------------------------------------

def run_bias_bounds(cfg: ExperimentConfig):
    """Sweep (eps, eps0), reporting kernel-integral bias and its bounds."""
    metric = make_metric(cfg)
    f, _, _, lap = TEST_FUNCTIONS[cfg.test_function]
    x = cfg.x_eval
    lap_x = float(lap(x))
    fine = np.linspace(0.0, TWO_PI, 4097)
    f_inf = float(np.max(np.abs(f(fine))))
    d_g = oracles.geodesic_oracle()
    reports = []
    for eps0 in cfg.eps0_values:
        for eps in cfg.eps_ladder:
            A, G = geometry.quadrature_A_G(metric, f, x, eps)
            quad_bias = float(f(x)) * A - G - 0.5 * eps * lap_x
            rep = geometry.bias_bounds(
                x,
                eps,
                eps0,
                cfg.c,
                f_inf,
                lap_x,
                m=1,
                vol_tail=lambda rx: TWO_PI - 2.0 * rx,
                beta_val=lambda rx: geometry.beta_separation(metric, d_g, x, rx),
                quad_bias=quad_bias,
            )
            reports.append(rep)

    by_eps0: dict[float, list] = {}
    for rep in reports:
        by_eps0.setdefault(rep.eps0, []).append(rep)
    eps0_sorted = sorted(by_eps0)
    eps0_monotone = True
    for small, large in zip(eps0_sorted, eps0_sorted[1:]):
        for a, b in zip(by_eps0[small], by_eps0[large]):
            if not (a.R1 > b.R1 and a.R3 > b.R3):
                eps0_monotone = False
    quad_decreasing = all(
        abs(reps[i].quad_bias) > abs(reps[i + 1].quad_bias)
        for reps in by_eps0.values()
        for i in range(len(reps) - 1)
    )
    summary = {
        "eps0_monotonicity_ok": eps0_monotone,
        "quad_bias_decreasing": quad_decreasing,
    }
    return reports, summary


# ---------------------------------------------------------------------
# assumption audit
# ---------------------------------------------------------------------

def _offset_angles(count: int, lo: float = 0.0, hi: float = TWO_PI) -> np.ndarray:
    k = np.arange(count)
    return lo + (hi - lo) * (k + 0.5) / count


def run_audit(cfg: ExperimentConfig) -> dict:
    """Induced-metric grid, degeneracy check and assumption audits.

    The status field distinguishes pass / degenerate / assumption-1-violated.
    """
    name = cfg.metric
    metric = make_metric(cfg)

    if name == "cubic":
        hess_grid = np.linspace(-0.8, 0.8, 17)
        d_g = None
        exp_map = None
        audit_grid = None
    elif name == "weighted-l1":
        hess_grid = _offset_angles(8, 0.15, 0.5 * np.pi - 0.15)
        d_g = geometry.weighted_l1_geodesic(cfg.w1, cfg.w2)
        exp_map = geometry.weighted_l1_exp(cfg.w1, cfg.w2)
        audit_grid = _offset_angles(192, 0.1, 0.5 * np.pi - 0.1)
    else:
        hess_grid = _offset_angles(16)
        d_g = oracles.geodesic_oracle()
        exp_map = geometry.circle_exp
        audit_grid = _offset_angles(256)

    min_eigs = []
    verdicts = []
    for x in hess_grid:
        form = geometry.induced_metric_hessian(metric, float(x))
        min_eigs.append(float(np.linalg.eigvalsh(form.matrix)[0]))
        verdicts.append(geometry.nondegeneracy_check(form))
    degenerate = any(v == "degenerate" for v in verdicts)

    audit = None
    kappa = None
    status = "pass"
    if degenerate:
        status = "degenerate"
    else:
        eps0 = cfg.audit_eps0 if name != "weighted-l1" else 0.4
        audit = geometry.assumption2_audit(metric, d_g, audit_grid, eps0)
        if audit.d_minus_dg_max > 1e-6:
            status = "assumption-1-violated"
        else:
            if name == "weighted-l1":
                kx = _offset_angles(4, 0.5, 1.0)
                span = (-0.2, 0.2)
                step = 0.02
            else:
                kx = _offset_angles(8)
                span = (-1.0, 1.0)
                step = 0.05
            kappa = geometry.fourth_derivative_bound(
                metric, d_g, kx, (-1.0, 1.0), span, exp_map=exp_map, step=step
            )

    record = {
        "K_hat": None if audit is None else audit.K_hat,
        "eps0": cfg.audit_eps0 if audit is None else audit.eps0,
        "kappa_hat": kappa,
        "max_violation": None if audit is None else audit.max_violation,
        "degenerate": degenerate,
    }
    return {
        "metric": name,
        "params": dict(metric.params),
        "status": status,
        "audit": record,
        "hessian": {
            "grid": [float(v) for v in hess_grid],
            "min_eigenvalue": min_eigs,
            "verdicts": verdicts,
        },
    }


# ---------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path, comment: str, header: list[str], rows) -> None:
    buf = io.StringIO()
    buf.write(comment + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_profile_csv(path, thetas, columns: dict) -> None:
    names = list(columns)
    comment = f"# metriclap-csv {CSV_VERSION} kind=profile series={len(names)}"
    rows = (
        [thetas[i]] + [columns[name][i] for name in names]
        for i in range(len(thetas))
    )
    _write_csv(path, comment, ["theta"] + names, rows)


def write_convergence_csv(path, records, alpha: float, eps_override: float | None = None) -> None:
    comment = (
        f"# metriclap-csv {CSV_VERSION} kind=pointwise alpha={alpha!r} "
        f"eps_override={'none' if eps_override is None else repr(eps_override)}"
    )
    header = [
        "n", "eps_n", "c_n", "theta_eval", "estimate", "truth",
        "abs_error", "trial", "seed",
    ]
    rows = (
        [r.n, r.eps_n, r.c_n, r.theta_eval, r.estimate, r.truth,
         r.abs_error, r.trial, r.seed]
        for r in records
    )
    _write_csv(path, comment, header, rows)


def read_convergence_csv(path) -> list[ConvergenceRecord]:
    """Load pointwise records, re-asserting the schedule invariants.

    eps_n must equal the bandwidth schedule (unless the run overrode it, as
    recorded in the header) and c_n must equal the scaling constant.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        comment = fh.readline().strip()
        if not comment.startswith(f"# metriclap-csv {CSV_VERSION} kind=pointwise"):
            raise ValueError(f"unexpected schema line: {comment}")
        alpha = float(comment.split("alpha=")[1].split()[0])
        override = comment.split("eps_override=")[1].split()[0]
        scheduled = override == "none"
        reader = csv.DictReader(fh)
        records = []
        for row in reader:
            rec = ConvergenceRecord(
                n=int(row["n"]),
                eps_n=float(row["eps_n"]),
                c_n=float(row["c_n"]),
                theta_eval=float(row["theta_eval"]),
                estimate=float(row["estimate"]),
                truth=float(row["truth"]),
                abs_error=float(row["abs_error"]),
                trial=int(row["trial"]),
                seed=int(row["seed"]),
            )
            expected_c = scaling_constant(rec.n, rec.eps_n, m=1, vol=TWO_PI)
            if not np.isclose(rec.c_n, expected_c, rtol=1e-12):
                raise ValueError(f"scaling invariant violated for n={rec.n}")
            if scheduled:
                expected_eps = epsilon_schedule(ScheduleParams(n=rec.n, alpha=alpha))
                if not np.isclose(rec.eps_n, expected_eps, rtol=1e-12):
                    raise ValueError(f"schedule invariant violated for n={rec.n}")
            records.append(rec)
    return records


def write_sweep_csvs(out_dir: str, sweep: RadiusSweepResult, cfg: ExperimentConfig) -> tuple[str, str, str]:
    """Write the three radius-sweep tables; returns their paths."""
    profile_path = os.path.join(out_dir, "sweep_profile.csv")
    write_profile_csv(
        profile_path,
        sweep.thetas,
        {f"r={r!r}": sweep.profiles[r] for r in cfg.radii},
    )
    pw_path = os.path.join(out_dir, "sweep_pointwise.csv")
    _write_csv(
        pw_path,
        f"# metriclap-csv {CSV_VERSION} kind=sweep-pointwise n={cfg.sweep_n}",
        ["r", "trial", "median_abs_error"],
        sweep.pointwise,
    )
    fid_path = os.path.join(out_dir, "sweep_fidelity.csv")
    _write_csv(
        fid_path,
        f"# metriclap-csv {CSV_VERSION} kind=sweep-fidelity",
        ["r", "n", "fidelity"],
        sweep.fidelities,
    )
    return profile_path, pw_path, fid_path


def write_eigenmap_csv(path, result: EigenmapResult) -> None:
    comment = (
        f"# metriclap-csv {CSV_VERSION} kind=eigenmap n={result.n} "
        f"fidelity={result.fidelity!r}"
    )
    rows = (
        [i, result.thetas[i], result.embedding[i, 0], result.embedding[i, 1]]
        for i in range(result.n)
    )
    _write_csv(path, comment, ["index", "true_theta", "v1", "v2"], rows)


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False))
        fh.write("\n")


def bias_report_payload(rep: geometry.BiasBoundReport) -> dict:
    return {
        "eps": rep.eps,
        "eps0": rep.eps0,
        "r_x": rep.r_x,
        "beta_val": rep.beta_val,
        "R1": rep.R1,
        "R3": rep.R3,
        "quad_bias": rep.quad_bias,
        "r2_residual": rep.r2_residual,
    }


# ---------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------

_TUPLE_FIELDS = {"metrics": str, "n_ladder": int, "radii": float,
                 "eps_ladder": float, "eps0_values": float}


def parse_config(path, **overrides) -> ExperimentConfig:
    """Parse a flat key = value config file mirroring ExperimentConfig."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = raw
    values.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(values)


def config_from_mapping(values: dict) -> ExperimentConfig:
    known = {f.name: f for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(raw, str):
            kwargs[key] = _coerce(key, raw)
        else:
            kwargs[key] = raw
    return ExperimentConfig(**kwargs)


def _coerce(key: str, raw: str):
    if key in _TUPLE_FIELDS:
        cast = _TUPLE_FIELDS[key]
        return tuple(cast(part.strip()) for part in raw.split(",") if part.strip())
    if key in ("seed", "trials", "eval_angles", "profile_points", "sweep_n"):
        return int(raw)
    if key in ("alpha", "r", "w1", "w2", "c", "x_eval", "audit_eps0"):
        return float(raw)
    if key == "eps_override":
        return None if raw.lower() in ("none", "") else float(raw)
    return raw


def ensure_output_dir(cfg: ExperimentConfig) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir
