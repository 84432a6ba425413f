"""Experiment drivers and their CSV contracts.

Each experiment writes deterministic CSVs: identical config and seed produce
byte-identical files.  Wall-clock measurements are therefore kept out of the
result files and written to a separate ``timing.csv`` that carries no
determinism guarantee.

Output schemas (all UTF-8, comma separated, one header row, floats printed
at nine significant digits):

  sweep files (working example / crossover):
      strategy, beta, n_samples, demo_angle, mean_belief_error, std_error
  records.csv:
      environment, method, dependence, beta, teacher_seed, theta_true,
      theta_hat, error, regret        (weight vectors join coordinates with ';')
  aggregate.csv:
      environment, method, dependence, beta, n_teachers, mean_error,
      stderr_error, mean_regret, stderr_regret
  timing.csv:
      environment, method, dependence, beta, teacher_seed, wall_seconds,
      seconds_per_iteration
"""

from __future__ import annotations

import csv
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import ConfigError, Dataset, fmt_float
from .environments import make_environment
from .inference import (
    InnerConfig,
    MhConfig,
    double_mh_posterior,
    mh_posterior,
    posterior_mean,
)
from .metrics import EvalRecord, regret, theta_error
from .normalizers import (
    ExactQuadratureNormalizer,
    IgnoreNormalizer,
    MaximumNormalizer,
    MeanSamplingNormalizer,
    belief_curve,
)
from .teachers import TeacherSpec, generate_dataset

EXPERIMENTS = ("working-example", "crossover", "simulation-suite", "dependence-study")
METHODS = ("ignore", "sample", "maximum", "exact", "double-mh")

SWEEP_HEADER = ("strategy", "beta", "n_samples", "demo_angle",
                "mean_belief_error", "std_error")
AGGREGATE_HEADER = ("environment", "method", "dependence", "beta", "n_teachers",
                    "mean_error", "stderr_error", "mean_regret", "stderr_regret")


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@dataclass(frozen=True)
class TeacherSettings:
    burn_in: int = 2000
    proposal_scale: float = 0.1
    penalty_weight: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str | None = None
    out_dir: str = "results"
    seed: int = 0
    env_name: str = "path"
    env_params: tuple = ()
    methods: tuple = ("ignore", "sample", "maximum", "double-mh")
    betas: tuple = (5.0, 25.0)
    teachers: int = 20
    demos_per_teacher: int = 3
    sample_size: int = 100
    workers: int = 1
    mh: MhConfig = MhConfig()
    inner: InnerConfig = InnerConfig()
    teacher: TeacherSettings = TeacherSettings()
    # Working-example sweeps (cup environment only).
    demo_grid: tuple = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2)
    beta_sweep: tuple = (0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
    n_sweep: tuple = (1, 10, 100, 1000, 10000)
    runs: int = 100
    crossover_betas: tuple = (0.5, 5.0)
    crossover_n: int = 10

    def build_env(self):
        return make_environment(self.env_name, **dict(self.env_params))

    def validate(self):
        if self.experiment is not None and self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; expected one of: "
                + ", ".join(EXPERIMENTS))
        if not self.methods:
            raise ConfigError("methods must not be empty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(
                    f"unknown method {m!r}; expected one of: " + ", ".join(METHODS))
        if not self.betas or any(b <= 0 for b in self.betas):
            raise ConfigError("betas must be a nonempty list of positive values")
        if self.teachers < 1:
            raise ConfigError("teachers must be positive")
        if self.demos_per_teacher < 1:
            raise ConfigError("demos_per_teacher must be positive")
        if self.sample_size < 1:
            raise ConfigError("sample_size must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        if not self.demo_grid:
            raise ConfigError("demo_grid must not be empty")
        if any(n < 1 for n in self.n_sweep):
            raise ConfigError("n_sweep entries must be positive")
        self.mh.validate()
        self.inner.validate()
        self.build_env()  # raises ConfigError on bad environment settings
        return self


_CONFIG_KEYS = {
    "experiment", "out", "seed", "methods", "betas", "teachers",
    "demos_per_teacher", "sample_size", "workers", "environment", "mh",
    "inner", "teacher", "working_example",
}
_WE_KEYS = {"demo_grid", "beta_sweep", "n_sweep", "runs", "crossover_betas",
            "crossover_n"}


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment config, rejecting unknown keys."""
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path!r}: {err}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"config {path!r} is not valid TOML: {err}") from err

    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(
            f"unknown config keys {sorted(unknown)}; known keys: {sorted(_CONFIG_KEYS)}")
    env_table = dict(raw.get("environment", {}))
    env_name = env_table.pop("name", "path")
    we = dict(raw.get("working_example", {}))
    unknown = set(we) - _WE_KEYS
    if unknown:
        raise ConfigError(f"unknown working_example keys {sorted(unknown)}")

    def sub(table_name, cls, defaults):
        table = dict(raw.get(table_name, {}))
        known = {f for f in defaults.__dataclass_fields__}
        bad = set(table) - known
        if bad:
            raise ConfigError(f"unknown {table_name} keys {sorted(bad)}")
        return replace(defaults, **table)

    cfg = ExperimentConfig(
        experiment=raw.get("experiment"),
        out_dir=raw.get("out", "results"),
        seed=int(raw.get("seed", 0)),
        env_name=env_name,
        env_params=tuple(sorted(env_table.items())),
        methods=tuple(raw.get("methods", ("ignore", "sample", "maximum", "double-mh"))),
        betas=tuple(float(b) for b in raw.get("betas", (5.0, 25.0))),
        teachers=int(raw.get("teachers", 20)),
        demos_per_teacher=int(raw.get("demos_per_teacher", 3)),
        sample_size=int(raw.get("sample_size", 100)),
        workers=int(raw.get("workers", 1)),
        mh=sub("mh", MhConfig, MhConfig()),
        inner=sub("inner", InnerConfig, InnerConfig()),
        teacher=sub("teacher", TeacherSettings, TeacherSettings()),
        demo_grid=tuple(we.get("demo_grid", ExperimentConfig.demo_grid)),
        beta_sweep=tuple(we.get("beta_sweep", ExperimentConfig.beta_sweep)),
        n_sweep=tuple(int(n) for n in we.get("n_sweep", ExperimentConfig.n_sweep)),
        runs=int(we.get("runs", ExperimentConfig.runs)),
        crossover_betas=tuple(we.get("crossover_betas", ExperimentConfig.crossover_betas)),
        crossover_n=int(we.get("crossover_n", ExperimentConfig.crossover_n)),
    )
    return cfg.validate()


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Working example: belief-error sweeps on the cup environment.

def _belief_errors(env, demos, beta, strategy):
    exact = belief_curve(demos, beta, ExactQuadratureNormalizer(), env)
    return np.abs(exact - belief_curve(demos, beta, strategy, env))


def run_working_example(cfg: ExperimentConfig, out_dir=None):
    """Deterministic sweeps of belief error against the exact posterior.

    Writes one CSV per strategy sweep plus the crossover table; returns the
    in-memory summary keyed the same way the assertion checks expect.
    """
    cfg.validate()
    out = out_dir or cfg.out_dir
    env = make_environment("cup")
    demos = np.asarray(cfg.demo_grid, dtype=float)[:, None]
    summary = {"ignore": {}, "maximum": {}, "sampling": {}, "crossover": {}}

    for name, strategy_of_beta in (("ignore", lambda b: IgnoreNormalizer()),
                                   ("maximum", lambda b: MaximumNormalizer())):
        rows = []
        for beta in cfg.beta_sweep:
            errs = _belief_errors(env, demos, beta, strategy_of_beta(beta))
            summary[name][beta] = errs
            for angle, err in zip(cfg.demo_grid, errs):
                rows.append([name, fmt_float(beta), "", fmt_float(angle),
                             fmt_float(err), fmt_float(0.0)])
        write_csv(os.path.join(out, f"working_example_{name}.csv"), SWEEP_HEADER, rows)

    rows = []
    for n in cfg.n_sweep:
        errs = _sampling_errors(env, demos, 1.0, n, cfg)
        summary["sampling"][n] = errs
        for j, angle in enumerate(cfg.demo_grid):
            rows.append(["sample", fmt_float(1.0), str(n), fmt_float(angle),
                         fmt_float(errs[:, j].mean()),
                         fmt_float(_stderr(errs[:, j]))])
    write_csv(os.path.join(out, "working_example_sampling.csv"), SWEEP_HEADER, rows)

    summary["crossover"] = _crossover_rows(cfg, env, demos, out)
    return summary


def _stderr(values):
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def _sampling_errors(env, demos, beta, n, cfg):
    """Belief errors over cfg.runs independently seeded batches, (runs, demos)."""
    errs = np.empty((cfg.runs, demos.shape[0]))
    for run in range(cfg.runs):
        strategy = MeanSamplingNormalizer(n, seed=_derive_seed(cfg.seed, 101, n, run))
        errs[run] = _belief_errors(env, demos, beta, strategy)
    return errs


def _crossover_rows(cfg, env, demos, out):
    """Mean-sampling vs maximum at the crossover rationality levels."""
    rows, table = [], {}
    for beta in cfg.crossover_betas:
        errs = _sampling_errors(env, demos, beta, cfg.crossover_n, cfg)
        table[("sample", beta)] = float(errs.mean())
        for j, angle in enumerate(cfg.demo_grid):
            rows.append(["sample", fmt_float(beta), str(cfg.crossover_n),
                         fmt_float(angle), fmt_float(errs[:, j].mean()),
                         fmt_float(_stderr(errs[:, j]))])
        errs_max = _belief_errors(env, demos, beta, MaximumNormalizer())
        table[("maximum", beta)] = float(errs_max.mean())
        for angle, err in zip(cfg.demo_grid, errs_max):
            rows.append(["maximum", fmt_float(beta), "", fmt_float(angle),
                         fmt_float(err), fmt_float(0.0)])
    write_csv(os.path.join(out, "crossover.csv"), SWEEP_HEADER, rows)
    return table


def run_crossover(cfg: ExperimentConfig, out_dir=None):
    cfg.validate()
    out = out_dir or cfg.out_dir
    env = make_environment("cup")
    demos = np.asarray(cfg.demo_grid, dtype=float)[:, None]
    return {"crossover": _crossover_rows(cfg, env, demos, out)}


# ---------------------------------------------------------------------------
# Teacher-based studies.

def _learn(env, prior, dataset, beta, method, cfg, chain_seed, teacher_idx):
    mh_cfg = replace(cfg.mh, seed=chain_seed)
    penalty = cfg.teacher.penalty_weight
    start = time.perf_counter()
    if method == "double-mh":
        chain = double_mh_posterior(dataset, beta, env, prior, mh_cfg, cfg.inner,
                                    penalty_weight=penalty)
    else:
        strategy = {
            "ignore": IgnoreNormalizer,
            "maximum": MaximumNormalizer,
            "exact": ExactQuadratureNormalizer,
        }.get(method)
        if strategy is not None:
            strategy = strategy()
        else:
            strategy = MeanSamplingNormalizer(
                cfg.sample_size, seed=_derive_seed(cfg.seed, 103, teacher_idx))
        chain = mh_posterior(dataset, beta, strategy, env, prior, mh_cfg,
                             penalty_weight=penalty)
    wall = time.perf_counter() - start
    return chain, wall


def _episode(cfg, beta, teacher_idx, teacher_mode, learner_modes, salt):
    env = cfg.build_env()
    prior = env.default_prior()
    trng = np.random.default_rng([cfg.seed, salt, teacher_idx])
    theta_true = prior.sample(trng)
    spec = TeacherSpec(theta_true, beta, cfg.demos_per_teacher, teacher_mode,
                       cfg.teacher.burn_in, cfg.teacher.proposal_scale,
                       cfg.teacher.penalty_weight)
    data = generate_dataset(spec, env, trng)
    chain_seed = _derive_seed(cfg.seed, salt + 1, teacher_idx, round(beta * 1000))
    records = []
    for mode in learner_modes:
        if mode == data.dependence:
            view = data
        else:
            view = Dataset(data.trajectories, "independent")
        for method in cfg.methods:
            chain, wall = _learn(env, prior, view, beta, method, cfg,
                                 chain_seed, teacher_idx)
            theta_hat = posterior_mean(chain)
            records.append(EvalRecord(
                environment=env.name, method=method, dependence=mode, beta=beta,
                teacher_seed=teacher_idx, theta_true=theta_true, theta_hat=theta_hat,
                error=theta_error(theta_true, theta_hat),
                regret=regret(theta_true, theta_hat, env),
                wall_seconds=wall,
                seconds_per_iteration=chain.seconds_per_iteration))
    return records


def _suite_episode(args):
    cfg, beta, teacher_idx = args
    return _episode(cfg, beta, teacher_idx, "independent", ("independent",), 201)


def _dependence_episode(args):
    cfg, beta, teacher_idx = args
    return _episode(cfg, beta, teacher_idx, "dependent",
                    ("independent", "dependent"), 301)


def _run_episodes(cfg, episode_fn, workers):
    tasks = [(cfg, beta, t) for beta in cfg.betas for t in range(cfg.teachers)]
    if workers <= 1:
        nested = [episode_fn(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(episode_fn, tasks))
    records = [rec for batch in nested for rec in batch]
    method_order = {m: i for i, m in enumerate(cfg.methods)}
    mode_order = {"independent": 0, "dependent": 1}
    records.sort(key=lambda r: (r.beta, r.teacher_seed,
                                mode_order[r.dependence], method_order[r.method]))
    return records


def _aggregate(records):
    groups = {}
    for rec in records:
        key = (rec.environment, rec.method, rec.dependence, rec.beta)
        groups.setdefault(key, []).append(rec)
    rows, table = [], {}
    for key in sorted(groups, key=lambda k: (k[3], k[2], k[1])):
        recs = groups[key]
        errors = np.array([r.error for r in recs])
        regrets = np.array([r.regret for r in recs])
        table[key] = (float(errors.mean()), float(regrets.mean()))
        rows.append([key[0], key[1], key[2], fmt_float(key[3]), str(len(recs)),
                     fmt_float(errors.mean()), fmt_float(_stderr(errors)),
                     fmt_float(regrets.mean()), fmt_float(_stderr(regrets))])
    return rows, table


def _write_study(records, out):
    write_csv(os.path.join(out, "records.csv"), EvalRecord.RESULT_HEADER,
              [r.result_row() for r in records])
    rows, table = _aggregate(records)
    write_csv(os.path.join(out, "aggregate.csv"), AGGREGATE_HEADER, rows)
    write_csv(os.path.join(out, "timing.csv"), EvalRecord.TIMING_HEADER,
              [r.timing_row() for r in records])
    return table


def run_simulation_suite(cfg: ExperimentConfig, out_dir=None, workers=None):
    """Teacher-simulation comparison of the learners on independent demos."""
    cfg.validate()
    out = out_dir or cfg.out_dir
    records = _run_episodes(cfg, _suite_episode, workers or cfg.workers)
    table = _write_study(records, out)
    return {"records": records, "aggregate": table}


def run_dependence_study(cfg: ExperimentConfig, out_dir=None, workers=None):
    """Sequential-correction teachers scored under both learner dependence modes."""
    cfg.validate()
    out = out_dir or cfg.out_dir
    records = _run_episodes(cfg, _dependence_episode, workers or cfg.workers)
    table = _write_study(records, out)
    return {"records": records, "aggregate": table}


# ---------------------------------------------------------------------------
# Dispatch and assertion checks.

def run_experiment(experiment, cfg: ExperimentConfig, out_dir=None, workers=None):
    if cfg.experiment is not None and cfg.experiment != experiment:
        raise ConfigError(
            f"config is for experiment {cfg.experiment!r}, not {experiment!r}")
    if experiment == "working-example":
        return run_working_example(cfg, out_dir)
    if experiment == "crossover":
        return run_crossover(cfg, out_dir)
    if experiment == "simulation-suite":
        return run_simulation_suite(cfg, out_dir, workers)
    if experiment == "dependence-study":
        return run_dependence_study(cfg, out_dir, workers)
    raise ConfigError(f"unknown experiment {experiment!r}; expected one of: "
                      + ", ".join(EXPERIMENTS))


def check_assertions(experiment, cfg: ExperimentConfig, summary):
    """Tagged comparisons for --assert; returns (name, passed, detail) triples."""
    checks = []

    def add(name, ok, detail):
        checks.append((name, bool(ok), detail))

    if experiment == "working-example":
        ig = summary["ignore"].get(1.0)
        if ig is not None and cfg.demo_grid[0] == 0.0:
            add("ignore belief error at beta=1, demo=0 is 0.919 +/- 0.005",
                abs(ig[0] - 0.9187538804) <= 0.005, f"got {ig[0]:.6f}")
        betas = [b for b in (1.0, 2.0, 5.0, 10.0, 20.0) if b in summary["maximum"]]
        means = [summary["maximum"][b].mean() for b in betas]
        add("maximum belief error nonincreasing in beta",
            all(means[i + 1] <= means[i] + 1e-6 for i in range(len(means) - 1)),
            " -> ".join(f"{m:.4g}" for m in means))
        if 20.0 in summary["maximum"]:
            m20 = summary["maximum"][20.0].mean()
            add("maximum belief error < 0.01 at beta=20", m20 < 0.01, f"got {m20:.2e}")
        ns = sorted(summary["sampling"])
        if len(ns) >= 2:
            lo, hi = summary["sampling"][ns[0]].mean(), summary["sampling"][ns[-1]].mean()
            add(f"sampling error shrinks from N={ns[0]} to N={ns[-1]}",
                hi < lo, f"{lo:.4f} -> {hi:.4f}")
    if experiment in ("working-example", "crossover"):
        table = summary["crossover"]
        lo_beta, hi_beta = min(cfg.crossover_betas), max(cfg.crossover_betas)
        add(f"sampling beats maximum at beta={lo_beta}",
            table[("sample", lo_beta)] < table[("maximum", lo_beta)],
            f"sample {table[('sample', lo_beta)]:.4f} vs maximum {table[('maximum', lo_beta)]:.4f}")
        add(f"maximum beats sampling at beta={hi_beta}",
            table[("maximum", hi_beta)] < table[("sample", hi_beta)],
            f"maximum {table[('maximum', hi_beta)]:.4f} vs sample {table[('sample', hi_beta)]:.4f}")
    if experiment == "simulation-suite":
        table = summary["aggregate"]
        env_name = cfg.build_env().name
        for beta in cfg.betas:
            err = {m: table[(env_name, m, "independent", beta)][0]
                   for m in cfg.methods if (env_name, m, "independent", beta) in table}
            if {"double-mh", "sample", "maximum", "ignore"} <= set(err):
                add(f"double-mh lowest error among approximations at beta={beta}",
                    err["double-mh"] < err["sample"] and err["double-mh"] < err["maximum"],
                    f"{err}")
                add(f"ignore worst at beta={beta}",
                    err["ignore"] >= max(err.values()) - 1e-12, f"{err}")
    if experiment == "dependence-study":
        table = summary["aggregate"]
        env_name = cfg.build_env().name
        for beta in cfg.betas:
            err = {(m, mode): table[(env_name, m, mode, beta)]
                   for m in cfg.methods for mode in ("independent", "dependent")
                   if (env_name, m, mode, beta) in table}
            if ("double-mh", "dependent") in err:
                target = err[("double-mh", "dependent")]
                others = {k: v for k, v in err.items() if k != ("double-mh", "dependent")}
                add(f"dependent double-mh lowest mean error at beta={beta}",
                    all(target[0] < v[0] for v in others.values()),
                    f"target {target[0]:.4f} vs {min(v[0] for v in others.values()):.4f} best other")
                add(f"dependent double-mh lowest mean regret at beta={beta}",
                    all(target[1] < v[1] for v in others.values()),
                    f"target {target[1]:.4f} vs {min(v[1] for v in others.values()):.4f} best other")
    return checks


def print_assertions(checks, stream=None):
    stream = stream or sys.stdout
    failed = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        failed += 0 if ok else 1
        print(f"[{status}] {name} ({detail})", file=stream)
    return failed
