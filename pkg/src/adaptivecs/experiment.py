"""Experiment harness: training runs, score sweeps, timing benchmarks.

A run is described by an ``ExperimentConfig`` (JSON-file friendly, unknown
keys rejected). ``run_experiment`` trains one or both agents over replica
seeds, writing plot-ready CSV time series plus a JSON summary; every
output file embeds the resolved config. ``sweep_scores`` maps the score
curve over fixed ratios and ``bench_timing`` reports median wall-clock
costs of the core operations.
"""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .agents import AcOselmAgent, OsQNetAgent
from .codec import CsCodec, ScoreParams, compression_score, ratio_to_m, rmse
from .data import Dataset, downscale, load_csv, load_idx, synth_sparse
from .env import CompressionEnv, StepResult
from .exceptions import ConfigError, RecoveryError
from .numerics import seeded_rng

OUT_DIR_ENV = "ADAPTIVECS_OUT_DIR"
DATA_DIR_ENV = "ADAPTIVECS_DATA_DIR"

AGENT_KINDS = ("osqnet", "acoselm", "both")
SOLVERS = ("lp", "ista")
BASES = ("identity", "dct")

METRICS_COLUMNS = (
    "seed", "agent", "step", "evaluation", "mean_score", "mean_error", "mean_ratio",
)
STEP_COLUMNS = (
    "seed", "agent", "step", "mean_score", "ratio_min", "ratio_mean", "ratio_max",
    "failures", "select_s", "update_s", "compress_s", "recover_s",
)
SWEEP_COLUMNS = ("sample", "ratio", "m", "error", "score")
BENCH_COLUMNS = ("metric", "value", "reps", "note")

# stream tags keeping the sampler and each agent on independent substreams
_SAMPLER_STREAM = 11
_QNET_STREAM = 23
_AC_STREAM = 37


@dataclass
class ExperimentConfig:
    """Knobs of one experiment; defaults are the desk-scale profile.

    The out-of-box configuration trains on a small synthetic sparse
    dataset with the iterative-shrinkage solver so a full run finishes in
    minutes. ``full_scale_profile`` switches to the long-running setup
    (784-dim images, exact LP recovery, 1000 steps).
    """

    dataset: str = "synth:n=64,k=4,count=100"
    agent: str = "acoselm"
    actor_hidden: int = 400
    critic_hidden: int = 400
    qnet_hidden: int = 400
    steps: int = 200
    acquisitions_per_step: int = 10
    eval_interval: int = 10
    score_params: list = field(default_factory=lambda: [1.0, 1.0, 3.0, 1.0, 1.5, 1.0])
    solver: str = "ista"
    basis: str = "identity"
    master_seed: int = 0
    data_seed: int = 123
    ista_budget: int = 1000
    ista_shrinkage: float = 1e-4
    eps_start: float = 1.0
    eps_floor: float = 0.01
    eps_decay: float = 2000.0
    noise_start: float = 0.3
    noise_floor: float = 0.01
    noise_decay: float = 2000.0
    gamma: float = 0.0
    eta: float = 0.05
    lam: float = 1.0
    delta: float = 1e-3
    actions: list = None
    seeds: list = field(default_factory=lambda: [0])
    workers: int = 0
    out_dir: str = None

    @classmethod
    def desk_profile(cls):
        """The default quick profile (synthetic 64-dim data, 200 steps)."""
        return cls()

    @classmethod
    def full_scale_profile(cls):
        """784-dim images with exact LP recovery, 1000 steps. Long-running:
        budget hours, not minutes."""
        return replace(cls(), dataset="mnist", solver="lp", steps=1000)

    @classmethod
    def from_dict(cls, payload):
        """Build from a plain dict, rejecting unknown keys."""
        if not isinstance(payload, dict):
            raise ConfigError(f"config must be a JSON object, got {type(payload).__name__}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        cfg = cls(**payload)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config not found: {path}")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        try:
            return cls.from_dict(payload)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self):
        out = asdict(self)
        out["seeds"] = [int(s) for s in self.seeds]
        out["score_params"] = [float(v) for v in self.score_params]
        if self.actions is not None:
            out["actions"] = [float(a) for a in self.actions]
        return out

    def validate(self):
        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"agent must be one of {AGENT_KINDS}, got {self.agent!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.basis not in BASES:
            raise ConfigError(f"basis must be one of {BASES}, got {self.basis!r}")
        for name in ("actor_hidden", "critic_hidden", "qnet_hidden",
                     "acquisitions_per_step", "eval_interval", "ista_budget"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if int(self.steps) < 0:
            raise ConfigError("steps must be >= 0")
        if int(self.workers) < 0:
            raise ConfigError("workers must be >= 0")
        if len(self.score_params) != 6:
            raise ConfigError(f"score_params needs 6 entries, got {len(self.score_params)}")
        if not self.seeds:
            raise ConfigError("seeds must be a non-empty list")
        if len(set(int(s) for s in self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not 0.0 <= float(self.gamma) <= 1.0:
            raise ConfigError("gamma must lie in [0, 1]")
        if float(self.eta) < 0.0:
            raise ConfigError("eta must be >= 0")
        if float(self.lam) <= 0.0:
            raise ConfigError("lam must be > 0")
        if float(self.delta) <= 0.0:
            raise ConfigError("delta must be > 0")
        if float(self.ista_shrinkage) <= 0.0:
            raise ConfigError("ista_shrinkage must be > 0")
        for name in ("eps_start", "noise_start"):
            if float(getattr(self, name)) < 0.0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("eps_decay", "noise_decay"):
            if float(getattr(self, name)) <= 0.0:
                raise ConfigError(f"{name} must be > 0")
        if self.actions is not None:
            acts = np.asarray(self.actions, dtype=np.float64)
            if acts.size == 0 or acts.min() <= 0.0 or acts.max() > 1.0:
                raise ConfigError("actions must be a non-empty list inside (0, 1]")
        return self


def _parse_options(text):
    opts = {}
    if not text:
        return opts
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"bad dataset option {part!r}, expected key=value")
        key, value = part.split("=", 1)
        opts[key.strip()] = value.strip()
    return opts


def _find_idx_file(name, data_dir):
    stem = "train-images-idx3-ubyte"
    candidates = [
        data_dir / name / stem,
        data_dir / name / f"{stem}.gz",
        data_dir / f"{name}-{stem}",
        data_dir / f"{name}-{stem}.gz",
    ]
    for cand in candidates:
        if cand.exists():
            return cand
    raise ConfigError(
        f"dataset {name!r} not found under {data_dir} "
        f"(set {DATA_DIR_ENV} or pass an explicit file path)"
    )


def resolve_dataset(spec, data_seed=123):
    """Turn a dataset spec string into a Dataset.

    Forms: ``synth`` / ``synth:n=64,k=4,count=100`` (seeded by
    ``data_seed`` unless a ``seed`` option is given); ``mnist`` or any
    other named IDX set looked up under the data directory, with optional
    ``limit`` and ``downscale`` options; a path to a ``.csv`` or IDX file.
    """
    if isinstance(spec, Dataset):
        return spec
    name, _, tail = str(spec).partition(":")
    opts = _parse_options(tail)
    if name == "synth":
        n = int(opts.pop("n", 64))
        k = int(opts.pop("k", 4))
        count = int(opts.pop("count", 100))
        seed = int(opts.pop("seed", data_seed))
        if opts:
            raise ConfigError(f"unknown synth option(s): {', '.join(sorted(opts))}")
        return synth_sparse(n, k, count, random_state=seed)
    limit = int(opts.pop("limit", 0)) or None
    factor = int(opts.pop("downscale", 1))
    if opts:
        raise ConfigError(f"unknown dataset option(s): {', '.join(sorted(opts))}")
    path = Path(name)
    if path.suffix == ".csv":
        if not path.exists():
            raise ConfigError(f"dataset file not found: {path}")
        dataset = load_csv(path)
        if limit:
            dataset = Dataset(dataset.X[:limit], name=dataset.name, meta=dataset.meta)
        return dataset
    if not path.exists():
        data_dir = Path(os.environ.get(DATA_DIR_ENV, "data"))
        path = _find_idx_file(name, data_dir)
    dataset = load_idx(path, limit=limit)
    if factor > 1:
        dataset = downscale(dataset, factor)
    return dataset


def _build_codec(cfg, n):
    return CsCodec(
        n=n,
        basis=cfg.basis,
        solver=cfg.solver,
        master_seed=int(cfg.master_seed),
        ista_budget=int(cfg.ista_budget),
        ista_shrinkage=float(cfg.ista_shrinkage),
    )


def _build_agents(cfg, seed, kinds=None):
    if kinds is None:
        kinds = ("osqnet", "acoselm") if cfg.agent == "both" else (cfg.agent,)
    agents = {}
    for kind in kinds:
        if kind == "osqnet":
            agents[kind] = OsQNetAgent(
                actions=cfg.actions,
                hidden_dim=int(cfg.qnet_hidden),
                ridge=float(cfg.delta),
                forgetting=float(cfg.lam),
                gamma=float(cfg.gamma),
                update_period=int(cfg.acquisitions_per_step),
                explore_start=float(cfg.eps_start),
                explore_floor=float(cfg.eps_floor),
                explore_decay=float(cfg.eps_decay),
                random_state=seeded_rng(seed, _QNET_STREAM),
            )
        else:
            agents[kind] = AcOselmAgent(
                hidden_dim=int(cfg.critic_hidden),
                actor_hidden_dim=int(cfg.actor_hidden),
                actor_lr=float(cfg.eta),
                ridge=float(cfg.delta),
                forgetting=float(cfg.lam),
                gamma=float(cfg.gamma),
                update_period=int(cfg.acquisitions_per_step),
                explore_start=float(cfg.noise_start),
                explore_floor=float(cfg.noise_floor),
                explore_decay=float(cfg.noise_decay),
                random_state=seeded_rng(seed, _AC_STREAM),
            )
    return agents


def _write_csv(path, config_dict, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write("# config=" + json.dumps(config_dict, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
    return str(path)


def _run_replica(cfg_dict, seed):
    """Train the configured agent(s) for one replica seed.

    Runs in a worker process when replicas are parallelized, so it only
    takes plain picklable arguments and returns plain rows and payloads.
    """
    cfg = ExperimentConfig.from_dict(cfg_dict)
    seed = int(seed)
    dataset = resolve_dataset(cfg.dataset, cfg.data_seed)
    codec = _build_codec(cfg, dataset.n_features)
    score = ScoreParams.from_list(cfg.score_params)
    env = CompressionEnv(
        dataset, codec, score, random_state=seeded_rng(seed, _SAMPLER_STREAM)
    )
    agents = _build_agents(cfg, seed)
    acq = int(cfg.acquisitions_per_step)
    steps = int(cfg.steps)
    indices = (
        env.draw_indices(steps * acq).reshape(steps, acq)
        if steps > 0
        else np.empty((0, acq), dtype=int)
    )

    metrics_rows, step_rows = [], []
    evals = {kind: [] for kind in agents}
    failures = {kind: 0 for kind in agents}
    last_eval_step = -1

    def run_eval(step):
        nonlocal last_eval_step
        last_eval_step = step
        for kind, agent in agents.items():
            ratios = agent.predict(dataset.X)
            results = env.policy_results(dataset.X, ratios)
            mean_score = float(np.mean([r.reward for r in results]))
            mean_error = float(np.mean([r.error for r in results]))
            mean_ratio = float(np.mean(ratios))
            evals[kind].append((step, mean_score))
            metrics_rows.append([
                seed, kind, step, len(evals[kind]) - 1,
                mean_score, mean_error, mean_ratio,
            ])

    if steps > 0:
        run_eval(0)
    for step in range(1, steps + 1):
        idx_row = indices[step - 1]
        for kind, agent in agents.items():
            select_s = update_s = compress_s = recover_s = 0.0
            scores, ratios = [], []
            step_failures = 0
            for j, i in enumerate(idx_row):
                x = dataset.X[i]
                t0 = time.perf_counter()
                c = agent.select(x)
                select_s += time.perf_counter() - t0
                try:
                    result, t_comp, t_rec = env.timed_step(x, c)
                except RecoveryError:
                    step_failures += 1
                    err = rmse(x, np.zeros_like(x))
                    result = StepResult(
                        c, ratio_to_m(c, dataset.n_features), err,
                        compression_score(c, err, score),
                    )
                    t_comp = t_rec = 0.0
                compress_s += t_comp
                recover_s += t_rec
                if j + 1 < acq:
                    s_next = dataset.X[idx_row[j + 1]]
                elif step < steps:
                    s_next = dataset.X[indices[step][0]]
                else:
                    s_next = None
                t0 = time.perf_counter()
                agent.observe(x, c, result.reward, s_next)
                update_s += time.perf_counter() - t0
                scores.append(result.reward)
                ratios.append(c)
            failures[kind] += step_failures
            step_rows.append([
                seed, kind, step, float(np.mean(scores)),
                float(np.min(ratios)), float(np.mean(ratios)), float(np.max(ratios)),
                step_failures, select_s, update_s, compress_s, recover_s,
            ])
        if step % int(cfg.eval_interval) == 0 or step == steps:
            if last_eval_step != step:
                run_eval(step)

    summaries, checkpoints = {}, {}
    for kind, agent in agents.items():
        scores = [s for _, s in evals[kind]]
        last10 = scores[-10:] if scores else []
        summaries[kind] = {
            "evaluations": [[int(s), float(v)] for s, v in evals[kind]],
            "final_score": scores[-1] if scores else None,
            "best_score": max(scores) if scores else None,
            "mean_last10": float(np.mean(last10)) if last10 else None,
            "failures": failures[kind],
        }
        if agent.initialized_:
            checkpoints[kind] = agent.to_checkpoint()
    return {
        "seed": seed,
        "metrics_rows": metrics_rows,
        "step_rows": step_rows,
        "summaries": summaries,
        "checkpoints": checkpoints,
    }


def run_experiment(cfg, out_dir=None):
    """Run all replica seeds of ``cfg`` and write metrics, summary, checkpoints.

    Replicas are independent (per-seed substreams, no shared state) and run
    in parallel worker processes when more than one worker is allowed.
    Returns the summary dict, which also lands in ``summary.json``.
    """
    cfg.validate()
    out = Path(
        out_dir or cfg.out_dir or os.environ.get(OUT_DIR_ENV, "runs")
    )
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()
    seeds = [int(s) for s in cfg.seeds]
    cfg_dict = cfg.to_dict()
    workers = int(cfg.workers) or min(len(seeds), os.cpu_count() or 1)
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            replicas = list(pool.map(_run_replica, [cfg_dict] * len(seeds), seeds))
    else:
        replicas = [_run_replica(cfg_dict, s) for s in seeds]

    metrics_rows = [row for rep in replicas for row in rep["metrics_rows"]]
    step_rows = [row for rep in replicas for row in rep["step_rows"]]
    metrics_path = _write_csv(out / "metrics.csv", cfg_dict, METRICS_COLUMNS, metrics_rows)
    steps_path = _write_csv(out / "steps.csv", cfg_dict, STEP_COLUMNS, step_rows)

    checkpoint_paths = {}
    for rep in replicas:
        for kind, payload in rep["checkpoints"].items():
            path = out / f"agent_{kind}_seed{rep['seed']}.json"
            with open(path, "w") as fh:
                json.dump(payload, fh)
            checkpoint_paths[f"{kind}_seed{rep['seed']}"] = str(path)

    summary = {
        "config": cfg_dict,
        "seeds": seeds,
        "results": {str(rep["seed"]): rep["summaries"] for rep in replicas},
        "runtime_s": time.perf_counter() - t_start,
        "files": {
            "metrics": metrics_path,
            "steps": steps_path,
            "checkpoints": checkpoint_paths,
        },
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    summary["out_dir"] = str(out)
    return summary


def sweep_scores(dataset, ratios, cfg=None, out_path=None):
    """Score every sample at every fixed ratio; one row per (sample, ratio).

    Returns the rows ([sample, ratio, m, error, score]) and optionally
    writes them as CSV with the config embedded.
    """
    cfg = cfg if cfg is not None else ExperimentConfig()
    cfg.validate()
    dataset = resolve_dataset(dataset, cfg.data_seed)
    ratios = [float(c) for c in ratios]
    for c in ratios:
        if not 0.0 < c <= 1.0:
            raise ConfigError(f"sweep ratio {c} outside (0, 1]")
    codec = _build_codec(cfg, dataset.n_features)
    env = CompressionEnv(dataset, codec, ScoreParams.from_list(cfg.score_params))
    rows = []
    for i, x in enumerate(dataset.X):
        for c in ratios:
            r = env.step(x, c)
            rows.append([i, r.ratio, r.m, r.error, r.reward])
    if out_path is not None:
        _write_csv(out_path, cfg.to_dict(), SWEEP_COLUMNS, rows)
    return rows


def _median_time(fn, reps):
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def bench_timing(cfg=None, reps=100, out_path=None):
    """Median wall-clock of the core operations, single process.

    Measures compress, recover, each agent's greedy action selection and
    each agent's buffer update, plus selection on a doubled action grid to
    expose the linear-in-grid cost of enumeration. Returns a report dict;
    optionally writes it as a small CSV.
    """
    cfg = cfg if cfg is not None else ExperimentConfig()
    cfg.validate()
    reps = int(reps)
    if reps < 1:
        raise ConfigError("reps must be >= 1")
    dataset = resolve_dataset(cfg.dataset, cfg.data_seed)
    n = dataset.n_features
    x = dataset.X[0]
    codec = _build_codec(cfg, n)
    seed = int(cfg.seeds[0])
    agents = _build_agents(cfg, seed, kinds=("osqnet", "acoselm"))
    qnet, ac = agents["osqnet"], agents["acoselm"]
    qnet.init_params(n)
    ac.init_params(n)
    base_actions = qnet.actions_
    doubled = np.round(np.linspace(1.0 / (2 * base_actions.size), 1.0,
                                   2 * base_actions.size), 10)
    qnet2 = _build_agents(
        replace(cfg, actions=list(doubled)), seed, kinds=("osqnet",)
    )["osqnet"]
    qnet2.init_params(n)

    rng = seeded_rng(seed, _SAMPLER_STREAM)
    fill_states = dataset.X[rng.integers(dataset.n_samples,
                                         size=int(cfg.acquisitions_per_step))]
    fill_rewards = rng.uniform(0.0, 1.0, size=fill_states.shape[0])

    def fill_buffer(agent):
        for s, r in zip(fill_states, fill_rewards):
            agent.buffer_.add(s, 0.5, float(r))

    def timed_update(agent):
        samples = []
        for _ in range(reps):
            fill_buffer(agent)
            t0 = time.perf_counter()
            agent._update()
            samples.append(time.perf_counter() - t0)
            agent.buffer_.clear()
        return float(np.median(samples))

    # warm up: first update runs the one-off initialization solve
    for agent in (qnet, ac, qnet2):
        fill_buffer(agent)
        agent._update()
        agent.buffer_.clear()

    compressed = codec.compress(x, 0.5)
    medians = {
        "compress": _median_time(lambda: codec.compress(x, 0.5), reps),
        "recover": _median_time(lambda: codec.recover(compressed), reps),
        "osqnet_select": _median_time(lambda: qnet.select(x, explore=False), reps),
        "acoselm_select": _median_time(lambda: ac.actor_forward(x), reps),
        "osqnet_select_2x_actions": _median_time(
            lambda: qnet2.select(x, explore=False), reps),
        "osqnet_update": timed_update(qnet),
        "acoselm_update": timed_update(ac),
    }
    report = {
        "medians_s": medians,
        "inference_ratio": medians["osqnet_select"] / medians["acoselm_select"],
        "actions_doubling_ratio": (
            medians["osqnet_select_2x_actions"] / medians["osqnet_select"]
        ),
        "update_ratio": medians["acoselm_update"] / medians["osqnet_update"],
        "complexity": {
            "osqnet_select": "O(|A|(D^2+k^2))",
            "acoselm_select": "O(D^2+k^2)",
        },
        "reps": reps,
        "state_dim": int(n),
        "n_actions": int(base_actions.size),
    }
    if out_path is not None:
        rows = [
            [op, medians[op], reps, report["complexity"].get(op, "")]
            for op in sorted(medians)
        ]
        rows.append(["inference_ratio", report["inference_ratio"], "", ""])
        rows.append(["actions_doubling_ratio", report["actions_doubling_ratio"], "", ""])
        rows.append(["update_ratio", report["update_ratio"], "", ""])
        _write_csv(out_path, cfg.to_dict(), BENCH_COLUMNS, rows)
    return report
