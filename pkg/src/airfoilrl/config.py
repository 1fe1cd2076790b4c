"""Experiment configuration: desk and paper profiles, INI overrides.

The config file is standard INI (configparser) with sections [run],
[proxy], [surrogate], [pretrain], and [ppo].  Learning-rate schedules
are written as comma-separated ``count:rate`` pairs, e.g.
``200:0.01,200:0.001``; integer tuples as comma-separated values.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

from .proxy import ProxyConfig
from .rl import PpoConfig


def parse_schedule(text: str) -> list[tuple[int, float]]:
    out = []
    for part in text.split(","):
        count, rate = part.strip().split(":")
        out.append((int(count), float(rate)))
    return out


def format_schedule(schedule) -> str:
    return ",".join(f"{int(c)}:{float(r)!r}" for c, r in schedule)


@dataclass
class ExperimentConfig:
    profile: str = "desk"
    seed: int = 0
    workers: int = 1
    t_max: float = 0.095

    proxy: ProxyConfig = field(default_factory=ProxyConfig)

    # surrogate stage
    surrogate_hidden: tuple = (128, 128, 128)
    surrogate_schedule: list = field(
        default_factory=lambda: [(40, 0.01), (40, 0.001), (80, 1e-4), (80, 1e-5)])
    surrogate_batch: int = 128
    pool_size: int = 3000
    keep_counts: tuple = (2000, 200)

    # pretraining stage
    pretrain_baselines: int = 10
    greedy_searches: int = 2
    greedy_steps: int = 5
    greedy_candidates: int = 30
    imitation_schedule: list = field(
        default_factory=lambda: [(250, 1e-3), (250, 1e-4), (250, 1e-5), (250, 1e-6)])
    critic_schedule: list = field(default_factory=lambda: [(15, 0.01), (15, 0.001)])

    # PPO stage
    ppo_hidden: tuple = (64, 64)
    ppo_baselines: int = 10
    ppo: PpoConfig = field(default_factory=lambda: PpoConfig(
        epochs=200, trajectories_per_baseline=4, max_steps=5,
        actor_schedule=[(50, 1e-3)]))


def paper_config() -> ExperimentConfig:
    """Published-scale settings (hours of runtime; not used by tests)."""
    cfg = ExperimentConfig(profile="paper")
    cfg.surrogate_hidden = (1024, 1024, 1024)
    cfg.surrogate_schedule = [(200, 0.01), (200, 0.001), (400, 1e-4), (400, 1e-5)]
    cfg.surrogate_batch = 128
    cfg.pool_size = 10000
    cfg.keep_counts = (5000, 200)
    cfg.pretrain_baselines = 200
    cfg.greedy_searches = 4
    cfg.greedy_steps = 5
    cfg.greedy_candidates = 200
    cfg.critic_schedule = [(10000, 0.01), (10000, 0.001)]
    cfg.ppo_hidden = (512, 512)
    cfg.ppo_baselines = 50
    cfg.ppo = PpoConfig(epochs=2000, trajectories_per_baseline=20, max_steps=5,
                        actor_schedule=[(200, 1e-6), (100, 1e-7), (100, 1e-8)])
    return cfg


def desk_config() -> ExperimentConfig:
    return ExperimentConfig(profile="desk")


def from_profile(name: str) -> ExperimentConfig:
    if name == "paper":
        return paper_config()
    if name == "desk":
        return desk_config()
    raise ValueError(f"unknown profile {name!r}")


_TUPLE_FIELDS = {"surrogate_hidden", "keep_counts", "ppo_hidden"}
_SCHEDULE_FIELDS = {"surrogate_schedule", "imitation_schedule", "critic_schedule"}


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply INI overrides on top of a profile's defaults."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    profile = parser.get("run", "profile", fallback=None)
    cfg = base if base is not None else from_profile(profile or "desk")
    if parser.has_section("run"):
        run = parser["run"]
        cfg.profile = run.get("profile", cfg.profile)
        cfg.seed = run.getint("seed", cfg.seed)
        cfg.workers = run.getint("workers", cfg.workers)
        cfg.t_max = run.getfloat("t_max", cfg.t_max)
    if parser.has_section("proxy"):
        kwargs = {k: (int(v) if k in ("smooth_halfwidth", "blend_cells") else float(v))
                  for k, v in parser["proxy"].items()}
        cfg.proxy = replace(cfg.proxy, **kwargs)
    if parser.has_section("surrogate"):
        s = parser["surrogate"]
        if "hidden" in s:
            cfg.surrogate_hidden = tuple(int(v) for v in s["hidden"].split(","))
        if "schedule" in s:
            cfg.surrogate_schedule = parse_schedule(s["schedule"])
        cfg.surrogate_batch = s.getint("batch_size", cfg.surrogate_batch)
        cfg.pool_size = s.getint("pool_size", cfg.pool_size)
        if "keep_counts" in s:
            cfg.keep_counts = tuple(int(v) for v in s["keep_counts"].split(","))
    if parser.has_section("pretrain"):
        p = parser["pretrain"]
        cfg.pretrain_baselines = p.getint("baselines", cfg.pretrain_baselines)
        cfg.greedy_searches = p.getint("searches", cfg.greedy_searches)
        cfg.greedy_steps = p.getint("steps", cfg.greedy_steps)
        cfg.greedy_candidates = p.getint("candidates", cfg.greedy_candidates)
        if "imitation_schedule" in p:
            cfg.imitation_schedule = parse_schedule(p["imitation_schedule"])
        if "critic_schedule" in p:
            cfg.critic_schedule = parse_schedule(p["critic_schedule"])
    if parser.has_section("ppo"):
        q = parser["ppo"]
        if "hidden" in q:
            cfg.ppo_hidden = tuple(int(v) for v in q["hidden"].split(","))
        cfg.ppo_baselines = q.getint("baselines", cfg.ppo_baselines)
        ppo = cfg.ppo
        ppo.clip_eps = q.getfloat("clip_eps", ppo.clip_eps)
        ppo.gamma = q.getfloat("gamma", ppo.gamma)
        ppo.gae_lambda = q.getfloat("gae_lambda", ppo.gae_lambda)
        ppo.entropy_coef = q.getfloat("entropy_coef", ppo.entropy_coef)
        ppo.epochs = q.getint("epochs", ppo.epochs)
        ppo.trajectories_per_baseline = q.getint(
            "trajectories_per_baseline", ppo.trajectories_per_baseline)
        ppo.max_steps = q.getint("max_steps", ppo.max_steps)
        ppo.std_init = q.getfloat("std_init", ppo.std_init)
        ppo.normalize_advantages = q.getboolean(
            "normalize_advantages", ppo.normalize_advantages)
        if "actor_schedule" in q:
            ppo.actor_schedule = parse_schedule(q["actor_schedule"])
    return cfg


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable hash of the full configuration."""
    blob = json.dumps(asdict(cfg), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_manifest(path, cfg: ExperimentConfig, command: str,
                   artifacts: list[str]) -> None:
    payload = {"command": command, "config_hash": config_hash(cfg),
               "seed": cfg.seed, "profile": cfg.profile,
               "artifacts": sorted(artifacts)}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
