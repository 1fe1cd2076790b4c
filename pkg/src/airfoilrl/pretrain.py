"""Imitation-learning pretraining of the actor and critic-only fitting.

Good state-action samples come from greedy random search on the
evaluator; duplicates are resolved by reward, high-frequency action
noise is removed by inverse-distance-weighted smoothing, the actor is
regressed onto the result, and the critic is then fit with the actor
frozen.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .env import ACTION_BOUNDS, DesignEnv, EnvConfig, physical_to_scaled
from .geometry import AirfoilGeom, BumpAction, GeometryError, apply_action
from .nnet import AdamState, adam_update, mlp_backward, mlp_forward
from .rl import PolicyAgent, PpoConfig, ppo_train
from .surrogate import OUTPUT_NAMES, in_feature_bounds

SMOOTH_PASSES = 10
SMOOTH_NEIGHBORS = 10
SMOOTH_RELAXATION = 0.2
DEDUP_TOL = 1e-9

IMITATION_SCHEDULE = [(250, 1e-3), (250, 1e-4), (250, 1e-5), (250, 1e-6)]


@dataclass(frozen=True)
class StateActionSample:
    state: np.ndarray  # 4-vector
    action: BumpAction  # physical space
    reward: float


def greedy_search(baseline: AirfoilGeom, evaluator, searches: int,
                  steps: int, candidates: int, rng) -> list[StateActionSample]:
    """Random greedy searches: at each step draw candidate actions
    uniformly over the physical action box, keep the one with the
    smallest drag that stays inside the feature box, and advance."""
    samples: list[StateActionSample] = []
    for _ in range(searches):
        foil = baseline
        cd, feats = evaluator(foil.cst14)
        for _ in range(steps):
            draws = rng.uniform(ACTION_BOUNDS[:, 0], ACTION_BOUNDS[:, 1],
                                size=(candidates, 3))
            best = None
            for row in draws:
                action = BumpAction(t1=float(row[0]), s_b=float(row[1]),
                                    h_b=float(row[2]))
                try:
                    cand = apply_action(foil, action)
                except GeometryError:
                    continue
                cd_new, feats_new = evaluator(cand.cst14)
                outputs = dict(zip(OUTPUT_NAMES, (cd_new, feats_new.x1,
                                                  feats_new.mw1, feats_new.mwl,
                                                  feats_new.mwa)))
                if feats_new.no_shock or not in_feature_bounds(outputs):
                    continue
                if best is None or cd_new < best[0]:
                    best = (cd_new, feats_new, action, cand)
            if best is None:
                break  # no candidate satisfies the constraints
            cd_new, feats_new, action, cand = best
            samples.append(StateActionSample(state=feats.state, action=action,
                                             reward=10000.0 * (cd - cd_new)))
            foil, cd, feats = cand, cd_new, feats_new
    return samples


def dedup_states(samples: list[StateActionSample]) -> list[StateActionSample]:
    """Among samples with equal states (within tolerance), keep only the
    highest-reward one; order of first appearance is preserved."""
    kept: list[StateActionSample] = []
    kept_states: list[np.ndarray] = []
    for s in samples:
        if kept_states:
            d = np.linalg.norm(np.stack(kept_states) - s.state, axis=1)
            hits = np.nonzero(d <= DEDUP_TOL)[0]
        else:
            hits = np.array([], dtype=int)
        if hits.size == 0:
            kept.append(s)
            kept_states.append(np.asarray(s.state, dtype=float))
        else:
            k = int(hits[0])
            if s.reward > kept[k].reward:
                kept[k] = s
    return kept


def smooth_samples(samples: list[StateActionSample],
                   passes: int = SMOOTH_PASSES) -> list[StateActionSample]:
    """Inverse-distance-weighted action smoothing over state space.

    Distances are frozen from the original states; each pass relaxes
    every action 20% of the way toward the IDW mean of its 10 nearest
    neighbors.  A zero-distance neighbor takes the largest finite
    weight seen in the pass.
    """
    n = len(samples)
    if n < SMOOTH_NEIGHBORS + 1:
        raise ValueError(f"need at least {SMOOTH_NEIGHBORS + 1} samples")
    states = np.stack([s.state for s in samples])
    actions = np.stack([[s.action.t1, s.action.s_b, s.action.h_b]
                        for s in samples])
    diff = states[:, None, :] - states[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=2))
    np.fill_diagonal(dist, np.inf)
    neighbor_idx = np.argsort(dist, axis=1)[:, :SMOOTH_NEIGHBORS]
    ndist = np.take_along_axis(dist, neighbor_idx, axis=1)
    with np.errstate(divide="ignore"):
        weights = 1.0 / ndist
    finite = np.isfinite(weights)
    if not np.all(finite):
        max_finite = weights[finite].max() if np.any(finite) else 1.0
        weights = np.where(finite, weights, max_finite)
    for _ in range(passes):
        neigh_actions = actions[neighbor_idx]  # (n, k, 3)
        avg = (weights[:, :, None] * neigh_actions).sum(axis=1) \
            / weights.sum(axis=1)[:, None]
        actions = actions + (avg - actions) * SMOOTH_RELAXATION
    return [StateActionSample(state=s.state,
                              action=BumpAction(*map(float, actions[i])),
                              reward=s.reward)
            for i, s in enumerate(samples)]


def imitate_policy(agent: PolicyAgent, samples: list[StateActionSample],
                   schedule=None) -> list[float]:
    """Regress the actor mean onto the sample actions (scaled space).

    Full-batch Adam; the std layer is untouched.  Returns the per-epoch
    mean-squared loss history.
    """
    if not samples:
        raise ValueError("no samples to imitate")
    schedule = schedule if schedule is not None else IMITATION_SCHEDULE
    states = np.stack([s.state for s in samples])
    targets = np.stack([physical_to_scaled(s.action) for s in samples])
    xs = agent.actor.input_scaler.scale(states)
    state = AdamState.for_params(agent.actor.parameters())
    history: list[float] = []
    for epochs, lr in schedule:
        for _ in range(epochs):
            pred, cache = mlp_forward(agent.actor, xs, scaled=False,
                                      with_cache=True)
            diff = pred - targets
            loss = float(np.mean(diff**2))
            history.append(loss)
            grads = mlp_backward(agent.actor, cache, 2.0 * diff / diff.size)
            agent.actor.set_parameters(
                adam_update(agent.actor.parameters(), grads, state, lr))
    return history


def pretrain_critic(agent: PolicyAgent, baselines, config: PpoConfig,
                    env_factory, critic_schedule, seed: int = 0) -> list[dict]:
    """Fit the critic to the pretrained actor's rollouts; the actor
    update step is skipped entirely."""
    return ppo_train(agent, baselines, config, env_factory, seed=seed,
                     update_actor=False, critic_schedule=critic_schedule)


# ---------------------------------------------------------------------------
# sample CSV: x1,mw1,mwl,mwa,t1,sb,hb,reward (+ stage provenance)

SAMPLE_COLUMNS = ["x1", "mw1", "mwl", "mwa", "t1", "sb", "hb", "reward", "stage"]


def write_samples(path, samples: list[StateActionSample],
                  stage: str = "raw") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SAMPLE_COLUMNS)
        for s in samples:
            writer.writerow([repr(float(v)) for v in s.state]
                            + [repr(float(s.action.t1)), repr(float(s.action.s_b)),
                               repr(float(s.action.h_b)), repr(float(s.reward)),
                               stage])


def read_samples(path) -> tuple[list[StateActionSample], list[str]]:
    samples: list[StateActionSample] = []
    stages: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            state = np.array([float(row[k]) for k in SAMPLE_COLUMNS[:4]])
            action = BumpAction(t1=float(row["t1"]), s_b=float(row["sb"]),
                                h_b=float(row["hb"]))
            samples.append(StateActionSample(state=state, action=action,
                                             reward=float(row["reward"])))
            stages.append(row.get("stage", "raw"))
    return samples, stages
