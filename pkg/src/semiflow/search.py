"""Outer search loops.

A search run is: pretrain an initial network, then repeat rounds. Each round
builds a local graph (incumbent plus one-edit children), drops N particles on
the incumbent and a ghost on every child, and runs the coupled train/mutate
dynamics until some child holds twice the incumbent's particles (doubling),
the round's iteration cap expires, or the global schedule budget runs dry.
The winning node's architecture and live parameters become the next
incumbent. A final training phase polishes the last incumbent until the
validation loss plateaus.

The step-size schedule is global: its clock keeps running across round
boundaries and into final training, with warm restarts every epochs_neigh
epochs.

A simplified hill-climbing baseline (train every child for epochs_neigh
epochs, keep the best) is included for exploration-throughput comparisons.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

import numpy as np

from .dynamics import (
    EXPECTED,
    FIRST_ORDER,
    SAMPLED,
    SECOND_ORDER,
    DynamicsParams,
    NodeState,
    ParticleEnsemble,
    apply_mutation_with_flows,
    cosine_lr,
    energy,
    mutation_rates_first,
    mutation_rates_second,
    restart_check,
    seed_ensemble,
    train_step,
    update_potential,
)
from .errors import Divergence, NonFiniteValue, RoundTimeout, SplitTooSmall
from .graph import ArchGraph
from .morphisms import Candidate, Constraints, build_local_graph, default_mix
from .nn import (
    NetSpec,
    evaluate,
    init_params,
    loss_and_grad,
    loss_only,
    param_count,
    save_checkpoint,
)
from .objective import ObjectiveHandle, ValTracker, clip_gradient, eval_val
from .data import BatchStream, Dataset
from .recording import MetricsWriter

MODES = ("nasgd", "nasagd", "hillclimb")
DEFAULT_N_STEPS = {"nasgd": 0.89, "nasagd": 2.54, "hillclimb": 5.0}


@dataclass
class SearchConfig:
    """Every knob of a search run; defaults follow the reference recipe
    (8 neighbors, 18-epoch schedule period, 0.05 to 1e-7 cosine)."""

    mode: str = "nasgd"
    seed: int = 0
    n_particles: int = 100
    n_neigh: int = 8
    epochs_neigh: int = 18
    n_steps: float | None = None          # schedule budget in cycles
    lam_start: float = 0.05
    lam_final: float = 1e-7
    # Mobility 3.0 with quadratic mass entropy keeps the swarm moving during
    # the hot half of each cosine cycle without degenerating into a random
    # walk once the step size anneals; 3.5+/linear both lose held-out
    # accuracy on the spirals benchmark.
    kappa: float = 3.0
    beta: float = 2.0
    gamma: float = 0.0
    s_x: int = 64
    s_y: int = 32
    constraints: Constraints = field(default_factory=Constraints)
    size_threshold: int = 20000           # parameter-count stop for growth
    hidden: tuple[int, ...] = (16, 16)
    mix: dict[str, float] = field(default_factory=default_mix)
    topology: str = "star"
    rate_mode: str = SAMPLED
    flow: str = "toward_high_phi"
    damping: float = 1.0
    pure_gradient: bool = False
    speed_penalty: bool = False
    friction_potential: bool = False
    restart_literal: bool = False
    entropy: str = "power"
    val_decay: float = 0.9
    grad_clip: float = 1.0
    round_timeout_factor: float = 5.0
    pretrain_epochs: int = 20
    pretrain_lam_start: float = 0.5
    pretrain_lam_final: float = 1e-7
    final_budget: int = 300
    plateau_cycles: int = 3
    plateau_tol: float = 1e-4
    standardize: bool = False
    strict: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n_steps is None:
            self.n_steps = DEFAULT_N_STEPS[self.mode]
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if self.n_particles < 1:
            raise ValueError(f"need at least one particle, got {self.n_particles}")
        if not self.n_steps > 0:
            raise ValueError(f"n_steps must be positive, got {self.n_steps}")
        if not (self.lam_start > self.lam_final >= 0):
            raise ValueError(
                f"need lam_start > lam_final >= 0, got "
                f"{self.lam_start}/{self.lam_final}"
            )
        if self.epochs_neigh < 1:
            raise ValueError(f"epochs_neigh must be >= 1, got {self.epochs_neigh}")
        self.hidden = tuple(int(w) for w in self.hidden)

    def dynamics(self) -> DynamicsParams:
        return DynamicsParams(
            kappa=self.kappa,
            beta=self.beta,
            gamma=self.gamma,
            mode=SECOND_ORDER if self.mode == "nasagd" else FIRST_ORDER,
            rate_mode=self.rate_mode,
            damping=self.damping,
            pure_gradient=self.pure_gradient,
            speed_penalty=self.speed_penalty,
            friction_potential=self.friction_potential,
            flow=self.flow,
            restart_literal=self.restart_literal,
            entropy=self.entropy,
        )


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _stream_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=key).generate_state(1)[0])


@dataclass
class GlobalClock:
    """Warm-restart cosine schedule on a clock that is never reset."""

    iters_per_epoch: int
    period_epochs: float
    lam_start: float
    lam_final: float
    k: int = 0

    def epochs_elapsed(self) -> float:
        return self.k / self.iters_per_epoch

    def tau(self) -> float:
        t = math.fmod(self.epochs_elapsed(), self.period_epochs)
        return cosine_lr(t, self.period_epochs, self.lam_start, self.lam_final)

    def advance(self) -> None:
        self.k += 1


@dataclass
class RoundStats:
    iterations: int = 0
    adopted: int | None = None
    timed_out: bool = False
    budget_exhausted: bool = False
    movers: float = 0.0
    energy_trace: list[float] = field(default_factory=list)
    final_counts: dict[int, float] = field(default_factory=dict)


@dataclass
class SearchResult:
    best_spec: NetSpec
    best_params: np.ndarray
    rounds: int
    architectures_explored: int
    metrics_path: str | None
    wallclock: float
    search_wallclock: float = 0.0
    test_metrics: dict[str, float] = field(default_factory=dict)
    timed_out_rounds: int = 0


BatchFn = Callable[[int, str], Any]


def dynamics_round(
    graph: ArchGraph,
    objective: ObjectiveHandle,
    states: dict[int, NodeState],
    config: SearchConfig,
    dyn: DynamicsParams,
    clock: GlobalClock,
    rng: np.random.Generator,
    batches: BatchFn | None = None,
    metrics: MetricsWriter | None = None,
    round_idx: int = 1,
    budget_iters: int | None = None,
    raise_on_timeout: bool = False,
) -> RoundStats:
    """Run one round of particle dynamics on a prebuilt local graph.

    Stops when the doubling criterion fires (stats.adopted is the winning
    child), when the per-round cap of round_timeout_factor * epochs_neigh
    epochs expires (adopts the node with most particles, or raises
    RoundTimeout if asked to), or when budget_iters run out (stats.adopted
    stays None: the caller keeps its incumbent).
    """
    nodes = graph.nodes()
    center = graph.center
    ensemble = seed_ensemble(graph, config.n_particles)
    tracker = ValTracker(decay=config.val_decay)
    phi = {g: 0.0 for g in nodes}
    sampled = dyn.rate_mode == SAMPLED
    if batches is None:
        batches = lambda g, kind: None
    timeout_iters = max(
        1, round(config.round_timeout_factor * config.epochs_neigh * clock.iters_per_epoch)
    )
    stats = RoundStats()
    v_train: dict[int, float] = {}

    while True:
        tau = clock.tau()
        for g in nodes:
            batch = batches(g, "train")
            loss, grad_vec = _value_and_grad(objective, states[g].x, g, batch)
            v_train[g] = loss
            grad_vec = clip_gradient(grad_vec, config.grad_clip)
            states[g] = train_step(
                states[g], grad_vec, tau,
                gamma=dyn.damping, momentum=not dyn.pure_gradient,
            )
        for g in nodes:
            eval_val(objective, tracker, states[g].x, g, batches(g, "val"))
        values = tracker.snapshot()

        if dyn.mode == FIRST_ORDER:
            laws = mutation_rates_first(ensemble.marginal(), values, graph, dyn, tau)
        else:
            laws = mutation_rates_second(phi, graph, dyn, tau)
        moved = apply_mutation_with_flows(ensemble, laws, rng if sampled else None)
        ensemble = moved.ensemble
        out_per_node = {g: 0.0 for g in nodes}
        for (g, _h), amount in moved.flows.items():
            out_per_node[g] += amount
            stats.movers += amount

        if dyn.mode == SECOND_ORDER:
            try:
                phi = update_potential(
                    phi, ensemble, values, graph, dyn, tau,
                    velocities={g: states[g].v for g in nodes},
                )
            except NonFiniteValue:
                # The potential has a finite-time blow-up when a round runs
                # long with the drift check quiet; a reset is the same remedy
                # the restart rule applies, triggered at the integrator's limit.
                phi = {g: 0.0 for g in nodes}
            if restart_check(
                phi, values, graph, ensemble.marginal(),
                literal=dyn.restart_literal, flow=dyn.flow,
            ):
                phi = {g: 0.0 for g in nodes}

        e_now = energy(ensemble, values, dyn.beta, dyn.entropy)
        stats.energy_trace.append(e_now)
        if metrics is not None:
            for g in nodes:
                metrics.write_row(
                    clock.k, round_idx, g, ensemble.counts[g],
                    ensemble.counts[g] / ensemble.total, v_train[g], values[g],
                    phi[g], tau, e_now, out_per_node[g],
                )
            metrics.flush()

        clock.advance()
        stats.iterations += 1

        children = [g for g in nodes if g != center]
        if children:
            best = min(children, key=lambda g: (-ensemble.counts[g], g))
            if ensemble.counts[best] >= 2.0 * ensemble.counts[center]:
                stats.adopted = best
                break
        if budget_iters is not None and stats.iterations >= budget_iters:
            stats.budget_exhausted = True
            break
        if stats.iterations >= timeout_iters:
            stats.timed_out = True
            if raise_on_timeout:
                raise RoundTimeout(
                    f"no doubling after {stats.iterations} iterations"
                )
            stats.adopted = min(nodes, key=lambda g: (-ensemble.counts[g], g))
            break

    stats.final_counts = dict(ensemble.counts)
    return stats


def _value_and_grad(obj: ObjectiveHandle, x, g, batch):
    fn = getattr(obj, "value_and_grad", None)
    if fn is not None:
        return fn(x, g, batch)
    return float(obj.value(x, g, batch)), np.asarray(obj.grad(x, g, batch))


class NetObjective:
    """ObjectiveHandle over per-node architectures; batches are (X, y)."""

    def __init__(self, specs: Mapping[int, NetSpec]):
        self.specs = dict(specs)

    def value(self, x, g, batch):
        inputs, labels = batch
        return loss_only(self.specs[g], x, inputs, labels)

    def grad(self, x, g, batch):
        inputs, labels = batch
        return loss_and_grad(self.specs[g], x, inputs, labels)[1]

    def value_and_grad(self, x, g, batch):
        inputs, labels = batch
        return loss_and_grad(self.specs[g], x, inputs, labels)

    def dim(self, g):
        return param_count(self.specs[g])


def _node_streams(
    dataset: Dataset, config: SearchConfig, round_idx: int, nodes
) -> BatchFn:
    x_feat, x_lab = dataset.split("train")
    y_feat, y_lab = dataset.split("val")
    table: dict[tuple[int, str], BatchStream] = {}
    for g in nodes:
        table[(g, "train")] = BatchStream(
            x_feat, x_lab, config.s_x,
            _stream_seed(config.seed, 5, round_idx, g, 0),
        )
        table[(g, "val")] = BatchStream(
            y_feat, y_lab, config.s_y,
            _stream_seed(config.seed, 5, round_idx, g, 1),
        )
    return lambda g, kind: table[(g, kind)].next_batch()


def iters_per_epoch(dataset: Dataset, config: SearchConfig) -> int:
    n = dataset.train_idx.size // config.s_x
    if n < 1:
        raise SplitTooSmall(
            f"train split of {dataset.train_idx.size} rows cannot fill a "
            f"batch of {config.s_x}"
        )
    return n


def run_round(
    incumbent: Candidate,
    config: SearchConfig,
    data: Dataset,
    mode: str | None = None,
    clock: GlobalClock | None = None,
    morph_rng: np.random.Generator | None = None,
    mutation_rng: np.random.Generator | None = None,
    metrics: MetricsWriter | None = None,
    round_idx: int = 1,
    budget_iters: int | None = None,
    raise_on_timeout: bool = False,
) -> tuple[Candidate, RoundStats, list[dict]]:
    """One full search round on a real dataset.

    Builds the local graph around the incumbent, runs the dynamics, and
    returns (next incumbent, stats, audit records). The incumbent comes back
    unchanged when the budget ran out before any stopping rule fired.
    """
    if mode is not None:
        config = replace(config, mode=mode, n_steps=None)
    if clock is None:
        clock = GlobalClock(
            iters_per_epoch(data, config), config.epochs_neigh,
            config.lam_start, config.lam_final,
        )
    if morph_rng is None:
        morph_rng = _rng(config.seed, 2, round_idx)
    if mutation_rng is None:
        mutation_rng = _rng(config.seed, 3, round_idx)

    graph, audit = build_local_graph(
        incumbent.spec, incumbent.params, config.n_neigh, config.constraints,
        config.mix, morph_rng, velocity=incumbent.velocity,
        topology=config.topology,
    )
    objective = NetObjective(
        {g: graph.payload(g).spec for g in graph}
    )
    states = {}
    for g in graph:
        cand = graph.payload(g)
        vel = cand.velocity
        if vel is None:
            vel = np.zeros_like(cand.params)
        states[g] = NodeState(cand.params.copy(), np.asarray(vel, dtype=float).copy())
    batches = _node_streams(data, config, round_idx, graph.nodes())

    stats = dynamics_round(
        graph, objective, states, config, config.dynamics(), clock,
        mutation_rng, batches, metrics, round_idx, budget_iters,
        raise_on_timeout,
    )
    if stats.adopted is None:
        return incumbent, stats, audit
    winner = graph.payload(stats.adopted)
    next_incumbent = Candidate(
        winner.spec,
        states[stats.adopted].x.copy(),
        states[stats.adopted].v.copy(),
        winner.origin,
    )
    return next_incumbent, stats, audit


def pretrain(
    spec: NetSpec,
    data: Dataset,
    epochs: int = 20,
    lam_hi: float = 0.5,
    lam_lo: float = 1e-7,
    rng: np.random.Generator | None = None,
    params: np.ndarray | None = None,
    grad_clip: float = 1.0,
    batch_size: int = 64,
    stream_seed: int | None = None,
) -> np.ndarray:
    """Train a fresh (or given) network with one cosine arc over all epochs.

    Returns the trained flat parameter vector. Raises Divergence if the loss
    or parameters stop being finite.
    """
    if rng is None:
        rng = _rng(0, 1)
    if params is None:
        params = init_params(spec, rng)
    if epochs == 0:
        return np.asarray(params, dtype=float)
    x_feat, x_lab = data.split("train")
    stream = BatchStream(
        x_feat, x_lab, batch_size,
        stream_seed if stream_seed is not None else _stream_seed(0, 5, 0, 0, 0),
    )
    total_iters = epochs * stream.batches_per_epoch
    state = NodeState(np.asarray(params, dtype=float), np.zeros_like(params))
    for k in range(total_iters):
        tau = cosine_lr(k / stream.batches_per_epoch, epochs, lam_hi, lam_lo)
        inputs, labels = stream.next_batch()
        loss, grad_vec = loss_and_grad(spec, state.x, inputs, labels)
        if not math.isfinite(loss):
            raise Divergence(f"pretraining loss became {loss}")
        grad_vec = clip_gradient(grad_vec, grad_clip)
        state = train_step(state, grad_vec, tau)
    if not np.all(np.isfinite(state.x)):
        raise Divergence("pretraining produced non-finite parameters")
    return state.x


def final_train(
    spec: NetSpec,
    params: np.ndarray,
    data: Dataset,
    budget: int = 300,
    config: SearchConfig | None = None,
    clock: GlobalClock | None = None,
    velocity: np.ndarray | None = None,
    checkpoint_path: str | None = None,
) -> tuple[np.ndarray, dict[str, float]]:
    """Polish with warm-restart cosine training until the validation loss
    stalls for plateau_cycles consecutive cycles or the epoch budget ends."""
    config = config or SearchConfig()
    x_feat, x_lab = data.split("train")
    val_x, val_y = data.split("val")
    test_x, test_y = data.split("test")
    params = np.asarray(params, dtype=float)

    def metrics_now(p) -> dict[str, float]:
        val_loss, val_acc = evaluate(spec, p, val_x, val_y)
        test_loss, test_acc = evaluate(spec, p, test_x, test_y)
        return {
            "val_loss": val_loss,
            "val_accuracy": val_acc,
            "test_loss": test_loss,
            "test_accuracy": test_acc,
        }

    if budget == 0:
        return params, metrics_now(params)

    stream = BatchStream(
        x_feat, x_lab, config.s_x, _stream_seed(config.seed, 6, 0)
    )
    if clock is None:
        clock = GlobalClock(
            stream.batches_per_epoch, config.epochs_neigh,
            config.lam_start, config.lam_final,
        )
    vel = np.zeros_like(params) if velocity is None else np.asarray(velocity, dtype=float)
    state = NodeState(params, vel)
    best_val = evaluate(spec, state.x, val_x, val_y)[0]
    best_params = state.x.copy()
    stall = 0
    cycle_best = math.inf
    epochs_done = 0
    epochs_this_cycle = 0

    while epochs_done < budget:
        for _ in range(stream.batches_per_epoch):
            tau = clock.tau()
            inputs, labels = stream.next_batch()
            loss, grad_vec = loss_and_grad(spec, state.x, inputs, labels)
            if not math.isfinite(loss):
                raise Divergence(f"final training loss became {loss}")
            grad_vec = clip_gradient(grad_vec, config.grad_clip)
            state = train_step(
                state, grad_vec, tau,
                gamma=config.damping, momentum=not config.pure_gradient,
            )
            clock.advance()
        if not np.all(np.isfinite(state.x)):
            raise Divergence("final training produced non-finite parameters")
        epochs_done += 1
        epochs_this_cycle += 1
        val_loss = evaluate(spec, state.x, val_x, val_y)[0]
        cycle_best = min(cycle_best, val_loss)
        if val_loss < best_val:
            best_params = state.x.copy()
        if epochs_this_cycle >= config.epochs_neigh:
            if best_val - cycle_best >= config.plateau_tol:
                stall = 0
            else:
                stall += 1
            best_val = min(best_val, cycle_best)
            cycle_best = math.inf
            epochs_this_cycle = 0
            if checkpoint_path is not None:
                save_checkpoint(checkpoint_path, spec, best_params)
            if stall >= config.plateau_cycles:
                break

    out = metrics_now(best_params)
    out["epochs"] = float(epochs_done)
    return best_params, out


def run_search(
    config: SearchConfig,
    data: Dataset,
    out_dir: str | None = None,
    audit_writer=None,
    metrics: MetricsWriter | None = None,
) -> SearchResult:
    """Full pipeline: pretrain, particle-dynamics rounds, final training.

    With an out_dir, writes metrics.csv, morphisms.jsonl, and best.json
    there (a caller-provided writer wins over out_dir for each artifact).
    """
    t_start = time.perf_counter()
    if config.mode == "hillclimb":
        return hill_climb_baseline(config, data, out_dir, audit_writer=audit_writer)
    data = data.standardized() if config.standardize else data

    own_metrics = own_audit = False
    best_path = None
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        if metrics is None:
            metrics = MetricsWriter(os.path.join(out_dir, "metrics.csv"))
            own_metrics = True
        if audit_writer is None:
            from .recording import JsonlWriter

            audit_writer = JsonlWriter(os.path.join(out_dir, "morphisms.jsonl"))
            own_audit = True
        best_path = os.path.join(out_dir, "best.json")

    try:
        spec = NetSpec(data.input_dim, data.n_classes, config.hidden)
        params = pretrain(
            spec, data, config.pretrain_epochs,
            config.pretrain_lam_start, config.pretrain_lam_final,
            rng=_rng(config.seed, 1),
            grad_clip=config.grad_clip, batch_size=config.s_x,
            stream_seed=_stream_seed(config.seed, 5, 0, 0, 0),
        )
        incumbent = Candidate(spec, params, np.zeros_like(params), None)

        ipe = iters_per_epoch(data, config)
        clock = GlobalClock(
            ipe, config.epochs_neigh, config.lam_start, config.lam_final
        )
        budget_iters = round(config.n_steps * config.epochs_neigh * ipe)
        explored = 1
        rounds = 0
        timed_out = 0
        t_search = time.perf_counter()
        round_idx = 0
        while clock.k < budget_iters:
            if param_count(incumbent.spec) > config.size_threshold:
                break
            round_idx += 1
            incumbent, stats, audit = run_round(
                incumbent, config, data,
                clock=clock,
                morph_rng=_rng(config.seed, 2, round_idx),
                mutation_rng=_rng(config.seed, 3, round_idx),
                metrics=metrics,
                round_idx=round_idx,
                budget_iters=budget_iters - clock.k,
                raise_on_timeout=config.strict,
            )
            explored += len(audit)
            rounds += 1
            timed_out += int(stats.timed_out)
            if audit_writer is not None:
                for record in audit:
                    audit_writer.write({"round": round_idx, **record})
            if best_path is not None:
                save_checkpoint(best_path, incumbent.spec, incumbent.params)
        search_secs = time.perf_counter() - t_search

        best_params, test_metrics = final_train(
            incumbent.spec, incumbent.params, data, config.final_budget,
            config, clock=clock, velocity=incumbent.velocity,
            checkpoint_path=best_path,
        )
        if best_path is not None:
            save_checkpoint(best_path, incumbent.spec, best_params)
        return SearchResult(
            best_spec=incumbent.spec,
            best_params=best_params,
            rounds=rounds,
            architectures_explored=explored,
            metrics_path=metrics.path if metrics is not None else None,
            wallclock=time.perf_counter() - t_start,
            search_wallclock=search_secs,
            test_metrics=test_metrics,
            timed_out_rounds=timed_out,
        )
    finally:
        if own_metrics and metrics is not None:
            metrics.close()
        if own_audit and audit_writer is not None:
            audit_writer.close()


def hill_climb_baseline(
    config: SearchConfig,
    data: Dataset,
    out_dir: str | None = None,
    wallclock_cap: float | None = None,
    initial: Candidate | None = None,
    audit_writer=None,
) -> SearchResult:
    """Sequential-training baseline: each cycle trains every child for
    epochs_neigh epochs and keeps the best validation loss.

    n_steps is the number of cycles. With a wallclock_cap, the run stops as
    soon as the cap is exceeded (checked between children) and skips final
    training; children already built still count as explored.
    """
    t_start = time.perf_counter()
    data = data.standardized() if config.standardize else data
    own_audit = False
    best_path = None
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        if audit_writer is None:
            from .recording import JsonlWriter

            audit_writer = JsonlWriter(os.path.join(out_dir, "morphisms.jsonl"))
            own_audit = True
        best_path = os.path.join(out_dir, "best.json")

    val_x, val_y = data.split("val")

    def train_child(spec, params):
        stream = BatchStream(
            data.split("train")[0], data.split("train")[1], config.s_x,
            _stream_seed(config.seed, 7, cycle, child_counter),
        )
        state = NodeState(np.asarray(params, dtype=float).copy(),
                          np.zeros(np.asarray(params).size))
        for k in range(config.epochs_neigh * stream.batches_per_epoch):
            t = math.fmod(k / stream.batches_per_epoch, config.epochs_neigh)
            tau = cosine_lr(t, config.epochs_neigh, config.lam_start, config.lam_final)
            inputs, labels = stream.next_batch()
            loss, grad_vec = loss_and_grad(spec, state.x, inputs, labels)
            if not math.isfinite(loss):
                raise Divergence(f"baseline training loss became {loss}")
            grad_vec = clip_gradient(grad_vec, config.grad_clip)
            state = train_step(state, grad_vec, tau)
        return state.x

    try:
        if initial is None:
            spec = NetSpec(data.input_dim, data.n_classes, config.hidden)
            params = pretrain(
                spec, data, config.pretrain_epochs,
                config.pretrain_lam_start, config.pretrain_lam_final,
                rng=_rng(config.seed, 1),
                grad_clip=config.grad_clip, batch_size=config.s_x,
                stream_seed=_stream_seed(config.seed, 5, 0, 0, 0),
            )
            incumbent = Candidate(spec, params, None, None)
        else:
            incumbent = Candidate(
                initial.spec, np.asarray(initial.params, dtype=float).copy(),
                None, None,
            )

        cycles = max(1, int(round(config.n_steps)))
        explored = 1
        rounds_done = 0
        child_counter = 0
        capped = False
        for cycle in range(1, cycles + 1):
            if wallclock_cap is not None and time.perf_counter() - t_start >= wallclock_cap:
                capped = True
                break
            graph, audit = build_local_graph(
                incumbent.spec, incumbent.params, config.n_neigh,
                config.constraints, config.mix, _rng(config.seed, 2, cycle),
                topology=config.topology,
            )
            if audit_writer is not None:
                for record in audit:
                    audit_writer.write({"round": cycle, **record})
            scored = [
                (evaluate(incumbent.spec, incumbent.params, val_x, val_y)[0],
                 incumbent.spec, incumbent.params)
            ]
            for g in graph:
                if g == graph.center:
                    continue
                child_counter += 1
                explored += 1
                if wallclock_cap is not None and time.perf_counter() - t_start >= wallclock_cap:
                    capped = True
                    break
                child = graph.payload(g)
                trained = train_child(child.spec, child.params)
                scored.append(
                    (evaluate(child.spec, trained, val_x, val_y)[0],
                     child.spec, trained)
                )
            best = min(scored, key=lambda item: item[0])
            incumbent = Candidate(best[1], best[2], None, None)
            if not capped:
                rounds_done += 1
            if best_path is not None:
                save_checkpoint(best_path, incumbent.spec, incumbent.params)
            if capped:
                break

        search_secs = time.perf_counter() - t_start
        test_metrics: dict[str, float] = {}
        best_params = incumbent.params
        if wallclock_cap is None:
            best_params, test_metrics = final_train(
                incumbent.spec, incumbent.params, data, config.final_budget,
                config, checkpoint_path=best_path,
            )
            if best_path is not None:
                save_checkpoint(best_path, incumbent.spec, best_params)
        return SearchResult(
            best_spec=incumbent.spec,
            best_params=best_params,
            rounds=rounds_done,
            architectures_explored=explored,
            metrics_path=None,
            wallclock=time.perf_counter() - t_start,
            search_wallclock=search_secs,
            test_metrics=test_metrics,
        )
    finally:
        if own_audit and audit_writer is not None:
            audit_writer.close()
