"""Command-line front end.

Subcommands: search (full pipeline with run artifacts), eval (score a saved
checkpoint), pretrain (train the starting network only), dynamics-bench
(particle-dynamics convergence sweeps without any training), and graph-dump
(emit one local graph as JSON).

stdout carries exactly one JSON document per invocation; everything else
goes to stderr. Exit codes: 0 on success, 2 for configuration problems
(including unreadable checkpoints and data files), 3 when training
diverges, 4 when a round times out under --strict.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .config import (
    build_dataset,
    build_search_config,
    load_config,
    normalize,
)
from .dynamics import (
    EXPECTED,
    FIRST_ORDER,
    SAMPLED,
    SECOND_ORDER,
    DynamicsParams,
    apply_mutation_with_flows,
    energy,
    mutation_rates_first,
    mutation_rates_second,
    seed_ensemble,
    stationary_oracle,
    update_potential,
)
from .errors import (
    BadConfig,
    BadLabel,
    BadParams,
    Divergence,
    MissingFile,
    NonIntegerLabel,
    ParseError,
    RoundTimeout,
    SplitTooSmall,
)
from .graph import complete_graph
from .morphisms import build_local_graph
from .nn import (
    NetSpec,
    evaluate,
    load_checkpoint,
    param_count,
    save_checkpoint,
    spec_digest,
)
from .recording import MetricsWriter, utc_now, write_manifest
from .search import MODES, pretrain, run_search, _rng

log = logging.getLogger("semiflow")

SEED_ENV = "SEMIFLOW_SEED"

CONFIG_ERRORS = (
    BadConfig,
    MissingFile,
    ParseError,
    BadParams,
    SplitTooSmall,
    NonIntegerLabel,
    BadLabel,
)


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="semiflow",
        description="architecture search by interacting particle dynamics",
    )
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_data: bool = True) -> None:
        p.add_argument("--config", help="JSON config file (or a run manifest)")
        p.add_argument("--seed", type=int, help="overrides config and environment")
        if with_data:
            p.add_argument(
                "--data", choices=("blobs", "spirals", "csv"),
                help="shortcut for the data.kind config key",
            )
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("search", help="run the full search pipeline")
    common(p)
    p.add_argument("--mode", choices=MODES, help="overrides search.mode")
    p.add_argument("--n-steps", type=float, help="overrides search.n_steps")
    p.add_argument("--out", help="run directory (default semiflow_run_<mode>_s<seed>)")
    p.add_argument("--strict", action="store_true",
                   help="fail with exit 4 when a round times out")
    p.add_argument("--workers", type=int, default=1,
                   help="worker cap; the engine is single-threaded")

    p = sub.add_parser("eval", help="score a checkpoint on a dataset split")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", choices=("train", "val", "test"), default="test")

    p = sub.add_parser("pretrain", help="train the starting network only")
    common(p)
    p.add_argument("--out", default="pretrained.json", help="checkpoint path")

    p = sub.add_parser("dynamics-bench",
                       help="particle-dynamics sweeps against the stationary law")
    common(p, with_data=False)
    p.add_argument("--out", default="bench_out")
    p.add_argument("--betas", default="1.0", help="comma-separated grid")
    p.add_argument("--kappas", default="1.0", help="comma-separated grid")
    p.add_argument("--gammas", default="0.0", help="comma-separated grid")
    p.add_argument("--nodes", type=int, default=5)
    p.add_argument("--particles", type=int, default=10000)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--sampled", action="store_true",
                   help="integer-particle sampling instead of expected flows")

    p = sub.add_parser("graph-dump", help="emit one local graph as JSON")
    common(p)
    p.add_argument("--checkpoint", help="center the graph on this network")
    p.add_argument("--out", help="write JSON here instead of stdout")

    return top


def _load_table(args) -> dict:
    overrides = load_config(args.config) if args.config else {}
    table = normalize(overrides)
    if getattr(args, "data", None):
        table["data.kind"] = args.data
    if getattr(args, "mode", None):
        table["search.mode"] = args.mode
    if getattr(args, "n_steps", None) is not None:
        table["search.n_steps"] = args.n_steps
    if args.seed is not None:
        table["search.seed"] = args.seed
    elif SEED_ENV in os.environ:
        raw = os.environ[SEED_ENV]
        try:
            table["search.seed"] = int(raw)
        except ValueError:
            raise BadConfig(f"{SEED_ENV} must be an integer, got {raw!r}")
    return table


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _cmd_search(args) -> int:
    table = _load_table(args)
    config = build_search_config(table)
    config.strict = bool(args.strict)
    data = build_dataset(table)
    out_dir = args.out or f"semiflow_run_{config.mode}_s{config.seed}"
    os.makedirs(out_dir, exist_ok=True)
    outputs = ["manifest.json", "best.json", "morphisms.jsonl"]
    if config.mode != "hillclimb":
        outputs.insert(1, "metrics.csv")
    manifest_path = os.path.join(out_dir, "manifest.json")
    started = utc_now()
    write_manifest(manifest_path, table, config.seed, __version__, outputs, started)
    log.info("run directory %s", out_dir)

    result = run_search(config, data, out_dir=out_dir)

    write_manifest(
        manifest_path, table, config.seed, __version__, outputs, started,
        ended=utc_now(),
    )
    summary = {
        "mode": config.mode,
        "seed": config.seed,
        "out_dir": out_dir,
        "rounds": result.rounds,
        "architectures_explored": result.architectures_explored,
        "param_count": param_count(result.best_spec),
        "wallclock_seconds": result.wallclock,
        "timed_out_rounds": result.timed_out_rounds,
    }
    summary.update(result.test_metrics)
    _emit(summary)
    return 0


def _cmd_eval(args) -> int:
    table = _load_table(args)
    spec, flat = load_checkpoint(args.checkpoint)
    data = build_dataset(table)
    if data.input_dim != spec.input_dim or data.n_classes != spec.output_dim:
        raise BadConfig(
            f"checkpoint expects {spec.input_dim} features and "
            f"{spec.output_dim} classes, dataset has {data.input_dim} "
            f"and {data.n_classes}"
        )
    features, labels = data.split(args.split)
    loss, acc = evaluate(spec, flat, features, labels)
    _emit({"loss": loss, "accuracy": acc, "split": args.split,
           "param_count": param_count(spec)})
    return 0


def _cmd_pretrain(args) -> int:
    table = _load_table(args)
    config = build_search_config(table)
    data = build_dataset(table)
    spec = NetSpec(data.input_dim, data.n_classes, config.hidden)
    from .nn import init_params, loss_only
    from .search import _stream_seed

    rng = _rng(config.seed, 1)
    params0 = init_params(spec, rng)
    train_x, train_y = data.split("train")
    initial_loss = loss_only(spec, params0, train_x, train_y)
    params = pretrain(
        spec, data, config.pretrain_epochs,
        config.pretrain_lam_start, config.pretrain_lam_final,
        params=params0, grad_clip=config.grad_clip, batch_size=config.s_x,
        stream_seed=_stream_seed(config.seed, 5, 0, 0, 0),
    )
    final_loss = loss_only(spec, params, train_x, train_y)
    save_checkpoint(args.out, spec, params)
    _emit({"initial_loss": initial_loss, "final_loss": final_loss,
           "checkpoint": args.out, "param_count": param_count(spec)})
    return 0


def _grid(raw: str, name: str) -> list[float]:
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        raise BadConfig(f"--{name} wants comma-separated numbers, got {raw!r}")
    if not values:
        raise BadConfig(f"--{name} grid is empty")
    return values


def _bench_point(index, beta, kappa, gamma, args, seed, out_dir):
    rng = _rng(seed, 40, index)
    values = {g: float(v) for g, v in enumerate(rng.uniform(0.0, 1.0, args.nodes))}
    graph = complete_graph([None] * args.nodes)
    try:
        dyn = DynamicsParams(
            kappa=kappa, beta=beta, gamma=gamma,
            mode=SECOND_ORDER if args.order == 2 else FIRST_ORDER,
            rate_mode=SAMPLED if args.sampled else EXPECTED,
        )
    except ValueError as exc:
        raise BadConfig(str(exc)) from exc
    # No floor: off-support mass must be free to drain toward the oracle.
    ensemble = seed_ensemble(graph, args.particles, ghosts=False)
    phi = {g: 0.0 for g in graph}
    move_rng = _rng(seed, 41, index) if args.sampled else None
    csv_path = os.path.join(out_dir, f"bench_{index:03d}.csv")
    with MetricsWriter(csv_path) as writer:
        for k in range(args.iters):
            if dyn.mode == SECOND_ORDER:
                laws = mutation_rates_second(phi, graph, dyn, args.tau)
            else:
                laws = mutation_rates_first(
                    ensemble.marginal(), values, graph, dyn, args.tau
                )
            moved = apply_mutation_with_flows(ensemble, laws, move_rng)
            ensemble = moved.ensemble
            out_flow = {g: 0.0 for g in graph}
            for (g, _h), amount in moved.flows.items():
                out_flow[g] += amount
            if dyn.mode == SECOND_ORDER:
                phi = update_potential(phi, ensemble, values, graph, dyn, args.tau)
            e_now = energy(ensemble, values, beta)
            for g in graph.nodes():
                writer.write_row(
                    k, 1, g, ensemble.counts[g],
                    ensemble.counts[g] / ensemble.total,
                    values[g], values[g], phi[g], args.tau, e_now,
                    out_flow[g],
                )
    target = stationary_oracle(values, beta)
    marginal = ensemble.marginal()
    l1 = sum(abs(marginal[g] - target[g]) for g in graph)
    return {
        "beta": beta, "kappa": kappa, "gamma": gamma,
        "l1_to_stationary": l1, "iterations": args.iters,
        "csv": os.path.basename(csv_path),
    }


def _cmd_bench(args) -> int:
    seed = args.seed
    if seed is None:
        seed = int(os.environ[SEED_ENV]) if SEED_ENV in os.environ else 0
    betas = _grid(args.betas, "betas")
    kappas = _grid(args.kappas, "kappas")
    gammas = _grid(args.gammas, "gammas")
    os.makedirs(args.out, exist_ok=True)
    points = []
    index = 0
    for beta in betas:
        for kappa in kappas:
            for gamma in gammas:
                log.info("bench point beta=%s kappa=%s gamma=%s", beta, kappa, gamma)
                points.append(
                    _bench_point(index, beta, kappa, gamma, args, seed, args.out)
                )
                index += 1
    summary = {
        "points": points,
        "nodes": args.nodes,
        "particles": args.particles,
        "mode": "sampled" if args.sampled else "expected",
        "order": args.order,
        "seed": seed,
    }
    with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit(summary)
    return 0


def _cmd_graph_dump(args) -> int:
    table = _load_table(args)
    config = build_search_config(table)
    if args.checkpoint:
        spec, flat = load_checkpoint(args.checkpoint)
    else:
        data = build_dataset(table)
        spec = NetSpec(data.input_dim, data.n_classes, config.hidden)
        from .nn import init_params

        flat = init_params(spec, _rng(config.seed, 1))
    graph, _audit = build_local_graph(
        spec, flat, config.n_neigh, config.constraints, config.mix,
        _rng(config.seed, 2, 1), topology=config.topology,
    )
    payload = {
        "nodes": [
            {
                "id": g,
                "spec_digest": spec_digest(graph.payload(g).spec),
                "param_count": param_count(graph.payload(g).spec),
            }
            for g in graph.nodes()
        ],
        "edges": [
            {"a": a, "b": b, "w": w} for a, b, w in graph.edges()
        ],
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        _emit({"written": args.out, "nodes": len(payload["nodes"]),
               "edges": len(payload["edges"])})
    else:
        _emit(payload)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {
        "search": _cmd_search,
        "eval": _cmd_eval,
        "pretrain": _cmd_pretrain,
        "dynamics-bench": _cmd_bench,
        "graph-dump": _cmd_graph_dump,
    }
    try:
        return handlers[args.command](args)
    except CONFIG_ERRORS as exc:
        log.error("%s", exc)
        return 2
    except Divergence as exc:
        log.error("diverged: %s", exc)
        return 3
    except RoundTimeout as exc:
        log.error("round timed out: %s", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
