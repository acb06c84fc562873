"""Run configuration as a flat JSON object with dotted keys.

A config file is a single JSON object mapping dotted keys to scalars (or a
list of ints for net.hidden). Unknown keys are rejected by name, values are
type-checked, and anything not given falls back to the defaults below. The
normalized table is what gets snapshotted into a run manifest, so a manifest
alone is enough to replay a run bit for bit.
"""

from __future__ import annotations

import json
from typing import Any

from .data import Dataset, load_csv, make_blobs, two_spirals
from .errors import BadConfig, MissingFile
from .morphisms import Constraints
from .search import DEFAULT_N_STEPS, MODES, SearchConfig

# key -> (type tag, default); None means "no default, must be supplied
# when a command needs it".
SCHEMA: dict[str, tuple[str, Any]] = {
    "data.kind": ("str", None),
    "data.n": ("int", 2000),
    "data.noise": ("float", 0.1),
    "data.spread": ("float", 0.6),
    "data.d": ("int", 2),
    "data.classes": ("int", 4),
    "data.path": ("str", None),
    "data.label_column": ("int", -1),
    "data.has_header": ("bool", False),
    "data.seed": ("opt_int", None),
    "data.standardize": ("bool", False),
    "search.mode": ("str", "nasgd"),
    "search.seed": ("int", 0),
    "search.n_particles": ("int", 100),
    "search.n_neigh": ("int", 8),
    "search.epochs_neigh": ("int", 18),
    "search.n_steps": ("opt_float", None),
    "search.lam_start": ("float", 0.05),
    "search.lam_final": ("float", 1e-7),
    "search.s_x": ("int", 64),
    "search.s_y": ("int", 32),
    "search.size_threshold": ("int", 20000),
    "search.topology": ("str", "star"),
    "search.round_timeout_factor": ("float", 5.0),
    "search.grad_clip": ("float", 1.0),
    "dynamics.kappa": ("float", 3.0),
    "dynamics.beta": ("float", 2.0),
    "dynamics.gamma": ("float", 0.0),
    "dynamics.rate_mode": ("str", "sampled"),
    "dynamics.flow": ("str", "toward_high_phi"),
    "dynamics.damping": ("float", 1.0),
    "dynamics.pure_gradient": ("bool", False),
    "dynamics.speed_penalty": ("bool", False),
    "dynamics.friction_potential": ("bool", False),
    "dynamics.restart_literal": ("bool", False),
    "dynamics.entropy": ("str", "power"),
    "dynamics.val_decay": ("float", 0.9),
    "net.hidden": ("int_list", [16, 16]),
    "morphisms.p_deepen": ("float", 0.25),
    "morphisms.p_widen": ("float", 0.25),
    "morphisms.p_add_skip": ("float", 0.2),
    "morphisms.p_narrow": ("float", 0.1),
    "morphisms.p_remove_layer": ("float", 0.1),
    "morphisms.p_remove_skip": ("float", 0.1),
    "constraints.max_layers": ("int", 8),
    "constraints.max_width": ("int", 64),
    "constraints.max_incoming": ("int", 3),
    "constraints.max_params": ("int", 20000),
    "pretrain.epochs": ("int", 20),
    "pretrain.lam_start": ("float", 0.5),
    "pretrain.lam_final": ("float", 1e-7),
    "final.budget": ("int", 300),
    "final.plateau_cycles": ("int", 3),
    "final.plateau_tol": ("float", 1e-4),
}


def default_config() -> dict[str, Any]:
    return {key: default for key, (_tag, default) in SCHEMA.items()}


def _coerce(key: str, tag: str, value: Any) -> Any:
    if value is None and tag in ("opt_int", "opt_float", "str"):
        return None
    if tag == "bool":
        if isinstance(value, bool):
            return value
    elif tag in ("int", "opt_int"):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    elif tag in ("float", "opt_float"):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif tag == "str":
        if isinstance(value, str):
            return value
    elif tag == "int_list":
        if isinstance(value, list) and value and all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            return list(value)
    return _reject(key, tag, value)


def _reject(key: str, tag: str, value: Any):
    wanted = {
        "bool": "a boolean",
        "int": "an integer",
        "opt_int": "an integer",
        "float": "a number",
        "opt_float": "a number",
        "str": "a string",
        "int_list": "a nonempty list of integers",
    }[tag]
    raise BadConfig(f"config key {key} wants {wanted}, got {value!r}")


def normalize(overrides: dict[str, Any] | None = None) -> dict[str, Any]:
    """Apply defaults, reject unknown keys, coerce and type-check values."""
    table = default_config()
    for key, value in (overrides or {}).items():
        if key not in SCHEMA:
            raise BadConfig(f"unknown config key: {key}")
        table[key] = _coerce(key, SCHEMA[key][0], value)
    return table


def load_config(path: str) -> dict[str, Any]:
    """Read a config file; a run manifest (with its config snapshot under
    "config") is accepted in place of a plain config."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise MissingFile(f"no config file at {path}") from exc
    except json.JSONDecodeError as exc:
        raise BadConfig(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise BadConfig(f"config file {path} must hold a JSON object")
    if "config" in raw and isinstance(raw["config"], dict):
        raw = raw["config"]
    return raw


def require(cfg: dict[str, Any], key: str) -> Any:
    value = cfg.get(key)
    if value is None:
        raise BadConfig(f"missing config key: {key}")
    return value


def build_dataset(cfg: dict[str, Any]) -> Dataset:
    kind = require(cfg, "data.kind")
    seed = cfg["data.seed"]
    if seed is None:
        seed = cfg["search.seed"]
    if kind == "blobs":
        data = make_blobs(
            cfg["data.n"], cfg["data.d"], cfg["data.classes"],
            cfg["data.spread"], seed,
        )
    elif kind == "spirals":
        data = two_spirals(cfg["data.n"], cfg["data.noise"], seed)
    elif kind == "csv":
        data = load_csv(
            require(cfg, "data.path"), cfg["data.label_column"],
            cfg["data.has_header"], split_seed=seed,
        )
    else:
        raise BadConfig(
            f"config key data.kind wants blobs, spirals, or csv, got {kind!r}"
        )
    if cfg["data.standardize"]:
        data = data.standardized()
    return data


def build_search_config(cfg: dict[str, Any]) -> SearchConfig:
    mode = cfg["search.mode"]
    if mode not in MODES:
        raise BadConfig(
            f"config key search.mode wants one of {'/'.join(MODES)}, got {mode!r}"
        )
    mix = {
        "deepen": cfg["morphisms.p_deepen"],
        "widen": cfg["morphisms.p_widen"],
        "add_skip": cfg["morphisms.p_add_skip"],
        "narrow": cfg["morphisms.p_narrow"],
        "remove_layer": cfg["morphisms.p_remove_layer"],
        "remove_skip": cfg["morphisms.p_remove_skip"],
    }
    try:
        return SearchConfig(
            mode=mode,
            seed=cfg["search.seed"],
            n_particles=cfg["search.n_particles"],
            n_neigh=cfg["search.n_neigh"],
            epochs_neigh=cfg["search.epochs_neigh"],
            n_steps=cfg["search.n_steps"],
            lam_start=cfg["search.lam_start"],
            lam_final=cfg["search.lam_final"],
            kappa=cfg["dynamics.kappa"],
            beta=cfg["dynamics.beta"],
            gamma=cfg["dynamics.gamma"],
            s_x=cfg["search.s_x"],
            s_y=cfg["search.s_y"],
            constraints=Constraints(
                cfg["constraints.max_layers"],
                cfg["constraints.max_width"],
                cfg["constraints.max_incoming"],
                cfg["constraints.max_params"],
            ),
            size_threshold=cfg["search.size_threshold"],
            hidden=tuple(cfg["net.hidden"]),
            mix=mix,
            topology=cfg["search.topology"],
            rate_mode=cfg["dynamics.rate_mode"],
            flow=cfg["dynamics.flow"],
            damping=cfg["dynamics.damping"],
            pure_gradient=cfg["dynamics.pure_gradient"],
            speed_penalty=cfg["dynamics.speed_penalty"],
            friction_potential=cfg["dynamics.friction_potential"],
            restart_literal=cfg["dynamics.restart_literal"],
            entropy=cfg["dynamics.entropy"],
            val_decay=cfg["dynamics.val_decay"],
            grad_clip=cfg["search.grad_clip"],
            round_timeout_factor=cfg["search.round_timeout_factor"],
            pretrain_epochs=cfg["pretrain.epochs"],
            pretrain_lam_start=cfg["pretrain.lam_start"],
            pretrain_lam_final=cfg["pretrain.lam_final"],
            final_budget=cfg["final.budget"],
            plateau_cycles=cfg["final.plateau_cycles"],
            plateau_tol=cfg["final.plateau_tol"],
            # build_dataset already standardized the data when asked to
            standardize=False,
        )
    except ValueError as exc:
        raise BadConfig(str(exc)) from exc
