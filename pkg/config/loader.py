"""YAML configuration loader for runtime settings and experiment configs."""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from core.errors import ConfigInvalid

CONFIG_DIR = Path(__file__).resolve().parent
SETTINGS_PATH = CONFIG_DIR / "settings.yaml"
SCHEMA_PATH = CONFIG_DIR / "schema.yaml"
EXPERIMENTS_DIR = CONFIG_DIR / "experiments"
SEED_LIMIT = 2**64


@dataclass(slots=True)
class CapsConfig:
    """Enumeration caps.

    Input contract:
    - Every field is a positive integer read from `settings.yaml`.

    Output contract:
    - Consulted by kernels before exhaustive enumeration.

    Side effects:
    - None.
    """

    subgroup_lattice_order: int
    svd_dimension: int
    exhaustive_block_outcomes: int
    census_maps: int
    equidistribution_outcomes: int
    code_blocks: int
    sur_count_order: int


@dataclass(slots=True)
class ToleranceConfig:
    """Floating-point comparison tolerances."""

    measure: float
    clamp: float
    bound: float
    support: float


@dataclass(slots=True)
class NumericsConfig:
    """Numeric evaluation knobs.

    Input contract:
    - `product_cutoff` truncates infinite products at this index.
    - `exact_arithmetic` routes convolutions through rationals.

    Output contract:
    - Read by abelian-arith and walk-bound kernels.

    Side effects:
    - None.
    """

    product_cutoff: int
    exact_arithmetic: bool


@dataclass(slots=True)
class Settings:
    """Top-level runtime settings container.

    Input contract:
    - Sections must come from `config/settings.yaml`.
    - `cache_dir` comes from `COKERNEL_CACHE_DIR` when set.

    Output contract:
    - Single shared object returned by `get_settings`.

    Side effects:
    - None.
    """

    caps: CapsConfig
    tolerances: ToleranceConfig
    numerics: NumericsConfig
    cache_dir: Path | None = None


@dataclass(slots=True)
class ExperimentConfig:
    """One validated experiment configuration.

    Input contract:
    - `command` is one of the schema's commands.
    - `parameters` holds only the schema's keys for that command.
    - `seed` lies in `[0, 2**64)`; `threads` is positive.

    Output contract:
    - Consumed by `lab.runner` dispatch.

    Side effects:
    - None.
    """

    experiment_id: str
    command: str
    parameters: dict[str, Any]
    seed: int
    threads: int
    output_path: str | None
    description: str = ""
    raw: dict[str, Any] = field(default_factory=dict)


def _load_yaml(path: Path) -> dict[str, Any]:
    """Load one YAML (or JSON) mapping from disk.

    Input contract:
    - `path` points to a file containing a mapping at root.

    Output contract:
    - Returns root mapping as dictionary.

    Side effects:
    - Reads file contents from disk.
    """

    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    try:
        payload = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"Unparseable config {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigInvalid(f"YAML root must be a mapping: {path}")
    return payload


def _section(payload: dict[str, Any], name: str) -> dict[str, Any]:
    raw = payload.get(name)
    if not isinstance(raw, dict):
        raise ValueError(f"`{name}` section must be a mapping")
    return raw


def load_settings(path: str | Path | None = None) -> Settings:
    """Load runtime settings from YAML and the environment.

    Input contract:
    - `path` overrides `COKERNEL_SETTINGS` and the bundled `settings.yaml`.

    Output contract:
    - Returns a populated `Settings` object.

    Side effects:
    - Reads `.env` into the process environment.
    - Reads YAML from disk.
    """

    load_dotenv()
    resolved = Path(path or os.getenv("COKERNEL_SETTINGS") or SETTINGS_PATH)
    payload = _load_yaml(resolved)
    caps_raw = _section(payload, "caps")
    tolerances_raw = _section(payload, "tolerances")
    numerics_raw = _section(payload, "numerics")

    cache_env = os.getenv("COKERNEL_CACHE_DIR")
    return Settings(
        caps=CapsConfig(**{key: int(value) for key, value in caps_raw.items()}),
        tolerances=ToleranceConfig(
            **{key: float(value) for key, value in tolerances_raw.items()}
        ),
        numerics=NumericsConfig(
            product_cutoff=int(numerics_raw["product_cutoff"]),
            exact_arithmetic=bool(numerics_raw["exact_arithmetic"]),
        ),
        cache_dir=Path(cache_env) if cache_env else None,
    )


@functools.lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the process-wide settings, loading them on first use."""

    return load_settings()


@functools.lru_cache(maxsize=1)
def load_schema() -> dict[str, Any]:
    """Load the shipped experiment schema."""

    return _load_yaml(SCHEMA_PATH)


def _check_keys(
    where: str,
    payload: dict[str, Any],
    required: list[str],
    optional: list[str],
) -> None:
    missing = [key for key in required if key not in payload]
    if missing:
        raise ConfigInvalid(f"{where}: missing required field(s) {missing}")
    unknown = sorted(set(payload) - set(required) - set(optional))
    if unknown:
        raise ConfigInvalid(f"{where}: unknown field(s) {unknown}")


def _parse_int(where: str, value: Any, minimum: int, limit: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(f"{where} must be an integer, got {value!r}")
    if value < minimum or (limit is not None and value >= limit):
        raise ConfigInvalid(f"{where} out of range: {value}")
    return value


def validate_experiment_payload(
    payload: dict[str, Any],
    source: str = "<memory>",
) -> ExperimentConfig:
    """Validate a raw experiment mapping against the shipped schema.

    Input contract:
    - `payload` is the parsed config root.
    - `source` names the origin for error messages and the default id.

    Output contract:
    - Returns `ExperimentConfig`; raises `ConfigInvalid` on any schema breach.

    Side effects:
    - Reads the schema file on first call.
    """

    schema = load_schema()
    top = schema["top_level"]
    _check_keys(source, payload, list(top["required"]), list(top["optional"]))

    command = payload["command"]
    commands = schema["commands"]
    if command not in commands:
        raise ConfigInvalid(f"{source}: unknown command {command!r}")

    parameters = payload["parameters"]
    if not isinstance(parameters, dict):
        raise ConfigInvalid(f"{source}: `parameters` must be a mapping")
    command_schema = commands[command]
    _check_keys(
        f"{source}: parameters",
        parameters,
        list(command_schema.get("required", [])),
        list(command_schema.get("optional", [])),
    )

    return ExperimentConfig(
        experiment_id=str(payload.get("id", Path(source).stem)),
        command=str(command),
        parameters=dict(parameters),
        seed=_parse_int("seed", payload.get("seed", 0), 0, SEED_LIMIT),
        threads=_parse_int("threads", payload.get("threads", 1), 1),
        output_path=payload.get("output_path"),
        description=str(payload.get("description", "")),
        raw=dict(payload),
    )


def resolve_config_path(name_or_path: str) -> Path:
    """Map a built-in experiment name or a file path to a config path."""

    candidate = Path(name_or_path)
    if candidate.exists():
        return candidate
    for suffix in (".yaml", ".yml", ".json"):
        builtin = EXPERIMENTS_DIR / f"{name_or_path}{suffix}"
        if builtin.exists():
            return builtin
    return candidate


def load_experiment_config(
    path: str | Path,
    seed: int | None = None,
    threads: int | None = None,
    output_path: str | None = None,
) -> ExperimentConfig:
    """Load and validate one experiment config, applying CLI overrides.

    Input contract:
    - `path` is a JSON/YAML file or a built-in experiment name.
    - Non-`None` overrides replace the file's values.

    Output contract:
    - Returns a validated `ExperimentConfig`.

    Side effects:
    - Reads the config and schema from disk.
    """

    resolved = resolve_config_path(str(path))
    payload = _load_yaml(resolved)
    config = validate_experiment_payload(payload, source=str(resolved))
    if seed is not None:
        config.seed = _parse_int("--seed", seed, 0, SEED_LIMIT)
    if threads is not None:
        config.threads = _parse_int("--threads", threads, 1)
    if output_path is not None:
        config.output_path = output_path
    return config


def list_builtin_experiments() -> list[tuple[str, str, Path]]:
    """Return `(name, description, path)` for every shipped experiment.

    Input contract:
    - None.

    Output contract:
    - Sorted by name; descriptions come from each file's `description` field.

    Side effects:
    - Reads every built-in config from disk.
    """

    manifest: list[tuple[str, str, Path]] = []
    for path in sorted(EXPERIMENTS_DIR.glob("*.yaml")):
        payload = _load_yaml(path)
        manifest.append((path.stem, str(payload.get("description", "")), path))
    return manifest
