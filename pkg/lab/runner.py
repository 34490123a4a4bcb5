"""Experiment runners, one per CLI command.

Rules for this layer:
- A runner turns one validated `ExperimentConfig` into `ResultRow`s.
- Runners record failed comparisons as rows and never abort a sweep over
  them; configuration mistakes raise `ConfigInvalid`.
- Randomized instance `t` uses `stream(seed, 0, t)`, so instance rows do not
  depend on the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence, TypedDict

import numpy as np

from config.loader import ExperimentConfig, get_settings
from core.abelian import AbelianGroup
from core.errors import ConfigInvalid, LabError, NotNormalInQuotient, PreconditionViolated
from core.groups import FiniteGroup, Subgroup, builtin_group, generated_subgroup
from core.logger import debug_log, info_log
from core.measures import from_mapping
from core.spectral import (
    full_operator_second_singular_value,
    random_balanced_probability,
    second_singular_value,
    sigma_bound_abelian,
    sigma_bound_general,
)
from core.types import ResultRow
from core.walks import (
    WalkInstance,
    a5_counterexample,
    a5_counterexample_probability,
    a5_uniform_reference,
    dihedral_walk,
    exact_walk_distance,
    greedy_chain,
    normal_family_bound,
    quotient_chain,
    random_feasible_steps,
    random_normal_chain,
    strong_walk_bound,
    subspace_distance_bound,
)
from lab.batch import run_indexed
from lab.codes import depth_census, images_from_matrix
from lab.equidistribution import (
    equidistribution_gap,
    error_combination,
    full_matrix_code_check,
    partition_depth_check,
)
from lab.metrics import make_row
from lab.models import Partition, build_model, stream
from lab.moments import class_frequency, cokernel_class_distribution, moment_estimate

GOLDEN_SIGMA_TOLERANCE = 1e-10
FLOAT_ZERO_TOLERANCE = 1e-15


@dataclass(slots=True)
class RunOptions:
    """Presentation switches shared by every runner."""

    debug: bool = False
    show_progress: bool = False


def parse_abelian(spec: Any) -> AbelianGroup:
    """Read an abelian group from `[2, 4]`, `"Z2xZ4"`, `"1"` or a JSON mapping."""

    if isinstance(spec, Mapping):
        return AbelianGroup.from_json(dict(spec))
    if isinstance(spec, (list, tuple)):
        return AbelianGroup.from_cyclic([int(d) for d in spec])
    if isinstance(spec, int):
        return AbelianGroup.from_cyclic([spec])
    text = str(spec).replace(" ", "")
    if text in ("1", "trivial", ""):
        return AbelianGroup()
    orders = []
    for token in text.split("x"):
        digits = token.removeprefix("Z/").removeprefix("Z").removeprefix("C")
        if not digits.isdigit():
            raise ConfigInvalid(f"cannot read abelian group {spec!r}")
        orders.append(int(digits))
    return AbelianGroup.from_cyclic(orders)


def _require(parameters: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in parameters:
        raise ConfigInvalid(f"{where}: parameter {key!r} is required")
    return parameters[key]


def _subgroup(G: FiniteGroup, labels: Sequence[str]) -> Subgroup:
    try:
        return generated_subgroup(G, [G.index_of(str(label)) for label in labels])
    except PreconditionViolated as exc:
        raise ConfigInvalid(f"unknown element label in {list(labels)!r} for {G.name}") from exc


# walk-verify


def _walk_a5(experiment_id: str, parameters: Mapping[str, Any]) -> list[ResultRow]:
    walk, family = a5_counterexample()
    rows = [
        make_row(
            experiment_id,
            "a5:p_3_to_4:exact",
            a5_counterexample_probability(exact=True),
            "equals",
            reference_value=0.0,
            bound=0.0,
        ),
        make_row(
            experiment_id,
            "a5:p_3_to_4:float",
            a5_counterexample_probability(exact=False),
            "le_bound",
            bound=FLOAT_ZERO_TOLERANCE,
        ),
        make_row(
            experiment_id,
            "a5:uniform_3_to_4",
            a5_uniform_reference(),
            "equals",
            reference_value=0.2,
        ),
    ]
    for index, step in enumerate(walk.steps, start=1):
        rows.append(
            make_row(
                experiment_id,
                f"a5:step_{index}:sigma",
                second_singular_value(step).second_largest,
                "equals",
                reference_value=0.0,
                bound=GOLDEN_SIGMA_TOLERANCE,
            )
        )
    distance = exact_walk_distance(walk)
    rows.append(make_row(experiment_id, "a5:distance", distance, "flag", flag=distance > 0.0))
    try:
        normal_family_bound(walk, family)
        rejected = False
    except NotNormalInQuotient:
        rejected = True
    rows.append(
        make_row(experiment_id, "a5:family_not_normal", float(rejected), "flag", flag=rejected)
    )
    return rows


def _walk_dihedral(experiment_id: str, parameters: Mapping[str, Any]) -> list[ResultRow]:
    rows: list[ResultRow] = []
    for n in parameters.get("n_values", [4, 6]):
        for p in parameters.get("p_values", [0.1, 0.3, 0.5]):
            coin = abs(1.0 - 2.0 * float(p))
            walk, chain = dihedral_walk(int(n), float(p), 1)
            report = strong_walk_bound(walk, chain)
            rows.append(
                make_row(
                    experiment_id,
                    f"D{2 * int(n)}:p={p}:even_sigma",
                    report.per_step_sigma.get(2, float("nan")),
                    "equals",
                    reference_value=coin,
                    bound=GOLDEN_SIGMA_TOLERANCE,
                )
            )
            rotation_sigma = second_singular_value(walk.steps[0]).second_largest
            for k in parameters.get("k_values", list(range(1, 9))):
                walk, chain = dihedral_walk(int(n), float(p), int(k))
                report = strong_walk_bound(walk, chain)
                rows.append(
                    make_row(
                        experiment_id,
                        f"D{2 * int(n)}:p={p}:k={k}:golden",
                        report.lhs,
                        "le_bound",
                        bound=rotation_sigma ** int(k) + coin ** int(k),
                    )
                )
                rows.append(
                    make_row(
                        experiment_id,
                        f"D{2 * int(n)}:p={p}:k={k}:strong",
                        report.lhs,
                        "le_bound",
                        bound=report.rhs,
                    )
                )
    return rows


@dataclass(frozen=True, slots=True)
class WalkSuiteJob:
    seed: int
    groups: tuple[str, ...]
    extra_steps: int


@dataclass(slots=True)
class WalkOutcome:
    group: str
    lhs: float
    rhs: float
    subspace: float
    subspace_bound: float


def _walk_suite_worker(job: WalkSuiteJob, start: int, stop: int) -> list[WalkOutcome]:
    outcomes = []
    for t in range(start, stop):
        rng = stream(job.seed, 0, t)
        name = job.groups[int(rng.integers(len(job.groups)))]
        G = builtin_group(name)
        chain = random_normal_chain(G, rng)
        walk = random_feasible_steps(chain, rng, extra_steps=job.extra_steps)
        report = strong_walk_bound(walk, chain)
        measured, bound = subspace_distance_bound(walk, chain.kernels[0])
        outcomes.append(WalkOutcome(name, report.lhs, report.rhs, measured, bound))
    return outcomes


def _walk_suite(
    experiment_id: str,
    parameters: Mapping[str, Any],
    config: ExperimentConfig,
    options: RunOptions,
) -> list[ResultRow]:
    job = WalkSuiteJob(
        seed=config.seed,
        groups=tuple(str(name) for name in _require(parameters, "groups", "walk-verify suite")),
        extra_steps=int(parameters.get("extra_steps", 2)),
    )
    outcomes = run_indexed(
        _walk_suite_worker,
        job,
        int(parameters.get("trials", 500)),
        threads=config.threads,
        label="walk instances",
        show_progress=options.show_progress,
        debug=options.debug,
    )
    rows = []
    for t, outcome in enumerate(outcomes):
        rows.append(
            make_row(experiment_id, f"instance_{t}:{outcome.group}:strong", outcome.lhs, "le_bound", bound=outcome.rhs)
        )
        rows.append(
            make_row(
                experiment_id,
                f"instance_{t}:{outcome.group}:subspace",
                outcome.subspace,
                "le_bound",
                bound=outcome.subspace_bound,
            )
        )
    return rows


def _walk_custom(experiment_id: str, parameters: Mapping[str, Any]) -> list[ResultRow]:
    G = builtin_group(str(_require(parameters, "group", "walk-verify custom")))
    steps = tuple(from_mapping(G, dict(step)) for step in _require(parameters, "steps", "walk-verify custom"))
    walk = WalkInstance(G, steps)
    if "family" in parameters:
        family = [_subgroup(G, labels) for labels in parameters["family"]]
        report = normal_family_bound(walk, family)
    else:
        if "chain" in parameters:
            chain = quotient_chain(G, [_subgroup(G, labels) for labels in parameters["chain"]])
        else:
            chain = greedy_chain(G)
        report = strong_walk_bound(walk, chain)
    rows = [make_row(experiment_id, f"{G.name}:strong", report.lhs, "le_bound", bound=report.rhs)]
    if report.corollary_rhs is not None:
        rows.append(make_row(experiment_id, f"{G.name}:corollary", report.lhs, "le_bound", bound=report.corollary_rhs))
    for j, product in sorted(report.level_products.items()):
        rows.append(make_row(experiment_id, f"{G.name}:level_{j}:sigma_product", product, "flag"))
    return rows


def run_walk_verify(config: ExperimentConfig, options: RunOptions) -> list[ResultRow]:
    """Compare exact walk distances with the quotient-chain bounds.

    Input contract:
    - `parameters.mode` is `a5`, `dihedral`, `suite` or `custom`.

    Output contract:
    - One row per checked inequality or golden value.

    Side effects:
    - `suite` mode uses the worker pool.
    """

    parameters = config.parameters
    mode = parameters["mode"]
    if mode == "a5":
        return _walk_a5(config.experiment_id, parameters)
    if mode == "dihedral":
        return _walk_dihedral(config.experiment_id, parameters)
    if mode == "suite":
        return _walk_suite(config.experiment_id, parameters, config, options)
    if mode == "custom":
        return _walk_custom(config.experiment_id, parameters)
    raise ConfigInvalid(f"walk-verify: unknown mode {mode!r}")


# sigma-bound


@dataclass(frozen=True, slots=True)
class SigmaJob:
    seed: int
    groups: tuple[str, ...]
    abelian: bool


@dataclass(slots=True)
class SigmaOutcome:
    group: str
    sigma: float
    bound: float
    epsilon: float


def _sigma_worker(job: SigmaJob, start: int, stop: int) -> list[SigmaOutcome]:
    outcomes = []
    for t in range(start, stop):
        rng = stream(job.seed, 0, t)
        name = job.groups[int(rng.integers(len(job.groups)))]
        G = builtin_group(name)
        mu, epsilon = random_balanced_probability(G, rng)
        bound = sigma_bound_abelian(epsilon, G.exponent()) if job.abelian else sigma_bound_general(epsilon, G.order)
        outcomes.append(SigmaOutcome(name, full_operator_second_singular_value(mu), bound, epsilon))
    return outcomes


def run_sigma_bound(config: ExperimentConfig, options: RunOptions) -> list[ResultRow]:
    """Check measured second singular values against the balancedness bounds.

    Input contract:
    - `parameters.mode` is `abelian` (exponent bound) or `general` (order bound).
    - `parameters.groups` names built-in groups; abelian mode rejects others.

    Output contract:
    - One `le_bound` row per random measure, each drawn with `epsilon > 0`.
    - A `nontrivial_trials` row counting bounds strictly below 1.

    Side effects:
    - Uses the worker pool.
    """

    parameters = config.parameters
    mode = parameters["mode"]
    if mode not in ("abelian", "general"):
        raise ConfigInvalid(f"sigma-bound: unknown mode {mode!r}")
    groups = tuple(str(name) for name in parameters["groups"])
    if mode == "abelian":
        nonabelian = [name for name in groups if not builtin_group(name).is_abelian()]
        if nonabelian:
            raise ConfigInvalid(f"sigma-bound abelian: nonabelian groups {nonabelian}")
    outcomes = run_indexed(
        _sigma_worker,
        SigmaJob(config.seed, groups, mode == "abelian"),
        int(parameters["trials"]),
        threads=config.threads,
        label="random measures",
        show_progress=options.show_progress,
        debug=options.debug,
    )
    rows = [
        make_row(
            config.experiment_id,
            f"trial_{t}:{outcome.group}:eps={outcome.epsilon:.6g}",
            outcome.sigma,
            "le_bound",
            bound=outcome.bound,
        )
        for t, outcome in enumerate(outcomes)
    ]
    nontrivial = sum(1 for outcome in outcomes if outcome.bound < 1.0)
    rows.append(
        make_row(
            config.experiment_id,
            "nontrivial_trials",
            float(nontrivial),
            "equals",
            reference_value=float(len(outcomes)),
            bound=0.0,
        )
    )
    return rows


# moment-estimate


def run_moment_estimate(config: ExperimentConfig, options: RunOptions) -> list[ResultRow]:
    """Estimate `E[#Sur(coker M, G)]` for every `(model, case)` pair.

    Input contract:
    - `parameters.models` maps a model name to its sampler spec.
    - `parameters.cases` lists `{group, u}` mappings.

    Output contract:
    - One `within_3se` row per pair with reference `|G|^-u`; pair `k` in
      model-major order samples experiment stream `k`.

    Side effects:
    - Uses the worker pool.
    """

    parameters = config.parameters
    n = int(parameters["n"])
    samples = int(parameters["samples"])
    models = parameters["models"]
    if not isinstance(models, Mapping) or not models:
        raise ConfigInvalid("moment-estimate: `models` must be a nonempty mapping")
    rows = []
    experiment = 0
    for model_name, spec in models.items():
        for case in parameters["cases"]:
            G = parse_abelian(_require(case, "group", "moment-estimate case"))
            u = int(case.get("u", 0))
            model = build_model(spec, n, n + u)
            estimate = moment_estimate(
                model,
                G,
                u,
                samples,
                config.seed,
                threads=config.threads,
                experiment=experiment,
                show_progress=options.show_progress,
                debug=options.debug,
            )
            debug_log(
                options.debug,
                "moment_case",
                {"model": model_name, "group": G.key, "u": u, "mean": estimate.mean},
            )
            rows.append(
                make_row(
                    config.experiment_id,
                    f"{model_name}:{G.key}:u={u}",
                    estimate.mean,
                    "within_3se",
                    stderr=estimate.stderr,
                    reference_value=estimate.reference,
                )
            )
            experiment += 1
    return rows


# class-distribution


def run_class_distribution(config: ExperimentConfig, options: RunOptions) -> list[ResultRow]:
    """Tabulate cokernel classes modulo `a` against `lambda_u` masses.

    Input contract:
    - `parameters.classes` lists the classes checked at 3 standard errors
      (default: the trivial class); other observed classes are reported
      as informational rows.

    Output contract:
    - Rows per checked class, per other observed class, and a total that
      equals 1.

    Side effects:
    - Uses the worker pool.
    """

    parameters = config.parameters
    n, u, a = int(parameters["n"]), int(parameters["u"]), int(parameters["a"])
    samples = int(parameters["samples"])
    tol = float(parameters.get("tol", 1e-9))
    model = build_model(parameters["model"], n, n + u)
    table = cokernel_class_distribution(
        model,
        a,
        samples,
        config.seed,
        threads=config.threads,
        tol=tol,
        show_progress=options.show_progress,
        debug=options.debug,
    )
    checked = [parse_abelian(spec) for spec in parameters.get("classes", ["1"])]
    rows = []
    for H in checked:
        row = class_frequency(table, H, a, u, samples)
        rows.append(
            make_row(
                config.experiment_id,
                f"P[{H.key}]",
                row.frequency,
                "within_3se",
                stderr=row.stderr,
                reference_value=row.reference,
            )
        )
    for row in table:
        if row.group in checked:
            continue
        rows.append(
            make_row(
                config.experiment_id,
                f"P[{row.group.key}]:observed",
                row.frequency,
                "flag",
                stderr=row.stderr,
                reference_value=row.reference,
            )
        )
    rows.append(
        make_row(
            config.experiment_id,
            "total_frequency",
            sum(row.count for row in table) / samples,
            "equals",
            reference_value=1.0,
        )
    )
    return rows


# depth-census


def run_depth_census(config: ExperimentConfig, options: RunOptions) -> list[ResultRow]:
    """Exhaustive depth tallies against the count-depth bound.

    Input contract:
    - `parameters.groups` lists abelian groups of exponent dividing `a`.
    - `parameters.block_size` sets a contiguous row partition (default 1).

    Output contract:
    - One `le_bound` row per `(group, delta, D > 1)` and one row with the
      number of enumerated maps.

    Side effects:
    - None.
    """

    parameters = config.parameters
    n, a = int(parameters["n"]), int(parameters["a"])
    deltas = [float(d) for d in parameters["deltas"]]
    P = Partition.contiguous(n, int(parameters.get("block_size", 1)))
    rows = []
    for spec in parameters["groups"]:
        G = parse_abelian(spec)
        info_log(f"depth census over Hom((Z/{a})^{n}, {G.key})", color="cyan")
        censuses = depth_census(n, a, G, P, deltas)
        rows.append(
            make_row(
                config.experiment_id,
                f"{G.key}:maps",
                float(censuses[0].maps),
                "flag",
            )
        )
        for census in censuses:
            debug_log(options.debug, "depth_census", {"group": G.key, "delta": census.delta, "counts": census.counts})
            for D, count in sorted(census.counts.items()):
                if D == 1:
                    continue
                rows.append(
                    make_row(
                        config.experiment_id,
                        f"{G.key}:delta={census.delta}:D={D}",
                        float(count),
                        "le_bound",
                        bound=census.bounds[D],
                    )
                )
    return rows


# equidistribution


def _instance_images(instance: Mapping[str, Any], G: AbelianGroup, a: int) -> np.ndarray:
    f = _require(instance, "f", "equidistribution instance")
    return images_from_matrix(np.asarray(f, dtype=np.int64), G, a)


def _equidistribution_instance(
    experiment_id: str,
    position: int,
    instance: Mapping[str, Any],
) -> list[ResultRow]:
    G = parse_abelian(_require(instance, "group", "equidistribution instance"))
    a = int(instance.get("a", G.exponent))
    images = _instance_images(instance, G, a)
    n = len(images)
    model = build_model(_require(instance, "model", "equidistribution instance"), n, int(instance.get("r", 1)))
    check = instance.get("check", "gap")
    label = f"instance_{position}:{G.key}:{check}"
    epsilon = instance.get("epsilon")
    epsilon = None if epsilon is None else float(epsilon)
    if check == "gap":
        report = equidistribution_gap(
            images, model, G, a, float(instance["w"]), targets=instance.get("targets"), epsilon=epsilon
        )
        return [make_row(experiment_id, label, report.gap, "le_bound", bound=report.bound)]
    if check == "partition_depth":
        report = partition_depth_check(images, model, G, a, float(instance["delta"]), epsilon=epsilon)
        return [
            make_row(experiment_id, f"{label}:D={report.depth}", report.probability_zero, "le_bound", bound=report.bound)
        ]
    if check == "full_matrix":
        report = full_matrix_code_check(images, model, G, a, float(instance["w"]), epsilon=epsilon)
        rows = [
            make_row(experiment_id, f"{label}:x_{j}", abs(x), "le_bound", bound=b)
            for j, (x, b) in enumerate(zip(report.xs, report.block_bounds))
        ]
        if report.combination is not None:
            rows.append(
                make_row(
                    experiment_id,
                    f"{label}:combined",
                    report.exact_gap,
                    "equals",
                    reference_value=report.combination.product_gap,
                    bound=get_settings().tolerances.bound,
                )
            )
            rows.append(
                make_row(
                    experiment_id,
                    f"{label}:combined_bound",
                    abs(report.combination.product_gap),
                    "le_bound",
                    bound=report.combination.absolute_bound,
                )
            )
        return rows
    raise ConfigInvalid(f"equidistribution: unknown check {check!r}")


def run_equidistribution(config: ExperimentConfig, options: RunOptions) -> list[ResultRow]:
    """Exact equidistribution, partition-depth and error-combination checks.

    Input contract:
    - `parameters.instances` lists `{group, a, f, model, r, check, w | delta}`
      where `f` is the coordinate matrix of the map on generators.
    - `parameters.combinations` lists `x` vectors for the error-combination
      inequality.

    Output contract:
    - A map that fails its precondition yields one failed row instead of
      aborting the sweep.

    Side effects:
    - None.
    """

    parameters = config.parameters
    rows: list[ResultRow] = []
    for position, instance in enumerate(parameters["instances"]):
        try:
            rows.extend(_equidistribution_instance(config.experiment_id, position, instance))
        except PreconditionViolated as exc:
            debug_log(options.debug, "precondition_failed", {"instance": position, "error": str(exc)})
            rows.append(make_row(config.experiment_id, f"instance_{position}:precondition", 0.0, "flag", flag=False))
    for position, xs in enumerate(parameters.get("combinations", [])):
        try:
            combination = error_combination([float(x) for x in xs])
        except LabError as exc:
            debug_log(options.debug, "hypothesis_failed", {"combination": position, "error": str(exc)})
            rows.append(make_row(config.experiment_id, f"combination_{position}:hypothesis", 0.0, "flag", flag=False))
            continue
        rows.append(
            make_row(
                config.experiment_id,
                f"combination_{position}:upper",
                combination.product_gap,
                "le_bound",
                bound=combination.upper,
            )
        )
        rows.append(
            make_row(
                config.experiment_id,
                f"combination_{position}:lower",
                -combination.product_gap,
                "le_bound",
                bound=-combination.lower,
            )
        )
    return rows


class RunnerEntry(TypedDict):
    """Registry record for one command.

    Input contract:
    - `run`: callable taking the config and run options.
    - `description`: one-line summary for help output.

    Output contract:
    - Uniform runner signatures across commands.

    Side effects:
    - None.
    """

    run: Callable[[ExperimentConfig, RunOptions], list[ResultRow]]
    description: str


RUNNERS: dict[str, RunnerEntry] = {
    "walk-verify": {"run": run_walk_verify, "description": "walk distances against quotient-chain bounds"},
    "sigma-bound": {"run": run_sigma_bound, "description": "singular values against balancedness bounds"},
    "moment-estimate": {"run": run_moment_estimate, "description": "Monte-Carlo surjection moments of cokernels"},
    "class-distribution": {"run": run_class_distribution, "description": "cokernel classes against lambda_u masses"},
    "depth-census": {"run": run_depth_census, "description": "exhaustive depth tallies against the count bound"},
    "equidistribution": {"run": run_equidistribution, "description": "exact image laws of codes against their bounds"},
}


def run_experiment(config: ExperimentConfig, options: RunOptions | None = None) -> list[ResultRow]:
    """Dispatch one experiment to its command runner.

    Input contract:
    - `config` passed schema validation.

    Output contract:
    - Rows in a deterministic order fixed by the parameters.

    Side effects:
    - Logs the start and end of the run.
    """

    options = options or RunOptions()
    entry = RUNNERS.get(config.command)
    if entry is None:
        raise ConfigInvalid(f"unknown command {config.command!r}")
    debug_log(
        options.debug,
        "experiment_start",
        {"id": config.experiment_id, "command": config.command, "seed": config.seed, "threads": config.threads},
    )
    rows = entry["run"](config, options)
    debug_log(options.debug, "experiment_done", {"id": config.experiment_id, "rows": len(rows)})
    return rows
