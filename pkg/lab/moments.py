"""Monte-Carlo moments and class frequencies of random cokernels.

Per-sample values are exact integers; sums are taken over Python ints and
`Fraction`s in sample-index order before converting to floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from core.abelian import AbelianGroup, lambda_u_tensor_mass, sur_count, tensor_mod
from core.errors import PreconditionViolated
from core.intlinalg import cokernel_mod_local
from lab.batch import run_indexed
from lab.models import BalancedMatrixModel, sample_matrix, stream


@dataclass(frozen=True, slots=True)
class SamplingJob:
    """Everything a worker needs to reproduce a slice of samples."""

    model: BalancedMatrixModel
    a: int
    seed: int
    experiment: int
    target: AbelianGroup | None = None


def _cokernel_at(job: SamplingJob, index: int) -> AbelianGroup:
    matrix = sample_matrix(job.model, stream(job.seed, job.experiment, index))
    return cokernel_mod_local(matrix, job.a)


def _surjection_counts(job: SamplingJob, start: int, stop: int) -> list[int]:
    if job.target is None:
        raise PreconditionViolated("surjection counts need a target group")
    return [sur_count(_cokernel_at(job, i), job.target) for i in range(start, stop)]


def _cokernel_classes(job: SamplingJob, start: int, stop: int) -> list[AbelianGroup]:
    return [tensor_mod(_cokernel_at(job, i), job.a) for i in range(start, stop)]


@dataclass(slots=True)
class MomentEstimate:
    mean: float
    stderr: float
    samples_used: int
    reference: float
    exact_mean: Fraction


def mean_and_stderr(values: list[int]) -> tuple[Fraction, float]:
    """Exact sample mean and the standard error of the mean."""

    count = len(values)
    if count == 0:
        raise PreconditionViolated("no samples to summarize")
    total = sum(values)
    mean = Fraction(total, count)
    if count == 1:
        return mean, 0.0
    squares = sum(v * v for v in values)
    variance = (Fraction(squares) - Fraction(total * total, count)) / (count - 1)
    return mean, math.sqrt(float(variance) / count)


def moment_estimate(
    model: BalancedMatrixModel,
    G: AbelianGroup,
    u: int,
    num_samples: int,
    seed: int,
    threads: int = 1,
    experiment: int = 0,
    show_progress: bool = False,
    debug: bool = False,
) -> MomentEstimate:
    """Estimate `E[#Sur(coker M, G)]` and compare with `|G|^-u`.

    Input contract:
    - `model` is `n x (n + u)`; `G` finite.

    Output contract:
    - Cokernels are computed modulo `a = exponent(G)`, through which every
      surjection onto `G` factors. Deterministic given `seed`.

    Side effects:
    - Uses the worker pool when `threads > 1`.
    """

    if model.n_cols - model.n_rows != u:
        raise PreconditionViolated(f"model is {model.n_rows}x{model.n_cols}, expected corank u = {u}")
    reference = float(Fraction(1, G.order**u))
    if G.order == 1:
        return MomentEstimate(1.0, 0.0, num_samples, 1.0, Fraction(1))
    job = SamplingJob(model=model, a=G.exponent, seed=seed, experiment=experiment, target=G)
    values = run_indexed(
        _surjection_counts,
        job,
        num_samples,
        threads=threads,
        label=f"moment {G.key}",
        show_progress=show_progress,
        debug=debug,
    )
    mean, stderr = mean_and_stderr(values)
    return MomentEstimate(float(mean), stderr, len(values), reference, mean)


def uniform_entry_moment(n: int, u: int, G: AbelianGroup) -> Fraction:
    """Exact `E[#Sur(coker M, G)]` for uniform entries modulo `exponent(G)`.

    Every surjection `f: (Z/a)^n -> G` sends a uniform matrix to a uniform
    element of `G^(n+u)`, so the moment is `#Sur((Z/a)^n, G) |G|^-(n+u)`.
    """

    surjections = sur_count(AbelianGroup.from_cyclic([G.exponent] * n), G)
    return Fraction(surjections, G.order ** (n + u))


@dataclass(slots=True)
class ClassFrequency:
    group: AbelianGroup
    count: int
    frequency: float
    stderr: float
    reference: float


def cokernel_class_distribution(
    model: BalancedMatrixModel,
    a: int,
    samples: int,
    seed: int,
    threads: int = 1,
    experiment: int = 0,
    tol: float = 1e-9,
    show_progress: bool = False,
    debug: bool = False,
) -> list[ClassFrequency]:
    """Tabulate `coker(M) (x) Z/a` classes with their `lambda_u` reference masses.

    Input contract:
    - `a >= 2`; `u = n_cols - n_rows >= 0`.

    Output contract:
    - One entry per observed class, ordered by group order then key;
      frequencies sum to 1.

    Side effects:
    - Uses the worker pool when `threads > 1`.
    """

    if a < 2:
        raise PreconditionViolated(f"modulus must be at least 2, got {a}")
    u = model.n_cols - model.n_rows
    if u < 0:
        raise PreconditionViolated("class distribution needs n_cols >= n_rows")
    job = SamplingJob(model=model, a=a, seed=seed, experiment=experiment)
    classes = run_indexed(
        _cokernel_classes,
        job,
        samples,
        threads=threads,
        label=f"classes mod {a}",
        show_progress=show_progress,
        debug=debug,
    )
    counts: dict[AbelianGroup, int] = {}
    for group in classes:
        counts[group] = counts.get(group, 0) + 1
    table = []
    for group in sorted(counts, key=lambda H: (H.order, H.key)):
        p = counts[group] / samples
        table.append(
            ClassFrequency(
                group=group,
                count=counts[group],
                frequency=p,
                stderr=math.sqrt(p * (1.0 - p) / samples),
                reference=lambda_u_tensor_mass(a, group, u, tol),
            )
        )
    return table


def class_frequency(table: list[ClassFrequency], H: AbelianGroup, a: int, u: int, samples: int) -> ClassFrequency:
    """Row for `H`, synthesized with count 0 when `H` was never observed."""

    for row in table:
        if row.group == H:
            return row
    reference = lambda_u_tensor_mass(a, H, u)
    return ClassFrequency(H, 0, 0.0, math.sqrt(reference * (1.0 - reference) / samples), reference)
