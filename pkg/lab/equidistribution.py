"""Exact image laws `f(M)` of small balanced matrices and their error bounds.

The image of an `n x r` matrix under `f: (Z/a)^n -> G` is a sum over blocks
`f(M[P_i, Q_j])` of independent steps in `G^r`, so its law is the
convolution of the block image laws. Everything here is exact enumeration;
caps keep it to desk-sized instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from config.loader import get_settings
from core.abelian import AbelianGroup, coordinate_group
from core.errors import CapExceeded, HypothesisViolated, PreconditionViolated
from core.groups import FiniteGroup, subgroup_lattice
from core.measures import SignedMeasure, convolve, dirac
from lab.codes import SpanIndex, depth, is_code
from lab.models import BalancedMatrixModel


def _coordinates(images: np.ndarray, G: AbelianGroup) -> np.ndarray:
    """Coordinates `(n, k)` of generator images in `G.realize()`."""

    moduli = G.invariant_factors
    if not moduli:
        return np.zeros((len(images), 0), dtype=np.int64)
    return np.stack(np.unravel_index(np.asarray(images), moduli), axis=1).astype(np.int64)


def _power_group(G: AbelianGroup, r: int) -> tuple[FiniteGroup, tuple[int, ...]]:
    moduli = tuple(G.invariant_factors) * r
    cap = get_settings().caps.svd_dimension
    if G.order**r > cap:
        raise CapExceeded(f"|G|^r = {G.order**r} exceeds dense cap {cap}")
    return coordinate_group(moduli), moduli


def exact_image_law(
    images: np.ndarray,
    model: BalancedMatrixModel,
    G: AbelianGroup,
) -> SignedMeasure:
    """Law of `f(M)` on `G^r`, `r = model.n_cols`, by convolving block steps.

    Input contract:
    - `images` has one entry per row of `model`; block laws are enumerable.

    Output contract:
    - Probability measure on `coordinate_group(G.invariant_factors * r)`;
      column `c` of the image occupies coordinates `c*k .. c*k+k-1`.

    Side effects:
    - None.
    """

    if len(images) != model.n_rows:
        raise PreconditionViolated("one generator image per matrix row is required")
    r = model.n_cols
    power, moduli = _power_group(G, r)
    coords = _coordinates(images, G)
    k = coords.shape[1]
    cap = get_settings().caps.equidistribution_outcomes
    law = dirac(power)
    if k == 0:
        return law
    spent = 0
    for i, j, rows, cols in model.blocks():
        points, probs = model.block_sampler(i, j).outcomes((len(rows), len(cols)), cap)
        spent += len(probs)
        if spent > cap:
            raise CapExceeded(f"{spent} enumerated block outcomes exceed cap {cap}")
        blocks = points.reshape(len(probs), len(rows), len(cols))
        # column images: sum_k X[k, c] f(e_k) in coordinates
        column_images = np.einsum("brc,rk->bck", blocks, coords[list(rows)])
        full = np.zeros((len(probs), r, k), dtype=np.int64)
        full[:, list(cols), :] = column_images
        flat = np.mod(full.reshape(len(probs), r * k), np.asarray(moduli))
        index = np.ravel_multi_index(tuple(flat.T), moduli)
        step = SignedMeasure(power, np.bincount(index, weights=probs, minlength=power.order))
        law = convolve(law, step)
    return law


def _target_index(G: AbelianGroup, targets: Sequence[int] | None, r: int) -> int | None:
    if targets is None:
        return None
    if len(targets) != r:
        raise PreconditionViolated(f"expected {r} targets, got {len(targets)}")
    coords = _coordinates(np.asarray(targets), G).reshape(-1)
    moduli = tuple(G.invariant_factors) * r
    return int(np.ravel_multi_index(tuple(coords), moduli)) if moduli else 0


@dataclass(slots=True)
class EquidistributionReport:
    """Exact distance of `f(M)` from uniform against the code bound."""

    gap: float
    bound: float
    epsilon: float
    code_distance: float
    subgroup_count: int
    max_block: int

    @property
    def passed(self) -> bool:
        return self.gap <= self.bound + get_settings().tolerances.bound


def equidistribution_bound(epsilon: float, w: float, max_block: int, subgroups: int, a: int) -> float:
    """`N exp(-eps w / (l N a^2))`."""

    return subgroups * math.exp(-epsilon * w / (max_block * subgroups * a**2))


def equidistribution_gap(
    images: np.ndarray,
    model: BalancedMatrixModel,
    G: AbelianGroup,
    a: int,
    w: float,
    targets: Sequence[int] | None = None,
    epsilon: float | None = None,
) -> EquidistributionReport:
    """Compare `|P[f(M) = g] - |G|^-r|` with the code equidistribution bound.

    Input contract:
    - `f` is a code of distance `w < n` for the model's row partition.
    - `targets` fixes `g`; by default the worst `g` in `G^r` is reported.
    - `epsilon` defaults to the model's declared block balancedness over `Z/a`.

    Output contract:
    - `gap` is exact up to floating-point convolution error.

    Side effects:
    - None.
    """

    P = model.row_partition
    if not w < model.n_rows:
        raise PreconditionViolated(f"code distance {w} must be below n = {model.n_rows}")
    if not is_code(images, P, w, G):
        raise PreconditionViolated(f"map is not a code of distance {w} for the row partition")
    law = exact_image_law(images, model, G)
    uniform_mass = 1.0 / law.group.order
    target = _target_index(G, targets, model.n_cols)
    deviations = np.abs(law.weights - uniform_mass)
    gap = float(deviations.max() if target is None else deviations[target])
    eps = model.declared_epsilon(a) if epsilon is None else epsilon
    subgroups = len(subgroup_lattice(G.realize()))
    return EquidistributionReport(
        gap=gap,
        bound=equidistribution_bound(eps, w, P.max_block, subgroups, a),
        epsilon=eps,
        code_distance=w,
        subgroup_count=subgroups,
        max_block=P.max_block,
    )


@dataclass(slots=True)
class ErrorCombination:
    """`prod (1 + x_i) - 1` against its one- and two-sided bounds."""

    product_gap: float
    lower: float
    upper: float
    absolute_bound: float

    @property
    def holds(self) -> bool:
        slack = get_settings().tolerances.bound
        return (
            self.lower - slack <= self.product_gap <= self.upper + slack
            and abs(self.product_gap) <= self.absolute_bound + slack
        )


def error_combination(xs: Sequence[float]) -> ErrorCombination:
    """Evaluate `prod (1 + x_i) - 1` with `sum min(0, x) <= . <= 2 sum max(0, x)`.

    Input contract:
    - Every `x_i >= -1` and `sum max(0, x_i) <= log 2`.

    Output contract:
    - `absolute_bound = 2 sum |x_i|`.

    Side effects:
    - None.
    """

    values = [float(x) for x in xs]
    if any(x < -1.0 for x in values):
        raise HypothesisViolated("every x_i must be at least -1")
    positive = sum(max(0.0, x) for x in values)
    if positive > math.log(2.0):
        raise HypothesisViolated(f"sum of positive parts {positive} exceeds log 2")
    return ErrorCombination(
        product_gap=math.prod(1.0 + x for x in values) - 1.0,
        lower=sum(min(0.0, x) for x in values),
        upper=2.0 * positive,
        absolute_bound=2.0 * sum(abs(x) for x in values),
    )


@dataclass(slots=True)
class PartitionDepthReport:
    """Exact `P[f(M) = 0]` for a deep map against the depth bound."""

    depth: int
    probability_zero: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.probability_zero <= self.bound + get_settings().tolerances.bound


def partition_depth_check(
    images: np.ndarray,
    model: BalancedMatrixModel,
    G: AbelianGroup,
    a: int,
    delta: float,
    epsilon: float | None = None,
) -> PartitionDepthReport:
    """Check `P[f(M) = 0] <= (1 - eps)(D^r |G|^-r + N exp(-eps delta n / (2 N l a^2)))`.

    Input contract:
    - `f` has depth `D > 1` and `[G : f(V)] < D`.

    Output contract:
    - Exact probability from `exact_image_law`.

    Side effects:
    - None.
    """

    P = model.row_partition
    spans = SpanIndex(G.realize())
    report = depth(images, P, delta, G, spans=spans)
    if report.depth <= 1 or spans.index(images.tolist()) >= report.depth:
        raise PreconditionViolated("map needs depth D > 1 with image index below D")
    law = exact_image_law(images, model, G)
    eps = model.declared_epsilon(a) if epsilon is None else epsilon
    subgroups = len(subgroup_lattice(G.realize()))
    r = model.n_cols
    n = model.n_rows
    tail = subgroups * math.exp(-eps * delta * n / (2 * subgroups * P.max_block * a**2))
    bound = (1.0 - eps) * (float(report.depth) ** r / float(G.order) ** r + tail)
    return PartitionDepthReport(
        depth=report.depth,
        probability_zero=float(law.weights[0]),
        bound=bound,
    )


@dataclass(slots=True)
class FullMatrixReport:
    """Per-column-block deviations `x_j` of a code and their combination."""

    xs: list[float]
    block_bounds: list[float]
    combination: ErrorCombination | None
    exact_gap: float

    @property
    def passed(self) -> bool:
        slack = get_settings().tolerances.bound
        within = all(abs(x) <= b + slack for x, b in zip(self.xs, self.block_bounds))
        combined = self.combination is None or (
            self.combination.holds and abs(self.combination.product_gap - self.exact_gap) <= slack
        )
        return within and combined


def full_matrix_code_check(
    images: np.ndarray,
    model: BalancedMatrixModel,
    G: AbelianGroup,
    a: int,
    w: float,
    epsilon: float | None = None,
) -> FullMatrixReport:
    """Split `|G|^m P[f(M) = 0] - 1` over independent column blocks.

    Input contract:
    - `f` is a code of distance `w` for the model's row partition.

    Output contract:
    - `x_j = |G|^{#Q_j} P[f(M_j) = 0] - 1`, each against the code bound
      scaled by `|G|^{#Q_j}`; `exact_gap` is computed on the whole matrix.
      `combination` is `None` when the positive parts exceed `log 2`.

    Side effects:
    - None.
    """

    P = model.row_partition
    if not is_code(images, P, w, G):
        raise PreconditionViolated(f"map is not a code of distance {w} for the row partition")
    eps = model.declared_epsilon(a) if epsilon is None else epsilon
    subgroups = len(subgroup_lattice(G.realize()))
    per_block = equidistribution_bound(eps, w, P.max_block, subgroups, a)
    xs: list[float] = []
    block_bounds: list[float] = []
    for cols in model.col_partition.blocks:
        law = exact_image_law(images, model.restrict_columns(list(cols)), G)
        scale = float(G.order) ** len(cols)
        xs.append(scale * float(law.weights[0]) - 1.0)
        block_bounds.append(scale * per_block)
    whole = exact_image_law(images, model, G)
    exact_gap = float(G.order) ** model.n_cols * float(whole.weights[0]) - 1.0
    try:
        combination: ErrorCombination | None = error_combination(xs)
    except HypothesisViolated:
        combination = None
    return FullMatrixReport(xs=xs, block_bounds=block_bounds, combination=combination, exact_gap=exact_gap)
