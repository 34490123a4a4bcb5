"""Shared report and record types for the cokernel-walks layers.

All cross-layer data contracts are defined here to keep module boundaries
explicit and avoid ad-hoc dictionary payloads. Math objects (groups, measures,
matrices) live with their kernels; this module only holds results passed
between layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Literal

if TYPE_CHECKING:
    from core.groups import Subgroup
    from core.measures import SignedMeasure

JSONDict = dict[str, Any]
CommandName = Literal[
    "walk-verify",
    "sigma-bound",
    "moment-estimate",
    "class-distribution",
    "depth-census",
    "equidistribution",
]
ComparisonRule = Literal["le_bound", "within_3se", "equals", "flag"]


@dataclass(slots=True)
class ValidationResult:
    """Validation-only response from the validator layer.

    Input contract:
    - `violations` lists axiom or contract violations, empty when valid.

    Output contract:
    - Carries no construction state.

    Side effects:
    - None.
    """

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(slots=True)
class SubspaceProjection:
    """Orthogonal projection of a measure onto the coset-uniform subspace.

    Input contract:
    - `projected` is uniform on every left coset of `subgroup`.
    - `residual_norm` is the L2 distance from the source measure to `projected`.

    Output contract:
    - Consumed by walk bounds and projection tests.

    Side effects:
    - None.
    """

    subgroup: Subgroup
    projected: SignedMeasure
    residual_norm: float


@dataclass(slots=True)
class SpectralReport:
    """Singular spectrum of one convolution operator.

    Input contract:
    - `singular_values` is sorted descending, multiplicity kept.
    - `second_largest` equals `singular_values[1]`, or 0 for a 1x1 operator.
    - `subgroup_used` is the subgroup whose L2 space the operator acts on.

    Output contract:
    - Serializable through `to_json`.

    Side effects:
    - None.
    """

    singular_values: list[float]
    second_largest: float
    subgroup_used: Subgroup

    def to_json(self) -> JSONDict:
        return {
            "singular_values": list(self.singular_values),
            "second_largest": self.second_largest,
            "subgroup_order": self.subgroup_used.order,
            "subgroup_elements": list(self.subgroup_used.elements),
        }


@dataclass(slots=True)
class BoundReport:
    """Exact walk distance against a quotient-chain mixing bound.

    Input contract:
    - `lhs` is the exact squared L2 distance of the walk to uniform.
    - `rhs` is the squared-sum bound, `math.inf` when infeasible.
    - `step_classification` maps level `j` (1-based) to the steps in `I_j`.
    - `per_step_sigma` maps step `i` (1-based) to its sigma at its level.
    - `level_products` maps `j` to the product of squared sigmas in `I_j`.
    - `corollary_rhs` is the squared subadditive bound, when computed.

    Output contract:
    - `holds` is true when infeasible or `lhs <= rhs + tolerance`.

    Side effects:
    - None.
    """

    lhs: float
    rhs: float
    step_classification: dict[int, list[int]]
    per_step_sigma: dict[int, float]
    feasible: bool
    level_products: dict[int, float] = field(default_factory=dict)
    corollary_rhs: float | None = None

    def holds(self, tolerance: float = 1e-8) -> bool:
        if not self.feasible:
            return True
        return self.lhs <= self.rhs + tolerance

    def to_json(self) -> JSONDict:
        return {
            "lhs": self.lhs,
            "rhs": None if math.isinf(self.rhs) else self.rhs,
            "feasible": self.feasible,
            "step_classification": {str(k): v for k, v in self.step_classification.items()},
            "per_step_sigma": {str(k): v for k, v in self.per_step_sigma.items()},
            "level_products": {str(k): v for k, v in self.level_products.items()},
            "corollary_rhs": self.corollary_rhs,
        }


@dataclass(slots=True)
class DepthReport:
    """Depth of one homomorphism with respect to a block partition.

    Input contract:
    - `depth` is the maximal qualifying index, 1 when none qualifies.
    - `witness` lists the removed block indices achieving `depth`.
    - `index` is `[G : f(V_rest)]` for the witness.
    - `ell_d` counts prime factors of `depth` with multiplicity.

    Output contract:
    - Tallied by depth censuses.

    Side effects:
    - None.
    """

    map_id: int
    depth: int
    witness: tuple[int, ...]
    index: int
    ell_d: int


@dataclass(slots=True)
class ResultRow:
    """One CSV result row of an experiment.

    Input contract:
    - `rule` declares how `passed` derives from the numeric fields.

    Output contract:
    - Field order matches the CSV column order.

    Side effects:
    - None.
    """

    experiment_id: str
    statistic_name: str
    value: float
    stderr: float | None = None
    reference_value: float | None = None
    bound: float | None = None
    passed: bool = True
    rule: ComparisonRule = "flag"


@dataclass(slots=True)
class RunLogRecord:
    """Stable machine-readable provenance schema.

    Input contract:
    - Every field must be JSON-serializable.

    Output contract:
    - Written as the JSON sidecar and appended as one JSONL ledger line.

    Side effects:
    - None.
    """

    schema_version: Literal["1.0"]
    timestamp_utc: str
    git_revision: str | None
    experiment_id: str
    command: str
    seed: int
    threads: int
    rows: int
    failed_rows: int
    config: JSONDict
