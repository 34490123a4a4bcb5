"""Convolution operators, singular spectra and balancedness.

Rules for this layer:
- The operator of a measure `mu` is `nu -> nu * mu` in the Dirac basis.
- Singular values keep multiplicity; the second largest of a 1x1 operator
  is 0.
- Functions are pure; LAPACK may thread internally but results depend only
  on the input matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sympy import primefactors

from config.loader import get_settings
from core.errors import DimensionCap, PreconditionViolated
from core.groups import FiniteGroup, generated_subgroup, subgroup_as_group, subgroup_lattice, whole_group
from core.measures import SignedMeasure, coset_masses, is_probability, random_probability
from core.types import SpectralReport

FUNCTIONAL_CHUNK = 1024


@dataclass(frozen=True, slots=True)
class DenseMatrix:
    """Dense real matrix with finite entries."""

    entries: np.ndarray

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return self.entries @ vector


def convolution_matrix(mu: SignedMeasure) -> DenseMatrix:
    """Return the matrix `M[g, h] = mu(h^-1 g)` of `nu -> nu * mu`.

    Input contract:
    - `mu` is any signed measure.

    Output contract:
    - `M @ nu.weights == convolve(nu, mu).weights`.

    Side effects:
    - None.
    """

    G = mu.group
    span = np.arange(G.order)
    quotient_index = G.table[G.inverse[None, :], span[:, None]]
    return DenseMatrix(entries=mu.weights[quotient_index])


def singular_values(M: DenseMatrix | np.ndarray, cap: int | None = None) -> np.ndarray:
    """Return singular values in descending order.

    Input contract:
    - `M` is square with side at most `cap` (default from settings).

    Output contract:
    - Descending array, multiplicity kept.

    Side effects:
    - None.
    """

    entries = M.entries if isinstance(M, DenseMatrix) else np.asarray(M, dtype=np.float64)
    limit = cap if cap is not None else get_settings().caps.svd_dimension
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise PreconditionViolated(f"expected a square matrix, got shape {entries.shape}")
    if entries.shape[0] > limit:
        raise DimensionCap(f"matrix side {entries.shape[0]} exceeds cap {limit}")
    if not np.isfinite(entries).all():
        raise PreconditionViolated("matrix entries must be finite")
    return np.linalg.svd(entries, compute_uv=False)


def second_singular_value(mu: SignedMeasure, restrict: bool = True) -> SpectralReport:
    """Second-largest singular value of `* mu`.

    Input contract:
    - `mu` is a probability measure.
    - `restrict=True` acts on `L2(<supp mu>)`; `False` acts on all of `L2(G)`.

    Output contract:
    - `SpectralReport` with `subgroup_used` the space the operator acts on.

    Side effects:
    - None.
    """

    if not is_probability(mu):
        raise PreconditionViolated("second singular value needs a probability measure")
    G = mu.group
    H = generated_subgroup(G, mu.support()) if restrict else whole_group(G)
    local = subgroup_as_group(H)
    restricted = SignedMeasure(local, mu.weights[H.as_array()])
    values = singular_values(convolution_matrix(restricted))
    second = float(values[1]) if values.size > 1 else 0.0
    return SpectralReport(
        singular_values=[float(v) for v in values],
        second_largest=second,
        subgroup_used=H,
    )


def epsilon_balanced(mu: SignedMeasure, cap: int | None = None) -> float:
    """Return `1 - max mu(gH)` over proper subgroups `H` and cosets `gH`.

    Input contract:
    - `mu` is a probability measure; `|G|` within the lattice cap.

    Output contract:
    - Scans maximal subgroups only, since coset mass grows with the
      subgroup; the trivial group gives 1.

    Side effects:
    - May fill the subgroup-lattice cache.
    """

    lattice = subgroup_lattice(mu.group, cap=cap)
    heaviest = max(
        (float(coset_masses(mu, H).max()) for H in lattice.maximal()),
        default=0.0,
    )
    return 1.0 - heaviest


def epsilon_balanced_coordinates(
    points: np.ndarray,
    probs: np.ndarray,
    moduli: Sequence[int],
) -> float:
    """Balancedness of a law on `Z/d1 x ... x Z/dk` given by its atoms.

    Input contract:
    - `points` is an `(N, k)` integer array of coordinates, `probs` their
      masses, `moduli` the cyclic orders.

    Output contract:
    - `1 - max` coset mass over index-`p` subgroups, i.e. over the fibres of
      every nonzero functional `x -> sum c_i x_i mod p` for primes `p`
      dividing some modulus.

    Side effects:
    - None.
    """

    points = np.asarray(points, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    primes = sorted({p for d in moduli for p in primefactors(d)})
    heaviest = 0.0
    for p in primes:
        active = [i for i, d in enumerate(moduli) if d % p == 0]
        coords = points[:, active] % p
        total = p ** len(active)
        for start in range(1, total, FUNCTIONAL_CHUNK):
            codes = np.arange(start, min(start + FUNCTIONAL_CHUNK, total))
            functionals = np.stack(np.unravel_index(codes, (p,) * len(active)), axis=1)
            values = (coords @ functionals.T) % p
            offsets = values + p * np.arange(len(codes))[None, :]
            masses = np.bincount(
                offsets.ravel(),
                weights=np.repeat(probs, len(codes)),
                minlength=p * len(codes),
            )
            heaviest = max(heaviest, float(masses.max()))
    return 1.0 - heaviest if primes else 1.0


def random_balanced_probability(
    G: FiniteGroup, rng: np.random.Generator
) -> tuple[SignedMeasure, float]:
    """Draw a random-support probability with `epsilon > tolerances.measure`.

    Input contract:
    - `rng` is consumed; supports are redrawn until the measure puts mass
      outside every coset of every maximal subgroup.

    Output contract:
    - Returns the measure and its clipped `epsilon` in `(0, 1]`.

    Side effects:
    - May fill the subgroup-lattice cache.
    """

    floor = get_settings().tolerances.measure
    while True:
        size = int(rng.integers(1, G.order + 1))
        mu = random_probability(G, rng, rng.choice(G.order, size=size, replace=False))
        epsilon = min(1.0, epsilon_balanced(mu))
        if epsilon > floor:
            return mu, epsilon


def _check_epsilon(epsilon: float) -> None:
    if not -1e-12 <= epsilon <= 1.0 + 1e-12:
        raise PreconditionViolated(f"epsilon must lie in [0, 1], got {epsilon}")


def sigma_bound_general(epsilon: float, group_order: int) -> float:
    """Return `exp(-eps / (2 |G|^3))`."""

    _check_epsilon(epsilon)
    return math.exp(-epsilon / (2.0 * group_order**3))


def sigma_bound_abelian(epsilon: float, a: int) -> float:
    """Return `exp(-eps / a^2)` for abelian groups of exponent dividing `a`."""

    _check_epsilon(epsilon)
    if a < 1:
        raise PreconditionViolated(f"exponent must be positive, got {a}")
    return math.exp(-epsilon / a**2)


def full_operator_second_singular_value(mu: SignedMeasure) -> float:
    """Second singular value of `* mu` on all of `L2(G)`; 1 when `supp mu` is proper."""

    return second_singular_value(mu, restrict=False).second_largest
