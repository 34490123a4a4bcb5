"""Sampler registry mapping family names to builders."""

from __future__ import annotations

from typing import Any, Callable, Mapping, TypedDict

from core.errors import ConfigInvalid
from samplers.base import BlockSampler
from samplers.iid import IidSampler, uniform_iid
from samplers.row_duplicate import RowDuplicateSampler
from samplers.shared_shift import DEFAULT_SHIFT_RANGE, SharedShiftSampler


class SamplerEntry(TypedDict):
    """Registry record for one sampler family.

    Input contract:
    - `build`: callable accepting the family's config mapping.
    - `description`: one-line summary for manifests.

    Output contract:
    - Uniform builder signatures across families.

    Side effects:
    - None.
    """

    build: Callable[[Mapping[str, Any]], BlockSampler]
    description: str


def _entry_law(spec: Mapping[str, Any], prefix: str = "") -> IidSampler:
    if spec.get(f"{prefix}uniform") is not None:
        return uniform_iid(int(spec[f"{prefix}uniform"]))
    try:
        values = tuple(int(v) for v in spec[f"{prefix}values"])
        probs = tuple(float(p) for p in spec[f"{prefix}probs"])
    except KeyError as exc:
        raise ConfigInvalid(f"sampler is missing field {exc.args[0]!r}") from exc
    return IidSampler(values=values, probs=probs)


def _build_iid(spec: Mapping[str, Any]) -> BlockSampler:
    return _entry_law(spec)


def _build_shared_shift(spec: Mapping[str, Any]) -> BlockSampler:
    return SharedShiftSampler(
        base=_entry_law(spec),
        shift_range=int(spec.get("shift_range", DEFAULT_SHIFT_RANGE)),
    )


def _build_row_duplicate(spec: Mapping[str, Any]) -> BlockSampler:
    return RowDuplicateSampler(row=_entry_law(spec, "row_"), noise=_entry_law(spec))


SAMPLERS: dict[str, SamplerEntry] = {
    "iid": {
        "build": _build_iid,
        "description": "independent entries from a finite law",
    },
    "shared_shift": {
        "build": _build_shared_shift,
        "description": "iid entries plus one uniform offset per block",
    },
    "row_duplicate": {
        "build": _build_row_duplicate,
        "description": "one random row repeated down the block plus iid noise",
    },
}


def build_sampler(spec: Mapping[str, Any]) -> BlockSampler:
    """Build a sampler from `{"family": ..., <family fields>}`."""

    family = spec.get("family", "iid")
    entry = SAMPLERS.get(family)
    if entry is None:
        raise ConfigInvalid(f"unknown sampler family {family!r}; known: {sorted(SAMPLERS)}")
    return entry["build"](spec)
