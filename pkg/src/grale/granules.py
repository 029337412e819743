"""Equivalence-class extents and support-thresholded granule enumeration.

A descriptor is a conjunction of attribute-value pairs; its extent is the
set of objects agreeing with every pair, i.e. an equivalence class of the
relation induced by the descriptor's attribute subset. Enumeration is
levelwise: extents only shrink as pairs are added, so any superset of a
below-threshold descriptor can be pruned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FLAG, FLAG_TRUE, InformationSystem, SchemaMismatchError


@dataclass(frozen=True)
class Descriptor:
    """Conjunction of (attribute index, value code) pairs.

    At most one pair per attribute, stored in ascending attribute order.
    The empty descriptor denotes the whole universe.
    """

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple((int(a), int(v)) for a, v in self.pairs)
        if any(pairs[i][0] >= pairs[i + 1][0] for i in range(len(pairs) - 1)):
            pairs = tuple(sorted(pairs))
        attrs = [a for a, _ in pairs]
        if len(set(attrs)) != len(attrs):
            raise ValueError(f"descriptor repeats an attribute: {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, *pairs) -> "Descriptor":
        return cls(tuple(pairs))

    @property
    def is_empty(self) -> bool:
        return not self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def attributes(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.pairs)

    def extended(self, attr: int, code: int) -> "Descriptor":
        return Descriptor(self.pairs + ((attr, code),))

    def sub_descriptors(self):
        """All descriptors obtained by dropping exactly one pair."""
        return [
            Descriptor(self.pairs[:i] + self.pairs[i + 1 :])
            for i in range(len(self.pairs))
        ]

    def to_text(self, system: InformationSystem) -> str:
        """Render as `attr=value&attr=value`; `*` is the empty descriptor."""
        if not self.pairs:
            return "*"
        return "&".join(
            f"{system.attributes[a].name}={system.attributes[a].domain[v]}"
            for a, v in self.pairs
        )

    @classmethod
    def parse(cls, text: str, system: InformationSystem) -> "Descriptor":
        text = text.strip()
        if text == "*":
            return cls()
        pairs = []
        for chunk in text.split("&"):
            name, _, label = chunk.partition("=")
            if not _:
                raise ValueError(f"malformed descriptor chunk {chunk!r}")
            a = system.attribute_index(name)
            pairs.append((a, system.attributes[a].code_of(label)))
        return cls(tuple(pairs))


def validate_descriptor(system: InformationSystem, d: Descriptor) -> None:
    for a, v in d.pairs:
        if not 0 <= a < system.m:
            raise SchemaMismatchError(f"descriptor references attribute index {a}, "
                                      f"system has {system.m} attributes")
        attr = system.attributes[a]
        if not 0 <= v < attr.size:
            raise SchemaMismatchError(
                f"descriptor value code {v} is outside the domain of {attr.name!r}"
            )
        if attr.kind == FLAG and v != FLAG_TRUE:
            raise SchemaMismatchError(
                f"flag attribute {attr.name!r} admits only the positive value "
                f"in descriptors"
            )


def extent_mask(system: InformationSystem, d: Descriptor) -> np.ndarray:
    """Boolean membership mask of the descriptor's extent."""
    validate_descriptor(system, d)
    masks = system.value_masks()
    out = np.ones(system.n, dtype=bool)
    for a, v in d.pairs:
        out &= masks[a][v]
    return out


def extent(system: InformationSystem, d: Descriptor) -> frozenset:
    """Objects agreeing with every pair of `d`; everything for the empty one."""
    return frozenset(np.nonzero(extent_mask(system, d))[0].tolist())


def support(system: InformationSystem, d: Descriptor) -> float:
    """|extent| / |universe|."""
    if system.n == 0:
        raise ValueError("support is undefined on an empty universe")
    return int(extent_mask(system, d).sum()) / system.n


@dataclass(frozen=True)
class Granule:
    descriptor: Descriptor
    extent: frozenset
    support: float


class GranuleSet:
    """All granules of one system meeting a support threshold, in canonical
    (lexicographic descriptor) order."""

    def __init__(self, system: InformationSystem, min_support: float, granules):
        self.system = system
        self.min_support = min_support
        self.granules = tuple(granules)

    def __len__(self) -> int:
        return len(self.granules)

    def __iter__(self):
        return iter(self.granules)

    def __getitem__(self, i) -> Granule:
        return self.granules[i]

    def descriptors(self) -> set[Descriptor]:
        return {g.descriptor for g in self.granules}

    def dump_lines(self) -> list[str]:
        """`descriptor<TAB>support<TAB>extentSize` per granule."""
        return [
            f"{g.descriptor.to_text(self.system)}\t{g.support:.6f}\t{len(g.extent)}"
            for g in self.granules
        ]


def enumerate_granules(system: InformationSystem, min_support: float) -> GranuleSet:
    """All distinct descriptors with support >= min_support, with extents.

    Candidates combine values realized by at least one object; flag
    attributes contribute only their positive value. Generation is
    levelwise with anti-monotone pruning; the result is independent of
    generation order (canonically sorted).
    """
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must be in (0, 1], got {min_support}")
    if system.n == 0:
        raise ValueError("cannot enumerate granules of an empty universe")

    n = system.n
    masks = system.value_masks()

    # Threshold tests divide first (count / n >= min_support) so that tie
    # cases agree exactly with the definition of support.
    def frequent(mask: np.ndarray) -> bool:
        return int(mask.sum()) / n >= min_support

    # level 1: realized singletons per attribute
    singletons: dict[tuple[tuple[int, int], ...], np.ndarray] = {}
    for a, attr in enumerate(system.attributes):
        codes = (FLAG_TRUE,) if attr.kind == FLAG else range(attr.size)
        for v in codes:
            mask = masks[a][v]
            if mask.any() and frequent(mask):
                singletons[((a, v),)] = mask

    frontier = dict(singletons)
    accepted = [((), np.ones(n, dtype=bool))]  # empty descriptor, support 1
    accepted.extend(frontier.items())

    while frontier:
        next_level: dict[tuple[tuple[int, int], ...], np.ndarray] = {}
        keys = sorted(frontier)
        prev = set(frontier)
        for i, left in enumerate(keys):
            for right in keys[i + 1 :]:
                if left[:-1] != right[:-1]:
                    break  # sorted keys: shared prefixes are contiguous
                if left[-1][0] == right[-1][0]:
                    continue  # same attribute, different value: empty meet
                candidate = left + (right[-1],)
                # every (k-1)-subset must itself be frequent
                if len(candidate) > 2 and any(
                    candidate[:j] + candidate[j + 1 :] not in prev
                    for j in range(len(candidate) - 2)
                ):
                    continue
                mask = frontier[left] & frontier[right]
                if frequent(mask):
                    next_level[candidate] = mask
        accepted.extend(next_level.items())
        frontier = next_level

    granules = []
    for pairs, mask in sorted(accepted):
        members = frozenset(np.nonzero(mask)[0].tolist())
        granules.append(Granule(Descriptor(pairs), members, len(members) / n))
    return GranuleSet(system, min_support, granules)
