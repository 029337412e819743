"""Data model for many-to-many entity-relationship data.

An MMER bundles two information systems (users and items, each an
object x attribute table of categorical codes) with a binary relation
between them (who rated what). Everything here is immutable after
construction so downstream set algebra can cache masks safely.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

CATEGORICAL = "categorical"
# Boolean column obtained by scaling a multi-valued attribute (one column
# per possible value). Only the "1" value may appear in descriptors:
# negative conjuncts like <genre: 0> are uninteresting and would overwhelm
# the positive ones.
FLAG = "flag"

FLAG_DOMAIN = ("0", "1")
FLAG_TRUE = 1

# Reserved by the textual descriptor / rule / schema formats.
_LABEL_FORBIDDEN = set("=&|\t\n\r")
_NAME_FORBIDDEN = _LABEL_FORBIDDEN | set(":,")


class GraleError(Exception):
    """Base class for data and usage errors raised by this package."""


class IngestionError(GraleError):
    """A data file is missing, malformed, or internally inconsistent."""


class ReferentialIntegrityError(IngestionError):
    """An edge references an entity id absent from the entity tables."""


class SchemaMismatchError(GraleError):
    """A rule references an attribute or value a system does not have."""


def _check_token(text: str, what: str, forbidden: set[str]) -> str:
    if not text:
        raise ValueError(f"{what} must be non-empty")
    bad = sorted(set(text) & forbidden)
    if bad:
        raise ValueError(f"{what} {text!r} contains reserved character(s) {bad}")
    return text


@dataclass(frozen=True)
class AttributeSchema:
    """One column of an information system.

    `domain` orders the value labels; the categorical code of a label is
    its position. Flag attributes always have domain ("0", "1").
    """

    name: str
    kind: str = CATEGORICAL
    domain: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        _check_token(self.name, "attribute name", _NAME_FORBIDDEN)
        if self.kind not in (CATEGORICAL, FLAG):
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        if self.kind == FLAG:
            if self.domain and self.domain != FLAG_DOMAIN:
                raise ValueError(f"flag attribute {self.name!r} must have domain ('0', '1')")
            object.__setattr__(self, "domain", FLAG_DOMAIN)
            return
        if not self.domain:
            raise ValueError(f"attribute {self.name!r} has an empty domain")
        for label in self.domain:
            _check_token(label, f"value label of {self.name!r}", _LABEL_FORBIDDEN)
        if len(set(self.domain)) != len(self.domain):
            raise ValueError(f"attribute {self.name!r} has duplicate value labels")

    @property
    def size(self) -> int:
        return len(self.domain)

    def code_of(self, label: str) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise SchemaMismatchError(
                f"attribute {self.name!r} has no value {label!r}"
            ) from None


class InformationSystem:
    """An object x attribute table of categorical codes.

    Object ids are external identifiers; rows are addressed internally by
    dense 0-based index. The values array is frozen at construction.
    """

    def __init__(self, object_ids, attributes, values):
        self.object_ids = tuple(object_ids)
        self.attributes = tuple(attributes)
        values = np.array(values, dtype=np.int32)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array of codes")
        if values.shape != (len(self.object_ids), len(self.attributes)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.object_ids)} objects x {len(self.attributes)} attributes"
            )
        if len(set(self.object_ids)) != len(self.object_ids):
            raise ValueError("object ids must be unique")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        for j, attr in enumerate(self.attributes):
            col = values[:, j]
            if col.size and (col.min() < 0 or col.max() >= attr.size):
                raise ValueError(
                    f"attribute {attr.name!r} has a code outside 0..{attr.size - 1}"
                )
        values.setflags(write=False)
        self.values = values
        self._index_of_name = {a.name: j for j, a in enumerate(self.attributes)}
        self._masks: list[dict[int, np.ndarray]] | None = None

    @property
    def n(self) -> int:
        return len(self.object_ids)

    @property
    def m(self) -> int:
        return len(self.attributes)

    def attribute_index(self, name: str) -> int:
        try:
            return self._index_of_name[name]
        except KeyError:
            raise SchemaMismatchError(f"no attribute named {name!r}") from None

    def label_of(self, attr_index: int, code: int) -> str:
        return self.attributes[attr_index].domain[code]

    def row(self, i: int) -> np.ndarray:
        return self.values[i]

    def value_masks(self) -> list[dict[int, np.ndarray]]:
        """Per attribute, a map code -> boolean membership mask (cached)."""
        if self._masks is None:
            masks = []
            for j, attr in enumerate(self.attributes):
                col = self.values[:, j]
                per_code = {}
                for code in range(attr.size):
                    mask = col == code
                    mask.setflags(write=False)
                    per_code[code] = mask
                masks.append(per_code)
            self._masks = masks
        return self._masks

    def subset(self, indices) -> "InformationSystem":
        """New system over the given object rows (schemas unchanged)."""
        indices = list(indices)
        return InformationSystem(
            [self.object_ids[i] for i in indices],
            self.attributes,
            self.values[indices],
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InformationSystem)
            and self.object_ids == other.object_ids
            and self.attributes == other.attributes
            and np.array_equal(self.values, other.values)
        )

    def equivalent_to(self, other: "InformationSystem") -> bool:
        """Equality up to value-code renumbering: same ids, same attribute
        names and kinds, and every object carries the same value labels."""
        if not isinstance(other, InformationSystem):
            return False
        if self.object_ids != other.object_ids:
            return False
        if [(a.name, a.kind) for a in self.attributes] != [
            (a.name, a.kind) for a in other.attributes
        ]:
            return False
        for j, attr in enumerate(self.attributes):
            mine = [attr.domain[c] for c in self.values[:, j]]
            theirs = [other.attributes[j].domain[c] for c in other.values[:, j]]
            if mine != theirs:
                return False
        return True

    def __repr__(self) -> str:
        return f"InformationSystem(n={self.n}, attributes={[a.name for a in self.attributes]})"


class BinaryRelation:
    """Boolean incidence structure between two object universes.

    Stored densely as an n x k boolean matrix; `row_indices(x)` is the set
    of target indices related to source x.
    """

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=bool)
        if matrix.ndim != 2:
            raise ValueError("relation matrix must be 2-d")
        matrix.setflags(write=False)
        self.matrix = matrix

    @classmethod
    def from_pairs(cls, n: int, k: int, pairs) -> "BinaryRelation":
        matrix = np.zeros((n, k), dtype=bool)
        for x, y in pairs:
            if not (0 <= x < n and 0 <= y < k):
                raise ValueError(f"relation pair ({x}, {y}) out of range {n}x{k}")
            matrix[x, y] = True
        return cls(matrix)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    def row_indices(self, x: int) -> frozenset:
        return frozenset(np.nonzero(self.matrix[x])[0].tolist())

    def pairs(self):
        xs, ys = np.nonzero(self.matrix)
        return list(zip(xs.tolist(), ys.tolist()))

    @property
    def pair_count(self) -> int:
        return int(self.matrix.sum())

    @property
    def density(self) -> float:
        return self.pair_count / (self.n * self.k) if self.n and self.k else 0.0

    def restrict(self, row_indices=None, col_indices=None) -> "BinaryRelation":
        matrix = self.matrix
        if row_indices is not None:
            matrix = matrix[list(row_indices), :]
        if col_indices is not None:
            matrix = matrix[:, list(col_indices)]
        return BinaryRelation(matrix)

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryRelation) and np.array_equal(
            self.matrix, other.matrix
        )


class MMER:
    """Two information systems plus the relation connecting them."""

    def __init__(self, user_system: InformationSystem, item_system: InformationSystem,
                 relation: BinaryRelation):
        if relation.n != user_system.n or relation.k != item_system.n:
            raise ValueError(
                f"relation is {relation.n}x{relation.k} but systems have "
                f"{user_system.n} users and {item_system.n} items"
            )
        self.user_system = user_system
        self.item_system = item_system
        self.relation = relation
        self._fingerprint: str | None = None

    @property
    def n_users(self) -> int:
        return self.user_system.n

    @property
    def n_items(self) -> int:
        return self.item_system.n

    def subset(self, user_indices=None, item_indices=None) -> "MMER":
        users = self.user_system if user_indices is None else self.user_system.subset(user_indices)
        items = self.item_system if item_indices is None else self.item_system.subset(item_indices)
        return MMER(users, items, self.relation.restrict(user_indices, item_indices))

    def fingerprint(self) -> str:
        """Stable content hash of the whole MMER (schemas, values, relation)."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for system in (self.user_system, self.item_system):
                for attr in system.attributes:
                    h.update(f"{attr.name}:{attr.kind}:{'|'.join(attr.domain)};".encode())
                h.update(",".join(str(i) for i in system.object_ids).encode())
                h.update(system.values.tobytes())
            h.update(np.packbits(self.relation.matrix).tobytes())
            self._fingerprint = h.hexdigest()[:16]
        return self._fingerprint

    def equivalent_to(self, other: "MMER") -> bool:
        return (
            self.user_system.equivalent_to(other.user_system)
            and self.item_system.equivalent_to(other.item_system)
            and self.relation == other.relation
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MMER)
            and self.user_system == other.user_system
            and self.item_system == other.item_system
            and self.relation == other.relation
        )


@dataclass(frozen=True)
class DiscretizationSpec:
    """Half-open interval binning; the last interval is closed on the right.

    boundaries (b0 < b1 < ... < bk) define intervals [b0,b1), ..., [b_{k-1},bk]
    with one label each.
    """

    attribute: str
    boundaries: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.boundaries) < 2:
            raise ValueError("need at least two boundaries")
        if any(a >= b for a, b in zip(self.boundaries, self.boundaries[1:])):
            raise ValueError("boundaries must be strictly increasing")
        if len(self.labels) != len(self.boundaries) - 1:
            raise ValueError("need exactly one label per interval")

    @property
    def n_intervals(self) -> int:
        return len(self.labels)

    def code(self, value: float) -> int:
        bounds = self.boundaries
        if value < bounds[0] or value > bounds[-1]:
            raise ValueError(
                f"value {value} of attribute {self.attribute!r} is outside "
                f"[{bounds[0]}, {bounds[-1]}]"
            )
        if value == bounds[-1]:
            return len(self.labels) - 1
        # rightmost i with bounds[i] <= value
        return int(np.searchsorted(bounds, value, side="right")) - 1

    def schema(self) -> AttributeSchema:
        return AttributeSchema(self.attribute, CATEGORICAL, self.labels)


def discretize(values, spec: DiscretizationSpec) -> list[int]:
    """Map numeric values to interval codes under `spec`.

    Total and deterministic on [first boundary, last boundary]; anything
    outside is an error naming the value and the attribute.
    """
    return [spec.code(v) for v in values]


def scale_multivalued(flags, names) -> tuple[list[AttributeSchema], np.ndarray]:
    """Scale an n x g boolean block into g flag attributes.

    Each column becomes a two-valued attribute; downstream descriptor
    construction admits only the value "1" for these columns, so an
    all-zero row can never be covered by any flag descriptor.
    """
    flags = np.asarray(flags)
    names = list(names)
    if flags.ndim != 2 or flags.shape[1] != len(names):
        raise ValueError(
            f"flag block shape {flags.shape} does not match {len(names)} names"
        )
    if not np.isin(flags, (0, 1)).all():
        raise ValueError("flag block must contain only 0/1 values")
    schemas = [AttributeSchema(name, FLAG) for name in names]
    return schemas, flags.astype(np.int32)
