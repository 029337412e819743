"""Rule measures and the sandwich miner.

A granular rule pairs a user-side descriptor with an item-side descriptor.
Mining enumerates both granule sets independently by support, then keeps
every cross pair whose source confidence (fraction of source users rating
at least a tc-share of the target items) clears the sc threshold.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .granules import Descriptor, enumerate_granules, extent_mask
from .model import AttributeSchema, GraleError, InformationSystem, MMER

RULE_FILE_VERSION = "grale-rules v1"


@dataclass(frozen=True)
class MiningParams:
    """Thresholds of the mining problem: minimum source/target coverage,
    minimum source confidence, and the target-confidence level that the
    source confidence is computed against."""

    ms: float
    mt: float
    sc: float
    tc: float

    def __post_init__(self):
        for name in ("ms", "mt", "sc"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        # tc = 0 is admissible: the rating-share test becomes vacuous and
        # every rule's source confidence is 1.
        if not 0 <= self.tc <= 1:
            raise ValueError(f"tc must be in [0, 1], got {self.tc}")


@dataclass(frozen=True)
class GranularRule:
    source: Descriptor
    target: Descriptor


@dataclass(frozen=True)
class RuleMeasures:
    scov: float
    tcov: float
    sconf: float
    tc: float


@dataclass(frozen=True)
class Provenance:
    """What a rule set was mined from: thresholds, dataset fingerprint, and
    the attribute schemas its descriptors are expressed against."""

    params: MiningParams
    fingerprint: str
    user_attributes: tuple[AttributeSchema, ...]
    item_attributes: tuple[AttributeSchema, ...]


class RuleSet:
    """Mined rules with their measures, canonically ordered
    (source descriptor, then target descriptor)."""

    def __init__(self, rules, provenance: Provenance):
        self.rules = tuple(rules)
        self.provenance = provenance
        seen = set()
        for rule, _ in self.rules:
            key = (rule.source.pairs, rule.target.pairs)
            if key in seen:
                raise ValueError(f"duplicate rule {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __getitem__(self, i):
        return self.rules[i]

    def rule_keys(self) -> set:
        return {(r.source.pairs, r.target.pairs) for r, _ in self.rules}


def scov(es: MMER, rule: GranularRule) -> float:
    """Fraction of users matching the rule's source side."""
    return int(extent_mask(es.user_system, rule.source).sum()) / es.n_users


def tcov(es: MMER, rule: GranularRule) -> float:
    """Fraction of items matching the rule's target side."""
    return int(extent_mask(es.item_system, rule.target).sum()) / es.n_items


def sconf(es: MMER, rule: GranularRule, tc: float) -> float:
    """Fraction of source-side users who rate at least a tc-share of the
    target-side items. Both sides must be non-empty."""
    lh = extent_mask(es.user_system, rule.source)
    rh = extent_mask(es.item_system, rule.target)
    lh_size = int(lh.sum())
    rh_size = int(rh.sum())
    if lh_size == 0 or rh_size == 0:
        raise ValueError("source confidence needs non-empty rule sides")
    hits = es.relation.matrix[lh][:, rh].sum(axis=1)
    qualified = int(np.count_nonzero(hits / rh_size >= tc))
    return qualified / lh_size


def mine(es: MMER, params: MiningParams) -> RuleSet:
    """All rules (source granule, target granule) with scov >= ms,
    tcov >= mt and sconf >= sc, complete and duplicate-free.

    The pair test is vectorized: per target granule, a boolean over users
    marks who clears the tc rating share; the per-pair qualified counts are
    then one matrix product of granule masks.
    """
    source_granules = enumerate_granules(es.user_system, params.ms)
    target_granules = enumerate_granules(es.item_system, params.mt)

    n_users = es.n_users
    sg_masks = np.zeros((len(source_granules), n_users), dtype=np.float64)
    sg_sizes = np.empty(len(source_granules))
    for i, granule in enumerate(source_granules):
        sg_masks[i, list(granule.extent)] = 1.0
        sg_sizes[i] = len(granule.extent)

    # hits[x, t] = how many items of target granule t user x has rated;
    # exact in float64 (counts are small integers).
    relation = es.relation.matrix.astype(np.float64)
    tg_cols = np.zeros((es.n_items, len(target_granules)), dtype=np.float64)
    tg_sizes = np.empty(len(target_granules))
    for t, granule in enumerate(target_granules):
        tg_cols[list(granule.extent), t] = 1.0
        tg_sizes[t] = len(granule.extent)
    hits = relation @ tg_cols
    ok = (hits / tg_sizes) >= params.tc

    qualified = sg_masks @ ok.astype(np.float64)
    sconf_matrix = qualified / sg_sizes[:, None]

    rules = []
    for i, sg in enumerate(source_granules):
        for t, tg in enumerate(target_granules):
            value = float(sconf_matrix[i, t])
            if value >= params.sc:
                rules.append(
                    (
                        GranularRule(sg.descriptor, tg.descriptor),
                        RuleMeasures(sg.support, tg.support, value, params.tc),
                    )
                )
    provenance = Provenance(
        params,
        es.fingerprint(),
        es.user_system.attributes,
        es.item_system.attributes,
    )
    return RuleSet(rules, provenance)


def _schema_line(tag: str, attributes) -> str:
    # attributes joined by "&", domains by "|": both are reserved characters
    # that can never occur inside names or labels
    rendered = "&".join(
        f"{a.name}:{a.kind}:{'|'.join(a.domain)}" for a in attributes
    )
    return f"#{tag}: {rendered}"


def _parse_schema_line(line: str, tag: str) -> tuple[AttributeSchema, ...]:
    prefix = f"#{tag}: "
    if not line.startswith(prefix):
        raise GraleError(f"rule file is missing its {tag} header")
    out = []
    body = line[len(prefix):]
    if body:
        for chunk in body.split("&"):
            name, kind, domain = chunk.split(":", 2)
            out.append(AttributeSchema(name, kind, tuple(domain.split("|"))))
    return tuple(out)


class _SchemaView:
    """Just enough of InformationSystem for descriptor text round-trips."""

    def __init__(self, attributes):
        self.attributes = tuple(attributes)
        self._index = {a.name: i for i, a in enumerate(self.attributes)}

    def attribute_index(self, name: str) -> int:
        if name not in self._index:
            raise GraleError(f"rule references unknown attribute {name!r}")
        return self._index[name]


def save_rules(ruleset: RuleSet, path) -> None:
    """Write the rule file: version + params header, schema headers, then
    `src => tgt<TAB>scov<TAB>tcov<TAB>sconf` with 6-decimal fractions.

    `path` may also be an open text handle (for stdout/StringIO).
    """
    p = ruleset.provenance
    users = _SchemaView(p.user_attributes)
    items = _SchemaView(p.item_attributes)
    lines = [
        f"#{RULE_FILE_VERSION}",
        f"#ms={p.params.ms:.6f},mt={p.params.mt:.6f},sc={p.params.sc:.6f},"
        f"tc={p.params.tc:.6f},fingerprint={p.fingerprint}",
        _schema_line("user-attrs", p.user_attributes),
        _schema_line("item-attrs", p.item_attributes),
    ]
    for rule, measures in ruleset:
        lines.append(
            f"{rule.source.to_text(users)} => {rule.target.to_text(items)}"
            f"\t{measures.scov:.6f}\t{measures.tcov:.6f}\t{measures.sconf:.6f}"
        )
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_rules(path, expected_fingerprint: str | None = None) -> RuleSet:
    """Read a rule file back. A wrong version line is an error; a
    fingerprint different from `expected_fingerprint` (when given) warns
    but still loads."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != f"#{RULE_FILE_VERSION}":
        raise GraleError(
            f"{path}: not a {RULE_FILE_VERSION!r} file "
            f"(header is {lines[0][:40]!r})" if lines else f"{path}: empty rule file"
        )
    header = lines[1] if len(lines) > 1 else ""
    if not header.startswith("#ms="):
        raise GraleError(f"{path}: missing parameter header")
    fields = dict(part.split("=", 1) for part in header[1:].split(","))
    try:
        params = MiningParams(
            float(fields["ms"]), float(fields["mt"]),
            float(fields["sc"]), float(fields["tc"]),
        )
        fingerprint = fields["fingerprint"]
    except KeyError as exc:
        raise GraleError(f"{path}: parameter header lacks {exc}") from None
    if expected_fingerprint is not None and fingerprint != expected_fingerprint:
        warnings.warn(
            f"rule file {path} was mined from dataset {fingerprint}, "
            f"not {expected_fingerprint}; rules may not transfer",
            stacklevel=2,
        )
    user_attrs = _parse_schema_line(lines[2], "user-attrs")
    item_attrs = _parse_schema_line(lines[3], "item-attrs")
    users = _SchemaView(user_attrs)
    items = _SchemaView(item_attrs)

    rules = []
    for line in lines[4:]:
        if line.startswith("#"):
            continue
        head, _, tail = line.partition("\t")
        src_text, sep, tgt_text = head.partition(" => ")
        numbers = tail.split("\t")
        if not sep or len(numbers) != 3:
            raise GraleError(f"{path}: malformed rule line {line!r}")
        rule = GranularRule(
            _parse_rule_descriptor(src_text, users),
            _parse_rule_descriptor(tgt_text, items),
        )
        measures = RuleMeasures(
            float(numbers[0]), float(numbers[1]), float(numbers[2]), params.tc
        )
        rules.append((rule, measures))
    provenance = Provenance(params, fingerprint, user_attrs, item_attrs)
    return RuleSet(rules, provenance)


def _parse_rule_descriptor(text: str, view: _SchemaView) -> Descriptor:
    text = text.strip()
    if text == "*":
        return Descriptor()
    pairs = []
    for chunk in text.split("&"):
        name, eq, label = chunk.partition("=")
        if not eq:
            raise GraleError(f"malformed descriptor {text!r}")
        a = view.attribute_index(name)
        pairs.append((a, view.attributes[a].code_of(label)))
    return Descriptor(tuple(pairs))
