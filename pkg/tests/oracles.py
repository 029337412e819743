"""Brute-force reference implementations used to check the fast paths.

Everything here favors obviousness over speed: extents by row scan,
granule enumeration by trying every descriptor the schemas allow, rule
mining by testing every granule pair directly against the definitions.
Kept independent of the library internals on purpose (only the data model
is shared), so agreement between the two is meaningful.
"""

import itertools

from grale.model import FLAG, FLAG_TRUE


def oracle_extent(system, pairs):
    """Row scan: objects matching every (attribute, value) pair."""
    out = set()
    for row in range(system.n):
        if all(system.values[row, a] == v for a, v in pairs):
            out.add(row)
    return out


def oracle_granules(system, min_support):
    """Every descriptor the schemas allow whose support clears min_support.

    Returns {pairs: extent set}, empty descriptor included. Flags only
    ever appear with their positive value.
    """
    n = system.n
    found = {(): set(range(n))}
    attr_indices = range(len(system.attributes))
    for size in range(1, len(system.attributes) + 1):
        for subset in itertools.combinations(attr_indices, size):
            pools = []
            for a in subset:
                schema = system.attributes[a]
                if schema.kind == FLAG:
                    pools.append([(a, FLAG_TRUE)])
                else:
                    pools.append([(a, code) for code in range(len(schema.domain))])
            for combo in itertools.product(*pools):
                extent = oracle_extent(system, combo)
                if len(extent) / n >= min_support:
                    found[tuple(combo)] = extent
    return found


def oracle_sconf(es, lh, rh, tc):
    """Fraction of lh users who rated at least tc of the rh items."""
    if not lh or not rh:
        raise ValueError("sconf needs non-empty extents")
    qualified = 0
    for u in lh:
        rated = sum(1 for i in rh if es.relation.matrix[u, i])
        if rated / len(rh) >= tc:
            qualified += 1
    return qualified / len(lh)


def oracle_mine(es, params):
    """All rules meeting the thresholds, keyed by descriptor pairs.

    Returns {(source_pairs, target_pairs): (scov, tcov, sconf)}.
    """
    sources = oracle_granules(es.user_system, params.ms)
    targets = oracle_granules(es.item_system, params.mt)
    out = {}
    for spairs, s_extent in sources.items():
        for tpairs, t_extent in targets.items():
            confidence = oracle_sconf(es, s_extent, t_extent, params.tc)
            if confidence >= params.sc:
                out[(spairs, tpairs)] = (
                    len(s_extent) / es.n_users,
                    len(t_extent) / es.n_items,
                    confidence,
                )
    return out


def ruleset_as_dict(ruleset):
    """Mined RuleSet flattened to the oracle's dict shape for comparison."""
    out = {}
    for rule, measures in ruleset:
        key = (rule.source.pairs, rule.target.pairs)
        out[key] = (measures.scov, measures.tcov, measures.sconf)
    return out
