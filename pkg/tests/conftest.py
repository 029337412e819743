import os
import random

import numpy as np
import pytest

from grale.model import (
    CATEGORICAL,
    FLAG,
    FLAG_DOMAIN,
    AttributeSchema,
    BinaryRelation,
    InformationSystem,
    MMER,
)


def make_random_mmer(seed, max_objects=8, max_attrs=3, max_values=3,
                     min_objects=1):
    """Small random dataset for oracle comparisons and property tests.

    Uses random.Random so instances are stable across platforms. Flags are
    mixed in with probability 0.3; relation density varies per instance.
    """
    rng = random.Random(seed)

    def system(prefix):
        n = rng.randint(min_objects, max_objects)
        n_attrs = rng.randint(1, max_attrs)
        attrs = []
        for a in range(n_attrs):
            if rng.random() < 0.3:
                attrs.append(AttributeSchema(f"{prefix}f{a}", FLAG, FLAG_DOMAIN))
            else:
                size = rng.randint(2, max_values)
                domain = tuple(f"{prefix}{a}v{c}" for c in range(size))
                attrs.append(AttributeSchema(f"{prefix}a{a}", CATEGORICAL, domain))
        values = np.array(
            [[rng.randrange(len(s.domain)) for s in attrs] for _ in range(n)],
            dtype=np.int32,
        )
        ids = tuple(f"{prefix}{i + 1}" for i in range(n))
        return InformationSystem(ids, tuple(attrs), values)

    users = system("u")
    items = system("m")
    density = 0.1 + 0.8 * rng.random()
    matrix = np.array(
        [[rng.random() < density for _ in range(items.n)] for _ in range(users.n)],
        dtype=bool,
    )
    return MMER(users, items, BinaryRelation(matrix))


@pytest.fixture
def toy():
    """Four users x four movies with hand-checkable granules and rules."""
    users = InformationSystem(
        ("1", "2", "3", "4"),
        (
            AttributeSchema("age", CATEGORICAL, ("[18,24)", "[50,56)")),
            AttributeSchema("gender", CATEGORICAL, ("F", "M")),
            AttributeSchema(
                "occupation", CATEGORICAL,
                ("other", "student", "technician", "writer"),
            ),
        ),
        np.array(
            [[0, 1, 2], [1, 0, 0], [0, 1, 3], [0, 1, 1]], dtype=np.int32
        ),
    )
    items = InformationSystem(
        ("1", "2", "3", "4"),
        (
            AttributeSchema("year", CATEGORICAL, ("1980s", "1990s")),
            AttributeSchema("Adventure", FLAG, FLAG_DOMAIN),
            AttributeSchema("Animation", FLAG, FLAG_DOMAIN),
        ),
        np.array(
            [[1, 0, 0], [0, 1, 1], [1, 0, 0], [0, 0, 0]], dtype=np.int32
        ),
    )
    relation = BinaryRelation.from_pairs(
        4, 4, [(0, 1), (0, 3), (1, 0), (1, 3), (2, 3), (3, 2), (3, 3)]
    )
    return MMER(users, items, relation)


_ML_USER = """\
1|24|M|technician|85711
2|53|F|other|94043
3|20|M|writer|32067
4|23|M|student|30329
"""

# 19 flag columns; first one is "unknown" and must be dropped on load
_ML_ITEM = (
    "1|Toy Story (1995)|01-Jan-1995||http://x/1|0|0|0|1|1|1|0|0|0|0|0|0|0|0|0|0|0|0|0\n"
    "2|GoldenEye (1995)|01-Jan-1995||http://x/2|0|1|1|0|0|0|0|0|0|0|0|0|0|0|0|0|1|0|0\n"
    "3|Chungking Express (1994)|16-Jul-1996||http://x/3|0|0|0|0|0|0|0|0|1|0|0|0|0|0|1|0|0|0|0\n"
    "4|unknown||||1|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0|0\n"
    "5|Cit\xe9 des enfants perdus, La (1995)|24-May-1995||http://x/5|0|0|1|0|0|0|0|0|0|1|0|0|0|0|0|1|0|0|0\n"
)

_ML_DATA = """\
1\t1\t5\t874965758
1\t2\t3\t876893171
2\t3\t4\t878542960
3\t1\t2\t876893119
4\t5\t1\t889751712
4\t2\t4\t880606923
"""


@pytest.fixture
def ml_mini(tmp_path):
    """A 4-user/5-movie dataset in MovieLens file layout."""
    d = tmp_path / "ml-mini"
    d.mkdir()
    (d / "u.user").write_text(_ML_USER, encoding="latin-1")
    (d / "u.item").write_text(_ML_ITEM, encoding="latin-1")
    (d / "u.data").write_text(_ML_DATA, encoding="latin-1")
    return d


def real_ml100k_dir():
    """Directory holding the real MovieLens-100K files, if present."""
    candidates = [
        os.environ.get("GRALE_DATA_DIR"),
        os.path.join(os.path.dirname(__file__), "data", "ml-100k"),
        "ml-100k",
    ]
    for path in candidates:
        if path and all(
            os.path.exists(os.path.join(path, f))
            for f in ("u.user", "u.item", "u.data")
        ):
            return path
    return None


@pytest.fixture(scope="session")
def ml100k():
    """(dataset, provenance) - the real ML-100K when available, otherwise
    the deterministic synthetic stand-in with the same shape."""
    path = real_ml100k_dir()
    if path:
        from grale.loaders import load_movielens

        return load_movielens(path), f"MovieLens-100K at {path}"
    from synth import DEFAULT_SEED, synthetic_ml100k

    return (
        synthetic_ml100k(),
        f"deterministic synthetic stand-in (tests/synth.py, seed {DEFAULT_SEED})",
    )


_acceptance_lines = []


def record_criterion(number, title, passed, detail):
    _acceptance_lines.append(
        f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_acceptance_lines):
        terminalreporter.write_line(line)
