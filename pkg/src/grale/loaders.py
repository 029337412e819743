"""Ingestion of MovieLens-100K-format data and a generic tabular format.

The MovieLens path expects the three classic files:

    u.user   id|age|gender|occupation|zip        (pipe-delimited)
    u.item   id|title|date|videodate|url|<19 genre flags>
    u.data   userId<TAB>movieId<TAB>rating<TAB>timestamp

The generic path reads/writes `users.csv`, `items.csv` (header row of
attribute names, string values, first column `id`) plus `edges.csv`
(`userId,itemId`). Lines starting with `#` are ignored. Flag columns are
marked with a `:flag` suffix in the header.
"""

from __future__ import annotations

import csv
import io
import os

import numpy as np

from .model import (
    CATEGORICAL,
    FLAG,
    AttributeSchema,
    BinaryRelation,
    DiscretizationSpec,
    InformationSystem,
    IngestionError,
    MMER,
    ReferentialIntegrityError,
    discretize,
    scale_multivalued,
)

AGE_SPEC = DiscretizationSpec(
    "age",
    (7, 22, 27, 31, 39, 48, 73),
    ("[7,22)", "[22,27)", "[27,31)", "[31,39)", "[39,48)", "[48,73]"),
)

YEAR_SPEC = DiscretizationSpec(
    "year",
    (1922, 1980, 1993, 1994, 1995, 1996, 1997, 1998),
    (
        "[1922,1980)",
        "[1980,1993)",
        "[1993,1994)",
        "[1994,1995)",
        "[1995,1996)",
        "[1996,1997)",
        "[1997,1998]",
    ),
)

# u.item carries 19 flags; the leading "unknown" column is dropped so that
# exactly these 18 genres remain.
ML100K_GENRES = (
    "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
)


def _split_line(path, lineno, line, sep, n_fields):
    parts = line.rstrip("\n").split(sep)
    if len(parts) < n_fields:
        raise IngestionError(
            f"{os.path.basename(path)}:{lineno}: expected {n_fields} "
            f"{'pipe' if sep == '|' else 'tab'}-separated fields, got {len(parts)}"
        )
    return parts


def _read_lines(path):
    if not os.path.isfile(path):
        raise IngestionError(f"missing data file: {path}")
    with open(path, encoding="latin-1") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                yield lineno, line


def _sort_key(external_id: str):
    # numeric ids order numerically, anything else lexicographically
    try:
        return (0, int(external_id), "")
    except ValueError:
        return (1, 0, external_id)


def _parse_release_year(date_field: str, path: str, lineno: int) -> int:
    """Year from a `01-Jan-1995` release date.

    The canonical ML-100K has one movie with an empty date field; it is
    binned with the oldest films instead of rejecting the dataset.
    """
    if not date_field.strip():
        return int(YEAR_SPEC.boundaries[0])
    tail = date_field.strip().rsplit("-", 1)[-1]
    try:
        return int(tail)
    except ValueError:
        raise IngestionError(
            f"{os.path.basename(path)}:{lineno}: cannot parse release date "
            f"{date_field!r}"
        ) from None


def load_movielens(data_dir) -> MMER:
    """Ingest a MovieLens-100K-format directory into an MMER.

    Users get attributes age (6 intervals), gender, occupation; items get
    year (7 intervals) plus the 18 genre flags. A relation entry is true
    iff the user rated the movie at any rating value. Zip codes, titles,
    URLs and video dates are discarded.
    """
    data_dir = str(data_dir)
    user_path = os.path.join(data_dir, "u.user")
    item_path = os.path.join(data_dir, "u.item")
    data_path = os.path.join(data_dir, "u.data")

    users = {}
    for lineno, line in _read_lines(user_path):
        uid, age, gender, occupation, _zip = _split_line(user_path, lineno, line, "|", 5)[:5]
        if uid in users:
            raise IngestionError(f"u.user:{lineno}: duplicate user id {uid}")
        try:
            age_value = int(age)
        except ValueError:
            raise IngestionError(f"u.user:{lineno}: non-numeric age {age!r}") from None
        users[uid] = (age_value, gender.strip(), occupation.strip())

    items = {}
    for lineno, line in _read_lines(item_path):
        parts = _split_line(item_path, lineno, line, "|", 5 + 19)
        iid = parts[0]
        if iid in items:
            raise IngestionError(f"u.item:{lineno}: duplicate movie id {iid}")
        year = _parse_release_year(parts[2], item_path, lineno)
        flags = parts[5 : 5 + 19]
        try:
            flags = [int(f) for f in flags]
        except ValueError:
            raise IngestionError(
                f"u.item:{lineno}: genre flags must be 0/1"
            ) from None
        if any(f not in (0, 1) for f in flags):
            raise IngestionError(f"u.item:{lineno}: genre flags must be 0/1")
        items[iid] = (year, flags[1:])  # drop the leading "unknown" column

    user_ids = sorted(users, key=_sort_key)
    item_ids = sorted(items, key=_sort_key)
    user_index = {uid: i for i, uid in enumerate(user_ids)}
    item_index = {iid: i for i, iid in enumerate(item_ids)}

    ages = [users[uid][0] for uid in user_ids]
    genders = [users[uid][1] for uid in user_ids]
    occupations = [users[uid][2] for uid in user_ids]
    try:
        age_codes = discretize(ages, AGE_SPEC)
    except ValueError as exc:
        raise IngestionError(f"u.user: {exc}") from None
    gender_domain = tuple(sorted(set(genders)))
    occupation_domain = tuple(sorted(set(occupations)))
    user_attrs = [
        AGE_SPEC.schema(),
        AttributeSchema("gender", CATEGORICAL, gender_domain),
        AttributeSchema("occupation", CATEGORICAL, occupation_domain),
    ]
    user_values = np.column_stack([
        age_codes,
        [gender_domain.index(g) for g in genders],
        [occupation_domain.index(o) for o in occupations],
    ])
    user_system = InformationSystem(user_ids, user_attrs, user_values)

    years = [items[iid][0] for iid in item_ids]
    try:
        year_codes = discretize(years, YEAR_SPEC)
    except ValueError as exc:
        raise IngestionError(f"u.item: {exc}") from None
    genre_block = np.array([items[iid][1] for iid in item_ids], dtype=np.int32)
    genre_attrs, genre_codes = scale_multivalued(genre_block, ML100K_GENRES)
    item_attrs = [YEAR_SPEC.schema()] + genre_attrs
    item_values = np.column_stack([year_codes, genre_codes])
    item_system = InformationSystem(item_ids, item_attrs, item_values)

    matrix = np.zeros((len(user_ids), len(item_ids)), dtype=bool)
    for lineno, line in _read_lines(data_path):
        uid, iid, rating, _ts = _split_line(data_path, lineno, line, "\t", 4)[:4]
        if uid not in user_index:
            raise ReferentialIntegrityError(
                f"u.data:{lineno}: rating references unknown user id {uid}"
            )
        if iid not in item_index:
            raise ReferentialIntegrityError(
                f"u.data:{lineno}: rating references unknown movie id {iid}"
            )
        matrix[user_index[uid], item_index[iid]] = True

    return MMER(user_system, item_system, BinaryRelation(matrix))


def _parse_header(cells, path):
    if not cells or cells[0] != "id":
        raise IngestionError(f"{path}: first header column must be 'id'")
    attrs = []
    for cell in cells[1:]:
        if cell.endswith(":flag"):
            attrs.append((cell[: -len(":flag")], FLAG))
        else:
            attrs.append((cell, CATEGORICAL))
    return attrs


def _read_csv_rows(path):
    if not os.path.isfile(path):
        raise IngestionError(f"missing data file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        filtered = (line for line in fh if not line.startswith("#"))
        yield from csv.reader(filtered)


def _load_entity_table(path) -> InformationSystem:
    rows = list(_read_csv_rows(path))
    if not rows:
        raise IngestionError(f"{path}: empty table")
    header = _parse_header(rows[0], path)
    records = {}
    for cells in rows[1:]:
        if len(cells) != len(header) + 1:
            raise IngestionError(
                f"{path}: row for id {cells[0] if cells else '?'} has "
                f"{len(cells)} cells, expected {len(header) + 1}"
            )
        if cells[0] in records:
            raise IngestionError(f"{path}: duplicate id {cells[0]}")
        records[cells[0]] = cells[1:]
    if not records:
        raise IngestionError(f"{path}: no data rows")

    ids = sorted(records, key=_sort_key)
    schemas = []
    columns = []
    for j, (name, kind) in enumerate(header):
        labels = [records[i][j] for i in ids]
        if kind == FLAG:
            if any(v not in ("0", "1") for v in labels):
                raise IngestionError(f"{path}: flag column {name!r} must be 0/1")
            schema = AttributeSchema(name, FLAG)
        else:
            try:
                schema = AttributeSchema(name, CATEGORICAL, tuple(sorted(set(labels))))
            except ValueError as exc:
                raise IngestionError(f"{path}: {exc}") from None
        schemas.append(schema)
        columns.append([schema.code_of(v) for v in labels])
    values = np.array(columns, dtype=np.int32).T if columns else np.zeros((len(ids), 0), dtype=np.int32)
    return InformationSystem(ids, schemas, values)


def load_generic(data_dir) -> MMER:
    """Ingest users.csv / items.csv / edges.csv into an MMER."""
    data_dir = str(data_dir)
    user_system = _load_entity_table(os.path.join(data_dir, "users.csv"))
    item_system = _load_entity_table(os.path.join(data_dir, "items.csv"))

    edges_path = os.path.join(data_dir, "edges.csv")
    user_index = {str(i): n for n, i in enumerate(user_system.object_ids)}
    item_index = {str(i): n for n, i in enumerate(item_system.object_ids)}
    matrix = np.zeros((user_system.n, item_system.n), dtype=bool)
    rows = list(_read_csv_rows(edges_path))
    if not rows or rows[0] != ["userId", "itemId"]:
        raise IngestionError(f"{edges_path}: header must be 'userId,itemId'")
    for cells in rows[1:]:
        if len(cells) != 2:
            raise IngestionError(f"{edges_path}: bad edge row {cells!r}")
        uid, iid = cells
        if uid not in user_index:
            raise ReferentialIntegrityError(
                f"{edges_path}: edge references unknown user id {uid}"
            )
        if iid not in item_index:
            raise ReferentialIntegrityError(
                f"{edges_path}: edge references unknown item id {iid}"
            )
        matrix[user_index[uid], item_index[iid]] = True
    return MMER(user_system, item_system, BinaryRelation(matrix))


def _entity_table_text(system: InformationSystem) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["id"] + [
        a.name + (":flag" if a.kind == FLAG else "") for a in system.attributes
    ]
    writer.writerow(header)
    for i, oid in enumerate(system.object_ids):
        row = [str(oid)] + [
            system.attributes[j].domain[code] for j, code in enumerate(system.values[i])
        ]
        writer.writerow(row)
    return buf.getvalue()


def _edges_text(es: MMER) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["userId", "itemId"])
    for x, y in es.relation.pairs():
        writer.writerow([str(es.user_system.object_ids[x]), str(es.item_system.object_ids[y])])
    return buf.getvalue()


def dump_generic(es: MMER, out_dir) -> None:
    """Write users.csv / items.csv / edges.csv deterministically (id order)."""
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    for name, text in (
        ("users.csv", _entity_table_text(es.user_system)),
        ("items.csv", _entity_table_text(es.item_system)),
        ("edges.csv", _edges_text(es)),
    ):
        path = os.path.join(out_dir, name)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)


def load_data(data_dir, data_format: str) -> MMER:
    """Dispatch on the data format name ('movielens' or 'generic')."""
    if data_format == "movielens":
        return load_movielens(data_dir)
    if data_format == "generic":
        return load_generic(data_dir)
    raise ValueError(f"unknown data format {data_format!r}")
