"""Train/test scenarios, repeated random splits, and sweep tables.

Five scenarios: a random baseline, testing the rule set on its own
training data, and the three cold-start splits (new user, new item, both
new). Each experiment repeats over freshly sampled splits with seeds
derived from one master seed, and aggregates mean/stddev per column.
Repetitions where nothing was recommended are recorded as accuracy-absent
and excluded from the mean (with the exclusion count reported), since an
empty recommender is different from a wrong one.
"""

from __future__ import annotations

import enum
import math
import random
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .model import GraleError, MMER
from .recommend import AccuracyReport, random_recommend, recommend, score
from .rules import MiningParams, RuleSet, mine
from .seeds import derive_seed


class Scenario(enum.Enum):
    RANDOM = "random"
    TRAIN_ON_TRAIN = "train-on-train"
    NEW_USER = "new-user"
    NEW_ITEM = "new-item"
    BOTH_NEW = "both-new"

    @classmethod
    def parse(cls, name: str) -> "Scenario":
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(
            f"unknown scenario {name!r}; choose from "
            f"{', '.join(m.value for m in cls)}"
        )


@dataclass(frozen=True)
class SplitSpec:
    """Train fraction plus the seed controlling the sampling."""

    train_fraction: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    params: MiningParams | None
    split: SplitSpec
    repetitions: int = 20
    record_train: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.scenario is not Scenario.RANDOM and self.params is None:
            raise ValueError(f"scenario {self.scenario.value} needs mining params")


def _train_size(fraction: float, n: int) -> int:
    # round half up, so 0.6 * 943 = 565.8 -> 566
    size = int(math.floor(fraction * n + 0.5))
    if size <= 0 or size >= n:
        raise GraleError(
            f"degenerate split: {size} of {n} objects on the training side"
        )
    return size


def _partition(n: int, size: int, seed: int) -> tuple[list[int], list[int]]:
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(n), size))
    chosen_set = set(chosen)
    rest = [i for i in range(n) if i not in chosen_set]
    return chosen, rest


def split_users(es: MMER, spec: SplitSpec) -> tuple[MMER, MMER]:
    """Partition the user set; both sides keep the full item system."""
    size = _train_size(spec.train_fraction, es.n_users)
    train_idx, test_idx = _partition(es.n_users, size, derive_seed(spec.seed, 0))
    return es.subset(user_indices=train_idx), es.subset(user_indices=test_idx)


def split_items(es: MMER, spec: SplitSpec) -> tuple[MMER, MMER]:
    """Partition the item set; both sides keep the full user system."""
    size = _train_size(spec.train_fraction, es.n_items)
    train_idx, test_idx = _partition(es.n_items, size, derive_seed(spec.seed, 1))
    return es.subset(item_indices=train_idx), es.subset(item_indices=test_idx)


def split_both(es: MMER, spec: SplitSpec) -> tuple[MMER, MMER]:
    """Partition users and items independently; train is the train x train
    block, test the test x test block, off-diagonal ratings are discarded."""
    user_size = _train_size(spec.train_fraction, es.n_users)
    item_size = _train_size(spec.train_fraction, es.n_items)
    train_users, test_users = _partition(es.n_users, user_size, derive_seed(spec.seed, 0))
    train_items, test_items = _partition(es.n_items, item_size, derive_seed(spec.seed, 1))
    train = es.subset(user_indices=train_users, item_indices=train_items)
    test = es.subset(user_indices=test_users, item_indices=test_items)
    return train, test


@dataclass(frozen=True)
class RepetitionResult:
    rep: int
    rule_count: int
    test: AccuracyReport
    train: AccuracyReport | None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: tuple[RepetitionResult, ...]
    fingerprint: str = ""

    def _accuracies(self, side: str) -> list[float]:
        out = []
        for row in self.rows:
            report = row.test if side == "test" else row.train
            if report is not None and report.accuracy is not None:
                out.append(report.accuracy)
        return out

    def mean_accuracy(self, side: str = "test") -> float | None:
        values = self._accuracies(side)
        return sum(values) / len(values) if values else None

    def std_accuracy(self, side: str = "test") -> float | None:
        values = self._accuracies(side)
        return statistics.stdev(values) if len(values) >= 2 else None

    def excluded(self, side: str = "test") -> int:
        count = 0
        for row in self.rows:
            report = row.test if side == "test" else row.train
            if report is not None and report.accuracy is None:
                count += 1
        return count

    def mean_recommended(self, side: str = "test") -> float:
        values = [
            (row.test if side == "test" else row.train).recommended
            for row in self.rows
            if (row.test if side == "test" else row.train) is not None
        ]
        return sum(values) / len(values) if values else 0.0

    def mean_rule_count(self) -> float:
        return sum(row.rule_count for row in self.rows) / len(self.rows)


def _run_repetition(es: MMER, cfg: ExperimentConfig, rep: int,
                    cached_rules: RuleSet | None = None) -> RepetitionResult:
    rep_seed = derive_seed(cfg.split.seed, rep)
    scenario = cfg.scenario

    if scenario is Scenario.RANDOM:
        recs = random_recommend(es.user_system, es.item_system, derive_seed(rep_seed, 2))
        return RepetitionResult(rep, 0, score(recs, es.relation), None)

    if scenario is Scenario.TRAIN_ON_TRAIN:
        rules = cached_rules if cached_rules is not None else mine(es, cfg.params)
        recs = recommend(rules, es.user_system, es.item_system)
        return RepetitionResult(rep, len(rules), score(recs, es.relation), None)

    spec = SplitSpec(cfg.split.train_fraction, rep_seed)
    if scenario is Scenario.NEW_USER:
        train, test = split_users(es, spec)
    elif scenario is Scenario.NEW_ITEM:
        train, test = split_items(es, spec)
    else:
        train, test = split_both(es, spec)

    rules = mine(train, cfg.params)
    test_report = score(
        recommend(rules, test.user_system, test.item_system), test.relation
    )
    train_report = None
    if cfg.record_train:
        train_report = score(
            recommend(rules, train.user_system, train.item_system), train.relation
        )
    return RepetitionResult(rep, len(rules), test_report, train_report)


def run_experiment(es: MMER, cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run all repetitions of one scenario. The result is a pure function
    of (dataset, config); worker count only affects wall time."""
    cached = None
    if cfg.scenario is Scenario.TRAIN_ON_TRAIN:
        cached = mine(es, cfg.params)  # deterministic: identical every repetition

    reps = range(cfg.repetitions)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda r: _run_repetition(es, cfg, r, cached), reps))
    else:
        rows = [_run_repetition(es, cfg, r, cached) for r in reps]
    return ExperimentReport(cfg, tuple(rows), es.fingerprint())


def sweep(es: MMER, scenario: Scenario, grid, sc: float, tc: float,
          split: SplitSpec, repetitions: int = 20, record_train: bool = True,
          workers: int = 1) -> list[tuple[float, ExperimentReport]]:
    """One experiment per grid value with ms = mt = value; every grid point
    shares the same master seed, hence identical per-repetition splits."""
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid must be non-empty")
    table = []
    for value in grid:
        cfg = ExperimentConfig(
            scenario=scenario,
            params=MiningParams(ms=value, mt=value, sc=sc, tc=tc),
            split=split,
            repetitions=repetitions,
            record_train=record_train,
        )
        table.append((value, run_experiment(es, cfg, workers=workers)))
    return table


def _fmt(value, places: int = 6) -> str:
    if value is None:
        return ""
    return f"{value:.{places}f}"


def report_csv(report: ExperimentReport) -> str:
    """Per-repetition rows plus trailing aggregate comment lines."""
    cfg = report.config
    params = cfg.params
    lines = ["rep,scenario,ms,mt,sc,tc,ruleCount,M,N,accuracy,trainAccuracy"]
    for row in report.rows:
        train_acc = "" if row.train is None else _fmt(row.train.accuracy)
        lines.append(
            ",".join(
                [
                    str(row.rep),
                    cfg.scenario.value,
                    _fmt(params.ms) if params else "",
                    _fmt(params.mt) if params else "",
                    _fmt(params.sc) if params else "",
                    _fmt(params.tc) if params else "",
                    str(row.rule_count),
                    str(row.test.recommended),
                    str(row.test.successes),
                    _fmt(row.test.accuracy),
                    train_acc,
                ]
            )
        )
    lines.append(f"# mean,accuracy={_fmt(report.mean_accuracy('test'))},"
                 f"trainAccuracy={_fmt(report.mean_accuracy('train'))},"
                 f"M={report.mean_recommended('test'):.2f},"
                 f"ruleCount={report.mean_rule_count():.2f}")
    lines.append(f"# stddev,accuracy={_fmt(report.std_accuracy('test'))},"
                 f"trainAccuracy={_fmt(report.std_accuracy('train'))}")
    lines.append(f"# excluded,test={report.excluded('test')},"
                 f"train={report.excluded('train')}")
    return "\n".join(lines) + "\n"


def sweep_csv(table) -> str:
    """Plot-ready series: one row per ms=mt grid value."""
    lines = [
        "ms_mt,mean_test_accuracy,std_test_accuracy,mean_train_accuracy,"
        "std_train_accuracy,mean_test_M,mean_train_M,mean_rule_count,"
        "excluded_test,excluded_train"
    ]
    for value, report in table:
        lines.append(
            ",".join(
                [
                    _fmt(value),
                    _fmt(report.mean_accuracy("test")),
                    _fmt(report.std_accuracy("test")),
                    _fmt(report.mean_accuracy("train")),
                    _fmt(report.std_accuracy("train")),
                    f"{report.mean_recommended('test'):.2f}",
                    f"{report.mean_recommended('train'):.2f}",
                    f"{report.mean_rule_count():.2f}",
                    str(report.excluded("test")),
                    str(report.excluded("train")),
                ]
            )
        )
    return "\n".join(lines) + "\n"
