"""Link-addition experiment: start from a fixed multi-component backbone and
add k missing links in every possible way, enumerating sessions per graph.

Emits boxplot-ready rows and quartile statistics; no plotting here.
"""
from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    ExchangeGraph,
    Quantity,
    components,
    format_ratio,
    graph_from_dict,
    graph_to_dict,
    is_balanced,
    make_graph,
)
from .session import (
    EnumerationLimitError,
    EnumerationSummary,
    enumerate_sessions,
    enumeration_limit,
    sample_sessions,
)
from .analysis import check_success

BACKBONE_PROFILES = {
    "default": ((2, 3, 1, 4), (2, 3, 5)),
    "uniform": ((1, 1, 1, 1), (1, 1, 2)),
}

_BACKBONE_LINKS = ((0, 0), (1, 1), (2, 2), (3, 2))


def backbone_graph(profile="default") -> ExchangeGraph:
    """The fixed 4-buyer / 3-seller starting topology: three components
    (two isolated pairs plus a 2-buyer/1-seller fan), each balanced.

    `profile` is a preset name or an explicit (demands, supplies) pair of
    4 and 3 quantities; profiles with an unbalanced component are rejected.
    """
    if isinstance(profile, str):
        try:
            demands, supplies = BACKBONE_PROFILES[profile]
        except KeyError:
            raise ValueError(f"unknown backbone profile {profile!r}") from None
    else:
        demands, supplies = profile
    demands = [Fraction(d) for d in demands]
    supplies = [Fraction(s) for s in supplies]
    if len(demands) != 4 or len(supplies) != 3:
        raise ValueError("backbone needs 4 demands and 3 supplies")
    g = make_graph(
        [(f"b{i + 1}", d) for i, d in enumerate(demands)],
        [(f"s{j + 1}", s) for j, s in enumerate(supplies)],
        _BACKBONE_LINKS,
    )
    for c in components(g):
        if not is_balanced(c, g):
            raise ValueError(
                "backbone profile must balance supply and demand in every component"
            )
    return g


@dataclass
class ExperimentConfig:
    base_graph: ExchangeGraph
    k_min: int = 1
    k_max: int = 5
    enumeration_limit: int | None = None
    sample_n: int | None = None
    sample_seed: int = 0
    include_sampled_in_stats: bool = False

    def __post_init__(self):
        free = self.base_graph.n_buyers * self.base_graph.n_sellers - self.base_graph.n_links
        if not (0 <= self.k_min <= self.k_max <= free):
            raise ValueError(
                f"need 0 <= k_min <= k_max <= {free} (addable links), "
                f"got [{self.k_min}, {self.k_max}]"
            )

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        if "base_graph" in obj:
            base = graph_from_dict(obj["base_graph"])
        else:
            base = backbone_graph(obj.get("profile", "default"))
        return cls(
            base_graph=base,
            k_min=int(obj.get("k_min", 1)),
            k_max=int(obj.get("k_max", 5)),
            enumeration_limit=obj.get("enumeration_limit"),
            sample_n=obj.get("sample_n"),
            sample_seed=int(obj.get("sample_seed", 0)),
            include_sampled_in_stats=bool(obj.get("include_sampled_in_stats", False)),
        )


@dataclass(frozen=True)
class ExperimentRow:
    k: int
    added_links: tuple[tuple[int, int], ...]
    n_links: int
    successful: bool
    infeasible_fraction: Fraction | None
    max_total_unmet: Quantity | None
    max_unmet_ratio: Fraction | None
    exact: bool
    error: str | None = None

    def to_dict(self, graph: ExchangeGraph) -> dict:
        added = ";".join(
            f"{graph.buyers[b][0]}-{graph.sellers[s][0]}" for b, s in self.added_links
        )
        return {
            "k": self.k,
            "L": self.n_links,
            "added_links": added,
            "successful": self.successful,
            "infeasible_fraction": (
                format_ratio(self.infeasible_fraction)
                if self.infeasible_fraction is not None
                else ""
            ),
            "max_total_unmet": (
                format_ratio(self.max_total_unmet)
                if self.max_total_unmet is not None
                else ""
            ),
            "max_unmet_ratio": (
                format_ratio(self.max_unmet_ratio)
                if self.max_unmet_ratio is not None
                else ""
            ),
            "exact_flag": self.exact,
            "error": self.error or "",
        }


@dataclass(frozen=True)
class BoxplotStats:
    """Tukey five-number summary with 1.5*IQR whiskers, all exact rationals."""

    median: Fraction
    q25: Fraction
    q75: Fraction
    whisker_low: Fraction
    whisker_high: Fraction
    outliers: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "median": format_ratio(self.median),
            "q25": format_ratio(self.q25),
            "q75": format_ratio(self.q75),
            "whisker_low": format_ratio(self.whisker_low),
            "whisker_high": format_ratio(self.whisker_high),
            "outliers": [format_ratio(v) for v in self.outliers],
        }


def _median(vals: list[Fraction]) -> Fraction:
    n = len(vals)
    mid = n // 2
    if n % 2:
        return vals[mid]
    return (vals[mid - 1] + vals[mid]) / 2


def boxplot_stats(values) -> BoxplotStats:
    """Quartiles by Tukey hinges (median included in both halves when the
    count is odd); outliers lie beyond 1.5*IQR from the quartiles."""
    vals = sorted(Fraction(v) for v in values)
    if not vals:
        raise ValueError("no values")
    n = len(vals)
    med = _median(vals)
    half = n // 2 + (n % 2)
    q25 = _median(vals[:half])
    q75 = _median(vals[n - half:])
    iqr = q75 - q25
    lo_fence = q25 - Fraction(3, 2) * iqr
    hi_fence = q75 + Fraction(3, 2) * iqr
    inside = [v for v in vals if lo_fence <= v <= hi_fence]
    outliers = tuple(v for v in vals if v < lo_fence or v > hi_fence)
    return BoxplotStats(
        median=med,
        q25=q25,
        q75=q75,
        whisker_low=min(inside),
        whisker_high=max(inside),
        outliers=outliers,
    )


def _graph_with_links(base: ExchangeGraph, added) -> ExchangeGraph:
    return ExchangeGraph(
        buyers=base.buyers, sellers=base.sellers, links=base.links | set(added)
    )


def _compute_row(args) -> ExperimentRow:
    config, k, added = args
    graph = _graph_with_links(config.base_graph, added)
    successful = check_success(graph).successful
    limit = (
        config.enumeration_limit
        if config.enumeration_limit is not None
        else enumeration_limit()
    )
    summary: EnumerationSummary | None = None
    error = None
    try:
        summary = enumerate_sessions(graph, limit=limit)
    except EnumerationLimitError as e:
        if config.sample_n:
            summary = sample_sessions(graph, config.sample_n, config.sample_seed)
        else:
            error = str(e)
    if summary is None:
        return ExperimentRow(
            k, tuple(added), graph.n_links, successful, None, None, None, False, error
        )
    ratio = summary.max_total_unmet / graph.total_demand
    return ExperimentRow(
        k=k,
        added_links=tuple(added),
        n_links=graph.n_links,
        successful=successful,
        infeasible_fraction=summary.infeasible_fraction,
        max_total_unmet=summary.max_total_unmet,
        max_unmet_ratio=ratio,
        exact=not summary.estimated,
    )


def run_experiment(config: ExperimentConfig, jobs: int = 1):
    """One row per (k, added-link subset); rows ordered by k then link set.

    Returns (rows, stats) where stats maps L -> {metric -> BoxplotStats} over
    exact rows (sampled rows included only if configured).
    """
    base = config.base_graph
    missing = sorted(
        (b, s)
        for b in range(base.n_buyers)
        for s in range(base.n_sellers)
        if (b, s) not in base.links
    )
    tasks = [
        (config, k, combo)
        for k in range(config.k_min, config.k_max + 1)
        for combo in itertools.combinations(missing, k)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_compute_row, tasks, chunksize=8))
    else:
        rows = [_compute_row(t) for t in tasks]
    rows.sort(key=lambda r: (r.k, r.added_links))

    by_l: dict[int, list[ExperimentRow]] = {}
    for r in rows:
        if r.error is None and (r.exact or config.include_sampled_in_stats):
            by_l.setdefault(r.n_links, []).append(r)
    stats = {
        L: {
            "infeasible_fraction": boxplot_stats(
                [r.infeasible_fraction for r in group]
            ),
            "max_unmet_ratio": boxplot_stats([r.max_unmet_ratio for r in group]),
        }
        for L, group in sorted(by_l.items())
    }
    return rows, stats


CSV_COLUMNS = [
    "k",
    "L",
    "added_links",
    "successful",
    "infeasible_fraction",
    "max_total_unmet",
    "max_unmet_ratio",
    "exact_flag",
    "error",
]


def emit_results(rows, stats, fmt: str, path, config: ExperimentConfig) -> None:
    """Write rows (and, for JSON, stats plus config metadata) to `path`.

    Output is deterministic: identical configs produce byte-identical files.
    """
    base = config.base_graph
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for r in rows:
                writer.writerow(r.to_dict(base))
    elif fmt == "json":
        doc = {
            "config": {
                "base_graph": graph_to_dict(base),
                "k_min": config.k_min,
                "k_max": config.k_max,
                "sample_n": config.sample_n,
                "sample_seed": config.sample_seed,
            },
            "rows": [r.to_dict(base) for r in rows],
            "stats": {
                str(L): {name: s.to_dict() for name, s in metrics.items()}
                for L, metrics in stats.items()
            },
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
