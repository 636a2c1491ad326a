"""Trading sessions: the forced maximal-trade rule, exact enumeration, sampling.

A session processes every link exactly once in a given order. Enumeration over
all L! orderings is exact: counts are computed by a memoized recursion over
budget states, never by floating point or sampling.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._kernels import sample_sessions_scaled
from .model import ExchangeGraph, Quantity, format_ratio

DEFAULT_ENUMERATION_LIMIT = 12


class SessionError(ValueError):
    """Contract violation in session execution (bad ordering, reused link)."""


class EnumerationLimitError(RuntimeError):
    """Graph has more links than the exact-enumeration limit allows."""

    def __init__(self, n_links: int, limit: int):
        super().__init__(
            f"graph has {n_links} links, above the exact enumeration limit "
            f"{limit}; use sample_sessions (CLI: --sample N) instead"
        )
        self.n_links = n_links
        self.limit = limit


def enumeration_limit() -> int:
    """Current exact-enumeration limit; EXNET_LIMIT overrides the default of 12."""
    raw = os.environ.get("EXNET_LIMIT")
    return int(raw) if raw else DEFAULT_ENUMERATION_LIMIT


@dataclass
class TradeState:
    """Mutable per-session budgets plus the set of already-processed links."""

    remaining_demand: list[Quantity]
    remaining_supply: list[Quantity]
    processed: set[int] = field(default_factory=set)

    @classmethod
    def initial(cls, graph: ExchangeGraph) -> "TradeState":
        return cls(list(graph.demands), list(graph.supplies), set())

    def copy(self) -> "TradeState":
        return TradeState(
            list(self.remaining_demand), list(self.remaining_supply), set(self.processed)
        )


@dataclass(frozen=True)
class SessionOutcome:
    final_state: TradeState
    unmet: tuple[Quantity, ...]
    feasible: bool

    @property
    def total_unmet(self) -> Quantity:
        return sum(self.unmet, Fraction(0))

    def to_dict(self) -> dict:
        return {
            "unmet": [format_ratio(u) for u in self.unmet],
            "remaining_supply": [
                format_ratio(s) for s in self.final_state.remaining_supply
            ],
            "feasible": self.feasible,
        }


@dataclass(frozen=True)
class EnumerationSummary:
    """Counts over orderings; exact unless `estimated` (then totals are samples)."""

    total_orderings: int
    infeasible_count: int
    infeasible_fraction: Fraction
    max_total_unmet: Quantity
    max_buyer_unmet: Quantity
    states_visited: int
    estimated: bool = False

    def to_dict(self) -> dict:
        return {
            "total_orderings": self.total_orderings,
            "infeasible_count": self.infeasible_count,
            "infeasible_fraction": format_ratio(self.infeasible_fraction),
            "max_total_unmet": format_ratio(self.max_total_unmet),
            "max_buyer_unmet": format_ratio(self.max_buyer_unmet),
            "states_visited": self.states_visited,
            "estimated": self.estimated,
        }


def trade(state: TradeState, link: int, graph: ExchangeGraph) -> TradeState:
    """Apply the forced maximal trade on one link; returns a new state.

    The traded amount is min(remaining demand, remaining supply); with either
    side already at zero the trade is a no-op but the link is still consumed.
    """
    if link in state.processed:
        raise SessionError(f"link {link} already processed")
    if not (0 <= link < len(graph.link_list)):
        raise SessionError(f"link index {link} out of range")
    b, s = graph.link_list[link]
    new = state.copy()
    amount = min(new.remaining_demand[b], new.remaining_supply[s])
    new.remaining_demand[b] -= amount
    new.remaining_supply[s] -= amount
    new.processed.add(link)
    return new


def run_session(graph: ExchangeGraph, ordering) -> SessionOutcome:
    """Execute one full trading session: every link once, in the given order."""
    ordering = list(ordering)
    if sorted(ordering) != list(range(graph.n_links)):
        raise SessionError(
            f"ordering must be a permutation of 0..{graph.n_links - 1}, got {ordering}"
        )
    state = TradeState.initial(graph)
    for link in ordering:
        state = trade(state, link, graph)
    unmet = tuple(state.remaining_demand)
    return SessionOutcome(state, unmet, feasible=not any(unmet))


def run_relaxed_session(graph: ExchangeGraph, steps) -> SessionOutcome:
    """Variant engine for the relaxed-amount property: steps are (link, amount)
    pairs, amount None meaning maximal; a link may be traded in several parts.

    This exists only as a test harness; the model proper always trades
    maximally and consumes each link once.
    """
    state = TradeState.initial(graph)
    for link, amount in steps:
        b, s = graph.link_list[link]
        cap = min(state.remaining_demand[b], state.remaining_supply[s])
        amt = cap if amount is None else min(Fraction(amount), cap)
        if amt < 0:
            raise SessionError("negative trade amount")
        state.remaining_demand[b] -= amt
        state.remaining_supply[s] -= amt
    unmet = tuple(state.remaining_demand)
    return SessionOutcome(state, unmet, feasible=not any(unmet))


def _scaled_budgets(graph: ExchangeGraph):
    """Common-denominator integer budgets; exact by construction."""
    scale = 1
    for q in graph.demands + graph.supplies:
        scale = scale * q.denominator // math.gcd(scale, q.denominator)
    demands = tuple(int(q * scale) for q in graph.demands)
    supplies = tuple(int(q * scale) for q in graph.supplies)
    return demands, supplies, scale


def _active_links(demands, supplies, mask, link_b, link_s):
    """Unprocessed links whose endpoints both still have positive budget.

    Budgets only decrease, so a link that is a no-op now is a no-op in every
    continuation; only active links can change the state.
    """
    act = []
    m = mask
    while m:
        low = m & -m
        i = low.bit_length() - 1
        if demands[link_b[i]] > 0 and supplies[link_s[i]] > 0:
            act.append(i)
        m ^= low
    return act


def enumerate_sessions(graph: ExchangeGraph, limit: int | None = None) -> EnumerationSummary:
    """Exact counts over all L! orderings.

    Memoized recursion over (budgets, active unprocessed links): the relative
    order of the active links under a uniformly random permutation is uniform,
    and no-op links never affect budgets, so the infeasible fraction over L!
    orderings equals the fraction computed over active links alone.
    """
    if limit is None:
        limit = enumeration_limit()
    L = graph.n_links
    if L > limit:
        raise EnumerationLimitError(L, limit)

    demands, supplies, scale = _scaled_budgets(graph)
    link_b = [b for b, _ in graph.link_list]
    link_s = [s for _, s in graph.link_list]
    full_mask = (1 << L) - 1
    memo: dict = {}

    def solve(d, s, mask):
        act = _active_links(d, s, mask, link_b, link_s)
        if not act:
            total = sum(d)
            worst = max(d) if d else 0
            return (Fraction(1 if total else 0), total, worst)
        act_mask = 0
        for i in act:
            act_mask |= 1 << i
        key = (d, s, act_mask)
        hit = memo.get(key)
        if hit is not None:
            return hit
        frac_sum = Fraction(0)
        max_total = 0
        max_worst = 0
        for i in act:
            b, t = link_b[i], link_s[i]
            amt = min(d[b], s[t])
            nd = d[:b] + (d[b] - amt,) + d[b + 1 :]
            ns = s[:t] + (s[t] - amt,) + s[t + 1 :]
            f, mt, mw = solve(nd, ns, mask & ~(1 << i))
            frac_sum += f
            if mt > max_total:
                max_total = mt
            if mw > max_worst:
                max_worst = mw
        result = (frac_sum / len(act), max_total, max_worst)
        memo[key] = result
        return result

    frac, max_total, max_worst = solve(demands, supplies, full_mask)
    total_orderings = math.factorial(L)
    count = frac * total_orderings
    assert count.denominator == 1, "infeasible count must be integral"
    return EnumerationSummary(
        total_orderings=total_orderings,
        infeasible_count=int(count),
        infeasible_fraction=frac,
        max_total_unmet=Fraction(max_total, scale),
        max_buyer_unmet=Fraction(max_worst, scale),
        states_visited=len(memo),
    )


def find_infeasible_witness(graph: ExchangeGraph) -> list[int] | None:
    """Some ordering whose session is infeasible, or None when all are feasible.

    Depth-first over active links in index order with memoized all-feasible
    states; deterministic for a fixed graph. Links left over at the infeasible
    leaf are no-ops and are appended in index order.
    """
    demands, supplies, scale = _scaled_budgets(graph)
    L = graph.n_links
    link_b = [b for b, _ in graph.link_list]
    link_s = [s for _, s in graph.link_list]
    all_feasible: set = set()

    def dfs(d, s, mask, prefix):
        act = _active_links(d, s, mask, link_b, link_s)
        if not act:
            return list(prefix) if any(d) else None
        act_mask = 0
        for i in act:
            act_mask |= 1 << i
        key = (d, s, act_mask)
        if key in all_feasible:
            return None
        for i in act:
            b, t = link_b[i], link_s[i]
            amt = min(d[b], s[t])
            nd = d[:b] + (d[b] - amt,) + d[b + 1 :]
            ns = s[:t] + (s[t] - amt,) + s[t + 1 :]
            prefix.append(i)
            hit = dfs(nd, ns, mask & ~(1 << i), prefix)
            if hit is not None:
                return hit
            prefix.pop()
        all_feasible.add(key)
        return None

    seq = dfs(demands, supplies, (1 << L) - 1, [])
    if seq is None:
        return None
    rest = sorted(set(range(L)) - set(seq))
    return seq + rest


def sample_sessions(graph: ExchangeGraph, n: int, seed: int) -> EnumerationSummary:
    """Monte Carlo estimate over n uniformly random orderings (seeded).

    The reported fraction is an estimate and max_total_unmet a lower bound on
    the true maximum; total_orderings reports the sample count.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    demands, supplies, scale = _scaled_budgets(graph)
    if graph.n_links == 0:
        # degenerate: the single empty ordering, sampled n times
        total = sum(demands)
        bad = n if total else 0
        return EnumerationSummary(
            total_orderings=n,
            infeasible_count=bad,
            infeasible_fraction=Fraction(bad, n),
            max_total_unmet=Fraction(total, scale),
            max_buyer_unmet=Fraction(max(demands) if demands else 0, scale),
            states_visited=n,
            estimated=True,
        )
    link_b = np.array([b for b, _ in graph.link_list], dtype=np.int64)
    link_s = np.array([s for _, s in graph.link_list], dtype=np.int64)
    bad, max_total, max_worst = sample_sessions_scaled(
        np.array(demands, dtype=np.int64),
        np.array(supplies, dtype=np.int64),
        link_b,
        link_s,
        n,
        seed,
    )
    return EnumerationSummary(
        total_orderings=n,
        infeasible_count=int(bad),
        infeasible_fraction=Fraction(int(bad), n),
        max_total_unmet=Fraction(int(max_total), scale),
        max_buyer_unmet=Fraction(int(max_worst), scale),
        states_visited=n,
        estimated=True,
    )


def brute_force_enumerate(graph: ExchangeGraph) -> EnumerationSummary:
    """Oracle: run every one of the L! orderings explicitly via run_session.

    Independent of the memoized recursion; only practical for small L.
    """
    import itertools

    L = graph.n_links
    bad = 0
    max_total = Fraction(0)
    max_worst = Fraction(0)
    total = 0
    for perm in itertools.permutations(range(L)):
        out = run_session(graph, perm)
        total += 1
        if not out.feasible:
            bad += 1
        t = out.total_unmet
        if t > max_total:
            max_total = t
        w = max(out.unmet) if out.unmet else Fraction(0)
        if w > max_worst:
            max_worst = w
    return EnumerationSummary(
        total_orderings=total,
        infeasible_count=bad,
        infeasible_fraction=Fraction(bad, total),
        max_total_unmet=max_total,
        max_buyer_unmet=max_worst,
        states_visited=total,
    )
