"""Graph-level analysis: order-independence, feasibility, maximum unmet demand.

Order-independence (a "successful" graph) is decided purely topologically:
every component must be complete bipartite and internally balanced.
Feasibility asks only for the existence of one demand-satisfying allocation
and is decided by exact max-flow. Maximum unmet demand is the optimum of a
complementarity-constrained program, solved exactly by enumerating which
buyers end up stranded.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Component,
    ExchangeGraph,
    Quantity,
    components,
    format_ratio,
    is_balanced,
    is_complete_bipartite,
    make_graph,
)
from .solver import EQ, LE, FlowNetwork, LinearProgram, max_flow, solve_lp

NOT_COMPLETE_BIPARTITE = "not-complete-bipartite"
UNBALANCED = "unbalanced"


class ModelViolationError(RuntimeError):
    """No stranded-buyer pattern admits a stalled allocation; indicates a bug."""


@dataclass(frozen=True)
class SuccessReport:
    successful: bool
    failing_components: tuple[tuple[Component, str], ...]

    def to_dict(self, graph: ExchangeGraph) -> dict:
        return {
            "successful": self.successful,
            "failing_components": [
                {
                    "buyers": sorted(graph.buyers[b][0] for b in c.buyer_indices),
                    "sellers": sorted(graph.sellers[s][0] for s in c.seller_indices),
                    "reason": reason,
                }
                for c, reason in self.failing_components
            ],
        }


@dataclass(frozen=True)
class Allocation:
    """Transaction matrix with per-buyer unmet demand."""

    transactions: tuple[tuple[Quantity, ...], ...]  # n_buyers x n_sellers
    unmet: tuple[Quantity, ...]

    def to_dict(self) -> dict:
        return {
            "transactions": [
                [format_ratio(t) for t in row] for row in self.transactions
            ],
            "unmet": [format_ratio(u) for u in self.unmet],
        }


def allocation_satisfies(graph: ExchangeGraph, alloc: Allocation) -> bool:
    """Exact re-substitution of the full transaction constraint system,
    including the per-link caps implied by the row/column sums."""
    t = alloc.transactions
    n_b, n_s = graph.n_buyers, graph.n_sellers
    if len(t) != n_b or any(len(row) != n_s for row in t) or len(alloc.unmet) != n_b:
        return False
    for i in range(n_b):
        for j in range(n_s):
            if (i, j) not in graph.links:
                if t[i][j] != 0:
                    return False
            else:
                if t[i][j] < 0 or t[i][j] > graph.demands[i] or t[i][j] > graph.supplies[j]:
                    return False
    for i in range(n_b):
        row = sum(t[i], Fraction(0))
        if row > graph.demands[i] or alloc.unmet[i] != graph.demands[i] - row:
            return False
    for j in range(n_s):
        if sum((t[i][j] for i in range(n_b)), Fraction(0)) > graph.supplies[j]:
            return False
    return True


def allocation_is_stalled(graph: ExchangeGraph, alloc: Allocation) -> bool:
    """Complementarity check: a buyer with unmet demand must see only
    fully-drained neighbor sellers."""
    if not allocation_satisfies(graph, alloc):
        return False
    n_b, n_s = graph.n_buyers, graph.n_sellers
    left = [
        graph.supplies[j] - sum((alloc.transactions[i][j] for i in range(n_b)), Fraction(0))
        for j in range(n_s)
    ]
    for i in range(n_b):
        if alloc.unmet[i] > 0:
            if any(left[j] > 0 for j in range(n_s) if (i, j) in graph.links):
                return False
    return True


def check_success(graph: ExchangeGraph) -> SuccessReport:
    """Order-independence test: every component complete bipartite and balanced."""
    failing = []
    for c in components(graph):
        if not is_balanced(c, graph):
            failing.append((c, UNBALANCED))
        if not is_complete_bipartite(c, graph):
            failing.append((c, NOT_COMPLETE_BIPARTITE))
    return SuccessReport(successful=not failing, failing_components=tuple(failing))


def _flow_network(graph: ExchangeGraph) -> FlowNetwork:
    # node layout: 0 source, 1..n_b buyers, n_b+1..n_b+n_s sellers, last sink
    n_b, n_s = graph.n_buyers, graph.n_sellers
    sink = 1 + n_b + n_s
    arcs = []
    for i in range(n_b):
        arcs.append((0, 1 + i, graph.demands[i]))
    for b, s in graph.link_list:
        arcs.append((1 + b, 1 + n_b + s, min(graph.demands[b], graph.supplies[s])))
    for j in range(n_s):
        arcs.append((1 + n_b + j, sink, graph.supplies[j]))
    return FlowNetwork(num_nodes=sink + 1, arcs=tuple(arcs), source=0, sink=sink)


def feasibility(graph: ExchangeGraph) -> Allocation | None:
    """An allocation meeting every demand in full, or None if none exists.

    Decided by exact max-flow on the transportation network: feasible iff
    the max flow saturates all demands.
    """
    net = _flow_network(graph)
    value, flows = max_flow(net)
    if value != graph.total_demand:
        return None
    n_b, n_s = graph.n_buyers, graph.n_sellers
    t = [[Fraction(0)] * n_s for _ in range(n_b)]
    for arc_i, (b, s) in enumerate(graph.link_list, start=n_b):
        t[b][s] = flows[arc_i]
    return Allocation(
        transactions=tuple(tuple(row) for row in t),
        unmet=tuple(Fraction(0) for _ in range(n_b)),
    )


def feasibility_by_lp(graph: ExchangeGraph) -> Allocation | None:
    """Independent oracle: solve the equality-demand constraint system with the
    exact simplex instead of max-flow."""
    links = graph.link_list
    n_vars = len(links)
    lp = LinearProgram(objective=[Fraction(0)] * n_vars)
    for i in range(graph.n_buyers):
        row = [Fraction(1) if b == i else Fraction(0) for b, _ in links]
        lp.add(row, EQ, graph.demands[i])
    for j in range(graph.n_sellers):
        row = [Fraction(1) if s == j else Fraction(0) for _, s in links]
        lp.add(row, LE, graph.supplies[j])
    res = solve_lp(lp)
    if res.status != "optimal":
        return None
    n_b, n_s = graph.n_buyers, graph.n_sellers
    t = [[Fraction(0)] * n_s for _ in range(n_b)]
    for var, (b, s) in enumerate(links):
        t[b][s] = res.point[var]
    return Allocation(
        transactions=tuple(tuple(row) for row in t),
        unmet=tuple(Fraction(0) for _ in range(n_b)),
    )


DEFAULT_PATTERN_LIMIT = 20


def max_unmet_demand(
    graph: ExchangeGraph, limit: int = DEFAULT_PATTERN_LIMIT
) -> tuple[Quantity, Allocation]:
    """Exact maximum total unmet demand over stalled allocations.

    The complementarity condition (unmet demand only at buyers whose neighbor
    sellers are all drained) is resolved by enumerating stranded-buyer
    patterns: stranded buyers force saturation equalities on their neighbor
    sellers, satisfied buyers force demand equalities; each pattern is an
    exact LP. Ties go to the lexicographically smallest pattern.
    """
    n_b, n_s = graph.n_buyers, graph.n_sellers
    if n_b > limit:
        raise ValueError(f"{n_b} buyers exceeds the pattern-enumeration limit {limit}")
    links = graph.link_list
    neighbors = [sorted(s for b, s in links if b == i) for i in range(n_b)]

    best: tuple[Quantity, Allocation] | None = None
    for z in itertools.product((0, 1), repeat=n_b):
        stranded = [i for i in range(n_b) if z[i]]
        # variables: t_e per link, then u_i per stranded buyer
        n_t = len(links)
        u_pos = {i: n_t + k for k, i in enumerate(stranded)}
        n_vars = n_t + len(stranded)
        obj = [Fraction(0)] * n_vars
        for i in stranded:
            obj[u_pos[i]] = Fraction(1)
        lp = LinearProgram(objective=obj)

        saturated = set()
        for i in stranded:
            saturated.update(neighbors[i])
        for i in range(n_b):
            row = [Fraction(0)] * n_vars
            for e, (b, _) in enumerate(links):
                if b == i:
                    row[e] = Fraction(1)
            if z[i]:
                row[u_pos[i]] = Fraction(1)
                lp.add(row, EQ, graph.demands[i])  # u_i = D_i - sum_j t_ij
            else:
                lp.add(row, EQ, graph.demands[i])
        for j in range(n_s):
            row = [Fraction(0)] * n_vars
            for e, (_, s) in enumerate(links):
                if s == j:
                    row[e] = Fraction(1)
            lp.add(row, EQ if j in saturated else LE, graph.supplies[j])

        res = solve_lp(lp)
        if res.status != "optimal":
            continue
        if best is None or res.value > best[0]:
            t = [[Fraction(0)] * n_s for _ in range(n_b)]
            for e, (b, s) in enumerate(links):
                t[b][s] = res.point[e]
            unmet = tuple(
                graph.demands[i] - sum(t[i], Fraction(0)) for i in range(n_b)
            )
            best = (
                res.value,
                Allocation(tuple(tuple(row) for row in t), unmet),
            )
    if best is None:
        raise ModelViolationError(
            "no stranded-buyer pattern is feasible; the maximal-trade model "
            "guarantees at least one stalled allocation exists"
        )
    return best


def star_instance(n_b: int, d: Quantity, s1_supply: Quantity) -> ExchangeGraph:
    """Hub-seller worst case: buyer b_i paired with seller s_i (all budgets d),
    plus links from every buyer but the first to seller s_1, whose supply is
    s1_supply. Making it order-independent needs s_1 supply n_b * d."""
    if n_b < 2:
        raise ValueError("n_b must be >= 2")
    d = Fraction(d)
    if d <= 0:
        raise ValueError("demand must be positive")
    buyers = [(f"b{i + 1}", d) for i in range(n_b)]
    sellers = [(f"s{i + 1}", Fraction(s1_supply) if i == 0 else d) for i in range(n_b)]
    links = [(i, i) for i in range(n_b)] + [(j, 0) for j in range(1, n_b)]
    return make_graph(buyers, sellers, links)
