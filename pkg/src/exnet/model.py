"""Domain types for fixed-price exchange networks on bipartite buyer-seller graphs.

Budgets are exact rationals throughout; the success characterization rests on
exact equality of supply and demand, so nothing here ever rounds.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

Quantity = Fraction

_QUANTITY_RE = re.compile(r"^\s*(\d+)\s*(?:/\s*(\d+)\s*)?$")


class GraphFormatError(ValueError):
    """Raised on malformed graph input (bad quantities, duplicate links, unknown ids)."""


def parse_quantity(text) -> Quantity:
    """Parse a nonnegative exact quantity from an integer or a "p/q" string."""
    if isinstance(text, int) and not isinstance(text, bool):
        if text < 0:
            raise GraphFormatError(f"quantity must be nonnegative: {text}")
        return Fraction(text)
    if isinstance(text, str):
        m = _QUANTITY_RE.match(text)
        if m:
            num = int(m.group(1))
            den = int(m.group(2)) if m.group(2) is not None else 1
            if den == 0:
                raise GraphFormatError(f"zero denominator in quantity: {text!r}")
            return Fraction(num, den)
    raise GraphFormatError(
        f"quantity must be a nonnegative integer or 'p/q' string, got {text!r}"
    )


def format_quantity(q: Quantity) -> str:
    """Format a quantity as "p" for integers and "p/q" otherwise; parse round-trips exactly."""
    return str(q)


def format_ratio(q: Fraction) -> str:
    """Format a rational always as "p/q", denominator kept even when 1."""
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ExchangeGraph:
    """Immutable exchange-network instance.

    buyers/sellers are ordered (id, budget) pairs; links are (buyer_index,
    seller_index) pairs. Total supply need not equal total demand: the reserve
    constructions deliberately violate global balance.
    """

    buyers: tuple[tuple[str, Quantity], ...]
    sellers: tuple[tuple[str, Quantity], ...]
    links: frozenset[tuple[int, int]]

    def __post_init__(self):
        buyer_ids = [bid for bid, _ in self.buyers]
        seller_ids = [sid for sid, _ in self.sellers]
        if len(set(buyer_ids)) != len(buyer_ids):
            raise GraphFormatError("duplicate buyer ids")
        if len(set(seller_ids)) != len(seller_ids):
            raise GraphFormatError("duplicate seller ids")
        for _, q in self.buyers + self.sellers:
            if q < 0:
                raise GraphFormatError("negative budget")
        for b, s in self.links:
            if not (0 <= b < len(self.buyers) and 0 <= s < len(self.sellers)):
                raise GraphFormatError(f"link ({b},{s}) out of range")

    @property
    def n_buyers(self) -> int:
        return len(self.buyers)

    @property
    def n_sellers(self) -> int:
        return len(self.sellers)

    @property
    def n_links(self) -> int:
        return len(self.links)

    @cached_property
    def link_list(self) -> tuple[tuple[int, int], ...]:
        """Canonical link indexing: lexicographic by (buyer, seller)."""
        return tuple(sorted(self.links))

    @cached_property
    def demands(self) -> tuple[Quantity, ...]:
        return tuple(q for _, q in self.buyers)

    @cached_property
    def supplies(self) -> tuple[Quantity, ...]:
        return tuple(q for _, q in self.sellers)

    @property
    def total_demand(self) -> Quantity:
        return sum(self.demands, Fraction(0))

    @property
    def total_supply(self) -> Quantity:
        return sum(self.supplies, Fraction(0))


def make_graph(buyers, sellers, links) -> ExchangeGraph:
    """Build a graph from iterables, rejecting duplicate links."""
    links = list(links)
    if len(set(links)) != len(links):
        raise GraphFormatError("duplicate links")
    return ExchangeGraph(
        buyers=tuple((str(i), Fraction(d)) for i, d in buyers),
        sellers=tuple((str(i), Fraction(s)) for i, s in sellers),
        links=frozenset((int(b), int(s)) for b, s in links),
    )


@dataclass(frozen=True)
class Component:
    """One connected component of the bipartite graph, with its induced links."""

    buyer_indices: frozenset[int]
    seller_indices: frozenset[int]
    link_subset: frozenset[tuple[int, int]]


def components(graph: ExchangeGraph) -> list[Component]:
    """Connected components, ignoring budgets; isolated actors form singletons.

    Deterministic order: by the smallest actor index, buyers before sellers.
    """
    n_b, n_s = graph.n_buyers, graph.n_sellers
    # actor ids: buyers 0..n_b-1, sellers n_b..n_b+n_s-1
    adj: list[list[int]] = [[] for _ in range(n_b + n_s)]
    for b, s in graph.links:
        adj[b].append(n_b + s)
        adj[n_b + s].append(b)

    seen = [False] * (n_b + n_s)
    out = []
    for start in range(n_b + n_s):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        actors = []
        while stack:
            a = stack.pop()
            actors.append(a)
            for nb in adj[a]:
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
        buyers = frozenset(a for a in actors if a < n_b)
        sellers = frozenset(a - n_b for a in actors if a >= n_b)
        link_subset = frozenset(
            (b, s) for b, s in graph.links if b in buyers and s in sellers
        )
        out.append(Component(buyers, sellers, link_subset))
    return out


def is_complete_bipartite(c: Component, graph: ExchangeGraph) -> bool:
    """True iff the component carries every possible buyer-seller link."""
    return len(c.link_subset) == len(c.buyer_indices) * len(c.seller_indices)


def is_balanced(c: Component, graph: ExchangeGraph) -> bool:
    """True iff total demand equals total supply within the component, exactly."""
    demand = sum((graph.demands[b] for b in c.buyer_indices), Fraction(0))
    supply = sum((graph.supplies[s] for s in c.seller_indices), Fraction(0))
    return demand == supply


# ---------------------------------------------------------------------------
# JSON graph format (canonical, bit-exact round-trip):
# { "buyers": [{"id": "b1", "demand": "5"}, ...],
#   "sellers": [{"id": "s1", "supply": "3/2"}, ...],
#   "links": [["b1", "s1"], ...] }
# ---------------------------------------------------------------------------

def graph_to_dict(graph: ExchangeGraph) -> dict:
    return {
        "buyers": [
            {"id": bid, "demand": format_quantity(d)} for bid, d in graph.buyers
        ],
        "sellers": [
            {"id": sid, "supply": format_quantity(s)} for sid, s in graph.sellers
        ],
        "links": [
            [graph.buyers[b][0], graph.sellers[s][0]] for b, s in graph.link_list
        ],
    }


def graph_from_dict(obj) -> ExchangeGraph:
    if not isinstance(obj, dict):
        raise GraphFormatError("graph document must be a JSON object")
    for key in ("buyers", "sellers", "links"):
        if key not in obj or not isinstance(obj[key], list):
            raise GraphFormatError(f"missing or non-list field {key!r}")

    def side(entries, budget_key):
        out = []
        for e in entries:
            if not isinstance(e, dict) or "id" not in e or budget_key not in e:
                raise GraphFormatError(
                    f"each entry needs 'id' and {budget_key!r}: {e!r}"
                )
            out.append((str(e["id"]), parse_quantity(e[budget_key])))
        return tuple(out)

    buyers = side(obj["buyers"], "demand")
    sellers = side(obj["sellers"], "supply")
    b_index = {bid: i for i, (bid, _) in enumerate(buyers)}
    s_index = {sid: i for i, (sid, _) in enumerate(sellers)}
    links = []
    for pair in obj["links"]:
        if not isinstance(pair, list) or len(pair) != 2:
            raise GraphFormatError(f"link must be a [buyer, seller] pair: {pair!r}")
        bid, sid = pair
        if bid not in b_index:
            raise GraphFormatError(f"link references unknown buyer id {bid!r}")
        if sid not in s_index:
            raise GraphFormatError(f"link references unknown seller id {sid!r}")
        links.append((b_index[bid], s_index[sid]))
    if len(set(links)) != len(links):
        raise GraphFormatError("duplicate links")
    return ExchangeGraph(buyers=buyers, sellers=sellers, links=frozenset(links))


def load_graph(path) -> ExchangeGraph:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphFormatError(f"{path}: invalid JSON: {e}") from e
    return graph_from_dict(obj)


def save_graph(graph: ExchangeGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(graph_to_dict(graph), f, indent=2)
        f.write("\n")
