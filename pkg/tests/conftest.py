import itertools
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from exnet import ExchangeGraph, backbone_graph, make_graph


@pytest.fixture(scope="session")
def backbone():
    return backbone_graph("default")


def supergraph(base: ExchangeGraph, added) -> ExchangeGraph:
    return ExchangeGraph(
        buyers=base.buyers, sellers=base.sellers, links=base.links | set(added)
    )


def all_supergraphs(base: ExchangeGraph, k_values):
    missing = sorted(
        (b, s)
        for b in range(base.n_buyers)
        for s in range(base.n_sellers)
        if (b, s) not in base.links
    )
    for k in k_values:
        for combo in itertools.combinations(missing, k):
            yield k, combo, supergraph(base, combo)


quantities = st.fractions(
    min_value=0, max_value=5, max_denominator=4
)


@st.composite
def small_graphs(draw, max_buyers=3, max_sellers=3, max_links=5):
    n_b = draw(st.integers(1, max_buyers))
    n_s = draw(st.integers(1, max_sellers))
    demands = draw(st.lists(quantities, min_size=n_b, max_size=n_b))
    supplies = draw(st.lists(quantities, min_size=n_s, max_size=n_s))
    possible = [(b, s) for b in range(n_b) for s in range(n_s)]
    links = draw(
        st.lists(st.sampled_from(possible), unique=True, max_size=max_links)
    )
    return make_graph(
        [(f"b{i}", d) for i, d in enumerate(demands)],
        [(f"s{j}", s) for j, s in enumerate(supplies)],
        links,
    )
