"""Exact-arithmetic optimization kernels: dense rational simplex and max-flow.

Everything here works in Fraction arithmetic; returned points satisfy their
constraint systems exactly on re-substitution. Problem sizes are tiny, so
dense tableaus and Edmonds-Karp are entirely adequate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

LE, EQ, GE = "<=", "=", ">="


@dataclass
class LinearProgram:
    """maximize objective . x subject to rows, x >= 0."""

    objective: list[Fraction]
    rows: list[tuple[list[Fraction], str, Fraction]] = field(default_factory=list)

    def add(self, coeffs, rel: str, rhs) -> None:
        if rel not in (LE, EQ, GE):
            raise ValueError(f"bad relation {rel!r}")
        if len(coeffs) != len(self.objective):
            raise ValueError("coefficient length mismatch")
        self.rows.append(([Fraction(c) for c in coeffs], rel, Fraction(rhs)))


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    point: tuple[Fraction, ...] | None = None


def _pivot(tableau, basis, row, col):
    piv = tableau[row][col]
    inv = Fraction(1) / piv
    tableau[row] = [x * inv for x in tableau[row]]
    for r in range(len(tableau)):
        if r != row and tableau[r][col] != 0:
            factor = tableau[r][col]
            tableau[r] = [a - factor * b for a, b in zip(tableau[r], tableau[row])]
    basis[row] = col


def _simplex(tableau, basis, costs):
    """Maximize costs.x on the tableau (rows are equalities with rhs last).

    Bland's rule on both entering and leaving choices; returns "optimal" or
    "unbounded". Terminates on every input.
    """
    m = len(tableau)
    n = len(costs)
    while True:
        # reduced costs r_j = c_j - c_B . column_j
        enter = -1
        for j in range(n):
            rj = costs[j]
            for i in range(m):
                cb = costs[basis[i]]
                if cb:
                    rj -= cb * tableau[i][j]
            if rj > 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = None
        for i in range(m):
            a = tableau[i][enter]
            if a > 0:
                ratio = tableau[i][-1] / a
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[leave]
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(tableau, basis, leave, enter)


def solve_lp(lp: LinearProgram) -> LPResult:
    """Two-phase exact simplex with Bland's anti-cycling rule."""
    n = len(lp.objective)
    rows = []
    for coeffs, rel, rhs in lp.rows:
        coeffs = list(coeffs)
        if rhs < 0:
            coeffs = [-c for c in coeffs]
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        rows.append((coeffs, rel, rhs))

    m = len(rows)
    n_slack = sum(1 for _, rel, _ in rows if rel != EQ)
    n_art = sum(1 for _, rel, _ in rows if rel != LE)
    width = n + n_slack + n_art + 1  # + rhs

    tableau = []
    basis = []
    slack_at = n
    art_at = n + n_slack
    for coeffs, rel, rhs in rows:
        row = [Fraction(0)] * width
        row[:n] = [Fraction(c) for c in coeffs]
        row[-1] = rhs
        if rel == LE:
            row[slack_at] = Fraction(1)
            basis.append(slack_at)
            slack_at += 1
        elif rel == GE:
            row[slack_at] = Fraction(-1)
            slack_at += 1
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_at += 1
        else:
            row[art_at] = Fraction(1)
            basis.append(art_at)
            art_at += 1
        tableau.append(row)

    n_struct = n + n_slack
    if n_art:
        phase1 = [Fraction(0)] * (width - 1)
        for j in range(n_struct, width - 1):
            phase1[j] = Fraction(-1)
        status = _simplex(tableau, basis, phase1)
        assert status == "optimal"  # phase 1 is bounded by 0
        art_total = sum(tableau[i][-1] for i in range(m) if basis[i] >= n_struct)
        if art_total != 0:
            return LPResult("infeasible")
        # drive residual zero-valued artificials out of the basis
        for i in range(m):
            if basis[i] >= n_struct:
                for j in range(n_struct):
                    if tableau[i][j] != 0:
                        _pivot(tableau, basis, i, j)
                        break
        # a row still basic in an artificial is all-zero in structural columns
        keep = [i for i in range(m) if basis[i] < n_struct]
        tableau = [tableau[i] for i in keep]
        basis = [basis[i] for i in keep]
        m = len(tableau)
        # drop artificial columns
        tableau = [row[:n_struct] + [row[-1]] for row in tableau]
        width = n_struct + 1

    costs = [Fraction(c) for c in lp.objective] + [Fraction(0)] * (width - 1 - n)
    status = _simplex(tableau, basis, costs)
    if status == "unbounded":
        return LPResult("unbounded")
    point = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            point[basis[i]] = tableau[i][-1]
    value = sum(
        (c * x for c, x in zip(lp.objective, point)), Fraction(0)
    )
    return LPResult("optimal", value, tuple(point))


@dataclass(frozen=True)
class FlowNetwork:
    """Directed network with exact rational capacities."""

    num_nodes: int
    arcs: tuple[tuple[int, int, Fraction], ...]
    source: int
    sink: int

    def __post_init__(self):
        for u, v, cap in self.arcs:
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise ValueError(f"arc ({u},{v}) out of range")
            if cap < 0:
                raise ValueError("negative capacity")
            if v == self.source:
                raise ValueError("arc into source")
            if u == self.sink:
                raise ValueError("arc out of sink")


def max_flow(net: FlowNetwork) -> tuple[Fraction, list[Fraction]]:
    """Exact maximum flow via shortest augmenting paths (Edmonds-Karp).

    Returns (value, per-arc flows aligned with net.arcs); conservation holds
    exactly at every internal node.
    """
    n = net.num_nodes
    # edge-list residual graph: edge 2i is arc i, edge 2i+1 its reverse
    to: list[int] = []
    cap: list[Fraction] = []
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v, c in net.arcs:
        adj[u].append(len(to))
        to.append(v)
        cap.append(c)
        adj[v].append(len(to))
        to.append(u)
        cap.append(Fraction(0))

    total = Fraction(0)
    while True:
        parent_edge = [-1] * n
        visited = [False] * n
        visited[net.source] = True
        queue = [net.source]
        qi = 0
        while qi < len(queue) and not visited[net.sink]:
            u = queue[qi]
            qi += 1
            for e in adj[u]:
                v = to[e]
                if cap[e] > 0 and not visited[v]:
                    visited[v] = True
                    parent_edge[v] = e
                    queue.append(v)
        if not visited[net.sink]:
            break
        bottleneck = None
        v = net.sink
        while v != net.source:
            e = parent_edge[v]
            if bottleneck is None or cap[e] < bottleneck:
                bottleneck = cap[e]
            v = to[e ^ 1]
        v = net.sink
        while v != net.source:
            e = parent_edge[v]
            cap[e] -= bottleneck
            cap[e ^ 1] += bottleneck
            v = to[e ^ 1]
        total += bottleneck

    flows = [net.arcs[i][2] - cap[2 * i] for i in range(len(net.arcs))]
    return total, flows
