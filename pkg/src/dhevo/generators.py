"""Deterministic generators for the four synthetic benchmark families.

Each generator is a pure function of its size parameters and a seed, so the
same GenSpec always yields a byte-identical instance. Sizes follow the
published easy/hard presets plus "tiny" presets small enough for the
brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleSpec
from .model import Instance, make_instance, validate_instance
from .rng import stream

FAMILIES = ("setcover", "cauctions", "indset", "facilities")

# preset name -> family -> params
PRESETS = {
    "tiny": {
        "setcover": {"rows": 20, "cols": 40, "density": 0.2},
        "cauctions": {"items": 10, "bids": 30},
        "indset": {"nodes": 30, "affinity": 2},
        "facilities": {"n_fac": 5, "n_cust": 8},
    },
    "easy": {
        "setcover": {"rows": 500, "cols": 1000, "density": 0.05},
        "cauctions": {"items": 100, "bids": 500},
        "indset": {"nodes": 500, "affinity": 4},
        "facilities": {"n_fac": 100, "n_cust": 100},
    },
    "hard": {
        "setcover": {"rows": 2000, "cols": 1000, "density": 0.05},
        "cauctions": {"items": 300, "bids": 1500},
        "indset": {"nodes": 1500, "affinity": 4},
        "facilities": {"n_fac": 100, "n_cust": 400},
    },
}


@dataclass
class GenSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def build(self) -> Instance:
        return generate(self)


def generate(spec: GenSpec) -> Instance:
    if spec.family not in FAMILIES:
        raise InfeasibleSpec(f"unknown family {spec.family!r}")
    fn = {
        "setcover": gen_setcover,
        "cauctions": gen_cauctions,
        "indset": gen_indset,
        "facilities": gen_facilities,
    }[spec.family]
    return fn(seed=spec.seed, **spec.params)


def preset_params(family: str, preset: str) -> dict:
    try:
        return dict(PRESETS[preset][family])
    except KeyError:
        raise InfeasibleSpec(f"no preset {preset!r} for family {family!r}")


def gen_setcover(rows: int, cols: int, density: float = 0.05,
                 seed: int = 0) -> Instance:
    """Minimum-cost set cover: min c'x s.t. coverage >= 1 per element.

    A repair pass guarantees every row is covered by at least two columns
    and every column covers at least one row, so the all-ones point is
    always feasible. Costs are integers in [1, 100].
    """
    if rows < 1 or cols < 1 or not (0.0 < density <= 1.0):
        raise InfeasibleSpec("need rows, cols >= 1 and 0 < density <= 1")
    if density * cols < 2:
        raise InfeasibleSpec("density * cols < 2 cannot cover rows twice")
    rng = stream(seed, "setcover", rows, cols, density)

    covers = [set() for _ in range(rows)]   # row -> columns covering it
    nnz_target = int(round(rows * cols * density))
    # Random memberships first, then repair.
    for _ in range(nnz_target):
        covers[int(rng.integers(rows))].add(int(rng.integers(cols)))
    for i in range(rows):
        while len(covers[i]) < 2:
            covers[i].add(int(rng.integers(cols)))
    used = set().union(*covers)
    empty_cols = [j for j in range(cols) if j not in used]
    for j in empty_cols:
        covers[int(rng.integers(rows))].add(j)

    cons = []
    for i in range(rows):
        for j in sorted(covers[i]):
            cons.append((i, j, 1.0))
    costs = rng.integers(1, 101, size=cols).astype(float)
    inst = make_instance(f"setcover_{seed}", costs, cons,
                         np.ones(rows), ["GE"] * rows,
                         lb=np.zeros(cols), ub=np.ones(cols),
                         is_int=np.ones(cols, dtype=bool))
    validate_instance(inst)
    return inst


def gen_cauctions(items: int, bids: int, seed: int = 0) -> Instance:
    """Combinatorial auction: pick bids maximizing revenue, items used once.

    Encoded as minimization of negated prices. Bundle sizes are uniform in
    [2, ceil(items/4)] (clamped to the item count); a bundle's price is its
    size scaled by U[0.5, 1.5].
    """
    if items < 1 or bids < 1:
        raise InfeasibleSpec("need items, bids >= 1")
    rng = stream(seed, "cauctions", items, bids)

    size_lo = min(2, items)
    size_hi = max(size_lo, min(items, -(-items // 4)))
    cons = []
    prices = np.zeros(bids)
    for b in range(bids):
        size = int(rng.integers(size_lo, size_hi + 1))
        bundle = rng.choice(items, size=size, replace=False)
        for i in sorted(int(v) for v in bundle):
            cons.append((i, b, 1.0))
        prices[b] = size * rng.uniform(0.5, 1.5)

    inst = make_instance(f"cauctions_{seed}", -prices, cons,
                         np.ones(items), ["LE"] * items,
                         lb=np.zeros(bids), ub=np.ones(bids),
                         is_int=np.ones(bids, dtype=bool))
    validate_instance(inst)
    return inst


def _barabasi_albert_edges(nodes: int, affinity: int,
                           rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential-attachment edges; count is affinity * (nodes - affinity)."""
    edges: list[tuple[int, int]] = []
    degrees = np.zeros(nodes, dtype=int)
    for new_node in range(affinity, nodes):
        if new_node == affinity:
            neighborhood = np.arange(new_node)
        else:
            prob = degrees[:new_node] / (2 * len(edges))
            neighborhood = rng.choice(new_node, size=affinity,
                                      replace=False, p=prob)
        for other in sorted(int(v) for v in neighborhood):
            edges.append((other, new_node))
            degrees[other] += 1
            degrees[new_node] += 1
    return edges


def gen_indset(nodes: int, affinity: int, seed: int = 0) -> Instance:
    """Maximum independent set on a Barabasi-Albert graph (edge form)."""
    if not (nodes > affinity >= 1):
        raise InfeasibleSpec("need nodes > affinity >= 1")
    rng = stream(seed, "indset", nodes, affinity)
    edges = _barabasi_albert_edges(nodes, affinity, rng)

    cons = []
    for row, (u, v) in enumerate(edges):
        cons.append((row, u, 1.0))
        cons.append((row, v, 1.0))
    inst = make_instance(f"indset_{seed}", -np.ones(nodes), cons,
                         np.ones(len(edges)), ["LE"] * len(edges),
                         lb=np.zeros(nodes), ub=np.ones(nodes),
                         is_int=np.ones(nodes, dtype=bool))
    validate_instance(inst)
    return inst


def gen_facilities(n_fac: int, n_cust: int, seed: int = 0) -> Instance:
    """Capacitated facility location with fractional assignment.

    Variables: binary open decisions y_f first, then continuous x_{f,c} in
    [0,1] laid out facility-major. Rows: one EQ assignment row per customer,
    one LE capacity row per facility. Total capacity is scaled to at least
    1.5x total demand, so opening everything is always feasible.
    """
    if n_fac < 1 or n_cust < 1:
        raise InfeasibleSpec("need n_fac, n_cust >= 1")
    rng = stream(seed, "facilities", n_fac, n_cust)

    demand = rng.integers(5, 36, size=n_cust).astype(float)
    capacity = rng.integers(10, 161, size=n_fac).astype(float)
    need = 1.5 * demand.sum()
    if capacity.sum() < need:
        capacity *= need / capacity.sum()
    open_cost = rng.uniform(100.0, 300.0, size=n_fac)
    fac_xy = rng.uniform(0.0, 1.0, size=(n_fac, 2))
    cust_xy = rng.uniform(0.0, 1.0, size=(n_cust, 2))
    dist = np.linalg.norm(fac_xy[:, None, :] - cust_xy[None, :, :], axis=2)
    serve_cost = 10.0 * dist * demand[None, :]

    def xvar(f: int, c: int) -> int:
        return n_fac + f * n_cust + c

    cons = []
    # Assignment rows 0..n_cust-1: sum_f x_{f,c} == 1.
    for c in range(n_cust):
        for f in range(n_fac):
            cons.append((c, xvar(f, c), 1.0))
    # Capacity rows n_cust..n_cust+n_fac-1: sum_c d_c x_{f,c} - cap_f y_f <= 0.
    for f in range(n_fac):
        row = n_cust + f
        for c in range(n_cust):
            cons.append((row, xvar(f, c), demand[c]))
        cons.append((row, f, -capacity[f]))

    nvars = n_fac + n_fac * n_cust
    obj = np.concatenate([open_cost, serve_cost.reshape(-1)])
    is_int = np.zeros(nvars, dtype=bool)
    is_int[:n_fac] = True
    rhs = np.concatenate([np.ones(n_cust), np.zeros(n_fac)])
    senses = ["EQ"] * n_cust + ["LE"] * n_fac
    inst = make_instance(f"facilities_{seed}", obj, cons, rhs, senses,
                         lb=np.zeros(nvars), ub=np.ones(nvars), is_int=is_int)
    validate_instance(inst)
    return inst
