import itertools
import os

from hypothesis import HealthCheck, settings, strategies as st

from dynmis import DynamicGraph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance verdicts, echoed again as one block at the end of the session
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(ACCEPTANCE[key])


def graph_from(n, edges):
    g = DynamicGraph(n)
    for u, v in edges:
        g.insert_edge(u, v)
    return g


@st.composite
def small_graphs(draw, max_n=8):
    n = draw(st.integers(0, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return graph_from(n, chosen)


@st.composite
def graphs_with_order(draw, max_n=8):
    g = draw(small_graphs(max_n))
    order = draw(st.permutations(range(g.n)))
    return g, list(order)


def lexfirst_mis(g, order):
    """The unique independent set in which every non-member has an earlier member neighbour.

    Found by exhaustive search over vertex subsets, so it shares no code
    path with the greedy scan.
    """
    pos = {v: i for i, v in enumerate(order)}
    n = g.n
    found = []
    for size in range(n + 1):
        for cand in itertools.combinations(range(n), size):
            m = set(cand)
            if any(g.has_edge(u, v) for u, v in itertools.combinations(cand, 2)):
                continue
            if all(
                any(w in m and pos[w] < pos[v] for w in g.adj[v])
                for v in range(n) if v not in m
            ):
                found.append(m)
    assert len(found) == 1, found
    return found[0]


def sequential_process(n, edges, order):
    """Take vertices one by one; a taken vertex deletes itself and its neighbours."""
    alive = set(range(n))
    nbrs = {v: set() for v in range(n)}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    taken = set()
    for v in order:
        if v in alive:
            taken.add(v)
            alive -= nbrs[v] | {v}
    return taken
