import random

import pytest
from hypothesis import strategies as st

from tmotif import DeltaQuery, MotifError, MotifSpec, NodeRegistry, TemporalStream


def make_stream(records, n_nodes):
    """Stream from (src, dst, time) records over nodes '0'..'n-1'."""
    return TemporalStream.from_records(records, NodeRegistry(str(i) for i in range(n_nodes)))


def random_motif(rnd: random.Random, max_k: int = 4, max_l: int = 3) -> MotifSpec:
    """Rejection-sample a valid motif, multi-edges included."""
    while True:
        k = rnd.randint(2, max_k)
        l = rnd.randint(1, max_l)
        if l < k - 1:
            continue
        edges = []
        for _ in range(l):
            u = rnd.randrange(k)
            v = rnd.randrange(k)
            while v == u:
                v = rnd.randrange(k)
            edges.append((u, v))
        try:
            return MotifSpec(k=k, edges=tuple(edges))
        except MotifError:
            continue


def random_stream(rnd: random.Random, max_m: int, n_nodes: int, t_span: float = 20.0):
    """Random stream mixing integer (tie-prone) and real timestamps."""
    m = rnd.randint(0, max_m)
    recs = []
    for _ in range(m):
        u = rnd.randrange(n_nodes)
        v = rnd.randrange(n_nodes)
        while v == u:
            v = rnd.randrange(n_nodes)
        t = float(rnd.randint(0, int(t_span))) if rnd.random() < 0.5 else rnd.uniform(0, t_span)
        recs.append((u, v, t))
    return make_stream(recs, n_nodes)


@st.composite
def stream_strategy(draw, max_m=40, n_nodes=6):
    m = draw(st.integers(min_value=0, max_value=max_m))
    recs = []
    for _ in range(m):
        u = draw(st.integers(0, n_nodes - 1))
        v = draw(st.integers(0, n_nodes - 1).filter(lambda x, u=u: x != u))
        t = draw(
            st.one_of(
                st.integers(0, 15).map(float),
                st.floats(min_value=0.0, max_value=15.0, allow_nan=False, allow_infinity=False),
            )
        )
        recs.append((u, v, t))
    return make_stream(recs, n_nodes)


@st.composite
def motif_strategy(draw, max_k=4, max_l=3):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_motif(random.Random(seed), max_k=max_k, max_l=max_l)


@st.composite
def query_strategy(draw, max_k=4, max_l=3):
    motif = draw(motif_strategy(max_k=max_k, max_l=max_l))
    delta = draw(st.sampled_from([0.5, 1.0, 3.0, 7.5, 20.0]))
    return DeltaQuery(motif, delta)


@pytest.fixture(scope="session")
def triangle_query():
    from tmotif import cyclic_triangle

    return DeltaQuery(cyclic_triangle(), 3.0)
