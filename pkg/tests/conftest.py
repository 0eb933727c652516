"""Shared strategies for property tests.

Parameter tuples are drawn so that the strict validator passes: tile sides
within the matrix, and the total shot budget NT covering both max(K, L) and
the constructive server count.
"""

import math
from dataclasses import replace

from hypothesis import strategies as st

from tessfact import capacity
from tessfact.core import SchemeParams


@st.composite
def scheme_params(draw, max_k=24, max_l=24, max_t=6, spare_servers=3):
    K = draw(st.integers(1, max_k))
    L = draw(st.integers(1, max_l))
    Delta = draw(st.integers(1, K))
    Gamma = draw(st.integers(1, L))
    T = draw(st.integers(1, max_t))
    probe = SchemeParams(K=K, L=L, N=1, T=T, Delta=Delta, Gamma=Gamma)
    floor = max(capacity.n_opt_upper(probe), math.ceil(K / T), math.ceil(L / T))
    return replace(probe, N=floor + draw(st.integers(0, spare_servers)))


@st.composite
def divisible_scheme_params(draw, max_blocks=5, max_side=6, max_t=4):
    """Tile sides dividing the matrix sides: the evenly divided regime."""
    Delta = draw(st.integers(1, max_side))
    Gamma = draw(st.integers(1, max_side))
    K = Delta * draw(st.integers(1, max_blocks))
    L = Gamma * draw(st.integers(1, max_blocks))
    T = draw(st.integers(1, max_t))
    probe = SchemeParams(K=K, L=L, N=1, T=T, Delta=Delta, Gamma=Gamma)
    floor = max(capacity.n_opt_upper(probe), math.ceil(K / T), math.ceil(L / T))
    return replace(probe, N=floor + draw(st.integers(0, 2)))
