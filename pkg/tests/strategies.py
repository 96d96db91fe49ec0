"""Hypothesis strategies shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from circlebody.geometry import AngleState
from circlebody.sampling import min_pairwise_sin


def angle_states(min_n=1, max_n=4, min_sep=0.1, tan_margin=None, speed=3.0):
    """Hypothesis strategy for AngleStates away from collisions (and from
    theta = pi/2 mod pi when ``tan_margin`` is given)."""
    angle = st.floats(-np.pi, np.pi, allow_nan=False)
    rate = st.floats(-speed, speed, allow_nan=False)

    @st.composite
    def build(draw):
        n = draw(st.integers(min_n, max_n))
        th = np.array(draw(st.lists(angle, min_size=n, max_size=n)))
        thd = np.array(draw(st.lists(rate, min_size=n, max_size=n)))
        return AngleState(th, thd)

    def ok(s):
        if min_pairwise_sin(s.theta) <= min_sep:
            return False
        return tan_margin is None or bool(np.all(np.abs(np.cos(s.theta)) > tan_margin))

    return build().filter(ok)
