"""Shared hypothesis strategies and a small function battery."""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np
from hypothesis import strategies as st

from infharm import jets

finite = dict(allow_nan=False, allow_infinity=False)

coords = st.floats(min_value=-3.0, max_value=3.0, **finite)
positive = st.floats(min_value=0.2, max_value=3.0, **finite)
scales = st.floats(min_value=0.25, max_value=4.0, **finite)


def points(dim, lo=-3.0, hi=3.0):
    return st.lists(st.floats(min_value=lo, max_value=hi, **finite), min_size=dim, max_size=dim).map(np.array)


def nonzero_vectors(dim):
    return points(dim, -2.0, 2.0).filter(lambda v: np.linalg.norm(v) > 0.1)


def matrices(rows, cols):
    return st.lists(coords, min_size=rows * cols, max_size=rows * cols).map(
        lambda v: np.array(v).reshape(rows, cols)
    )


JET_LIB = SimpleNamespace(sin=jets.sin, cos=jets.cos, exp=jets.exp, log=jets.log, sqrt=jets.sqrt,
                          atan=jets.atan, atan2=jets.atan2, pow=jets.pow_const)
NP_LIB = SimpleNamespace(sin=np.sin, cos=np.cos, exp=np.exp, log=np.log, sqrt=np.sqrt,
                         atan=np.arctan, atan2=np.arctan2, pow=np.power)

# Functions of three variables written once against either library.  Points
# are drawn from [0.5, 1.5]^3 so logs, roots and quotients stay regular.
BATTERY = {
    "poly": lambda X, L: X[0] * X[0] * X[1] - 3.0 * X[1] * X[2] + X[2] * X[2] * X[2],
    "quotient": lambda X, L: (X[0] + 2.0 * X[1]) / (1.0 + X[2] * X[2]),
    "trig": lambda X, L: L.sin(X[0] * X[1]) + L.cos(X[2] - X[0]),
    "exp_log": lambda X, L: L.exp(0.5 * X[0]) * L.log(X[1] + X[2]),
    "roots": lambda X, L: L.sqrt(X[0] * X[0] + X[1] * X[1] + X[2]) + L.pow(X[2], 4.0 / 3.0),
    "angles": lambda X, L: L.atan(X[0] / X[1]) + L.atan2(X[2], X[0]),
    "deep": lambda X, L: L.sin(L.exp(L.cos(L.sqrt(L.log(1.0 + X[0] * X[1] + X[2]))))),
    "mixed": lambda X, L: L.pow(X[0], 1.5) * L.atan(X[1] - X[2]) / L.exp(X[1]) - X[0] / X[2],
}
