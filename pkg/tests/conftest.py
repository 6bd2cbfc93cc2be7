import math

import numpy as np
import pytest

from mewpt.transducer import BvdModel, TRILAYER

OMEGA_350K = 2 * math.pi * 350e3


def random_model(rng, coupling_range=(0.3, 10.0)):
    """Physically plausible BVD model with resonance in 100 kHz-2 MHz."""
    f_s = 10 ** rng.uniform(5.0, 6.3)
    q = 10 ** rng.uniform(0.5, 1.7)
    c_p = 10 ** rng.uniform(-10.5, -8.5)
    k = 10 ** rng.uniform(math.log10(coupling_range[0]), math.log10(coupling_range[1]))
    # k = 2 sqrt(LC)/(C_p R) and Q = sqrt(L/C)/R fix R and C_M for given f_s
    w_s = 2 * math.pi * f_s
    r_m = 2.0 / (w_s * c_p * k)
    l_m = q * r_m / w_s
    c_m = 1.0 / (w_s**2 * l_m)
    return BvdModel(v_s_amp=10 ** rng.uniform(-1, 1), r_m=r_m, l_m=l_m, c_m=c_m, c_p=c_p)


@pytest.fixture
def trilayer():
    return TRILAYER


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
