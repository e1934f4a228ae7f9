import numpy as np
import pytest

from sfiegarch.model import SfiegarchSpec, validate


def random_valid_spec(rng, p_max=3, q_max=3, s_choices=(1, 2, 6, 7), d_range=(-0.9, 0.49)):
    """Rejection-sample a spec satisfying the definition's side conditions."""
    while True:
        p = int(rng.integers(0, p_max + 1))
        q = int(rng.integers(0, q_max + 1))
        spec = SfiegarchSpec(
            omega=float(rng.uniform(-1, 1)),
            theta=float(rng.uniform(-0.4, 0.4)),
            gamma_mag=float(rng.uniform(0.05, 0.4)),
            d=float(rng.uniform(*d_range)),
            s=int(rng.choice(s_choices)),
            alpha=tuple(rng.uniform(-0.4, 0.4, p)),
            beta=tuple(rng.uniform(-0.4, 0.4, q)),
        )
        if validate(spec).ok:
            return spec


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)
