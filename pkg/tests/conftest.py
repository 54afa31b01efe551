import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gcalg.forms import Form
from gcalg.scalars import Q, Scalar

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def rng():
    return random.Random(20260810)


def random_q(rng, span=4, complex_ok=True):
    re = Fraction(rng.randint(-span, span), rng.choice([1, 1, 2, 3]))
    im = Fraction(0)
    if complex_ok and rng.random() < 0.5:
        im = Fraction(rng.randint(-span, span), rng.choice([1, 2]))
    return Q(re, im)


def random_form(rng, n, degrees=None, max_terms=4, complex_ok=True):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        if degrees is None:
            mask = rng.randrange(1 << n)
        else:
            deg = rng.choice(list(degrees))
            idx = rng.sample(range(n), deg) if deg <= n else []
            mask = 0
            for i in idx:
                mask |= 1 << i
        q = random_q(rng, complex_ok=complex_ok)
        terms[mask] = terms.get(mask, Scalar()) + Scalar.from_q(q)
    return Form(n, terms)


def random_vector(rng, length, span=3):
    return [Scalar.from_q(random_q(rng, span)) for _ in range(length)]
