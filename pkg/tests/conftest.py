import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from singmod.searches import sieve_class_numbers

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sieve_1e5() -> np.ndarray:
    return sieve_class_numbers(100_000)


@pytest.fixture(scope="session")
def sieve_1e6() -> np.ndarray:
    return sieve_class_numbers(1_000_000)


def brute_reduced_forms(n: int) -> list[tuple[int, int, int]]:
    """Reduced primitive forms of discriminant -n by scanning a and b directly."""
    import math

    out = []
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            num = b * b + n
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                out.append((a, b, c))
        a += 1
    return sorted(out)
