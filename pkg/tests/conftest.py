import json
import tempfile
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pytest

from rootcontinuity.poly import Polynomial


@pytest.fixture
def temp_path():
    with tempfile.TemporaryDirectory() as tmpdirname:
        yield Path(tmpdirname).resolve()


@pytest.fixture
def poly_file(temp_path) -> Callable[..., Path]:
    def write(f: Polynomial, name: str = "poly.json") -> Path:
        path = temp_path / name
        path.write_text(json.dumps(f.to_json()))
        return path

    return write


def poly(*coeffs) -> Polynomial:
    """Shorthand for tests: ascending real or complex coefficients."""
    return Polynomial(coeffs)


def random_roots(
    rng: np.random.Generator,
    n: int,
    *,
    radius: float = 1.5,
    min_modulus: float = 0.0,
    min_separation: float = 0.1
) -> Sequence[complex]:
    """Uniform points of the disc, redrawn until they are pairwise
    at least ``min_separation`` apart."""
    while True:
        moduli = np.sqrt(rng.uniform(min_modulus**2 / radius**2, 1.0, n)) * radius
        roots = moduli * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))
        distances = np.abs(np.subtract.outer(roots, roots))
        np.fill_diagonal(distances, np.inf)
        if n < 2 or distances.min() >= min_separation:
            return [complex(z) for z in roots]
