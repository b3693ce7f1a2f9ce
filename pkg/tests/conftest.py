import itertools

import numpy as np
import pytest


def block_local_chi(squares, dim):
    """Euler characteristic of a union of closed unit cubes, built explicitly.

    ``squares`` are integer grid positions of the present top cubes.  Every
    cell of the union is enumerated as an (anchor, span) key and the whole
    set is handed to the generic characteristic; this is the independent
    oracle the change tables are verified against.
    """
    from eulersurf.complexes import euler_characteristic

    cells = set()
    for pos in squares:
        for span in itertools.product((0, 1), repeat=dim):
            corners = [(0,) if s else (0, 1) for s in span]
            for shift in itertools.product(*corners):
                anchor = tuple(p + q for p, q in zip(pos, shift))
                cells.add((anchor, span))
    return euler_characteristic([sum(span) for _, span in cells])


def block_table_oracle(mask_bits, dim):
    """Brute-force local change: chi with the center cube minus chi without."""
    offsets = [
        d for d in itertools.product((-1, 0, 1), repeat=dim) if any(v for v in d)
    ]
    present = [offsets[i] for i, b in enumerate(mask_bits) if b]
    center = (0,) * dim
    return block_local_chi(present + [center], dim) - block_local_chi(present, dim)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
