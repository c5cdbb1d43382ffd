import numpy as np
import pytest

import quantlat as ql


@pytest.fixture(scope="session")
def rot1():
    """Rotation by 1 radian with the nearest-node quantizer."""
    return ql.rotation_system(1.0)


@pytest.fixture(scope="session")
def rot_pi6():
    """Rotation by pi/6 built from library trig entries."""
    return ql.rotation_system(np.pi / 6)


@pytest.fixture(scope="session")
def rot_pi6_exact():
    """Rotation by pi/6 with the exact half-integer sine entry, so lattice
    points land exactly on cell boundaries."""
    return ql.rotation_system_exact(np.sqrt(3.0) / 2.0, 0.5)


@pytest.fixture(scope="session")
def cross_system():
    """Rotation by 1 radian quantized through the cross-shaped cell (nonzero
    mean, generic-cell code paths)."""
    return ql.QuantizedSystem.build(
        ql.rotation_matrix(1.0), ql.Quantizer.from_cell(ql.cross_cell())
    )
