import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from striplab.geometry import Constant, CylinderGeometry, Disk, build_pattern


@pytest.fixture(scope="session")
def disk_pi():
    """Disk R=1, H=pi cylinder used across the suite."""
    return CylinderGeometry(Disk(1.0), math.pi)


@pytest.fixture(scope="session")
def quarter_pattern(disk_pi):
    """Single strip of half-widths pi/4: intervals (pi/4, 3pi/4)."""
    return build_pattern(disk_pi, 1, [Constant(math.pi / 4)], [Constant(math.pi / 4)])


def operator_pair_from_dense(K, M):
    import numpy as np
    import scipy.sparse as sp

    from striplab.fem import SparseOperatorPair

    K = sp.csr_matrix(K)
    M = sp.csr_matrix(M)
    n = K.shape[0]
    return SparseOperatorPair(K, M, np.arange(n), np.arange(n))
