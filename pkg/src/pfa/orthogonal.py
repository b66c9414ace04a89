"""Random orthogonal matrices."""

import numpy as np
from scipy.linalg import block_diag


def random_orthogonal(n, rng):
    """Sample an ``n x n`` orthogonal matrix by QR of a standard-normal matrix.

    The sign of every column is fixed so that ``R`` has a positive diagonal,
    which makes the result Haar distributed.

    Parameters
    ----------
    n : int
        Dimension.
    rng : numpy.random.Generator
    """
    if n == 0:
        return np.zeros((0, 0))
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def random_block_orthogonal(r, s, rng):
    """Random member of ``diag(O(r), O(s))``, preserving the split after ``r`` dims."""
    return block_diag(random_orthogonal(r, rng), random_orthogonal(s, rng))
