"""Pure-numpy implementations of the hot kernels.

Selected at import by planspace.kernels when the compiled extension is
unavailable (or forced via PLANSPACE_KERNELS=python). Signatures and
semantics mirror planspace._ckernels exactly; the backends agree within
floating-point reduction-order noise and the test suite pins them to each
other at 1e-12 relative.
"""

from __future__ import annotations

import numpy as np


def pair_residuals(coords, ii, jj, targets, eps):
    """Residuals and guarded unit directions for every table pair.

    coords: (n, d) float64, ii/jj: (m,) int32 endpoint indices,
    targets: (m,) float64. Returns (residuals (m,), units (m, d), norms (m,))
    where residual p = ||X_i - X_j|| - t_p and units are the normalized
    differences with ||.|| floored at eps; exactly coincident endpoints get
    the canonical first-axis direction.
    """
    diff = coords[ii] - coords[jj]
    norms = np.sqrt(np.einsum("md,md->m", diff, diff))
    res = norms - targets
    units = diff / np.maximum(norms, eps)[:, None]
    coincident = norms == 0.0
    if np.any(coincident):
        units[coincident] = 0.0
        units[coincident, 0] = 1.0
    return res, units, norms


def normal_equations(coords, ii, jj, targets, eps):
    """Gauss-Newton normal equations of the stress objective.

    Returns (A, g, res) with A = J^T J (nd x nd, dense), g = J^T res (nd,).
    Each pair contributes the rank-one block u u^T to the (i,i)/(j,j)
    diagonal blocks and -u u^T to the (i,j)/(j,i) blocks.
    """
    n, d = coords.shape
    res, units, _ = pair_residuals(coords, ii, jj, targets, eps)
    blocks = units[:, :, None] * units[:, None, :]
    A = np.zeros((n, d, n, d))
    every = slice(None)
    np.add.at(A, (ii, every, ii, every), blocks)
    np.add.at(A, (jj, every, jj, every), blocks)
    np.add.at(A, (ii, every, jj, every), -blocks)
    np.add.at(A, (jj, every, ii, every), -blocks)
    g = np.zeros((n, d))
    weighted = units * res[:, None]
    np.add.at(g, ii, weighted)
    np.add.at(g, jj, -weighted)
    return A.reshape(n * d, n * d), g.reshape(n * d), res


def iou_counts(a, b, occupancy):
    """(intersection, union) cell counts between two label grids.

    Category-aware by default: cells intersect only when both carry the
    same non-zero label. Occupancy mode collapses non-zero labels to 1.
    """
    occ_a = a != 0
    occ_b = b != 0
    union = int(np.count_nonzero(occ_a | occ_b))
    if occupancy:
        inter = int(np.count_nonzero(occ_a & occ_b))
    else:
        inter = int(np.count_nonzero((a == b) & occ_a))
    return inter, union


def pixel_diff(a, b):
    """Number of cells whose labels differ."""
    return int(np.count_nonzero(a != b))


def iou_distance_stack(query, stack, occupancy):
    """1 - IoU of `query` against every raster in `stack` (k, res, res).

    Empty-vs-empty pairs score IoU = 1 (distance 0).
    """
    k = stack.shape[0]
    out = np.empty(k)
    occ_q = query != 0
    for idx in range(k):
        other = stack[idx]
        occ_o = other != 0
        union = int(np.count_nonzero(occ_q | occ_o))
        if union == 0:
            out[idx] = 0.0
            continue
        if occupancy:
            inter = int(np.count_nonzero(occ_q & occ_o))
        else:
            inter = int(np.count_nonzero((query == other) & occ_q))
        out[idx] = 1.0 - inter / union
    return out
