"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def accumulate(index, weight, size):
    index = np.asarray(index, dtype=np.int64)
    keep = index >= 0
    return np.bincount(index[keep], weights=np.asarray(weight)[keep],
                       minlength=size).astype(np.float64)


def select_max(power, mask):
    power = np.where(np.asarray(mask, dtype=bool), power, -1.0)
    idx = np.argmax(power, axis=0).astype(np.int64)
    idx[power.max(axis=0) < 0] = -1
    return idx


def emd_slices(T, hot, dv):
    T = np.asarray(T, dtype=np.float64)
    hot = np.asarray(hot, dtype=np.int64)
    nv, nb = T.shape
    mass = T.sum(axis=0)
    valid = (hot >= 0) & (mass > 0)
    emd = np.zeros(nb)
    if not valid.any():
        return emd, valid
    cdf = np.cumsum(T[:, valid] / mass[valid], axis=0)
    step = (np.arange(nv)[:, None] >= hot[valid][None, :]).astype(np.float64)
    emd[valid] = np.abs(cdf - step).sum(axis=0) * dv
    return emd, valid
