"""Leave-one-out and leave-two-out products along the last axis."""
from __future__ import annotations

import numpy as np


def excl1(x: np.ndarray) -> np.ndarray:
    """out[..., j] = prod_{i != j} x[..., i], without dividing."""
    x = np.asarray(x, dtype=float)
    ones = np.ones(x.shape[:-1] + (1,))
    left = np.cumprod(np.concatenate([ones, x[..., :-1]], axis=-1), axis=-1)
    right = np.cumprod(np.concatenate([ones, x[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return left * right


def excl2(x: np.ndarray) -> np.ndarray:
    """out[..., j, j'] = prod_{i not in {j, j'}} x[..., i]; the diagonal equals excl1."""
    x = np.asarray(x, dtype=float)
    kappa = x.shape[-1]
    idx = np.arange(kappa)
    mask = (idx[:, None, None] == idx[None, None, :]) | (idx[None, :, None] == idx[None, None, :])
    tiled = np.broadcast_to(x[..., None, None, :], x.shape[:-1] + (kappa, kappa, kappa))
    return np.where(mask, 1.0, tiled).prod(axis=-1)
