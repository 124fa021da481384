"""Composition of spatial pairs and stochastic grids into per-RB channel
matrices, plus uplink frame synthesis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import SpatialPair
from .stochastic import QGrid, complex_normal


@dataclass(frozen=True)
class ChannelBlock:
    """N x K channel matrix of one resource block."""

    h: np.ndarray
    rb: Optional[tuple] = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if h.ndim != 2:
            raise ValueError("channel matrix must be 2-D (antennas x users)")
        if not np.isfinite(h.view(float)).all():
            raise ValueError("channel matrix has non-finite entries")
        object.__setattr__(self, "h", h)

    @property
    def n_antennas(self) -> int:
        return self.h.shape[0]

    @property
    def n_users(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class UplinkFrame:
    """Received uplink frame y = h x + w for one resource block.

    The transmitted matrix is expected to carry unit average symbol energy;
    for frames of at least 100 symbols the sample mean power must sit within
    1% of 1 (unit-modulus alphabets satisfy this exactly).
    """

    y: np.ndarray
    x: np.ndarray
    noise_var: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=complex)
        x = np.asarray(self.x, dtype=complex)
        if y.ndim != 2 or x.ndim != 2 or y.shape[1] != x.shape[1]:
            raise ValueError("y and x must be 2-D with matching symbol counts")
        if self.noise_var < 0:
            raise ValueError(f"noise variance must be >= 0, got {self.noise_var!r}")
        if x.shape[1] >= 100:
            mean_power = np.mean(np.abs(x) ** 2)
            if abs(mean_power - 1.0) > 0.01:
                raise ValueError(f"transmit matrix mean symbol power {mean_power:.4f} "
                                 "deviates from 1 by more than 1%")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)


def stack_qgrids(grids: Sequence[QGrid]) -> np.ndarray:
    """Stack per-antenna QGrids of one (user, cluster) into an (N, t, f) array."""
    return np.stack([g.values for g in grids])


def _cluster_q(entry, n_antennas: int) -> np.ndarray:
    if isinstance(entry, np.ndarray):
        q = entry
    else:
        q = stack_qgrids(entry)
    if q.ndim != 3 or q.shape[0] != n_antennas:
        raise ValueError(f"cluster grid must have shape (N, t_max, f_max) with "
                         f"N={n_antennas}, got {q.shape}")
    return q


def assemble_channel(pairs: Sequence[Sequence[SpatialPair]],
                     qgrids: Sequence[Sequence],
                     rb: tuple = (1, 1)) -> ChannelBlock:
    """Channel matrix of one resource block.

    Entrywise, ``h_ij = sum_c p_ijc + r_ijc * q_ijc(t, f)``: the deterministic
    spatial means plus the spread-scaled stochastic values at RB index
    ``rb = (t, f)`` (1-based).  No normalization is applied.

    Args:
        pairs: pairs[j][c] is the SpatialPair of user j, cluster c.
        qgrids: qgrids[j][c] is either an (N, t_max, f_max) complex array or
            a length-N sequence of per-antenna :class:`QGrid` objects.
        rb: 1-based (t, f) index of the resource block.
    """
    if len(pairs) != len(qgrids) or len(pairs) == 0:
        raise ValueError("pairs and qgrids must list the same non-empty set of users")
    n = len(pairs[0][0].p)
    t, f = rb
    columns = []
    for user_pairs, user_grids in zip(pairs, qgrids):
        if len(user_pairs) != len(user_grids):
            raise ValueError("cluster count mismatch between pairs and qgrids")
        col = np.zeros(n, dtype=complex)
        for pair, grid_entry in zip(user_pairs, user_grids):
            if len(pair.p) != n:
                raise ValueError("all spatial pairs must share the antenna count")
            q = _cluster_q(grid_entry, n)
            if not (1 <= t <= q.shape[1] and 1 <= f <= q.shape[2]):
                raise ValueError(f"rb index {rb} outside grid {q.shape[1:]}")
            col += pair.p + pair.r * q[:, t - 1, f - 1]
        columns.append(col)
    return ChannelBlock(h=np.column_stack(columns), rb=(t, f))


def qpsk_symbols(n_users: int, n_symbols: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus QPSK transmit matrix with independent user streams."""
    points = np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, (n_users, n_symbols))))
    return points


def synthesize_uplink(block: ChannelBlock, x: np.ndarray, noise_var: float,
                      rng: np.random.Generator) -> UplinkFrame:
    """Received frame y = h x + w with w i.i.d. CN(0, noise_var)."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != block.n_users:
        raise ValueError(f"x must be (K, T) with K={block.n_users}, got {x.shape}")
    if noise_var < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_var!r}")
    y = block.h @ x
    if noise_var > 0:
        y = y + np.sqrt(noise_var) * complex_normal(rng, y.shape)
    return UplinkFrame(y=y, x=x, noise_var=float(noise_var))
