"""Correlated complex Gaussian grids driving channel variation across
resource blocks.

One grid per (antenna, user, cluster) link holds zero-mean unit-variance
circularly-symmetric Gaussian values indexed by (RB time, RB frequency).
Correlation is imposed along exactly one RB dimension through a covariance
matrix: along time it plays the role of Doppler spread, along frequency of
delay spread.

Sampling is reproducible across platforms: all Gaussians come from the
fixed transform ``sqrt(-ln u1) * exp(2j*pi*u2)`` applied to uniforms from a
counter-based (Philox) stream, so a seed plus a stream path fully
determines every value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalError
from .model import ResourceGrid

MODES = ("time", "frequency", "none")

PSD_TOLERANCE = -1e-10
CHOLESKY_JITTER = 1e-12


@dataclass(frozen=True)
class CorrelationSpec:
    """Correlation model for one RB dimension.

    mode selects which dimension carries correlation ("time", "frequency",
    or "none").  The model is either the exponential family
    ``Sigma[a, b] = rho ** |a - b|`` or a user-supplied Hermitian PSD matrix
    with unit diagonal.
    """

    mode: str
    rho: Optional[float] = None
    matrix: Optional[tuple] = None
    length: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "none":
            if self.rho is not None or self.matrix is not None:
                raise ValueError("mode 'none' takes no correlation model")
            return
        if not (isinstance(self.length, (int, np.integer)) and self.length >= 1):
            raise ValueError(f"length must be a positive integer, got {self.length!r}")
        if (self.rho is None) == (self.matrix is None):
            raise ValueError("exactly one of rho / matrix must be given")
        if self.rho is not None:
            if not (0.0 <= float(self.rho) < 1.0):
                raise ValueError(f"exponential rho must lie in [0, 1), got {self.rho!r}")
            object.__setattr__(self, "rho", float(self.rho))
        if self.matrix is not None:
            m = np.asarray(self.matrix)
            if m.shape != (self.length, self.length):
                raise ValueError(f"custom matrix must be {self.length}x{self.length}, "
                                 f"got {m.shape}")
            # nested tuples so the spec stays hashable and comparable
            object.__setattr__(
                self, "matrix",
                tuple(tuple(complex(x) if np.iscomplexobj(m) else float(x) for x in row)
                      for row in m))

    @classmethod
    def none(cls) -> "CorrelationSpec":
        return cls(mode="none")

    @classmethod
    def exponential(cls, mode: str, rho: float, length: int) -> "CorrelationSpec":
        return cls(mode=mode, rho=float(rho), length=int(length))

    @classmethod
    def custom(cls, mode: str, matrix: np.ndarray) -> "CorrelationSpec":
        matrix = np.asarray(matrix)
        return cls(mode=mode, matrix=matrix, length=matrix.shape[0])


@dataclass(frozen=True)
class QGrid:
    """Correlated CN(0, 1) values of one link, indexed by (RB time, RB freq)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2:
            raise ValueError("QGrid values must be 2-D (t_max, f_max)")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent, reproducible random stream for (seed, *path).

    Uses a counter-based Philox bit generator keyed by a spawn path, so
    streams for different paths are statistically independent and any
    (seed, path) pair regenerates the identical stream regardless of the
    order or thread in which streams are consumed.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussians with E|q|^2 = 1.

    Fixed transform of two uniform draws: ``sqrt(-ln u1) * exp(2j*pi*u2)``
    with u1 in (0, 1]; real and imaginary parts each have variance 1/2.
    """
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def build_covariance(spec: CorrelationSpec) -> np.ndarray:
    """Covariance matrix of the correlated RB dimension.

    The exponential model yields ``rho ** |a - b|``.  A custom matrix is
    validated: Hermitian, unit diagonal, and no eigenvalue below -1e-10.
    """
    if spec.mode == "none":
        return np.eye(1)
    n = spec.length
    if spec.rho is not None:
        lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        with np.errstate(all="ignore"):
            sigma = np.where(lags == 0, 1.0, float(spec.rho) ** lags)
        return sigma
    m = np.asarray(spec.matrix)
    if not np.allclose(m, m.conj().T, rtol=0.0, atol=1e-12):
        raise ValueError("custom covariance must be Hermitian")
    if not np.allclose(np.diag(m).real, 1.0, rtol=0.0, atol=1e-12) or \
            np.abs(np.diag(m).imag).max(initial=0.0) > 1e-12:
        raise ValueError("custom covariance must have unit diagonal")
    if np.linalg.eigvalsh(m).min() < PSD_TOLERANCE:
        raise ValueError("custom covariance has an eigenvalue below -1e-10; not PSD")
    return np.array(m, dtype=complex if np.iscomplexobj(m) else float)


def cholesky_psd(sigma: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L^H = sigma, tolerant of semidefinite input.

    A jitter of 1e-12 is added to the diagonal before factorization so
    near-singular covariances (e.g. rho -> 1) factor stably; a pivot below
    -1e-10 after jitter signals a genuinely non-PSD matrix.  The diagonal of
    L is real and nonnegative.
    """
    a = np.array(sigma, dtype=complex if np.iscomplexobj(sigma) else float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("covariance must be square")
    n = a.shape[0]
    a[np.diag_indices(n)] += CHOLESKY_JITTER
    lower = np.zeros_like(a)
    for j in range(n):
        col = a[j:, j] - lower[j:, :j] @ lower[j, :j].conj()
        pivot = col[0].real
        if pivot < PSD_TOLERANCE:
            raise NumericalError(f"pivot {pivot:.3e} at column {j} below tolerance; "
                                 "matrix is not positive semidefinite")
        d = np.sqrt(max(pivot, 0.0))
        if d == 0.0:
            lower[j:, j] = 0.0
        else:
            lower[j, j] = d
            lower[j + 1:, j] = col[1:] / d
    return lower


def _validate_length(spec: CorrelationSpec, grid: ResourceGrid):
    if spec.mode == "time" and spec.length != grid.t_max:
        raise ValueError(f"correlation length {spec.length} does not match "
                         f"t_max {grid.t_max}")
    if spec.mode == "frequency" and spec.length != grid.f_max:
        raise ValueError(f"correlation length {spec.length} does not match "
                         f"f_max {grid.f_max}")


def sample_q_grid(spec: CorrelationSpec, grid: ResourceGrid,
                  rng: np.random.Generator) -> QGrid:
    """Sample one link's correlated Gaussian grid.

    mode "time": each column (fixed f) is a draw of CN(0, Sigma), columns
    mutually independent.  mode "frequency": each row is such a draw, rows
    independent.  mode "none": all entries i.i.d. CN(0, 1).
    """
    _validate_length(spec, grid)
    values = sample_q_block(spec, grid, 1, rng)[0]
    return QGrid(values=values)


def sample_q_block(spec: CorrelationSpec, grid: ResourceGrid, n_links: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Sample the grids of ``n_links`` links in one call.

    Returns an (n_links, t_max, f_max) array.  Stacking several links into
    one call changes only how the uniform stream is chunked, not the
    distribution; a one-link block reproduces :func:`sample_q_grid` draw
    for draw.
    """
    _validate_length(spec, grid)
    z = complex_normal(rng, (n_links, grid.t_max, grid.f_max))
    if spec.mode == "none":
        return z
    lower = cholesky_psd(build_covariance(spec))
    if spec.mode == "time":
        return np.einsum("ab,nbf->naf", lower, z)
    return np.einsum("ntb,ab->nta", z, lower)
