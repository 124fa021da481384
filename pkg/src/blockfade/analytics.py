"""Channel statistics: Gram matrix and user cross-correlation, Hermitian
eigenvalues, empirical CDFs, complex-plane coefficient histograms, and
per-antenna average power profiles.

All reductions over realization streams are associative and
order-insensitive, so chunked or parallel accumulation matches sequential
accumulation to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .assembly import ChannelBlock
from .errors import NumericalError

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TOLERANCE = 1e-12
HERMITIAN_INPUT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class GramStats:
    """Gram matrix G = (1/N) H^H H with its partition into diagonal and
    off-diagonal magnitudes."""

    g: np.ndarray
    offdiag_mags: np.ndarray
    diag: np.ndarray

    @property
    def n_users(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous empirical CDF: query(x) = (#samples <= x) / n."""

    values: np.ndarray
    probabilities: np.ndarray

    def query(self, x) -> Union[float, np.ndarray]:
        idx = np.searchsorted(self.values, x, side="right")
        out = idx / len(self.values)
        return float(out) if np.isscalar(x) else out

    def quantile(self, q) -> Union[float, np.ndarray]:
        return np.quantile(self.values, q)

    def points(self):
        """(value, cdf) pairs at the unique sample values."""
        uniq, counts = np.unique(self.values, return_counts=True)
        return uniq, np.cumsum(counts) / len(self.values)


@dataclass(frozen=True)
class Histogram2D:
    """2-D histogram on a uniform square grid symmetric about the origin."""

    re_edges: np.ndarray
    im_edges: np.ndarray
    counts: np.ndarray

    @property
    def re_centers(self) -> np.ndarray:
        return 0.5 * (self.re_edges[:-1] + self.re_edges[1:])

    @property
    def im_centers(self) -> np.ndarray:
        return 0.5 * (self.im_edges[:-1] + self.im_edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class UserCorrelationMatrix:
    """K x K symmetric matrix of mean normalized inner-product magnitudes,
    unit diagonal."""

    values: np.ndarray

    @property
    def mean_offdiagonal(self) -> float:
        k = self.values.shape[0]
        off = self.values[~np.eye(k, dtype=bool)]
        return float(off.mean())


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, ChannelBlock):
        return h.h
    return np.asarray(h, dtype=complex)


def gram(h) -> GramStats:
    """Gram statistics G = (1/N) H^H H of one channel matrix.

    The product is symmetrized to make the stored matrix exactly Hermitian;
    the off-diagonal magnitudes are taken from the upper triangle.
    """
    matrix = _as_matrix(h)
    n = matrix.shape[0]
    g = matrix.conj().T @ matrix / n
    g = 0.5 * (g + g.conj().T)
    k = g.shape[0]
    iu = np.triu_indices(k, 1)
    return GramStats(g=g, offdiag_mags=np.abs(g[iu]), diag=g.diagonal().real.copy())


def eigenvalues_hermitian(g: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.

    Sweeps rotate every superdiagonal entry until the off-diagonal Frobenius
    norm falls below 1e-12 times the Frobenius norm of the input.  Raises
    NumericalError if the input is not Hermitian to 1e-10, if the sweep
    budget is exhausted, or if the eigenvalue sum drifts from the trace by
    more than 1e-10 relative.
    """
    a = np.array(g, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    scale = max(1.0, np.abs(a).max(initial=0.0))
    if np.abs(a - a.conj().T).max(initial=0.0) > HERMITIAN_INPUT_TOLERANCE * scale:
        raise NumericalError("matrix is not Hermitian within 1e-10")
    a = 0.5 * (a + a.conj().T)
    trace = a.diagonal().real.sum()
    if n == 1:
        return np.array([a[0, 0].real])
    norm = np.linalg.norm(a)
    tol = JACOBI_OFF_TOLERANCE * norm
    converged = False
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= tol:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                w = (t * c) * (apq / mag)
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - np.conj(w) * cq
                a[:, q] = w * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - w * rq
                a[q, :] = np.conj(w) * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        converged = np.linalg.norm(a - np.diag(a.diagonal())) <= tol
    if not converged:
        raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    eig = np.sort(a.diagonal().real)
    if abs(eig.sum() - trace) > 1e-10 * max(1.0, abs(trace)):
        raise NumericalError("eigenvalue sum drifted from the trace beyond 1e-10 relative")
    return eig


def empirical_cdf(samples) -> EmpiricalCDF:
    """Empirical CDF of a real sample multiset."""
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    if values.size == 0:
        raise ValueError("empirical_cdf needs at least one sample")
    probs = np.arange(1, values.size + 1) / values.size
    return EmpiricalCDF(values=values, probabilities=probs)


def pairwise_correlation(block) -> np.ndarray:
    """Normalized inner-product magnitudes |h_i^H h_j| / (|h_i| |h_j|) of one
    realization; raises on a zero-norm (degenerate) user column."""
    h = _as_matrix(block)
    norms = np.linalg.norm(h, axis=0)
    if (norms == 0).any():
        bad = int(np.flatnonzero(norms == 0)[0])
        raise NumericalError(f"user {bad} has a zero-norm channel column")
    g = np.abs(h.conj().T @ h)
    return g / np.outer(norms, norms)


def user_correlation(realizations: Sequence) -> UserCorrelationMatrix:
    """Cross-correlation of users averaged over channel realizations.

    Per realization the normalized inner-product magnitude of every user
    pair is computed; the average over realizations forms the matrix.  The
    diagonal is forced to exactly 1.
    """
    realizations = list(realizations)
    if not realizations:
        raise ValueError("user_correlation needs at least one realization")
    k = _as_matrix(realizations[0]).shape[1]
    if k < 2:
        raise ValueError("user_correlation needs at least two users")
    acc = np.zeros((k, k))
    for block in realizations:
        acc += pairwise_correlation(block)
    acc /= len(realizations)
    acc = 0.5 * (acc + acc.T)
    np.fill_diagonal(acc, 1.0)
    return UserCorrelationMatrix(values=acc)


def coefficient_histogram(values, bins_per_axis: int = 64) -> Histogram2D:
    """2-D histogram of complex coefficients on the bounding square of the
    samples, symmetric about 0."""
    v = np.asarray(values).ravel()
    if v.size == 0:
        raise ValueError("coefficient_histogram needs at least one sample")
    if bins_per_axis < 1:
        raise ValueError("bins_per_axis must be >= 1")
    half = max(np.abs(v.real).max(), np.abs(v.imag).max())
    if half == 0.0:
        half = 1.0
    edges = np.linspace(-half, half, bins_per_axis + 1)
    counts, _, _ = np.histogram2d(v.real, v.imag, bins=[edges, edges])
    return Histogram2D(re_edges=edges, im_edges=edges.copy(),
                       counts=counts.astype(np.int64))


def power_profile(realizations: Sequence) -> np.ndarray:
    """Per-antenna, per-user average power: entry (i, j) is the sample mean
    of |h_ij|^2 over the supplied realizations (and resource blocks)."""
    realizations = list(realizations)
    if not realizations:
        raise ValueError("power_profile needs at least one realization")
    acc = np.zeros(_as_matrix(realizations[0]).shape)
    for block in realizations:
        acc += np.abs(_as_matrix(block)) ** 2
    return acc / len(realizations)


def offdiag_exceedance(stats: Sequence[GramStats], threshold: float) -> float:
    """Fraction of off-diagonal Gram magnitudes above ``threshold`` across
    all provided realizations; 0.0 when there are no off-diagonals."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    total = 0
    above = 0
    for s in stats:
        total += s.offdiag_mags.size
        above += int((s.offdiag_mags > threshold).sum())
    return above / total if total else 0.0
