"""Decoupled population estimators: feature queue and EMA moments.

Both estimators let the statistics that enter the distance aggregate far
more samples than one optimizer batch. Only the live batch carries
gradient; stored queue rows and EMA history are held constant during
backprop, matching the update order

    stats over history + batch -> loss -> backward -> step -> commit batch

States are immutable value types; commit operations return new states, so
blend/read never observes a half-applied update.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, NonFiniteDataError
from .frechet import GaussianStats, stats_from_features

__all__ = [
    "QueueState",
    "EmaState",
    "queue_contents",
    "queue_stats_with_batch",
    "queue_commit",
    "ema_batch_moments",
    "ema_blend",
    "ema_commit",
    "ema_effective_weight",
    "warm_start",
    "estimator_backprop",
]


def _check_batch(batch: np.ndarray, dim: int) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[0] < 1:
        raise DataError(f"batch must be a nonempty B x d matrix, got {batch.shape}")
    if batch.shape[1] != dim:
        raise DataError(f"batch dim {batch.shape[1]} does not match state dim {dim}")
    if not np.isfinite(batch).all():
        raise NonFiniteDataError("batch contains non-finite entries")
    return batch


@dataclass(frozen=True, eq=False)
class QueueState:
    """FIFO ring of the most recent generated feature rows.

    buffer has capacity rows; fill counts the valid ones and cursor points
    at the oldest row (the next write slot once full).
    """

    buffer: np.ndarray
    fill: int
    cursor: int

    @property
    def capacity(self) -> int:
        return self.buffer.shape[0]

    @property
    def dim(self) -> int:
        return self.buffer.shape[1]

    @classmethod
    def empty(cls, capacity: int, dim: int) -> "QueueState":
        if capacity < 1 or dim < 1:
            raise DataError(
                f"queue needs capacity >= 1 and dim >= 1, got ({capacity}, {dim})"
            )
        return cls(buffer=np.zeros((capacity, dim)), fill=0, cursor=0)


def queue_contents(q: QueueState) -> np.ndarray:
    """Stored rows, oldest first."""
    if q.fill < q.capacity:
        return q.buffer[: q.fill]
    idx = (q.cursor + np.arange(q.fill)) % q.capacity
    return q.buffer[idx]


def queue_stats_with_batch(q: QueueState, batch: np.ndarray) -> GaussianStats:
    """Statistics over the stored rows plus the live batch (fill + B rows)."""
    if q.fill < q.capacity:
        raise DataError(
            f"queue holds {q.fill}/{q.capacity} rows; call warm_start before "
            "computing statistics"
        )
    batch = _check_batch(batch, q.dim)
    return stats_from_features(np.concatenate([queue_contents(q), batch], axis=0))


def queue_commit(q: QueueState, batch: np.ndarray) -> QueueState:
    """Replace the B oldest rows with the batch (FIFO); returns the new state."""
    batch = _check_batch(batch, q.dim)
    b = batch.shape[0]
    if b > q.capacity:
        raise DataError(f"batch of {b} rows exceeds queue capacity {q.capacity}")
    buffer = q.buffer.copy()
    if q.fill < q.capacity:
        take = min(b, q.capacity - q.fill)
        buffer[q.fill : q.fill + take] = batch[:take]
        state = QueueState(buffer=buffer, fill=q.fill + take, cursor=0)
        return queue_commit(state, batch[take:]) if take < b else state
    idx = (q.cursor + np.arange(b)) % q.capacity
    buffer[idx] = batch
    return QueueState(buffer=buffer, fill=q.fill, cursor=int((q.cursor + b) % q.capacity))


@dataclass(frozen=True, eq=False)
class EmaState:
    """Exponential moving first and second moments (mu, M = E[xx^T]).

    The recovered covariance M - mu mu^T stays PSD up to roundoff because
    each committed blend is a convex combination of batch moments, and
    M_b - mu_b mu_b^T >= 0 holds for every batch.
    """

    beta: float
    mu_ema: np.ndarray
    m_ema: np.ndarray
    initialized: bool

    @property
    def dim(self) -> int:
        return self.mu_ema.size

    @classmethod
    def empty(cls, beta: float, dim: int) -> "EmaState":
        if not (0.0 <= beta < 1.0):
            raise DataError(f"beta must lie in [0, 1), got {beta}")
        if dim < 1:
            raise DataError(f"dim must be >= 1, got {dim}")
        return cls(
            beta=float(beta),
            mu_ema=np.zeros(dim),
            m_ema=np.zeros((dim, dim)),
            initialized=False,
        )


def ema_batch_moments(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch moments mu_b = mean(phi), m_b = mean(phi phi^T), symmetrized."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[0] < 1:
        raise DataError(f"batch must be a nonempty B x d matrix, got {batch.shape}")
    if not np.isfinite(batch).all():
        raise NonFiniteDataError("batch contains non-finite entries")
    mu_b = batch.mean(axis=0)
    m_b = batch.T @ batch / batch.shape[0]
    return mu_b, 0.5 * (m_b + m_b.T)


def ema_blend(
    s: EmaState, mu_b: np.ndarray, m_b: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Blend batch moments into the running ones without mutating the state.

    Returns (mu_g, m_g, sigma_g) with mu_g = beta mu_ema + (1-beta) mu_b,
    m_g likewise, and sigma_g = m_g - mu_g mu_g^T.
    """
    if not s.initialized:
        raise DataError("EMA state is uninitialized; call warm_start first")
    mu_b = np.asarray(mu_b, dtype=np.float64)
    m_b = np.asarray(m_b, dtype=np.float64)
    if mu_b.shape != (s.dim,) or m_b.shape != (s.dim, s.dim):
        raise DataError(
            f"moment shapes {mu_b.shape}/{m_b.shape} do not match state dim {s.dim}"
        )
    mu_g = s.beta * s.mu_ema + (1.0 - s.beta) * mu_b
    m_g = s.beta * s.m_ema + (1.0 - s.beta) * m_b
    sigma_g = m_g - np.outer(mu_g, mu_g)
    return mu_g, 0.5 * (m_g + m_g.T), 0.5 * (sigma_g + sigma_g.T)


def ema_commit(s: EmaState, mu_g: np.ndarray, m_g: np.ndarray) -> EmaState:
    """Store blended moments as the new running moments."""
    mu_g = np.asarray(mu_g, dtype=np.float64)
    m_g = np.asarray(m_g, dtype=np.float64)
    if mu_g.shape != (s.dim,) or m_g.shape != (s.dim, s.dim):
        raise DataError(
            f"moment shapes {mu_g.shape}/{m_g.shape} do not match state dim {s.dim}"
        )
    return replace(s, mu_ema=mu_g.copy(), m_ema=m_g.copy(), initialized=True)


def ema_effective_weight(beta: float) -> float:
    """Effective sample mass of the moving average, 1/(1-beta)."""
    return 1.0 / (1.0 - beta)


def warm_start(estimator, samples: np.ndarray):
    """Initialize an estimator from base-model samples.

    Queue: the most recent `capacity` rows fill the buffer (requires at
    least that many). EMA: running moments become the plain mean and second
    moment of all rows.
    """
    if isinstance(estimator, QueueState):
        samples = _check_batch(samples, estimator.dim)
        if samples.shape[0] < estimator.capacity:
            raise DataError(
                f"queue warm start needs >= {estimator.capacity} rows, "
                f"got {samples.shape[0]}"
            )
        return QueueState(
            buffer=samples[-estimator.capacity :].copy(),
            fill=estimator.capacity,
            cursor=0,
        )
    if isinstance(estimator, EmaState):
        mu0, m0 = ema_batch_moments(_check_batch(samples, estimator.dim))
        return replace(estimator, mu_ema=mu0, m_ema=m0, initialized=True)
    raise DataError(f"unknown estimator type {type(estimator).__name__}")


def estimator_backprop(
    kind: str,
    state,
    batch: np.ndarray,
    d_mu: np.ndarray,
    d_sigma: np.ndarray,
) -> np.ndarray:
    """Pull statistic-gradients back to the live batch rows.

    d_mu/d_sigma are gradients with respect to the statistics this
    estimator produced for this batch (d_sigma in the full-matrix
    convention of FdGradient). Only the B live rows receive gradient.

    queue (M = fill + B, mu = combined mean):
        grad(x_i) = (1/M) d_mu + (2/M) d_sigma (x_i - mu)
    ema (a = (1-beta)/B):
        grad(x_i) = a (d_mu - 2 d_sigma mu_g) + 2a d_sigma x_i
    where the -2 a d_sigma mu_g term is the -mu mu^T part of the covariance
    recovery differentiated through the blend.
    """
    d_mu = np.asarray(d_mu, dtype=np.float64)
    d_sigma = np.asarray(d_sigma, dtype=np.float64)
    d_sigma = 0.5 * (d_sigma + d_sigma.T)
    batch = _check_batch(batch, state.dim)
    if d_mu.shape != (state.dim,) or d_sigma.shape != (state.dim, state.dim):
        raise DataError(
            f"gradient shapes {d_mu.shape}/{d_sigma.shape} do not match "
            f"state dim {state.dim}"
        )
    b = batch.shape[0]
    if kind == "queue":
        if not isinstance(state, QueueState):
            raise DataError("kind 'queue' requires a QueueState")
        m = state.fill + b
        mu = queue_stats_with_batch(state, batch).mu
        return d_mu / m + (2.0 / m) * (batch - mu) @ d_sigma
    if kind == "ema":
        if not isinstance(state, EmaState):
            raise DataError("kind 'ema' requires an EmaState")
        mu_b, m_b = ema_batch_moments(batch)
        mu_g, _, _ = ema_blend(state, mu_b, m_b)
        a = (1.0 - state.beta) / b
        return a * (d_mu - 2.0 * d_sigma @ mu_g) + (2.0 * a) * batch @ d_sigma
    raise DataError(f"unknown estimator kind {kind!r}")
