"""Point-biserial correlation and its two-sided t-test.

The Student-t tail is evaluated through the regularized incomplete beta
function, computed with a vectorised modified-Lentz continued fraction.
"""
from __future__ import annotations

import math

import numpy as np

_CF_TOL = 1e-14
_CF_MAXIT = 20000
_TINY = 1e-300


def _betacf(a: float, b: float, x: np.ndarray) -> np.ndarray:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _CF_TOL
        if not active.any():
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b})")


def betainc_regularized(a: float, b: float, x, x_complement=None) -> np.ndarray:
    """Regularized incomplete beta I_x(a, b) for scalar a, b > 0 and array x.

    ``x_complement`` (= 1 - x) may be passed when it is known more accurately
    than the subtraction would give it, as happens for x close to 1.
    """
    if a <= 0 or b <= 0:
        raise ValueError(f"betainc needs a, b > 0, got a={a}, b={b}")
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise ValueError("betainc argument x must lie in [0, 1]")
    xc = 1.0 - x if x_complement is None else np.broadcast_to(np.asarray(x_complement, dtype=np.float64), x.shape)
    out = np.empty_like(x)
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    interior = (x > 0) & (x < 1)
    out[x <= 0] = 0.0
    out[x >= 1] = 1.0
    xi = x[interior]
    direct = xi < (a + 1.0) / (a + b + 2.0)
    res = np.empty_like(xi)
    if direct.any():
        xd = xi[direct]
        front = np.exp(a * np.log(xd) + b * np.log1p(-xd) - lbeta)
        res[direct] = front * _betacf(a, b, xd) / a
    if (~direct).any():
        xs = xc[interior][~direct]
        front = np.exp(b * np.log(xs) + a * np.log1p(-xs) - lbeta)
        res[~direct] = 1.0 - front * _betacf(b, a, xs) / b
    out[interior] = res
    return out


def student_t_two_sided_p(t_stat, dof):
    """Two-sided tail probability P(|T| >= |t|) for Student-t with ``dof`` degrees of freedom.

    Returns a float for scalar input, otherwise an array shaped like ``t_stat``.
    Infinite |t| gives 0.
    """
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    t = np.asarray(t_stat, dtype=np.float64)
    if np.any(np.isnan(t)):
        raise ValueError("t statistic is NaN")
    t2 = t * t
    with np.errstate(over="ignore", invalid="ignore"):
        x = np.where(np.isinf(t2), 0.0, dof / (dof + t2))
        xc = np.where(np.isinf(t2), 1.0, t2 / (dof + t2))
    p = np.clip(betainc_regularized(0.5 * dof, 0.5, x, xc), 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def r_to_p(r, n: int):
    """Two-sided p-value of a correlation ``r`` estimated from ``n`` samples."""
    r = np.clip(np.asarray(r, dtype=np.float64), -1.0, 1.0)
    one_minus = 1.0 - r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(one_minus > 0, r * math.sqrt(n - 2) / np.sqrt(one_minus), np.sign(r) * np.inf)
    return student_t_two_sided_p(t, n - 2)


def point_biserial(d, y) -> tuple[float, float]:
    """Pearson correlation of a continuous sample with a binary one, with its p-value.

    Zero variance in either input yields ``(0.0, 1.0)``.
    """
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if d.shape != y.shape or d.ndim != 1:
        raise ValueError(f"d and y must be 1-D vectors of equal length, got {d.shape} and {y.shape}")
    n = d.shape[0]
    if n < 3:
        raise ValueError(f"point-biserial correlation needs n >= 3 samples, got {n}")
    if np.isnan(d).any() or np.isnan(y).any():
        raise ValueError("NaN in point-biserial inputs")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("y must be binary (0/1)")
    dd = d - d.mean()
    yy = y - y.mean()
    sdd = float(dd @ dd)
    syy = float(yy @ yy)
    if sdd <= _degenerate_tol(d) or syy == 0.0:
        return 0.0, 1.0
    r = float(np.clip((dd @ yy) / math.sqrt(sdd * syy), -1.0, 1.0))
    return r, float(r_to_p(r, n))


def _degenerate_tol(d: np.ndarray) -> float:
    scale = float(np.max(np.abs(d))) if d.size else 0.0
    return d.shape[0] * (1e-14 * scale) ** 2


def point_biserial_map(stack: np.ndarray, y) -> tuple[np.ndarray, np.ndarray]:
    """Point-biserial (r, p) at every point of a J x ... stack against binary ``y`` of length J."""
    stack = np.asarray(stack, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = stack.shape[0]
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n < 3:
        raise ValueError(f"need at least 3 mixtures, got {n}")
    if np.isnan(stack).any() or np.isnan(y).any():
        raise ValueError("NaN in correlation inputs")
    mean = stack.mean(axis=0)
    dev = stack - mean
    sdd = np.einsum("j...,j...->...", dev, dev)
    yy = y - y.mean()
    syy = float(yy @ yy)
    sdy = np.tensordot(yy, dev, axes=(0, 0))
    scale = np.max(np.abs(stack), axis=0)
    return _finish(sdd, syy, sdy, scale, n)


def _finish(sdd, syy, sdy, scale, n):
    degenerate = (sdd <= n * (1e-14 * scale) ** 2) | (syy == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(degenerate, 0.0, sdy / np.sqrt(sdd * syy))
    r = np.clip(r, -1.0, 1.0)
    p = np.asarray(r_to_p(r, n))
    p = np.where(degenerate, 1.0, p)
    return r, p


class CorrelationAccumulator:
    """Streaming point-biserial statistics for one utterance.

    Fields arrive one mixture at a time together with the K-word correctness row,
    so the J x F x T stack never has to be held in memory. Sums are taken about
    the first field seen, which keeps the variance free of catastrophic
    cancellation.
    """

    def __init__(self, shape, n_words: int):
        self.shape = tuple(shape)
        self.n_words = n_words
        self.n = 0
        self._shift = None
        self._sd = np.zeros(self.shape)
        self._sdd = np.zeros(self.shape)
        self._sdy = np.zeros((n_words,) + self.shape)
        self._sy = np.zeros(n_words)
        self._syy = np.zeros(n_words)
        self._scale = np.zeros(self.shape)

    def update(self, field: np.ndarray, correct) -> None:
        field = np.asarray(field, dtype=np.float64)
        correct = np.asarray(correct, dtype=np.float64)
        if field.shape != self.shape:
            raise ValueError(f"field shape {field.shape} != {self.shape}")
        if correct.shape != (self.n_words,):
            raise ValueError(f"correctness row has shape {correct.shape}, expected ({self.n_words},)")
        if self._shift is None:
            self._shift = field.copy()
        x = field - self._shift
        self.n += 1
        self._sd += x
        self._sdd += x * x
        self._sy += correct
        self._syy += correct * correct
        for k in np.flatnonzero(correct):
            self._sdy[k] += x * correct[k]
        np.maximum(self._scale, np.abs(field), out=self._scale)

    def is_constant(self, k: int) -> bool:
        return self._sy[k] in (0.0, float(self.n))

    def result(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        n = self.n
        if n < 3:
            raise ValueError(f"need at least 3 mixtures, got {n}")
        sdd = np.maximum(self._sdd - self._sd ** 2 / n, 0.0)
        syy = max(float(self._syy[k] - self._sy[k] ** 2 / n), 0.0)
        # y is binary: a constant column has exactly zero variance
        if self.is_constant(k):
            syy = 0.0
        sdy = self._sdy[k] - self._sd * self._sy[k] / n
        return _finish(sdd, syy, sdy, self._scale, n)
