"""Small dense optimization kernels used by the fitting pipeline."""

from __future__ import annotations

import numpy as np

__all__ = ["nnls", "golden_section_min", "project_to_simplex"]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def nnls(A, b, tol: float | None = None, max_iter: int | None = None) -> np.ndarray:
    """Lawson-Hanson active-set solver for min ||Ax - b||^2 s.t. x >= 0.

    Sized for the tiny, dense systems of this package (tens of columns).
    ``tol`` is the dual-feasibility threshold on the gradient A'(b - Ax);
    by default it is relative to the problem scale.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if tol is None:
        tol = 1e-10 * max(1.0, float(np.abs(A.T @ b).max()))
    if max_iter is None:
        max_iter = 50 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    for _ in range(max_iter):
        if passive.all() or np.max(w[~passive], initial=-np.inf) <= tol:
            break
        free = np.where(~passive)[0]
        passive[free[np.argmax(w[free])]] = True
        while True:
            s = np.zeros(n)
            s[passive], *_ = np.linalg.lstsq(A[:, passive], b, rcond=None)
            if np.min(s[passive], initial=np.inf) > 0:
                x = s
                break
            # Back off along the segment x -> s until a passive variable hits 0.
            blocking = passive & (s <= 0)
            alpha = np.min(x[blocking] / (x[blocking] - s[blocking]))
            x = x + alpha * (s - x)
            passive &= x > 1e-14
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)
    return x


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-8,
                       max_iter: int = 200) -> tuple[float, float]:
    """Golden-section minimum of f on [lo, hi]; returns (x, f(x)).

    Finds the global minimum for unimodal f, a local one otherwise.
    """
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection of v onto {x : x >= 0, sum(x) = 1}."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)
