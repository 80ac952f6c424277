"""Dense linear algebra on lists of gmpy2 numbers.

Everything here runs in whatever gmpy2 context is active, so callers wrap
calls in ``PrecisionContext.local()``. Matrices are lists of row lists.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .errors import IllConditioned, NoConvergence


def cholesky(a: list[list]) -> list[list]:
    """Lower-triangular L with a = L L^T."""
    n = len(a)
    low = [[mpfr(0)] * n for _ in range(n)]
    for j in range(n):
        acc = a[j][j] - sum(low[j][k] ** 2 for k in range(j))
        if not acc > 0:
            raise IllConditioned(f"overlap matrix not positive definite at pivot {j} (value {float(acc):.3e})")
        low[j][j] = gmpy2.sqrt(acc)
        for i in range(j + 1, n):
            low[i][j] = (a[i][j] - sum(low[i][k] * low[j][k] for k in range(j))) / low[j][j]
    return low


def _solve_lower(low, b):
    x = []
    for i, row in enumerate(low):
        x.append((b[i] - sum(row[k] * x[k] for k in range(i))) / row[i])
    return x


def congruence_reduce(h: list[list], low: list[list]) -> list[list]:
    """Return L^-1 h L^-T for symmetric h, symmetrised."""
    n = len(h)
    # Y = L^-1 h, column by column
    y_cols = [_solve_lower(low, [h[i][j] for i in range(n)]) for j in range(n)]
    # C = L^-1 Y^T (Y^T = h L^-T rows since h symmetric)
    c_cols = [_solve_lower(low, [y_cols[i][j] for i in range(n)]) for j in range(n)]
    c = [[c_cols[j][i] for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            c[i][j] = c[j][i] = (c[i][j] + c[j][i]) / 2
    return c


def jacobi_eigenvalues(a: list[list], max_sweeps: int = 100) -> list:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal norm falls below one unit roundoff of
    the Frobenius norm. Returns the eigenvalues in ascending order.
    """
    n = len(a)
    a = [list(row) for row in a]
    if n == 1:
        return [a[0][0]]
    eps = mpfr(2) ** (1 - gmpy2.get_context().precision)
    frob = gmpy2.sqrt(sum(x * x for row in a for x in row))
    if frob == 0:
        return [mpfr(0)] * n
    for _ in range(max_sweeps):
        off = gmpy2.sqrt(sum(a[p][q] ** 2 for p in range(n) for q in range(p + 1, n)))
        if off <= eps * frob:
            return sorted(a[i][i] for i in range(n))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0 or abs(apq) <= eps * eps * frob:
                    a[p][q] = a[q][p] = mpfr(0)
                    continue
                theta = (a[q][q] - a[p][p]) / (2 * apq)
                t = 1 / (abs(theta) + gmpy2.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / gmpy2.sqrt(t * t + 1)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
                a[p][q] = a[q][p] = mpfr(0)
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


@dataclass(frozen=True)
class SignedLogValue:
    """sign * exp(log_magnitude); log_magnitude is None when sign == 0."""

    sign: int
    log_magnitude: mpfr | None

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")
        if self.sign == 0 and self.log_magnitude is not None:
            raise ValueError("log_magnitude is undefined for a zero value")

    def value(self):
        if self.sign == 0:
            return mpfr(0)
        return self.sign * gmpy2.exp(self.log_magnitude)


def lu_determinant(a: list[list], zero_threshold=None):
    """Determinant by LU with full pivoting.

    Returns ``(sign, pivots)`` where the determinant is ``sign * prod(pivots)``.
    A pivot whose magnitude falls below ``zero_threshold`` times the largest
    entry of the original matrix makes the determinant exactly zero
    (``sign = 0``, empty pivot list).
    """
    n = len(a)
    a = [list(row) for row in a]
    scale = max((abs(x) for row in a for x in row), default=0)
    if scale == 0:
        return 0, []
    cutoff = scale * zero_threshold if zero_threshold is not None else 0
    sign = 1
    pivots = []
    for k in range(n):
        best_i, best_j, best = k, k, -1
        for i in range(k, n):
            mags = list(map(abs, a[i][k:]))
            v = max(mags)
            if v > best:
                best_i, best_j, best = i, k + mags.index(v), v
        if best <= cutoff or best == 0:
            return 0, []
        if best_i != k:
            a[k], a[best_i] = a[best_i], a[k]
            sign = -sign
        if best_j != k:
            for row in a:
                row[k], row[best_j] = row[best_j], row[k]
            sign = -sign
        rk = a[k]
        p = rk[k]
        pivots.append(p)
        tail = rk[k + 1:]
        for i in range(k + 1, n):
            ri = a[i]
            m = ri[k] / p
            if m:
                ri[k + 1:] = [x - m * y for x, y in zip(ri[k + 1:], tail)]
    for p in pivots:
        if p < 0:
            sign = -sign
    return sign, pivots


def signed_log_determinant(a: list[list], zero_threshold=None) -> SignedLogValue:
    sign, pivots = lu_determinant(a, zero_threshold)
    if sign == 0:
        return SignedLogValue(0, None)
    return SignedLogValue(sign, sum(gmpy2.log(abs(p)) for p in pivots))


def leading_minors(a: list[list], zero_threshold) -> list:
    """All leading principal minors of ``a`` from one elimination without pivoting.

    Entry k is the determinant of the (k+1)x(k+1) leading block, or ``None``
    once a pivot drops below ``zero_threshold`` relative to the matrix scale
    (the caller then has to evaluate the remaining minors separately).
    """
    n = len(a)
    a = [list(row) for row in a]
    scale = max((abs(x) for row in a for x in row), default=0)
    out = []
    prod = mpfr(1)
    for k in range(n):
        p = a[k][k]
        # exact zeros are left to the pivoting path as well
        if scale == 0 or abs(p) <= scale * zero_threshold:
            out.extend([None] * (n - k))
            return out
        prod = prod * p
        out.append(prod)
        rk = a[k]
        tail = rk[k + 1:]
        for i in range(k + 1, n):
            ri = a[i]
            m = ri[k] / p
            if m:
                ri[k + 1:] = [x - m * y for x, y in zip(ri[k + 1:], tail)]
    return out


def bareiss_determinant(a: list[list]):
    """Exact determinant by fraction-free elimination (entries: int, Fraction, mpq)."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0 * m[0][0]
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]
