"""Riccati-Pade method: Hankel determinants of the series coefficients and their roots.

H_D^d(E) is the determinant of the D x D matrix with entry (i, j) equal to
f_{i+j+d-1} (i, j = 1..D). Its real zeros E^[D,d] approach the eigenvalues as
D grows. Roots are located numerically at fixed E: a grid scan for sign changes
and for hidden root pairs, then bisection.

Hankel polynomials of this kind have clusters of nearly coincident real roots
around every eigenvalue, closer together than any practical grid. A grid node
where |H| has a local minimum without a sign change is therefore probed by
successive parabolic interpolation; once a sample with the opposite sign turns
up, the pair is split into two sign-change brackets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpfr

from . import linalg
from .core import PolynomialPotential, PrecisionContext, SpectrumLabel
from .errors import InsufficientCoefficients
from .linalg import SignedLogValue
from .series import CoefficientSeries, series_coefficients

log = logging.getLogger(__name__)

DEFAULT_WINDOW = (Fraction(-1), Fraction(40))
DEFAULT_GRID_STEP = Fraction(1, 20)
DEFAULT_CONTEXT = PrecisionContext(80, Fraction(1, 10**25))
D_START = 3
PERSISTENCE = 5
MAX_GAP = 3
MIN_TRACKING_WINDOW = Fraction(1, 1000)
DEFAULT_ERROR_BOUND = Fraction(1, 10**6)
MAX_PROBE_STEPS = 40
HANKEL_GUARD_DIGITS = 15
SCAN_TOLERANCE = Fraction(1, 10**8)
REFINE_BOUND = Fraction(1, 10**2)
FOLLOW_START = Fraction(1, 40)
FOLLOW_REACH = 100
# the two precisions must agree to 25 significant digits
CONFIRM_RELATIVE = Fraction(1, 10**25)
CLUSTER_WIDTH = Fraction(1, 10**6)
RESTART_WIDTHS = (Fraction(1, 10**2), Fraction(1, 10**4), Fraction(1, 10**6))


def required_count(D: int, d: int) -> int:
    return 2 * D + d


def hankel_rows(values: Sequence, D: int, d: int) -> list[list]:
    # 0-based (i, j) -> f_{i+j+d+1}, i.e. f_{i+j+d-1} with 1-based indices
    return [[values[i + j + d + 1] for j in range(D)] for i in range(D)]


def _zero_threshold(ctx: PrecisionContext) -> mpfr:
    return mpfr(10) ** (5 - ctx.decimal_digits)


def hankel_determinant(series: CoefficientSeries, D: int, d: int, ctx: PrecisionContext) -> SignedLogValue:
    """Sign and log-magnitude of H_D^d from numeric coefficients (full-pivot LU)."""
    if D < 1 or d < 0:
        raise ValueError("need D >= 1 and d >= 0")
    if series.exact:
        raise TypeError("hankel_determinant expects a numeric series; use exact_hankel_determinant")
    if series.count < required_count(D, d):
        raise InsufficientCoefficients(f"H_{D}^{d} needs {required_count(D, d)} coefficients, got {series.count}")
    with ctx.local():
        return linalg.signed_log_determinant(hankel_rows(series.values, D, d), _zero_threshold(ctx))


def exact_hankel_determinant(series: CoefficientSeries, D: int, d: int, E):
    """Exact H_D^d at rational E by fraction-free elimination."""
    if series.count < required_count(D, d):
        raise InsufficientCoefficients(f"H_{D}^{d} needs {required_count(D, d)} coefficients, got {series.count}")
    values = series.at(E) if series.exact else series.values
    return linalg.bareiss_determinant(hankel_rows(values, D, d))


class HankelEvaluator:
    """Signed values of H_D^d(E) for one potential, parity and offset d.

    Hankel matrices of these series are badly conditioned, so coefficients
    and elimination run with HANKEL_GUARD_DIGITS extra digits and only the
    result is rounded to the working precision. With ``reduced`` the entries
    are the x**2 coefficients of an even potential instead.
    """

    def __init__(self, potential: PolynomialPotential, s: int, d: int, ctx: PrecisionContext, reduced: bool = False):
        self.potential = potential
        self.s = s
        self.d = d
        self.ctx = ctx
        self.reduced = reduced
        self.inner = PrecisionContext(ctx.decimal_digits + HANKEL_GUARD_DIGITS, ctx.root_tolerance)
        self.calls = 0

    def series(self, E, D: int) -> CoefficientSeries:
        return series_coefficients(
            self.potential, self.s, E, required_count(D, self.d), self.inner, guard_digits=0, reduced=self.reduced
        )

    def _round(self, x) -> mpfr:
        return mpfr(x, self.ctx.bits)

    def value(self, E, D: int) -> mpfr:
        """H_D^d(E) as a signed number; exactly 0 when a pivot vanishes."""
        self.calls += 1
        f = self.series(E, D).values
        with self.inner.local():
            sign, pivots = linalg.lu_determinant(hankel_rows(f, D, self.d), _zero_threshold(self.ctx))
            if sign == 0:
                return mpfr(0)
            prod = mpfr(sign)
            for p in pivots:
                prod *= abs(p)
        return self._round(prod)

    def all_values(self, E, D_max: int) -> list:
        """H_1 .. H_{D_max} at E from one elimination; falls back to pivoting when needed."""
        self.calls += 1
        f = self.series(E, D_max).values
        with self.inner.local():
            rows = hankel_rows(f, D_max, self.d)
            minors = linalg.leading_minors(rows, mpfr(10) ** (-(self.ctx.decimal_digits // 4)))
        out = []
        for D, m in enumerate(minors, start=1):
            out.append(self._round(m) if m is not None else self.value(E, D))
        return out


def energy_grid(window, grid_step, ctx: PrecisionContext) -> list:
    lo, hi = (Fraction(w) for w in window)
    step = Fraction(grid_step)
    if not lo < hi:
        raise ValueError("window must satisfy E_lo < E_hi")
    if step <= 0:
        raise ValueError("grid_step must be positive")
    count = int((hi - lo) / step)
    points = [lo + k * step for k in range(count + 1)]
    if points[-1] < hi:
        points.append(hi)
    return [ctx.real(p) for p in points]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def bisect(fn: Callable, a, b, fa, fb, tol) -> mpfr:
    """Bisection on a sign-change bracket until its width is below tol."""
    if fa == 0:
        return a
    if fb == 0:
        return b
    sa = _sign(fa)
    while b - a > tol:
        m = (a + b) / 2
        fm = fn(m)
        if fm == 0:
            return m
        if _sign(fm) == sa:
            a = m
        else:
            b = m
    return (a + b) / 2


def probe_pair(fn: Callable, pts, vals, tol, max_steps: int = MAX_PROBE_STEPS):
    """Look for a sign flip near a local minimum of |fn|.

    ``pts``/``vals`` are three ordered samples of one sign with the smallest
    magnitude in the middle. Returns ``(x, fx)`` with fx of the opposite sign
    (or zero), or None when the dip looks like a complex-conjugate pair.
    """
    (a, b, c), (fa, fb, fc) = pts, vals
    sgn = _sign(fb)
    settled = 0
    for _ in range(max_steps):
        if c - a <= tol:
            return None
        # vertex of the parabola through the three signed samples
        d1 = (fb - fa) / (b - a)
        d2 = (fc - fb) / (c - b)
        curv = (d2 - d1) / (c - a)
        x = None
        predicted = None
        if curv != 0:
            x = (a + b) / 2 - d1 / (2 * curv)
            predicted = fb + d1 * (x - b) + curv * (x - a) * (x - b)
        if x is None or not (a < x < c) or abs(x - b) < tol / 4:
            # golden-section fallback into the wider side
            x = b + (c - b) * mpfr("0.381966") if c - b > b - a else b - (b - a) * mpfr("0.381966")
            predicted = None
        fx = fn(x)
        if fx == 0 or _sign(fx) != sgn:
            return x, fx
        if predicted is not None and _sign(predicted) == sgn and abs(fx - predicted) <= abs(fx) / 100:
            # the quadratic model is accurate and stays clear of zero
            settled += 1
            if settled >= 2:
                return None
        else:
            settled = 0
        if abs(fx) < abs(fb):
            if x < b:
                c, fc = b, fb
            else:
                a, fa = b, fb
            b, fb = x, fx
        elif x < b:
            a, fa = x, fx
        else:
            c, fc = x, fx
    return None


def roots_from_samples(fn: Callable, grid: Sequence, values: Sequence, tol) -> list:
    """Refine sign changes and probed root pairs of fn sampled on ``grid``."""
    brackets = []
    n = len(grid)
    for k in range(n):
        if values[k] == 0:
            brackets.append((grid[k], grid[k], values[k], values[k]))
    for k in range(n - 1):
        fa, fb = values[k], values[k + 1]
        if fa != 0 and fb != 0 and _sign(fa) != _sign(fb):
            brackets.append((grid[k], grid[k + 1], fa, fb))
    for k in range(1, n - 1):
        fa, fb, fc = values[k - 1], values[k], values[k + 1]
        if fa == 0 or fb == 0 or fc == 0:
            continue
        if not (_sign(fa) == _sign(fb) == _sign(fc)):
            continue
        if abs(fb) < abs(fa) and abs(fb) < abs(fc):
            hit = probe_pair(fn, (grid[k - 1], grid[k], grid[k + 1]), (fa, fb, fc), tol)
            if hit is not None:
                x, fx = hit
                if fx == 0:
                    brackets.append((x, x, fx, fx))
                else:
                    brackets.append((grid[k - 1], x, fa, fx))
                    brackets.append((x, grid[k + 1], fx, fc))
    roots = []
    for a, b, fa, fb in brackets:
        roots.append(a if a == b else bisect(fn, a, b, fa, fb, tol))
    return sorted(set(roots))


def find_roots(
    potential: PolynomialPotential,
    s: int,
    D: int,
    d: int,
    window=DEFAULT_WINDOW,
    grid_step=DEFAULT_GRID_STEP,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    reduced: bool = False,
) -> list:
    """Ascending real roots of H_D^d(E) inside the window.

    Roots come from grid sign changes and probed local minima, each refined by
    bisection to ``ctx.root_tolerance``. Pairs hidden inside a single grid cell
    whose dip is not a local minimum on the grid can still be missed.
    """
    evaluator = HankelEvaluator(potential, s, d, ctx, reduced)
    grid = energy_grid(window, grid_step, ctx)
    fn = lambda E: evaluator.value(E, D)  # noqa: E731
    with ctx.local():
        values = [fn(E) for E in grid]
        return roots_from_samples(fn, grid, values, ctx.real(ctx.root_tolerance))


@dataclass(frozen=True)
class RootSequence:
    d: int
    roots: dict
    converged: mpfr
    error_estimate: mpfr | None
    label: SpectrumLabel | None = None
    converged_ok: bool = True
    confirmed: bool | None = None

    @property
    def D_max(self) -> int:
        return max(self.roots)

    def __len__(self):
        return len(self.roots)

    def with_label(self, label: SpectrumLabel) -> "RootSequence":
        return RootSequence(self.d, self.roots, self.converged, self.error_estimate, label, self.converged_ok, self.confirmed)


@dataclass
class _Track:
    roots: dict = field(default_factory=dict)

    @property
    def last_D(self):
        return max(self.roots)

    @property
    def last(self):
        return self.roots[self.last_D]

    def window(self):
        Ds = sorted(self.roots)[-4:]
        if len(Ds) < 2:
            return None
        diffs = [abs(self.roots[b] - self.roots[a]) for a, b in zip(Ds, Ds[1:])]
        return max(10 * max(diffs), MIN_TRACKING_WINDOW)


class _Tracker:
    """Greedy nearest-neighbour continuation of roots across D.

    A track accepts a root within max(10 * recent step, 1e-3) of its latest
    value (``initial_window`` while it has a single root), and survives up to
    ``max_gap`` consecutive D values without a match.
    """

    def __init__(self, initial_window=Fraction(1, 2), max_gap: int = MAX_GAP):
        self.initial_window = initial_window
        self.max_gap = max_gap
        self.live: list[_Track] = []
        self.finished: list[_Track] = []

    def window(self, track: _Track):
        w = track.window()
        return self.initial_window if w is None else w

    def extend(self, D: int, roots: Sequence) -> None:
        candidates = []
        for ti, t in enumerate(self.live):
            w = self.window(t)
            for ri, r in enumerate(roots):
                dist = abs(r - t.last)
                if dist <= w:
                    candidates.append((dist, ti, ri))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        used_t, used_r = set(), set()
        for dist, ti, ri in candidates:
            if ti in used_t or ri in used_r:
                continue
            self.live[ti].roots[D] = roots[ri]
            used_t.add(ti)
            used_r.add(ri)
        for ri, r in enumerate(roots):
            if ri not in used_r:
                self.live.append(_Track({D: r}))
        alive = []
        for t in self.live:
            (alive if D - t.last_D <= self.max_gap else self.finished).append(t)
        self.live = alive

    def tracks(self) -> list[dict]:
        return [t.roots for t in self.finished + self.live]


def link_sequences(roots_by_D: dict, initial_window=Fraction(1, 2), max_gap: int = MAX_GAP) -> list[dict]:
    """Link the roots found at each D into sequences (see ``_Tracker``)."""
    tracker = _Tracker(initial_window, max_gap)
    for D in sorted(roots_by_D):
        tracker.extend(D, roots_by_D[D])
    return tracker.tracks()


def nearest_root(fn: Callable, x0, radius, tol, f0=None):
    """A root of fn close to x0, or None if no sign change shows up within radius.

    Steps outwards from x0 on both sides by factors of four starting at tol,
    then bisects the first bracket found. Used to follow a converging sequence
    into root clusters far narrower than any grid.
    """
    f0 = fn(x0) if f0 is None else f0
    if f0 == 0:
        return x0
    sides = [[x0, f0], [x0, f0]]
    step = tol
    while step <= radius:
        for side, direction in zip(sides, (1, -1)):
            x = x0 + direction * step
            fx = fn(x)
            if fx == 0:
                return x
            if _sign(fx) != _sign(side[1]):
                a, b, fa, fb = (side[0], x, side[1], fx) if direction > 0 else (x, side[0], fx, side[1])
                return bisect(fn, a, b, fa, fb, tol)
            side[0], side[1] = x, fx
        step *= 4
    return None


def _summarise(d: int, roots: dict, error_bound) -> RootSequence:
    Ds = sorted(roots)
    converged = roots[Ds[-1]]
    # two steps, not one: for even potentials consecutive determinants share
    # factors, so a single difference can vanish spuriously
    tail = [roots[D] for D in Ds[-3:]]
    err = max(abs(b - a) for a, b in zip(tail, tail[1:])) if len(tail) > 1 else None
    ok = err is not None and err <= error_bound
    return RootSequence(d, dict(sorted(roots.items())), converged, err, None, ok)


@dataclass
class TrackingResult:
    sequences: list
    roots_by_D: dict
    evaluations: int = 0
    digits: int = 0

    def converged_values(self, only_ok: bool = True) -> list:
        return [q.converged for q in self.sequences if q.converged_ok or not only_ok]

    @property
    def failures(self) -> list:
        return [q for q in self.sequences if not q.converged_ok]


def scan_roots(
    evaluator: HankelEvaluator,
    D_values: Sequence[int],
    grid: Sequence,
    tol,
    seed_depth: int = 2,
) -> dict:
    """Roots of H_D^d for every D in D_values from one shared grid scan.

    The roots already found for the previous ``seed_depth`` values of D are
    added as extra sample points, which resolves many of the root clusters the
    uniform grid cannot.
    """
    D_values = sorted(D_values)
    D_top = D_values[-1]
    table = [evaluator.all_values(E, D_top) for E in grid]
    lo, hi = grid[0], grid[-1]
    out = {}
    for D in D_values:
        fn = lambda E, D=D: evaluator.value(E, D)  # noqa: E731
        samples = dict(zip(grid, (row[D - 1] for row in table)))
        for prev in D_values:
            if D - seed_depth <= prev < D:
                for r in out[prev]:
                    if lo < r < hi and r not in samples:
                        samples[r] = fn(r)
        points = sorted(samples)
        out[D] = roots_from_samples(fn, points, [samples[p] for p in points], tol)
        log.debug("D=%d: %d roots", D, len(out[D]))
    return out


def follow_sequence(evaluator: HankelEvaluator, estimate, D_start: int, D_max: int, tol) -> dict:
    """Trace the roots nearest ``estimate`` at full tolerance, D by D.

    Around every eigenvalue the roots of H_D form a cluster whose members sit
    at roughly geometric distances from it, and only the innermost member
    converges quickly with D. Grid sampling cannot tell the members apart,
    but at small D the clusters have not formed yet, and following the
    nearest root from one D to the next stays on the innermost member. The
    search reaches FOLLOW_START of the current root, and once the chain has
    three roots at most FOLLOW_REACH times its largest recent step; a D
    without a sign change in reach leaves a gap.
    """
    chain = {}
    x = estimate
    for D in range(D_start, D_max + 1):
        radius = FOLLOW_START * (1 + abs(x))
        if len(chain) >= 3:
            steps = list(chain.values())[-3:]
            radius = min(radius, max(FOLLOW_REACH * max(abs(b - a) for a, b in zip(steps, steps[1:])), 4 * tol))
        r = nearest_root(lambda E: evaluator.value(E, D), x, radius, tol)
        if r is not None:
            chain[D] = x = r
    return chain


def track_sequences(
    potential: PolynomialPotential,
    s: int,
    D_max: int,
    d: int,
    window=DEFAULT_WINDOW,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    grid_step=DEFAULT_GRID_STEP,
    D_start: int = D_START,
    persistence: int = PERSISTENCE,
    error_bound=DEFAULT_ERROR_BOUND,
    confirm: bool = True,
    max_digits: int = 640,
    reduced: bool = False,
) -> TrackingResult:
    """Root sequences E^[D,d] for D = D_start..D_max and their converged estimates.

    Sequences seen at fewer than ``persistence`` values of D, that died out
    before D_max, or that repeat one exact root only at some D, are dropped
    as spurious. Of several sequences converging to
    the same value only the one with the smallest error estimate is kept.
    Sequences whose error estimate exceeds ``error_bound`` are kept but flagged
    ``converged_ok = False``.

    With ``confirm`` the final roots are re-bisected at twice the precision;
    if the two disagree in the first 25 significant digits (and by more than
    twice the root tolerance) the whole run is repeated at doubled precision.

    ``reduced`` tracks the Hankel determinants of the x**2 series instead,
    which needs a potential with only even powers.
    """
    if D_max < 3:
        raise ValueError("D_max must be at least 3")
    D_start = min(D_start, D_max)
    evaluator = HankelEvaluator(potential, s, d, ctx, reduced)
    grid = energy_grid(window, grid_step, ctx)
    with ctx.local():
        tol = ctx.real(ctx.root_tolerance)
        scan_tol = max(tol, ctx.real(SCAN_TOLERANCE))
        bound = ctx.real(error_bound)
        roots_by_D = scan_roots(evaluator, list(range(D_start, D_max + 1)), grid, scan_tol)
        kept = []
        for roots in link_sequences(roots_by_D):
            if len(roots) < persistence or max(roots) < D_max - MAX_GAP or _structural_zero(roots):
                continue
            kept.append(_summarise(d, roots, bound))
        refined = []
        for group in _clusters(kept):
            best = min(group, key=_error_key)
            if _error_key(best) > ctx.real(REFINE_BOUND) * (1 + abs(best.converged)):
                refined.append(best)
                continue
            refined.append(_refine(evaluator, best, D_start, D_max, tol, scan_tol, bound, persistence))
        sequences = _deduplicate(refined)
    result = TrackingResult(sequences, roots_by_D, evaluator.calls, ctx.decimal_digits)
    if not confirm:
        return result
    with ctx.doubled().local():
        confirmed, ok = _confirm(result, potential, s, d, ctx, reduced)
    if ok or 2 * ctx.decimal_digits > max_digits:
        return confirmed
    log.info("precision %d digits not confirmed; rerunning at %d", ctx.decimal_digits, 2 * ctx.decimal_digits)
    return track_sequences(
        potential, s, D_max, d, window, ctx.doubled(), grid_step, D_start, persistence, error_bound, confirm, max_digits,
        reduced,
    )


def _refine(evaluator, best: RootSequence, D_start, D_max, tol, scan_tol, bound, persistence) -> RootSequence:
    # a chain started too early can latch onto a drifting spurious root, so
    # it only replaces the coarse track when it ends near where that one does;
    # failing that, retry from the first D at which the coarse track has
    # settled within successively tighter distances of its limit
    starts = [(D_start, best.converged)]
    scale = 1 + abs(best.converged)
    for width in RESTART_WIDTHS:
        for D in sorted(best.roots):
            if abs(best.roots[D] - best.converged) <= width * scale:
                if D > starts[-1][0]:
                    starts.append((D, best.roots[D]))
                break
    reach = 10 * max(_error_key(best), scan_tol)
    for D0, estimate in starts:
        fine = follow_sequence(evaluator, estimate, D0, D_max, tol)
        if len(fine) < persistence or max(fine) < best.D_max - MAX_GAP:
            continue
        q = _summarise(best.d, fine, bound)
        if abs(q.converged - best.converged) <= reach:
            return q
    return best


def _structural_zero(roots: dict) -> bool:
    # the same exact root at some D but not at others comes from zeros in the
    # series pattern, not from convergence; a true exact eigenvalue is a root
    # of every H_D once it appears
    values = set(roots.values())
    return len(values) == 1 and len(roots) < max(roots) - min(roots) + 1


def _error_key(q: RootSequence):
    return q.error_estimate if q.error_estimate is not None else mpfr("inf")


def _clusters(sequences: list) -> list[list]:
    # sequences whose converged values agree to CLUSTER_WIDTH share one cluster
    ordered = sorted(sequences, key=lambda q: q.converged)
    groups: list[list] = []
    for q in ordered:
        if groups and q.converged - groups[-1][-1].converged <= CLUSTER_WIDTH * (1 + abs(q.converged)):
            groups[-1].append(q)
        else:
            groups.append([q])
    return groups


def _deduplicate(sequences: list) -> list:
    # two sequences are the same eigenvalue when they agree to within ten
    # times the sharper of their error estimates
    ordered = sorted(sequences, key=lambda q: q.converged)
    groups: list[list] = []
    for q in ordered:
        if groups:
            prev = groups[-1][-1]
            scale = 10 * min(_error_key(prev), _error_key(q))
            if abs(q.converged - prev.converged) <= scale:
                groups[-1].append(q)
                continue
        groups.append([q])
    return [min(group, key=lambda q: (-q.D_max, _error_key(q), -len(q))) for group in groups]


def _confirm(result: TrackingResult, potential, s, d, ctx, reduced=False):
    hi = ctx.doubled()
    evaluator = HankelEvaluator(potential, s, d, hi, reduced)
    tol = ctx.real(ctx.root_tolerance)
    out = []
    all_ok = True
    for q in result.sequences:
        if not q.converged_ok:
            out.append(q)
            continue
        D = q.D_max
        r = hi.real(q.converged)
        if r == 0 and evaluator.value(r, D) == 0:
            out.append(RootSequence(q.d, q.roots, q.converged, q.error_estimate, q.label, q.converged_ok, True))
            continue
        refined = None
        half = 8 * hi.real(tol)
        for _ in range(6):
            a, b = r - half, r + half
            fa, fb = evaluator.value(a, D), evaluator.value(b, D)
            if fa == 0 or fb == 0 or _sign(fa) != _sign(fb):
                refined = bisect(lambda E: evaluator.value(E, D), a, b, fa, fb, hi.real(tol) / 4)
                break
            half *= 10
        agrees = refined is not None and abs(refined - r) <= max(2 * tol, abs(r) * hi.real(CONFIRM_RELATIVE))
        if refined is not None and not agrees:
            log.info("root %s at D=%d moved to %s at doubled precision", q.converged, D, refined)
            all_ok = False
        out.append(RootSequence(q.d, q.roots, q.converged, q.error_estimate, q.label, q.converged_ok, agrees))
    return TrackingResult(out, result.roots_by_D, result.evaluations + evaluator.calls, ctx.decimal_digits), all_ok
