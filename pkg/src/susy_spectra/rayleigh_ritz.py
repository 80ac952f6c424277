"""Parity-separated Rayleigh-Ritz solver on the half line.

Basis functions are x**j exp(-x**3/3). The even sector uses j = 0, 2, 3, ..., N
(j = 1 would break psi'(0) = 0); the odd sector uses j = 1, ..., N. Each sector
is an independent N x N generalized eigenproblem H c = E S c.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import gmpy2
from gmpy2 import mpfr

from . import linalg
from .core import EVEN, ODD, ParitySector, PolynomialPotential, PotentialLabel, PrecisionContext
from .errors import SymmetryViolation
from .moments import MomentTable, moment_table

DEFAULT_CONTEXT = PrecisionContext(50)
MAX_BASIS_SIZE = 25


@dataclass(frozen=True)
class BasisSpec:
    parity: ParitySector
    size: int

    def __post_init__(self):
        object.__setattr__(self, "parity", ParitySector.parse(self.parity))
        if self.size < 1:
            raise ValueError(f"basis size must be positive, got {self.size}")

    @property
    def indices(self) -> tuple[int, ...]:
        if self.parity.s == 0:
            return (0,) + tuple(range(2, self.size + 1))
        return tuple(range(1, self.size + 1))

    def moments_needed(self, potential: PolynomialPotential | None = None) -> int:
        top = max(potential.degree, 4) if potential is not None else 4
        return 2 * max(self.indices) + top


@dataclass(frozen=True)
class SymmetricMatrix:
    rows: tuple[tuple, ...]

    @property
    def dimension(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def tolist(self) -> list[list]:
        return [list(r) for r in self.rows]


def _check_moments(moments: MomentTable, needed: int):
    if moments.n_max < needed:
        raise ValueError(f"moment table covers n <= {moments.n_max}, need {needed}")


def overlap_matrix(basis: BasisSpec, moments: MomentTable) -> SymmetricMatrix:
    """S_ab = M(j_a + j_b); raises IllConditioned if S is not numerically SPD."""
    idx = basis.indices
    _check_moments(moments, 2 * max(idx))
    rows = tuple(tuple(moments[ja + jb] for jb in idx) for ja in idx)
    with moments.precision.local():
        linalg.cholesky([list(r) for r in rows])
    return SymmetricMatrix(rows)


def hamiltonian_entry(potential: PolynomialPotential, ja: int, jb: int, moments: MomentTable):
    """<phi_a| H phi_b> from the one-sided closed form.

    -phi_j'' = (-j(j-1) x^(j-2) + (2j+2) x^(j+1) - x^(j+4)) e^(-x^3/3); the x^4
    term of V cancels the last piece.
    """
    m = ja + jb
    value = (2 * jb + 2) * moments[m + 1]
    if jb > 1:
        value -= jb * (jb - 1) * moments[m - 2]
    for k, c in potential.coefficients.items():
        if k == 4:
            continue
        value += gmpy2.mpq(c.numerator, c.denominator) * moments[m + k]
    if potential.coefficient(4) != 1:
        value += gmpy2.mpq(potential.coefficient(4) - 1) * moments[m + 4]
    return value


def hamiltonian_matrix(
    potential: PolynomialPotential,
    basis: BasisSpec,
    moments: MomentTable,
    symmetry_slack: int = 8,
) -> SymmetricMatrix:
    """Assemble H, assert emergent symmetry, then symmetrise by averaging.

    The one-sided form is symmetric only through Gamma-function identities,
    so a mismatch beyond 10**(-digits + symmetry_slack) points at a broken
    moment table.
    """
    idx = basis.indices
    _check_moments(moments, basis.moments_needed(potential))
    ctx = moments.precision
    with ctx.local():
        raw = [[hamiltonian_entry(potential, ja, jb, moments) for jb in idx] for ja in idx]
        tol = mpfr(10) ** (symmetry_slack - ctx.decimal_digits)
        n = len(idx)
        for a in range(n):
            for b in range(a + 1, n):
                gap = abs(raw[a][b] - raw[b][a])
                if gap > tol * max(abs(raw[a][b]), 1):
                    raise SymmetryViolation(
                        f"H[{idx[a]},{idx[b]}] - H[{idx[b]},{idx[a]}] = {float(gap):.3e}"
                    )
                raw[a][b] = raw[b][a] = (raw[a][b] + raw[b][a]) / 2
    return SymmetricMatrix(tuple(tuple(r) for r in raw))


def asymmetry(potential, basis, moments) -> mpfr:
    """Largest relative |H_ab - H_ba| of the unsymmetrised matrix."""
    idx = basis.indices
    with moments.precision.local():
        worst = mpfr(0)
        for a, ja in enumerate(idx):
            for jb in idx[a + 1:]:
                hab = hamiltonian_entry(potential, ja, jb, moments)
                hba = hamiltonian_entry(potential, jb, ja, moments)
                worst = max(worst, abs(hab - hba) / max(abs(hab), 1))
    return worst


def solve_generalized(
    H: SymmetricMatrix, S: SymmetricMatrix, ctx: PrecisionContext, max_sweeps: int = 100
) -> list:
    """Ascending eigenvalues of H c = E S c via Cholesky and cyclic Jacobi."""
    if H.dimension != S.dimension:
        raise ValueError("H and S differ in dimension")
    with ctx.local():
        low = linalg.cholesky(S.tolist())
        reduced = linalg.congruence_reduce(H.tolist(), low)
        values = linalg.jacobi_eigenvalues(reduced, max_sweeps=max_sweeps)
    return [ctx.real(v) for v in values]


def sector_eigenvalues(potential: PolynomialPotential, parity, size: int, ctx: PrecisionContext = DEFAULT_CONTEXT):
    basis = BasisSpec(ParitySector.parse(parity), size)
    moments = moment_table(basis.moments_needed(potential), ctx)
    S = overlap_matrix(basis, moments)
    H = hamiltonian_matrix(potential, basis, moments)
    return solve_generalized(H, S, ctx)


@dataclass(frozen=True)
class Level:
    n: int
    parity: ParitySector
    value: mpfr


@dataclass(frozen=True)
class SpectrumTable:
    """Variational upper bounds indexed by basis size N, ascending within each row.

    Values are upper bounds at size N; the basis is not known to be complete,
    so nothing here is reported as converged.
    """

    rows: dict = field(default_factory=dict)
    potential: PotentialLabel = PotentialLabel.CUSTOM
    parity: ParitySector | None = None

    def values(self, N: int) -> list:
        return [lvl.value for lvl in self.rows[N]]

    def sizes(self) -> list[int]:
        return sorted(self.rows)

    def state(self, n: int, N: int | None = None) -> Level | None:
        """Level with full-line index n at size N (largest N by default)."""
        N = max(self.rows) if N is None else N
        for lvl in self.rows[N]:
            if lvl.n == n:
                return lvl
        return None

    def sector(self, parity) -> "SpectrumTable":
        parity = ParitySector.parse(parity)
        rows = {N: tuple(l for l in levels if l.parity == parity) for N, levels in self.rows.items()}
        return SpectrumTable(rows, self.potential, parity)


def variational_table(
    potential: PolynomialPotential, N_range: Iterable[int], ctx: PrecisionContext = DEFAULT_CONTEXT
) -> SpectrumTable:
    """Solve both sectors for every N and merge them ascending into full-line indices."""
    sizes = sorted(set(N_range))
    if not sizes:
        raise ValueError("N_range is empty")
    if sizes[-1] > MAX_BASIS_SIZE:
        raise ValueError(f"basis size is limited to {MAX_BASIS_SIZE}")
    rows = {}
    for N in sizes:
        merged = [(v, EVEN) for v in sector_eigenvalues(potential, EVEN, N, ctx)]
        merged += [(v, ODD) for v in sector_eigenvalues(potential, ODD, N, ctx)]
        merged.sort(key=lambda item: item[0])
        rows[N] = tuple(Level(n, parity, v) for n, (v, parity) in enumerate(merged))
    return SpectrumTable(rows, potential.label)
