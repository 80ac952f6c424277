"""Partner labelling of RPM roots, the E_n^- = E_{n-1}^+ degeneracy and the
even/odd interleaving of the two sectors.

One Hankel run at parity s yields the s-parity levels of both partners at
once. Within a sector they alternate, E_s^- < E_s^+ < E_{s+2}^- < ..., which
is also why the odd list looks like the even list shifted by one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import EVEN, ODD, Hamiltonian, ParitySector, SpectrumLabel
from .errors import AmbiguousClassification
from .rayleigh_ritz import SpectrumTable

CLASSIFY_TOLERANCE = Fraction(1, 10**6)
DEGENERACY_TOLERANCE = Fraction(1, 10**15)
# an RPM root may sit this far (relative) above its variational bound and
# still count as below it; covers rounding in both numbers
BOUND_SLACK = Fraction(1, 10**12)


class Source(str, enum.Enum):
    RPM = "rpm"
    VARIATIONAL = "variational"


@dataclass(frozen=True)
class LabeledValue:
    value: object
    label: SpectrumLabel | None
    source: Source = Source.RPM

    @property
    def classified(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class PartnerPair:
    n: int
    e_minus: object
    e_plus_shifted: object

    @property
    def residual(self):
        return abs(self.e_minus - self.e_plus_shifted)


@dataclass(frozen=True)
class DegeneracyReport:
    pairs: tuple = ()

    @property
    def residuals(self) -> list:
        return [p.residual for p in self.pairs]

    @property
    def max_residual(self):
        return max(self.residuals, default=None)

    def within(self, tol=DEGENERACY_TOLERANCE, n_range: Sequence[int] | None = None) -> bool:
        pairs = [p for p in self.pairs if n_range is None or p.n in n_range]
        return bool(pairs) and all(p.residual <= tol for p in pairs)


@dataclass(frozen=True)
class LabeledSpectrum:
    entries: tuple = ()
    residuals: tuple = field(default=(), compare=False)

    def __post_init__(self):
        values = [e.value for e in self.entries]
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError("entries must be ascending")

    def __len__(self):
        return len(self.entries)

    def value(self, hamiltonian, n: int):
        hamiltonian = Hamiltonian(hamiltonian)
        for e in self.entries:
            if e.label is not None and e.label.hamiltonian == hamiltonian and e.label.n == n:
                return e.value
        return None

    @property
    def unclassified(self) -> list:
        return [e for e in self.entries if e.label is None]

    def labels(self) -> list:
        return [e.label for e in self.entries]


def _within_bound(bound, r, tol) -> bool:
    gap = bound - r
    scale = 1 + abs(r)
    return -BOUND_SLACK * scale <= gap <= tol * scale


def _interleaved_label(k: int, parity: ParitySector) -> SpectrumLabel:
    # position k in one sector's ascending list: minus, plus, minus, ...
    n = 2 * (k // 2) + parity.s
    return SpectrumLabel(Hamiltonian.H_MINUS if k % 2 == 0 else Hamiltonian.H_PLUS, n)


def _sector_candidates(table: SpectrumTable, hamiltonian: Hamiltonian, parity: ParitySector) -> list:
    N = max(table.sizes())
    return [(SpectrumLabel(hamiltonian, lvl.n), lvl.value) for lvl in table.rows[N] if lvl.parity == parity]


def _classify_sector(roots, parity, var_minus, var_plus, tol) -> list:
    candidates = _sector_candidates(var_minus, Hamiltonian.H_MINUS, parity)
    candidates += _sector_candidates(var_plus, Hamiltonian.H_PLUS, parity)
    out = []
    for k, r in enumerate(roots):
        near = [label for label, bound in candidates if _within_bound(bound, r, tol)]
        fallback = _interleaved_label(k, parity)
        if len(near) == 1:
            label = near[0]
        elif len(near) > 1:
            if fallback not in near:
                raise AmbiguousClassification(
                    f"root {r} lies within tolerance of {', '.join(map(str, near))} "
                    f"and its position suggests {fallback}"
                )
            label = fallback
        else:
            # no bound close enough: trust the alternation as long as the
            # matching bound still lies above the root
            bound = dict(candidates).get(fallback)
            ok = bound is not None and bound - r >= -BOUND_SLACK * (1 + abs(r))
            label = fallback if ok else None
        out.append(LabeledValue(r, label, Source.RPM))
    return out


def classify_roots(
    even_rpm: Sequence,
    odd_rpm: Sequence,
    var_minus: SpectrumTable,
    var_plus: SpectrumTable,
    tol=CLASSIFY_TOLERANCE,
) -> LabeledSpectrum:
    """Label converged RPM roots as states of H_- or H_+.

    A root r is taken to be state n of a partner when that partner's
    variational value for n (at its largest basis size, same parity) lies at
    or above r and within ``tol * (1 + |r|)`` of it. When both partners
    qualify, the alternation within the sector decides. When neither does,
    the alternation alone labels the root provided the matching variational
    value is still an upper bound; otherwise the root stays unclassified.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    entries = _classify_sector(sorted(even_rpm), EVEN, var_minus, var_plus, tol)
    entries += _classify_sector(sorted(odd_rpm), ODD, var_minus, var_plus, tol)
    entries.sort(key=lambda e: (e.value, e.label.parity.s if e.label else 2))
    spectrum = LabeledSpectrum(tuple(entries))
    return LabeledSpectrum(spectrum.entries, tuple(degeneracy_report(spectrum).residuals))


def degeneracy_report(spectrum: LabeledSpectrum) -> DegeneracyReport:
    """Pairs (E_n^-, E_{n-1}^+) for every n >= 1 where both were labelled."""
    pairs = []
    minus = {e.label.n: e.value for e in spectrum.entries if e.label and e.label.hamiltonian == Hamiltonian.H_MINUS}
    plus = {e.label.n: e.value for e in spectrum.entries if e.label and e.label.hamiltonian == Hamiltonian.H_PLUS}
    for n in sorted(minus):
        if n >= 1 and n - 1 in plus:
            pairs.append(PartnerPair(n, minus[n], plus[n - 1]))
    return DegeneracyReport(tuple(pairs))


def interleaving_check(even_list: Sequence, odd_list: Sequence, tol=DEGENERACY_TOLERANCE) -> list[bool]:
    """b_k = |odd[k] - even[k+1]| <= tol * (1 + |odd[k]|) for every valid k."""
    count = min(len(odd_list), len(even_list) - 1)
    return [abs(odd_list[k] - even_list[k + 1]) <= tol * (1 + abs(odd_list[k])) for k in range(max(count, 0))]
