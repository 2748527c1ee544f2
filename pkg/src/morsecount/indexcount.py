"""Exact signed counting of blow-up configurations for prescribed-curvature problems.

The combinatorial engine of the package.  A configuration is abstracted to the
ordered list of co-index parities of the admissible concentration points
``y_1, ..., y_m`` (those critical points of the curvature candidate K with
``Delta K < 0``), with ``y_1`` the global maximum, whose co-index is 0.  From the
parities alone, three independent routes compute the signed solution counts
``mu_p`` at every energy level ``p <= N``:

* ``mu_direct`` -- enumerate every blow-up configuration (a weak limit at a lower
  level, or no weak limit at all, plus a set of concentration points) and sum its
  Morse-index sign contribution;
* ``mu_recurrence`` -- a two-index recursion over the counts
  ``mu_{>=k}^{inf,p}`` of configurations that only use points ``y_k, ..., y_m``,
  anchored by the closed p = 1 row and the Euler-Poincare identities;
* ``mu_closed_form`` -- binomial closed forms available for three special parity
  patterns (all-even tail, all-odd tail, and the alternating pattern).

The two Euler-Poincare identities (``mu_1 + mu_{>=1}^{inf,1} = 1`` and
``mu_p + mu_{>=1}^{inf,p} = 0`` for p >= 2, together with
``mu_p + mu_{>=2}^{inf,p} = 0`` for all p) hold exactly on every computed table
and are exposed as ``euler_poincare_check``.

``|mu_p|`` lower-bounds the number of solutions with energy near ``p/n * S_n``;
``solution_bounds`` turns a classified parity pattern into the sharpest published
per-level bound and cross-checks it against ``|mu_p|``, failing loudly on any
inconsistency.  All arithmetic uses Python's arbitrary-precision integers; the
binomial growth in m and N can never overflow silently.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterator, Literal, Optional

CaseLabel = Literal["IndexOne", "Case1", "Case2", "Case3", "Case4"]

#: Levels are indexed 1..N and point ranks 1..m throughout; the tuples inside the
#: dataclasses are 0-based, so accessor methods are provided for the 1-based view.


class H3Warning(UserWarning):
    """A configuration has fewer than two admissible concentration points.

    Such inputs are still computed (they are useful for unit tests and for
    degenerate landscapes), but none of the multiplicity theorems apply to them,
    so theorem-derived bounds are suppressed.
    """


class ConsistencyError(RuntimeError):
    """A theorem-derived bound exceeded |mu_p|.

    This can only happen through an implementation bug -- the bounds are proved
    from the same identities the tables are built on -- so it is raised rather
    than reported.
    """


@dataclass(frozen=True)
class ParityConfig:
    """Abstract blow-up configuration: co-index parities of y_1..y_m plus a level cap.

    ``parities[j]`` is the co-index of ``y_{j+1}`` modulo 2.  Position 0 is the
    global maximum of K, whose co-index is 0, hence ``parities[0] == 0`` always.
    ``n`` is the sphere dimension (the theorems assume n >= 7; smaller n is
    allowed and merely flagged in reports).  ``N`` caps the energy level.
    """

    n: int
    parities: tuple[int, ...]
    N: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "parities", tuple(int(b) for b in self.parities))
        if not isinstance(self.n, int) or self.n < 3:
            raise ValueError(f"dimension n must be an integer >= 3, got {self.n!r}")
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"level cap N must be an integer >= 1, got {self.N!r}")
        if len(self.parities) < 1:
            raise ValueError("at least one concentration point is required")
        if any(b not in (0, 1) for b in self.parities):
            raise ValueError(f"parities must be bits, got {self.parities!r}")
        if self.parities[0] != 0:
            raise ValueError(
                "parities[0] is the global maximum and must be even (0), "
                f"got {self.parities!r}"
            )
        if len(self.parities) < 2:
            warnings.warn(
                "m = 1 violates the hypothesis m >= 2; counts are computed but "
                "no multiplicity theorem applies",
                H3Warning,
                stacklevel=2,
            )

    @property
    def m(self) -> int:
        """Number of admissible concentration points."""
        return len(self.parities)

    @property
    def satisfies_h3(self) -> bool:
        return self.m >= 2

    def to_dict(self) -> dict:
        return {"n": self.n, "parities": list(self.parities), "N": self.N}

    @classmethod
    def from_dict(cls, d: dict) -> "ParityConfig":
        try:
            return cls(n=int(d["n"]), parities=tuple(d["parities"]), N=int(d["N"]))
        except KeyError as exc:
            raise ValueError(f"parity configuration is missing field {exc}") from exc


@dataclass(frozen=True)
class IndexTable:
    """All signed counts for one configuration.

    ``mu[p-1]``            -- signed count of solutions at level p, 1 <= p <= N.
    ``mu_geq[k-1][p-1]``   -- signed count of blow-up configurations at level p
                              using only points of rank >= k, 1 <= k <= m+1 (the
                              row k = m+1 is the empty-set row, identically 0).
    ``mu_geq_at[k-1][p-1]``-- same, restricted to configurations that actually
                              use the rank-k point, 1 <= k <= m.
    """

    config: ParityConfig
    mu: tuple[int, ...]
    mu_geq: tuple[tuple[int, ...], ...]
    mu_geq_at: tuple[tuple[int, ...], ...]

    def mu_of(self, p: int) -> int:
        """mu_p for 1 <= p <= N."""
        return self.mu[p - 1]

    def mu_geq_of(self, k: int, p: int) -> int:
        """mu_{>=k}^{inf,p} for 1 <= k <= m+1, 1 <= p <= N."""
        return self.mu_geq[k - 1][p - 1]

    def mu_geq_at_of(self, k: int, p: int) -> int:
        """mu_{>=k;k}^{inf,p} for 1 <= k <= m, 1 <= p <= N."""
        return self.mu_geq_at[k - 1][p - 1]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "mu": list(self.mu),
            "mu_geq": [list(row) for row in self.mu_geq],
            "mu_geq_at": [list(row) for row in self.mu_geq_at],
        }


@dataclass(frozen=True)
class LevelBound:
    """One row of a solution-count report: level, exact energy, count bound."""

    p: int
    energy_multiple: Fraction  # energy level as an exact multiple of S_n
    lower_bound: int

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "energy_multiple_of_Sn": str(self.energy_multiple),
            "lower_bound": self.lower_bound,
        }


@dataclass(frozen=True)
class SolutionBoundReport:
    """Classified case plus per-level and total solution-count lower bounds."""

    config: ParityConfig
    index_K: int
    case_label: CaseLabel
    ell: Optional[int]
    rows: tuple[LevelBound, ...]
    total_bound: int
    mu: tuple[int, ...]
    h3_satisfied: bool
    outside_theorem_dimension: bool = field(default=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "index_K": self.index_K,
            "case_label": self.case_label,
            "ell": self.ell,
            "rows": [r.to_dict() for r in self.rows],
            "total_bound": self.total_bound,
            "mu": list(self.mu),
            "h3_satisfied": self.h3_satisfied,
            "outside_theorem_dimension": self.outside_theorem_dimension,
        }


def index_K(cfg: ParityConfig) -> int:
    """Alternating-sign sum over the configuration: sum_j (-1)^{parities[j]}."""
    return sum(1 if b == 0 else -1 for b in cfg.parities)


def _empty_rows(m: int, N: int) -> tuple[list[list[int]], list[list[int]]]:
    mu_geq = [[0] * N for _ in range(m + 1)]
    mu_geq_at = [[0] * N for _ in range(m)]
    return mu_geq, mu_geq_at


def mu_direct(cfg: ParityConfig) -> IndexTable:
    """Compute the full table by summing signs over every blow-up configuration.

    A level-p configuration using only points of rank >= k consists of a
    nonempty subset S of {k..m} with |S| <= p together with (unless |S| = p) a
    solution at the residual level p - |S|.  Residual-level solutions enter only
    through their signed count mu_{p-|S|}, because the sign contribution of the
    pair factors as (-1)^{|S| + sigma(S)} * (-1)^{morse index of the solution},
    where sigma(S) is the parity of the summed co-indices over S.  Configurations
    with |S| = p have no residual solution and carry sign (-1)^{p-1+sigma(S)}.

    ``mu_p`` itself is then pinned by the level-p Euler-Poincare identity,
    ascending in p.
    """
    m, N = cfg.m, cfg.N
    par = cfg.parities
    mu: list[int] = []
    mu_geq, mu_geq_at = _empty_rows(m, N)

    for p in range(1, N + 1):
        for k in range(1, m + 1):
            total = 0
            total_at = 0
            for size in range(1, min(p, m - k + 1) + 1):
                for S in combinations(range(k, m + 1), size):
                    sigma = sum(par[j - 1] for j in S) % 2
                    if size == p:
                        term = -1 if (p - 1 + sigma) % 2 else 1
                    else:
                        sign = -1 if (size + sigma) % 2 else 1
                        term = sign * mu[p - size - 1]
                    total += term
                    if S[0] == k:  # S is sorted, so membership of k is S[0] == k
                        total_at += term
            mu_geq[k - 1][p - 1] = total
            mu_geq_at[k - 1][p - 1] = total_at
        mu.append((1 if p == 1 else 0) - mu_geq[0][p - 1])

    return IndexTable(
        config=cfg,
        mu=tuple(mu),
        mu_geq=tuple(tuple(r) for r in mu_geq),
        mu_geq_at=tuple(tuple(r) for r in mu_geq_at),
    )


def _recurrence_rows(
    par: tuple[int, ...], N: int, mu: list[int]
) -> tuple[list[list[int]], list[list[int]]]:
    """Fill mu_geq / mu_geq_at from a mu row via the rank recursion.

    The p = 1 row is closed: mu_{>=k}^{inf,1} = sum_{j>=k} (-1)^{parity_j}, and a
    single-point configuration at rank k contributes (-1)^{parity_k}.  For p >= 2
    the recursion peels off the rank-k point:

        mu_{>=k;k}^{inf,p} = (-1)^{1 + parity_k} * (mu_{p-1} + mu_{>=k+1}^{inf,p-1})
        mu_{>=k}^{inf,p}   = mu_{>=k+1}^{inf,p} + mu_{>=k;k}^{inf,p}

    ``mu`` must hold at least p-1 entries when level p is processed; the caller
    either grows it level by level (mu_recurrence) or supplies it whole
    (mu_closed_form).
    """
    m = len(par)
    mu_geq, mu_geq_at = _empty_rows(m, N)
    for k in range(m, 0, -1):
        mu_geq_at[k - 1][0] = 1 if par[k - 1] == 0 else -1
        mu_geq[k - 1][0] = mu_geq_at[k - 1][0] + (mu_geq[k][0] if k < m else 0)
    for p in range(2, N + 1):
        for k in range(m, 0, -1):
            above = mu_geq[k][p - 2] if k < m else 0
            sign = -1 if par[k - 1] == 0 else 1  # (-1)^{1 + parity_k}
            at = sign * (mu[p - 2] + above)
            mu_geq_at[k - 1][p - 1] = at
            mu_geq[k - 1][p - 1] = (mu_geq[k][p - 1] if k < m else 0) + at
    return mu_geq, mu_geq_at


def mu_recurrence(cfg: ParityConfig) -> IndexTable:
    """Compute the full table by the rank recursion, closing each level with
    the Euler-Poincare identity mu_p = delta_{p,1} - mu_{>=1}^{inf,p}."""
    m, N = cfg.m, cfg.N
    par = cfg.parities

    mu: list[int] = []
    mu_geq, mu_geq_at = _empty_rows(m, N)

    # Level 1 is closed form.
    running = 0
    for k in range(m, 0, -1):
        single = 1 if par[k - 1] == 0 else -1
        mu_geq_at[k - 1][0] = single
        running += single
        mu_geq[k - 1][0] = running
    mu.append(1 - mu_geq[0][0])

    for p in range(2, N + 1):
        for k in range(m, 0, -1):
            above = mu_geq[k][p - 2] if k < m else 0
            sign = -1 if par[k - 1] == 0 else 1
            at = sign * (mu[p - 2] + above)
            mu_geq_at[k - 1][p - 1] = at
            mu_geq[k - 1][p - 1] = (mu_geq[k][p - 1] if k < m else 0) + at
        mu.append(-mu_geq[0][p - 1])

    return IndexTable(
        config=cfg,
        mu=tuple(mu),
        mu_geq=tuple(tuple(r) for r in mu_geq),
        mu_geq_at=tuple(tuple(r) for r in mu_geq_at),
    )


def mu_closed_form(cfg: ParityConfig) -> Optional[IndexTable]:
    """Binomial closed forms for the three special parity patterns.

    * all-even tail (m >= 3):  mu_p = -C(p+m-2, m-2);
    * all-odd tail (m >= 3):   mu_1 = m-1, mu_p = (-1)^{p+1} C(p+m-2, m-2) for p >= 2;
    * alternating (m = 2l+1):  mu_{2p-1} = 0, mu_{2p} = -C(p+l-1, p).

    The match is literal (the given order, not the multiset up to permutation);
    permuted variants are covered by the other two routes.  Returns None when no
    pattern applies -- absence is a value, not an error.  The mu row comes from
    the binomials; the auxiliary rows are reconstructed through the rank
    recursion, so the Euler-Poincare identities remain a genuine cross-check of
    the closed form against the recursion.
    """
    m, N = cfg.m, cfg.N
    par = cfg.parities
    tail = par[1:]

    mu: Optional[list[int]] = None
    if m >= 3 and all(b == 0 for b in tail):
        mu = [-comb(p + m - 2, m - 2) for p in range(1, N + 1)]
    elif m >= 3 and all(b == 1 for b in tail):
        mu = [m - 1] + [
            (1 if (p + 1) % 2 == 0 else -1) * comb(p + m - 2, m - 2)
            for p in range(2, N + 1)
        ]
    elif m >= 3 and m % 2 == 1 and all(par[j] == j % 2 for j in range(m)):
        ell = (m - 1) // 2
        mu = [0 if p % 2 else -comb(p // 2 + ell - 1, p // 2) for p in range(1, N + 1)]
    if mu is None:
        return None

    mu_geq, mu_geq_at = _recurrence_rows(par, N, mu)
    return IndexTable(
        config=cfg,
        mu=tuple(mu),
        mu_geq=tuple(tuple(r) for r in mu_geq),
        mu_geq_at=tuple(tuple(r) for r in mu_geq_at),
    )


def euler_poincare_check(t: IndexTable) -> bool:
    """Exact verification of both Euler-Poincare identity families.

    Family one:  mu_1 + mu_{>=1}^{inf,1} = 1   and   mu_p + mu_{>=1}^{inf,p} = 0
    for p >= 2 (sublevel sets at consecutive levels are contractible into each
    other, so the alternating count of everything at level p is that of a point
    at p = 1 and zero above).  Family two drops the rank-1 point:
    mu_p + mu_{>=2}^{inf,p} = 0 for every p.
    """
    N = t.config.N
    for p in range(1, N + 1):
        expected = 1 if p == 1 else 0
        if t.mu_of(p) + t.mu_geq_of(1, p) != expected:
            return False
        if t.mu_of(p) + t.mu_geq_of(2, p) != 0:
            return False
    return True


def _case_and_ell(cfg: ParityConfig) -> tuple[CaseLabel, Optional[int]]:
    if cfg.parities[0] != 0:
        raise ValueError("malformed configuration: parities[0] must be even")
    tail = cfg.parities[1:]
    e = sum(1 for b in tail if b == 0)
    o = sum(1 for b in tail if b == 1)
    if e == o:
        # index_K = 1 + e - o = 1; the canonical rearrangement is the
        # alternating pattern with l = e pairs.
        return "IndexOne", e
    if o == 0:
        return "Case1", None
    if e == 0:
        return "Case2", None
    if e > o:
        return "Case3", o
    return "Case4", e


def classify_case(cfg: ParityConfig) -> CaseLabel:
    """Classify a configuration after the canonical rearrangement.

    Counting evens (e) and odds (o) among positions 2..m: the pattern rearranges
    to ``(even | (odd, even) x l | homogeneous tail)``, which yields

    * ``IndexOne``  iff e == o         (then index_K == 1, l = e),
    * ``Case1``     iff o == 0         (everything even),
    * ``Case2``     iff e == 0, o >= 1 (odd tail only),
    * ``Case3``     iff e > o >= 1     (even tail after l = o pairs),
    * ``Case4``     iff o > e >= 1     (odd tail after l = e pairs).

    The five branches are exhaustive and mutually exclusive, so a configuration
    with index_K != 1 always lands in one of the four cases.
    """
    label, _ = _case_and_ell(cfg)
    if label != "IndexOne" and index_K(cfg) == 1:
        raise AssertionError("classification disagrees with index_K")  # unreachable
    return label


def solution_bounds(cfg: ParityConfig) -> SolutionBoundReport:
    """Per-level and total solution-count lower bounds for the classified case.

    Level p carries energy ``p/n * S_n`` (stored as the exact fraction p/n).
    The emitted bounds are:

    * ``IndexOne`` (m = 2l+1): level 2k bound C(k+l-1, k) for k <= floor(N/2),
      odd levels 0; total C(l + floor(N/2), l) - 1.
    * ``Case1``/``Case2``: level p bound C(p+m-2, p); total C(N+m-1, m-1) - 1.
    * ``Case3``/``Case4``: level 2p bound C(p+m-l-2, p), level 2p-1 bound
      C(p+m-l-3, p-1); no closed total, so the total is the sum of the rows.

    Every bound is cross-checked against |mu_p| from the recursion; a bound
    exceeding |mu_p| raises ConsistencyError.  Configurations with m = 1 get an
    empty report (no theorem applies) and a warning.
    """
    idx = index_K(cfg)
    table = mu_recurrence(cfg)
    if not cfg.satisfies_h3:
        warnings.warn(
            "m = 1: multiplicity theorems need m >= 2; emitting an empty bound report",
            H3Warning,
            stacklevel=2,
        )
        return SolutionBoundReport(
            config=cfg,
            index_K=idx,
            case_label=classify_case(cfg),
            ell=None,
            rows=(),
            total_bound=0,
            mu=table.mu,
            h3_satisfied=False,
            outside_theorem_dimension=cfg.n < 7,
        )

    label, ell = _case_and_ell(cfg)
    m, N = cfg.m, cfg.N

    bounds: list[int] = []
    if label == "IndexOne":
        assert ell is not None
        for p in range(1, N + 1):
            bounds.append(comb(p // 2 + ell - 1, p // 2) if p % 2 == 0 else 0)
        total = comb(ell + N // 2, ell) - 1
    elif label in ("Case1", "Case2"):
        bounds = [comb(p + m - 2, p) for p in range(1, N + 1)]
        total = comb(N + m - 1, m - 1) - 1
    else:
        assert ell is not None
        for p in range(1, N + 1):
            if p % 2 == 0:
                q = p // 2
                bounds.append(comb(q + m - ell - 2, q))
            else:
                q = (p + 1) // 2
                bounds.append(comb(q + m - ell - 3, q - 1))
        total = sum(bounds)

    rows = tuple(
        LevelBound(p=p, energy_multiple=Fraction(p, cfg.n), lower_bound=b)
        for p, b in enumerate(bounds, start=1)
    )
    for row in rows:
        if row.lower_bound > abs(table.mu_of(row.p)):
            raise ConsistencyError(
                f"level {row.p}: bound {row.lower_bound} exceeds |mu| = "
                f"{abs(table.mu_of(row.p))} for parities {cfg.parities}"
            )

    return SolutionBoundReport(
        config=cfg,
        index_K=idx,
        case_label=label,
        ell=ell,
        rows=rows,
        total_bound=total,
        mu=table.mu,
        h3_satisfied=True,
        outside_theorem_dimension=cfg.n < 7,
    )


def all_parity_patterns(m: int) -> Iterator[tuple[int, ...]]:
    """All 2^{m-1} parity tuples of length m with the leading bit fixed to 0."""
    for mask in range(1 << (m - 1)):
        yield (0,) + tuple((mask >> j) & 1 for j in range(m - 1))
