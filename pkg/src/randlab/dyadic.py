"""Exact dyadic model of ([0,1), Lebesgue) and its interval-permutation maps.

A partition level ``n`` splits [0, 1) into ``2**n`` half-open intervals
``[i * 2**-n, (i+1) * 2**-n)``, indexed ``0 .. 2**n - 1``.  Refining to a
level ``m >= n`` splits interval ``i`` into ``2**(m-n) * i .. 2**(m-n) *
(i+1) - 1``.  A measure-preserving transformation is stored as a bijection
of interval indices; each interval is mapped onto its image by translation,
so the induced point map is measure preserving and every point in interval
``i`` has exact period equal to the cycle length of ``i``.

All measures and distances are :class:`fractions.Fraction` values with
power-of-two denominators; there is no floating point in this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    LeftoverIndivisible,
    NotAperiodic,
    ParseError,
    TowerTooCoarse,
)

ZERO = Fraction(0)
ONE = Fraction(1)


def interval_bounds(level: int, index: int) -> tuple[Fraction, Fraction]:
    """Endpoints of dyadic interval ``index`` at ``level``."""
    w = Fraction(1, 2 ** level)
    return index * w, (index + 1) * w


def point_interval(level: int, omega: Fraction) -> int:
    """Index of the level-``level`` interval containing ``omega``."""
    if not 0 <= omega < 1:
        raise ValueError(f"point {omega} outside [0,1)")
    return int(omega * 2 ** level)


# ---------------------------------------------------------------------------
# Dyadic sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicSet:
    """A union of dyadic intervals at a fixed level."""

    level: int
    members: frozenset[int] = frozenset()

    def __post_init__(self):
        n = 2 ** self.level
        object.__setattr__(self, "members", frozenset(self.members))
        if any(not 0 <= i < n for i in self.members):
            raise ValueError("interval index out of range")

    @staticmethod
    def empty(level: int = 0) -> "DyadicSet":
        return DyadicSet(level, frozenset())

    @staticmethod
    def full(level: int = 0) -> "DyadicSet":
        return DyadicSet(level, frozenset(range(2 ** level)))

    @property
    def measure(self) -> Fraction:
        return Fraction(len(self.members), 2 ** self.level)

    def refine(self, level: int) -> "DyadicSet":
        if level < self.level:
            raise ValueError("refinement level must not decrease")
        k = 2 ** (level - self.level)
        return DyadicSet(
            level, frozenset(k * i + j for i in self.members for j in range(k))
        )

    def reduce(self) -> "DyadicSet":
        """Canonical form: coarsest level representing the same set."""
        level, members = self.level, set(self.members)
        while level > 0:
            paired = {i // 2 for i in members}
            if all(2 * p in members and 2 * p + 1 in members for p in paired):
                members = paired
                level -= 1
            else:
                break
        return DyadicSet(level, frozenset(members))

    def same_set(self, other: "DyadicSet") -> bool:
        m = max(self.level, other.level)
        return self.refine(m).members == other.refine(m).members

    def union(self, other: "DyadicSet") -> "DyadicSet":
        m = max(self.level, other.level)
        return DyadicSet(m, self.refine(m).members | other.refine(m).members)

    def intersection(self, other: "DyadicSet") -> "DyadicSet":
        m = max(self.level, other.level)
        return DyadicSet(m, self.refine(m).members & other.refine(m).members)

    def difference(self, other: "DyadicSet") -> "DyadicSet":
        m = max(self.level, other.level)
        return DyadicSet(m, self.refine(m).members - other.refine(m).members)

    def symmetric_difference(self, other: "DyadicSet") -> "DyadicSet":
        m = max(self.level, other.level)
        return DyadicSet(m, self.refine(m).members ^ other.refine(m).members)

    def complement(self) -> "DyadicSet":
        return DyadicSet(
            self.level, frozenset(range(2 ** self.level)) - self.members
        )

    def contains_point(self, omega: Fraction) -> bool:
        return point_interval(self.level, omega) in self.members


# ---------------------------------------------------------------------------
# Measure-preserving transformations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicMPT:
    """Measure-preserving bijection of [0,1) given by an interval permutation."""

    level: int
    perm: tuple[int, ...]

    def __post_init__(self):
        n = 2 ** self.level
        perm = tuple(self.perm)
        object.__setattr__(self, "perm", perm)
        if len(perm) != n or sorted(perm) != list(range(n)):
            raise ValueError(f"perm is not a bijection of 0..{n - 1}")

    # -- construction -----------------------------------------------------

    @staticmethod
    def identity(level: int = 0) -> "DyadicMPT":
        return DyadicMPT(level, tuple(range(2 ** level)))

    @staticmethod
    def shift(level: int, step: int = 1) -> "DyadicMPT":
        """Rotation by ``step`` intervals, a single full cycle when odd step."""
        n = 2 ** level
        return DyadicMPT(level, tuple((i + step) % n for i in range(n)))

    @staticmethod
    def from_cycles(level: int, cycles: Iterable[Sequence[int]]) -> "DyadicMPT":
        n = 2 ** level
        perm = list(range(n))
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                perm[a] = b
        return DyadicMPT(level, tuple(perm))

    # -- structure --------------------------------------------------------

    def refine(self, level: int) -> "DyadicMPT":
        """Same point map at a finer level."""
        if level < self.level:
            raise ValueError("refinement level must not decrease")
        k = 2 ** (level - self.level)
        return DyadicMPT(
            level,
            tuple(self.perm[i] * k + j for i in range(2 ** self.level) for j in range(k)),
        )

    def reduce(self) -> "DyadicMPT":
        """Canonical form: coarsest level inducing the same point map."""
        level, perm = self.level, list(self.perm)
        while level > 0:
            ok = all(
                perm[2 * i] % 2 == 0 and perm[2 * i + 1] == perm[2 * i] + 1
                for i in range(len(perm) // 2)
            )
            if not ok:
                break
            perm = [perm[2 * i] // 2 for i in range(len(perm) // 2)]
            level -= 1
        return DyadicMPT(level, tuple(perm))

    def same_map(self, other: "DyadicMPT") -> bool:
        m = max(self.level, other.level)
        return self.refine(m).perm == other.refine(m).perm

    # -- group operations ---------------------------------------------------

    def __mul__(self, other: "DyadicMPT") -> "DyadicMPT":
        """Composition of point maps: ``(self * other)(x) = self(other(x))``."""
        m = max(self.level, other.level)
        a, b = self.refine(m).perm, other.refine(m).perm
        return DyadicMPT(m, tuple(a[b[i]] for i in range(len(a))))

    def inverse(self) -> "DyadicMPT":
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return DyadicMPT(self.level, tuple(inv))

    def __pow__(self, n: int) -> "DyadicMPT":
        if n < 0:
            return self.inverse() ** (-n)
        result = [0] * len(self.perm)
        for cyc in self.cycles(include_fixed=True):
            k = len(cyc)
            for pos, i in enumerate(cyc):
                result[i] = cyc[(pos + n) % k]
        return DyadicMPT(self.level, tuple(result))

    def conj(self, by: "DyadicMPT") -> "DyadicMPT":
        """``by**-1 * self * by``."""
        return by.inverse() * self * by

    def is_identity(self) -> bool:
        return all(j == i for i, j in enumerate(self.perm))

    # -- point dynamics -----------------------------------------------------

    def apply_index(self, i: int) -> int:
        return self.perm[i]

    def apply_point(self, omega: Fraction) -> Fraction:
        i = point_interval(self.level, omega)
        return omega + Fraction(self.perm[i] - i, 2 ** self.level)

    def image(self, s: DyadicSet) -> DyadicSet:
        m = max(self.level, s.level)
        t = self.refine(m)
        return DyadicSet(m, frozenset(t.perm[i] for i in s.refine(m).members))

    def cycles(self, include_fixed: bool = False) -> list[list[int]]:
        """Cycle decomposition; each cycle starts at its least index."""
        seen = [False] * len(self.perm)
        out = []
        for start in range(len(self.perm)):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.perm[start]
            while j != start:
                seen[j] = True
                cyc.append(j)
                j = self.perm[j]
            if len(cyc) > 1 or include_fixed:
                out.append(cyc)
        return out

    def cycle_census(self) -> dict[int, int]:
        """Multiset of cycle lengths (fixed intervals count as 1-cycles)."""
        census: dict[int, int] = {}
        for cyc in self.cycles(include_fixed=True):
            census[len(cyc)] = census.get(len(cyc), 0) + 1
        return census

    def min_cycle_length(self) -> int:
        return min(len(c) for c in self.cycles(include_fixed=True))

    def is_n_aperiodic(self, n: int) -> bool:
        """All cycles have length at least ``n``."""
        return self.min_cycle_length() >= n

    def period_class(self, k: int) -> DyadicSet:
        """The set of intervals lying on cycles of length exactly ``k``."""
        members = set()
        for cyc in self.cycles(include_fixed=True):
            if len(cyc) == k:
                members.update(cyc)
        return DyadicSet(self.level, frozenset(members))


def mpt_compose(t: DyadicMPT, r: DyadicMPT) -> DyadicMPT:
    return t * r

def mpt_inverse(t: DyadicMPT) -> DyadicMPT:
    return t.inverse()

def mpt_refine(t: DyadicMPT, level: int) -> DyadicMPT:
    return t.refine(level)


def mpt_cycles(t: DyadicMPT, aperiodicity: int | None = None):
    """Cycle decomposition report.

    Returns ``(cycles, census, n_aperiodic)`` where ``census`` maps cycle
    length to count and ``n_aperiodic`` states whether every cycle has
    length at least ``aperiodicity`` (None when not asked).
    """
    cycles = t.cycles(include_fixed=True)
    census = t.cycle_census()
    flag = None if aperiodicity is None else t.min_cycle_length() >= aperiodicity
    return cycles, census, flag


# ---------------------------------------------------------------------------
# Metrics on the transformation group
# ---------------------------------------------------------------------------

def delta_u(t: DyadicMPT, r: DyadicMPT) -> Fraction:
    """Uniform distance: measure of the set where the point maps differ."""
    m = max(t.level, r.level)
    a, b = t.refine(m).perm, r.refine(m).perm
    differ = sum(1 for i in range(len(a)) if a[i] != b[i])
    return Fraction(differ, 2 ** m)


def dyadic_interval_enumeration(level: int):
    """Canonical enumeration of dyadic intervals of level 0 .. ``level``."""
    for lev in range(level + 1):
        for idx in range(2 ** lev):
            yield DyadicSet(lev, frozenset([idx]))


def delta_w(t: DyadicMPT, r: DyadicMPT) -> Fraction:
    """Weak-topology distance: weighted set displacements.

    Sums ``2**-(m+1) * mu(t(B_m) ^ r(B_m))`` over the canonical enumeration
    of dyadic intervals up to the common level.  Dominated by
    :func:`delta_u` termwise, hence ``delta_w <= delta_u`` exactly.
    """
    m = max(t.level, r.level)
    tt, rr = t.refine(m), r.refine(m)
    total = ZERO
    for k, box in enumerate(dyadic_interval_enumeration(m)):
        diff = tt.image(box).symmetric_difference(rr.image(box)).measure
        total += Fraction(1, 2 ** (k + 1)) * diff
    return total


def delta_u_prime(t: DyadicMPT, r: DyadicMPT) -> Fraction:
    """Supremum of ``mu(t(A) ^ r(A))`` over measurable ``A``, exactly.

    With ``tau = r**-1 * t``, choosing half of each tau-cycle (alternating)
    is optimal, which gives ``2 * sum(floor(k/2))`` displaced intervals over
    nontrivial tau-cycles.  Refinement splits each cycle into copies of the
    same length, so the level-n value already equals the measurable sup.
    """
    m = max(t.level, r.level)
    tau = r.refine(m).inverse() * t.refine(m)
    count = sum(2 * (len(c) // 2) for c in tau.cycles())
    return Fraction(count, 2 ** m)


def delta_u_prime_bruteforce(t: DyadicMPT, r: DyadicMPT) -> Fraction:
    """Independent oracle for :func:`delta_u_prime` by subset enumeration."""
    m = max(t.level, r.level)
    a, b = t.refine(m), r.refine(m)
    n = 2 ** m
    best = 0
    for bits in range(2 ** n):
        s = frozenset(i for i in range(n) if bits >> i & 1)
        ia = frozenset(a.perm[i] for i in s)
        ib = frozenset(b.perm[i] for i in s)
        best = max(best, len(ia ^ ib))
    return Fraction(best, 2 ** m)


# ---------------------------------------------------------------------------
# Towers and periodic approximation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TowerData:
    """A tower for a transformation: base, translated levels, leftover.

    ``periodic_map`` follows the transformation below the top level of each
    column, sends column tops back to their bases, and permutes the leftover
    in index-order groups of ``height``.  When the leftover count is not a
    multiple of the height the remainder is left fixed and
    ``periodic_exact`` is False (the map still has period dividing
    ``height`` everywhere it was regrouped).
    """

    base: DyadicSet
    height: int
    levels: tuple[DyadicSet, ...]
    leftover: DyadicSet
    periodic_map: DyadicMPT
    periodic_exact: bool
    requested_bound: Fraction

    @property
    def level(self) -> int:
        return self.base.level

    def covered(self) -> DyadicSet:
        out = DyadicSet.empty(self.level)
        for lv in self.levels:
            out = out.union(lv)
        return out

    def column_bases(self) -> list[int]:
        return sorted(self.base.members)

    def validate(self, t: DyadicMPT) -> None:
        """Enumeration checks of every tower postcondition; raises on failure."""
        n = 2 ** self.level
        tt = t.refine(self.level)
        assert len(self.levels) == self.height
        # levels are successive images of the base
        current = self.base
        for lv in self.levels:
            assert lv.members == current.members, "levels must be T^k(base)"
            current = tt.image(current)
        # pairwise disjoint, and together with leftover partition [0,1)
        union: set[int] = set()
        for lv in self.levels:
            assert not (union & lv.members), "tower levels overlap"
            union |= lv.members
        assert not (union & self.leftover.members), "leftover meets the tower"
        assert len(union) + len(self.leftover.members) == n, "coverage gap"
        assert self.leftover.measure <= self.requested_bound
        # periodic map invariants
        s0 = self.periodic_map
        if self.periodic_exact:
            assert all(len(c) == self.height for c in s0.cycles(include_fixed=True))
        bound = self.requested_bound + Fraction(1, self.height)
        assert delta_u(t, s0) <= bound, "periodic approximation too far"


def rokhlin_tower(t: DyadicMPT, height: int, bound: Fraction) -> TowerData:
    """Build a tower of the given height with leftover measure <= ``bound``.

    The base marks every ``height``-th interval along each cycle, stopping
    before wraparound, so a cycle of length L contributes ``L mod height``
    leftover intervals.  Raises :class:`NotAperiodic` when some cycle is
    shorter than ``height`` and :class:`TowerTooCoarse` when the achievable
    leftover exceeds ``bound``.
    """
    if height < 1:
        raise ValueError("height must be positive")
    bound = Fraction(bound)
    cycles = t.cycles(include_fixed=True)
    short = [c for c in cycles if len(c) < height]
    if short:
        raise NotAperiodic(
            f"cycle of length {len(short[0])} < height {height} at interval {short[0][0]}"
        )
    n = 2 ** t.level
    base: set[int] = set()
    leftover: set[int] = set()
    perm0 = list(range(n))
    for cyc in cycles:
        full = (len(cyc) // height) * height
        for start in range(0, full, height):
            base.add(cyc[start])
            segment = cyc[start:start + height]
            for a, b in zip(segment, segment[1:]):
                perm0[a] = b
            perm0[segment[-1]] = segment[0]
        leftover.update(cyc[full:])
    leftover_measure = Fraction(len(leftover), n)
    if leftover_measure > bound:
        raise TowerTooCoarse(
            f"achievable leftover {leftover_measure} exceeds bound {bound}"
        )
    # group the leftover into height-cycles in index order
    rest = sorted(leftover)
    exact = len(rest) % height == 0
    for k in range(0, len(rest) - height + 1, height):
        block = rest[k:k + height]
        for a, b in zip(block, block[1:]):
            perm0[a] = b
        perm0[block[-1]] = block[0]
    s0 = DyadicMPT(t.level, tuple(perm0))
    base_set = DyadicSet(t.level, frozenset(base))
    levels = [base_set]
    for _ in range(height - 1):
        levels.append(t.image(levels[-1]))
    tower = TowerData(
        base=base_set,
        height=height,
        levels=tuple(levels),
        leftover=DyadicSet(t.level, frozenset(leftover)),
        periodic_map=s0,
        periodic_exact=exact,
        requested_bound=bound,
    )
    tower.validate(t)
    return tower


@dataclass(frozen=True)
class PeriodicApproximation:
    """Exact period-``height`` approximation with its full-coverage tower."""

    s0: DyadicMPT
    height: int
    tower: TowerData          # tower for the original map
    exact_tower: TowerData    # tower for s0 with empty leftover
    distance: Fraction        # delta_u(original, s0)


def periodic_approximation(
    t: DyadicMPT, height: int, bound: Fraction
) -> PeriodicApproximation:
    """Approximate ``t`` by a map whose cycles all have length ``height``.

    The approximation follows ``t`` except on column tops (sent back to
    their bases) and on the leftover (regrouped in index order), with
    ``delta_u(t, s0) <= bound + 1/height`` checked exactly.  An extended
    base gives a tower for ``s0`` covering all of [0,1).

    Only heights dividing the interval count admit exact period maps: the
    leftover count is congruent to ``2**level`` mod ``height``, so a height
    with an odd factor can never be regrouped exactly at any refinement.
    Raises :class:`LeftoverIndivisible` in that case.
    """
    if height < 1:
        raise ValueError("height must be positive")
    if height & (height - 1):
        raise LeftoverIndivisible(
            f"height {height} has an odd factor; dyadic resolution only "
            "hosts exact period maps for powers of two"
        )
    level = max(t.level, height.bit_length() - 1)
    tt = t.refine(level)
    tower = rokhlin_tower(tt, height, bound)
    assert tower.periodic_exact  # count is 2**level mod height == 0
    s0 = tower.periodic_map
    # extend the base to one interval per s0-cycle: original bases plus the
    # first interval of each regrouped leftover block
    extended = set(tower.base.members)
    rest = sorted(tower.leftover.members)
    for k in range(0, len(rest), height):
        extended.add(rest[k])
    e0 = DyadicSet(level, frozenset(extended))
    levels = [e0]
    for _ in range(height - 1):
        levels.append(s0.image(levels[-1]))
    exact_tower = TowerData(
        base=e0,
        height=height,
        levels=tuple(levels),
        leftover=DyadicSet(level, frozenset()),
        periodic_map=s0,
        periodic_exact=True,
        requested_bound=ZERO,
    )
    exact_tower.validate(s0)
    dist = delta_u(tt, s0)
    assert dist <= Fraction(bound) + Fraction(1, height)
    return PeriodicApproximation(
        s0=s0, height=height, tower=tower, exact_tower=exact_tower, distance=dist
    )


# ---------------------------------------------------------------------------
# Approximate conjugacy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugacyMatch:
    """Conjugator ``r`` with its exactly reported distance."""

    r: DyadicMPT
    achieved: Fraction
    height: int


def _exact_conjugator(t0: DyadicMPT, s0: DyadicMPT) -> DyadicMPT:
    """Permutation r with ``r**-1 * t0 * r == s0`` for equal cycle types."""
    tc = sorted(t0.cycles(include_fixed=True), key=lambda c: (len(c), c[0]))
    sc = sorted(s0.cycles(include_fixed=True), key=lambda c: (len(c), c[0]))
    n = len(t0.perm)
    r = [0] * n
    for ct, cs in zip(tc, sc):
        assert len(ct) == len(cs)
        for a, b in zip(cs, ct):
            r[a] = b
    return DyadicMPT(t0.level, tuple(r))


def mpt_conjugate_match(
    t: DyadicMPT, s: DyadicMPT, eps: Fraction, height: int | None = None
) -> ConjugacyMatch:
    """Find ``r`` with ``delta_u(r**-1 * t * r, s) < eps``.

    Equal cycle types are exactly conjugate (height 0 in the report);
    otherwise the exact period-``N`` approximations of both maps are
    matched cycle by cycle, trying the feasible power-of-two heights
    largest first until the bound is met.  The achieved distance is
    reported exactly.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = max(t.level, s.level)
    t, s = t.refine(m), s.refine(m)
    if t.cycle_census() == s.cycle_census():
        r = _exact_conjugator(t, s)
        achieved = delta_u(t.conj(r), s)
        assert achieved == 0
        return ConjugacyMatch(r=r, achieved=achieved, height=0)
    max_n = min(t.min_cycle_length(), s.min_cycle_length(), 2 ** m)
    heights: list[int]
    if height is not None:
        heights = [height]
    else:
        heights = []
        n = 1
        while 2 * n <= max_n:
            n *= 2
        while n >= 2:
            heights.append(n)
            n //= 2
    if not heights:
        raise NotAperiodic(
            "maps with fixed intervals and differing cycle types cannot be "
            "matched; need all cycles of length >= 2"
        )
    best: ConjugacyMatch | None = None
    for n in heights:
        pa_t = periodic_approximation(t, n, ONE)
        pa_s = periodic_approximation(s, n, ONE)
        r = _exact_conjugator(pa_t.s0, pa_s.s0)
        achieved = delta_u(t.conj(r), s)
        if best is None or achieved < best.achieved:
            best = ConjugacyMatch(r=r, achieved=achieved, height=n)
        if achieved < eps:
            return best
    raise TowerTooCoarse(
        f"best achievable distance {best.achieved} not below {eps}"
    )


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------

def format_mpt(t: DyadicMPT) -> str:
    return "mpt {} {}".format(t.level, " ".join(str(i) for i in t.perm))


def parse_mpt(text: str) -> DyadicMPT:
    parts = text.split()
    if len(parts) < 2 or parts[0] != "mpt":
        raise ParseError(f"expected 'mpt <level> <images>', got {text!r}")
    try:
        level = int(parts[1])
        perm = tuple(int(p) for p in parts[2:])
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if sorted(perm) != list(range(2 ** level)):
        raise ParseError("images do not form a bijection")
    return DyadicMPT(level, perm)


def format_set(s: DyadicSet) -> str:
    return "set {} {}".format(s.level, " ".join(str(i) for i in sorted(s.members)))


def parse_set(text: str) -> DyadicSet:
    parts = text.split()
    if len(parts) < 2 or parts[0] != "set":
        raise ParseError(f"expected 'set <level> <indices>', got {text!r}")
    try:
        level = int(parts[1])
        members = frozenset(int(p) for p in parts[2:])
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    if any(not 0 <= i < 2 ** level for i in members):
        raise ParseError("interval index out of range")
    return DyadicSet(level, members)
