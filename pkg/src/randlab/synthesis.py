"""Constructive conjugator synthesis over towers.

Given a generic base-group element ``sigma``, an aperiodic interval map
``S`` and a simple target function ``h``, the engine builds a group-valued
step function ``g`` so that conjugating the constant pair ``(C_sigma, S)``
lands in the prescribed neighborhood: the step condition

    g(y) h(y) (n) = sigma g(S0**-1 y) (n)

holds at every tower interval ``y`` for every constrained point ``n``,
where ``S0`` is the exact periodic approximation of ``S``.  Composing the
step condition around a full column telescopes into the loop condition

    gamma**-1 sigma**N gamma (n) = h(S0**(N-1) x) ... h(S0 x) h(x) (n)

at the column anchor ``gamma``, which is exactly what the window-matching
oracle provides.  Every certificate below is obtained by direct evaluation
of these identities, never trusted from the construction.

Anchoring detail: solving the column downward from its top level makes the
step condition an exact group identity on all upper levels and leaves only
the wraparound at the base, which the loop matching closes on the
constrained points; the metric-group variant anchors at the base with the
cyclically reversed column product, which is the form a right-invariant
metric can verify.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Mapping, Sequence

from .dyadic import (
    DyadicMPT,
    TowerData,
    delta_u,
    mpt_conjugate_match,
    periodic_approximation,
)
from .errors import (
    InsufficientCycles,
    MismatchedSpace,
    NotExactTower,
    OracleFailure,
    RandlabError,
    SimultaneousMatchUnsupported,
)
from .groups import E, WindowPerm, cycle_pack, match_partial
from .stepfn import StepFn
from .tilde import (
    ProductNbhd,
    TildeElement,
    lu_bounds,
    lu_exact_discrete,
    tilde_identity,
)

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# Column products
# ---------------------------------------------------------------------------

def column_intervals(s0: DyadicMPT, base: int, height: int) -> list[int]:
    """Interval indices ``base, s0(base), ..., s0**(height-1)(base)``."""
    out = [base]
    for _ in range(height - 1):
        out.append(s0.perm[out[-1]])
    return out


def tower_product(h: StepFn, s0: DyadicMPT, tower: TowerData, x: int):
    """Ordered product of ``h`` up the column through base interval ``x``:
    ``h(s0**(N-1) x) * ... * h(s0 x) * h(x)``, rightmost applied first."""
    if tower.leftover.members:
        raise NotExactTower("tower_product needs a full-coverage tower")
    level = max(h.level, s0.level)
    hh, ss = h.refine(level), s0.refine(level)
    scale = 2 ** (level - tower.level)
    column = column_intervals(ss, x * scale, tower.height)
    values = [hh.values[i] for i in column]
    return reduce(lambda acc, v: v * acc, values[1:], values[0])


def _column_product(values: Sequence):
    """``values[-1] * ... * values[1] * values[0]``."""
    return reduce(lambda acc, v: v * acc, values[1:], values[0])


# ---------------------------------------------------------------------------
# Window-case synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthesisTask:
    """Inputs for conjugator synthesis against a window agreement target."""

    sigma: WindowPerm | None   # None: size a budget automatically
    s: DyadicMPT
    h: StepFn
    k: int                     # agreement window: points 0..k-1
    eps: Fraction
    height: int | None = None  # tower height; default: smallest usable power of two

    def resolved_height(self) -> int:
        if self.height is not None:
            return self.height
        n = 2
        while Fraction(2, n) >= Fraction(self.eps):
            n *= 2
        return n


@dataclass(frozen=True)
class SynthesisResult:
    """Synthesized conjugating function with its exact certificates."""

    g: StepFn
    s0: DyadicMPT
    tower: TowerData
    agreement: Fraction
    certificates: tuple
    sigma: WindowPerm
    height: int

    def all_ok(self) -> bool:
        return all(row[-1] for row in self.certificates)


def format_synthesis_task(task: SynthesisTask) -> str:
    from .groups import format_cycles
    from .dyadic import format_mpt
    from .stepfn import format_step

    lines = ["synthesis {"]
    lines.append(
        "  sigma " + ("auto" if task.sigma is None else format_cycles(task.sigma))
    )
    lines.append(f"  s {format_mpt(task.s)}")
    lines.append(f"  h {format_step(task.h)}")
    lines.append(f"  k {task.k}")
    eps = Fraction(task.eps)
    lines.append(f"  eps {eps.numerator}/{eps.denominator}")
    if task.height is not None:
        lines.append(f"  height {task.height}")
    lines.append("}")
    return "\n".join(lines)


def parse_synthesis_task(text: str) -> SynthesisTask:
    from .errors import ParseError
    from .groups import parse_cycles
    from .dyadic import parse_mpt
    from .stepfn import parse_step

    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or lines[0] != "synthesis {" or lines[-1] != "}":
        raise ParseError("expected a 'synthesis { ... }' block")
    fields: dict[str, str] = {}
    for ln in lines[1:-1]:
        if not ln:
            continue
        key, _, value = ln.partition(" ")
        fields[key] = value.strip()
    try:
        sigma = None if fields["sigma"] == "auto" else parse_cycles(fields["sigma"])
        return SynthesisTask(
            sigma=sigma,
            s=parse_mpt(fields["s"]),
            h=parse_step(fields["h"]),
            k=int(fields["k"]),
            eps=Fraction(fields["eps"]),
            height=int(fields["height"]) if "height" in fields else None,
        )
    except KeyError as exc:
        raise ParseError(f"synthesis block missing field {exc}") from None


def format_synthesis_result(result: SynthesisResult) -> str:
    ok = sum(1 for row in result.certificates if row[-1])
    lines = [
        "synthesis-result {",
        f"  level {result.g.level}",
        f"  height {result.height}",
        f"  columns {len(result.tower.base.members)}",
        "  agreement "
        f"{result.agreement.numerator}/{result.agreement.denominator}",
        f"  certificates {ok}/{len(result.certificates)}",
        "}",
    ]
    return "\n".join(lines)


def sigma_budget(k: int, height: int) -> WindowPerm:
    """Lean generic budget for window-``k`` targets over ``height`` towers.

    The loop targets decompose into at most k components of size at most
    k+1, so the height-th power must offer k spare cycles of every length
    up to k+2; cycles of length ``height * j`` provide ``height`` cycles of
    length ``j`` each.
    """
    copies = -(-k // height)  # ceil
    return cycle_pack({height * j: copies for j in range(1, k + 3)})


def _solve_column_window(
    sigma: WindowPerm,
    h_values: Sequence[WindowPerm],
    domain: Sequence[int],
    fresh_start: int | None = None,
) -> list[WindowPerm]:
    """Solve one column: anchor at the top, extend downward exactly.

    Returns group values ``g_0 .. g_(L-1)`` along the column such that the
    step condition holds for all points at positions 1..L-1 and on
    ``domain`` at the wraparound position 0.
    """
    length = len(h_values)
    loop_target = _column_product(h_values)
    target = {n: loop_target(n) for n in domain}
    gamma = match_partial(sigma, length, target, fresh_start=fresh_start)
    gs: list[WindowPerm | None] = [None] * length
    gs[length - 1] = gamma
    sigma_inv = sigma.inverse()
    for i in range(length - 1, 0, -1):
        gs[i - 1] = sigma_inv * gs[i] * h_values[i]
    return gs  # type: ignore[return-value]


def synthesize_conjugator(task: SynthesisTask) -> SynthesisResult:
    """Build ``g`` realizing the step condition over an exact tower.

    The loop target of each column is matched into ``sigma**height`` by the
    spare-cycle embedding; when ``task.sigma`` is None a lean budget is
    sized automatically and doubled on shortfall (three growths at most).
    The returned agreement measure is the exact mass of intervals where the
    step condition holds against the original map ``S`` for every point
    below the window.
    """
    height = task.resolved_height()
    eps = Fraction(task.eps)
    leftover_budget = max(ZERO, eps - Fraction(1, height))
    pa = periodic_approximation(task.s, height, leftover_budget)
    s0, tower = pa.s0, pa.exact_tower
    level = max(tower.level, task.h.level)
    if level > tower.level:
        pa = periodic_approximation(task.s.refine(level), height, leftover_budget)
        s0, tower = pa.s0, pa.exact_tower
    h = task.h.refine(level)
    domain = range(task.k)

    if task.sigma is not None:
        sigmas = [task.sigma]
    else:
        base_copies = -(-task.k // height)
        sigmas = [
            cycle_pack({height * j: base_copies << g for j in range(1, task.k + 3)})
            for g in range(4)
        ]

    last_error: InsufficientCycles | None = None
    for sigma in sigmas:
        try:
            return _synthesize_with_sigma(sigma, s0, tower, h, task, domain, height)
        except InsufficientCycles as exc:
            last_error = exc
    raise last_error  # type: ignore[misc]


def _synthesize_with_sigma(
    sigma: WindowPerm,
    s0: DyadicMPT,
    tower: TowerData,
    h: StepFn,
    task: SynthesisTask,
    domain: Sequence[int],
    height: int,
) -> SynthesisResult:
    level = s0.level
    n_intervals = 2 ** level
    sigma_power = sigma ** height
    g_values: list[WindowPerm | None] = [None] * n_intervals
    columns = []
    for base in sorted(tower.base.members):
        column = column_intervals(s0, base, height)
        columns.append((base, column))
        h_vals = [h.values[i] for i in column]
        gs = _solve_column_window(sigma, h_vals, domain)
        for idx, g_val in zip(column, gs):
            g_values[idx] = g_val
    assert all(v is not None for v in g_values)
    g = StepFn(level, tuple(g_values))

    # certificates by direct evaluation: the step condition at every tower
    # interval, then the loop condition at every column anchor
    s0_inv = s0.inverse()
    certificates = []
    for base, column in columns:
        for pos, y in enumerate(column):
            prev = s0_inv.perm[y]
            for n in domain:
                lhs = g.values[y](h.values[y](n))
                rhs = sigma(g.values[prev](n))
                certificates.append(("step", base, pos, n, lhs, rhs, lhs == rhs))
        anchor = g.values[column[-1]]
        loop_target = _column_product([h.values[i] for i in column])
        conj = anchor.inverse() * sigma_power * anchor
        for n in domain:
            lhs_l, rhs_l = conj(n), loop_target(n)
            certificates.append(("loop", base, height - 1, n, lhs_l, rhs_l, lhs_l == rhs_l))

    # exact agreement against the original map
    s = task.s.refine(level)
    s_inv = s.inverse()
    agree = 0
    for y in range(n_intervals):
        prev = s_inv.perm[y]
        ok = all(
            g.values[y](h.values[y](n)) == sigma(g.values[prev](n))
            for n in domain
        )
        agree += ok
    agreement = Fraction(agree, n_intervals)
    return SynthesisResult(
        g=g,
        s0=s0,
        tower=tower,
        agreement=agreement,
        certificates=tuple(certificates),
        sigma=sigma,
        height=height,
    )


# ---------------------------------------------------------------------------
# Metric-group synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSynthesisTask:
    """Synthesis against a right-invariant metric tolerance."""

    sigma: object            # base group element
    s: DyadicMPT
    h: StepFn                # values in the base group
    eps_g: Fraction          # per-point metric tolerance
    eps: Fraction            # tower mass tolerance
    height: int | None = None

    def resolved_height(self) -> int:
        if self.height is not None:
            return self.height
        n = 2
        while Fraction(2, n) >= Fraction(self.eps):
            n *= 2
        return n


@dataclass(frozen=True)
class MetricSynthesisResult:
    g: StepFn
    s0: DyadicMPT
    tower: TowerData
    agreement: Fraction
    certificates: tuple      # ("deviation", column, pos, value, ok)
    height: int

    def all_ok(self) -> bool:
        return all(row[-1] for row in self.certificates)

    def max_deviation(self) -> Fraction:
        return max((row[3] for row in self.certificates), default=ZERO)


def mpt_power_oracle(sigma: DyadicMPT):
    """Power-matching oracle for the interval-map base group.

    Conjugates of ``sigma**N`` are exactly the maps of its cycle type; the
    oracle morphs the target into that type (merging stray cycles into one
    and resplitting, each redirection moving one interval image) and
    conjugates exactly onto the morph.  Fails when the morph distance
    exceeds the tolerance.
    """

    def oracle(n: int, target: DyadicMPT, eps_g: Fraction) -> DyadicMPT:
        power = sigma ** n
        level = max(power.level, target.level)
        power_l, target_l = power.refine(level), target.refine(level)
        census = Counter(power_l.cycle_census())
        q, cost = nearest_of_cycle_type(target_l, census)
        if cost > eps_g:
            raise OracleFailure(
                f"nearest map of the required cycle type is {cost} away "
                f"(> {eps_g})",
                component="base-group",
            )
        rho = _exact_mpt_conjugator(power_l, q)
        assert power_l.conj(rho).perm == q.perm
        return rho

    return oracle


def _exact_mpt_conjugator(t0: DyadicMPT, s0: DyadicMPT) -> DyadicMPT:
    tc = sorted(t0.cycles(include_fixed=True), key=lambda c: (len(c), c[0]))
    sc = sorted(s0.cycles(include_fixed=True), key=lambda c: (len(c), c[0]))
    r = [0] * len(t0.perm)
    for ct, cs in zip(tc, sc):
        for a, b in zip(cs, ct):
            r[a] = b
    return DyadicMPT(t0.level, tuple(r))


def nearest_of_cycle_type(
    t: DyadicMPT, census: Mapping[int, int]
) -> tuple[DyadicMPT, Fraction]:
    """A map of the given cycle type at minimal-surgery distance from ``t``.

    Cycles of ``t`` whose length the census still needs are kept verbatim;
    the rest are chained into a single cycle (one image redirection per
    chained cycle) and resplit into the missing lengths (one redirection
    per part).  The exact displacement is returned alongside.
    """
    need = Counter({k: v for k, v in census.items() if v > 0})
    if sum(k * v for k, v in need.items()) != 2 ** t.level:
        raise ValueError("census does not cover the space")
    keep_rest: list[list[int]] = []
    for cyc in t.cycles(include_fixed=True):
        if need[len(cyc)] > 0:
            need[len(cyc)] -= 1
        else:
            keep_rest.append(cyc)
    missing = sorted(need.elements())
    perm = list(t.perm)
    if keep_rest or missing:
        merged: list[int] = []
        for cyc in keep_rest:
            merged.extend(cyc)
        # chain the stray cycles into one loop, then cut it into the
        # missing lengths; only chunk ends get new images
        pos = 0
        for length in missing:
            chunk = merged[pos:pos + length]
            for a, b in zip(chunk, chunk[1:]):
                perm[a] = b
            perm[chunk[-1]] = chunk[0]
            pos += length
        assert pos == len(merged)
    q = DyadicMPT(t.level, tuple(perm))
    assert Counter(q.cycle_census()) == Counter(census)
    return q, delta_u(t, q)


def synthesize_conjugator_metric(
    task: MetricSynthesisTask,
    oracle: Callable | None = None,
    metric: Callable | None = None,
) -> MetricSynthesisResult:
    """Metric-group synthesis: base-anchored, extended upward exactly.

    The oracle must return ``rho`` with ``d(rho**-1 sigma**N rho, t) <=
    eps_g`` for the cyclically reversed column product ``t = h(x)
    h(S0**(N-1) x) ... h(S0 x)``; right-invariance then gives the same
    deviation for the wraparound step, while the upper levels are exact by
    construction.  Every deviation is recomputed and certified.
    """
    height = task.resolved_height()
    eps = Fraction(task.eps)
    eps_g = Fraction(task.eps_g)
    if oracle is None or metric is None:
        if not isinstance(task.sigma, DyadicMPT):
            raise OracleFailure(
                "no default oracle for this base group; pass oracle= and metric=",
                component="base-group",
            )
        oracle = oracle or mpt_power_oracle(task.sigma)
        metric = metric or delta_u
    leftover_budget = max(ZERO, eps - Fraction(1, height))
    pa = periodic_approximation(task.s, height, leftover_budget)
    s0, tower = pa.s0, pa.exact_tower
    level = max(tower.level, task.h.level)
    if level > tower.level:
        pa = periodic_approximation(task.s.refine(level), height, leftover_budget)
        s0, tower = pa.s0, pa.exact_tower
    h = task.h.refine(level)
    sigma = task.sigma

    n_intervals = 2 ** level
    g_values: list = [None] * n_intervals
    columns = []
    for base in sorted(tower.base.members):
        column = column_intervals(s0, base, height)
        columns.append((base, column))
        h_vals = [h.values[i] for i in column]
        # reversed loop product: h(x) first in writing order, h(S0 x)
        # applied first
        reverse_target = (
            h_vals[0] * _column_product(h_vals[1:]) if height > 1 else h_vals[0]
        )
        rho = oracle(height, reverse_target, eps_g)
        gs = [rho]
        for i in range(1, height):
            gs.append(sigma * gs[-1] * h_vals[i].inverse())
        for idx, g_val in zip(column, gs):
            g_values[idx] = g_val
    assert all(v is not None for v in g_values)
    g = StepFn(level, tuple(g_values))

    s0_inv = s0.inverse()
    certificates = []
    for base, column in columns:
        for pos, y in enumerate(column):
            prev = s0_inv.perm[y]
            dev = metric(
                g.values[y].inverse() * sigma * g.values[prev], h.values[y]
            )
            certificates.append(("deviation", base, pos, dev, dev <= eps_g))

    s = task.s.refine(level)
    s_inv = s.inverse()
    agree = 0
    for y in range(n_intervals):
        prev = s_inv.perm[y]
        dev = metric(g.values[y].inverse() * sigma * g.values[prev], h.values[y])
        agree += dev <= eps_g
    agreement = Fraction(agree, n_intervals)
    return MetricSynthesisResult(
        g=g,
        s0=s0,
        tower=tower,
        agreement=agreement,
        certificates=tuple(certificates),
        height=height,
    )


# ---------------------------------------------------------------------------
# Density constructions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugationOutcome:
    conjugator: TildeElement
    conjugated: TildeElement
    member: bool
    fiber_residuals: tuple
    aut_residuals: tuple


def conjugate_into_neighborhood(
    g_base: WindowPerm,
    t_generic: DyadicMPT,
    target: ProductNbhd,
    fresh_start: int | None = None,
) -> ConjugationOutcome:
    """Move ``(C_g, T)`` into a product-form neighborhood by conjugation.

    Two steps: an interval-map conjugator ``Q`` matches the transformation
    factor (the constant fiber is blind to it), then a fiber ``k`` solves
    the step condition along each cycle of the conjugated map so the
    conjugated fiber agrees with the target's fiber center at every marked
    point.  Membership is checked exactly on the result.
    """
    source = TildeElement(
        StepFn.constant(g_base, 0), t_generic
    )
    # transformation factor
    if target.set_conditions:
        eps_aut = min(b for _, b in target.set_conditions) / 2
        try:
            match = mpt_conjugate_match(t_generic, target.center_t, eps_aut)
        except RandlabError as exc:
            raise OracleFailure(
                f"transformation factor: {exc}", component="aut"
            ) from exc
        q = match.r
    else:
        q = DyadicMPT.identity(t_generic.level)
    r_prime = t_generic.conj(q)
    # fiber factor
    level = max(r_prime.level, target.center_f.level)
    r_fine = r_prime.refine(level)
    center_f = target.center_f.refine(level)
    marked = [p for p, _ in target.value_conditions]
    if marked:
        k_values: list = [None] * 2 ** level
        for cyc in r_fine.cycles(include_fixed=True):
            h_vals = [center_f.values[i] for i in cyc]
            try:
                gs = _solve_column_window(
                    g_base, h_vals, marked, fresh_start=fresh_start
                )
            except InsufficientCycles as exc:
                raise OracleFailure(
                    f"fiber factor: {exc}", component="fiber"
                ) from exc
            for idx, g_val in zip(cyc, gs):
                k_values[idx] = g_val
        k_fn = StepFn(level, tuple(k_values))
    else:
        k_fn = StepFn.constant(E, level)
    conjugator = TildeElement(StepFn.constant(E, q.level), q) * TildeElement(
        k_fn, DyadicMPT.identity(level)
    )
    conjugated = source.conj(conjugator)
    return ConjugationOutcome(
        conjugator=conjugator,
        conjugated=conjugated,
        member=target.contains(conjugated),
        fiber_residuals=tuple(target.fiber_residuals(conjugated.f)),
        aut_residuals=tuple(target.aut_residuals(conjugated.t)),
    )


@dataclass(frozen=True)
class ConstantConjugationOutcome:
    conjugator: TildeElement   # (C_e, R)
    conjugated: TildeElement   # (C_h, R**-1 T R)
    lu_value: Fraction         # exact value or certified upper bound
    certified: bool


def approx_conjugate_constant(
    h, t: DyadicMPT, s: DyadicMPT, eps: Fraction
) -> ConstantConjugationOutcome:
    """Conjugate ``(C_h, T)`` within uniform distance ``eps`` of ``(C_h, S)``.

    The conjugator is ``(C_e, R)`` with ``R`` from the interval matcher; a
    constant fiber is untouched by it, so the uniform distance reduces to
    the displacement of the conjugated transformation, certified exactly
    (discrete fibers) or through the sandwich upper bound.
    """
    eps = Fraction(eps)
    match = mpt_conjugate_match(t, s, eps)
    r = match.r
    level = max(r.level, t.level, s.level)
    conjugator = TildeElement(StepFn.constant(_identity_of(h), level), r)
    conjugated = TildeElement(StepFn.constant(h, level), t.conj(r))
    reference = TildeElement(StepFn.constant(h, level), s.refine(level))
    if isinstance(h, WindowPerm):
        value = lu_exact_discrete(conjugated, reference)
    else:
        value = lu_bounds(conjugated, reference).upper
    return ConstantConjugationOutcome(
        conjugator=conjugator,
        conjugated=conjugated,
        lu_value=value,
        certified=value < eps,
    )


def _identity_of(value):
    if isinstance(value, WindowPerm):
        return E
    from .spaces import SpaceIsometry, space_identity

    if isinstance(value, SpaceIsometry):
        return space_identity(value.space)
    raise MismatchedSpace(f"no identity for {type(value).__name__}")


# ---------------------------------------------------------------------------
# Diagonal (simultaneous) conjugation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalReport:
    success: bool
    conjugator: TildeElement | None
    per_coordinate: tuple  # (member, fiber_residuals, aut_residuals)
    note: str = ""


def _window_footprint(g: WindowPerm, center_f: StepFn, marked) -> set[int]:
    pts: set[int] = set(g.support())
    for v in center_f.values:
        pts |= set(v.support())
    pts |= set(marked)
    return pts


def diagonal_experiment(
    sources: Sequence[TildeElement],
    targets: Sequence[ProductNbhd],
) -> DiagonalReport:
    """One conjugator moving every coordinate into its target.

    Supported cases: a single coordinate; targets already containing the
    sources; constant window-permutation fibers over a shared
    transformation with pairwise disjoint window footprints.  Anything else
    raises :class:`SimultaneousMatchUnsupported`, reporting honestly rather
    than guessing.
    """
    if len(sources) != len(targets):
        raise ValueError("need one target per source")
    if not sources:
        raise ValueError("empty tuple")

    def evaluate(conjugator: TildeElement) -> DiagonalReport:
        per = []
        ok = True
        for src, tgt in zip(sources, targets):
            moved = src.conj(conjugator)
            member = tgt.contains(moved)
            ok = ok and member
            per.append(
                (
                    member,
                    tuple(tgt.fiber_residuals(moved.f)),
                    tuple(tgt.aut_residuals(moved.t)),
                )
            )
        return DiagonalReport(
            success=ok, conjugator=conjugator, per_coordinate=tuple(per)
        )

    level = max(max(s.f.level, s.t.level) for s in sources)
    identity = tilde_identity(_identity_of(sources[0].f.values[0]), level)
    trivial = evaluate(identity)
    if trivial.success:
        return DiagonalReport(
            success=True,
            conjugator=identity,
            per_coordinate=trivial.per_coordinate,
            note="targets already contain the sources",
        )

    if len(sources) == 1:
        src, tgt = sources[0], targets[0]
        fiber = src.f
        if len(set(fiber.values)) != 1 or not isinstance(fiber.values[0], WindowPerm):
            raise SimultaneousMatchUnsupported(
                "single-coordinate case needs a constant window-permutation fiber"
            )
        outcome = conjugate_into_neighborhood(fiber.values[0], src.t, tgt)
        return DiagonalReport(
            success=outcome.member,
            conjugator=outcome.conjugator,
            per_coordinate=(
                (outcome.member, outcome.fiber_residuals, outcome.aut_residuals),
            ),
            note="reduced to a single conjugation",
        )

    # simultaneous case: shared transformation, disjoint window footprints
    t_shared = sources[0].t
    if not all(s.t.same_map(t_shared) for s in sources):
        raise SimultaneousMatchUnsupported(
            "simultaneous matching implemented only for a shared transformation"
        )
    t_centers = targets[0].center_t
    if not all(t.center_t.same_map(t_centers) for t in targets):
        raise SimultaneousMatchUnsupported(
            "targets must share one transformation center"
        )
    gs = []
    for s in sources:
        if len(set(s.f.values)) != 1 or not isinstance(s.f.values[0], WindowPerm):
            raise SimultaneousMatchUnsupported(
                "coordinates must be constant window-permutation fibers"
            )
        gs.append(s.f.values[0])
    footprints = [
        _window_footprint(g, t.center_f, [p for p, _ in t.value_conditions])
        for g, t in zip(gs, targets)
    ]
    for i in range(len(footprints)):
        for j in range(i + 1, len(footprints)):
            if footprints[i] & footprints[j]:
                raise SimultaneousMatchUnsupported(
                    f"coordinate windows {i} and {j} overlap"
                )
    top = max((max(fp) + 1 for fp in footprints if fp), default=0)
    # one transformation conjugator for all coordinates
    bounds = [b for t in targets for _, b in t.set_conditions]
    if bounds:
        match = mpt_conjugate_match(t_shared, t_centers, min(bounds) / 2)
        q = match.r
    else:
        q = DyadicMPT.identity(t_shared.level)
    r_prime = t_shared.conj(q)
    level = max(r_prime.level, *(t.center_f.level for t in targets))
    r_fine = r_prime.refine(level)
    combined: list[WindowPerm] = [E] * 2 ** level
    reserve = top
    for g, tgt in zip(gs, targets):
        marked = [p for p, _ in tgt.value_conditions]
        if not marked:
            continue
        center_f = tgt.center_f.refine(level)
        k_values: list = [E] * 2 ** level
        for cyc in r_fine.cycles(include_fixed=True):
            h_vals = [center_f.values[i] for i in cyc]
            gs_col = _solve_column_window(g, h_vals, marked, fresh_start=reserve)
            for idx, val in zip(cyc, gs_col):
                k_values[idx] = val
        # next coordinate's fresh points must clear everything used here
        used = [max(v.support(), default=-1) for v in k_values]
        reserve = max([reserve] + [u + 1 for u in used])
        combined = [a * b for a, b in zip(k_values, combined)]
    k_fn = StepFn(level, tuple(combined))
    conjugator = TildeElement(StepFn.constant(E, q.level), q) * TildeElement(
        k_fn, DyadicMPT.identity(level)
    )
    report = evaluate(conjugator)
    return DiagonalReport(
        success=report.success,
        conjugator=conjugator,
        per_coordinate=report.per_coordinate,
        note="disjoint-window simultaneous matching",
    )
