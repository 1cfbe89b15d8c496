"""Step functions on [0,1): the finite surrogate of measurable functions.

A :class:`StepFn` is constant on each interval of a dyadic partition.  With
group values it models a random group element; with point values it models
a random point of the acted-on space.  Refining the partition replicates
values and changes nothing observable; all binary operations refine both
operands to a common level first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .dyadic import DyadicMPT, DyadicSet
from .errors import MismatchedSpace, NotConverging, ParseError, Unmatchable
from .groups import (
    E,
    WindowPerm,
    format_cycles,
    match_on_window,
    parse_cycles,
    perm_du,
    window_du,
)
from .spaces import FiniteMetricSpace, SpaceIsometry

Metric = Callable[[object, object], Fraction]


@dataclass(frozen=True)
class StepFn:
    """Function constant on each dyadic interval of its level."""

    level: int
    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != 2 ** self.level:
            raise ValueError(
                f"need {2 ** self.level} values at level {self.level}"
            )

    @staticmethod
    def constant(value, level: int = 0) -> "StepFn":
        return StepFn(level, (value,) * 2 ** level)

    @staticmethod
    def two_valued(split: Fraction, left, right, level: int | None = None) -> "StepFn":
        """Value ``left`` on [0, split) and ``right`` on [split, 1)."""
        split = Fraction(split)
        if not 0 <= split <= 1:
            raise ValueError("split must lie in [0,1]")
        q = split.denominator
        if q & (q - 1):
            raise ValueError("split must be dyadic")
        lev = max(q.bit_length() - 1, 1, level or 0)
        cut = int(split * 2 ** lev)
        return StepFn(lev, tuple(left if i < cut else right for i in range(2 ** lev)))

    def refine(self, level: int) -> "StepFn":
        if level < self.level:
            raise ValueError("refinement level must not decrease")
        k = 2 ** (level - self.level)
        return StepFn(level, tuple(v for v in self.values for _ in range(k)))

    def reduce(self) -> "StepFn":
        level, vals = self.level, list(self.values)
        while level > 0:
            pairs = [vals[2 * i] == vals[2 * i + 1] for i in range(len(vals) // 2)]
            if all(pairs):
                vals = [vals[2 * i] for i in range(len(vals) // 2)]
                level -= 1
            else:
                break
        return StepFn(level, tuple(vals))

    def same_function(self, other: "StepFn") -> bool:
        m = max(self.level, other.level)
        return self.refine(m).values == other.refine(m).values

    def value_at(self, omega: Fraction):
        if not 0 <= omega < 1:
            raise ValueError("point outside [0,1)")
        return self.values[int(omega * 2 ** self.level)]

    def where(self, predicate) -> DyadicSet:
        return DyadicSet(
            self.level,
            frozenset(i for i, v in enumerate(self.values) if predicate(v)),
        )

    def map(self, fn) -> "StepFn":
        return StepFn(self.level, tuple(fn(v) for v in self.values))

    def precompose(self, t: DyadicMPT) -> "StepFn":
        """The step function ``omega -> self(t(omega))``."""
        m = max(self.level, t.level)
        f, tt = self.refine(m), t.refine(m)
        return StepFn(m, tuple(f.values[tt.perm[i]] for i in range(2 ** m)))

    def distinct_pieces(self):
        """Pairs (value, set where it is taken), in first-appearance order."""
        order = []
        groups: dict = {}
        for i, v in enumerate(self.values):
            if v not in groups:
                groups[v] = set()
                order.append(v)
            groups[v].add(i)
        return [
            (v, DyadicSet(self.level, frozenset(groups[v]))) for v in order
        ]


def common_level(*fns: StepFn) -> int:
    return max(f.level for f in fns)


def zip_values(f: StepFn, h: StepFn):
    m = max(f.level, h.level)
    return m, f.refine(m).values, h.refine(m).values


def _check_same_kind(f: StepFn, h: StepFn) -> None:
    a, b = f.values[0], h.values[0]
    if type(a) is not type(b):
        raise MismatchedSpace(
            f"values of kind {type(a).__name__} vs {type(b).__name__}"
        )
    if isinstance(a, SpaceIsometry) and a.space != b.space:
        raise MismatchedSpace("isometries of different spaces")


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def dhat(f: StepFn, h: StepFn, metric: Metric) -> Fraction:
    """Integral over [0,1) of the pointwise distance, exactly."""
    _check_same_kind(f, h)
    m, fv, hv = zip_values(f, h)
    total = sum((metric(a, b) for a, b in zip(fv, hv)), Fraction(0))
    return total / 2 ** m


# ---------------------------------------------------------------------------
# Pointwise group structure
# ---------------------------------------------------------------------------

def l0_mul(f: StepFn, h: StepFn) -> StepFn:
    _check_same_kind(f, h)
    m, fv, hv = zip_values(f, h)
    return StepFn(m, tuple(a * b for a, b in zip(fv, hv)))


def l0_inv(f: StepFn) -> StepFn:
    return f.map(lambda v: v.inverse())


def l0_conj(f: StepFn, by: StepFn) -> StepFn:
    """Pointwise ``by**-1 * f * by``."""
    return l0_mul(l0_mul(l0_inv(by), f), by)


# ---------------------------------------------------------------------------
# Lower semicontinuity probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LscReport:
    """Outcome of a lower-semicontinuity probe along a finite sequence."""

    seq_dhat: tuple[Fraction, ...]       # dhat(seq_k, f)
    seq_dhat_u: tuple[Fraction, ...]     # dhat_u(seq_k, h)
    lhs: Fraction                        # dhat_u(f, h)
    tail_min: Fraction                   # min of seq_dhat_u over the tail
    holds: bool                          # lhs <= tail_min
    corrected_holds: bool                # lhs <= value + mass(seq_k != f), all k
    witness: dict | None


def lsc_probe(
    f: StepFn,
    h: StepFn,
    sequence: Sequence[StepFn],
    r: Fraction | None,
    metric: Metric,
    metric_u: Metric,
) -> LscReport:
    """Probe lower semicontinuity of the uniform integral metric.

    Requires ``dhat(seq_k, f)`` to be non-increasing (else
    :class:`NotConverging`).  Checks ``dhat_u(f, h) <= min`` of
    ``dhat_u(seq_k, h)`` over the tail (the second half of the sequence),
    and also the finite-scale bound that holds unconditionally:
    ``dhat_u(f, h) <= dhat_u(seq_k, h) + mu(seq_k != f)`` for every k.

    When ``r`` is given with ``r < dhat_u(f, h)``, the report carries the
    ball-radius witness structure built from the positive gap.
    """
    if not sequence:
        raise NotConverging("empty probe sequence")
    seq_d = tuple(dhat(s, f, metric) for s in sequence)
    if any(a < b for a, b in zip(seq_d, seq_d[1:])):
        raise NotConverging("dhat(seq_k, f) is not non-increasing")
    seq_du = tuple(dhat(s, h, metric_u) for s in sequence)
    lhs = dhat(f, h, metric_u)
    tail = seq_du[len(seq_du) // 2:]
    tail_min = min(tail)
    corrected = all(
        lhs <= val + _disagreement_mass(s, f)
        for val, s in zip(seq_du, sequence)
    )
    witness = None
    if r is not None:
        r = Fraction(r)
        if r < lhs:
            eps = lhs - r
            # distances where metric_u is positive, over represented values
            m, fv, hv = zip_values(f, h)
            gaps = sorted({metric_u(a, b) for a, b in zip(fv, hv)} - {Fraction(0)})
            min_gap = gaps[0] if gaps else Fraction(1)
            big_n = max(1, (1 / min_gap).__ceil__())
            witness = {
                "epsilon": eps,
                "levels": gaps,
                "ball_index": big_n,
                "radius": eps / (4 * big_n),
                "exceptional_measure": Fraction(0),
            }
    return LscReport(
        seq_dhat=seq_d,
        seq_dhat_u=seq_du,
        lhs=lhs,
        tail_min=tail_min,
        holds=lhs <= tail_min,
        corrected_holds=corrected,
        witness=witness,
    )


def _disagreement_mass(a: StepFn, b: StepFn) -> Fraction:
    m, av, bv = zip_values(a, b)
    return Fraction(sum(1 for x, y in zip(av, bv) if x != y), 2 ** m)


# ---------------------------------------------------------------------------
# Conjugating a function toward a constant
# ---------------------------------------------------------------------------

def exact_perm_conjugator(g: WindowPerm, v: WindowPerm) -> WindowPerm | None:
    """``rho`` with ``rho**-1 * g * rho == v`` exactly, or None.

    Exists precisely when the nontrivial cycle censuses agree; cycles are
    paired by length in least-point order.
    """
    gc = sorted(g.cycles(), key=lambda c: (len(c), c[0]))
    vc = sorted(v.cycles(), key=lambda c: (len(c), c[0]))
    if [len(c) for c in gc] != [len(c) for c in vc]:
        return None
    width = max([g.window, v.window] or [0])
    assignment: dict[int, int] = {}
    for cg, cv in zip(gc, vc):
        for a, b in zip(cv, cg):
            assignment[a] = b
    sources = sorted(set(range(width)) - set(assignment))
    images = sorted(set(range(width)) - set(assignment.values()))
    rho_map = list(range(width))
    for k, val in assignment.items():
        rho_map[k] = val
    for k, val in zip(sources, images):
        rho_map[k] = val
    rho = WindowPerm(rho_map)
    assert g.conj(rho) == v
    return rho


def default_window_matcher(k: int):
    """Matcher for window permutations: exact when censuses agree, else
    agreement below ``k`` through the spare-cycle embedding."""

    def matcher(g: WindowPerm, value: WindowPerm, eps: Fraction) -> WindowPerm:
        rho = exact_perm_conjugator(g, value)
        if rho is not None:
            return rho
        target = {n: value(n) for n in range(k)}
        return match_on_window(g, 1, target, k)

    return matcher


def constant_generic_conjugator(
    g,
    f: StepFn,
    k: int,
    eps: Fraction,
    matcher=None,
    metric_u: Metric | None = None,
) -> tuple[StepFn, Fraction]:
    """Build ``h`` with ``dhat_u(f, h**-1 * C_g * h) <= eps``.

    The matching oracle is called independently on each interval value (the
    finite stand-in for a measurable selection); for window permutations
    the default matcher conjugates exactly when possible and otherwise
    matches below window ``k`` against the window-restricted uniform
    metric.  Returns the conjugating step function and the exact achieved
    distance.  Raises :class:`Unmatchable` naming the first failing
    interval.
    """
    eps = Fraction(eps)
    if matcher is None:
        matcher = default_window_matcher(k)
    if metric_u is None:
        metric_u = window_du(k) if isinstance(f.values[0], WindowPerm) else None
    if metric_u is None:
        raise ValueError("metric_u required for non-permutation values")
    from .errors import RandlabError

    conjugators = []
    for i, v in enumerate(f.values):
        try:
            rho = matcher(g, v, eps)
        except (RandlabError, ValueError) as exc:
            raise Unmatchable(
                f"interval {i}: value not {eps}-conjugate to target ({exc})",
                interval=i,
            ) from exc
        if metric_u(v, g.conj(rho)) > eps:
            raise Unmatchable(
                f"interval {i}: matcher result misses tolerance {eps}",
                interval=i,
            )
        conjugators.append(rho)
    h = StepFn(f.level, tuple(conjugators))
    conjugated = h.map(lambda rho: g.conj(rho))
    achieved = dhat(f, conjugated, metric_u)
    assert achieved <= eps
    return h, achieved


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, WindowPerm):
        return format_cycles(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    raise ParseError(f"no text form for value kind {type(v).__name__}")


def parse_value(text: str):
    text = text.strip()
    if text.startswith("("):
        return parse_cycles(text)
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad step value: {text!r}") from None


def format_step(f: StepFn) -> str:
    body = ", ".join(format_value(v) for v in f.values)
    return f"step {f.level} [{body}]"


def parse_step(text: str, value_parser=parse_value) -> StepFn:
    text = text.strip()
    m = text.split(None, 2)
    if len(m) != 3 or m[0] != "step" or not m[2].startswith("["):
        raise ParseError(f"expected 'step <level> [values]', got {text!r}")
    try:
        level = int(m[1])
    except ValueError:
        raise ParseError(f"bad level {m[1]!r}") from None
    body = m[2].strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ParseError("step values must be bracketed")
    inner = body[1:-1].strip()
    # split on commas that are not inside parentheses
    parts, depth, cur = [], 0, ""
    for ch in inner:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    values = tuple(value_parser(p) for p in parts)
    return StepFn(level, values)
