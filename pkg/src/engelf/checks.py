"""One-shot invariant suite behind ``engelf check``."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product

from gmpy2 import mpq

from .engel import Cylinder, digits_of, e_rational, value_of
from .family import Family, validate
from .function import (
    CONST,
    MAX,
    cylinder_change,
    cylinder_value_range,
    enumerate_extrema,
    eval_at_E_rational,
    eval_terms,
    extremum_neighbors,
    functional_eq_check,
    in_bracket,
    monotonicity_witness,
)
from .measure import integral_enclosure
from .rational import TermSum


@dataclass(frozen=True)
class CheckLevel:
    samples: int
    max_i: int
    sweep_rank: int
    sweep_cap: int
    integral_rank: int
    integral_breadth: int
    integral_slack: mpq


LEVELS = {
    # samples, max_i, sweep rank/cap, integral rank/breadth/slack
    "quick": CheckLevel(60, 6, 2, 4, 6, 8, mpq(1, 10**3)),
    "full": CheckLevel(300, 20, 4, 6, 8, 12, mpq(1, 10**4)),
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    extra: list = field(default_factory=list)

    def __str__(self):
        head = f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"
        return "\n".join([head] + [f"    {line}" for line in self.extra])


def random_base(rng: random.Random, max_rank: int, cap: int) -> tuple[int, ...]:
    return tuple(rng.randint(0, cap) for _ in range(rng.randint(1, max_rank)))


def _digit_cap(spec: Family, cap: int) -> int:
    return cap if spec.exact_limit is None else min(cap, spec.exact_limit)


def check_roundtrip(spec: Family, level: CheckLevel, rng: random.Random) -> CheckResult:
    bad = 0
    for _ in range(level.samples):
        q = rng.randint(1, 10**6)
        x = mpq(rng.randint(1, q), q)
        v = value_of(digits_of(x))
        if not (v == x if isinstance(v, type(x)) else x in v):
            bad += 1
    return CheckResult("roundtrip", bad == 0, f"{level.samples} rationals, {bad} failures")


def check_functional_equation(spec: Family, level: CheckLevel, rng: random.Random) -> CheckResult:
    bad = total = 0
    max_i = _digit_cap(spec, level.max_i)
    cap = _digit_cap(spec, 8)
    for _ in range(level.samples):
        d = e_rational(*random_base(rng, 6, cap))
        for i in range(max_i + 1):
            total += 1
            verdict = functional_eq_check(spec, d, i)
            if not (verdict.holds and in_bracket(spec, i, verdict.lhs)):
                bad += 1
    return CheckResult("functional_equation", bad == 0, f"{total} exact checks (i <= {max_i}), {bad} failures")


def check_change_formula(spec: Family, level: CheckLevel, rng: random.Random) -> CheckResult:
    bad = 0
    cap = _digit_cap(spec, 8)
    for _ in range(level.samples):
        c = Cylinder(random_base(rng, 6, cap))
        fb = eval_terms(spec, c.right_point())
        fa = eval_terms(spec, c.left_point())
        change = cylinder_change(spec, c)
        if fb != TermSum(list(fa.terms) + [change]):
            bad += 1
    return CheckResult("change_formula", bad == 0, f"{level.samples} cylinders, {bad} failures")


def check_monotone(spec: Family, level: CheckLevel, rng: random.Random) -> CheckResult:
    cap = _digit_cap(spec, 6)
    pts = {e_rational(*random_base(rng, 5, cap)) for _ in range(level.samples)}
    ordered = sorted(pts, key=lambda d: value_of(d))
    values = [eval_at_E_rational(spec, d) for d in ordered]
    strict = not spec.has_zero
    ok = all((a < b) if strict else (a <= b) for a, b in zip(values, values[1:]))
    kind = "strictly increasing" if strict else "nondecreasing"
    return CheckResult("monotone", ok, f"{kind} over {len(values)} sorted E-rationals")


def check_nowhere_monotone(spec: Family, level: CheckLevel) -> CheckResult:
    cylinders = [Cylinder(())]
    for m in range(1, level.sweep_rank + 1):
        cylinders += [Cylinder(b) for b in product(range(level.sweep_cap + 1), repeat=m)]
    missing, extra = [], []
    for c in cylinders:
        # zero change means f is constant there
        if c.rank and cylinder_change(spec, c) == 0:
            continue
        w = monotonicity_witness(spec, c, level.sweep_cap)
        if w is None:
            missing.append(str(c))
        elif len(extra) < 3:
            extra.append(f"[{c}] rises on [{w.rising}], falls on [{w.falling}]")
    detail = f"{len(cylinders)} cylinders (rank <= {level.sweep_rank}, digits <= {level.sweep_cap}), {len(missing)} without witness"
    return CheckResult("nowhere_monotone", not missing, detail, extra + missing[:5])


def check_extrema(spec: Family, level: CheckLevel) -> CheckResult:
    pts = enumerate_extrema(spec, 3, level.sweep_cap)
    if spec.nonnegative:
        return CheckResult("extrema", not pts, f"{len(pts)} extrema (expected none)")
    bad = 0
    for p in pts:
        left, right = extremum_neighbors(spec, p)
        if p.role == MAX:
            bad += not (p.value >= left and p.value >= right)
        else:
            bad += not (p.value <= left and p.value <= right)
    return CheckResult("extrema", bad == 0, f"{len(pts)} extrema checked against neighbours, {bad} failures")


def check_constancy(spec: Family, level: CheckLevel, rng: random.Random) -> CheckResult:
    zeros = [p for p in range(_digit_cap(spec, 8) + 1) if spec.u(p) == 0]
    if not zeros:
        return CheckResult("constancy", True, "no u_p = 0 with p <= 8")
    bad = 0
    for _ in range(level.samples):
        base = list(random_base(rng, 5, 8))
        base[rng.randrange(len(base))] = rng.choice(zeros)
        vr = cylinder_value_range(spec, Cylinder(tuple(base)))
        bad += vr.min != vr.max or vr.argmax.role != CONST
    return CheckResult("constancy", bad == 0, f"{level.samples} cylinders through u_p = 0, {bad} not constant")


def check_integral(spec: Family, level: CheckLevel) -> CheckResult:
    enc = integral_enclosure(spec, level.integral_rank, level.integral_breadth, level.integral_slack)
    ok = enc.lower <= enc.upper
    detail = f"[{float(enc.lower):.9f}, {float(enc.upper):.9f}]"
    if spec.nonnegative:
        ok = ok and 0 <= enc.lower and enc.upper <= 1
        if enc.paper_bound is not None:
            ok = ok and enc.upper <= enc.paper_bound.hi
            detail += f" <= bound {float(enc.paper_bound.hi):.9f}"
    return CheckResult("integral", ok, detail)


def run_checks(spec: Family, level: str = "quick", seed: int = 0) -> list[CheckResult]:
    lv = LEVELS[level]
    rng = random.Random(seed)
    report = validate(spec, 60)
    results = [CheckResult("validate", report.ok, f"conditions hold for n <= {report.checked_depth}")]
    if not report.ok:
        results[0].extra = [str(f) for f in report.failures]
        return results
    results.append(check_roundtrip(spec, lv, rng))
    results.append(check_functional_equation(spec, lv, rng))
    results.append(check_change_formula(spec, lv, rng))
    if spec.nonnegative:
        results.append(check_monotone(spec, lv, rng))
    else:
        results.append(check_nowhere_monotone(spec, lv))
    results.append(check_extrema(spec, lv))
    if spec.has_zero:
        results.append(check_constancy(spec, lv, rng))
    results.append(check_integral(spec, lv))
    return results
