"""Oracle-equivalence checks run by ``jumpspace selftest``."""
from __future__ import annotations

from .base import as_rng, random_point
from .jump import SpacePoint, ball_decompose, ball_measure, d_infty, d_p
from .numeric import ONE, ZERO, Dyadic, IntervalUnion, grid_window
from .oracles import brute_force_dp, rectangle_union_measure
from .report import ScanReport

HEIGHT_BITS = 12


def random_height(rng, bits: int = HEIGHT_BITS) -> Dyadic:
    return Dyadic(int(rng.integers(0, (1 << bits) + 1)), bits)


def random_space_point(depth: int, rng, bits: int = HEIGHT_BITS) -> SpacePoint:
    return SpacePoint(random_point(depth, rng), random_height(rng, bits))


def random_radius(rng, bits: int = 8) -> Dyadic:
    # mostly small radii, occasionally larger than the whole space
    if rng.random() < 0.1:
        return Dyadic(int(rng.integers(1, 9)), 2)
    return Dyadic(int(rng.integers(1, (1 << bits) + 1)), bits)


def literal_section(t: Dyadic, r: Dyadic, k: int) -> IntervalUnion:
    sec = IntervalUnion()
    for u in grid_window(k, t, r):
        w = r - abs(t - u)
        sec = sec.add(u - w, u + w)
    return sec.clip(ZERO, ONE)


def run_checks(depth: int, pairs: int, balls: int, membership: int, rng) -> ScanReport:
    rng = as_rng(rng)
    rep = ScanReport(["check", "depth", "cases", "failures", "passed"])

    def record(name, cases, failures):
        rep.add(check=name, depth=depth, cases=cases, failures=failures, passed=failures == 0)

    pts = [random_space_point(depth, rng) for _ in range(3 * pairs)]
    triples = [pts[3 * i: 3 * i + 3] for i in range(pairs)]

    bad = sum(d_p(p, q) != brute_force_dp(p, q, HEIGHT_BITS) for p, q, _ in triples)
    record("closed_form_dp_equals_brute_force", pairs, bad)

    bad = 0
    for p, q, z in triples:
        pq = d_p(p, q)
        if pq != d_p(q, p) or d_p(p, p) != 0 or pq > d_p(p, z) + d_p(z, q):
            bad += 1
    record("pseudometric_axioms", pairs, bad)

    bad = 0
    for p, q, _ in triples:
        dp = d_p(p, q)
        if dp > 3 * d_infty(p, q) or abs(p.height - q.height) > dp:
            bad += 1
    record("vertical_gap_le_dp_le_3_dinf", pairs, bad)

    cases = bad_measure = bad_member = bad_section = probes = 0
    for _ in range(balls):
        c = random_space_point(depth, rng)
        r = random_radius(rng)
        cases += 1
        if ball_measure(c, r) != rectangle_union_measure(c, r):
            bad_measure += 1
        dec = ball_decompose(c, r)
        for k in range(1, depth):
            if dec.section(k) != literal_section(c.height, r, k):
                bad_section += 1
        for _ in range(membership):
            q = random_space_point(depth, rng, bits=HEIGHT_BITS + 4)
            probes += 1
            if dec.contains(q) != (d_p(c, q) < r):
                bad_member += 1
    record("ball_measure_equals_rectangle_union_oracle", cases, bad_measure)
    record("sections_equal_literal_grid_union", cases * (depth - 1), bad_section)
    record("decomposition_membership_equals_dp", probes, bad_member)
    return rep
