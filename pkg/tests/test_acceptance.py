"""Acceptance criteria AC1-AC9.  A PASS/FAIL line per criterion is printed at the end of the run."""

import json
import math
import time

import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st
from mpmath import mp

from ecnondiv.arith import factorize, is_squarefree
from ecnondiv.certify import (
    COUNTEREXAMPLE,
    HEIGHT_GAP,
    NON_DIVISIBLE,
    SweepJob,
    certify,
    sweep,
    verify_certificate,
)
from ecnondiv.curves import CurveParams, make_curve, minimal_model
from ecnondiv.heights import canonical_height, doubling_oracle, upper_bound_h0
from ecnondiv.periods import check_period_bounds, periods
from ecnondiv.points import Point, negate, on_curve, scalar_mul
from ecnondiv.tate import global_reduction, tate_at


def _base_point(n, t):
    E, to_model = minimal_model(CurveParams(n, t))
    return E, to_model(Point(0, n**3))


# -- AC1 ---------------------------------------------------------------------


def test_ac1_counterexample_identity():
    start = time.perf_counter()
    for n in range(1, 11):
        E = make_curve(CurveParams(n, 5 * n * n))
        assert scalar_mul(E, 3, Point(-4 * n * n, 7 * n**3)) == Point(0, n**3)
        assert certify(n, 5 * n * n).verdict == COUNTEREXAMPLE
    assert time.perf_counter() - start < 1.0


# -- AC2 ---------------------------------------------------------------------


def _period_grid():
    for n in (1, 2, 3, 5):
        for t in (100 * n * n, -100 * n * n, 1000 * n * n, -1000 * n * n, 10**6, -(10**6)):
            if abs(t) >= 100 * n * n:
                yield n, t


def test_ac2_period_bounds():
    failures, wide = [], []
    for n, t in _period_grid():
        E = make_curve(CurveParams(n, t))
        pd = periods(E)
        with mp.workprec(pd.precision + 32):
            for name, (lo, hi) in (("omega1", pd.omega1_enclosure), ("omega2_im", pd.omega2_enclosure)):
                if (hi - lo) / lo > 1e-9:
                    wide.append((n, t, name))
        report = check_period_bounds(E, pd)
        failures += [(n, t, check) for check, ok in report.checks.items() if not ok]
    assert not wide, f"enclosures wider than 1e-9 relative: {wide}"
    assert not failures, f"enclosures outside the intervals: {failures}"


# -- AC3 ---------------------------------------------------------------------


@pytest.mark.parametrize("n,t", [(1, 1), (1, 2), (1, 7), (2, 1), (3, 1), (4, 1)])
def test_ac3_height_matches_oracle(n, t):
    E, P0 = _base_point(n, t)
    hb = canonical_height(E, P0)
    assert hb.method == "local"
    assert abs(hb.canonical - doubling_oracle(E, P0)) <= 1e-5


# -- AC4 ---------------------------------------------------------------------


def _large_t(n):
    lo = 100 * n * n
    return st.one_of(st.integers(min_value=lo, max_value=10**8), st.integers(min_value=-(10**8), max_value=-lo))


family_large = st.integers(min_value=1, max_value=12).flatmap(lambda n: st.tuples(st.just(n), _large_t(n)))
eprime_large = st.integers(min_value=1, max_value=3).flatmap(
    lambda m: st.tuples(st.just(4 * m), _large_t(4 * m).map(lambda t: 4 * (t // 4) + 1))
)


@given(st.one_of(family_large, eprime_large))
@settings(max_examples=120, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
def test_ac4_upper_bound(nt):
    n, t = nt
    params = CurveParams(n, t)
    assume(abs(t) >= 100 * n * n and is_squarefree(params.delta))
    E, P0 = _base_point(n, t)
    h = canonical_height(E, P0)
    offset = 0.19 if params.has_eprime_model else 1.57
    assert upper_bound_h0(params) == pytest.approx(math.log(abs(t)) + offset)
    assert h.canonical + h.error_bound <= math.log(abs(t)) + offset


def test_ac4_eprime_examples():
    for n, t in ((4, 1601), (4, -1603), (8, 6401), (8, -6403), (12, 14401)):
        params = CurveParams(n, t)
        assert params.has_eprime_model
        E, P0 = _base_point(n, t)
        assert canonical_height(E, P0).canonical <= math.log(abs(t)) + 0.19


# -- AC5 ---------------------------------------------------------------------


def test_ac5_height_gap_branch():
    for t, cap in ((200, 8.6), (-250, 8.85)):
        cert = certify(1, t)
        assert (cert.verdict, cert.branch) == (NON_DIVISIBLE, HEIGHT_GAP)
        quotient = float(cert.evidence["height_gap"]["quotient"]["value"])
        assert round(quotient, 2) <= cap


# -- AC6 / AC9 -----------------------------------------------------------------


@pytest.fixture(scope="session")
def desk_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep") / "certs.jsonl"
    start = time.perf_counter()
    certs = list(sweep(SweepJob(1, 3, -2000, 2000, out)))
    return certs, out, time.perf_counter() - start


@pytest.mark.slow
def test_ac6_desk_scale_sweep(desk_sweep):
    certs, _, elapsed = desk_sweep
    squarefree = [c for c in certs if c.delta_squarefree]
    assert len(certs) == 3 * 4000
    bad = [(c.n, c.t, c.verdict) for c in squarefree if c.verdict != NON_DIVISIBLE]
    assert not bad, f"{len(bad)} squarefree cases not certified: {bad[:20]}"
    assert elapsed < 30 * 60


# -- AC7 ---------------------------------------------------------------------

# small-height integral points keep the doubling oracle for 2P and 3P fast
AC7_POINTS = {
    (1, -1): [(0, 1), (2, 1), (-1, 1), (6, 13)],
    (1, 3): [(-4, 3), (-1, 3), (0, 1)],
    (1, 1): [(0, 1)],
    (1, -2): [(0, 1)],
    (1, 7): [(0, 1)],
}


def _ac7_sample():
    for (n, t), pts in AC7_POINTS.items():
        E = make_curve(CurveParams(n, t))
        for x, y in pts:
            P = Point(x, y)
            yield (n, t), E, P
            yield (n, t), E, negate(E, P)


def test_ac7_quadraticity():
    sample = list(_ac7_sample())
    assert len(sample) == 20 and len({key for key, _, _ in sample}) == 5
    errors = []
    for key, E, P in sample:
        assert on_curve(E, P)
        h = canonical_height(E, P).canonical
        for k in (2, 3):
            hk = canonical_height(E, scalar_mul(E, k, P)).canonical
            if abs(hk - k * k * h) > 1e-5:
                errors.append((key, P, k, hk - k * k * h))
    assert not errors, errors


# -- AC8 ---------------------------------------------------------------------


def _tate_grid():
    seen = set()
    for n, t in list(_period_grid()) + [(1, 1), (1, 2), (1, 7), (2, 1), (3, 1), (4, 1)]:
        seen.add((n, t))
    for n in range(1, 5):
        for t in range(-40, 41):
            if t:
                seen.add((n, t))
    return sorted(key for key in seen if is_squarefree(CurveParams(*key).delta))


def test_ac8_tate_consistency():
    problems = []
    for n, t in _tate_grid():
        params = CurveParams(n, t)
        E, _ = minimal_model(params)
        for r in global_reduction(E).local:
            kind = r.kodaira
            if kind.startswith("I") and kind[1:].isdigit() and kind != "I0" and r.v_min_delta != int(kind[1:]):
                problems.append((n, t, r.p, "I_n needs v = n"))
            if kind == "II" and r.tamagawa != 1:
                problems.append((n, t, r.p, "II needs c_p = 1"))
            if r.p % 2 == 1 and params.delta % r.p == 0 and kind != "II":
                problems.append((n, t, r.p, "odd p | delta needs type II"))
    assert not problems, problems


@pytest.mark.parametrize("n,t", [(4, 1), (8, 5), (4, -3)])
def test_ac8_eprime_agreement(n, t):
    params = CurveParams(n, t)
    assert params.has_eprime_model
    E = make_curve(params)
    Ep, _ = minimal_model(params)
    assert tate_at(E, 2).u_exponent == 1
    gr_e = {p: tate_at(E, p) for p, _ in factorize(abs(E.discriminant))}
    gr_ep = global_reduction(Ep)
    assert gr_ep.is_minimal
    assert gr_ep.min_discriminant == E.discriminant // 2**12
    for r in gr_ep.local:
        other = gr_e[r.p]
        assert (r.kodaira, r.tamagawa, r.v_min_delta) == (other.kodaira, other.tamagawa, other.v_min_delta)


# -- AC9 ---------------------------------------------------------------------


def _corruptions():
    """(label, source (n, t), mutation of the JSON payload)."""

    def witness(field, value):
        return lambda d: d["evidence"]["witnesses"][0].update({field: value})

    return [
        ("witness prime", (1, 7), witness("p", "101")),
        ("witness exponent", (1, 7), lambda d: d["evidence"]["witnesses"][0].update(r_p=str(int(d["evidence"]["witnesses"][0]["r_p"]) * 2))),
        ("dropped witness", (1, 7), lambda d: d["evidence"]["witnesses"].pop()),
        ("l_max", (1, 7), lambda d: d["evidence"].update(l_max="2")),
        ("delta", (1, 7), lambda d: d.update(delta=str(int(d["delta"]) + 1))),
        ("squarefree flag", (2, 399), lambda d: d.update(delta_squarefree=True, verdict=NON_DIVISIBLE, branch=HEIGHT_GAP)),
        ("height quotient", (1, 200), lambda d: d["evidence"]["height_gap"]["quotient"].update(value="1.0e+00")),
        ("height lower bound", (1, -250), lambda d: d["evidence"]["height_gap"]["h_lower"].update(value="9.9e+00")),
        ("counterexample point", (1, 5), lambda d: d["evidence"]["counterexample"].update(x="-3")),
        ("moved parameters", (1, 200), lambda d: d.update(t="201", delta=str(201**2 + 3 * 201 + 9))),
    ]


@pytest.mark.slow
def test_ac9_round_trip(desk_sweep):
    certs, out, _ = desk_sweep
    extra = [certify(n, t) for n, t in ((1, 5), (1, 200), (1, -250), (1, -3), (4, 1), (4, 1601))]
    rejected = [(c.n, c.t, verify_certificate(c).reason) for c in extra if not verify_certificate(c)]
    for line in out.read_text().splitlines():
        res = verify_certificate(line)
        if not res:
            d = json.loads(line)
            rejected.append((d["n"], d["t"], res.reason))
    assert not rejected, rejected[:20]

    accepted = []
    corruptions = _corruptions()
    assert len(corruptions) == 10
    for label, (n, t), mutate in corruptions:
        d = json.loads(certify(n, t).to_json())
        mutate(d)
        if verify_certificate(d):
            accepted.append(label)
    assert not accepted, f"corrupted certificates accepted: {accepted}"
