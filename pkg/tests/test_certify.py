import json

import pytest
from hypothesis import given, settings, strategies as st

from ecnondiv.arith import is_prime
from ecnondiv.certify import (
    COUNTEREXAMPLE,
    HEIGHT_GAP,
    HYPOTHESIS_FAILED,
    MODULAR_WITNESS,
    NON_DIVISIBLE,
    ONLY_INTEGRAL_POINT,
    UNDECIDED,
    Certificate,
    SweepJob,
    certify,
    certify_or_error,
    sweep,
    verify_certificate,
)
from ecnondiv.curves import CurveParams, minimal_model
from ecnondiv.points import FpCurve, Point, fp_group_info, reduce_mod_p


def test_counterexample_certificate():
    cert = certify(1, 5)
    assert cert.verdict == COUNTEREXAMPLE
    assert cert.evidence["counterexample"] == {"m": "3", "x": "-4", "y": "7"}
    assert verify_certificate(cert)


def test_height_gap_certificates():
    for t, cap in ((200, 8.6), (-250, 8.85)):
        cert = certify(1, t)
        assert (cert.verdict, cert.branch) == (NON_DIVISIBLE, HEIGHT_GAP)
        q = float(cert.evidence["height_gap"]["quotient"]["value"])
        assert q <= cap
        assert verify_certificate(cert)


def test_only_integral_point_certificate():
    cert = certify(1, -3)
    assert not cert.delta_squarefree  # delta = 9
    assert (cert.verdict, cert.branch) == (NON_DIVISIBLE, ONLY_INTEGRAL_POINT)
    assert verify_certificate(cert)


def test_modular_witness_certificate_for_e1_7():
    cert = certify(1, 7)
    assert (cert.verdict, cert.branch) == (NON_DIVISIBLE, MODULAR_WITNESS)
    assert cert.evidence["l_max"] == "13"
    assert [w["l"] for w in cert.evidence["witnesses"]] == ["3", "5", "7", "11", "13"]
    E, to_model = minimal_model(CurveParams(1, 7))
    P0 = to_model(Point(0, 1))
    for w in cert.evidence["witnesses"]:
        l, p, r = int(w["l"]), int(w["p"]), int(w["r_p"])
        assert is_prime(p) and E.discriminant % p and r % l == 0
        assert fp_group_info(E, p).exponent == r
        assert FpCurve(E, p).mul(r // l, reduce_mod_p(E, P0, p)) is not None
    assert verify_certificate(cert)


def test_hypothesis_failed():
    cert = certify(2, 399)
    assert cert.verdict == HYPOTHESIS_FAILED and cert.branch is None
    assert verify_certificate(cert)


def test_undecided_under_tiny_budget():
    cert = certify(1, 7, prime_budget=5)
    assert cert.verdict == UNDECIDED and cert.evidence["unwitnessed"]
    assert verify_certificate(cert).reason.startswith("undecided")


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=-60, max_value=60).filter(bool))
@settings(max_examples=40, deadline=None)
def test_json_round_trip_and_determinism(n, t):
    a, b = certify(n, t), certify(n, t)
    assert a.to_json() == b.to_json()
    back = Certificate.from_json(a.to_json())
    assert back == a
    payload = json.loads(a.to_json())
    assert set(payload) == {"n", "t", "delta", "delta_squarefree", "model", "verdict", "branch", "evidence", "versions"}
    assert isinstance(payload["n"], str) and isinstance(payload["delta"], str)
    assert verify_certificate(a.to_json())


def _tamper(cert, fn):
    d = json.loads(cert.to_json())
    fn(d)
    return d


def test_tampered_witness_prime_rejected():
    cert = certify(1, 7)
    d = _tamper(cert, lambda d: d["evidence"]["witnesses"][0].update(p="101"))
    res = verify_certificate(d)
    assert not res and res.reason.startswith("witness")


def test_malformed_certificate_rejected():
    res = verify_certificate("{not json")
    assert not res and res.reason.startswith("malformed")


def test_sweep_writes_ordered_records(tmp_path):
    out = tmp_path / "certs.jsonl"
    certs = list(sweep(SweepJob(1, 2, -3, 3, out)))
    assert [(c.n, c.t) for c in certs] == [(n, t) for n in (1, 2) for t in (-3, -2, -1, 1, 2, 3)]
    lines = out.read_text().splitlines()
    assert [Certificate.from_json(l) for l in lines] == certs


def test_sweep_empty_range(tmp_path):
    assert list(sweep(SweepJob(1, 1, 5, 4, tmp_path / "x.jsonl"))) == []


def test_sweep_resume_after_torn_line(tmp_path):
    out = tmp_path / "certs.jsonl"
    full = [c.to_json() for c in sweep(SweepJob(1, 1, 1, 6, out))]
    text = out.read_text()
    cut = text.index(full[3])  # keep three records and half of the fourth
    out.write_text(text[: cut + len(full[3]) // 2])
    resumed = list(sweep(SweepJob(1, 1, 1, 6, out, resume=True)))
    assert [c.t for c in resumed] == [4, 5, 6]
    assert out.read_text().splitlines() == full


def test_errors_become_undecided_records():
    cert = certify_or_error(1, 7, precision=128, prime_budget=-1)
    assert cert.verdict in (UNDECIDED, NON_DIVISIBLE)
    bad = certify_or_error(0, 7, precision=128, prime_budget=10**6)
    assert bad.verdict == UNDECIDED and "error" in bad.evidence
