"""Decision procedure for non-divisibility of (0, n^3), certificates, and batch sweeps."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterator, Optional, Union

from . import __version__
from .arith import is_prime, is_squarefree, primes_up_to
from .curves import EGG, MODEL_E, CurveParams, WeierstrassCurve, component_of, make_curve, minimal_model
from .heights import canonical_height, lower_bound_hP, torsion_order, upper_bound_h0
from .points import FpCurve, Point, fp_group_info, reduce_mod_p, scalar_mul
from .tate import global_reduction

NON_DIVISIBLE = "non-divisible"
COUNTEREXAMPLE = "counterexample"
HYPOTHESIS_FAILED = "hypothesis-failed"
UNDECIDED = "undecided"

HEIGHT_GAP = "height-gap"
COMPONENT_PARITY = "component-parity"
MODULAR_WITNESS = "modular-witness"
KNOWN_COUNTEREXAMPLE = "known-counterexample"
ONLY_INTEGRAL_POINT = "only-integral-point"

DEFAULT_PRECISION = 128
DEFAULT_PRIME_BUDGET = 10**6
CANDIDATE_CAP = 10**4


def _real(value: float, err: float = 0.0) -> dict[str, str]:
    return {"value": "%.17e" % value, "err": "%.3e" % err}


def _val(entry: dict[str, str]) -> float:
    return float(entry["value"])


@dataclass
class Certificate:
    n: int
    t: int
    delta: int
    delta_squarefree: bool
    model: str
    verdict: str
    branch: Optional[str]
    evidence: dict[str, Any] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["n"], d["t"], d["delta"] = str(self.n), str(self.t), str(self.delta)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Certificate":
        return cls(
            int(d["n"]), int(d["t"]), int(d["delta"]), bool(d["delta_squarefree"]),
            d["model"], d["verdict"], d.get("branch"), d.get("evidence", {}), d.get("versions", {}),
        )

    @classmethod
    def from_json(cls, line: str) -> "Certificate":
        return cls.from_dict(json.loads(line))


def _versions(n: int, t: int, precision: int, prime_budget: int) -> dict[str, str]:
    settings = {"n": n, "t": t, "precision": precision, "prime_budget": prime_budget, "candidate_cap": CANDIDATE_CAP}
    digest = hashlib.sha256(json.dumps(settings, sort_keys=True).encode()).hexdigest()
    return {"tool": f"ecnondiv {__version__}", "fingerprint": digest}


def _cubic_at(params: CurveParams, x: int) -> int:
    n2, t = params.n**2, params.t
    return x**3 + t * x * x - n2 * (t + 3 * n2) * x + n2**3


def in_height_gap_range(params: CurveParams) -> bool:
    n2, t = params.n**2, params.t
    return t >= max(100 * n2, n2 * n2) or t <= min(-100 * n2, -2 * n2 * n2)


def _height_gap(params: CurveParams) -> Optional[dict[str, Any]]:
    upper = upper_bound_h0(params)
    lower = lower_bound_hP(params)
    if lower <= 0:
        return None
    quotient = upper / lower
    if quotient >= 9:
        return None
    return {"h_upper": _real(upper), "h_lower": _real(lower), "quotient": _real(quotient), "l_bound": "2"}


def _only_integral_point(params: CurveParams, curve: WeierstrassCurve) -> Optional[dict[str, Any]]:
    """n = 1, t <= -2: the egg has x in (-1, 1), so its only integral points are (0, +-1)."""
    values = {str(x): _cubic_at(params, x) for x in (-1, 0, 1)}
    if not (values["-1"] < 0 < values["0"] and values["1"] < 0):
        return None
    if torsion_order(curve, Point(0, 1)) is not None:
        return None
    return {
        "only_integral_point": {
            "cubic_values": {k: str(v) for k, v in values.items()},
            "egg_integer_abscissae": ["0"],
            "point_has_infinite_order": True,
        }
    }


def _witness_search(
    curve: WeierstrassCurve,
    P0: Point,
    ells: list[int],
    prime_budget: int,
    candidate_cap: int = CANDIDATE_CAP,
) -> tuple[list[dict[str, str]], list[int]]:
    """For each l, the first good prime p with l | r_p and (r_p / l) P0 != O mod p."""
    pending = set(ells)
    tried = {l: 0 for l in ells}
    witnesses = []
    disc = curve.discriminant
    for p in primes_up_to(prime_budget):
        if not pending:
            break
        if disc % p == 0:
            continue
        for l in pending:
            tried[l] += 1
        Ep = FpCurve(curve, p)
        N, _ = Ep.count_and_two_torsion()
        candidates = sorted(l for l in pending if N % l == 0)
        if candidates:
            info = fp_group_info(curve, p, limit=prime_budget, reduced=Ep)
            Q = reduce_mod_p(curve, P0, p)
            for l in candidates:
                if info.exponent % l == 0 and Ep.mul(info.exponent // l, Q) is not None:
                    witnesses.append({"l": str(l), "p": str(p), "r_p": str(info.exponent)})
                    pending.discard(l)
        for l in [l for l in pending if tried[l] >= candidate_cap]:
            pending.discard(l)
    witnesses.sort(key=lambda w: int(w["l"]))
    unwitnessed = sorted(set(ells) - {int(w["l"]) for w in witnesses})
    return witnesses, unwitnessed


def modular_bound(curve: WeierstrassCurve, P0: Point, precision: int = DEFAULT_PRECISION) -> dict[str, Any]:
    """l_max = floor(sqrt(h0 / B_E)) with h0 an upper estimate of the canonical height of P0."""
    gr = global_reduction(curve)
    hb = canonical_height(curve, P0, precision)
    h0 = hb.canonical + hb.error_bound
    l_max = math.isqrt(int(h0 / gr.B_E)) if gr.B_E > 0 else None
    # isqrt of the floor is the floor of the square root
    return {"h0": _real(hb.canonical, hb.error_bound), "B_E": _real(gr.B_E), "C_E": str(gr.C_E),
            "log_min_delta": _real(gr.log_min_delta), "l_max": str(l_max)}


def _odd_primes_upto(l_max: int) -> list[int]:
    return [l for l in primes_up_to(max(l_max, 2)) if l > 2]


def certify(
    n: int,
    t: int,
    precision: int = DEFAULT_PRECISION,
    prime_budget: int = DEFAULT_PRIME_BUDGET,
) -> Certificate:
    params = CurveParams(n, t)
    delta = params.delta
    squarefree = is_squarefree(delta)
    curve, to_model = minimal_model(params)
    cert = Certificate(n, t, delta, squarefree, curve.provenance or MODEL_E, UNDECIDED, None,
                       versions=_versions(n, t, precision, prime_budget))
    P0 = to_model(Point(0, n**3))

    if t == 5 * n * n:
        # delta = 49 n^4 here, and 3 (-4n^2, 7n^3) = (0, n^3)
        cert.verdict = HYPOTHESIS_FAILED
        P = Point(-4 * n * n, 7 * n**3)
        if scalar_mul(make_curve(params), 3, P) == Point(0, n**3):
            cert.verdict, cert.branch = COUNTEREXAMPLE, KNOWN_COUNTEREXAMPLE
            cert.evidence = {"counterexample": {"m": "3", "x": str(P.x), "y": str(P.y)}}
        return cert

    egg = component_of(curve, P0) == EGG
    parity = {"component": EGG if egg else "identity-component"}

    if squarefree and egg and in_height_gap_range(params):
        gap = _height_gap(params)
        if gap is not None:
            cert.verdict, cert.branch = NON_DIVISIBLE, HEIGHT_GAP
            cert.evidence = {"height_gap": gap, "parity": parity}
            return cert

    # this argument does not use squarefreeness of delta
    if egg and n == 1 and t <= -2:
        proof = _only_integral_point(params, curve)
        if proof is not None:
            cert.verdict, cert.branch = NON_DIVISIBLE, ONLY_INTEGRAL_POINT
            cert.evidence = {**proof, "parity": parity}
            return cert

    if not squarefree:
        cert.verdict = HYPOTHESIS_FAILED
        return cert

    cert.branch = MODULAR_WITNESS
    bound = modular_bound(curve, P0, precision)
    l_max = int(bound["l_max"])
    ells = _odd_primes_upto(l_max) if egg else [l for l in primes_up_to(max(l_max, 2))]
    witnesses, unwitnessed = _witness_search(curve, P0, ells, prime_budget)
    cert.evidence = {**bound, "witnesses": witnesses, "unwitnessed": [str(l) for l in unwitnessed], "parity": parity}
    cert.verdict = NON_DIVISIBLE if not unwitnessed else UNDECIDED
    return cert


# ---------------------------------------------------------------------------
# independent re-checking


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    reason: str = "ok"

    def __bool__(self) -> bool:
        return self.ok


def _fail(reason: str) -> VerifyResult:
    return VerifyResult(False, reason)


def _close(a: float, b: float, rel: float = 1e-12) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def verify_certificate(cert: Union[Certificate, dict, str]) -> VerifyResult:
    """Re-check the evidence of a certificate without repeating any search."""
    try:
        if isinstance(cert, str):
            cert = Certificate.from_json(cert)
        elif isinstance(cert, dict):
            cert = Certificate.from_dict(cert)
        return _verify(cert)
    except (KeyError, ValueError, TypeError, ArithmeticError) as exc:
        return _fail(f"malformed: {exc.__class__.__name__}: {exc}")


def _verify(cert: Certificate) -> VerifyResult:
    params = CurveParams(cert.n, cert.t)
    if cert.delta != params.delta:
        return _fail("delta-mismatch")
    if cert.delta_squarefree != is_squarefree(cert.delta):
        return _fail("squarefree-flag-mismatch")
    curve, to_model = minimal_model(params)
    if cert.model != curve.provenance:
        return _fail("model-mismatch")
    ev = cert.evidence

    if cert.verdict == UNDECIDED:
        return VerifyResult(True, "undecided: nothing claimed")
    if cert.verdict == HYPOTHESIS_FAILED:
        return VerifyResult(True) if not cert.delta_squarefree else _fail("hypothesis-holds")
    if cert.verdict == COUNTEREXAMPLE and cert.t != 5 * cert.n**2:
        return _fail("counterexample-parameters")
    if cert.verdict == COUNTEREXAMPLE:
        if cert.branch != KNOWN_COUNTEREXAMPLE:
            return _fail("branch-mismatch")
        ce = ev["counterexample"]
        m, P = int(ce["m"]), Point(Fraction(ce["x"]), Fraction(ce["y"]))
        E = make_curve(params)
        if m < 2 or not E.contains(P.x, P.y):
            return _fail("counterexample-point-invalid")
        if scalar_mul(E, m, P) != Point(0, cert.n**3):
            return _fail("counterexample-identity-fails")
        return VerifyResult(True)
    if cert.verdict != NON_DIVISIBLE:
        return _fail("unknown-verdict")

    if not cert.delta_squarefree and cert.branch != ONLY_INTEGRAL_POINT:
        return _fail("non-divisible-without-hypothesis")
    P0 = to_model(Point(0, cert.n**3))
    egg = component_of(curve, P0) == EGG
    if ev.get("parity", {}).get("component") != (EGG if egg else "identity-component"):
        return _fail("parity-mismatch")

    if cert.branch == HEIGHT_GAP:
        if not egg or not in_height_gap_range(params):
            return _fail("height-gap-inapplicable")
        gap = ev["height_gap"]
        upper, lower = upper_bound_h0(params), lower_bound_hP(params)
        if not _close(_val(gap["h_upper"]), upper) or not _close(_val(gap["h_lower"]), lower):
            return _fail("height-bound-mismatch")
        if not _close(_val(gap["quotient"]), upper / lower) or not upper / lower < 9 or lower <= 0:
            return _fail("quotient-mismatch")
        return VerifyResult(True)

    if cert.branch == ONLY_INTEGRAL_POINT:
        if cert.n != 1 or cert.t > -2 or not egg:
            return _fail("only-integral-point-inapplicable")
        proof = _only_integral_point(params, curve)
        if proof is None or proof != {k: v for k, v in ev.items() if k != "parity"}:
            return _fail("only-integral-point-mismatch")
        return VerifyResult(True)

    if cert.branch == MODULAR_WITNESS:
        if ev.get("unwitnessed"):
            return _fail("unwitnessed-primes")
        bound = modular_bound(curve, P0)
        for key in ("C_E", "l_max"):
            if str(ev[key]) != bound[key]:
                return _fail(f"{key}-mismatch")
        for key in ("B_E", "log_min_delta"):
            if not _close(_val(ev[key]), _val(bound[key]), 1e-9):
                return _fail(f"{key}-mismatch")
        l_max = int(bound["l_max"])
        required = set(_odd_primes_upto(l_max) if egg else primes_up_to(max(l_max, 2)))
        seen = set()
        for w in ev["witnesses"]:
            l, p, r_p = int(w["l"]), int(w["p"]), int(w["r_p"])
            if not is_prime(l) or not is_prime(p):
                return _fail("witness-not-prime")
            if curve.discriminant % p == 0:
                return _fail("witness-bad-prime")
            if fp_group_info(curve, p).exponent != r_p:
                return _fail("witness-exponent-mismatch")
            if r_p % l != 0:
                return _fail("witness-l-does-not-divide")
            Ep = FpCurve(curve, p)
            if Ep.mul(r_p // l, reduce_mod_p(curve, P0, p)) is None:
                return _fail("witness-multiple-vanishes")
            seen.add(l)
        if not required <= seen:
            return _fail("missing-witness")
        return VerifyResult(True)

    return _fail("unknown-branch")


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepJob:
    n_min: int
    n_max: int
    t_min: int
    t_max: int
    out: Optional[Path] = None
    precision: int = DEFAULT_PRECISION
    prime_budget: int = DEFAULT_PRIME_BUDGET
    resume: bool = False

    def pairs(self) -> Iterator[tuple[int, int]]:
        for n in range(self.n_min, self.n_max + 1):
            for t in range(self.t_min, self.t_max + 1):
                if t != 0:
                    yield n, t


def _resume_cursor(path: Path) -> Optional[tuple[int, int]]:
    """(n, t) of the last complete record; a torn final line is cut off."""
    if not path.exists():
        return None
    data = path.read_bytes()
    end = data.rfind(b"\n")
    if end + 1 != len(data):
        with open(path, "r+b") as fh:
            fh.truncate(end + 1)
        data = data[: end + 1]
    lines = data.splitlines()
    if not lines:
        return None
    last = json.loads(lines[-1])
    return int(last["n"]), int(last["t"])


def certify_or_error(n: int, t: int, precision: int, prime_budget: int) -> Certificate:
    try:
        return certify(n, t, precision, prime_budget)
    except Exception as exc:  # noqa: BLE001 - one bad record must not stop a sweep
        delta = n * n * (n * n * 9 + 3 * t) + t * t
        return Certificate(
            n, t, delta, False, MODEL_E, UNDECIDED, None,
            {"error": f"{exc.__class__.__name__}: {exc}"}, _versions(n, t, precision, prime_budget),
        )


def sweep(job: SweepJob) -> Iterator[Certificate]:
    cursor = _resume_cursor(job.out) if (job.out is not None and job.resume) else None
    fh = None
    if job.out is not None:
        fh = open(job.out, "a" if job.resume else "w", encoding="utf-8")
    try:
        for n, t in job.pairs():
            if cursor is not None and (n, t) <= cursor:
                continue
            cert = certify_or_error(n, t, job.precision, job.prime_budget)
            if fh is not None:
                fh.write(cert.to_json() + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            yield cert
    finally:
        if fh is not None:
            fh.close()
