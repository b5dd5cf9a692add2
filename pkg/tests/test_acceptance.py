"""One test per acceptance criterion.  Each records a single pass/fail line
that is echoed in the terminal summary."""

import math
import time
from contextlib import contextmanager

import numpy as np

from chainbell import chained, randomness, robustness, selftest
from chainbell.chained import max_violation, optimal_realization
from conftest import ACCEPTANCE_LINES


@contextmanager
def criterion(number, title, limit_s=None):
    start = time.perf_counter()
    state = {"detail": ""}
    ok = False
    try:
        yield state
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        in_time = limit_s is None or elapsed < limit_s
        verdict = "PASS" if ok and in_time else "FAIL"
        limit = f" (limit {limit_s:g} s)" if limit_s is not None else ""
        line = f"criterion {number} {verdict}: {title}; {state['detail']} [{elapsed:.2f} s{limit}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
    assert in_time, f"criterion {number} took {elapsed:.2f} s, limit {limit_s} s"


def test_criterion_1_quantum_maxima():
    with criterion(1, "quantum maxima 2n cos(pi/2n), n = 2..16", 1.0) as c:
        worst = 0.0
        for n in range(2, 17):
            achieved = chained.bell_value(optimal_realization(n))
            worst = max(worst, abs(achieved - 2 * n * math.cos(math.pi / (2 * n))))
        assert abs(max_violation(2) - 2.8284271247) < 1e-10
        assert abs(max_violation(3) - 5.1961524227) < 1e-10
        assert worst < 1e-9
        c["detail"] = f"max |achieved - formula| = {worst:.2e}"


def test_criterion_2_classical_bounds():
    with criterion(2, "brute-force classical bounds", 30.0) as c:
        got = {n: chained.classical_bound_bruteforce(n) for n in range(2, 13)}
        assert got == {n: 2 * n - 2 for n in range(2, 13)}
        for n in (2, 4):
            p = randomness.modified_bell_polynomial(n)
            assert chained.classical_max_bruteforce(p) == 2 * n - 1
        c["detail"] = "2n-2 for n = 2..12, 2n-1 (modified) for n = 2, 4"


def test_criterion_3_sos_certificates():
    with criterion(3, "SOS certificates symbolic and numeric", 60.0) as c:
        sym, ident, num = 0.0, 0.0, 0.0
        for n in range(2, 9):
            terms = chained.sos_terms_first(n)
            sym = max(sym, chained.sos_residual(terms, n))
            ident = max(ident, abs(chained.expand_terms(terms, n).identity_coefficient() - max_violation(n)))
            for dim in (2, 3, 4):
                for seed in range(5):
                    r = chained.random_realization(n, dim, 1000 * dim + seed)
                    num = max(num, chained.sos_numeric_residual(terms, r))
        for n in range(2, 7):
            terms = chained.sos_terms_second(n)
            sym = max(sym, chained.sos_residual(terms, n))
            ident = max(ident, abs(chained.expand_terms(terms, n).identity_coefficient() - max_violation(n)))
            ident = max(ident, abs(chained.second_degree_identity_coefficient(n) - max_violation(n)))
            for dim in (2, 3, 4):
                for seed in range(5):
                    r = chained.random_realization(n, dim, 2000 * dim + seed)
                    num = max(num, chained.sos_numeric_residual(terms, r))
        assert sym < 1e-10 and ident < 1e-10 and num < 1e-9
        c["detail"] = f"symbolic {sym:.1e}, identity {ident:.1e}, numeric {num:.1e}"


def test_criterion_4_component_identities():
    with criterion(4, "sums of squared alpha, beta, gamma, n = 3..32") as c:
        worst = 0.0
        for n in range(3, 33):
            a, b, g = chained.delta_sums(n)
            c2 = math.cos(math.pi / (2 * n)) ** 2
            worst = max(
                worst,
                abs(a - math.cos(math.pi / n) / (2 * c2)),
                abs(b - (n - 1) * math.cos(math.pi / n) / (4 * c2)),
                abs(g - (n - 1) * math.cos(math.pi / n) / (4 * c2)),
            )
        assert worst < 1e-10
        c["detail"] = f"max deviation {worst:.1e}"


def test_criterion_5_selftest_exactness():
    with criterion(5, "exact self-testing incl. local unitaries and junk", 30.0) as c:
        dist, fid_gap = 0.0, 0.0
        for n in range(2, 11):
            base = optimal_realization(n)
            cases = [base] + [
                selftest.locally_rotated(base, seed=100 * n + k, junk_dims=jd)
                for k, jd in enumerate([(1, 1), (2, 1), (1, 3), (3, 3)])
            ]
            for r in cases:
                rep = selftest.theorem1_distances(r)
                dist = max(dist, rep.max_distance)
                fid_gap = max(fid_gap, 1 - rep.fidelity)
        assert dist < 1e-8 and fid_gap < 1e-9
        c["detail"] = f"max distance {dist:.1e}, 1 - fidelity {fid_gap:.1e}"


def test_criterion_6_exact_identities():
    with criterion(6, "exact-case identity residuals, n = 3..10") as c:
        worst = 0.0
        for n in range(3, 11):
            worst = max(worst, max(selftest.exact_identity_diagnostics(optimal_realization(n)).values()))
        assert worst < 1e-8
        c["detail"] = f"max residual {worst:.1e}"


LEMMA_FAMILIES = ("align_A", "align_B", "abg", "chain_same", "chain_shift", "match", "regularized")


def test_criterion_7_robustness_soundness():
    with criterion(7, "robustness bounds sound on perturbed realizations", 120.0) as c:
        jitters = (0.005, 0.02, 0.05)
        checked, counts, lemma_bad = 0, {robustness.HOLDS: 0, robustness.VACUOUS: 0, robustness.VIOLATED: 0}, []
        for n in (3, 4, 5, 6, 8):
            for seed in range(21):
                r = robustness.perturbed_realization(n, jitters[seed % 3], seed)
                rep = robustness.empirical_check(r)
                for v in rep.verdicts.values():
                    counts[v] += 1
                for label, (res, bound) in robustness.diagnostics_check(r).items():
                    if label.split(":")[0] in LEMMA_FAMILIES and res > bound:
                        lemma_bad.append((n, seed, label))
                checked += 1
        ns = [8, 16, 32]
        slope = robustness.loglog_slope(ns, [robustness.f_bounds(1e-6, n).f_state for n in ns])
        assert checked >= 100
        assert counts[robustness.VIOLATED] == 0
        assert not lemma_bad, lemma_bad[:5]
        assert abs(slope - 2) <= 0.3
        c["detail"] = (
            f"{checked} realizations, verdicts {counts}, lemma residuals over bound {len(lemma_bad)}, "
            f"f_state slope {slope:.3f}"
        )


def test_criterion_8_randomness():
    with criterion(8, "uniform certified table and two bits", 1.0) as c:
        worst_p, worst_h = 0.0, 0.0
        for n in (2, 4):
            t = randomness.certified_distribution(randomness.optimal_modified_realization(n))
            worst_p = max(worst_p, float(np.abs(t.probs - 0.25).max()))
            worst_h = max(worst_h, abs(randomness.min_entropy(t) - 2.0))
        assert worst_p < 1e-9 and worst_h < 1e-7
        c["detail"] = f"max |p - 1/4| {worst_p:.1e}, |H - 2| {worst_h:.1e}"


def test_criterion_9_uniqueness():
    with criterion(9, "independent exact realizations share correlations") as c:
        worst = 0.0
        for n in (3, 4, 5):
            first = selftest.correlation_table(optimal_realization(n))
            other = selftest.locally_rotated(optimal_realization(n), seed=7 * n, junk_dims=(2, 3))
            worst = max(worst, float(np.abs(first - selftest.correlation_table(other)).max()))
        assert worst < 1e-9
        c["detail"] = f"max table difference {worst:.1e}"
