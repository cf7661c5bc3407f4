"""Acceptance criteria 1-10.

Each ``check_criterion_N`` returns ``(ok, message)``. The pytest wrappers
print the message and assert ``ok``; running this file directly prints one
PASS/FAIL line per criterion.
"""

import functools
import json
import math
import os
import subprocess
import sys
import tempfile
import time
from fractions import Fraction

import numpy as np

from freqlab.builder import (
    Schedules,
    construct_extreme,
    construct_for_curve,
    construct_polytope_boundary,
    extreme_endpoints,
    extreme_phi,
    global_bound_check,
    pre_dynkin_counterexample,
    von_mises_doubling,
)
from freqlab.credal import (
    CredalSet,
    coherence_check,
    gbr_credal,
    gbr_root,
    upper_prevision,
)
from freqlab.frequency import (
    TailPolicy,
    cluster_point_estimate,
    conditional_upper_prevision_estimate,
    conditional_window,
    event_window,
    liminf_estimate,
    limsup_estimate,
    lower_probability_estimate,
    restricted_functional,
    upper_prevision_estimate,
)
from freqlab.sequence import SymbolSequence, read_sequence
from freqlab.setsystems import (
    SetSystem,
    atoms_of,
    generate_field,
    generate_pre_dynkin,
    is_field,
    is_pi_system,
    is_pre_dynkin,
    measure,
    uniqueness_check,
)
from freqlab.simplex import (
    SIMPLEX_AREA_2D,
    Lemniscate,
    convex_hull_2d,
    polygon_area,
    ternary_xy,
)

SEED = int(os.environ.get("FREQLAB_SEED", "20240917"))


def _rng(criterion: int) -> np.random.Generator:
    return np.random.default_rng([SEED, criterion])


# --------------------------------------------------------------- 1


def check_criterion_1():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "lem.txt")
        cmd = [sys.executable, "-m", "freqlab", "construct", "--curve", "lemniscate3",
               "--V", "30", "--T", "12", "--generations", "2", "--out", out]
        t0 = time.perf_counter()
        proc = subprocess.run(cmd, capture_output=True, text=True)
        elapsed = time.perf_counter() - t0
        if proc.returncode != 0:
            return False, f"construct exited {proc.returncode}: {proc.stderr.strip()}"
        summary = json.loads(proc.stdout)
        n = len(read_sequence(out))
        with open(out + ".trace.jsonl") as fh:
            records = [json.loads(line) for line in fh]
    k, bad = 3, 0
    for rec in records:
        if rec.get("skipped"):
            continue
        endpoint_bound = 4 * rec["T"] / rec["n_start"] + k / rec["T"]
        within_bound = (2 * rec["T"] + k) / rec["n_start"]
        bad += rec["endpoint_error"] > endpoint_bound + 1e-12
        bad += rec["within_deviation"] > within_bound + 1e-12
        bad += bool(rec["violations"])
    ok_time = elapsed < 10
    ok_len = 4 * 10**4 <= n <= 2 * 10**5
    ok_bounds = bad == 0 and summary["bound_violations"] == 0
    msg = (f"time {elapsed:.2f}s (<10: {ok_time}), length {n} in [4e4, 2e5]: {ok_len}, "
           f"bound violations {bad} over {len(records)} segments")
    return ok_time and ok_len and ok_bounds, msg


# --------------------------------------------------------------- 2


def check_criterion_2():
    sched = Schedules("linear", 30, "sqrt")
    curve = Lemniscate()
    run = construct_for_curve(curve, sched, generations=4)
    rep = global_bound_check(run, curve, sched)
    msg = (f"length {len(run.sequence)}, {rep.checked} tail points checked, "
           f"{rep.violations} violations, psi_bar {rep.psi_bar:.2e}, worst ratio {rep.worst_ratio:.3f}, "
           f"segment violations {len(run.violations)}")
    return rep.violations == 0 and not run.violations and rep.checked > 0, msg


# --------------------------------------------------------------- 3


def check_criterion_3():
    seq = von_mises_doubling(2**20)
    policy = TailPolicy(beta=0.5)
    N = len(seq)
    idx = np.arange(1, N + 1)
    freq2 = seq.prefix_counts[1:, 1] / idx
    lo = liminf_estimate(freq2, policy)
    hi = limsup_estimate(freq2, policy)
    centres = cluster_point_estimate(seq, policy, eps=0.05)[:, 1]
    c_lo, c_hi = centres.min(), centres.max()
    ok_window = abs(lo - 1 / 3) <= 0.01 and abs(hi - 2 / 3) <= 0.01
    ok_clusters = abs(c_lo - 1 / 3) <= 0.05 and abs(c_hi - 2 / 3) <= 0.05
    msg = (f"liminf {lo:.5f} (1/3+-0.01), limsup {hi:.5f} (2/3+-0.01), "
           f"cluster centres span [{c_lo:.4f}, {c_hi:.4f}]")
    return ok_window and ok_clusters, msg


# --------------------------------------------------------------- 4


def _identity_sequences(rng):
    lem = construct_for_curve(Lemniscate(), Schedules("const", 30, "const", 12), generations=2)
    return [
        lem.sequence,
        von_mises_doubling(2**16),
        construct_extreme(3, 1.5, 5),
        SymbolSequence(5, rng.integers(1, 6, 10**5)),
        pre_dynkin_counterexample(2**16),
    ]


def check_criterion_4(total=10**6):
    rng = _rng(4)
    seqs = _identity_sequences(rng)
    per = -(-total // len(seqs))
    identity_bad = step_bad = checked = 0
    worst_step = 0.0
    for seq in seqs:
        N, k = len(seq), seq.k
        n = rng.integers(1, N, per)
        m = rng.integers(1, N - n + 1)
        pc = seq.prefix_counts.astype(np.int64)
        # counts in x(n+1..n+m), found independently from symbol positions
        block = np.empty((per, k), dtype=np.int64)
        for j in range(k):
            pos = np.flatnonzero(seq.symbols == j + 1) + 1
            block[:, j] = np.searchsorted(pos, n + m, "right") - np.searchsorted(pos, n, "right")
        identity_bad += int(np.count_nonzero((pc[n + m] != pc[n] + block).any(axis=1)))
        r0 = pc[n] / n[:, None]
        r1 = pc[n + 1] / (n + 1)[:, None]
        step = np.linalg.norm(r1 - r0, axis=1)
        step_bad += int(np.count_nonzero(step > 2 / (n + 1) + 1e-12))
        worst_step = max(worst_step, float((step * (n + 1)).max()))
        checked += per
    msg = (f"{checked} triples over {len(seqs)} sequences: {identity_bad} integer identity "
           f"failures, {step_bad} step bound failures, worst (n+1)*step {worst_step:.4f}")
    return identity_bad == 0 and step_bad == 0, msg


# --------------------------------------------------------------- 5


def _random_polytope(rng):
    # vertices on a small circle inside the plane of the simplex, in angular order
    u = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    w = np.array([1.0, 1.0, -2.0]) / math.sqrt(6)
    centre = 0.7 * rng.dirichlet([4, 4, 4]) + 0.1
    m = int(rng.integers(1, 6))
    angles = np.sort(rng.uniform(0, 2 * math.pi, m))
    radius = 0.05 * rng.uniform(0.3, 1.0, m)
    return centre + radius[:, None] * (np.cos(angles)[:, None] * u + np.sin(angles)[:, None] * w)


@functools.lru_cache(maxsize=None)
def _polytope_runs(count=20):
    rng = _rng(5)
    out = []
    for _ in range(count):
        verts = _random_polytope(rng)
        run = construct_polytope_boundary(verts, Schedules(), max_length=10**6)
        out.append((verts, run))
    return tuple(out)


def check_criterion_5():
    rng = _rng(55)
    policy = TailPolicy(beta=0.5)
    worst, failures, total = 0.0, 0, 0
    for verts, run in _polytope_runs():
        C = CredalSet(verts)
        for _ in range(20):
            X = rng.uniform(-1, 1, 3)
            err = abs(upper_prevision_estimate(run.sequence, X, policy) - upper_prevision(C, X).value)
            worst = max(worst, err)
            failures += err > 0.02
            total += 1
    msg = f"{total} (polytope, gamble) pairs, worst |estimate - envelope| {worst:.4f}, {failures} over 0.02"
    return failures == 0, msg


# --------------------------------------------------------------- 6


def check_criterion_6():
    rng = _rng(6)
    done, worst = 0, 0.0
    while done < 10**4:
        k = int(rng.integers(2, 7))
        C = CredalSet(rng.dirichlet(np.ones(k), size=int(rng.integers(1, 7))))
        B = rng.random(k) < 0.6
        if not B.any() or (C.points @ B).min() < 0.05:
            continue
        X = rng.normal(size=k) * rng.uniform(0.1, 10)
        worst = max(worst, abs(gbr_root(C.functional(), X, B) - gbr_credal(C, X, B)))
        done += 1
    ok_oracle = worst <= 1e-8

    policy = TailPolicy(beta=0.5)
    seq_worst, seq_total = 0.0, 0
    for verts, run in _polytope_runs():
        C = CredalSet(verts)
        for _ in range(5):
            B = rng.random(3) < 0.6
            if not B.any() or (C.points @ B).min() < 0.05:
                continue
            X = rng.uniform(-1, 1, 3)
            est = conditional_upper_prevision_estimate(run.sequence, X, B, policy)
            seq_worst = max(seq_worst, abs(est - gbr_credal(C, X, B)))
            seq_total += 1
    ok_seq = seq_total > 0 and seq_worst <= 0.02
    msg = (f"{done} oracle instances, worst |root - credal| {worst:.2e}; "
           f"{seq_total} sequence instances, worst conditional gap {seq_worst:.4f}")
    return ok_oracle and ok_seq, msg


# --------------------------------------------------------------- 7


def check_criterion_7():
    rng = _rng(7)
    failures, total = [], 0
    for _ in range(100):
        k = int(rng.integers(2, 7))
        C = CredalSet(rng.dirichlet(np.ones(k), size=int(rng.integers(1, 8))))
        samples = [
            (rng.normal(size=k) * 3, rng.normal(size=k) * 3, rng.uniform(0, 10), rng.normal() * 5)
            for _ in range(1000)
        ]
        rep = coherence_check(C.functional(), samples, tol=1e-10)
        total += len(samples)
        if not rep.ok:
            failures.append(rep.axiom)
    seq = von_mises_doubling(2**16)
    B = [2]
    lower_B = lower_probability_estimate(seq, B)
    X = -np.ones(2)
    wrong = coherence_check(restricted_functional(seq, B), [(X, X, 1.0, 0.0)])
    ok_wrong = lower_B < 1 and not wrong.ok and wrong.axiom == "UP1"
    msg = (f"{total} samples on credal envelopes, {len(failures)} failures; restricted functional "
           f"with lower P(B) {lower_B:.4f} fails {wrong.axiom}")
    return not failures and ok_wrong, msg


# --------------------------------------------------------------- 8


def check_criterion_8():
    rng = _rng(8)
    # every system on 3 points that contains Omega
    full3 = 7
    others = [m for m in range(8) if m != full3]
    bad3 = 0
    for bits in range(1 << len(others)):
        S = SetSystem(3, [full3] + [m for j, m in enumerate(others) if bits >> j & 1])
        bad3 += is_field(S) != (is_pre_dynkin(S) and is_pi_system(S))
    n3 = 1 << len(others)

    bad5 = fields5 = 0
    for i in range(10**4):
        if i % 2:
            # closures of a few random sets, so that fields actually occur
            H = rng.integers(0, 32, int(rng.integers(0, 4))).tolist()
            S = generate_field(5, H) if i % 4 == 1 else generate_pre_dynkin(5, H)
        else:
            S = SetSystem(5, np.flatnonzero(rng.random(32) < rng.random()).tolist())
        f = is_field(S)
        fields5 += f
        bad5 += f != (is_pre_dynkin(S) and is_pi_system(S))

    pis = bad4 = 0
    for bits in range(1, 1 << 16):
        H = SetSystem(4, [m for m in range(16) if bits >> m & 1])
        if not is_pi_system(H):
            continue
        pis += 1
        bad4 += generate_pre_dynkin(4, H) != generate_field(4, H)

    uniq_bad = 0
    for _ in range(10**3):
        omega = int(rng.integers(2, 7))
        H = set(rng.integers(1, 1 << omega, int(rng.integers(1, 5))).tolist())
        while True:
            meets = {a & b for a in H for b in H} - H
            if not meets:
                break
            H |= meets
        H = SetSystem(omega, H)
        P = rng.dirichlet(np.ones(omega))
        Q = P.copy()
        # move mass around inside each atom of the generated field
        for atom in atoms_of(omega, H):
            elems = [i for i in range(omega) if atom >> i & 1]
            Q[elems] = measure(P, atom) * rng.dirichlet(np.ones(len(elems)))
        agree = max(abs(measure(P, a) - measure(Q, a)) for a in H) <= 1e-12
        uniq_bad += not (agree and uniqueness_check(P, Q, H))
    ok = bad3 == 0 and bad5 == 0 and bad4 == 0 and uniq_bad == 0
    msg = (f"|Omega|=3: {bad3}/{n3} mismatches; |Omega|=5: {bad5}/10000 mismatches "
           f"({fields5} fields); |Omega|=4: {bad4}/{pis} Pi-systems with PD != field; "
           f"uniqueness: {uniq_bad}/1000 failures")
    return ok, msg


# --------------------------------------------------------------- 9


def check_criterion_9():
    seq = pre_dynkin_counterexample(2**20)
    policy = TailPolicy(beta=0.5)
    N, k = len(seq), seq.k
    # fixed labels 2, 4, ..., 18; labels near the end of the prefix are
    # still inside their first block and cannot have settled yet
    singles = {}
    for label in range(2, 19, 2):
        mask = np.zeros(k, dtype=bool)
        mask[label - 1] = True
        singles[label] = event_window(seq, mask, policy).width
    evens = np.arange(1, k + 1) % 2 == 0
    union = event_window(seq, evens, policy).width
    ok_singles = all(w <= 1000 / N for w in singles.values())
    ok_union = union >= 0.2

    rng = _rng(9)
    cond_worst, cond_total = 0.0, 0
    for _ in range(100):
        p, kk = int(rng.integers(2, 9)), 3
        pattern = rng.integers(1, kk + 1, p)
        s = SymbolSequence(kk, np.tile(pattern, 10**5 // p + 1)[: 10**5])
        B = rng.random(kk) < 0.6
        A = rng.random(kk) < 0.5
        inB = B[pattern - 1]
        if not inB.any():
            continue
        target = Fraction(int((A[pattern - 1] & inB).sum()), int(inB.sum()))
        w = conditional_window(s, A, B, policy)
        err = max(abs(w.lower - target), abs(w.upper - target)) * w.start
        cond_worst = max(cond_worst, float(err))
        cond_total += 1
    ok_cond = cond_worst <= 2
    msg = (f"N={N}: max singleton width {max(singles.values()):.2e} (<= 1000/N = {1000 / N:.2e}: "
           f"{ok_singles}), union-of-evens width {union:.4f} (>= 0.2: {ok_union}); "
           f"periodic conditional worst error {cond_worst:.3f}/start over {cond_total} cases")
    return ok_singles and ok_union and ok_cond, msg


# -------------------------------------------------------------- 10


def check_criterion_10():
    k, alpha = 3, 1.5
    S = next(s for s in range(1, 64) if extreme_phi(alpha, s) >= 10**6)
    seq = construct_extreme(k, alpha, S)
    ends = extreme_endpoints(k, alpha, S)
    eye = np.eye(k)
    approach = []
    for i in range(k):
        d = [np.linalg.norm(eye[i] - seq.relative_frequency(n))
             for s, (n, _) in enumerate(ends) if s % k == i]
        approach.append(min(d))
    ok_vertices = bool(max(approach) <= 0.05)
    # the tail is the last k segments; inside a run the path is straight,
    # so the hull of all tail points is the hull of the run boundaries
    start = extreme_phi(alpha, S - k)
    corners = [start] + [n for n, _ in ends if n > start]
    r = np.array([seq.relative_frequency(n) for n in corners])
    ratio = polygon_area(convex_hull_2d(ternary_xy(r))) / SIMPLEX_AREA_2D
    ok_hull = bool(ratio >= 0.95)
    msg = (f"S={S}, length {len(seq)}: closest approach to e1..e3 "
           f"{', '.join(f'{d:.4f}' for d in approach)} (<= 0.05: {ok_vertices}); "
           f"tail hull covers {ratio:.3f} of the simplex (>= 0.95: {ok_hull})")
    return ok_vertices and ok_hull, msg


# ------------------------------------------------------------ pytest


def _run(check):
    ok, msg = check()
    print(msg)
    assert ok, msg


def test_criterion_1_lemniscate_cli():
    _run(check_criterion_1)


def test_criterion_2_global_bound():
    _run(check_criterion_2)


def test_criterion_3_doubling_sequence():
    _run(check_criterion_3)


def test_criterion_4_exact_identities():
    _run(check_criterion_4)


def test_criterion_5_polytope_converse():
    _run(check_criterion_5)


def test_criterion_6_gbr_equivalence():
    _run(check_criterion_6)


def test_criterion_7_coherence():
    _run(check_criterion_7)


def test_criterion_8_set_systems():
    _run(check_criterion_8)


def test_criterion_9_precision_system():
    _run(check_criterion_9)


def test_criterion_10_extreme_case():
    _run(check_criterion_10)


if __name__ == "__main__":
    checks = [check_criterion_1, check_criterion_2, check_criterion_3, check_criterion_4,
              check_criterion_5, check_criterion_6, check_criterion_7, check_criterion_8,
              check_criterion_9, check_criterion_10]
    failed = 0
    for i, check in enumerate(checks, 1):
        t0 = time.perf_counter()
        ok, msg = check()
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  criterion {i}: {msg} [{time.perf_counter() - t0:.1f}s]",
              flush=True)
    sys.exit(1 if failed else 0)
