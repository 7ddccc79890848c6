"""Inefficiency ratios, frontier sweeps, and property checks.

Per-instance inefficiency of a mechanism is measured over its equilibrium
winner sets: the worst / best equilibrium makespan divided by the true
optimum.  Those per-instance ratios are *lower-bound evidence* for the
mechanism's price of anarchy / stability, never upper bounds: the analytic
bounds ((n-1)*alpha + 1 for the worst case, (n-1)/alpha + 1 for the best
case) are what the frontier sweep reports next to the measured values.

When the optimum is 0 and an equilibrium makespan is positive the ratio is
reported as inf (a mechanism wasting any time on a free instance is
unboundedly inefficient); 0/0 counts as 1.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .equilibria import (
    ENUMERATION_BUDGET,
    EquilibriumCertificate,
    Grid,
    achievable_winners,
    canonical_certificate,
    default_grid,
    enumerate_equilibria,
    verify_equilibrium,
)
from .instances import GeneratorSpec, gen_canonical, gen_circulant, regression_suite
from .model import Instance, MechanismId
from .optsolver import opt_makespan, opt_makespan_masked
from .rules import SingleTaskRule, rule_for

SQRT2 = math.sqrt(2.0)


def _ratio(value: float, opt: float) -> float:
    if opt > 0:
        return value / opt
    return 1.0 if value == 0 else math.inf


@dataclass(frozen=True)
class InefficiencyReport:
    mech: MechanismId
    opt: float
    worst_makespan: float
    best_makespan: float
    poa_ratio: float
    pos_ratio: float
    witnesses: dict

    def to_dict(self) -> dict:
        return {
            "mech": str(self.mech),
            "opt": self.opt,
            "worst_makespan": self.worst_makespan,
            "best_makespan": self.best_makespan,
            "poa_ratio": self.poa_ratio,
            "pos_ratio": self.pos_ratio,
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
        }


def inefficiency(mech: MechanismId, inst: Instance) -> InefficiencyReport:
    """Worst/best equilibrium makespan against the optimum, with witnesses.

    Because the rules are task-independent, every combination of per-task
    equilibrium winners is realized by some whole-profile equilibrium, so the
    worst and best equilibrium makespans are masked assignment optimizations
    over the winner sets.
    """
    mask = achievable_winners(mech, inst).to_mask()
    opt, opt_w = opt_makespan(inst)
    worst, worst_w = opt_makespan_masked(inst, mask, "max")
    best, best_w = opt_makespan_masked(inst, mask, "min")
    return InefficiencyReport(
        mech=mech,
        opt=opt,
        worst_makespan=worst,
        best_makespan=best,
        poa_ratio=_ratio(worst, opt),
        pos_ratio=_ratio(best, opt),
        witnesses={"opt": opt_w, "worst": worst_w, "best": best_w},
    )


# ---------------------------------------------------------------------------
# frontier sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontierPoint:
    alpha: float
    poa_bound: float
    pos_bound: float
    poa_emp: float
    pos_emp: float


def thread_count(threads: int | None = None) -> int:
    """Explicit argument, else MECHFRONT_THREADS (0 = auto), else cpu count."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("MECHFRONT_THREADS", "").strip()
    if env and env != "0":
        return max(1, int(env))
    return os.cpu_count() or 1


def default_frontier_suite(n: int, alpha: float) -> list:
    """Instances swept at one alpha: the stress pair at this alpha (the tilde
    member meets the worst-case bound exactly), a hat just past the
    mechanism's reach (tracks the best-case bound from below), the uniform
    square, and 20 seeded randoms."""
    a = alpha if alpha > 1 else 2.0
    specs = [
        GeneratorSpec("uniform", (("n", n),)),
        GeneratorSpec("tilde", (("n", n), ("alpha", a))),
        GeneratorSpec("hat", (("n", n), ("alpha", a))),
        GeneratorSpec("hat", (("n", n), ("alpha", alpha + 0.1))),
    ]
    for seed in range(1000, 1020):
        specs.append(GeneratorSpec("random", (("n", n), ("m", n + 1), ("seed", seed))))
    return specs


def frontier_sweep(n: int, alphas, suite=None, threads: int | None = None) -> list:
    """One FrontierPoint per alpha (caller order), empirical columns maxed
    over the suite.  `suite` is a list of GeneratorSpec shared by every alpha;
    by default it is rebuilt per alpha via `default_frontier_suite`."""
    if n < 2:
        raise ValueError("need n >= 2")
    alphas = [float(a) for a in alphas]
    if any(a < 1 for a in alphas):
        raise ValueError("alphas must be >= 1")
    workers = thread_count(threads)
    points = []
    for alpha in alphas:
        specs = default_frontier_suite(n, alpha) if suite is None else list(suite)
        insts = []
        for spec in specs:
            built = spec.build()
            if not isinstance(built, Instance):
                raise ValueError(f"generator {spec.name!r} does not produce an instance")
            insts.append(built)
        mech = MechanismId.spa(alpha)
        if workers > 1 and len(insts) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                reports = list(pool.map(lambda i: inefficiency(mech, i), insts))
        else:
            reports = [inefficiency(mech, i) for i in insts]
        points.append(FrontierPoint(
            alpha=alpha,
            poa_bound=(n - 1) * alpha + 1,
            pos_bound=(n - 1) / alpha + 1,
            poa_emp=max(r.poa_ratio for r in reports),
            pos_emp=max(r.pos_ratio for r in reports),
        ))
    return points


# ---------------------------------------------------------------------------
# robustness checks: monotone truth changes, anonymity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonotonicityResult:
    passed: bool
    trials: int
    direction: str
    failures: tuple  # (trial, task, machine, deviation, gain)


def monotonicity_check(mech: MechanismId, inst: Instance, cert: EquilibriumCertificate,
                       trials: int, seed: int, direction: str = "forward",
                       grid: Grid | None = None) -> MonotonicityResult:
    """Re-verify a certificate after sampled changes to the true times.

    forward: every won entry is scaled down (factor U(0,1)) and every lost
    non-sentinel entry scaled up (factor U(1,2)) -- the direction in which a
    pure equilibrium provably survives, so any failure is a bug.  reverse
    swaps the directions and is the negative control: it must be able to
    fail.  Bids never change; sentinel entries are left alone.
    """
    if direction not in ("forward", "reverse"):
        raise ValueError("direction must be 'forward' or 'reverse'")
    if grid is None:
        grid = default_grid(inst, mech)
    rule = rule_for(mech, inst.n)
    rng = np.random.default_rng(seed)
    n, m = inst.n, inst.m
    failures = []
    for trial in range(trials):
        # sample one modified truth matrix
        modified = [list(row) for row in inst.times]
        for i in range(n):
            for j in range(m):
                t = inst.times[i][j]
                if inst.is_sentinel(t):
                    continue
                won = cert.winner[j] == i
                u = rng.uniform()
                down = won if direction == "forward" else not won
                modified[i][j] = t * u if down else t * (1.0 + u)
        for j in range(m):
            col = tuple(modified[i][j] for i in range(n))
            bids = tuple(cert.profile[i][j] for i in range(n))
            res = verify_equilibrium(rule, col, bids, grid)
            if not res:
                failures.append((trial, j, res.machine, res.deviation, res.gain))
    return MonotonicityResult(not failures, trials, direction, tuple(failures))


@dataclass(frozen=True)
class AnonymityResult:
    passed: bool
    counterexample: tuple | None  # (true_times, permutation, winner)
    checked: int


def anonymity_check(rule: SingleTaskRule, true_vectors, grid: Grid) -> AnonymityResult:
    """Equilibrium winner sets must commute with relabeling the machines.

    For each vector t and permutation pi, a machine w winning some equilibrium
    of t must reappear as winner pi^{-1}(w) in the permuted vector's
    equilibria.  Exhaustive over tie-free fixtures; costs two enumerations
    per (vector, permutation).
    """
    n = rule.n
    checked = 0
    for vec in true_vectors:
        vec = tuple(float(x) for x in vec)
        if len(vec) != n:
            raise ValueError(f"vector {vec} does not match n={n}")
        base = enumerate_equilibria(rule, vec, grid).winner_union()
        for perm in itertools.permutations(range(n)):
            permuted = tuple(vec[perm[k]] for k in range(n))
            image = enumerate_equilibria(rule, permuted, grid).winner_union()
            checked += 1
            for w in base:
                if perm.index(w) not in image:
                    return AnonymityResult(False, (vec, perm, w), checked)
    return AnonymityResult(True, None, checked)


# ---------------------------------------------------------------------------
# probe matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeMatrix:
    """a[i][j] = largest probed time at which machine j still wins a task in
    some equilibrium while machine i is the unit-time fastest (0 on the
    diagonal and when no probe succeeded)."""

    a: tuple
    eps: float
    rule: str

    def within_bound(self, alpha: float) -> bool:
        n = len(self.a)
        limit = (n - 1) * alpha / SQRT2 + 1
        return all(0 < self.a[i][j] < limit
                   for i in range(n) for j in range(n) if i != j)


def probe_matrix(rule: SingleTaskRule, n: int, eps: float, grid: Grid,
                 budget: int = ENUMERATION_BUDGET) -> ProbeMatrix:
    """Climb a*= k*eps ladders per (fast, slow) pair and record the largest a
    whose canonical single-task vector still lets the slow machine win.

    The ladder stops after n consecutive failures past the rule's analytic
    reach (alpha for spa, 1 for fp) or at the grid cap; second price has no
    finite reach, so probing it saturates the cap.  Note fp can hold one grid
    step past 1 when the slow machine has the lower index (the tie-break
    protects it), so entries land within one step of the analytic boundary.
    """
    if rule.n != n:
        raise ValueError(f"rule is bound to n={rule.n}, not {n}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    kind = rule.id.kind
    reach = rule.id.alpha if kind == "spa" else (1.0 if kind == "fp" else None)
    cap = float(grid.points[-1])
    a = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            best = 0.0
            fails_past = 0
            k = 0
            while True:
                k += 1
                probe = k * eps
                if probe > cap + 1e-9:
                    break
                vec = gen_canonical(n, i, j, probe)
                hit = j in enumerate_equilibria(rule, vec, grid, budget).winner_union()
                if hit:
                    best = probe
                    fails_past = 0
                elif reach is None or probe > reach:
                    fails_past += 1
                    if fails_past >= n:
                        break
            a[i][j] = best
    return ProbeMatrix(tuple(tuple(r) for r in a), eps, str(rule.id))


# ---------------------------------------------------------------------------
# scalar inequality checks
# ---------------------------------------------------------------------------

def check_tech1(x: float, y: float, beta: float, gamma: float) -> bool:
    """(x + beta*y) / max(x, gamma*y) <= beta/gamma + 1 for x, y >= 0 not both 0."""
    if x < 0 or y < 0:
        raise ValueError("x and y must be >= 0")
    if not (beta > 0 and gamma > 0):
        raise ValueError("beta and gamma must be positive")
    denom = max(x, gamma * y)
    if denom == 0:
        raise ValueError("x and y cannot both be 0")
    return (x + beta * y) / denom <= beta / gamma + 1


class CombiPremiseError(ValueError):
    """The matrix/eps arguments violate the combinatorial bound's premises."""


def combi_row_best(a, i: int, eps: float) -> float:
    """max over nonempty subsets I of the other columns of |I| / (max_{j in I}
    a[i][j] + eps).  The maximizing subset of each size takes the smallest
    entries, so sorting the row suffices."""
    row = sorted(a[i][j] for j in range(len(a)) if j != i)
    return max((k + 1) / (row[k] + eps) for k in range(len(row)))


def check_combi(a, alpha: float, eps: float) -> tuple:
    """Some row i must beat (n-1)/(alpha*sqrt(2)) -- returns (ok, witness i).

    Premises (raising CombiPremiseError when violated): square matrix, zero
    diagonal, positive off-diagonal, every column sum strictly below
    (n-1)*alpha/sqrt(2), and 0 < eps <= alpha/((n-1)*sqrt(2)).
    """
    n = len(a)
    if n < 2 or any(len(row) != n for row in a):
        raise CombiPremiseError("need a square matrix, n >= 2")
    if not alpha > 0:
        raise CombiPremiseError("alpha must be positive")
    for i in range(n):
        if a[i][i] != 0:
            raise CombiPremiseError(f"diagonal entry a[{i}][{i}] must be 0")
        for j in range(n):
            if j != i and not a[i][j] > 0:
                raise CombiPremiseError(f"off-diagonal a[{i}][{j}] must be positive")
    col_limit = (n - 1) * alpha / SQRT2
    for j in range(n):
        s = sum(a[i][j] for i in range(n))
        if not s < col_limit:
            raise CombiPremiseError(
                f"column {j} sums to {s}, needs < (n-1)*alpha/sqrt(2) = {col_limit}"
            )
    if not 0 < eps <= alpha / ((n - 1) * SQRT2):
        raise CombiPremiseError(
            f"eps must be in (0, alpha/((n-1)*sqrt(2)) = {alpha / ((n - 1) * SQRT2)}]"
        )
    threshold = (n - 1) / (alpha * SQRT2)
    for i in range(n):
        if combi_row_best(a, i, eps) > threshold:
            return True, i
    return False, None


# ---------------------------------------------------------------------------
# named verification suites (shared by the CLI and the acceptance tests)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteReport:
    name: str
    passed: bool
    lines: tuple


def bucket_equivalence_check(alphas=(1.5, 2.0, 3.0), vectors_per_alpha: int = 50,
                             n: int = 3, seed: int = 2024, eps: float = 0.1,
                             budget: int = ENUMERATION_BUDGET) -> SuiteReport:
    """Exhaustive-enumeration ground truth for the spa winner sets.

    Draws positive grid-multiple vectors (entries in [0.1, 4.0]) and checks
    that the enumerated equilibrium winner set equals the closed bucket for
    every alpha.  Exact set equality, no tolerance.
    """
    rng = np.random.default_rng(seed)
    lines = []
    mismatches = 0
    for alpha in alphas:
        mech = MechanismId.spa(alpha)
        rule = rule_for(mech, n)
        for v in range(vectors_per_alpha):
            ks = rng.integers(1, 41, size=n)
            vec = tuple(float(k) * eps for k in ks)
            grid = default_grid(vec, mech, eps)
            enum = enumerate_equilibria(rule, vec, grid, budget).winner_union()
            t_min = min(vec)
            bucket = frozenset(i for i, t in enumerate(vec) if t <= alpha * t_min)
            if enum != bucket:
                mismatches += 1
                lines.append(
                    f"  mismatch alpha={alpha} vec={vec}: enumerated {sorted(enum)}, "
                    f"bucket {sorted(bucket)}"
                )
        lines.append(f"  alpha={alpha}: {vectors_per_alpha} vectors checked")
    return SuiteReport("buckets", mismatches == 0, tuple(lines))


MONOTONICITY_INSTANCES = (
    "uniform-2", "uniform-3", "tradeoff-3-1.5", "fp_pos-3-0.01", "hat-3-2",
    "tilde-3-2", "random-2x3-101", "random-3x4-201", "random-3x4-202",
    "random-3x5-301",
)


def monotonicity_suite(trials: int = 200, seed: int = 7,
                       direction: str = "forward") -> SuiteReport:
    """Canonical certificates for fp, sp, spa:2 on ten named instances, each
    re-verified under `trials` sampled truth modifications.  forward must be
    failure-free; reverse must produce at least one failure overall."""
    chosen = dict(regression_suite())
    mechs = (MechanismId.fp(), MechanismId.sp(), MechanismId.spa(2.0))
    lines = []
    total_failures = 0
    for label in MONOTONICITY_INSTANCES:
        inst = chosen[label]
        for mech in mechs:
            grid = default_grid(inst, mech)
            cert = canonical_certificate(mech, inst, grid)
            res = monotonicity_check(mech, inst, cert, trials, seed, direction, grid)
            total_failures += len(res.failures)
            lines.append(
                f"  {label} {mech}: {trials} trials, {len(res.failures)} failures"
            )
    if direction == "forward":
        passed = total_failures == 0
    else:
        passed = total_failures >= 1  # the negative control must fire
    return SuiteReport(f"monotonicity-{direction}", passed, tuple(lines))


def anonymity_suite() -> SuiteReport:
    """Tie-free two-machine fixtures for fp and spa:2."""
    fixtures = [
        (MechanismId.fp(), ((1.0, 2.0), (0.5, 1.5))),
        (MechanismId.spa(2.0), ((1.0, 1.9), (0.5, 1.2))),
    ]
    lines = []
    ok = True
    for mech, vectors in fixtures:
        rule = rule_for(mech, 2)
        entries = sorted({x for vec in vectors for x in vec})
        grid = Grid(0.1, max(4.0, 2 * max(entries) + 0.2), anchors=tuple(entries))
        res = anonymity_check(rule, vectors, grid)
        ok = ok and res.passed
        lines.append(f"  {mech}: {res.checked} permuted enumerations, "
                     f"{'ok' if res.passed else f'fails at {res.counterexample}'}")
    return SuiteReport("anonymity", ok, tuple(lines))


def tech1_fuzz(count: int = 100_000, seed: int = 13) -> SuiteReport:
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 10.0, size=count)
    ys = rng.uniform(0.0, 10.0, size=count)
    betas = rng.uniform(0.1, 10.0, size=count)
    gammas = rng.uniform(0.1, 10.0, size=count)
    for k in range(count):
        if xs[k] == 0.0 and ys[k] == 0.0:
            continue
        if not check_tech1(xs[k], ys[k], betas[k], gammas[k]):
            return SuiteReport("tech1", False,
                               (f"  fails at x={xs[k]} y={ys[k]} beta={betas[k]} "
                                f"gamma={gammas[k]}",))
    return SuiteReport("tech1", True, (f"  {count} random tuples hold",))


CIRCULANT_CASES = ((2, 2.0, 0.9), (3, 2.0, 0.6), (4, 1.5, 0.5), (5, 3.0, 0.4))


def combi_fuzz(count: int = 1000, seed: int = 17) -> SuiteReport:
    """Random premise-satisfying matrices must all satisfy the bound; the
    circulant family must satisfy it and attain it to 1e-9 at eps = 0."""
    rng = np.random.default_rng(seed)
    lines = []
    for k in range(count):
        n = int(rng.integers(2, 6))
        alpha = float(rng.uniform(1.0, 4.0))
        raw = rng.uniform(0.05, 1.0, size=(n, n))
        col_limit = (n - 1) * alpha / SQRT2
        a = [[0.0] * n for _ in range(n)]
        for j in range(n):
            col_sum = sum(raw[i][j] for i in range(n) if i != j)
            scale = col_limit * float(rng.uniform(0.3, 0.95)) / col_sum
            for i in range(n):
                if i != j:
                    a[i][j] = raw[i][j] * scale
        eps = alpha / ((n - 1) * SQRT2) * float(rng.uniform(0.1, 1.0))
        ok, _ = check_combi(a, alpha, eps)
        if not ok:
            return SuiteReport("combi", False,
                               (f"  bound fails on random matrix #{k} (n={n}, "
                                f"alpha={alpha})",))
    lines.append(f"  {count} random premise-satisfying matrices hold")
    for n, alpha, delta in CIRCULANT_CASES:
        a = gen_circulant(n, alpha, delta)
        eps = alpha / ((n - 1) * SQRT2)
        ok, _ = check_combi(a, alpha, eps)
        if not ok:
            return SuiteReport("combi", False,
                               (f"  circulant n={n} alpha={alpha} delta={delta} fails",))
        attained = max(combi_row_best(a, i, 0.0) for i in range(n))
        target = (n - 1) / (alpha * (SQRT2 - delta))
        if abs(attained - target) > 1e-9:
            return SuiteReport("combi", False,
                               (f"  circulant n={n} tightness off: {attained} vs {target}",))
        lines.append(f"  circulant n={n} alpha={alpha} delta={delta}: bound holds, "
                     f"eps=0 value within 1e-9 of {target:.6g}")
    return SuiteReport("combi", True, tuple(lines))


VERIFY_SUITES = {
    "buckets": lambda seed: bucket_equivalence_check(seed=seed),
    "monotonicity": lambda seed: monotonicity_suite(seed=seed),
    "monotonicity-reverse": lambda seed: monotonicity_suite(seed=seed, direction="reverse"),
    "anonymity": lambda seed: anonymity_suite(),
    "tech1": lambda seed: tech1_fuzz(seed=seed),
    "combi": lambda seed: combi_fuzz(seed=seed),
}
