"""Exact makespan optimization by branch-and-bound, plus brute-force oracles.

`opt_makespan` minimizes the makespan over all n^m assignments.  The search
orders tasks by decreasing best-case time and prunes a node when

    max(current max load,
        (sum of loads + sum of remaining per-task minima) / n,
        largest remaining per-task minimum)

already reaches the incumbent beyond float dust.  Candidate values are always
re-evaluated by accumulating each machine's times in ascending task order --
the same arithmetic the brute-force twin and `model.loads` use -- so the two
solvers return bit-identical floats; the pruning comparison allows a 1e-9
relative margin so a node can never be cut by summation-order noise alone.
The masked variants restrict each task to an
eligibility set (used to scan the makespans reachable by a mechanism's
equilibrium winner sets); `objective="max"` finds the *worst* reachable
makespan instead.  Brute force twins are kept for cross-checking and refuse
anything past `budget` assignments.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import BudgetExceededError, Instance

BRUTE_FORCE_BUDGET = 10 ** 7


@dataclass(frozen=True)
class EligibilityMask:
    """allowed[j] = machines task j may be assigned to (each set nonempty)."""

    allowed: tuple

    def __post_init__(self):
        sets = tuple(frozenset(int(i) for i in s) for s in self.allowed)
        object.__setattr__(self, "allowed", sets)
        for j, s in enumerate(sets):
            if not s:
                raise ValueError(f"task {j} has an empty eligibility set")
            if any(i < 0 for i in s):
                raise ValueError(f"task {j} has a negative machine index")

    @property
    def m(self) -> int:
        return len(self.allowed)


def full_mask(inst: Instance) -> EligibilityMask:
    return EligibilityMask(tuple(frozenset(range(inst.n)) for _ in range(inst.m)))


def _dust(v: float) -> float:
    """Pruning margin that dominates summation-order noise but stays far
    below any genuine difference between two distinct assignment values."""
    return 1e-9 * (v if v > 1.0 else 1.0)


def _check_mask(inst: Instance, mask: EligibilityMask) -> None:
    if mask.m != inst.m:
        raise ValueError(f"mask covers {mask.m} tasks, instance has {inst.m}")
    for j, s in enumerate(mask.allowed):
        if max(s) >= inst.n:
            raise ValueError(f"task {j} allows machine {max(s)}, instance has {inst.n}")


def _greedy_assignment(inst: Instance, allowed) -> list:
    """Cheap feasible incumbent: place each task on the eligible machine whose
    load stays lowest."""
    loads = [0.0] * inst.n
    assign = [0] * inst.m
    for j in range(inst.m):
        best = min(allowed[j], key=lambda i: (loads[i] + inst.times[i][j], i))
        assign[j] = best
        loads[best] += inst.times[best][j]
    return assign


def opt_makespan_masked(inst: Instance, mask: EligibilityMask, objective: str = "min") -> tuple:
    """Best ("min") or worst ("max") makespan over mask-respecting assignments.

    Returns (value, witness assignment).  Ties in the witness are resolved
    deterministically (tasks scanned in a fixed order, machines ascending).
    """
    if objective not in ("min", "max"):
        raise ValueError("objective must be 'min' or 'max'")
    _check_mask(inst, mask)
    allowed = [sorted(s) for s in mask.allowed]

    if objective == "max":
        return _masked_max(inst, allowed)

    n, m = inst.n, inst.m
    times = inst.times
    # biggest best-case tasks first tightens the bound early
    order = sorted(range(m), key=lambda j: (-min(times[i][j] for i in allowed[j]), j))
    min_time = [min(times[i][j] for i in allowed[j]) for j in range(m)]
    suffix_sum = [0.0] * (m + 1)
    suffix_max = [0.0] * (m + 1)
    for d in range(m - 1, -1, -1):
        j = order[d]
        suffix_sum[d] = suffix_sum[d + 1] + min_time[j]
        suffix_max[d] = max(suffix_max[d + 1], min_time[j])

    assign = _greedy_assignment(inst, allowed)
    best_val = max(_loads_of(inst, assign))
    best_assign = list(assign)

    loads = [0.0] * n
    current = [0] * m

    def rec(depth: int, load_sum: float, load_max: float) -> None:
        nonlocal best_val, best_assign
        cut = best_val + _dust(best_val)
        bound = max(load_max, (load_sum + suffix_sum[depth]) / n, suffix_max[depth])
        if bound >= cut:
            return
        if depth == m:
            # canonical re-evaluation: the search accumulated loads in `order`,
            # which can differ from ascending-task sums by an ulp
            val = max(_loads_of(inst, current))
            if val < best_val:
                best_val = val
                best_assign = list(current)
            return
        j = order[depth]
        for i in allowed[j]:
            t = times[i][j]
            if max(load_max, loads[i] + t) >= cut:
                continue
            loads[i] += t
            current[j] = i
            rec(depth + 1, load_sum + t, max(load_max, loads[i]))
            loads[i] -= t
        current[j] = 0

    rec(0, 0.0, 0.0)
    return best_val, tuple(best_assign)


def _masked_max(inst: Instance, allowed) -> tuple:
    """Worst reachable makespan has a closed form: some machine ends up with its
    entire eligible set, and nothing else can beat that.  Witness: give that
    machine everything it may take; park the rest on their lowest eligible."""
    best_val = -1.0
    best_machine = 0
    for i in range(inst.n):
        total = sum(inst.times[i][j] for j in range(inst.m) if i in allowed[j])
        if total > best_val:
            best_val = total
            best_machine = i
    assign = []
    for j in range(inst.m):
        if best_machine in allowed[j]:
            assign.append(best_machine)
        else:
            assign.append(allowed[j][0])
    # a parked machine could in principle exceed the full-set machine
    val = max(_loads_of(inst, assign))
    return val, tuple(assign)


def _loads_of(inst: Instance, assign) -> list:
    loads = [0.0] * inst.n
    for j, i in enumerate(assign):
        loads[i] += inst.times[i][j]
    return loads


def opt_makespan(inst: Instance) -> tuple:
    """Minimum makespan over all n^m assignments; returns (value, witness)."""
    return opt_makespan_masked(inst, full_mask(inst), "min")


def brute_force_makespan(inst: Instance, mask: EligibilityMask | None = None,
                         objective: str = "min", budget: int = BRUTE_FORCE_BUDGET) -> tuple:
    """Exhaustive twin of the solvers above; refuses more than `budget` assignments."""
    if objective not in ("min", "max"):
        raise ValueError("objective must be 'min' or 'max'")
    mask = full_mask(inst) if mask is None else mask
    _check_mask(inst, mask)
    allowed = [sorted(s) for s in mask.allowed]
    count = 1
    for s in allowed:
        count *= len(s)
        if count > budget:
            raise BudgetExceededError(f"assignment space exceeds budget {budget}")
    better = (lambda a, b: a < b) if objective == "min" else (lambda a, b: a > b)
    best_val = None
    best_assign = None
    for assign in itertools.product(*allowed):
        val = max(_loads_of(inst, assign))
        if best_val is None or better(val, best_val):
            best_val = val
            best_assign = assign
    return best_val, tuple(best_assign)
