"""Instance generators, file formats, and the shared regression suite.

The named families reproduce the worked examples the analysis module leans
on:

  uniform     -- n machines, n^2 unit tasks; every mechanism's worst
                 equilibrium parks everything on one machine.
  thm3_hat    -- rewrites a uniform instance around one of its equilibrium
                 assignments: the chosen machine keeps unit times on a marked
                 task set T and gets zeros on the rest of its won tasks, so
                 the old equilibrium allocation stays achievable while the
                 optimum collapses to 1.
  tradeoff    -- one flexible machine that can cover for everyone at cost
                 rho-1, n-1 specialists; equilibria trade makespan against
                 payments as rho grows.
  fp_pos      -- near-tied columns: first price keeps every task on machine 0
                 while the optimum spreads them at 1+eps, pushing the
                 best-equilibrium ratio toward n as eps -> 0.
  hat / tilde -- the reserve-price stress pair: n-1 specialist tasks the last
                 machine can also run, plus one task only the last machine
                 runs.  tilde makes the last machine slower by factor alpha
                 (worst equilibria pile onto it); hat makes the specialists
                 slower by alpha (bucket membership flips with the
                 mechanism's own alpha).
  canonical   -- a single task's bid-vector scaffold: time 1 on one machine,
                 a on another, sentinels elsewhere (probe ladders).
  circulant   -- a plain matrix (not an Instance) hitting the combinatorial
                 bound's premises with equality margin delta.
  random      -- seeded grid-multiple entries in [lo, hi].

Machine and task indices are 0-based everywhere.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .model import DEFAULT_BIG, Instance


def gen_uniform(n: int, big: float = DEFAULT_BIG) -> Instance:
    """n machines, n^2 tasks, every true time 1."""
    if n < 2:
        raise ValueError("need n >= 2")
    return Instance(tuple((1.0,) * (n * n) for _ in range(n)), big)


def gen_thm3_hat(inst: Instance, assignment, k: int, T_k) -> Instance:
    """Zero out machine k's won tasks outside T_k (|T_k| = n, T_k won by k).

    `inst` must be a uniform instance and `assignment` one of its
    assignments; the image has optimum 1 while the input assignment's
    allocation survives as an equilibrium allocation.
    """
    n, m = inst.n, inst.m
    if m != n * n or any(x != 1.0 for row in inst.times for x in row):
        raise ValueError("thm3_hat starts from a uniform instance")
    assignment = tuple(int(a) for a in assignment)
    if len(assignment) != m or any(not 0 <= a < n for a in assignment):
        raise ValueError("assignment must place every task on a machine")
    if not 0 <= k < n:
        raise ValueError(f"machine {k} out of range")
    T_k = frozenset(int(j) for j in T_k)
    if len(T_k) != n:
        raise ValueError(f"T_k must contain exactly n = {n} tasks")
    S_k = {j for j, a in enumerate(assignment) if a == k}
    if not T_k <= S_k:
        raise ValueError("T_k must be a subset of the tasks assignment gives machine k")
    times = [[1.0] * m for _ in range(n)]
    for j, i in enumerate(assignment):
        if not (i == k and j in T_k):
            times[i][j] = 0.0
    return Instance(tuple(tuple(r) for r in times), inst.big)


def gen_tradeoff(n: int, rho: float, big: float = DEFAULT_BIG) -> Instance:
    """Flexible machine 0 (n-1 on its own task, rho-1 on the others) plus
    n-1 specialists (n-1 on their task, sentinel elsewhere)."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not rho > 1:
        raise ValueError("need rho > 1")
    if big < rho * (n - 1):
        raise ValueError(f"big={big} must be at least rho*(n-1)={rho * (n - 1)}")
    row0 = [float(n - 1)] + [rho - 1] * (n - 1)
    times = [tuple(row0)]
    for i in range(1, n):
        row = [big] * n
        row[i] = float(n - 1)
        times.append(tuple(row))
    return Instance(tuple(times), big)


def gen_fp_pos(n: int, eps: float, big: float = DEFAULT_BIG) -> Instance:
    """Machine 0 runs all n tasks at 1; machine i >= 1 runs task i-1 at 1+eps.

    First price keeps every task on machine 0 (it is strictly fastest), so
    the best equilibrium makespan is n while the optimum spreads tasks at
    1+eps; the ratio n/(1+eps) climbs to n as eps shrinks.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not eps > 0:
        raise ValueError("need eps > 0")
    times = [(1.0,) * n]
    for i in range(1, n):
        row = [big] * n
        row[i - 1] = 1.0 + eps
        times.append(tuple(row))
    return Instance(tuple(times), big)


def gen_canonical(n: int, fast: int, slow: int, a: float, big: float = DEFAULT_BIG) -> tuple:
    """Single-task true-time vector: 1 at `fast`, `a` at `slow`, sentinels
    (big + index) elsewhere.  Returns the vector, not an Instance."""
    if n < 2:
        raise ValueError("need n >= 2")
    if fast == slow or not (0 <= fast < n and 0 <= slow < n):
        raise ValueError("fast and slow must be distinct machine indices")
    if not a > 0:
        raise ValueError("need a > 0")
    vec = [big + i for i in range(n)]
    vec[fast] = 1.0
    vec[slow] = float(a)
    return tuple(vec)


def gen_hat(n: int, alpha: float, variant: str, big: float = DEFAULT_BIG) -> Instance:
    """The reserve-price stress pair (variant "tilde" or "hat").

    Both have n-1 specialist tasks plus one task only machine n-1 can run.
    tilde: specialists at 1, machine n-1 at alpha on their tasks, 1 on its
    own -- its bucket membership lets worst equilibria pile (n-1)*alpha + 1
    onto it.  hat: specialists at alpha, machine n-1 at 1 on their tasks,
    alpha on its own -- whether the specialists stay winnable depends on the
    mechanism's multiplier, which is what pins the best equilibrium.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not alpha > 1:
        raise ValueError("need alpha > 1")
    if variant not in ("tilde", "hat"):
        raise ValueError("variant must be 'tilde' or 'hat'")
    spec_t, last_t = (1.0, float(alpha)) if variant == "tilde" else (float(alpha), 1.0)
    times = []
    for i in range(n - 1):
        row = [big] * n
        row[i] = spec_t
        times.append(tuple(row))
    last = [last_t] * (n - 1) + [float(alpha) if variant == "hat" else 1.0]
    times.append(tuple(last))
    return Instance(tuple(times), big)


def gen_circulant(n: int, alpha: float, delta: float):
    """Matrix a[i][j] = c * ((j - i) mod n) with c = alpha*(sqrt(2)-delta)/(n-1).

    Zero diagonal, positive elsewhere; every column sums to
    alpha*n*(sqrt(2)-delta)/2, which sits below the combinatorial bound's
    premise (n-1)*alpha/sqrt(2) exactly when delta > sqrt(2)/n.  Returns a
    plain list of rows.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not alpha > 0:
        raise ValueError("need alpha > 0")
    if not 0 < delta < math.sqrt(2):
        raise ValueError("need 0 < delta < sqrt(2)")
    c = alpha * (math.sqrt(2) - delta) / (n - 1)
    return [[c * ((j - i) % n) for j in range(n)] for i in range(n)]


def gen_random(n: int, m: int, seed: int, lo: float = 0.1, hi: float = 4.0,
               grid_step: float = 0.1, big: float = DEFAULT_BIG) -> Instance:
    """Seeded instance whose entries are grid multiples in [lo, hi].

    Entries are drawn as integer multiples of grid_step, with the identical
    float product a Grid of the same step generates, so enumeration and the
    analytic winner sets stay bit-for-bit comparable.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    k_lo = math.ceil(lo / grid_step - 1e-9)
    k_hi = math.floor(hi / grid_step + 1e-9)
    if k_lo > k_hi:
        raise ValueError(f"no grid multiples of {grid_step} inside [{lo}, {hi}]")
    rng = np.random.default_rng(seed)
    ks = rng.integers(k_lo, k_hi + 1, size=(n, m))
    times = ks * grid_step
    return Instance(tuple(tuple(row) for row in times), big)


# ---------------------------------------------------------------------------
# generator specs (CLI / frontier suites)
# ---------------------------------------------------------------------------

_BUILDERS = {
    "uniform": gen_uniform,
    "tradeoff": gen_tradeoff,
    "fp_pos": gen_fp_pos,
    "hat": lambda n, alpha, big=DEFAULT_BIG: gen_hat(n, alpha, "hat", big),
    "tilde": lambda n, alpha, big=DEFAULT_BIG: gen_hat(n, alpha, "tilde", big),
    "random": gen_random,
    "canonical": gen_canonical,
    "circulant": gen_circulant,
}

_INT_PARAMS = {"n", "m", "seed", "fast", "slow", "k"}


@dataclass(frozen=True)
class GeneratorSpec:
    """A named generator plus keyword parameters, e.g. hat with n=3, alpha=2."""

    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name == "thm3_hat":
            pass  # built via its dedicated helper below
        elif self.name not in _BUILDERS:
            raise ValueError(f"unknown generator {self.name!r}")
        object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))

    @staticmethod
    def parse(text: str) -> "GeneratorSpec":
        """Parse 'name' or 'name:k=v,k=v' (ints where the parameter is one)."""
        name, _, rest = text.strip().partition(":")
        params = {}
        if rest:
            for part in rest.split(","):
                key, _, val = part.partition("=")
                if not _:
                    raise ValueError(f"bad generator parameter {part!r}")
                key = key.strip()
                params[key] = int(val) if key in _INT_PARAMS else (
                    val if key == "variant" else float(val))
        return GeneratorSpec(name, tuple(params.items()))

    def build(self):
        kwargs = dict(self.params)
        if self.name == "thm3_hat":
            n = int(kwargs.pop("n"))
            if kwargs:
                raise ValueError(f"thm3_hat takes only n, got {sorted(kwargs)}")
            return thm3_hat_image(n)
        return _BUILDERS[self.name](**kwargs)

    def label(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v:g}" if isinstance(v, float)
                                          else f"{k}={v}" for k, v in self.params)


def thm3_hat_image(n: int) -> Instance:
    """The thm3_hat rewrite of uniform(n) around its everything-on-machine-0
    worst equilibrium, keeping the first n tasks as the marked set."""
    base = gen_uniform(n)
    assignment = (0,) * (n * n)
    return gen_thm3_hat(base, assignment, 0, tuple(range(n)))


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    return {"n": inst.n, "m": inst.m, "big": inst.big,
            "times": [list(row) for row in inst.times]}


def instance_from_dict(data: dict) -> Instance:
    inst = Instance(tuple(tuple(row) for row in data["times"]), float(data["big"]))
    if inst.n != data.get("n", inst.n) or inst.m != data.get("m", inst.m):
        raise ValueError("declared shape does not match the times matrix")
    return inst


def save_instance(inst: Instance, path: str) -> None:
    """JSON format; lossless float round-trip."""
    with open(path, "w") as f:
        json.dump(instance_to_dict(inst), f, indent=1)
        f.write("\n")


def load_instance(path: str) -> Instance:
    with open(path) as f:
        return instance_from_dict(json.load(f))


def save_text(inst: Instance, path: str) -> None:
    """Text format: first line 'n m big', then one whitespace row per machine."""
    with open(path, "w") as f:
        f.write(f"{inst.n} {inst.m} {inst.big!r}\n")
        for row in inst.times:
            f.write(" ".join(repr(x) for x in row) + "\n")


def load_text(path: str) -> Instance:
    with open(path) as f:
        head = f.readline().split()
        if len(head) != 3:
            raise ValueError("first line must be 'n m big'")
        n, m, big = int(head[0]), int(head[1]), float(head[2])
        rows = []
        for line in f:
            line = line.strip()
            if line:
                rows.append(tuple(float(x) for x in line.split()))
    if len(rows) != n or any(len(r) != m for r in rows):
        raise ValueError(f"expected {n} rows of {m} entries")
    return Instance(tuple(rows), big)


# ---------------------------------------------------------------------------
# regression suite
# ---------------------------------------------------------------------------

def regression_suite() -> list:
    """Named instances (n in {2, 3}) exercised by the analysis checks."""
    suite = [
        ("uniform-2", gen_uniform(2)),
        ("uniform-3", gen_uniform(3)),
        ("thm3hat-2", thm3_hat_image(2)),
        ("thm3hat-3", thm3_hat_image(3)),
        ("tradeoff-2-1.5", gen_tradeoff(2, 1.5)),
        ("tradeoff-3-1.5", gen_tradeoff(3, 1.5)),
        ("tradeoff-3-3", gen_tradeoff(3, 3.0)),
        ("fp_pos-2-0.01", gen_fp_pos(2, 0.01)),
        ("fp_pos-3-0.01", gen_fp_pos(3, 0.01)),
        ("fp_pos-3-0.005", gen_fp_pos(3, 0.005)),
        ("hat-2-2", gen_hat(2, 2.0, "hat")),
        ("hat-3-1.5", gen_hat(3, 1.5, "hat")),
        ("hat-3-2", gen_hat(3, 2.0, "hat")),
        ("hat-3-4", gen_hat(3, 4.0, "hat")),
        ("tilde-2-2", gen_hat(2, 2.0, "tilde")),
        ("tilde-3-1.5", gen_hat(3, 1.5, "tilde")),
        ("tilde-3-2", gen_hat(3, 2.0, "tilde")),
        ("tilde-3-4", gen_hat(3, 4.0, "tilde")),
    ]
    for seed in range(101, 106):
        suite.append((f"random-2x3-{seed}", gen_random(2, 3, seed)))
    for seed in range(201, 206):
        suite.append((f"random-3x4-{seed}", gen_random(3, 4, seed)))
    for seed in range(301, 303):
        suite.append((f"random-3x5-{seed}", gen_random(3, 5, seed)))
    return suite
