"""Single-task payment rules and the load-greedy baseline.

Each single-task rule takes one reported bid per machine, awards the task to
the lowest bidder (lowest index on ties), and pays only the winner:

  fp   -- the winner is paid its own bid.
  sp   -- the winner is paid the lowest bid among the other machines.
  spa  -- second price capped by a reserve of alpha times the winning bid:
          pay = min(second lowest bid, alpha * winning bid).  spa with
          alpha = 1 collapses to fp (the cap always binds at the own bid).

`payload_greedy` is a whole-profile mechanism kept around as a foil: it
assigns tasks in index order to the machine whose reported load would stay
lowest and pays each machine the sum of its winning reports.  It is not
task-independent, so none of the per-task equilibrium machinery applies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MechanismId, Outcome, StrategyProfile, UnsupportedMechanismError


def _check_bids(bids) -> tuple:
    bids = tuple(float(b) for b in bids)
    if not bids:
        raise ValueError("need at least one bid")
    if any(b < 0 for b in bids):
        raise ValueError("bids must be >= 0")
    return bids


def _argmin(bids) -> int:
    # min() on the pairs would compare second elements; do it explicitly.
    w = 0
    for i in range(1, len(bids)):
        if bids[i] < bids[w]:
            w = i
    return w


def fp_rule(bids) -> tuple:
    """First price: winner = lowest bidder (lowest index on ties), paid its bid."""
    bids = _check_bids(bids)
    w = _argmin(bids)
    pay = [0.0] * len(bids)
    pay[w] = bids[w]
    return w, tuple(pay)


def sp_rule(bids) -> tuple:
    """Second price: winner paid the lowest bid among the other machines."""
    bids = _check_bids(bids)
    if len(bids) < 2:
        raise ValueError("second price needs at least two machines")
    w = _argmin(bids)
    pay = [0.0] * len(bids)
    pay[w] = min(b for i, b in enumerate(bids) if i != w)
    return w, tuple(pay)


def spa_rule(alpha: float, bids) -> tuple:
    """Second price with reserve alpha * winning bid; alpha >= 1.

    The winner is paid min(second lowest bid, alpha * own bid), so overbidding
    by the losers is only rewarded up to the reserve.
    """
    if not alpha >= 1:
        raise ValueError("alpha must be >= 1")
    bids = _check_bids(bids)
    if len(bids) < 2:
        raise ValueError("second price with reserve needs at least two machines")
    w = _argmin(bids)
    second = min(b for i, b in enumerate(bids) if i != w)
    pay = [0.0] * len(bids)
    pay[w] = min(second, alpha * bids[w])
    return w, tuple(pay)


def payload_greedy(profile: StrategyProfile) -> Outcome:
    """Assign tasks in index order to the machine with the lowest reported load
    so far (lowest index on ties); pay every machine its winning reports."""
    n, m = profile.n, profile.m
    rep_load = [0.0] * n
    winner = []
    payments = [0.0] * n
    for j in range(m):
        col = profile.column(j)
        w = _argmin([rep_load[i] + col[i] for i in range(n)])
        rep_load[w] += col[w]
        payments[w] += col[w]
        winner.append(w)
    return Outcome(tuple(winner), tuple(payments))


# ---------------------------------------------------------------------------
# batched kernels (used by the grid-equilibrium engine)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleTaskRule:
    """A single-task rule bound to a machine count.

    `outcome(bids)` mirrors the scalar functions above; `batch(B)` evaluates
    K profiles at once (B has shape (K, n)) and returns the winner index and
    the winner's payment per row.  Anything duck-typing these two methods
    (plus `.n`) can be fed to the equilibrium engine.
    """

    id: MechanismId
    n: int

    def __post_init__(self):
        if self.id.kind == "greedy":
            raise UnsupportedMechanismError("payload_greedy is not a single-task rule")
        if self.n < 1:
            raise ValueError("need n >= 1")
        if self.id.kind in ("sp", "spa") and self.n < 2:
            raise ValueError(f"{self.id} needs n >= 2")

    def outcome(self, bids) -> tuple:
        if len(bids) != self.n:
            raise ValueError(f"expected {self.n} bids, got {len(bids)}")
        if self.id.kind == "fp":
            w, pay = fp_rule(bids)
        elif self.id.kind == "sp":
            w, pay = sp_rule(bids)
        else:
            w, pay = spa_rule(self.id.alpha, bids)
        return w, pay[w]

    def batch(self, B: np.ndarray) -> tuple:
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[1] != self.n:
            raise ValueError(f"batch expects shape (K, {self.n})")
        w = np.argmin(B, axis=1)  # argmin takes the first minimum: lowest index
        own = B[np.arange(len(B)), w]
        if self.id.kind == "fp":
            return w, own
        second = np.partition(B, 1, axis=1)[:, 1]
        if self.id.kind == "sp":
            return w, second
        return w, np.minimum(second, self.id.alpha * own)


def rule_for(mech: MechanismId, n: int) -> SingleTaskRule:
    return SingleTaskRule(mech, n)
