import itertools

import numpy as np
import pytest

from mechfront.equilibria import (
    Grid,
    achievable_winners,
    canonical_certificate,
    default_grid,
    enumerate_equilibria,
    equilibrium_template_spa,
    on_grid,
    verify_certificate,
    verify_equilibrium,
)
from mechfront.instances import gen_fp_pos, gen_hat, gen_tradeoff
from mechfront.model import (
    BudgetExceededError,
    Instance,
    MechanismId,
    StrategyProfile,
    UnsupportedMechanismError,
    apply,
)
from mechfront.rules import rule_for

FP = MechanismId.parse("fp")
SP = MechanismId.parse("sp")
SPA2 = MechanismId.parse("spa:2")


# ---------------------------------------------------------------- grid

def test_grid_points():
    g = Grid(0.5, 2.0)
    assert list(g.points) == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert len(g) == 5


def test_grid_anchor_replaces_nearest_point():
    # 0.1 * 3 in binary floats is not exactly 0.3; anchoring pins the value
    g = Grid(0.1, 1.0, anchors=(0.30000000000000004,))
    assert 0.30000000000000004 in set(g.points)


def test_grid_rejects_off_grid_anchor():
    with pytest.raises(ValueError):
        Grid(0.1, 1.0, anchors=(1.01,))


def test_grid_rejects_bad_cap():
    with pytest.raises(ValueError):
        Grid(0.5, 1.2)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0)


def test_grid_index_of_and_floor():
    g = Grid(0.5, 3.0)
    assert g.index_of(1.5) == 3
    with pytest.raises(ValueError):
        g.index_of(1.3)
    assert g.floor(1.3) == 1.0
    assert g.floor(1.5) == 1.5
    assert g.floor(99.0) == 3.0


def test_on_grid():
    assert on_grid(1.0, 0.1)
    assert on_grid(0.30000000000000004, 0.1)
    assert not on_grid(1.01, 0.1)
    assert not on_grid(1.05, 0.1)


def test_default_grid_cap_scales_with_alpha():
    inst = gen_tradeoff(3, 1.5)  # largest finite entry 2.0
    assert float(default_grid(inst, FP).points[-1]) == pytest.approx(2.2)
    assert float(default_grid(inst, SPA2).points[-1]) == pytest.approx(4.2)


def test_default_grid_skips_off_grid_entries():
    # 1.01 cannot be anchored on a 0.1 lattice; the grid must still build
    inst = gen_fp_pos(3, 0.01)
    g = default_grid(inst, FP)
    assert 1.0 in set(g.points)
    assert 1.01 not in set(g.points)


def test_default_grid_accepts_plain_vectors():
    g = default_grid((1.0, 1.9, 1000000.0), SPA2)
    assert float(g.points[-1]) == pytest.approx(4.0)  # 2 * 1.9 + 0.2


# ---------------------------------------------------------------- verify

def test_verify_sp_low_bid_shield():
    """Second price, true times (0, 0.1): the fast machine bidding high while
    the slow one bids 0 is still an equilibrium -- the winner is paid 1."""
    rule = rule_for(SP, 2)
    g = Grid(0.1, 2.0)
    res = verify_equilibrium(rule, (0.0, 0.1), (1.0, 0.0), g)
    assert res.ok
    assert bool(res) is True


def test_verify_fp_underwater_bid_fails():
    rule = rule_for(FP, 2)
    g = Grid(0.1, 2.2)
    res = verify_equilibrium(rule, (1.0, 2.0), (0.5, 2.0), g)
    assert not res.ok
    # the best recovery: machine 0 raises to 2.0 and still wins the tie,
    # going from -0.5 to +1.0
    assert res.machine == 0
    assert res.deviation == 2.0
    assert res.gain == pytest.approx(1.5)


def test_verify_sp_truthful():
    rule = rule_for(SP, 3)
    g = Grid(0.1, 4.0)
    rng = np.random.default_rng(1)
    for _ in range(20):
        t = tuple(float(k) * 0.1 for k in rng.integers(0, 41, size=3))
        assert verify_equilibrium(rule, t, t, g).ok


def test_verify_rejects_off_grid_bids():
    rule = rule_for(FP, 2)
    g = Grid(0.1, 2.0)
    with pytest.raises(ValueError):
        verify_equilibrium(rule, (1.0, 2.0), (1.05, 2.0), g)


# ---------------------------------------------------------------- enumerate

def test_enumerate_spa2_matches_bucket():
    rule = rule_for(SPA2, 3)
    g = default_grid((1.0, 1.9, 1000000.0), SPA2)
    res = enumerate_equilibria(rule, (1.0, 1.9, 1000000.0), g)
    assert res.winner_union() == {0, 1}
    assert res.scanned == len(g) ** 3


def test_enumerate_fp_winner_is_always_fastest():
    rule = rule_for(FP, 2)
    g = Grid(0.1, 2.2)
    res = enumerate_equilibria(rule, (1.0, 2.0), g)
    assert res.winner_union() == {0}
    assert len(res) > 0


def test_enumerate_single_machine():
    rule = rule_for(FP, 1)
    g = Grid(0.5, 2.0)
    res = enumerate_equilibria(rule, (1.0,), g)
    assert res.winner_union() == {0}
    # fp alone: only the top-of-grid bid is a best response
    assert len(res) == 1
    assert float(res.profiles[0][0]) == 2.0


def test_enumerate_budget_refusal():
    rule = rule_for(SPA2, 3)
    g = Grid(0.1, 4.0)
    with pytest.raises(BudgetExceededError):
        enumerate_equilibria(rule, (1.0, 2.0, 3.0), g, budget=100)


def test_enumeration_certificates_reverify():
    rule = rule_for(SPA2, 2)
    g = Grid(0.5, 3.0)
    res = enumerate_equilibria(rule, (1.0, 1.5), g)
    count = 0
    for cert in res:
        col = tuple(cert.profile[i][0] for i in range(2))
        assert verify_equilibrium(rule, (1.0, 1.5), col, g).ok
        count += 1
    assert count == len(res)


# ---------------------------------------------------------------- buckets

def test_achievable_winners_spa_bucket():
    inst = Instance(((1.0,), (1.9,), (5.0,)))
    ws = achievable_winners(SPA2, inst)
    assert ws.allowed[0] == {0, 1}


def test_achievable_winners_bucket_can_cover_everyone():
    inst = Instance(((1.0,), (1.9,), (2.0,)))
    assert achievable_winners(SPA2, inst).allowed[0] == {0, 1, 2}


def test_achievable_winners_fp_argmin_set():
    inst = Instance(((1.0,), (1.0,), (3.0,)))
    assert achievable_winners(FP, inst).allowed[0] == {0, 1}
    assert achievable_winners(MechanismId.parse("spa:1"), inst).allowed[0] == {0, 1}


def test_achievable_winners_sp_excludes_sentinels():
    inst = gen_tradeoff(3, 1.5)
    ws = achievable_winners(SP, inst)
    assert ws.allowed[0] == {0}          # only machine 0 is non-sentinel there
    assert ws.allowed[1] == {0, 1}


def test_achievable_winners_rejects_greedy():
    inst = Instance(((1.0,), (2.0,)))
    with pytest.raises(UnsupportedMechanismError):
        achievable_winners(MechanismId.parse("greedy"), inst)


def test_bucket_boundary_machine_is_achievable():
    """A machine sitting exactly at alpha * t_min belongs to the winner set:
    cross-check the closed form against exhaustive enumeration."""
    inst = gen_hat(3, 2.0, "hat")
    col = inst.column(0)                 # (2, sentinel, 1): boundary at 2 = 2*1
    ws = achievable_winners(SPA2, inst)
    assert ws.allowed[0] == {0, 2}
    rule = rule_for(SPA2, 3)
    g = default_grid(inst, SPA2)
    assert enumerate_equilibria(rule, col, g).winner_union() == {0, 2}


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_bucket_equivalence_spot_checks(alpha):
    mech = MechanismId.parse(f"spa:{alpha:g}")
    rule = rule_for(mech, 3)
    rng = np.random.default_rng(17)
    for _ in range(5):
        t = tuple(float(k) * 0.1 for k in rng.integers(1, 41, size=3))
        inst = Instance((tuple([x] for x in t)))
        g = default_grid(t, mech)
        enum = enumerate_equilibria(rule, t, g).winner_union()
        assert enum == achievable_winners(mech, inst).allowed[0]


# ---------------------------------------------------------------- templates

def test_template_slow_target():
    bids = equilibrium_template_spa(2.0, (1.0, 1.9, 5.0), 1, 0.1)
    assert bids == (1.9, 1.0, 1.9)
    rule = rule_for(SPA2, 3)
    w, pay = rule.outcome(bids)
    assert (w, pay) == (1, 1.9)          # paid its own true time, utility 0
    g = Grid(0.1, 6.0)
    assert verify_equilibrium(rule, (1.0, 1.9, 5.0), bids, g).ok


def test_template_tied_fastest_target():
    bids = equilibrium_template_spa(2.0, (1.0, 1.0, 5.0), 0, 0.5)
    assert bids == (1.0, 1.5, 1.5)
    rule = rule_for(SPA2, 3)
    w, pay = rule.outcome(bids)
    assert (w, pay) == (0, 1.5)
    g = Grid(0.5, 6.0)
    assert verify_equilibrium(rule, (1.0, 1.0, 5.0), bids, g).ok


def test_template_higher_index_tied_target():
    bids = equilibrium_template_spa(2.0, (1.0, 1.0, 5.0), 1, 0.5)
    rule = rule_for(SPA2, 3)
    w, _ = rule.outcome(bids)
    assert w == 1


def test_template_rejects_target_outside_bucket():
    with pytest.raises(ValueError):
        equilibrium_template_spa(2.0, (1.0, 3.0, 5.0), 1, 0.1)


def test_template_rejects_coarse_eps():
    # tied-fastest target needs t_min + eps < alpha * t_min
    with pytest.raises(ValueError):
        equilibrium_template_spa(1.5, (1.0, 1.0), 0, 0.6)


def test_template_needs_alpha_above_one():
    with pytest.raises(ValueError):
        equilibrium_template_spa(1.0, (1.0, 2.0), 0, 0.1)


# ---------------------------------------------------------------- certificates

TRADEOFF_CERTS = {
    "fp": ((2.0, 0.5, 0.5), (2.0, 0.5, 0.5), (2.0, 0.5, 0.5)),
    "sp": ((2.0, 0.5, 0.5), (2.2, 2.0, 2.2), (2.2, 2.2, 2.0)),
    "spa:2": ((2.0, 0.5, 0.5), (4.0, 1.0, 1.0), (4.0, 1.0, 1.0)),
}


@pytest.mark.parametrize("mid", sorted(TRADEOFF_CERTS))
def test_canonical_certificate_on_tradeoff(mid):
    inst = gen_tradeoff(3, 1.5)
    cert = canonical_certificate(MechanismId.parse(mid), inst)
    assert cert.profile == TRADEOFF_CERTS[mid]
    assert cert.winner == (0, 0, 0)
    assert cert.scope == "grid"


@pytest.mark.parametrize("mid", ["fp", "sp", "spa:2"])
def test_canonical_certificate_handles_off_grid_times(mid):
    # fp_pos entries 1.01 are not 0.1-multiples; losing reports get floored
    inst = gen_fp_pos(3, 0.01)
    mech = MechanismId.parse(mid)
    cert = canonical_certificate(mech, inst)
    assert cert.winner == (0, 0, 0)
    assert verify_certificate(mech, inst, cert).ok


def test_canonical_certificate_rejects_greedy():
    with pytest.raises(UnsupportedMechanismError):
        canonical_certificate(MechanismId.parse("greedy"), gen_tradeoff(3, 1.5))


def test_verify_certificate_with_modified_truth():
    inst = gen_tradeoff(3, 1.5)
    cert = canonical_certificate(FP, inst)
    # shrink a won time: still an equilibrium
    easier = [list(r) for r in inst.times]
    easier[0][0] = 1.0
    assert verify_certificate(FP, inst, cert, true_times=easier).ok
    # grow a won time past the payment: the winner now loses money and walks
    harder = [list(r) for r in inst.times]
    harder[0][1] = 3.0
    assert not verify_certificate(FP, inst, cert, true_times=harder).ok


# ---------------------------------------------------------------- composition

def test_per_task_equilibria_compose_and_decompose():
    """Whole-game equilibria are exactly the products of per-task equilibria.

    Brute-forces every full profile on a coarse grid (n=2, m=2) and checks
    every machine's deviations over complete report rows, then compares with
    the column-wise verdicts."""
    inst = Instance(((1.0, 0.5), (0.5, 2.0)), big=100.0)
    mech = SPA2
    rule = rule_for(mech, 2)
    g = Grid(0.5, 2.0)
    pts = [float(x) for x in g.points]

    def game_utility(rows, i):
        out = apply(mech, StrategyProfile(tuple(rows)))
        spent = sum(inst.times[i][j] for j in range(inst.m) if out.winner[j] == i)
        return out.payments[i] - spent

    def is_whole_game_eq(rows):
        for i in range(inst.n):
            here = game_utility(rows, i)
            for dev in itertools.product(pts, repeat=inst.m):
                trial = [list(r) for r in rows]
                trial[i] = list(dev)
                if game_utility(trial, i) > here + 1e-12:
                    return False
        return True

    col_eq = []
    for j in range(inst.m):
        col = tuple(inst.times[i][j] for i in range(inst.n))
        keep = set()
        for bids in itertools.product(pts, repeat=inst.n):
            if verify_equilibrium(rule, col, bids, g).ok:
                keep.add(bids)
        col_eq.append(keep)

    brute = set()
    for b00 in pts:
        for b01 in pts:
            for b10 in pts:
                for b11 in pts:
                    rows = ((b00, b01), (b10, b11))
                    if is_whole_game_eq(rows):
                        brute.add(rows)

    product = {
        ((c0[0], c1[0]), (c0[1], c1[1]))
        for c0 in col_eq[0]
        for c1 in col_eq[1]
    }
    assert brute == product
    assert brute  # sanity: the comparison is not vacuous
