"""Strategic scheduling on unrelated machines: payment rules that award each
task to its lowest bidder, exact optimal makespans, grid-equilibrium
enumeration, and the worst-case/best-case inefficiency frontier those
equilibria trace out."""

from .model import (
    DEFAULT_BIG,
    BudgetExceededError,
    Instance,
    MechanismId,
    Outcome,
    StrategyProfile,
    UnsupportedMechanismError,
    apply,
    loads,
    makespan,
    utility,
)
from .rules import SingleTaskRule, fp_rule, payload_greedy, rule_for, sp_rule, spa_rule
from .optsolver import (
    EligibilityMask,
    brute_force_makespan,
    full_mask,
    opt_makespan,
    opt_makespan_masked,
)
from .equilibria import (
    EnumerationResult,
    EquilibriumCertificate,
    Grid,
    VerifyResult,
    WinnerSets,
    achievable_winners,
    canonical_certificate,
    default_grid,
    enumerate_equilibria,
    equilibrium_template_spa,
    verify_certificate,
    verify_equilibrium,
)
from .instances import (
    GeneratorSpec,
    gen_canonical,
    gen_circulant,
    gen_fp_pos,
    gen_hat,
    gen_random,
    gen_thm3_hat,
    gen_tradeoff,
    gen_uniform,
    load_instance,
    load_text,
    regression_suite,
    save_instance,
    save_text,
    thm3_hat_image,
)
from .analysis import (
    AnonymityResult,
    CombiPremiseError,
    FrontierPoint,
    InefficiencyReport,
    MonotonicityResult,
    ProbeMatrix,
    anonymity_check,
    check_combi,
    check_tech1,
    combi_row_best,
    frontier_sweep,
    inefficiency,
    monotonicity_check,
    probe_matrix,
)

__version__ = "0.1.0"
