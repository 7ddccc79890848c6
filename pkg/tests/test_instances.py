import math

import pytest

from mechfront.instances import (
    GeneratorSpec,
    gen_canonical,
    gen_circulant,
    gen_fp_pos,
    gen_hat,
    gen_random,
    gen_thm3_hat,
    gen_tradeoff,
    gen_uniform,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    load_text,
    regression_suite,
    save_instance,
    save_text,
    thm3_hat_image,
)
from mechfront.model import DEFAULT_BIG, Instance

BIG = float(DEFAULT_BIG)


def test_gen_uniform():
    inst = gen_uniform(3)
    assert inst.n == 3
    assert inst.m == 9
    assert all(t == 1.0 for row in inst.times for t in row)
    assert gen_uniform(2).m == 4


def test_gen_tradeoff_exact_matrices():
    assert gen_tradeoff(3, 1.5).times == (
        (2.0, 0.5, 0.5),
        (BIG, 2.0, BIG),
        (BIG, BIG, 2.0),
    )
    assert gen_tradeoff(3, 3.0).times == (
        (2.0, 2.0, 2.0),
        (BIG, 2.0, BIG),
        (BIG, BIG, 2.0),
    )
    assert gen_tradeoff(2, 1.5).times == ((1.0, 0.5), (BIG, 1.0))


def test_gen_tradeoff_validates():
    with pytest.raises(ValueError):
        gen_tradeoff(1, 2.0)
    with pytest.raises(ValueError):
        gen_tradeoff(3, 0.5)  # needs rho >= 1
    with pytest.raises(ValueError):
        gen_tradeoff(3, 2.0, big=3.0)  # sentinel must dominate


def test_gen_fp_pos():
    assert gen_fp_pos(3, 0.01).times == (
        (1.0, 1.0, 1.0),
        (1.01, BIG, BIG),
        (BIG, 1.01, BIG),
    )
    assert gen_fp_pos(2, 0.01).times == ((1.0, 1.0), (1.01, BIG))
    with pytest.raises(ValueError):
        gen_fp_pos(3, 0.0)


def test_gen_hat_variants():
    assert gen_hat(3, 2.0, "hat").times == (
        (2.0, BIG, BIG),
        (BIG, 2.0, BIG),
        (1.0, 1.0, 2.0),
    )
    assert gen_hat(3, 2.0, "tilde").times == (
        (1.0, BIG, BIG),
        (BIG, 1.0, BIG),
        (2.0, 2.0, 1.0),
    )
    assert gen_hat(2, 2.0, "hat").times == ((2.0, BIG), (1.0, 2.0))
    assert gen_hat(2, 2.0, "tilde").times == ((1.0, BIG), (2.0, 1.0))
    with pytest.raises(ValueError):
        gen_hat(3, 2.0, "flat")


def test_thm3_hat_image():
    inst = thm3_hat_image(3)
    assert inst.times[0] == (1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert inst.times[1] == (1.0,) * 9
    assert inst.times[2] == (1.0,) * 9


def test_gen_thm3_hat_validates():
    base = gen_uniform(2)  # 2 machines, 4 tasks
    assignment = (0, 0, 0, 0)
    # T must contain exactly n tasks won by machine k
    out = gen_thm3_hat(base, assignment, 0, (0, 1))
    assert out.times[0] == (1.0, 1.0, 0.0, 0.0)
    assert out.times[1] == (1.0,) * 4
    with pytest.raises(ValueError):
        gen_thm3_hat(base, assignment, 0, (0,))  # wrong size
    with pytest.raises(ValueError):
        gen_thm3_hat(base, (1, 1, 1, 1), 0, (0, 1))  # tasks not won by k
    skewed = Instance(((1.0, 2.0), (1.0, 1.0)))
    with pytest.raises(ValueError):
        gen_thm3_hat(skewed, (0, 0), 0, (0, 1))  # base must be uniform


def test_gen_canonical():
    assert gen_canonical(3, 0, 1, 2.0) == (1.0, 2.0, 1000002.0)
    assert gen_canonical(3, 2, 0, 0.5) == (0.5, 1000001.0, 1.0)
    with pytest.raises(ValueError):
        gen_canonical(3, 1, 1, 2.0)


def test_gen_circulant():
    a = gen_circulant(3, 2.0, 0.6)
    c = 2.0 * (math.sqrt(2) - 0.6) / 2
    assert a[0] == [0.0, c, 2 * c]
    assert a[1] == [2 * c, 0.0, c]
    assert a[2] == [c, 2 * c, 0.0]
    # premise: every column sums below (n-1) * alpha / sqrt(2)
    limit = 2 * 2.0 / math.sqrt(2)
    for j in range(3):
        assert sum(a[i][j] for i in range(3)) < limit


def test_gen_circulant_delta_bounds():
    with pytest.raises(ValueError):
        gen_circulant(3, 2.0, 0.0)
    with pytest.raises(ValueError):
        gen_circulant(3, 2.0, 1.5)  # >= sqrt(2)
    # delta <= sqrt(2)/n still *builds* (premise checking is the verifier's
    # job), it just fails the column-sum premise downstream
    a = gen_circulant(3, 2.0, 0.3)
    limit = 2 * 2.0 / math.sqrt(2)
    assert any(sum(a[i][j] for i in range(3)) >= limit for j in range(3))


GOLDEN_RANDOM_3x4_SEED7 = (
    (3.8000000000000003, 2.6, 2.8000000000000003, 3.6),
    (2.4000000000000004, 3.2, 3.4000000000000004, 1.0),
    (0.30000000000000004, 1.3, 1.2000000000000002, 3.5),
)


def test_gen_random_golden():
    inst = gen_random(3, 4, seed=7)
    assert inst.times == GOLDEN_RANDOM_3x4_SEED7


def test_gen_random_entries_are_grid_products():
    """Every entry must be bit-identical to integer * step, so grids anchored
    on the entries reproduce the exact same floats."""
    inst = gen_random(3, 6, seed=123)
    for row in inst.times:
        for x in row:
            k = round(x / 0.1)
            assert x == k * 0.1
            assert 0.1 <= x <= 4.0


def test_gen_random_determinism():
    a = gen_random(2, 5, seed=9)
    b = gen_random(2, 5, seed=9)
    c = gen_random(2, 5, seed=10)
    assert a.times == b.times
    assert a.times != c.times


# ----------------------------------------------------------- generator specs

def test_generator_spec_parse_and_label():
    spec = GeneratorSpec.parse("tilde:n=3,alpha=2")
    assert spec.name == "tilde"
    assert dict(spec.params) == {"n": 3, "alpha": 2.0}
    assert spec.label() == "tilde:alpha=2,n=3"
    inst = spec.build()
    assert inst.times == gen_hat(3, 2.0, "tilde").times


def test_generator_spec_no_params():
    spec = GeneratorSpec.parse("uniform:n=2")
    assert isinstance(spec.build(), Instance)


def test_generator_spec_unknown_name():
    with pytest.raises(ValueError):
        GeneratorSpec.parse("nosuch:n=2").build()


def test_generator_spec_circulant_builds_plain_matrix():
    a = GeneratorSpec.parse("circulant:n=3,alpha=2,delta=0.6").build()
    assert a == gen_circulant(3, 2.0, 0.6)


# ---------------------------------------------------------------- file I/O

def test_json_roundtrip(tmp_path):
    inst = gen_random(3, 4, seed=7)
    p = tmp_path / "r.json"
    save_instance(inst, str(p))
    back = load_instance(str(p))
    assert back.times == inst.times
    assert back.big == inst.big


def test_json_roundtrip_preserves_awkward_floats(tmp_path):
    inst = gen_fp_pos(3, 0.01)
    p = tmp_path / "fp.json"
    save_instance(inst, str(p))
    assert load_instance(str(p)).times == inst.times


def test_text_roundtrip(tmp_path):
    inst = gen_random(2, 3, seed=4)
    p = tmp_path / "r.txt"
    save_text(inst, str(p))
    back = load_text(str(p))
    assert back.times == inst.times
    assert back.big == inst.big


def test_text_format_shape(tmp_path):
    inst = gen_tradeoff(3, 1.5)
    p = tmp_path / "t.txt"
    save_text(inst, str(p))
    lines = p.read_text().strip().split("\n")
    assert lines[0].split() == ["3", "3", "1000000"]
    assert len(lines) == 4


def test_dict_roundtrip():
    inst = gen_hat(3, 2.0, "hat")
    assert instance_from_dict(instance_to_dict(inst)).times == inst.times


# ---------------------------------------------------------------- suite

def test_regression_suite_composition():
    suite = regression_suite()
    names = [name for name, _ in suite]
    assert len(suite) >= 25
    assert len(set(names)) == len(names)
    for name, inst in suite:
        assert isinstance(inst, Instance)
        assert inst.n in (2, 3)
    assert "hat-3-2" in names
    assert "tilde-3-2" in names
