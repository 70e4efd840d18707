"""End-to-end acceptance gate: twelve numbered criteria, one test each.

Every criterion states its tolerance and time budget inline; shared
group and representation builders are cached so criteria stay
independent without recomputing enumerations.
"""

import itertools
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from orbitlab.cartan import (
    parse_functional,
    sp_long_root_min_check,
    word_cartan,
)
from orbitlab.cones import rank_upper_sample, rank_witness_check
from orbitlab.critexp import (
    estimate_exponent,
    sample_from_enumeration,
    sample_from_norm_ball,
)
from orbitlab.doubling import (
    PANTS_BOUNDARY,
    double_rep,
    doubled_value_sample,
    hyperbolic_with_axis,
    reflection_across_axis,
    separated_schottky,
)
from orbitlab.errors import NotPositive
from orbitlab.flags import (
    Flag,
    flag_distance,
    limit_curve,
    limit_flags,
    polygonal_length,
    quadruple_positive,
    triple_positive,
)
from orbitlab.hypdisc import apply_boundary
from orbitlab.limitgeom import (
    box_dimension,
    cantor_sample,
    circle_sample,
    distortion_scan,
)
from orbitlab.reps import sp_product, sym_power
from orbitlab.tpos import Unitriangular, f_gamma, factorize, pi_beta, standard_word
from orbitlab.words import modular_group, standard_schottky

A1 = parse_functional("a1")
A2 = parse_functional("a2")
LONG = parse_functional("long")

GRASS_SCALES = [0.3 * 10.0 ** (-j / 2.0) for j in range(5)]


@lru_cache(maxsize=None)
def schottky_pair(d):
    group = standard_schottky(4.0)
    rep = sym_power(d)(group.generator_matrices(), label="sym%d" % d)
    return group, rep


@lru_cache(maxsize=None)
def separated_pair(d):
    group = separated_schottky(2.0)
    rep = sym_power(d)(group.generator_matrices(), label="sym%d" % d)
    return group, rep


@lru_cache(maxsize=None)
def modular_ball_estimate(sym_dim, name):
    phi = parse_functional(name)
    vs = sample_from_norm_ball(450, sym_dim, phi)
    return estimate_exponent(vs, window=(6.0, 12.0))


@lru_cache(maxsize=None)
def schottky_estimate(d, name, max_len=9):
    group, rep = schottky_pair(d)
    phi = parse_functional(name)
    vs = sample_from_enumeration(group, rep, phi, max_len)
    return estimate_exponent(vs)


def fuchsian_rank2(angles, lengths):
    """Two-generator Fuchsian representation with the given axis angles
    and translation lengths, as a two-dimensional table."""
    (a0, a1), (b0, b1) = angles
    la, lb = lengths
    ma = hyperbolic_with_axis(a0, a1, la).mat
    mb = hyperbolic_with_axis(b0, b1, lb).mat
    images = {
        "a": ma, "A": np.linalg.inv(ma),
        "b": mb, "B": np.linalg.inv(mb),
    }
    return sym_power(2)(images, label="fuchsian")


def random_reduced_word(rng, length):
    letters = "abAB"
    inverse = {"a": "A", "A": "a", "b": "B", "B": "b"}
    word = []
    while len(word) < length:
        c = letters[rng.integers(0, 4)]
        if word and inverse[c] == word[-1]:
            continue
        word.append(c)
    return word


def test_criterion_01_long_root_min_formula():
    # two non-conjugate Fuchsian representations, mild boosts; the long
    # root of the symplectic product equals the min of the factor roots
    # to 1e-8 on 200 random words of length <= 8, inside 10 s
    started = time.time()
    rho1 = fuchsian_rank2(((0.0, 1.7), (2.4, 4.0)), (0.9, 1.3))
    rho2 = fuchsian_rank2(((0.5, 2.2), (3.0, 4.6)), (0.7, 1.1))
    tr1 = np.trace(rho1.images["a"])
    tr2 = np.trace(rho2.images["a"])
    assert abs(abs(tr1) - abs(tr2)) > 0.1  # not conjugate
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        word = random_reduced_word(rng, int(rng.integers(1, 9)))
        lhs, rhs = sp_long_root_min_check([rho1, rho2], word)
        worst = max(worst, abs(lhs - rhs))
    assert worst < 1e-8
    assert time.time() - started < 10.0


def test_criterion_02_cone_rank():
    # witness family passes for n <= 8; 1e4 random tuples per n <= 4
    # yield zero removability violations, inside 60 s
    started = time.time()
    for n in range(1, 9):
        assert rank_witness_check(n)
    for n in range(1, 5):
        assert rank_upper_sample(n, 10**4, seed=20 + n) == 0
    assert time.time() - started < 60.0


def test_criterion_03_projection_additivity():
    # superdiagonal projections add under the semigroup product, to
    # 1e-12 relative, 1e3 pairs across d <= 6, inside 10 s
    started = time.time()
    rng = np.random.default_rng(31)
    for d in range(2, 7):
        w = standard_word(d)
        for _ in range(200):
            p = rng.uniform(0.2, 2.0, size=len(w.letters))
            q = rng.uniform(0.2, 2.0, size=len(w.letters))
            xy = factorize(f_gamma(w, p) @ f_gamma(w, q))
            for i in range(1, d):
                lhs = pi_beta(w, xy, i)
                rhs = pi_beta(w, p, i) + pi_beta(w, q, i)
                assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))
    assert time.time() - started < 10.0


def test_criterion_04_factorization_round_trip():
    # parameters -> matrix -> parameters is the identity to 1e-9,
    # 1e3 instances per d <= 6; degenerate inputs are rejected
    started = time.time()
    rng = np.random.default_rng(41)
    for d in range(2, 7):
        w = standard_word(d)
        for _ in range(1000):
            p = rng.uniform(0.2, 2.0, size=len(w.letters))
            u = f_gamma(w, p)
            coords = factorize(u)
            back = f_gamma(w, coords)
            assert np.abs(back.mat - u.mat).max() <= 1e-9 * max(
                1.0, np.abs(u.mat).max())
    with pytest.raises(NotPositive):
        factorize(Unitriangular(np.eye(3)))
    with pytest.raises(NotPositive):
        factorize(Unitriangular([[1, 1, 2], [0, 1, 2], [0, 0, 1]]))
    assert time.time() - started < 10.0


def test_criterion_05_growth_bound_all_pairs():
    # every built-in group/representation pair keeps every simple-root
    # slope estimate at most 1.05 (and estimate + 2 stderr <= 1.15),
    # inside 5 min total
    started = time.time()
    results = []
    for sym_dim, names in ((2, ("a1",)), (3, ("a1", "a2"))):
        for name in names:
            results.append(("modular sym%d %s" % (sym_dim, name),
                            modular_ball_estimate(sym_dim, name)))
            results.append(("schottky sym%d %s" % (sym_dim, name),
                            schottky_estimate(sym_dim, name)))
    group, _ = schottky_pair(2)
    slow = standard_schottky(3.0)
    prod = sp_product([
        sym_power(2)({c: group.image(c).mat for c in "abAB"}, label="f4"),
        sym_power(2)({c: slow.image(c).mat for c in "abAB"}, label="f3"),
    ])
    vs = sample_from_enumeration(group, prod, LONG, 9)
    results.append(("schottky spprod2 long", estimate_exponent(vs)))
    for label, est in results:
        assert est.value <= 1.05, label
        assert est.value + 2.0 * est.stderr <= 1.15, label
    assert time.time() - started < 300.0


def test_criterion_06_modular_unit_exponent():
    # modular group under the three-dimensional representation: both
    # simple-root exponents sit in [0.85, 1.15] with a certified fit
    # window at least 4 wide, inside 5 min
    started = time.time()
    for name in ("a1", "a2"):
        est = modular_ball_estimate(3, name)
        assert 0.85 <= est.value <= 1.15, name
        assert est.window[1] - est.window[0] >= 4.0
        assert est.window[1] <= est.complete_to
    assert time.time() - started < 300.0


def test_criterion_07_entropy_drop_under_doubling():
    # separated rank-2 Schottky group: base exponent <= 0.9, and the
    # doubled group exceeds it by more than twice the combined stderr;
    # the doubled enumeration is flagged non-exhaustive; inside 10 min
    started = time.time()
    group, rep = separated_pair(3)
    base_vs = sample_from_enumeration(group, rep, A1, 9)
    base = estimate_exponent(base_vs)
    doubled = double_rep(rep, PANTS_BOUNDARY)
    dbl_vs = doubled_value_sample(group, doubled, A1, 7)
    dbl = estimate_exponent(dbl_vs)
    assert "non-exhaustive" in dbl_vs.label
    assert base.value <= 0.9
    assert dbl.value - base.value > 2.0 * (base.stderr + dbl.stderr)
    assert time.time() - started < 600.0


def test_criterion_08_limit_curve_rectifiable():
    # polygonal length of the modular limit curve moves by under 5%
    # from depth 8 to depth 9 and never decreases under refinement
    group = modular_group()
    rep = sym_power(3)(group.generator_matrices(), label="sym3")
    l8 = polygonal_length([p for _, p in limit_curve(rep, group, 8, 1)])
    l9 = polygonal_length([p for _, p in limit_curve(rep, group, 9, 1)])
    assert l9 >= l8
    assert (l9 - l8) / l8 < 0.05


def test_criterion_09_regular_distortion():
    # Schottky distortion ratios at radius 9: spread below 100 at
    # depth 8, growing by at most 25% at depth 9
    group, rep = schottky_pair(3)
    at8 = distortion_scan(group, rep, A1, 9.0, 8)
    at9 = distortion_scan(group, rep, A1, 9.0, 9)
    assert math.isfinite(at8.spread)
    assert at8.spread < 100.0
    assert at9.spread <= 1.25 * at8.spread


def test_criterion_10_dimension_bounds_exponent():
    # box dimension of the Schottky limit curve stays within 0.15 of
    # the growth exponent from above; the box counter itself is
    # calibrated on a Cantor set and a circle
    cantor = box_dimension(cantor_sample(12), [3.0 ** -k for k in range(2, 8)])
    assert abs(cantor.value - math.log(2.0) / math.log(3.0)) < 0.05
    circle = box_dimension(circle_sample(2000), GRASS_SCALES)
    assert abs(circle.value - 1.0) < 0.05
    group, rep = schottky_pair(3)
    points = [p for _, p in limit_curve(rep, group, 9, 1)]
    box = box_dimension(points, GRASS_SCALES)
    est = schottky_estimate(3, "a1")
    assert box.value <= est.value + 0.15


def test_criterion_11_positivity_matches_cyclic_order():
    # on depth-2 samples from two-dimensional-locus representations,
    # every angle-ordered triple is positive, and quadruple positivity
    # is a dihedral invariant on every tuple tested
    rng = np.random.default_rng(111)
    for group, rep in (schottky_pair(3), separated_pair(3)):
        flags = [f for _, f in limit_flags(rep, group, 2)]
        n = len(flags)
        assert n >= 12
        for trio in itertools.combinations(range(n), 3):
            assert triple_positive(*(flags[i] for i in trio))
        for quad in itertools.combinations(range(n), 4):
            tup = tuple(flags[i] for i in quad)
            assert quadruple_positive(*tup)
            base = True
            for r in range(1, 4):
                rotated = tup[r:] + tup[:r]
                assert quadruple_positive(*rotated) is base
            assert quadruple_positive(*tup[::-1]) is base
        for _ in range(100):
            idx = rng.permutation(n)[:4]
            tup = tuple(flags[i] for i in idx)
            value = quadruple_positive(*tup)
            for r in range(1, 4):
                rotated = tup[r:] + tup[:r]
                assert quadruple_positive(*rotated) is value
            assert quadruple_positive(*tup[::-1]) is value


def test_criterion_12_doubling_reflections():
    # every reflection image squares to the identity, fixes both
    # boundary flags to 1e-9, and 100 mixed tuples across the
    # reflection pass the quadruple positivity check
    group, rep = separated_pair(3)
    doubled = double_rep(rep, PANTS_BOUNDARY)
    for word, c, basis_mat in zip(doubled.boundary, doubled.letters,
                                  doubled.reflection_images):
        big = doubled.rep.image(c)
        assert np.abs(big @ big - np.eye(3)).max() < 1e-10 * max(
            1.0, float(np.abs(big).max()) ** 2)
    _, table = rep.factors[0]
    for word, c in zip(doubled.boundary, doubled.letters):
        m2 = np.eye(2)
        for letter in word.letters:
            m2 = m2 @ table[letter]
        lam, vec = np.linalg.eig(m2)
        frame = vec[:, np.argsort(-np.abs(lam))].real
        from orbitlab.reps import sym_power_matrix

        basis = sym_power_matrix(frame, 3)
        big = doubled.rep.image(c)
        for cols in (basis, basis[:, ::-1]):
            fixed = Flag(cols)
            moved = Flag(big @ cols)
            for k in (1, 2):
                assert flag_distance(fixed.piece(k), moved.piece(k)) < 1e-9

    r0 = reflection_across_axis(group.image("a"))
    big0 = doubled.rep.image(doubled.letters[0])
    base = limit_flags(rep, group, 5)
    pool = [(bp.theta, f) for bp, f in base]
    for bp, f in base:
        moved = apply_boundary(r0.mob, bp)
        pool.append((moved.theta, Flag(big0 @ f.basis)))
    rng = np.random.default_rng(121)
    passed = 0
    attempts = 0
    while passed < 100:
        attempts += 1
        assert attempts < 2000
        idx = rng.choice(len(pool), size=4, replace=False)
        picks = sorted((pool[i] for i in idx),
                       key=lambda p: p[0] % (2.0 * math.pi))
        gaps = []
        for i in range(4):
            d = (picks[(i + 1) % 4][0] - picks[i][0]) % (2.0 * math.pi)
            gaps.append(min(d, 2.0 * math.pi - d))
        if min(gaps) < 1e-3:
            continue
        assert quadruple_positive(*(f for _, f in picks))
        passed += 1
