import math

import numpy as np
import pytest

from spsys import linalg, ncpoly, subproduct
from spsys.ncpoly import IdealGens, NCPoly
from spsys.subproduct import MemoryBudgetError, SubshiftSpec

from conftest import random_homogeneous_poly


def brute_legal_words(d, forbidden, n):
    """Independent legality oracle: scan every word for forbidden subwords."""
    out = []
    for w in ncpoly.all_words(n, d):
        bad = any(
            w[i:i + len(f)] == tuple(f)
            for f in forbidden
            for i in range(n - len(f) + 1)
        )
        if not bad:
            out.append(w)
    return out


# ---------------------------------------------------------------------------
# subshift spec

def test_subshift_spec_normalizes_redundant_words():
    spec = SubshiftSpec(2, ((2, 2), (1, 2, 2), (2, 2)))
    assert spec.forbidden == ((2, 2),)
    assert spec.step == 1


def test_subshift_spec_rejects_empty_word():
    with pytest.raises(ValueError):
        SubshiftSpec(2, ((),))


def test_legal_words_match_brute_force():
    spec = SubshiftSpec(3, ((1, 2), (3, 3, 1), (2, 2, 2)))
    for n in range(6):
        assert spec.legal_words(n) == brute_legal_words(3, spec.forbidden, n)


def test_followers_extend_legally():
    spec = SubshiftSpec(2, ((2, 2),))
    assert spec.followers(2, 1) == [(1,)]
    assert spec.followers(1, 1) == [(1,), (2,)]


# ---------------------------------------------------------------------------
# construction routes

def test_symmetric_dims_are_binomial(symmetric2_6):
    assert symmetric2_6.dims() == [math.comb(n + 1, n) for n in range(7)]


def test_symmetric_three_letters_dims():
    sys3 = subproduct.from_ideal(ncpoly.commutator_gens(3), 5)
    assert sys3.dims() == [math.comb(n + 2, n) for n in range(6)]


def test_golden_mean_dims_are_fibonacci(golden_7):
    assert golden_7.dims() == [1, 2, 3, 5, 8, 13, 21, 34]


def test_golden_fibers_are_coordinate_subspaces(golden_7):
    spec = golden_7.provenance["spec"]
    for n in range(1, 5):
        frame = golden_7.fiber(n).frame
        legal = spec.legal_words(n)
        assert frame.shape[1] == len(legal)
        for j, w in enumerate(legal):
            e = np.zeros(2**n)
            e[ncpoly.word_index(w, 2)] = 1.0
            assert np.allclose(frame[:, j], e)


def test_constant_dimension_two_example():
    sys_ = subproduct.from_subshift(SubshiftSpec(2, ((1, 2), (2, 2))), 6)
    assert sys_.dims() == [1, 2, 2, 2, 2, 2, 2]


def test_interrupted_run_family_literal_list():
    # forbidding only the four listed words leaves an extra legal word of
    # length six (2 followed by five 1s then 2 is NOT forbidden), so the
    # n+1 pattern breaks exactly at the first level past the listed lengths
    words = ((2, 2), (2, 1, 2), (2, 1, 1, 2), (2, 1, 1, 1, 2))
    sys_ = subproduct.from_subshift(SubshiftSpec(2, words), 6)
    assert sys_.dims() == [1, 2, 3, 4, 5, 6, 8]


def test_interrupted_run_family_depth_complete():
    # with every word "2, run of 1s, 2" of length <= depth forbidden the
    # legal words are 1^n and 1^a 2 1^b, giving dimension n + 1
    depth = 6
    words = tuple((2,) + (1,) * j + (2,) for j in range(depth - 1))
    sys_ = subproduct.from_subshift(SubshiftSpec(2, words), depth)
    assert sys_.dims() == [n + 1 for n in range(depth + 1)]


def test_dead_subshift_flagged_and_zero():
    sys_ = subproduct.from_subshift(SubshiftSpec(2, ((1,), (2,))), 4)
    assert sys_.dims() == [1, 0, 0, 0, 0]
    assert sys_.provenance["dead_from"] == 1
    assert subproduct.verify_axioms(sys_)["ok"]


def test_qmatrix_route_matches_ideal_route():
    q = np.array([[1, 2.0], [0.5, 1]], dtype=complex)
    via_q = subproduct.from_qmatrix(q, 6)
    via_ideal = subproduct.from_ideal(ncpoly.q_relation_gens(q), 6)
    for n in range(7):
        assert linalg.subspace_distance(via_q.fiber(n), via_ideal.fiber(n)) < 1e-9


def test_qmatrix_all_ones_is_symmetric(symmetric2_6):
    sys_q = subproduct.from_qmatrix(np.ones((2, 2), dtype=complex), 6)
    for n in range(7):
        assert linalg.subspace_distance(sys_q.fiber(n), symmetric2_6.fiber(n)) < 1e-9


def test_qmatrix_rejects_inadmissible():
    with pytest.raises(ValueError):
        subproduct.from_qmatrix(np.array([[1, 2.0], [2.0, 1]], dtype=complex), 3)
    with pytest.raises(ValueError):
        subproduct.from_qmatrix(np.array([[1, 0.0], [0.0, 1]], dtype=complex), 3)


def test_quadratic_commutator_matrix_is_symmetric(symmetric2_6):
    a = np.array([[0, 1], [-1, 0]], dtype=complex)
    sys_a = subproduct.from_quadratic(a, 6)
    for n in range(7):
        assert linalg.subspace_distance(sys_a.fiber(n), symmetric2_6.fiber(n)) < 1e-9


def test_quadratic_zero_matrix_is_full(full2_6):
    sys_0 = subproduct.from_quadratic(np.zeros((2, 2)), 6)
    assert sys_0.dims() == full2_6.dims()


def test_full_system_dims():
    assert subproduct.from_full(3, 4).dims() == [1, 3, 9, 27, 81]
    assert subproduct.from_full(1, 4).dims() == [1, 1, 1, 1, 1]


def test_degree_one_generator_keeps_one_letter():
    gens = IdealGens(2, [NCPoly.monomial(2, (1,))])
    sys_ = subproduct.from_ideal(gens, 5)
    assert sys_.dims() == [1, 1, 1, 1, 1, 1]


def test_generators_spanning_all_letters_give_zero_fibers():
    gens = IdealGens(2, [NCPoly.monomial(2, (1,)), NCPoly.monomial(2, (2,))])
    sys_ = subproduct.from_ideal(gens, 4)
    assert sys_.dims() == [1, 0, 0, 0, 0]
    assert subproduct.verify_axioms(sys_)["ok"]


def test_maximal_with_fibers_reproduces_step_one_subshift(golden_6):
    prescribed = [golden_6.fiber(1), golden_6.fiber(2)]
    sys_ = subproduct.maximal_with_fibers(2, prescribed, 6)
    for n in range(7):
        assert linalg.subspace_distance(sys_.fiber(n), golden_6.fiber(n)) < 1e-9


def test_maximal_with_fibers_rejects_bad_inclusion():
    # prescribe a level-2 fiber that is not inside E (x) X(1)
    e1 = linalg.span(np.array([[1.0], [0.0]]))
    bad2 = linalg.span(np.array([[0.0], [0.0], [0.0], [1.0]]))
    with pytest.raises(ValueError):
        subproduct.maximal_with_fibers(2, [e1, bad2], 4)


# ---------------------------------------------------------------------------
# axioms, recovery, units

def test_axioms_hold_on_every_route(symmetric2_6, golden_6, full2_6):
    for sys_ in (symmetric2_6, golden_6, full2_6):
        rep = subproduct.verify_axioms(sys_)
        assert rep["ok"]
        assert rep["max_residual"] < 1e-9


def test_recovered_ideal_level_two_of_symmetric(symmetric2_6):
    comp = subproduct.recover_ideal(symmetric2_6, 2)
    target = np.zeros((4, 1), dtype=complex)
    target[ncpoly.word_index((1, 2), 2), 0] = 1.0
    target[ncpoly.word_index((2, 1), 2), 0] = -1.0
    assert linalg.subspace_distance(comp, linalg.span(target)) < 1e-12


def test_ideal_round_trip_fixed_instances():
    rng = np.random.default_rng(7)
    for _ in range(3):
        gens = IdealGens(2, [random_homogeneous_poly(rng, 2, 2),
                             random_homogeneous_poly(rng, 2, 3)])
        sys_ = subproduct.from_ideal(gens, 6)
        back = subproduct.from_ideal(
            subproduct.recover_ideal_gens(sys_), 6)
        for n in range(7):
            assert linalg.subspace_distance(sys_.fiber(n), back.fiber(n)) < 1e-8


def test_unit_vectors_of_golden_mean(golden_6):
    e1 = subproduct.verify_unit(golden_6, np.array([1.0, 0.0]))
    assert e1["is_unit"] and e1["unital"]
    e2 = subproduct.verify_unit(golden_6, np.array([0.0, 1.0]))
    assert not e2["is_unit"]


def test_every_direction_is_a_unit_for_symmetric(symmetric2_6):
    rng = np.random.default_rng(8)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    rep = subproduct.verify_unit(symmetric2_6, v)
    assert rep["is_unit"]
    assert not rep["unital"]  # not normalized
    rep2 = subproduct.verify_unit(symmetric2_6, v / np.linalg.norm(v))
    assert rep2["unital"]


def test_budget_guard_trips():
    with pytest.raises(MemoryBudgetError):
        subproduct.from_ideal(ncpoly.commutator_gens(3), 6, budget=1000)


def test_provenance_kinds(symmetric2_6, golden_6, full2_6):
    assert symmetric2_6.kind == "ideal"
    assert golden_6.kind == "subshift"
    assert full2_6.kind == "full"
