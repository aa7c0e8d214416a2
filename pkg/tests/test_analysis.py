import cmath
import itertools
import json
import math

import numpy as np
import pytest

from stbc import analysis
from stbc.codes import StbcCode, ciod2_code, get_code
from stbc.constellation import cross_qam_32, square_qam


def test_min_det_proposed_2x2():
    rep = analysis.min_det_search(get_code("proposed2x2"), square_qam(4))
    assert abs(rep.delta_min - 3.2) < 1e-9 and rep.full_rank
    assert rep.evaluations == (9 ** 4 - 1) // 2


def test_min_det_golden_16():
    rep = analysis.min_det_search(get_code("golden"), square_qam(16))
    assert abs(rep.delta_min - 3.2) < 1e-9


def test_min_det_ciod2():
    rep = analysis.min_det_search(ciod2_code(), square_qam(4))
    assert abs(rep.delta_min - 16 / 5) < 1e-9


def test_argmin_reproduces_value():
    code = get_code("golden")
    rep = analysis.min_det_search(code, square_qam(4))
    dx = np.array(rep.argmin_difference)
    assert abs(abs(np.linalg.det(code.encode(dx))) ** 2 - rep.delta_min) < 1e-9
    d = json.loads(rep.to_json())
    assert d["code_name"] == "golden" and len(d["argmin_difference"]) == 4


def test_difference_alphabet_size():
    for m in (4, 16, 64):
        assert len(analysis.difference_alphabet(square_qam(m))) == (2 * math.isqrt(m) - 1) ** 2


def test_pairwise_equals_difference_search():
    code, const = ciod2_code(), square_qam(4)
    pts = const.points
    best = math.inf
    for a in itertools.product(pts, repeat=2):
        for b in itertools.product(pts, repeat=2):
            if a == b:
                continue
            ds = code.encode(np.array(a)) - code.encode(np.array(b))
            best = min(best, abs(np.linalg.det(ds @ ds.conj().T)))
    rep = analysis.min_det_search(code, const)
    assert abs(best - rep.delta_min) < 1e-9


def test_global_phase_invariance():
    base = get_code("proposed2x2")
    phase = cmath.exp(0.7j)
    wrapped = StbcCode("phased", 2, 2, 4, lambda x: phase * base.encode(x))
    a = analysis.min_det_search(base, square_qam(4)).delta_min
    b = analysis.min_det_search(wrapped, square_qam(4)).delta_min
    assert abs(a - b) < 1e-9


def test_scaling_degree_four():
    base = get_code("golden")
    s = 1.7
    scaled = StbcCode("scaled", 2, 2, 4, lambda x: base.encode(s * np.asarray(x)))
    a = analysis.min_det_search(base, square_qam(4)).delta_min
    b = analysis.min_det_search(scaled, square_qam(4)).delta_min
    assert abs(b - s ** 4 * a) < 1e-9


def test_budget_exceeded():
    with pytest.raises(analysis.SearchBudgetExceeded):
        analysis.min_det_search(get_code("proposed4x2"), square_qam(16))


def test_sampled_bound_not_below_exhaustive_value():
    rep = analysis.min_det_sampled(get_code("proposed4x2"), square_qam(16), samples=20000, seed=1)
    assert not rep.exhaustive
    assert rep.delta_min >= 10.24 - 1e-6


def test_coding_gain():
    rep = analysis.MinDetReport("proposed2x2", 4, 3.2, [], True, 1)
    assert abs(analysis.coding_gain(rep, 2) - math.sqrt(3.2)) < 1e-12
    assert abs(analysis.coding_gain(rep, 2) - 1.78885) < 1e-5
    one = analysis.MinDetReport("x", 4, 1.0, [], True, 1)
    assert analysis.coding_gain(one, 3) == 1.0
    four = analysis.MinDetReport("proposed4x2", 4, 10.24, [], True, 1)
    assert abs(analysis.coding_gain(four, 4) - 1.78885) < 1e-5
    with pytest.raises(analysis.RankDeficientCode):
        analysis.coding_gain(analysis.MinDetReport("x", 4, 0.0, [], False, 1), 2)


def test_zj_bound_example_vector():
    code = get_code("proposed2x2")
    assert abs(abs(np.linalg.det(code.encode(np.array([1, 0, 0, 0])))) - 1 / math.sqrt(5)) < 1e-12
    assert np.linalg.det(code.encode(np.zeros(4))) == 0


def test_zj_bound_grid():
    res = analysis.theoretical_min_det_zj(bound=2)
    assert abs(res["min_abs_det"] - 1 / math.sqrt(5)) < 1e-9
    assert res["nonzero_singular"] == 0


def test_rank_profile():
    assert analysis.rank_profile(get_code("proposed2x2"), square_qam(4)) == 2
    assert analysis.rank_profile(ciod2_code(rotation=0.0), square_qam(4)) == 1


def test_normalized_min_det_equal_for_golden_and_proposed():
    const = square_qam(4)
    a = analysis.normalized_min_det(analysis.min_det_search(get_code("proposed2x2"), const), const)
    b = analysis.normalized_min_det(analysis.min_det_search(get_code("golden"), const), const)
    assert abs(a - b) < 1e-9


def test_format_table():
    reps = [analysis.min_det_search(get_code("golden"), square_qam(4))]
    table = analysis.format_table(reps)
    assert "golden" in table and "3.200000" in table


def test_cross32_difference_search_runs():
    rep = analysis.min_det_search(ciod2_code(), cross_qam_32())
    assert rep.full_rank and abs(rep.delta_min - 3.2) < 1e-9


def test_rank_profile_4x2_full():
    assert analysis.rank_profile(get_code("proposed4x2"), square_qam(4)) == 4
