import numpy as np
import pytest

from nncondense.condense import brute_force_min_consistent, verify_consistent
from nncondense.errors import DegenerateInstance
from nncondense.hardness import (
    LabelCoverInstance,
    NncInstance,
    build_gadget,
    certify_gadget,
    forced_closure,
    reduce_labelcover_to_wnnc,
    reduce_wnnc_to_nnc,
    solution_cost,
    trivial_solution,
    verify_reduction_claims,
)
from nncondense.metric import validate_matrix

ONE_EDGE = {"U": 1, "V": 1, "A": 1, "B": 1, "edges": [{"u": 0, "v": 0, "pairs": [[0, 0]]}]}
TWO_EDGE = {
    "U": 2,
    "V": 1,
    "A": 2,
    "B": 2,
    "edges": [{"u": 0, "v": 0, "pairs": [[0, 0], [1, 1]]}, {"u": 1, "v": 0, "pairs": [[1, 0]]}],
}


def test_one_edge_point_count_and_trivial_cost():
    inst = reduce_labelcover_to_wnnc(LabelCoverInstance.from_dict(ONE_EDGE))
    assert inst.n == 7
    c = inst.params["c"]
    assert solution_cost(inst, trivial_solution(inst)) == c + 2
    validate_matrix(inst.matrix)


def test_empty_edges_rejected():
    with pytest.raises(DegenerateInstance):
        reduce_labelcover_to_wnnc(LabelCoverInstance.from_dict({"U": 1, "V": 1, "A": 1, "B": 1, "edges": []}))


@pytest.mark.parametrize("data", [ONE_EDGE, TWO_EDGE])
def test_claims_pass(data):
    lc = LabelCoverInstance.from_dict(data)
    rep = verify_reduction_claims(reduce_labelcover_to_wnnc(lc))
    assert rep.passed, rep.lines()


def test_claims_negative_control():
    inst = reduce_labelcover_to_wnnc(LabelCoverInstance.from_dict(ONE_EDGE))
    sabotaged = inst.without([inst.index("p+")])
    assert not verify_reduction_claims(sabotaged).passed


def test_instance_roundtrip(tmp_path):
    inst = reduce_labelcover_to_wnnc(LabelCoverInstance.from_dict(TWO_EDGE))
    inst.save(tmp_path)
    back = NncInstance.load(tmp_path)
    assert np.allclose(back.matrix, inst.matrix) and back.roles == inst.roles
    assert verify_reduction_claims(back).passed


def test_smallest_gadget():
    g = build_gadget(1, 1, 0.5)
    assert g.instance.n == 4


def test_gadget_w4_d2_size():
    g = build_gadget(4, 2, 0.5)
    assert g.instance.n == 10 and g.side == 2
    validate_matrix(g.instance.matrix)


@pytest.mark.parametrize("w", range(1, 7))
def test_gadget_optimum_is_the_apexes(w):
    g = build_gadget(w, 2, 0.5)
    ps = g.instance.pointset()
    opt = brute_force_min_consistent(ps)
    assert len(opt) == 2
    assert verify_consistent([g.apex_pos, g.apex_neg], ps)


def test_weight_four_expansion_count():
    base = NncInstance(np.zeros((1, 1)), np.array([1], np.int8), ["p+"], ["b"], np.array([4.0]), {})
    out = reduce_wnnc_to_nnc(base, 2, gamma=0.5)
    assert out.n == 11


@pytest.mark.parametrize("w", range(2, 7))
def test_gadget_certificate(w):
    cert = certify_gadget(w, 2)
    assert cert["closure_all_T"] and cert["apexes_consistent"]
    assert cert["optimum"] == 2 and cert["exclusion_cost"] == 2
    assert cert["inclusion_forces_T"] and cert["inclusion_cost"] == 2 * w + 1


def test_closure_from_one_twin():
    g = build_gadget(3, 2, 0.5)
    forced = set(forced_closure(g.instance.pointset(), [g.T[0]]).tolist())
    assert set(g.T.tolist()) <= forced
