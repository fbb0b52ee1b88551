"""Serialization round trips and canonical forms."""

import warnings
from fractions import Fraction as Q

import pytest

from mptypes import jsonio
from mptypes.apartment import ApartmentPoint, GroupConfig
from mptypes.errors import ValidationError
from mptypes.graded import GradedElement
from mptypes.refine import DMPPair
from mptypes.solver import MultiplicityVector


def make_cfg():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return GroupConfig(n=2, q=5, m=16)


CFG = make_cfg()


def test_frac_forms():
    assert jsonio.frac_str(Q(1, 2)) == "1/2"
    assert jsonio.frac_str(3) == "3/1"
    assert jsonio.parse_frac("-5/8") == Q(-5, 8)
    with pytest.raises(ValidationError):
        jsonio.parse_frac("1/0")


def test_pair_round_trip():
    x = ApartmentPoint.of([Q(1, 2), 0])
    phi = GradedElement.make(CFG, x, Q(-1, 2), {(0, 1): 2})
    pair = DMPPair.make(CFG, Q(1, 2), x, phi)
    data = jsonio.pair_to_json(pair)
    assert data["phi"] == [[1, 2, 2]]  # 1-based externally
    back = jsonio.pair_from_json(CFG, data)
    assert back == pair
    data_bad = dict(data)
    data_bad["lift"] = [1, 1]
    with pytest.raises(ValidationError):
        jsonio.pair_from_json(CFG, data_bad)


def test_mult_vector_round_trip():
    x = ApartmentPoint.of([0, 0])
    pair = DMPPair.make(CFG, 1, x, GradedElement.zero(x, -1))
    v = MultiplicityVector.make(0, {pair: 7}, source="by-hand")
    back = jsonio.mult_vector_from_json(CFG, jsonio.mult_vector_to_json(v))
    assert back == v


def test_dump_is_stable():
    payload = {"b": [1, 2], "a": "x"}
    assert jsonio.dump(payload) == jsonio.dump({"a": "x", "b": [1, 2]})
