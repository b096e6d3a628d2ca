import math

import pytest

import contactlab as cl


def square(id_, x, y, side=1.0):
    return cl.Block(id_, [(x, y), (x + side, y), (x + side, y + side), (x, y + side)])


def test_contact_codes():
    a = square(0, 0, 0)
    assert cl.classify_contact(a, square(1, 3, 0)) == 0
    assert cl.classify_contact(a, square(1, 1, 1)) == 1
    assert cl.classify_contact(a, square(1, 1, 0)) == 3
    diamond = cl.Block(1, [(1.0, 0.5), (1.5, 0.0), (2.0, 0.5), (1.5, 1.0)])
    assert cl.classify_contact(a, diamond) == 2
    assert cl.min_separation(a, square(1, 3, 0)) == pytest.approx(2.0)


def test_block_helpers():
    b = square(4, 0, 0, 2.0)
    assert b.id == 4
    assert b.area() == pytest.approx(4.0)
    assert b.centroid() == pytest.approx((1.0, 1.0))
    r = b.rotated(math.pi / 2, 1.0, 1.0)
    assert r.area() == pytest.approx(4.0)
    assert b.translated(1.0, 0.0).centroid() == pytest.approx((2.0, 1.0))


def test_errors_map_to_python():
    with pytest.raises(cl.InvalidBlock):
        cl.Block(0, [(0, 0), (1, 0)])
    with pytest.raises(cl.OverlapError):
        cl.classify_contact(square(0, 0, 0), square(1, 0.5, 0.5))
    with pytest.raises(cl.ParseError):
        cl.TskModel.from_json("{")
    assert issubclass(cl.ParseError, cl.ContactlabError)


def test_model_json_and_inference():
    text = '{"n": 1, "rules": [{"mf": [{"c": 0, "sigma": 1}], "p": [2.0, 0.5]}]}'
    m = cl.TskModel.from_json(text)
    assert m.n == 1 and m.rule_count == 1
    assert m.infer([2.0]) == 3.0
    assert m.predict([2.0]) == 3
    assert cl.TskModel.from_json(m.to_json()).infer([0.7]) == m.infer([0.7])


def test_subtractive_cluster_two_groups():
    data = [[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 5.0], [5.1, 5.0]]
    centers = cl.subtractive_cluster(data, 1.0)
    assert len(centers) == 2
    assert {c < 3 for c in centers} == {True, False}


def test_generate_and_train():
    d = cl.generate(seed=42)
    assert len(d["train"]["features"]) == 100
    assert len(d["check"]["features"]) == 50
    assert all(len(row) == cl.FEATURE_COUNT for row in d["train"]["features"])
    assert set(d["trace"]) == {0, 1, 2, 3}

    nfis = cl.train_nfis(13, seed=42)
    assert nfis["model"].rule_count == 13
    trace = nfis["lse_rmse"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert nfis["check_accuracy"] >= 0.75

    som = cl.train_som(seed=42)
    assert len(som["labels"]) == 9
    assert set(som["labels"]) == {0, 1, 2, 3}
    assert som["train_accuracy"] >= 0.9
    assert cl.train_som(seed=42)["weights"] == som["weights"]
