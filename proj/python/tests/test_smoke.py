import numpy as np
import pytest

import parapc


def chain_data(n=5000, seed=7):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    y = x + rng.standard_normal(n)
    z = y + rng.standard_normal(n)
    return parapc.Dataset(np.column_stack([x, y, z]), ["x", "y", "z"])


def test_dataset_roundtrip():
    d = chain_data(100)
    assert (d.n, d.p) == (100, 3)
    assert d.names == ["x", "y", "z"]
    assert d.to_numpy().shape == (100, 3)


def test_correlations_match_numpy():
    d = chain_data(500)
    np.testing.assert_allclose(parapc.correlations(d), np.corrcoef(d.to_numpy(), rowvar=False), atol=1e-12)


def test_fisher_z_chain():
    d = chain_data()
    assert parapc.fisher_z_test(d, "x", "z", ["y"], alpha=0.01)["independent"]
    assert not parapc.fisher_z_test(d, "x", "z", alpha=0.01)["independent"]


def test_skeleton_modes_agree():
    d, _ = parapc.simulate(20, 2.0, 500, 3)
    stable = parapc.learn_skeleton(d, mode="stable", alpha=0.01)
    par = parapc.learn_skeleton(d, mode="parallel", alpha=0.01, workers=4, mem_efficient=True, batch_size=5)
    assert stable["edges"] == par["edges"]
    assert stable["sepsets"] == par["sepsets"]
    assert stable["ci_tests"] == par["ci_tests"]


def test_cpdag_collider():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 5000))
    z = x + y + rng.standard_normal(5000)
    g = parapc.cpdag(parapc.Dataset(np.column_stack([x, y, z]), ["x", "y", "z"]), alpha=0.01)
    assert sorted(g["directed"]) == [("x", "z"), ("y", "z")]
    assert g["undirected"] == []


def test_ida_ranks_effects():
    d = chain_data()
    rows = parapc.ida(d, treatments=["x"], targets=["y", "z"], alpha=0.01)
    assert {(r["treatment"], r["target"]) for r in rows} == {("x", "y"), ("x", "z")}
    assert all(len(r["effects"]) >= 1 for r in rows)


def test_bad_arguments():
    d = chain_data(100)
    with pytest.raises(Exception):
        parapc.learn_skeleton(d, workers=0)
    with pytest.raises(ValueError, match="V1"):
        parapc.correlations(parapc.Dataset(np.zeros((5, 2))))
    with pytest.raises(ValueError):
        parapc.Dataset(np.array([[np.nan, 1.0], [2.0, 3.0]]))
