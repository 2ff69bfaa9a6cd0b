"""Tests for the Dataset container, file ingestion, and interactions."""

import numpy as np
import pytest

from ssglm.data import Dataset, expand_interactions, load_dataset


def _write_csv(tmp_path, text, name="d.csv"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_dataset_validation():
    with pytest.raises(ValueError, match="row counts"):
        Dataset(Y=np.zeros(3), X=np.zeros((4, 2)), labels=None)
    with pytest.raises(ValueError, match="non-finite"):
        Dataset(Y=np.array([np.nan]), X=np.zeros((1, 1)), labels=None)
    with pytest.raises(ValueError, match="label count"):
        Dataset(Y=np.zeros(2), X=np.zeros((2, 2)), labels=["a"])
    with pytest.raises(ValueError, match="duplicate"):
        Dataset(Y=np.zeros(2), X=np.zeros((2, 2)), labels=["a", "a"])


def test_center_round_trip():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 3)) + 2.0
    ds = Dataset(Y=rng.standard_normal(30), X=X, labels=None)
    c = ds.center()
    assert np.all(np.abs(c.X.mean(axis=0)) < 1e-12)
    assert c.centered.all()
    assert np.allclose(c.uncentered_X(), X, atol=1e-12)


def test_load_dataset_round_trip(tmp_path):
    path = _write_csv(tmp_path,
                      "y,a,b\n1.0,2.0,3.0\n0.5,-1.0,4.0\n2.5,0.0,1.0\n")
    ds = load_dataset(path, "y", center=False)
    assert ds.labels == ["a", "b"]
    assert np.allclose(ds.Y, [1.0, 0.5, 2.5], atol=1e-12)
    assert np.allclose(ds.X[:, 0], [2.0, -1.0, 0.0], atol=1e-12)
    centered = load_dataset(path, "y")
    assert np.all(np.abs(centered.X.mean(axis=0)) < 1e-12)


def test_load_dataset_tab_delimited(tmp_path):
    path = _write_csv(tmp_path, "y\ta\n1\t2\n3\t4\n", name="d.tsv")
    ds = load_dataset(path, "y", delimiter="\t", center=False)
    assert np.allclose(ds.X[:, 0], [2.0, 4.0])


def test_load_dataset_error_diagnostics(tmp_path):
    with pytest.raises(ValueError, match="empty file"):
        load_dataset(_write_csv(tmp_path, ""), "y")
    with pytest.raises(ValueError, match="duplicate column"):
        load_dataset(_write_csv(tmp_path, "y,a,a\n1,2,3\n"), "y")
    with pytest.raises(ValueError, match="not found"):
        load_dataset(_write_csv(tmp_path, "a,b\n1,2\n"), "y")
    with pytest.raises(ValueError, match="row 3.*column 'b'"):
        load_dataset(_write_csv(tmp_path, "y,b\n1,2\n3,oops\n"), "y")
    with pytest.raises(ValueError, match="blank cell at row 2"):
        load_dataset(_write_csv(tmp_path, "y,b\n1,\n"), "y")
    with pytest.raises(ValueError, match="row 2 has 3 fields"):
        load_dataset(_write_csv(tmp_path, "y,b\n1,2,3\n"), "y")
    with pytest.raises(ValueError, match="no data rows"):
        load_dataset(_write_csv(tmp_path, "y,b\n"), "y")


def test_expand_interactions():
    rng = np.random.default_rng(3)
    mod = rng.binomial(1, 0.5, 40).astype(float)
    a = rng.standard_normal(40)
    ds = Dataset(Y=rng.standard_normal(40),
                 X=np.column_stack([mod, a]), labels=["trt", "a"])
    out = expand_interactions(ds, "trt", ["a"], prefix="trt_x_")
    assert out.labels == ["trt", "a", "trt_x_a"]
    assert np.allclose(out.X[:, 2], mod * a, atol=1e-12)


def test_expand_interactions_on_centered_input():
    rng = np.random.default_rng(4)
    mod = rng.binomial(1, 0.5, 40).astype(float)
    a = rng.standard_normal(40) + 3.0
    ds = Dataset(Y=rng.standard_normal(40),
                 X=np.column_stack([mod, a]), labels=["m", "a"]).center()
    out = expand_interactions(ds, "m", ["a"], prefix="i_")
    # products are formed on the raw values, then re-centered
    prod = mod * a
    assert np.allclose(out.X[:, 2], prod - prod.mean(), atol=1e-12)
    assert out.centered.all()


def test_expand_interactions_validation():
    ds = Dataset(Y=np.zeros(4), X=np.column_stack(
        [np.array([0.0, 1, 0, 1]), np.ones(4)]), labels=["m", "a"])
    with pytest.raises(ValueError, match="modifier column 'z'"):
        expand_interactions(ds, "z", ["a"], "i_")
    with pytest.raises(ValueError, match="target column 'z'"):
        expand_interactions(ds, "m", ["z"], "i_")
    with pytest.raises(ValueError, match="collides"):
        expand_interactions(ds, "m", ["a"], "")       # would duplicate "a"
    bad = Dataset(Y=np.zeros(3), X=np.column_stack(
        [np.array([0.0, 2.0, 1.0]), np.ones(3)]), labels=["m", "a"])
    with pytest.raises(ValueError, match="binary 0/1"):
        expand_interactions(bad, "m", ["a"], "i_")
