from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gmix.arrays import ObservationShape
from gmix.assignment import Assignment
from gmix.errors import DimensionMismatch, ModelError
from gmix.model import (
    CommunityIndicator,
    CommunitySigma,
    ConstantSigma,
    HypergraphPhi,
    LabelDifference,
    MatrixSigma,
    ModelSpec,
    TableDriven,
    VertexIndicator,
    build_signal,
    is_theta_preserving,
    model_from_dict,
    model_to_dict,
    phi_field,
)
from gmix.observation import (
    ObservationMatrix,
    RngSeed,
    l_phi,
    objective,
    objective_gap,
    observe,
    residual_norm,
    sample_noise,
)

TABLE = [[1.0, -1.0, 0.5], [0.0, 2.0, 2.0]]


def matrix_models(n, k):
    return {
        "community_indicator": ModelSpec(n, k, CommunityIndicator(), ConstantSigma(1.0)),
        "vertex_indicator": ModelSpec(n, k, VertexIndicator(), ConstantSigma(1.0)),
        "label_difference": ModelSpec(n, k, LabelDifference(), ConstantSigma(1.0)),
        "table": ModelSpec(n, k, TableDriven(np.array(TABLE)[:, :k]), ConstantSigma(1.0)),
    }


@pytest.mark.parametrize("n,k", [(3, 2), (4, 3)])
def test_matrix_signals_match_loop_oracle(n, k):
    for kind, model in matrix_models(n, k).items():
        for labels in oracles.all_assignments(n, k):
            expected = oracles.matrix_signal(kind, labels, k, [row[:k] for row in TABLE])
            got = build_signal(model, Assignment(labels, k)).values
            assert got.tolist() == expected, kind


@pytest.mark.parametrize("s1,s2", [(2, 2), (2, 3), (3, 4)])
def test_hypergraph_signal_matches_loop_oracle(s1, s2):
    n, k = 3, 2
    model = ModelSpec(n, k, HypergraphPhi(s1, s2), ConstantSigma(1.0))
    for labels in oracles.all_assignments(n, k):
        got = build_signal(model, Assignment(labels, k)).values.tolist()
        assert got == oracles.hypergraph_signal(labels, s1, s2)


def test_hypergraph_table_phi():
    table = {t: float(sum(t)) for t in itertools.product((1, 2), repeat=2)}
    model = ModelSpec(3, 2, HypergraphPhi(2, 2, table), ConstantSigma(1.0))
    labels = (1, 2, 2)
    got = build_signal(model, Assignment(labels, 2)).values.tolist()
    assert got == oracles.hypergraph_signal(labels, 2, 2, phi=lambda t: float(sum(t)))
    with pytest.raises(ModelError):
        ModelSpec(3, 2, HypergraphPhi(2, 2, {(1, 1): 1.0}), ConstantSigma(1.0)).phi_table(2)
    with pytest.raises(ModelError):
        HypergraphPhi(2, 2, {(1, 1): -1.0})


def test_model_validation():
    with pytest.raises(ModelError):
        ModelSpec(1, 2, VertexIndicator(), ConstantSigma(1.0))
    with pytest.raises(ModelError):
        ModelSpec(4, 2, VertexIndicator(), ConstantSigma(1.0), c=1.0)
    with pytest.raises(ModelError):
        ModelSpec(4, 2, VertexIndicator(), MatrixSigma(np.ones(3)))
    with pytest.raises(ModelError):
        ConstantSigma(2.0, b1=1.0)
    with pytest.raises(ModelError):
        ConstantSigma(0.0)
    with pytest.raises(ModelError):
        HypergraphPhi(2, 5)
    with pytest.raises(DimensionMismatch):
        build_signal(ModelSpec(4, 2, VertexIndicator(), ConstantSigma(1.0)), Assignment([1, 2], 2))
    with pytest.raises(ModelError):
        TableDriven(np.ones((2, 1))).batch(np.array([[0, 1]]), 2)


def test_community_sigma_follows_truth():
    y = Assignment([1, 2], 2)
    noise = CommunitySigma(y, {(1, 1): 2.0, (2, 2): 0.5}, default=1.0)
    model = ModelSpec(2, 2, HypergraphPhi(2, 2), noise)
    assert model.sigma.tolist() == [2.0, 1.0, 1.0, 0.5]
    assert phi_field(model).values.tolist() == [0.5, 1.0, 1.0, 2.0]
    assert model.scaled(2.0).sigma.tolist() == [4.0, 2.0, 2.0, 1.0]
    with pytest.raises(DimensionMismatch):
        observe(model, Assignment([2, 1], 2), sample_noise(model, RngSeed(0)))


def test_theta_preserving():
    n, k = 4, 3
    models = matrix_models(n, k)
    swap = (2, 1, 3)
    assert is_theta_preserving(models["vertex_indicator"], swap)
    assert not is_theta_preserving(models["community_indicator"], swap)
    assert not is_theta_preserving(models["label_difference"], swap)
    assert is_theta_preserving(models["label_difference"], (1, 2, 3))
    assert not is_theta_preserving(models["vertex_indicator"], (1, 1, 3))
    block = ModelSpec(n, k, HypergraphPhi(2, 3), ConstantSigma(1.0))
    assert all(is_theta_preserving(block, p) for p in itertools.permutations((1, 2, 3)))
    symmetric = TableDriven(np.array([[1.0, 1.0, 0.0]]))
    assert is_theta_preserving(ModelSpec(n, k, symmetric, ConstantSigma(1.0)), swap)


@pytest.mark.parametrize(
    "model",
    [
        ModelSpec(4, 2, TableDriven(np.array([[1.0, 2.0]])), MatrixSigma(np.arange(1, 5), b1=4)),
        ModelSpec(3, 2, HypergraphPhi(2, 3), ConstantSigma(0.5, b1=1.0), c=0.3),
        ModelSpec(
            3, 2, HypergraphPhi(2, 2, {(a, b): a * b for a in (1, 2) for b in (1, 2)}),
            CommunitySigma(Assignment([1, 1, 2], 2), {(1, 2): 3.0}, default=1.0),
        ),
    ],
)
def test_model_document_round_trip(model):
    doc = model_to_dict(model)
    again = model_from_dict(doc)
    assert model_to_dict(again) == doc
    x = Assignment([1, 2] + [1] * (model.n - 2), 2)
    assert np.array_equal(build_signal(model, x).values, build_signal(again, x).values)
    assert np.array_equal(model.sigma, again.sigma)


def test_model_document_errors():
    with pytest.raises(ModelError):
        model_from_dict({"n": 4, "k": 2, "signal": {"kind": "nope"}, "noise": {"kind": "constant", "sigma": 1}})
    with pytest.raises(ModelError):
        model_from_dict({"n": 4, "k": 2, "signal": {"kind": "vertex_indicator"}})
    with pytest.raises(ModelError):
        model_from_dict({"n": 2, "k": 2, "signal": {"kind": "hypergraph", "s1": 2, "s2": 2},
                         "noise": {"kind": "community"}})


# -- L_Phi and the objective ----------------------------------------------------

BLOCK4 = ModelSpec(4, 2, HypergraphPhi(2, 2), ConstantSigma(1.0))
Y4 = Assignment([1, 1, 2, 2], 2)


def test_single_move_value_on_four_vertices():
    # oracle: explicit double loop over ordered pairs
    moved = (2, 1, 2, 2)
    sig = [1.0] * 16
    expected = oracles.weighted_sq_dist(
        oracles.hypergraph_signal(moved, 2, 2), oracles.hypergraph_signal(Y4.labels, 2, 2), sig
    )
    assert expected == 96.0
    assert l_phi(BLOCK4, Assignment(moved, 2), Y4) == 96.0


def test_swap_value_on_four_vertices():
    # vertices 1 and 3 exchange communities; the pairs touching both move only once
    swapped = (2, 1, 1, 2)
    expected = oracles.weighted_sq_dist(
        oracles.hypergraph_signal(swapped, 2, 2), oracles.hypergraph_signal(Y4.labels, 2, 2),
        [1.0] * 16,
    )
    assert expected == 128.0
    assert l_phi(BLOCK4, Assignment(swapped, 2), Y4) == 128.0


def test_l_phi_zero_on_identical_and_relabelled():
    assert l_phi(BLOCK4, Y4, Y4) == 0.0
    assert l_phi(BLOCK4, Assignment([2, 2, 1, 1], 2), Y4) == 0.0


@given(st.integers(0, 2**32), st.floats(0.1, 5.0))
@settings(max_examples=60, deadline=None)
def test_objective_identities(seed, scale):
    model = ModelSpec(5, 2, HypergraphPhi(2, 3), ConstantSigma(scale))
    y = Assignment([1, 1, 2, 2, 1], 2)
    x = Assignment([1, 2, 2, 2, 1], 2)
    W = sample_noise(model, RngSeed(seed))
    K = observe(model, y, W)
    k_norm = float(np.sum(K.values ** 2) / scale ** 2)
    for z in (x, y):
        r = residual_norm(model, K, z)
        assert abs(objective(model, K, z) + k_norm - r) <= 1e-9 * max(r, k_norm)
    direct = objective(model, K, x) - objective(model, K, y)
    gap = objective_gap(model, W, x, y)
    assert abs(direct - gap) <= 1e-9 * max(1.0, abs(direct), k_norm)


def test_observe_and_sample_noise():
    model = BLOCK4.scaled(2.0)
    W = sample_noise(model, RngSeed(5, 1))
    assert W.shape == model.shape
    K = observe(model, Y4, W)
    assert np.allclose(K.values, build_signal(model, Y4).values + 2.0 * W.values)
    assert np.array_equal(sample_noise(model, RngSeed(5, 1)).values, W.values)
    with pytest.raises(ValueError):
        RngSeed(-1)
    with pytest.raises(DimensionMismatch):
        objective(model, ObservationMatrix(ObservationShape.matrix(1, 1), [0.0]), Y4)
