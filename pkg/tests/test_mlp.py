import math
import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st

from focalpolicy.domains import TileDomain
from focalpolicy.mlp import (CANONICAL_15PUZZLE, Layer, MlpModel, MlpPolicy, ModelFormatError, decode_tile_state,
                             encode_tile_state, infer_scores, load_model, model_from_bytes, model_from_text,
                             random_model, softmax)


def reference_scores(model, x):
    """Plain-Python evaluation, one multiply-add at a time."""
    v = [float(t) for t in x]
    for layer in model.layers:
        w = layer.weights.tolist()
        out = []
        for r, row in enumerate(w):
            acc = float(layer.bias[r])
            for a, b in zip(row, v):
                acc += a * b
            out.append(max(acc, 0.0) if layer.activation == "relu" else acc)
        v = out
    m = max(v)
    e = [math.exp(t - m) for t in v]
    s = sum(e)
    return [t / s for t in e]


def test_softmax_examples():
    assert softmax([0, 0, 0, 0]).tolist() == [0.25] * 4
    e = math.e
    want = [e / (e + 3)] + [1 / (e + 3)] * 3
    assert np.allclose(softmax([1, 0, 0, 0]), want, rtol=0, atol=1e-15)
    assert np.round(softmax([1, 0, 0, 0]), 4).tolist() == [0.4754, 0.1749, 0.1749, 0.1749]


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=10), st.floats(-100, 100))
def test_softmax_normalized_and_shift_invariant(logits, c):
    p = softmax(logits)
    assert abs(p.sum() - 1) <= 1e-9 and (p >= 0).all() and (p <= 1).all()
    assert np.allclose(softmax(np.asarray(logits) + c), p, rtol=0, atol=1e-12)


def test_identity_model_passes_through():
    m = MlpModel([Layer(np.eye(2), np.zeros(2), "identity")])
    assert np.allclose(infer_scores(m, [1, 0]), softmax([1, 0]), atol=1e-15)


def test_canonical_parameter_count():
    m = random_model(CANONICAL_15PUZZLE, seed=0)
    assert m.parameter_count() == 256 * 160 + 160 + 160 * 80 + 80 + 80 * 16 + 16 + 16 * 4 + 4 == 55_364
    assert m.shape == CANONICAL_15PUZZLE


def test_round_trip_byte_identical(tmp_path):
    m = random_model(CANONICAL_15PUZZLE, seed=1)
    p = tmp_path / "m.bin"
    m.save(p)
    again = load_model(p)
    q = tmp_path / "n.bin"
    again.save(q)
    assert p.read_bytes() == q.read_bytes()


def test_file_layout():
    m = MlpModel([Layer(np.array([[1.0, 2.0]]), np.array([3.0]), "relu")])
    assert m.to_bytes() == b"MLP1" + struct.pack("<I", 1) + struct.pack("<IIB", 1, 2, 1) + \
        struct.pack("<3d", 1.0, 2.0, 3.0)


def test_truncated_and_corrupt_files():
    data = random_model((4, 3, 2), seed=2).to_bytes()
    with pytest.raises(ModelFormatError, match="offset"):
        model_from_bytes(data[:-5])
    with pytest.raises(ModelFormatError, match="offset 0"):
        model_from_bytes(b"MLP2" + data[4:])
    with pytest.raises(ModelFormatError, match="trailing"):
        model_from_bytes(data + b"\0")
    bad = bytearray(data)
    bad[16] = 7
    with pytest.raises(ModelFormatError, match="activation"):
        model_from_bytes(bytes(bad))


def test_layer_chain_checked():
    with pytest.raises(ModelFormatError, match="expects"):
        MlpModel([Layer(np.zeros((3, 2)), np.zeros(3)), Layer(np.zeros((2, 4)), np.zeros(2))])


def test_nonfinite_weights_rejected():
    w = np.zeros((2, 2))
    w[0, 0] = np.nan
    with pytest.raises(ModelFormatError):
        MlpModel([Layer(w, np.zeros(2))])


def test_uniform_logits_give_uniform_output():
    m = random_model(CANONICAL_15PUZZLE, seed=3)
    m.layers[-1].weights[:] = 0
    m.layers[-1].bias[:] = 0.7
    out = infer_scores(m, encode_tile_state(TileDomain(4).goal))
    assert np.abs(out - 0.25).max() <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_matches_reference_evaluation(seed):
    m = random_model((16, 12, 8, 4), seed=seed, scale=0.5)
    x = np.random.default_rng(seed).normal(size=16)
    assert np.allclose(infer_scores(m, x), reference_scores(m, x), rtol=0, atol=1e-12)


def test_inference_is_deterministic():
    m = random_model(CANONICAL_15PUZZLE, seed=4)
    x = encode_tile_state(tuple(range(16)))
    assert infer_scores(m, x).tobytes() == infer_scores(m, x).tobytes()


def test_text_dump_conversion():
    text = """# tiny
layer 2 3 relu
1 0 0
0 1 0
0.5 -0.5
layer 2 2 identity
1 0
0 1
0 0
"""
    m = model_from_text(text)
    assert m.shape == (3, 2, 2)
    assert np.allclose(infer_scores(m, [1, 2, 3]), softmax([1.5, 1.5]))
    with pytest.raises(ModelFormatError, match="line 1"):
        model_from_text("layer 2 3 relu\n1 0\n")
    with pytest.raises(ModelFormatError, match="line 2: expected 3 weights"):
        model_from_text("layer 2 3 relu\n1 0\n1 1 1\n0 0\n")


def test_encoding_of_goal():
    x = encode_tile_state(tuple(range(16)))
    assert set(np.flatnonzero(x).tolist()) == {16 * c + c for c in range(16)}


@given(st.permutations(list(range(16))))
def test_encoding_round_trip(perm):
    x = encode_tile_state(perm)
    assert x.sum() == 16 and (x.reshape(16, 16).sum(axis=1) == 1).all()
    assert decode_tile_state(x) == tuple(perm)


def test_mlp_policy_on_tiles():
    pol = MlpPolicy(random_model(CANONICAL_15PUZZLE, seed=5))
    s = pol.scores(TileDomain(4).goal)
    assert s.shape == (4,) and abs(s.sum() - 1) <= 1e-9
    with pytest.raises(ValueError):
        encode_tile_state(tuple(range(9)))
