import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jrc.nn import (
    AdamConfig,
    CheckpointError,
    Parameter,
    Tensor,
    adam_step,
    add_uniform_noise,
    bound,
    channel_matmul,
    concat,
    conv2d,
    conv_transpose2d,
    decode_params,
    depth_to_space,
    encode_params,
    lower_bound,
    lr_decay,
    no_grad,
    normal_cdf,
    relu,
    relu6,
    step_rng,
    ste_round,
    upsample_nearest,
)

from gradcheck import check_grads

RNG = np.random.default_rng(1234)


# --------------------------------------------------------------------------- conv


def test_conv_pointwise_stride2():
    out = conv2d(Tensor(np.ones((1, 1, 4, 4))), Tensor(np.full((1, 1, 1, 1), 2.0)), stride=2)
    assert out.shape == (1, 1, 2, 2)
    assert np.all(out.data == 2.0)


def test_conv_identity_kernel():
    x = RNG.standard_normal((2, 1, 7, 5))
    w = np.zeros((1, 1, 3, 3))
    w[0, 0, 1, 1] = 1.0
    assert np.array_equal(conv2d(Tensor(x), Tensor(w)).data, x)


def test_conv_matches_direct_loop():
    x = RNG.standard_normal((1, 2, 6, 5))
    w = RNG.standard_normal((3, 2, 3, 3))
    b = RNG.standard_normal(3)
    out = conv2d(Tensor(x), Tensor(w), Tensor(b), stride=2).data
    xp = np.pad(x, ((0, 0), (0, 0), (0, 1), (1, 1)))  # ceil padding: total 1 / 2 split low-first
    ref = np.zeros((1, 3, 3, 3))
    for o in range(3):
        for i in range(3):
            for j in range(3):
                ref[0, o, i, j] = (xp[0, :, 2 * i:2 * i + 3, 2 * j:2 * j + 3] * w[o]).sum() + b[o]
    assert np.allclose(out, ref)


@pytest.mark.parametrize("size,stride,k", [(16, 2, 5), (13, 2, 5), (9, 1, 3), (16, 4, 3), (7, 2, 1)])
def test_conv_output_is_ceil(size, stride, k):
    out = conv2d(Tensor(np.zeros((1, 2, size, size + 3))), Tensor(np.zeros((4, 2, k, k))), stride=stride)
    assert out.shape == (1, 4, -(-size // stride), -(-(size + 3) // stride))


def test_conv_shape_mismatch():
    with pytest.raises(ValueError):
        conv2d(Tensor(np.zeros((1, 3, 4, 4))), Tensor(np.zeros((1, 2, 3, 3))))
    with pytest.raises(ValueError):
        conv_transpose2d(Tensor(np.zeros((1, 3, 4, 4))), Tensor(np.zeros((2, 1, 4, 4))), stride=2)


@pytest.mark.parametrize("stride,k", [(1, 3), (2, 5), (2, 4), (4, 4)])
def test_conv_gradients(stride, k):
    x = RNG.standard_normal((2, 3, 9, 8))
    w = RNG.standard_normal((4, 3, k, k))
    b = RNG.standard_normal(4)
    check_grads(lambda a, ww, bb: conv2d(a, ww, bb, stride=stride), [x, w, b], RNG)


def test_conv_transpose_trivial():
    out = conv_transpose2d(Tensor(np.ones((1, 1, 1, 1))), Tensor(np.ones((1, 1, 2, 2))), stride=2)
    assert out.shape == (1, 1, 2, 2)
    assert np.all(out.data == 1.0)


def test_conv_transpose_pointwise():
    x = RNG.standard_normal((1, 3, 4, 5))
    w = RNG.standard_normal((3, 2, 1, 1))
    out = conv_transpose2d(Tensor(x), Tensor(w), stride=1).data
    assert np.allclose(out, np.einsum("bchw,co->bohw", x, w[:, :, 0, 0]))


@pytest.mark.parametrize("stride,k", [(2, 4), (4, 4), (1, 3), (2, 2)])
def test_conv_transpose_gradients(stride, k):
    x = RNG.standard_normal((2, 3, 4, 5))
    w = RNG.standard_normal((3, 2, k, k))
    b = RNG.standard_normal(2)
    check_grads(lambda a, ww, bb: conv_transpose2d(a, ww, bb, stride=stride), [x, w, b], RNG)


@pytest.mark.parametrize("stride,k", [(2, 4), (4, 4), (1, 3), (2, 2)])
def test_conv_transpose_is_adjoint(stride, k):
    # the same array is (out, in) for conv2d and (in, out) for the transpose
    w = RNG.standard_normal((3, 2, k, k))
    y = RNG.standard_normal((2, 3, 5, 4))
    x = RNG.standard_normal((2, 2, 5 * stride, 4 * stride))
    cx = conv2d(Tensor(x), Tensor(w), stride=stride).data
    cty = conv_transpose2d(Tensor(y), Tensor(w), stride=stride).data
    assert np.isclose((cx * y).sum(), (x * cty).sum())


# --------------------------------------------------------------------------- pointwise


def test_relu_values():
    v = Tensor(np.array([-1.0, 0.0, 3.0, 9.0]), requires_grad=True)
    assert relu(v).data.tolist() == [0, 0, 3, 9]
    r6 = relu6(v)
    assert r6.data.tolist() == [0, 0, 3, 6]
    r6.sum().backward()
    assert v.grad[3] == 0.0 and v.grad[2] == 1.0 and v.grad[0] == 0.0


def test_relu_gradients_away_from_kinks():
    x = RNG.uniform(-8, 8, size=(3, 4, 5))
    x[np.abs(x) < 1e-3] = 0.5
    x[np.abs(x - 6) < 1e-3] = 5.5
    check_grads(relu, [x], RNG)
    check_grads(relu6, [x], RNG)


def test_ste_round_forward_and_identity_backward():
    x = Tensor(np.array([2.5, -2.5, 0.49, -0.5, 1.5]), requires_grad=True)
    out = ste_round(x)
    assert out.data.tolist() == [3, -3, 0, -1, 2]
    g = RNG.standard_normal(5)
    out.backward(g)
    assert np.array_equal(x.grad, g)


def test_ste_round_chain_rule_through_division():
    coeff, qt = 37.0, 7.3
    q = Tensor(np.array(qt), requires_grad=True)
    ste_round(Tensor(np.array(coeff)) / q).backward()
    assert np.isclose(q.grad, -coeff / qt ** 2)


def test_uniform_noise_is_seeded_and_bounded():
    z = Tensor(np.zeros(10 ** 6))
    a = add_uniform_noise(z, step_rng(7, 3)).data
    b = add_uniform_noise(z, step_rng(7, 3)).data
    assert np.array_equal(a, b)
    assert not np.array_equal(a, add_uniform_noise(z, step_rng(7, 4)).data)
    assert abs(a.mean()) < 2e-3
    assert a.min() > -0.5 and a.max() < 0.5


def test_uniform_noise_gradient_is_identity():
    x = Tensor(RNG.standard_normal(6), requires_grad=True)
    g = RNG.standard_normal(6)
    add_uniform_noise(x, step_rng(0, 0)).backward(g)
    assert np.array_equal(x.grad, g)


def test_bounds_forward_and_gradient_direction():
    x = Tensor(np.array([-3.0, 0.0, 3.0]), requires_grad=True)
    out = bound(x, -1.0, 1.0)
    assert out.data.tolist() == [-1, 0, 1]
    out.backward(np.array([1.0, 1.0, 1.0]))   # loss decreases when x decreases
    assert x.grad.tolist() == [0.0, 1.0, 1.0]  # below-range entry may not be pushed further down
    x.grad = None
    lb = lower_bound(x, 0.5)
    lb.backward(np.array([-1.0, 1.0, 1.0]))
    assert x.grad.tolist() == [-1.0, 0.0, 1.0]


def test_elementwise_gradients():
    a = RNG.uniform(0.5, 2.0, size=(3, 4))
    b = RNG.uniform(0.5, 2.0, size=(1, 4))
    check_grads(lambda x, y: (x * y + x / y - y) ** 2.0, [a, b], RNG)
    check_grads(lambda x: x.exp().log2() + x.log() + x.tanh() + x.sigmoid() + x.softplus(), [a], RNG)
    check_grads(lambda x: normal_cdf(x) * x.abs(), [a - 1.2], RNG)
    check_grads(lambda x: x.sum(axis=1, keepdims=True) * x.mean(axis=0), [a], RNG)
    check_grads(lambda x: x[[0, 2, 0], 1:3] + 1.0, [a], RNG)


def test_structural_gradients():
    x = RNG.standard_normal((2, 4, 3, 5))
    check_grads(lambda t: upsample_nearest(t, 2), [x], RNG)
    check_grads(lambda t: depth_to_space(t, 2), [x], RNG)
    check_grads(lambda t: concat([t, t * 2.0], axis=1), [x], RNG)
    w = RNG.standard_normal((3, 2, 4))
    v = RNG.standard_normal((3, 4, 6))
    check_grads(channel_matmul, [w, v], RNG)


def test_depth_to_space_layout():
    x = np.arange(2 * 2 * 4, dtype=float).reshape(1, 4, 2, 2)
    out = depth_to_space(Tensor(x), 2).data[0, 0]
    assert out[0, 0] == x[0, 0, 0, 0] and out[0, 1] == x[0, 1, 0, 0]
    assert out[1, 0] == x[0, 2, 0, 0] and out[1, 1] == x[0, 3, 0, 0]
    assert out[2, 3] == x[0, 1, 1, 1]


def test_no_grad_builds_no_graph():
    p = Parameter(np.ones(3))
    with no_grad():
        out = (p * 2.0).sum()
    assert not out.requires_grad


def test_freezing_is_fixed_when_the_graph_is_built():
    w = Parameter(np.array([2.0, 3.0]))
    x = Parameter(np.array([1.0, -1.0]))
    w.requires_grad = False
    out = (w * x).sum()
    w.requires_grad = True
    out.backward()
    assert w.grad is None
    assert x.grad.tolist() == [2.0, 3.0]


def test_shared_subexpression_accumulates():
    p = Parameter(np.array([3.0]))
    y = p * p
    (y + y * p).sum().backward()
    assert np.isclose(p.grad[0], 2 * 3 + 3 * 9)


# --------------------------------------------------------------------------- optimiser


def test_adam_first_step_is_lr():
    p = Parameter(np.array([1.0, -2.0]))
    p.grad = np.array([0.3, -7.0])
    adam_step([p], AdamConfig(lr=0.01))
    assert np.allclose(p.data, [0.99, -1.99], atol=1e-9)
    assert p.grad is None


def test_adam_zero_gradient_keeps_params():
    p = Parameter(np.array([1.0, 2.0]))
    p.grad = np.zeros(2)
    adam_step([p], AdamConfig(lr=0.1))
    assert np.array_equal(p.data, [1.0, 2.0])


def test_adam_missing_gradient():
    with pytest.raises(ValueError):
        adam_step([Parameter(np.ones(2))], AdamConfig(lr=0.1))


def test_adam_bad_config():
    with pytest.raises(ValueError):
        AdamConfig(lr=0.1, beta1=1.0)
    with pytest.raises(ValueError):
        AdamConfig(lr=0.0)


def test_adam_quadratic_bowl_against_scalar_simulation():
    p = Parameter(np.array([1.0]))
    cfg = AdamConfig(lr=0.1)
    w, m, v = 1.0, 0.0, 0.0
    for t in range(1, 201):
        (p * p).sum().backward()
        adam_step([p], cfg)
        g = 2 * w
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        w -= 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
    assert np.isclose(p.data[0], w, rtol=0, atol=1e-12)
    assert abs(p.data[0]) < 1e-2


def test_lr_decay():
    assert lr_decay(1e-4, 0.9, 500, 499) == 1e-4
    assert np.isclose(lr_decay(1e-4, 0.9, 500, 500), 9e-5)
    assert lr_decay(1e-4, 1.0, 500, 10 ** 6) == 1e-4
    with pytest.raises(ValueError):
        lr_decay(1e-4, 0.0, 500, 1)


# --------------------------------------------------------------------------- checkpoint


def test_checkpoint_roundtrip_and_hash():
    named = {"ga.0.w": RNG.standard_normal((4, 3, 5, 5)), "prior.bias": RNG.standard_normal(7), "s": np.array(2.5)}
    blob = encode_params(named, {"n": 4})
    cfg, back = decode_params(blob)
    assert cfg == {"n": 4}
    assert list(back) == list(named)
    for k in named:
        assert np.array_equal(back[k], named[k])
    assert encode_params(back, cfg) == blob
    bad = bytearray(blob)
    bad[40] ^= 1
    with pytest.raises(CheckpointError):
        decode_params(bytes(bad))
    with pytest.raises(CheckpointError):
        decode_params(b"nope" + blob[4:])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 63), st.integers(0, 10 ** 6), st.integers(0, 8))
def test_step_rng_deterministic(seed, step, stream):
    a = step_rng(seed, step, stream).uniform(size=4)
    b = step_rng(seed, step, stream).uniform(size=4)
    assert np.array_equal(a, b)
