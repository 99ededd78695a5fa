import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import gedkit.numerics as nx
from gedkit.numerics import (
    Adam,
    CheckpointError,
    MissingGradError,
    ShapeError,
    Tape,
    Tensor,
    check_gradients,
    glorot_uniform,
    load_checkpoint,
    save_checkpoint,
)


def param(rng, *shape):
    return Tensor(rng.uniform(-2, 2, size=shape), requires_grad=True)


def assert_gradcheck(loss_fn, params):
    bad = check_gradients(loss_fn, params)
    assert not bad, bad[:5]


def test_matmul_identity():
    x = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal((Tensor(np.eye(2)) @ Tensor(x)).data, x)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        nx.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_sum_backward_is_ones():
    x = Tensor(np.random.default_rng(0).random((3, 2)), requires_grad=True)
    with Tape():
        nx.sum(x).backward()
    np.testing.assert_array_equal(x.grad, np.ones((3, 2)))


def test_square_grad_example():
    x = Tensor(3.0, requires_grad=True)
    with Tape():
        (x * x).backward()
    assert x.grad == 6.0


def test_unused_param_has_no_grad_and_reuse_accumulates():
    x = Tensor(2.0, requires_grad=True)
    unused = Tensor(np.ones(3), requires_grad=True)
    with Tape():
        y = x * 3.0 + x * x  # x feeds two consumers
        y.backward()
    assert x.grad == 3.0 + 4.0
    assert unused.grad is None


def test_backward_needs_scalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with Tape():
        y = x * 2.0
        with pytest.raises(ShapeError):
            y.backward()


def test_no_recording_outside_tape():
    x = Tensor(np.ones(2), requires_grad=True)
    y = nx.sum(x * 2.0)
    assert y._tape is None
    with pytest.raises(ValueError):
        y.backward()


def test_activation_values():
    np.testing.assert_array_equal(nx.relu(Tensor([-1.0, 2.0])).data, [0.0, 2.0])
    assert nx.sigmoid(Tensor(0.0)).item() == 0.5


@given(arrays(np.float64, 20, elements=st.floats(-30, 30)))
def test_sigmoid_symmetry(x):
    s = nx.sigmoid(Tensor(x)).data + nx.sigmoid(Tensor(-x)).data
    np.testing.assert_allclose(s, 1.0, atol=1e-12)
    mid = nx.sigmoid(Tensor(np.clip(x, -20, 20))).data
    assert np.all((mid > 0) & (mid < 1))


def test_matmul_gradcheck(rng):
    a, b = param(rng, 3, 4), param(rng, 4, 2)
    w = rng.random((3, 2))
    assert_gradcheck(lambda: nx.sum((a @ b) * w), {"a": a, "b": b})


UNARY = {
    "relu": nx.relu, "sigmoid": nx.sigmoid, "tanh": nx.tanh, "square": nx.square, "neg": nx.neg,
    "exp": nx.exp, "log": lambda x: nx.log(nx.square(x) + 1.0), "transpose": nx.transpose,
    "reshape": lambda x: nx.reshape(x, (-1,)),
}


@pytest.mark.parametrize("name", sorted(UNARY))
def test_unary_gradcheck(rng, name):
    x = param(rng, 3, 4)
    if name == "relu":  # keep away from the kink
        x.data[np.abs(x.data) < 0.05] = 0.5
    f = UNARY[name]
    w = rng.random(f(x).shape)
    assert_gradcheck(lambda: nx.sum(f(x) * w), {"x": x})


@pytest.mark.parametrize("op", [nx.add, nx.sub, nx.mul, nx.div])
def test_binary_broadcast_gradcheck(rng, op):
    a, b = param(rng, 3, 4), param(rng, 4)
    if op is nx.div:
        b.data = np.abs(b.data) + 0.5
    w = rng.random((3, 4))
    assert_gradcheck(lambda: nx.sum(op(a, b) * w), {"a": a, "b": b})


def test_structural_ops_gradcheck(rng):
    a, b = param(rng, 2, 3), param(rng, 4, 3)
    idx = np.array([0, 3, 3, 1])
    w = rng.random((4, 3))

    def loss():
        c = nx.concat([a, b], axis=0)  # 6 x 3
        t = nx.take(c, idx)
        s = nx.sum(t * w, axis=0) + nx.mean(c[1:4], axis=0)
        return nx.sum(s * s)

    assert_gradcheck(loss, {"a": a, "b": b})


def test_einsum_gradcheck(rng):
    x, W, y = param(rng, 2, 3), param(rng, 3, 3, 2), param(rng, 2, 3)
    assert_gradcheck(lambda: nx.sum(nx.square(nx.einsum("pa,abk,pb->pk", x, W, y))), {"x": x, "W": W, "y": y})


def test_segment_and_aggregate_gradcheck(rng):
    x = param(rng, 5, 2)
    weights = rng.random(6)
    src, dst = np.array([0, 1, 2, 3, 4, 0]), np.array([1, 0, 3, 2, 4, 4])

    def loss():
        agg = nx.aggregate(x, src, dst, weights, 5)
        return nx.sum(nx.square(nx.segment_sum(agg, np.array([0, 0, 1, 1, 1]), 2)))

    assert_gradcheck(loss, {"x": x})


def test_ops_do_not_mutate_inputs(rng):
    a, b = param(rng, 3, 3), param(rng, 3, 3)
    before = a.data.copy(), b.data.copy()
    with Tape():
        loss = nx.sum(nx.tanh(a @ b) + nx.relu(a) * b - nx.concat([a, b], axis=1)[:, :3])
        loss.backward()
    np.testing.assert_array_equal(a.data, before[0])
    np.testing.assert_array_equal(b.data, before[1])


def test_item_requires_single_value():
    with pytest.raises(ShapeError):
        Tensor(np.ones(2)).item()


def test_adam_zero_grad_keeps_params():
    p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
    p.grad = np.zeros(2)
    Adam([p], lr=0.1).step()
    np.testing.assert_array_equal(p.data, [1.0, -2.0])


def test_adam_first_step_closed_form():
    g = np.array([0.3, -2.0, 1e-3])
    p = Tensor(np.zeros(3), requires_grad=True)
    p.grad = g.copy()
    opt = Adam([p], lr=0.01)
    opt.step()
    # bias correction makes m_hat = g and v_hat = g^2 after one step
    np.testing.assert_allclose(p.data, -0.01 * g / (np.abs(g) + 1e-8), rtol=1e-12)
    assert opt.state.step == 1
    np.testing.assert_array_equal(p.grad, 0.0)


def test_adam_missing_grad():
    with pytest.raises(MissingGradError):
        Adam([Tensor(np.ones(2), requires_grad=True)]).step()


def test_adam_quadratic_bowl():
    w = Tensor(np.array([0.8, -0.5, 0.3]), requires_grad=True)
    opt = Adam([w], lr=0.01)
    norms = []
    for _ in range(200):
        with Tape():
            nx.sum(nx.square(w)).backward()
        opt.step()
        norms.append(np.linalg.norm(w.data))
    assert opt.state.step == 200
    # steady decrease once the moments have warmed up
    assert all(b <= a + 1e-12 for a, b in zip(norms[10:60], norms[11:61]))
    assert norms[-1] < 1e-2


def test_glorot_bounds():
    w = glorot_uniform(np.random.default_rng(0), (40, 60))
    assert w.requires_grad
    assert np.abs(w.data).max() <= np.sqrt(6 / 100)
    assert np.abs(w.data).max() > 0.9 * np.sqrt(6 / 100)


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (3, 4), elements=st.floats(-1e300, 1e300)))
def test_checkpoint_round_trip_exact(tmp_path_factory, x):
    path = tmp_path_factory.mktemp("ck") / "c.json"
    save_checkpoint(path, {"w": Tensor(x), "b": np.array([0.1, 1 / 3])}, note="hi")
    params, meta = load_checkpoint(path)
    assert params["w"].tobytes() == x.tobytes()
    assert params["b"].tolist() == [0.1, 1 / 3]
    assert meta["note"] == "hi"


def test_checkpoint_rejects_non_finite_and_foreign(tmp_path):
    with pytest.raises(CheckpointError):
        save_checkpoint(tmp_path / "c.json", {"w": np.array([np.nan])})
    (tmp_path / "x.json").write_text('{"format": "other"}')
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "x.json")
