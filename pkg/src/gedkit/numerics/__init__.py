from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import check_gradients, numerical_gradient
from .optim import Adam, AdamState, MissingGradError
from .tensor import (
    ShapeError,
    Tape,
    Tensor,
    active_tape,
    add,
    aggregate,
    as_tensor,
    backward,
    concat,
    div,
    einsum,
    exp,
    getitem,
    log,
    matmul,
    mean,
    mul,
    neg,
    relu,
    reshape,
    segment_sum,
    sigmoid,
    square,
    sub,
    sum,
    take,
    tanh,
    transpose,
)


def glorot_uniform(rng, shape, fan_in=None, fan_out=None) -> Tensor:
    """Uniform in +-sqrt(6 / (fan_in + fan_out)); fans default to the last two axes."""
    fan_in = fan_in if fan_in is not None else shape[-2] if len(shape) > 1 else shape[0]
    fan_out = fan_out if fan_out is not None else shape[-1]
    bound = (6.0 / (fan_in + fan_out)) ** 0.5
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)
