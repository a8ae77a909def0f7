"""Miniature trainable CNN transmission regressor.

Maps a square hazy patch to a scalar transmission estimate through four
stages: valid convolution + maxout feature extraction, parallel multi-scale
same-padded convolutions, spatial max-pooling (stride 1), and a final valid
convolution clamped by a bilateral ReLU to [0, 1]. Shapes, with patch side
P, conv1 kernel k1, pool window p (S = P - k1 + 1, Q = S - p + 1):

    (3, P, P) -conv1-> (n1, S, S) -maxout g-> (m, S, S)
              -conv 3/5/7 same-> (3m, S, S) -pool-> (3m, Q, Q)
              -conv3 QxQ-> scalar -> brelu

Training is plain SGD with momentum on the mean squared error against the
synthetic ground-truth transmissions. Everything runs in float64 and is
bit-reproducible for a fixed seed; max ties break toward the lowest index
and the clamp passes gradient only inside its bounds, so the reverse-mode
derivatives are exact away from the kinks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ParameterError, ShapeError, TrainingError
from .guided import GuidedFilterConfig, guided_filter
from .imaging import luminance

__all__ = [
    "SCALES",
    "NetParams",
    "TrainConfig",
    "brelu",
    "maxout",
    "init_params",
    "forward",
    "loss_and_gradients",
    "evaluate",
    "train",
    "predict_map",
    "save_params",
    "load_params",
]

SCALES = (3, 5, 7)
MAGIC = b"HZNET1"


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass
class NetParams:
    """All weights plus the architecture metadata needed to run them."""

    patch_size: int
    maxout_group: int
    pool: int
    brelu_lo: float
    brelu_hi: float
    conv1_w: np.ndarray  # (n1, 3, k1, k1)
    conv1_b: np.ndarray  # (n1,)
    conv2_w: tuple[np.ndarray, ...]  # per scale: (m, m, s, s)
    conv2_b: tuple[np.ndarray, ...]  # per scale: (m,)
    conv3_w: np.ndarray  # (1, 3m, k3, k3)
    conv3_b: np.ndarray  # (1,)

    @property
    def conv1_kernel(self) -> int:
        return self.conv1_w.shape[-1]

    @property
    def conv1_maps(self) -> int:
        return self.conv1_w.shape[0]

    @property
    def mid_maps(self) -> int:
        return self.conv1_maps // self.maxout_group

    @property
    def conv3_kernel(self) -> int:
        return self.conv3_w.shape[-1]

    def validate(self) -> None:
        if self.maxout_group < 1 or self.conv1_maps % self.maxout_group != 0:
            raise ShapeError(
                f"conv1 maps {self.conv1_maps} not divisible by maxout group {self.maxout_group}"
            )
        if not self.brelu_lo < self.brelu_hi:
            raise ParameterError(f"brelu bounds must satisfy lo < hi, got {self.brelu_lo}, {self.brelu_hi}")
        m = self.mid_maps
        if self.conv1_w.shape != (self.conv1_maps, 3, self.conv1_kernel, self.conv1_kernel):
            raise ShapeError(f"conv1_w has shape {self.conv1_w.shape}")
        if self.conv1_b.shape != (self.conv1_maps,):
            raise ShapeError(f"conv1_b has shape {self.conv1_b.shape}")
        if len(self.conv2_w) != len(SCALES) or len(self.conv2_b) != len(SCALES):
            raise ShapeError(f"expected {len(SCALES)} multi-scale banks")
        for s, w, b in zip(SCALES, self.conv2_w, self.conv2_b):
            if w.shape != (m, m, s, s):
                raise ShapeError(f"scale-{s} kernel has shape {w.shape}, expected {(m, m, s, s)}")
            if b.shape != (m,):
                raise ShapeError(f"scale-{s} bias has shape {b.shape}")
        feat = self.patch_size - self.conv1_kernel + 1
        pooled = feat - self.pool + 1
        if feat < 1 or pooled < 1:
            raise ShapeError(
                f"patch {self.patch_size} too small for conv1 {self.conv1_kernel} + pool {self.pool}"
            )
        if self.conv3_w.shape != (1, 3 * m, pooled, pooled):
            raise ShapeError(
                f"conv3_w has shape {self.conv3_w.shape}, expected {(1, 3 * m, pooled, pooled)}"
            )
        if self.conv3_b.shape != (1,):
            raise ShapeError(f"conv3_b has shape {self.conv3_b.shape}")
        for name, arr in self.array_items():
            if not np.isfinite(arr).all():
                raise ParameterError(f"{name} contains non-finite weights")

    def array_items(self) -> list[tuple[str, np.ndarray]]:
        """Weight arrays in declaration (persistence) order."""
        items = [("conv1_w", self.conv1_w), ("conv1_b", self.conv1_b)]
        for s, w, b in zip(SCALES, self.conv2_w, self.conv2_b):
            items.append((f"conv2_w{s}", w))
            items.append((f"conv2_b{s}", b))
        items.extend([("conv3_w", self.conv3_w), ("conv3_b", self.conv3_b)])
        return items

    def replace_arrays(self, arrays: dict[str, np.ndarray]) -> "NetParams":
        return NetParams(
            patch_size=self.patch_size,
            maxout_group=self.maxout_group,
            pool=self.pool,
            brelu_lo=self.brelu_lo,
            brelu_hi=self.brelu_hi,
            conv1_w=arrays["conv1_w"],
            conv1_b=arrays["conv1_b"],
            conv2_w=tuple(arrays[f"conv2_w{s}"] for s in SCALES),
            conv2_b=tuple(arrays[f"conv2_b{s}"] for s in SCALES),
            conv3_w=arrays["conv3_w"],
            conv3_b=arrays["conv3_b"],
        )

    def copy(self) -> "NetParams":
        return self.replace_arrays({n: a.copy() for n, a in self.array_items()})


@dataclass(frozen=True)
class TrainConfig:
    # lr above ~0.05 can slam the output clamp into its dead zone early on
    learning_rate: float = 0.005
    momentum: float = 0.9
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    weight_init_scale: float = 1.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ParameterError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.weight_init_scale > 0:
            raise ParameterError(f"weight_init_scale must be > 0, got {self.weight_init_scale}")


def init_params(
    seed: int = 0,
    patch_size: int = 16,
    conv1_kernel: int = 5,
    conv1_maps: int = 16,
    maxout_group: int = 4,
    pool: int = 7,
    weight_init_scale: float = 1.0,
    brelu_bounds: tuple[float, float] = (0.0, 1.0),
) -> NetParams:
    """Fresh parameters, uniform in +-scale/sqrt(fan_in), biases zero.

    The output bias starts at the clamp midpoint; a zero start can leave
    every pre-activation outside the clamp, which blocks all gradients.
    """
    rng = np.random.default_rng(seed)

    def draw(shape):
        fan_in = int(np.prod(shape[1:]))
        bound = weight_init_scale / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    m = conv1_maps // maxout_group
    k3 = patch_size - conv1_kernel + 1 - pool + 1
    if k3 < 1:
        raise ShapeError(
            f"patch size {patch_size} is too small for conv kernel {conv1_kernel} "
            f"and pool {pool} (output kernel would be {k3})"
        )
    params = NetParams(
        patch_size=patch_size,
        maxout_group=maxout_group,
        pool=pool,
        brelu_lo=brelu_bounds[0],
        brelu_hi=brelu_bounds[1],
        conv1_w=draw((conv1_maps, 3, conv1_kernel, conv1_kernel)),
        conv1_b=np.zeros(conv1_maps),
        conv2_w=tuple(draw((m, m, s, s)) for s in SCALES),
        conv2_b=tuple(np.zeros(m) for _ in SCALES),
        conv3_w=draw((1, 3 * m, k3, k3)),
        conv3_b=np.full(1, (brelu_bounds[0] + brelu_bounds[1]) / 2.0),
    )
    params.validate()
    return params


# ---------------------------------------------------------------------------
# elementwise units
# ---------------------------------------------------------------------------


def brelu(x, lo: float = 0.0, hi: float = 1.0):
    """Bilateral rectifier: clamp to [lo, hi]."""
    if not lo < hi:
        raise ParameterError(f"brelu bounds must satisfy lo < hi, got {lo}, {hi}")
    return np.minimum(np.maximum(x, lo), hi)


def maxout(maps: Sequence[np.ndarray], group_size: int) -> list[np.ndarray]:
    """Elementwise max over consecutive groups of ``group_size`` maps."""
    if group_size < 1:
        raise ShapeError(f"group_size must be >= 1, got {group_size}")
    if len(maps) % group_size != 0:
        raise ShapeError(f"{len(maps)} maps not divisible into groups of {group_size}")
    arrs = [np.asarray(m, dtype=np.float64) for m in maps]
    if any(a.shape != arrs[0].shape for a in arrs):
        raise ShapeError("maxout inputs must share one shape")
    out = []
    for j in range(0, len(arrs), group_size):
        acc = arrs[j]
        for a in arrs[j + 1 : j + group_size]:
            acc = np.maximum(acc, a)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# batched layer primitives (x layout: (B, C, H, W))
# ---------------------------------------------------------------------------


def _conv_forward(x, w, b, pad):
    k = w.shape[-1]
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
    win = sliding_window_view(xp, (k, k), axis=(2, 3))  # (B, C, Ho, Wo, k, k)
    nb, _, ho, wo = win.shape[:4]
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(nb, ho * wo, -1)
    out = cols @ w.reshape(w.shape[0], -1).T + b
    return out.transpose(0, 2, 1).reshape(nb, w.shape[0], ho, wo), cols


def _conv_backward(dout, cols, x_shape, w, pad, need_dx=True):
    nb, nf, ho, wo = dout.shape
    k = w.shape[-1]
    c = w.shape[1]
    dmat = dout.reshape(nb, nf, ho * wo).transpose(0, 2, 1)  # (B, N, F)
    dw = np.einsum("bnf,bnc->fc", dmat, cols).reshape(w.shape)
    db = dout.sum(axis=(0, 2, 3))
    if not need_dx:
        return None, dw, db
    dcols = (dmat @ w.reshape(nf, -1)).reshape(nb, ho, wo, c, k, k)
    hp, wp = x_shape[2] + 2 * pad, x_shape[3] + 2 * pad
    dxp = np.zeros((nb, c, hp, wp))
    for i in range(k):
        for j in range(k):
            dxp[:, :, i : i + ho, j : j + wo] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    dx = dxp[:, :, pad : hp - pad, pad : wp - pad] if pad else dxp
    return dx, dw, db


def _maxout_forward(x, g):
    nb, n1, h, w = x.shape
    grouped = x.reshape(nb, n1 // g, g, h, w)
    idx = grouped.argmax(axis=2)
    out = np.take_along_axis(grouped, idx[:, :, None], axis=2)[:, :, 0]
    return out, idx


def _maxout_backward(dout, idx, g):
    nb, m, h, w = dout.shape
    dgrouped = np.zeros((nb, m, g, h, w))
    np.put_along_axis(dgrouped, idx[:, :, None], dout[:, :, None], axis=2)
    return dgrouped.reshape(nb, m * g, h, w)


def _maxpool_forward(x, p):
    win = sliding_window_view(x, (p, p), axis=(2, 3))
    nb, c, q1, q2 = win.shape[:4]
    flat = win.reshape(nb, c, q1, q2, p * p)
    idx = flat.argmax(axis=4)
    out = np.take_along_axis(flat, idx[..., None], axis=4)[..., 0]
    return out, idx


def _maxpool_backward(dout, idx, x_shape, p):
    nb, c, q1, q2 = dout.shape
    dx = np.zeros(x_shape)
    di, dj = np.divmod(idx, p)
    bi = np.arange(nb)[:, None, None, None]
    ci = np.arange(c)[None, :, None, None]
    qi = np.arange(q1)[None, None, :, None]
    qj = np.arange(q2)[None, None, None, :]
    np.add.at(dx, (bi, ci, qi + di, qj + dj), dout)
    return dx


# ---------------------------------------------------------------------------
# forward / gradients
# ---------------------------------------------------------------------------


def _forward_batch(params: NetParams, x: np.ndarray, keep: bool = False):
    """x: (B, 3, P, P) -> predictions (B,), optionally with the backprop cache."""
    g = params.maxout_group
    z1, cols1 = _conv_forward(x, params.conv1_w, params.conv1_b, pad=0)
    a1, idx_mo = _maxout_forward(z1, g)
    banks = []
    cols2 = []
    for s, w, b in zip(SCALES, params.conv2_w, params.conv2_b):
        z, cols = _conv_forward(a1, w, b, pad=s // 2)
        banks.append(z)
        cols2.append(cols)
    z2 = np.concatenate(banks, axis=1)
    a2, idx_pool = _maxpool_forward(z2, params.pool)
    z3, cols3 = _conv_forward(a2, params.conv3_w, params.conv3_b, pad=0)
    z3 = z3.reshape(x.shape[0])
    y = brelu(z3, params.brelu_lo, params.brelu_hi)
    if not keep:
        return y, None
    cache = {
        "x_shape": x.shape,
        "cols1": cols1,
        "idx_mo": idx_mo,
        "a1_shape": a1.shape,
        "cols2": cols2,
        "z2_shape": z2.shape,
        "idx_pool": idx_pool,
        "a2_shape": a2.shape,
        "cols3": cols3,
        "z3": z3,
    }
    return y, cache


def forward(params: NetParams, patch: np.ndarray) -> float:
    """Transmission estimate for one (P, P, 3) patch."""
    p = np.asarray(patch, dtype=np.float64)
    if p.shape != (params.patch_size, params.patch_size, 3):
        raise ShapeError(
            f"patch shape {p.shape} does not match architecture "
            f"({params.patch_size}, {params.patch_size}, 3)"
        )
    y, _ = _forward_batch(params, p.transpose(2, 0, 1)[None])
    return float(y[0])


def _stack_batch(params: NetParams, batch) -> tuple[np.ndarray, np.ndarray]:
    if len(batch) == 0:
        raise ParameterError("batch must be non-empty")
    x = np.stack([np.asarray(s.patch, dtype=np.float64) for s in batch])
    if x.shape[1:] != (params.patch_size, params.patch_size, 3):
        raise ShapeError(f"batch patches have shape {x.shape[1:]}")
    t = np.array([s.t_true for s in batch], dtype=np.float64)
    return x.transpose(0, 3, 1, 2), t


def _grads_batch(params: NetParams, x: np.ndarray, t_true: np.ndarray):
    nb = x.shape[0]
    y, cache = _forward_batch(params, x, keep=True)
    mse = float(np.mean((y - t_true) ** 2))

    dy = 2.0 * (y - t_true) / nb
    z3 = cache["z3"]
    dz3 = dy * ((z3 >= params.brelu_lo) & (z3 <= params.brelu_hi))

    da2, dw3, db3 = _conv_backward(
        dz3.reshape(nb, 1, 1, 1), cache["cols3"], cache["a2_shape"], params.conv3_w, pad=0
    )
    dz2 = _maxpool_backward(da2, cache["idx_pool"], cache["z2_shape"], params.pool)

    m = params.mid_maps
    da1 = np.zeros(cache["a1_shape"])
    dw2, db2 = [], []
    for i, (s, w) in enumerate(zip(SCALES, params.conv2_w)):
        dbank = dz2[:, i * m : (i + 1) * m]
        dx, dw, db = _conv_backward(dbank, cache["cols2"][i], cache["a1_shape"], w, pad=s // 2)
        da1 += dx
        dw2.append(dw)
        db2.append(db)

    dz1 = _maxout_backward(da1, cache["idx_mo"], params.maxout_group)
    _, dw1, db1 = _conv_backward(
        dz1, cache["cols1"], cache["x_shape"], params.conv1_w, pad=0, need_dx=False
    )

    grads = {"conv1_w": dw1, "conv1_b": db1, "conv3_w": dw3, "conv3_b": db3}
    for s, dw, db in zip(SCALES, dw2, db2):
        grads[f"conv2_w{s}"] = dw
        grads[f"conv2_b{s}"] = db
    return mse, grads


def loss_and_gradients(params: NetParams, batch) -> tuple[float, dict[str, np.ndarray]]:
    """Batch MSE and its exact gradients, keyed like ``params.array_items()``."""
    x, t = _stack_batch(params, batch)
    return _grads_batch(params, x, t)


def evaluate(params: NetParams, dataset, batch_chunk: int = 512) -> float:
    """Mean squared error over a dataset, without gradients."""
    x, t = _stack_batch(params, dataset)
    preds = np.empty(len(t))
    for start in range(0, len(t), batch_chunk):
        preds[start : start + batch_chunk], _ = _forward_batch(params, x[start : start + batch_chunk])
    return float(np.mean((preds - t) ** 2))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def train(params: NetParams, dataset, cfg: TrainConfig = TrainConfig()) -> NetParams:
    """SGD with momentum over seeded-shuffled minibatches; returns new params."""
    if len(dataset) < cfg.batch_size:
        raise ParameterError(
            f"dataset size {len(dataset)} is smaller than batch_size {cfg.batch_size}"
        )
    params = params.copy()
    params.validate()
    x_all = np.stack([np.asarray(s.patch, dtype=np.float64) for s in dataset]).transpose(0, 3, 1, 2)
    t_all = np.array([s.t_true for s in dataset], dtype=np.float64)

    arrays = dict(params.array_items())
    velocity = {n: np.zeros_like(a) for n, a in arrays.items()}
    rng = np.random.default_rng(cfg.seed)
    n = len(dataset)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            pick = order[start : start + cfg.batch_size]
            loss, grads = _grads_batch(params, x_all[pick], t_all[pick])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite training loss at epoch {epoch}")
            for name in arrays:
                velocity[name] = cfg.momentum * velocity[name] - cfg.learning_rate * grads[name]
                arrays[name] += velocity[name]
    return params


# ---------------------------------------------------------------------------
# full-image prediction
# ---------------------------------------------------------------------------


def predict_map(
    params: NetParams,
    image: np.ndarray,
    stride: int = 4,
    refine: GuidedFilterConfig | None = None,
    batch_chunk: int = 512,
) -> np.ndarray:
    """Slide the patch window over the image and average overlapping outputs.

    Window starts step by ``stride``; the final row/column of windows is
    pinned to the image edge so every pixel is covered. Each pixel's value
    is the mean of all window predictions covering it, optionally refined
    with a guided filter against the image luminance.
    """
    img = np.asarray(image, dtype=np.float64)
    ps = params.patch_size
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    if stride > ps:
        raise ParameterError(f"stride {stride} larger than patch size {ps} leaves gaps")
    if img.ndim != 3 or img.shape[2] != 3:
        raise ShapeError(f"expected an (H, W, 3) image, got {img.shape}")
    h, w = img.shape[:2]
    if h < ps or w < ps:
        raise ShapeError(f"image {w}x{h} smaller than patch size {ps}")

    ys = list(range(0, h - ps + 1, stride))
    if ys[-1] != h - ps:
        ys.append(h - ps)
    xs = list(range(0, w - ps + 1, stride))
    if xs[-1] != w - ps:
        xs.append(w - ps)

    coords = [(y, x) for y in ys for x in xs]
    preds = np.empty(len(coords))
    for start in range(0, len(coords), batch_chunk):
        chunk = coords[start : start + batch_chunk]
        x_batch = np.stack([img[y : y + ps, x : x + ps].transpose(2, 0, 1) for y, x in chunk])
        preds[start : start + len(chunk)], _ = _forward_batch(params, x_batch)

    sums = np.zeros((h, w))
    counts = np.zeros((h, w))
    for (y, x), value in zip(coords, preds):
        sums[y : y + ps, x : x + ps] += value
        counts[y : y + ps, x : x + ps] += 1.0
    tmap = sums / counts
    if refine is not None:
        tmap = guided_filter(luminance(img), tmap, refine.radius, refine.epsilon)
    return np.clip(tmap, 0.0, 1.0)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def save_params(params: NetParams, path) -> None:
    """Binary format: magic, little-endian int32 header, float64 weights.

    Header: patch_size, conv1_kernel, conv1_maps, maxout_group, pool,
    conv3_kernel, scale count, then the scale sizes. The float section
    starts with the brelu bounds, then the arrays in declaration order.
    """
    params.validate()
    header = [
        params.patch_size,
        params.conv1_kernel,
        params.conv1_maps,
        params.maxout_group,
        params.pool,
        params.conv3_kernel,
        len(SCALES),
        *SCALES,
    ]
    floats = [np.array([params.brelu_lo, params.brelu_hi])]
    floats.extend(arr.ravel() for _, arr in params.array_items())
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.asarray(header, dtype="<i4").tobytes())
        fh.write(np.concatenate(floats).astype("<f8").tobytes())


def load_params(path) -> NetParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise ParameterError(f"not a net-parameter file (bad magic): {path}")
    fixed = np.frombuffer(blob, dtype="<i4", count=7, offset=len(MAGIC))
    patch_size, k1, n1, g, pool, k3, n_scales = (int(v) for v in fixed)
    if n_scales != len(SCALES):
        raise ParameterError(f"expected {len(SCALES)} scales, file declares {n_scales}")
    scales = np.frombuffer(blob, dtype="<i4", count=n_scales, offset=len(MAGIC) + 28)
    if tuple(int(s) for s in scales) != SCALES:
        raise ParameterError(f"unsupported scale set {scales.tolist()}")
    offset = len(MAGIC) + 4 * (7 + n_scales)
    floats = np.frombuffer(blob, dtype="<f8", offset=offset)
    if g < 1 or n1 % g != 0:
        raise ParameterError(f"conv1 maps {n1} not divisible by maxout group {g}")
    m = n1 // g

    shapes = [("conv1_w", (n1, 3, k1, k1)), ("conv1_b", (n1,))]
    for s in SCALES:
        shapes.append((f"conv2_w{s}", (m, m, s, s)))
        shapes.append((f"conv2_b{s}", (m,)))
    shapes.extend([("conv3_w", (1, 3 * m, k3, k3)), ("conv3_b", (1,))])
    need = 2 + sum(int(np.prod(shape)) for _, shape in shapes)
    if floats.size != need:
        raise ParameterError(f"weight payload holds {floats.size} values, header implies {need}")

    arrays = {}
    pos = 2
    for name, shape in shapes:
        size = int(np.prod(shape))
        arrays[name] = floats[pos : pos + size].reshape(shape).copy()
        pos += size
    params = NetParams(
        patch_size=patch_size,
        maxout_group=g,
        pool=pool,
        brelu_lo=float(floats[0]),
        brelu_hi=float(floats[1]),
        conv1_w=arrays["conv1_w"],
        conv1_b=arrays["conv1_b"],
        conv2_w=tuple(arrays[f"conv2_w{s}"] for s in SCALES),
        conv2_b=tuple(arrays[f"conv2_b{s}"] for s in SCALES),
        conv3_w=arrays["conv3_w"],
        conv3_b=arrays["conv3_b"],
    )
    try:
        params.validate()
    except (ShapeError, ParameterError) as exc:
        raise ParameterError(f"inconsistent net-parameter file {path}: {exc}") from exc
    return params
