"""CNN sequence labeler with hand-written backpropagation and Adam.

Layout of one forward pass over ids of length L::

    e = Emb[ids]                               (L, h)
    a = relu(causal_left(e))  -> dropout       (L, h)   taps on positions <= t
    b = relu(causal_right(e)) -> dropout       (L, h)   taps on positions >= t
    z = relu(conv3(a ++ b))                    (L, c3)  symmetric zero padding
    scores = z @ Wfc + bfc                     (L, 12)

Every convolution is computed as one matmul over an im2col matrix whose row t is the
k input rows the output at t sees, laid out tap by tap. Conv weights are stored as
(k, in, out) with tap i reading padded row t+i.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"DLSH"
FORMAT_VERSION = 1
PARAM_NAMES = ("emb", "wf", "bf", "wb", "bb", "w3", "b3", "wfc", "bfc")
MODEL_SIZES = (32, 64, 128)


class IdOutOfRange(ValueError):
    pass


class LabelOutOfRange(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class FormatError(ValueError):
    pass


class VocabularyMismatch(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 315
    hidden: int = 32
    c3_out: int = 256
    n_classes: int = 12
    kernel_width: int = 5
    dropout_p: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if min(self.vocab_size, self.hidden, self.c3_out, self.n_classes, self.kernel_width) < 1:
            raise ValueError("sizes must be >= 1")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")

    def shapes(self) -> dict[str, tuple[int, ...]]:
        h, k = self.hidden, self.kernel_width
        return {
            "emb": (self.vocab_size, h),
            "wf": (k, h, h), "bf": (h,),
            "wb": (k, h, h), "bb": (h,),
            "w3": (k, 2 * h, self.c3_out), "b3": (self.c3_out,),
            "wfc": (self.c3_out, self.n_classes), "bfc": (self.n_classes,),
        }

    def n_params(self) -> int:
        return sum(int(np.prod(s)) for s in self.shapes().values())

    @property
    def pad_left3(self) -> int:
        return (self.kernel_width - 1) // 2


def _fan_in(name: str, cfg: ModelConfig) -> int:
    shape = cfg.shapes()[name]
    if name == "emb":
        return cfg.vocab_size  # one-hot input
    return int(np.prod(shape[:-1]))


class CnnShModel:
    def __init__(self, config: ModelConfig, params: dict[str, np.ndarray]):
        shapes = config.shapes()
        if set(params) != set(PARAM_NAMES):
            raise ShapeMismatch(f"expected parameters {PARAM_NAMES}, got {sorted(params)}")
        for name in PARAM_NAMES:
            if params[name].shape != shapes[name]:
                raise ShapeMismatch(f"{name}: expected {shapes[name]}, got {params[name].shape}")
        self.config = config
        dtype = params["emb"].dtype
        # One contiguous buffer so the optimizer can update everything in a single pass.
        self.flat = np.concatenate([np.asarray(params[n], dtype=dtype).ravel() for n in PARAM_NAMES])
        self.params = {}
        off = 0
        for name in PARAM_NAMES:
            size = int(np.prod(shapes[name]))
            self.params[name] = self.flat[off:off + size].reshape(shapes[name])
            off += size

    @classmethod
    def init(cls, config: ModelConfig, dtype=np.float32) -> "CnnShModel":
        rng = np.random.default_rng(config.seed)
        params = {}
        for name, shape in config.shapes().items():
            if name.startswith("b"):
                params[name] = np.zeros(shape, dtype=dtype)
            else:
                bound = 1.0 / np.sqrt(_fan_in(name, config))
                params[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
        return cls(config, params)

    @classmethod
    def zeros(cls, config: ModelConfig, dtype=np.float32) -> "CnnShModel":
        return cls(config, {n: np.zeros(s, dtype=dtype) for n, s in config.shapes().items()})

    @property
    def dtype(self):
        return self.params["emb"].dtype

    def astype(self, dtype) -> "CnnShModel":
        return CnnShModel(self.config, {n: p.astype(dtype, copy=True) for n, p in self.params.items()})

    def copy(self) -> "CnnShModel":
        return self.astype(self.dtype)

    def check_finite(self) -> None:
        for name in PARAM_NAMES:
            if not np.all(np.isfinite(self.params[name])):
                raise NonFiniteError(f"non-finite values in {name}")

    def digest(self) -> str:
        h = hashlib.sha256()
        for name in PARAM_NAMES:
            h.update(np.ascontiguousarray(self.params[name], dtype="<f4").tobytes())
        return h.hexdigest()


# -- convolution helpers ------------------------------------------------------------

def _im2col(x: np.ndarray, k: int, left: int) -> np.ndarray:
    """Row t = concat(xpad[t], ..., xpad[t+k-1]) where xpad has ``left`` zero rows in front."""
    L, c = x.shape
    xp = np.zeros((L + k - 1, c), dtype=x.dtype)
    xp[left:left + L] = x
    cols = np.empty((L, k * c), dtype=x.dtype)
    for i in range(k):
        cols[:, i * c:(i + 1) * c] = xp[i:i + L]
    return cols


def _col2im(dcols: np.ndarray, k: int, left: int, c: int) -> np.ndarray:
    L = dcols.shape[0]
    dxp = np.zeros((L + k - 1, c), dtype=dcols.dtype)
    for i in range(k):
        dxp[i:i + L] += dcols[:, i * c:(i + 1) * c]
    return dxp[left:left + L]


@dataclass
class _Cache:
    ids: np.ndarray
    xf: np.ndarray
    xb: np.ndarray
    a_relu: np.ndarray
    b_relu: np.ndarray
    keep_a: np.ndarray | None
    keep_b: np.ndarray | None
    x3: np.ndarray
    z: np.ndarray


def _check_ids(model: CnnShModel, ids: np.ndarray) -> np.ndarray:
    ids = np.asarray(ids)
    if ids.ndim != 1 or ids.size == 0:
        raise IdOutOfRange("input must be a non-empty 1-D id sequence")
    if ids.min() < 0 or ids.max() >= model.config.vocab_size:
        raise IdOutOfRange(f"ids must lie in [0, {model.config.vocab_size})")
    return ids


def _forward(model: CnnShModel, ids: np.ndarray, training: bool, rng: np.random.Generator | None
             ) -> tuple[np.ndarray, _Cache]:
    cfg, P = model.config, model.params
    k, h = cfg.kernel_width, cfg.hidden
    e = P["emb"][ids]
    xf = _im2col(e, k, k - 1)
    xb = _im2col(e, k, 0)
    a = np.maximum(xf @ P["wf"].reshape(k * h, h) + P["bf"], 0)
    b = np.maximum(xb @ P["wb"].reshape(k * h, h) + P["bb"], 0)
    keep_a = keep_b = None
    if training and cfg.dropout_p > 0:
        if rng is None:
            raise ValueError("training forward needs an rng")
        scale = 1.0 / (1.0 - cfg.dropout_p)
        keep_a = (rng.random(a.shape) >= cfg.dropout_p) * np.asarray(scale, dtype=a.dtype)
        keep_b = (rng.random(b.shape) >= cfg.dropout_p) * np.asarray(scale, dtype=b.dtype)
        a_out, b_out = a * keep_a, b * keep_b
    else:
        a_out, b_out = a, b
    x3 = _im2col(np.concatenate([a_out, b_out], axis=1), k, cfg.pad_left3)
    z = np.maximum(x3 @ P["w3"].reshape(k * 2 * h, cfg.c3_out) + P["b3"], 0)
    scores = z @ P["wfc"] + P["bfc"]
    return scores, _Cache(ids, xf, xb, a, b, keep_a, keep_b, x3, z)


def forward(model: CnnShModel, ids: Sequence[int] | np.ndarray, training: bool = False,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Class scores of shape (L, n_classes)."""
    ids = _check_ids(model, ids)
    return _forward(model, ids, training, rng)[0]


def branch_activations(model: CnnShModel, ids) -> tuple[np.ndarray, np.ndarray]:
    """Eval-mode outputs of the left-causal and right-causal branches."""
    ids = _check_ids(model, ids)
    _, cache = _forward(model, ids, False, None)
    return cache.a_relu, cache.b_relu


def forward_batch(model: CnnShModel, batch: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Eval-mode scores for many sequences in one pass.

    Sequences are laid end to end with k-1 zero rows between them, and the branch
    outputs are zeroed on those rows, so every window sees exactly the zero padding
    it would see alone. Results match ``forward`` per sequence.
    """
    if not batch:
        return []
    cfg, P = model.config, model.params
    k, h = cfg.kernel_width, cfg.hidden
    gap = k - 1
    seqs = [_check_ids(model, ids) for ids in batch]
    lengths = [len(s) for s in seqs]
    starts = np.cumsum([0] + [n + gap for n in lengths[:-1]])
    total = int(starts[-1] + lengths[-1])
    e = np.zeros((total, h), dtype=model.dtype)
    live = np.zeros(total, dtype=bool)
    for s, ids in zip(starts, seqs):
        e[s:s + len(ids)] = P["emb"][ids]
        live[s:s + len(ids)] = True
    a = np.maximum(_im2col(e, k, k - 1) @ P["wf"].reshape(k * h, h) + P["bf"], 0)
    b = np.maximum(_im2col(e, k, 0) @ P["wb"].reshape(k * h, h) + P["bb"], 0)
    ab = np.concatenate([a, b], axis=1)
    ab[~live] = 0
    z = np.maximum(_im2col(ab, k, cfg.pad_left3) @ P["w3"].reshape(k * 2 * h, cfg.c3_out) + P["b3"], 0)
    scores = z @ P["wfc"] + P["bfc"]
    return [scores[s:s + n] for s, n in zip(starts, lengths)]


def predict(model: CnnShModel, ids) -> np.ndarray:
    return forward(model, ids).argmax(axis=1)


def predict_batch(model: CnnShModel, batch: Sequence[np.ndarray], max_tokens: int = 20000) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    chunk: list[np.ndarray] = []
    size = 0
    for ids in batch:
        chunk.append(ids)
        size += len(ids)
        if size >= max_tokens:
            out.extend(s.argmax(axis=1) for s in forward_batch(model, chunk))
            chunk, size = [], 0
    if chunk:
        out.extend(s.argmax(axis=1) for s in forward_batch(model, chunk))
    return out


# -- loss and gradients -------------------------------------------------------------

def loss_and_grad(model: CnnShModel, ids, labels, mask, rng: np.random.Generator | None = None,
                  training: bool = True) -> tuple[float, dict[str, np.ndarray]]:
    """Masked mean softmax cross-entropy and its exact gradient."""
    cfg, P = model.config, model.params
    ids = _check_ids(model, ids)
    labels = np.asarray(labels)
    mask = np.asarray(mask, dtype=bool)
    if labels.shape != ids.shape or mask.shape != ids.shape:
        raise ShapeMismatch("ids, labels and mask must have equal length")
    sel = labels[mask]
    if sel.size and (sel.min() < 0 or sel.max() >= cfg.n_classes):
        raise LabelOutOfRange(f"labels must lie in [0, {cfg.n_classes})")
    n = int(mask.sum())
    if n == 0:
        return 0.0, {name: np.zeros_like(p) for name, p in P.items()}

    scores, c = _forward(model, ids, training, rng)
    k, h = cfg.kernel_width, cfg.hidden
    dtype = scores.dtype
    rows = np.flatnonzero(mask)
    s = scores[rows]
    s = s - s.max(axis=1, keepdims=True)
    logz = np.log(np.exp(s).sum(axis=1))
    tgt = labels[rows]
    loss = float(np.mean(logz - s[np.arange(n), tgt], dtype=np.float64))

    dscores = np.zeros_like(scores)
    p = np.exp(s - logz[:, None])
    p[np.arange(n), tgt] -= 1
    dscores[rows] = p / np.asarray(n, dtype=dtype)

    g: dict[str, np.ndarray] = {}
    g["wfc"] = c.z.T @ dscores
    g["bfc"] = dscores.sum(axis=0)
    dz = (dscores @ P["wfc"].T) * (c.z > 0)
    g["w3"] = (c.x3.T @ dz).reshape(P["w3"].shape)
    g["b3"] = dz.sum(axis=0)
    dab = _col2im(dz @ P["w3"].reshape(k * 2 * h, cfg.c3_out).T, k, cfg.pad_left3, 2 * h)
    da, db = dab[:, :h], dab[:, h:]
    if c.keep_a is not None:
        da = da * c.keep_a
        db = db * c.keep_b
    da = da * (c.a_relu > 0)
    db = db * (c.b_relu > 0)
    g["wf"] = (c.xf.T @ da).reshape(P["wf"].shape)
    g["bf"] = da.sum(axis=0)
    g["wb"] = (c.xb.T @ db).reshape(P["wb"].shape)
    g["bb"] = db.sum(axis=0)
    de = _col2im(da @ P["wf"].reshape(k * h, h).T, k, k - 1, h)
    de += _col2im(db @ P["wb"].reshape(k * h, h).T, k, 0, h)
    demb = np.zeros_like(P["emb"])
    np.add.at(demb, ids, de)
    g["emb"] = demb
    return loss, g


# -- Adam ---------------------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int, dtype=np.float32, **kw) -> "AdamState":
        return cls(np.zeros(size, dtype=dtype), np.zeros(size, dtype=dtype), **kw)

    @classmethod
    def for_model(cls, model: CnnShModel, **kw) -> "AdamState":
        return cls.zeros(model.flat.size, model.flat.dtype, **kw)


def adam_update(p: np.ndarray, g: np.ndarray, state: AdamState, lr: float) -> None:
    """In-place bias-corrected Adam on a flat parameter vector."""
    if p.shape != g.shape or state.m.shape != p.shape:
        raise ShapeMismatch(f"parameter {p.shape}, gradient {g.shape}, state {state.m.shape}")
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    step_size = lr * np.sqrt(1 - b2 ** t) / (1 - b1 ** t)
    eps_hat = state.eps * np.sqrt(1 - b2 ** t)
    m, v = state.m, state.v
    tmp = np.multiply(g, 1 - b1)
    m *= b1
    m += tmp
    np.multiply(g, g, out=tmp)
    tmp *= 1 - b2
    v *= b2
    v += tmp
    np.sqrt(v, out=tmp)
    tmp += eps_hat
    np.divide(m, tmp, out=tmp)
    tmp *= step_size
    p -= tmp


def flatten_grads(model: CnnShModel, grads: dict[str, np.ndarray]) -> np.ndarray:
    shapes = model.config.shapes()
    for name in PARAM_NAMES:
        if name not in grads or grads[name].shape != shapes[name]:
            raise ShapeMismatch(f"gradient for {name} missing or misshapen")
    return np.concatenate([grads[n].ravel() for n in PARAM_NAMES]).astype(model.flat.dtype, copy=False)


def adam_step(model: CnnShModel, grads: dict[str, np.ndarray], state: AdamState, lr: float) -> None:
    adam_update(model.flat, flatten_grads(model, grads), state, lr)


# -- serialization ------------------------------------------------------------------

def save_model(path: str | Path, model: CnnShModel, layout_hash: str, meta: dict | None = None) -> None:
    digest = bytes.fromhex(layout_hash)
    if len(digest) != 32:
        raise ValueError("layout hash must be a SHA-256 hex digest")
    header = json.dumps({"config": asdict(model.config), "meta": meta or {}}, sort_keys=True,
                        separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        fh.write(header)
        fh.write(digest)
        for name in PARAM_NAMES:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f4").tobytes())


@dataclass
class LoadedModel:
    model: CnnShModel
    layout_hash: str
    meta: dict = field(default_factory=dict)


def load_model(path: str | Path, layout_hash: str | None = None) -> LoadedModel:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise FormatError(f"{path}: not a model file")
    version, hlen = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    off = 12
    if len(data) < off + hlen + 32:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(data[off:off + hlen].decode("utf-8"))
        config = ModelConfig(**header["config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{path}: bad config block ({exc})") from None
    off += hlen
    stored = data[off:off + 32].hex()
    off += 32
    shapes = config.shapes()
    need = sum(int(np.prod(s)) for s in shapes.values()) * 4
    if len(data) - off != need:
        raise FormatError(f"{path}: expected {need} tensor bytes, found {len(data) - off}")
    if layout_hash is not None and stored != layout_hash:
        raise VocabularyMismatch(f"{path}: model was trained with vocabulary layout {stored[:12]}, "
                                 f"not {layout_hash[:12]}")
    params = {}
    for name in PARAM_NAMES:
        count = int(np.prod(shapes[name]))
        params[name] = np.frombuffer(data, dtype="<f4", count=count, offset=off).reshape(shapes[name]).astype(np.float32)
        off += count * 4
    model = CnnShModel(config, params)
    model.check_finite()
    return LoadedModel(model, stored, header.get("meta", {}))
