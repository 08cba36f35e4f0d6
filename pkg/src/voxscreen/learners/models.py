"""Uniform trained-model surface: tagged wrapper, scoring, VXM1 files."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import FeatureKindMismatchError
from ..render import FeatureImage, Standardizer
from .cnn import CnnConfig, CnnModel
from .layers import sigmoid
from .logreg import LogRegModel
from .lstm import LstmConfig, LstmModel
from .svm import SvmModel

MODEL_MAGIC = b"VXM1"
_KIND_TAGS = {"logreg": 0, "svm": 1, "cnn": 2, "lstm": 3}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}

VECTOR_FEATURES = ("mfcc_vector", "encoder")
IMAGE_FEATURES = ("mfcc_image", "melspec_image")


@dataclass
class TrainedModel:
    """A fitted classifier plus the preprocessing recipe it expects."""

    kind: str  # logreg | svm | cnn | lstm
    model: object
    feature_kind: str
    standardizer: Standardizer | None = None

    def score_batch(self, features) -> np.ndarray:
        """Scores in [0, 1] for a batch of feature objects."""
        if self.kind in ("logreg", "svm", "lstm"):
            rows = _as_rows(features, self.feature_kind)
            if self.standardizer is not None:
                rows = self.standardizer.apply(rows)
            if self.kind == "logreg":
                return self.model.scores(rows)
            if self.kind == "svm":
                return sigmoid(self.model.decision_values(rows))
            return self.model.scores(rows[:, :, None])
        if self.kind == "cnn":
            return self.model.scores(_as_images(features, self.feature_kind))
        raise FeatureKindMismatchError(f"unknown model kind {self.kind!r}")


def _as_rows(features, feature_kind) -> np.ndarray:
    if feature_kind not in VECTOR_FEATURES:
        raise FeatureKindMismatchError(
            f"model trained on {feature_kind!r} cannot score vector input")
    rows = []
    for f in features:
        if isinstance(f, FeatureImage):
            raise FeatureKindMismatchError(
                "vector-recipe model received an image feature")
        rows.append(np.asarray(f, dtype=np.float64).ravel())
    return np.stack(rows)


def _as_images(features, feature_kind) -> np.ndarray:
    if feature_kind not in IMAGE_FEATURES:
        raise FeatureKindMismatchError(
            f"model trained on {feature_kind!r} cannot score image input")
    planes = []
    for f in features:
        if not isinstance(f, FeatureImage):
            raise FeatureKindMismatchError(
                "image-recipe model received a non-image feature")
        planes.append(f.pixels)
    return np.stack(planes)


def predict_score(model: TrainedModel, feature) -> float:
    """Score one example; sigmoid/softmax output in [0, 1]."""
    return float(model.score_batch([feature])[0])


def svm_raw_score(model: TrainedModel, feature) -> float:
    """Unsquashed SVM decision value (sign = predicted side)."""
    if model.kind != "svm":
        raise FeatureKindMismatchError("raw decision values exist only for svm")
    rows = _as_rows([feature], model.feature_kind)
    if model.standardizer is not None:
        rows = model.standardizer.apply(rows)
    return float(model.model.decision_values(rows)[0])


# --- VXM1 container ---

def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _pack_tensor(name: str, arr: np.ndarray) -> bytes:
    arr = np.asarray(arr, dtype=np.float64)
    head = _pack_str(name) + struct.pack("<B", arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
    return head + arr.astype("<f4").tobytes()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += struct.calcsize(fmt)
        return vals

    def take_str(self) -> str:
        (n,) = self.take("<I")
        s = self.data[self.pos:self.pos + n].decode("utf-8")
        self.pos += n
        return s

    def take_tensor(self) -> tuple[str, np.ndarray]:
        name = self.take_str()
        (ndim,) = self.take("<B")
        shape = self.take(f"<{ndim}I") if ndim else ()
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(self.data, dtype="<f4", count=count,
                            offset=self.pos).astype(np.float64)
        self.pos += 4 * count
        return name, arr.reshape(shape)


def _model_payload(m: TrainedModel) -> tuple[dict, dict[str, np.ndarray]]:
    """Hyperparameter block and named tensors for each model kind."""
    hyper: dict = {}
    tensors: dict[str, np.ndarray] = {}
    if m.kind == "logreg":
        tensors = {"weights": m.model.weights, "bias": np.array([m.model.bias])}
    elif m.kind == "svm":
        hyper = {"gamma": m.model.gamma, "C": m.model.C,
                 "converged": m.model.converged}
        tensors = {"support_vectors": m.model.support_vectors,
                   "dual_coefs": m.model.dual_coefs,
                   "bias": np.array([m.model.bias])}
    elif m.kind == "cnn":
        c = m.model.config
        hyper = {"filters1": c.filters1, "filters2": c.filters2,
                 "kernel": c.kernel, "dropout": c.dropout, "lr": c.lr,
                 "n_classes": c.n_classes,
                 "input_shape": list(m.model.input_shape)}
        tensors = dict(m.model.params)
    elif m.kind == "lstm":
        c = m.model.config
        hyper = {"hidden": c.hidden, "dense": c.dense, "dropout": c.dropout,
                 "lr": c.lr, "loss": c.loss, "input_dim": m.model.input_dim}
        tensors = dict(m.model.params)
    else:
        raise ValueError(f"unknown model kind {m.kind!r}")
    if m.standardizer is not None:
        tensors["scaler_mean"] = m.standardizer.mean
        tensors["scaler_std"] = m.standardizer.std
        hyper["standardized"] = True
    return hyper, tensors


def save_model(m: TrainedModel, path: str) -> None:
    hyper, tensors = _model_payload(m)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<B", _KIND_TAGS[m.kind]))
        fh.write(_pack_str(m.feature_kind))
        fh.write(_pack_str(json.dumps(hyper, sort_keys=True)))
        fh.write(struct.pack("<I", len(tensors)))
        for name in sorted(tensors):
            fh.write(_pack_tensor(name, tensors[name]))


def load_model(path: str) -> TrainedModel:
    data = open(path, "rb").read()
    if data[:4] != MODEL_MAGIC:
        raise ValueError("not a VXM1 model file")
    r = _Reader(data)
    r.pos = 4
    (tag,) = r.take("<B")
    kind = _TAG_KINDS[tag]
    feature_kind = r.take_str()
    hyper = json.loads(r.take_str())
    (n_tensors,) = r.take("<I")
    tensors = dict(r.take_tensor() for _ in range(n_tensors))

    scaler = None
    if hyper.pop("standardized", False):
        scaler = Standardizer(mean=tensors.pop("scaler_mean"),
                              std=tensors.pop("scaler_std"))

    if kind == "logreg":
        model = LogRegModel(weights=tensors["weights"],
                            bias=float(tensors["bias"][0]))
    elif kind == "svm":
        model = SvmModel(support_vectors=tensors["support_vectors"],
                         dual_coefs=tensors["dual_coefs"],
                         bias=float(tensors["bias"][0]),
                         gamma=hyper["gamma"], C=hyper["C"],
                         converged=hyper["converged"])
    elif kind == "cnn":
        cfg = CnnConfig(filters1=hyper["filters1"], filters2=hyper["filters2"],
                        kernel=hyper["kernel"], dropout=hyper["dropout"],
                        lr=hyper["lr"], n_classes=hyper["n_classes"])
        model = CnnModel(params=tensors, config=cfg,
                         input_shape=tuple(hyper["input_shape"]))
    else:
        cfg = LstmConfig(hidden=hyper["hidden"], dense=hyper["dense"],
                         dropout=hyper["dropout"], lr=hyper["lr"],
                         loss=hyper["loss"])
        model = LstmModel(params=tensors, config=cfg,
                          input_dim=hyper["input_dim"])
    return TrainedModel(kind=kind, model=model, feature_kind=feature_kind,
                        standardizer=scaler)
