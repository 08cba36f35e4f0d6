"""Recipe plumbing: clip loading, feature extraction per kind, and the
model registry behind cross_validate and the CLI.

Supported (model, feature) pairings mirror the screening experiments:
LR / SVM / LSTM read mean-MFCC vectors, the CNN reads MFCC or
Mel-spectrogram images, and a logistic head reads mean-pooled encoder
features. Anything else needs force=True in the recipe.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio_io import AudioClip, CANONICAL_RATE, load_wav, peak_normalize, resample_linear
from .dsp import FrameParams, MelParams, mel_spectrogram, mfcc, mfcc_mean_vector
from .encoder import EncoderConfig, encoder_apply
from .errors import ConfigError
from .learners import (
    TrainedModel,
    train_cnn,
    train_logreg,
    train_lstm,
    train_svm_smo,
)
from .learners.cnn import CnnConfig
from .learners.lstm import LstmConfig
from .render import FeatureImage, fit_standardizer, render_image

FEATURE_KINDS = ("mfcc_vector", "mfcc_image", "melspec_image", "encoder")
MODEL_KINDS = ("logreg", "svm", "cnn", "lstm")

ALLOWED_PAIRS = {
    ("logreg", "mfcc_vector"),
    ("svm", "mfcc_vector"),
    ("lstm", "mfcc_vector"),
    ("cnn", "mfcc_image"),
    ("cnn", "melspec_image"),
    ("logreg", "encoder"),
}


def load_clip(path, peak: bool = True) -> AudioClip:
    """Read a WAV from disk, resample to 16 kHz, peak-normalize."""
    clip = load_wav(Path(path).read_bytes(), source_id=str(path))
    clip = resample_linear(clip, CANONICAL_RATE)
    return peak_normalize(clip) if peak else clip


def extract_matrix(clip: AudioClip, feature_kind: str,
                   frame: FrameParams = FrameParams(),
                   mel: MelParams = MelParams(),
                   encoder_cfg: EncoderConfig = EncoderConfig()) -> tuple[np.ndarray, str]:
    """The storable 2-D form of each feature kind, plus its VXF1 tag."""
    if feature_kind == "mfcc_vector":
        return mfcc_mean_vector(mfcc(clip, frame, mel))[None, :], "vector"
    if feature_kind == "mfcc_image":
        image = render_image(mfcc(clip, frame, mel))
        return image.pixels[:, :, 0], "mfcc"
    if feature_kind == "melspec_image":
        image = render_image(mel_spectrogram(clip, frame, mel))
        return image.pixels[:, :, 0], "melspec"
    if feature_kind == "encoder":
        return encoder_apply(clip, encoder_cfg), "encoder"
    raise ConfigError(f"unknown feature kind {feature_kind!r}")


def feature_from_matrix(matrix: np.ndarray, feature_kind: str):
    """In-memory feature object the learners consume."""
    if feature_kind == "mfcc_vector":
        return matrix.ravel()
    if feature_kind in ("mfcc_image", "melspec_image"):
        pixels = np.repeat(matrix[:, :, None], 3, axis=2)
        kind = "mfcc" if feature_kind == "mfcc_image" else "melspec"
        return FeatureImage(pixels=pixels, source_kind=kind)
    if feature_kind == "encoder":
        return matrix.mean(axis=0)  # mean-pool the frame sequence
    raise ConfigError(f"unknown feature kind {feature_kind!r}")


def extract_feature(clip: AudioClip, feature_kind: str, **kwargs):
    matrix, _ = extract_matrix(clip, feature_kind, **kwargs)
    return feature_from_matrix(matrix, feature_kind)


def validate_recipe(recipe: dict) -> dict:
    model = recipe.get("model")
    feature = recipe.get("feature")
    if model not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {model!r}")
    if feature not in FEATURE_KINDS:
        raise ConfigError(f"unknown feature kind {feature!r}")
    if (model, feature) not in ALLOWED_PAIRS and not recipe.get("force", False):
        raise ConfigError(
            f"({model}, {feature}) is not one of the supported pairings; "
            "pass force=true to run it anyway")
    return recipe


def resolve_recipe(recipe: dict):
    """Build fit_fn(features, labels, seed) -> TrainedModel for a recipe."""
    validate_recipe(recipe)
    model = recipe["model"]
    feature = recipe["feature"]
    hyper = dict(recipe.get("hyper", {}))

    if model == "logreg":
        def fit(features, labels, seed):
            rows = np.stack([np.asarray(f, dtype=np.float64).ravel() for f in features])
            scaler = fit_standardizer(rows)
            inner = train_logreg(scaler.apply(rows), labels,
                                 epochs=int(hyper.get("epochs", 500)),
                                 lr=float(hyper.get("lr", 0.1)))
            return TrainedModel("logreg", inner, feature, scaler)
    elif model == "svm":
        def fit(features, labels, seed):
            rows = np.stack([np.asarray(f, dtype=np.float64).ravel() for f in features])
            scaler = fit_standardizer(rows)
            inner = train_svm_smo(scaler.apply(rows), labels,
                                  C=float(hyper.get("C", 1.0)),
                                  gamma=float(hyper.get("gamma", 0.001)),
                                  tol=float(hyper.get("tol", 1e-3)),
                                  max_passes=int(hyper.get("max_passes", 200)))
            return TrainedModel("svm", inner, feature, scaler)
    elif model == "cnn":
        def fit(features, labels, seed):
            images = np.stack([f.pixels for f in features])
            cfg = CnnConfig(
                filters1=int(hyper.get("filters1", 16)),
                filters2=int(hyper.get("filters2", 32)),
                dropout=float(hyper.get("dropout", 0.25)),
                lr=float(hyper.get("lr", 1e-3)),
            )
            inner = train_cnn(images, labels,
                              epochs=int(hyper.get("epochs", 100)),
                              batch=int(hyper.get("batch", 32)),
                              seed=seed, config=cfg)
            return TrainedModel("cnn", inner, feature, None)
    else:  # lstm
        def fit(features, labels, seed):
            rows = np.stack([np.asarray(f, dtype=np.float64).ravel() for f in features])
            scaler = fit_standardizer(rows)
            cfg = LstmConfig(
                hidden=int(hyper.get("hidden", 64)),
                dense=int(hyper.get("dense", 32)),
                dropout=float(hyper.get("dropout", 0.3)),
                lr=float(hyper.get("lr", 1e-3)),
                loss=str(hyper.get("loss", "mae")),
            )
            inner = train_lstm(scaler.apply(rows)[:, :, None], labels,
                               epochs=int(hyper.get("epochs", 100)),
                               batch=int(hyper.get("batch", 32)),
                               seed=seed, config=cfg)
            return TrainedModel("lstm", inner, feature, scaler)
    return fit
