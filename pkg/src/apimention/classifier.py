"""Gaussian Naive Bayes resolution classifier over six mention/candidate features."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from apimention.codelink import CodeContext, structural_similarity
from apimention.context import CandidateDescription, FeatureContext, context_similarity
from apimention.db import ApiDatabase
from apimention.detect import Candidate
from apimention.errors import ParseError, TrainingError

MODEL_FORMAT = "apimention.nb-model"
MODEL_VERSION = 1
VARIANCE_FLOOR = 1e-9
FEATURE_NAMES = ("name_sim", "noun_sim", "verb_sim", "struct_sim", "usage_log", "download_log")


@dataclass(frozen=True)
class FeatureVector:
    name_sim: float
    noun_sim: float
    verb_sim: float
    struct_sim: float
    usage_log: float
    download_log: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} is not finite: {v!r}")
            if v < 0 or (f.name.endswith("_sim") and v > 1):
                raise ValueError(f"{f.name} out of range: {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)

    @classmethod
    def from_counts(
        cls,
        name_sim: float,
        noun_sim: float,
        verb_sim: float,
        struct_sim: float,
        usage_count: int,
        download_count: int,
    ) -> "FeatureVector":
        return cls(name_sim, noun_sim, verb_sim, struct_sim, math.log1p(usage_count), math.log1p(download_count))


def featurize(
    candidate: Candidate,
    ctx: FeatureContext,
    desc: CandidateDescription,
    code: CodeContext | None,
    code_links: dict[str, frozenset[str]],
    db: ApiDatabase,
) -> FeatureVector:
    noun_sim, verb_sim = context_similarity(ctx, desc)
    types = code.types if code is not None else frozenset()
    struct = structural_similarity(types, candidate.api_id, code_links)
    entry = db[candidate.api_id]
    return FeatureVector.from_counts(
        candidate.name_sim, noun_sim, verb_sim, struct, entry.usage_count, entry.download_count
    )


@dataclass(frozen=True)
class TrainingExample:
    features: FeatureVector
    label: bool


@dataclass(frozen=True)
class NBModel:
    """Class index 0 is the false class, 1 the true class."""

    priors: tuple[float, float]
    means: tuple[tuple[float, ...], tuple[float, ...]]
    variances: tuple[tuple[float, ...], tuple[float, ...]]
    epsilon: float = VARIANCE_FLOOR

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "features": list(FEATURE_NAMES),
            "epsilon": self.epsilon,
            "classes": {
                label: {
                    "prior": self.priors[k],
                    "mean": list(self.means[k]),
                    "variance": list(self.variances[k]),
                }
                for k, label in ((0, "false"), (1, "true"))
            },
        }

    @classmethod
    def from_dict(cls, data: dict, source: str | None = None) -> "NBModel":
        try:
            if data["format"] != MODEL_FORMAT or data["version"] != MODEL_VERSION:
                raise ParseError(f"unsupported model format {data['format']!r} v{data['version']}", source=source)
            if list(data["features"]) != list(FEATURE_NAMES):
                raise ParseError("model feature list does not match", source=source)
            classes = data["classes"]
            priors = (float(classes["false"]["prior"]), float(classes["true"]["prior"]))
            means = tuple(tuple(float(x) for x in classes[c]["mean"]) for c in ("false", "true"))
            variances = tuple(tuple(float(x) for x in classes[c]["variance"]) for c in ("false", "true"))
            eps = float(data["epsilon"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model: {exc}", source=source) from None
        if any(len(m) != len(FEATURE_NAMES) for m in means + variances):
            raise ParseError("model arrays have the wrong length", source=source)
        return cls(priors, means, variances, eps)  # type: ignore[arg-type]


def train(examples: Sequence[TrainingExample], epsilon: float = VARIANCE_FLOOR) -> NBModel:
    """Maximum-likelihood Gaussian parameters per class, variances floored at ``epsilon``."""
    if not examples:
        raise TrainingError("no training examples")
    X = np.array([e.features.as_array() for e in examples], dtype=float)
    y = np.array([bool(e.label) for e in examples])
    if not np.all(np.isfinite(X)):
        raise TrainingError("training features contain NaN or infinity")
    if y.all() or not y.any():
        raise TrainingError("training data must contain both classes")
    priors, means, variances = [], [], []
    for label in (False, True):
        Xc = X[y == label]
        priors.append(len(Xc) / len(X))
        mu = Xc.mean(axis=0)
        var = np.maximum(((Xc - mu) ** 2).mean(axis=0), epsilon)
        means.append(tuple(float(v) for v in mu))
        variances.append(tuple(float(v) for v in var))
    return NBModel((priors[0], priors[1]), (means[0], means[1]), (variances[0], variances[1]), epsilon)


def class_log_likelihoods(model: NBModel, x: np.ndarray) -> np.ndarray:
    out = np.empty(2)
    for k in range(2):
        mu = np.asarray(model.means[k])
        var = np.asarray(model.variances[k])
        out[k] = math.log(model.priors[k]) - 0.5 * float(
            np.sum(np.log(2.0 * np.pi * var) + (x - mu) ** 2 / var)
        )
    return out


def classify_confidence(model: NBModel, features: FeatureVector) -> float:
    """Posterior probability of the true class."""
    ll = class_log_likelihoods(model, features.as_array())
    top = ll.max()
    w = np.exp(ll - top)
    return float(w[1] / w.sum())


def save_model(model: NBModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> NBModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read model: {exc.strerror}", source=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model: {exc.msg}", exc.lineno, str(path)) from None
    return NBModel.from_dict(data, source=str(path))


def synthetic_examples(
    n: int,
    seed: int = 0,
    true_mean: Sequence[float] = (0.9, 0.3, 0.2, 0.6, 6.0, 5.0),
    false_mean: Sequence[float] = (0.3, 0.05, 0.03, 0.05, 3.0, 2.0),
    scale: Sequence[float] = (0.05, 0.04, 0.03, 0.08, 1.0, 1.0),
) -> list[TrainingExample]:
    """Balanced labelled vectors drawn from two per-class Gaussians, clipped into range."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        label = i % 2 == 0
        mu = np.asarray(true_mean if label else false_mean)
        x = rng.normal(mu, scale)
        x[:4] = np.clip(x[:4], 0.0, 1.0)
        x[4:] = np.maximum(x[4:], 0.0)
        out.append(TrainingExample(FeatureVector(*(float(v) for v in x)), label))
    return out
