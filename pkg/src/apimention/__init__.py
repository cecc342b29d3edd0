"""Detect API name mentions in developer-forum threads and resolve them to APIs."""

from apimention.classifier import FeatureVector, NBModel, classify_confidence, train
from apimention.db import ApiDatabase, ApiEntry, ModuleEntry, get_homepage, load_database
from apimention.pipeline import PipelineConfig, ResolutionDecision, resolve_mention, resolve_thread
from apimention.text import preprocess_thread, tokenize_name

__version__ = "0.1.0"

__all__ = [
    "ApiDatabase",
    "ApiEntry",
    "FeatureVector",
    "ModuleEntry",
    "NBModel",
    "PipelineConfig",
    "ResolutionDecision",
    "classify_confidence",
    "get_homepage",
    "load_database",
    "preprocess_thread",
    "resolve_mention",
    "resolve_thread",
    "tokenize_name",
    "train",
]
