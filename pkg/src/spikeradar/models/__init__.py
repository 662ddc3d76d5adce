from .network import ModelSpec, SequenceClassifier, build_model, MODEL_KINDS
from .encoder import SpatialEncoder
from .heads import ConvTemporalHead, RecurrentHead, SpikingHead
from .recurrent import GRUCell, LSTMCell
from .checkpoint import (
    checkpoint_bytes,
    load_checkpoint,
    save_checkpoint,
)
from .train import TrainConfig, TrainHistory, infer, stratified_split, train

__all__ = [
    "ModelSpec",
    "SequenceClassifier",
    "build_model",
    "MODEL_KINDS",
    "SpatialEncoder",
    "ConvTemporalHead",
    "RecurrentHead",
    "SpikingHead",
    "GRUCell",
    "LSTMCell",
    "checkpoint_bytes",
    "load_checkpoint",
    "save_checkpoint",
    "TrainConfig",
    "TrainHistory",
    "infer",
    "stratified_split",
    "train",
]
