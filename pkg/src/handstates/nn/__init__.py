"""From-scratch differentiable building blocks and training machinery."""

from .checkpoint import Checkpoint, load, predict, save
from .gradcheck import gradient_check
from .layers import BatchNorm, Dense, Dropout, ReLU
from .losses import balanced_class_weights, softmax, softmax_cross_entropy
from .model import Classifier, ModelSpec
from .optim import Adam
from .recurrent import BidirectionalLSTM, LSTMLayer, lstm_step, lstm_step_backward
from .search import SearchSpace, kfold_validate, random_search, stratified_folds
from .train import TrainConfig, TrainingDivergedError, fit_standardizer, train

__all__ = [
    "Adam",
    "BatchNorm",
    "BidirectionalLSTM",
    "Checkpoint",
    "Classifier",
    "Dense",
    "Dropout",
    "LSTMLayer",
    "ModelSpec",
    "ReLU",
    "SearchSpace",
    "TrainConfig",
    "TrainingDivergedError",
    "balanced_class_weights",
    "fit_standardizer",
    "gradient_check",
    "kfold_validate",
    "load",
    "lstm_step",
    "lstm_step_backward",
    "predict",
    "random_search",
    "save",
    "softmax",
    "softmax_cross_entropy",
    "stratified_folds",
    "train",
]
