"""Encoder-decoder LSTM written directly against numpy."""
from .cell import LstmCellWeights, cell_backward, cell_forward, sigmoid
from .model import EncoderDecoderModel, ModelStack, backward, forward, loss_and_grads
from .optim import AdamState, adam_step
from .serialize import load_model, model_from_bytes, model_to_bytes, save_model
from .training import TrainReport, train, train_many

__all__ = [
    "AdamState",
    "EncoderDecoderModel",
    "LstmCellWeights",
    "ModelStack",
    "TrainReport",
    "adam_step",
    "backward",
    "cell_backward",
    "cell_forward",
    "forward",
    "load_model",
    "loss_and_grads",
    "model_from_bytes",
    "model_to_bytes",
    "save_model",
    "sigmoid",
    "train",
    "train_many",
]
