from tdoa_toolkit.neural.checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from tdoa_toolkit.neural.frontend import frontend
from tdoa_toolkit.neural.functional import gelu, loss_ce_label_smoothing, linear, conv1d
from tdoa_toolkit.neural.model import ModelConfig, TdoaNetwork, forward, init_params
from tdoa_toolkit.neural.optim import AdamW, AdamWState, adamw_step
from tdoa_toolkit.neural.predict import predict_tdoa, NeuralEstimator
from tdoa_toolkit.neural.tensor import Tensor, Function, backward, no_grad
from tdoa_toolkit.neural.train import TrainConfig, EpochMetrics, train, write_metrics_csv

__all__ = [
    'Tensor',
    'Function',
    'backward',
    'no_grad',
    'ModelConfig',
    'TdoaNetwork',
    'forward',
    'init_params',
    'frontend',
    'gelu',
    'linear',
    'conv1d',
    'loss_ce_label_smoothing',
    'AdamW',
    'AdamWState',
    'adamw_step',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'TrainConfig',
    'EpochMetrics',
    'train',
    'write_metrics_csv',
    'predict_tdoa',
    'NeuralEstimator',
]
