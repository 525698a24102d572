from rrmtools.gate.params import DEFAULT_M_MIN, GateParams
from rrmtools.gate.model import Prediction, PredictionBatch, gate_weights, mixture, predict, predict_batch
from rrmtools.gate.training import Batch, GradientCheck, TrainConfig, TrainResult, gradient_check, loss_and_grad, \
    train
from rrmtools.gate.responsibility import ResponsibilityReport, latent_vs_effective, responsibilities
