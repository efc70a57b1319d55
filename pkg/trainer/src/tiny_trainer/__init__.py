"""Toy super-resolution trainer: builds the encoded block networks, trains
them with joint intermediate supervision, and serves PSNR-based fitness
over the esrn-eval line protocol."""

from .model import TinyESRN, build_network
from .schedule import joint_loss_weights
from .train import TrainerConfig, train_and_score

__version__ = "0.1.0"
