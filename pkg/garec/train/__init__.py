# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .backward import GradientSet, as_edge_batch, batch_loss, gradients, loss_and_gradients, partition
from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, check_gradients, relative_error
from .optimizer import AdamState, step
from .trainer import EpochRecord, TrainReport, carve_validation, fit, fit_portion_record, validation_rmse

__all__ = [
    "AdamState",
    "EpochRecord",
    "GradCheckReport",
    "GradientSet",
    "TrainReport",
    "as_edge_batch",
    "batch_loss",
    "carve_validation",
    "check_gradients",
    "fit",
    "fit_portion_record",
    "gradients",
    "load_checkpoint",
    "loss_and_gradients",
    "partition",
    "relative_error",
    "save_checkpoint",
    "step",
    "validation_rmse",
]
