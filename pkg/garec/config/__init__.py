# Copyright (c) 2025, GARec contributors
# For license information, please see license.txt

from .settings import (
    ACTIVATIONS,
    NmfConfig,
    TrainConfig,
    config_echo,
    load_config,
    read_config_file,
    train_config_from_echo,
)

__all__ = [
    "ACTIVATIONS",
    "NmfConfig",
    "TrainConfig",
    "config_echo",
    "load_config",
    "read_config_file",
    "train_config_from_echo",
]
