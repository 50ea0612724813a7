"""Desk-scale trainer exporting portable JSON models with prediction fixtures."""

from .jobs import TrainingFailed, TrainingJob, train_and_export

__version__ = "0.1.0"

__all__ = ["TrainingFailed", "TrainingJob", "train_and_export"]
