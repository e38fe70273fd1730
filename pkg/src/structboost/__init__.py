"""Column-generation boosting for structured output prediction."""

from .boosting import TrainTrace, decrease_lower_bound, objective, train, weak_edge
from .data import Dataset, split_dataset
from .errors import (CapacityError, ConvergenceError, InvalidInputError, ParseError,
                     StructBoostError, SubmodularityError)
from .model import DualWeights, Sample, StrongModel, TaskDescriptor, TrainParams, WeakColumn
from .model import predict, score

__all__ = [
    "CapacityError", "ConvergenceError", "Dataset", "DualWeights", "InvalidInputError",
    "ParseError", "Sample", "StrongModel", "StructBoostError", "SubmodularityError",
    "TaskDescriptor", "TrainParams", "TrainTrace", "WeakColumn", "decrease_lower_bound",
    "objective", "predict", "score", "split_dataset", "train", "weak_edge",
]
