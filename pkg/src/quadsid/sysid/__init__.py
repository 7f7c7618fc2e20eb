from .dataset import Dataset, FlightLog, InputKind, split_dataset
from .rls import RlsState, estimate_coefficients, rls_fit, rls_update
from .subspace import StateSpaceModel, fit_percent, simulate_ss, subspace_identify

__all__ = [
    "Dataset", "FlightLog", "InputKind", "split_dataset",
    "RlsState", "estimate_coefficients", "rls_fit", "rls_update",
    "StateSpaceModel", "fit_percent", "simulate_ss", "subspace_identify",
]
