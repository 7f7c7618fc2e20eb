from .lqr import (LqrGains, LqrWeights, closed_loop_dc_gain, dare_solve, innovation_gain,
                  lqr_control, lqr_output_weighted, predictor_gain, reference_gain)
from .pid import PidController, PidGains, pid_inner, pid_outer, pid_step

__all__ = [
    "LqrGains", "LqrWeights", "closed_loop_dc_gain", "dare_solve", "innovation_gain",
    "lqr_control", "lqr_output_weighted", "predictor_gain", "reference_gain",
    "PidController", "PidGains", "pid_inner", "pid_outer", "pid_step",
]
