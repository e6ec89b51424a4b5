"""Fuel-moisture toolkit: time-lag moisture model, EKF assimilation, linear RNN.

The heavy lifting lives in the compiled extension ``fmda._core``; this package
re-exports its public surface.
"""

from fmda._core import (  # noqa: F401
    AnomalyConfig,
    AtmosphericSample,
    AugmentedState,
    Equilibria,
    FilterConfig,
    FilterStep,
    Gradients,
    InitMode,
    IoError,
    ModelConfig,
    Regime,
    RnnWeights,
    SynthConfig,
    SynthResult,
    TimeSeries,
    TrainConfig,
    TrainResult,
    ValidationError,
    analysis_step,
    bptt_gradient,
    equilibria,
    evaluate_sequence,
    features,
    forecast_step,
    forward,
    init_euler,
    is_valid_covariance,
    jacobian,
    load_csv,
    load_truth_csv,
    load_weights_json,
    rmse,
    run_forecast,
    run_learning,
    save_csv,
    save_truth_csv,
    save_weights_json,
    select_regime,
    simulate,
    step,
    synth,
    train,
)

__all__ = [
    "AnomalyConfig",
    "AtmosphericSample",
    "AugmentedState",
    "Equilibria",
    "FilterConfig",
    "FilterStep",
    "Gradients",
    "InitMode",
    "IoError",
    "ModelConfig",
    "Regime",
    "RnnWeights",
    "SynthConfig",
    "SynthResult",
    "TimeSeries",
    "TrainConfig",
    "TrainResult",
    "ValidationError",
    "analysis_step",
    "bptt_gradient",
    "equilibria",
    "evaluate_sequence",
    "features",
    "forecast_step",
    "forward",
    "init_euler",
    "is_valid_covariance",
    "jacobian",
    "load_csv",
    "load_truth_csv",
    "load_weights_json",
    "rmse",
    "run_forecast",
    "run_learning",
    "save_csv",
    "save_truth_csv",
    "save_weights_json",
    "select_regime",
    "simulate",
    "step",
    "synth",
    "train",
]

__version__ = "0.1.0"
