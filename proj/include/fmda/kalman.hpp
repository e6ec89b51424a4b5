#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fmda/dataset.hpp"
#include "fmda/moisture.hpp"

namespace fmda {

// Augmented filter state u = (m, dE): moisture plus the equilibrium
// correction, which the model treats as constant in time.
struct AugmentedState {
    double m = 0.0;
    double dE = 0.0;
};

// Filter tuning: per-step process noise variances, observation noise variance,
// and the initial covariance diagonal.
struct FilterConfig {
    double q_m = 1e-3;
    double q_dE = 1e-4;
    double r = 1e-2;
    double p0_m = 1.0;
    double p0_dE = 1.0;

    void validate() const;
};

// One learning-phase entry: posterior state and covariance at a timestep.
struct FilterStep {
    AugmentedState state;
    Eigen::Matrix2d cov;
};

// Symmetric within 1e-12 (relative to the largest entry) and positive
// semidefinite with eigenvalue tolerance -1e-10.
bool is_valid_covariance(const Eigen::Matrix2d& p);

// Jacobian of the step map (m, dE) -> (step(m, dE, eq, cfg), dE) with the
// regime frozen at the interval start: [[a, 1-a], [0, 1]] with a =
// exp(-dt/T) for Drying/Wetting, identity for Dead.
Eigen::Matrix2d jacobian(const AugmentedState& state, const Equilibria& eq,
                         const ModelConfig& cfg);

// Time update: propagate the state through the model step and the covariance
// through J*P*J^T + diag(q_m, q_dE), symmetrized.
std::pair<AugmentedState, Eigen::Matrix2d> forecast_step(const AugmentedState& state,
                                                         const Eigen::Matrix2d& cov,
                                                         const Equilibria& eq,
                                                         const ModelConfig& cfg,
                                                         const FilterConfig& fcfg);

// Measurement update with a scalar moisture observation, observation operator
// H = [1, 0]: K = P*H^T / (H*P*H^T + r), state' = state + K*(obs - m),
// P' = (I - K*H)*P symmetrized.
std::pair<AugmentedState, Eigen::Matrix2d> analysis_step(const AugmentedState& state,
                                                         const Eigen::Matrix2d& cov,
                                                         double obs, double r);

// Learning phase over [0, split): one entry per timestep. Entry 0 is the
// initial state (m from the first observation when present, otherwise the
// mean equilibrium at step 0; dE = 0; P = diag(p0)) with the analysis for an
// observation at step 0 already applied. Every later entry is a forecast_step
// from the previous one, followed by an analysis_step when that timestep has
// an observation. cfg.dt must equal the series spacing.
std::vector<FilterStep> run_learning(const TimeSeries& ts, const ModelConfig& cfg,
                                     const FilterConfig& fcfg);

// Forecast phase: the model run from state0 with dE frozen. Returns
// simulate(state0.m, state0.dE, eqs, cfg); empty eqs yields {state0.m}.
std::vector<double> run_forecast(const AugmentedState& state0,
                                 const std::vector<Equilibria>& eqs, const ModelConfig& cfg);

}  // namespace fmda
