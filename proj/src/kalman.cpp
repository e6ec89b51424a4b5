#include "fmda/kalman.hpp"

#include <cmath>

namespace fmda {

void FilterConfig::validate() const {
    if (!(q_m >= 0.0)) throw ValidationError("q_m must be >= 0");
    if (!(q_dE >= 0.0)) throw ValidationError("q_dE must be >= 0");
    if (!(r > 0.0)) throw ValidationError("r must be > 0");
    if (!(p0_m >= 0.0)) throw ValidationError("p0_m must be >= 0");
    if (!(p0_dE >= 0.0)) throw ValidationError("p0_dE must be >= 0");
}

bool is_valid_covariance(const Eigen::Matrix2d& p) {
    if (!p.allFinite()) return false;
    const double scale = p.cwiseAbs().maxCoeff();
    if (std::abs(p(0, 1) - p(1, 0)) > 1e-12 * std::max(scale, 1.0)) return false;
    // Eigenvalues of the symmetrized matrix must be >= -1e-10.
    const Eigen::Matrix2d s = 0.5 * (p + p.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(s);
    return solver.eigenvalues().minCoeff() >= -1e-10;
}

Eigen::Matrix2d jacobian(const AugmentedState& state, const Equilibria& eq,
                         const ModelConfig& cfg) {
    cfg.validate();
    Eigen::Matrix2d j = Eigen::Matrix2d::Identity();
    if (select_regime(state.m, eq, state.dE) != Regime::Dead) {
        const double a = std::exp(-cfg.dt / cfg.time_lag);
        j(0, 0) = a;
        j(0, 1) = 1.0 - a;
    }
    return j;
}

std::pair<AugmentedState, Eigen::Matrix2d> forecast_step(const AugmentedState& state,
                                                         const Eigen::Matrix2d& cov,
                                                         const Equilibria& eq,
                                                         const ModelConfig& cfg,
                                                         const FilterConfig& fcfg) {
    fcfg.validate();
    const Eigen::Matrix2d j = jacobian(state, eq, cfg);
    const AugmentedState next{step(state.m, state.dE, eq, cfg), state.dE};
    Eigen::Matrix2d p = j * cov * j.transpose();
    p = 0.5 * (p + p.transpose()).eval();
    p(0, 0) += fcfg.q_m;
    p(1, 1) += fcfg.q_dE;
    return {next, p};
}

std::pair<AugmentedState, Eigen::Matrix2d> analysis_step(const AugmentedState& state,
                                                         const Eigen::Matrix2d& cov,
                                                         double obs, double r) {
    if (!std::isfinite(obs)) throw ValidationError("observation must be finite");
    if (!(r > 0.0)) throw ValidationError("r must be > 0");
    const double s = cov(0, 0) + r;
    const Eigen::Vector2d k(cov(0, 0) / s, cov(1, 0) / s);
    const double innovation = obs - state.m;
    const AugmentedState next{state.m + k(0) * innovation, state.dE + k(1) * innovation};
    const Eigen::RowVector2d h(1.0, 0.0);
    Eigen::Matrix2d p = (Eigen::Matrix2d::Identity() - k * h) * cov;
    p = 0.5 * (p + p.transpose()).eval();
    return {next, p};
}

std::vector<FilterStep> run_learning(const TimeSeries& ts, const ModelConfig& cfg,
                                     const FilterConfig& fcfg) {
    ts.validate();
    cfg.validate();
    fcfg.validate();
    if (std::abs(cfg.dt - ts.dt) > 1e-9)
        throw ValidationError("model dt does not match the series spacing");

    const auto [learning, forecast] = split(ts);
    (void)forecast;
    std::vector<Equilibria> eqs;
    eqs.reserve(learning.size());
    for (std::size_t k = 0; k < learning.size(); ++k) {
        const AtmosphericSample& s = learning.sample(k);
        eqs.push_back(equilibria(s.temp, s.rh));
    }

    std::vector<FilterStep> out;
    out.reserve(learning.size());

    AugmentedState state;
    state.m = std::isfinite(learning.obs(0)) ? learning.obs(0) : 0.5 * (eqs[0].ed + eqs[0].ew);
    state.dE = 0.0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    cov(0, 0) = fcfg.p0_m;
    cov(1, 1) = fcfg.p0_dE;
    if (std::isfinite(learning.obs(0)))
        std::tie(state, cov) = analysis_step(state, cov, learning.obs(0), fcfg.r);
    out.push_back({state, cov});

    for (std::size_t k = 1; k < learning.size(); ++k) {
        std::tie(state, cov) = forecast_step(state, cov, eqs[k - 1], cfg, fcfg);
        if (std::isfinite(learning.obs(k)))
            std::tie(state, cov) = analysis_step(state, cov, learning.obs(k), fcfg.r);
        out.push_back({state, cov});
    }
    return out;
}

std::vector<double> run_forecast(const AugmentedState& state0,
                                 const std::vector<Equilibria>& eqs, const ModelConfig& cfg) {
    if (eqs.empty()) return {state0.m};
    return simulate(state0.m, state0.dE, eqs, cfg);
}

}  // namespace fmda
