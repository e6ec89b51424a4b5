#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fmda/dataset.hpp"
#include "fmda/kalman.hpp"
#include "fmda/rnn.hpp"

namespace fmda {

// sqrt(mean((pred - target)^2)) over indices [begin, end), skipping entries
// whose target is NaN; NaN when no scored entry remains.
double rmse(const std::vector<double>& pred, const std::vector<double>& target,
            std::size_t begin, std::size_t end);

// Per-run metrics: RMSEs are NaN (serialized as null) when no scoring target
// exists on the range; dE_final is set on filter runs, loss_history on
// training runs. config holds the effective configuration echo.
struct RunReport {
    double rmse_learning = std::numeric_limits<double>::quiet_NaN();
    double rmse_forecast = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> dE_final;
    std::optional<std::vector<double>> loss_history;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
};

nlohmann::json report_to_json(const RunReport& report);

// Scoring target over the full series: the provided truth when present,
// otherwise the series' own observations (including held-out forecast-range
// values, which models never see). All-NaN when neither exists.
std::vector<double> scoring_target(const TimeSeries& ts, const std::vector<double>* truth);

struct KfPipelineResult {
    std::vector<FilterStep> learning;   // one entry per learning timestep
    std::vector<double> prediction;     // length = series length
    RunReport report;
};

// Learning via run_learning, then the forecast phase from the final state.
// prediction[k] is the posterior moisture for k < split and the frozen-dE
// model forecast for k >= split.
KfPipelineResult run_kf_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                 const ModelConfig& cfg, const FilterConfig& fcfg);

struct TrainPipelineResult {
    RnnWeights weights;
    std::vector<double> prediction;     // full-series evaluation of the trained net
    RunReport report;
};

// Euler init -> truncated-BPTT training on the learning range -> stateless
// full-series evaluation. Training targets are the next step's observation:
// target[k] = obs[k+1] for k+1 < split.
TrainPipelineResult train_rnn_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                       const ModelConfig& cfg, const TrainConfig& tcfg,
                                       int hidden);

struct PredictPipelineResult {
    std::vector<double> prediction;     // length = series length
    RunReport report;
};

// Stateless evaluation of stored weights over the full series. The initial
// hidden state is filled with the first learning-range observation (fallback:
// mean equilibrium at step 0); prediction[0] is the readout of that state and
// prediction[k] the network output after consuming features[k-1].
PredictPipelineResult predict_rnn_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                           const RnnWeights& weights);

struct ComparePipelineResult {
    KfPipelineResult kf;
    TrainPipelineResult rnn;
    std::string winner_forecast_rmse;   // "kf", "rnn", or "tie"
};

// Both pipelines on identical splits and inputs.
ComparePipelineResult compare_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                       const ModelConfig& cfg, const FilterConfig& fcfg,
                                       const TrainConfig& tcfg, int hidden);

// --- trajectory/report writers (CLI deliverables) ---------------------------

// Columns: time,m_model,dE,p00,p11,obs,truth. Forecast rows carry the frozen
// dE and empty covariance cells; obs/truth cells are empty when unavailable.
void write_kf_trajectory_csv(const TimeSeries& ts, const KfPipelineResult& result,
                             const std::vector<double>* truth, const std::string& path);

// Columns: time,m_rnn,obs,truth.
void write_rnn_trajectory_csv(const TimeSeries& ts, const std::vector<double>& prediction,
                              const std::vector<double>* truth, const std::string& path);

// Side-by-side columns: time,truth,obs,kf_pred,rnn_pred.
void write_compare_csv(const TimeSeries& ts, const ComparePipelineResult& result,
                       const std::vector<double>* truth, const std::string& path);

void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace fmda
