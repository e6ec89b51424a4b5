#include "fmda/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace fmda {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void append_cell(std::string& out, double v) {
    if (std::isfinite(v)) out += format_double(v);
}

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

// The initial hidden value shared by training and evaluation: the first
// learning-range observation, falling back to the mean equilibrium at step 0.
double initial_hidden_value(const SeriesView& learning, const std::vector<Equilibria>& eqs) {
    for (std::size_t k = 0; k < learning.size(); ++k)
        if (std::isfinite(learning.obs(k))) return learning.obs(k);
    return 0.5 * (eqs[0].ed + eqs[0].ew);
}

std::vector<double> rnn_full_prediction(const RnnWeights& w, const TimeSeries& ts,
                                        const std::vector<Equilibria>& eqs) {
    const auto [learning, forecast] = split(ts);
    (void)forecast;
    const Eigen::VectorXd h0 =
        Eigen::VectorXd::Constant(w.hidden(), initial_hidden_value(learning, eqs));
    // The output after consuming features[k] estimates the moisture at step
    // k+1, so prediction[0] is the readout of the initial hidden state.
    std::vector<double> prediction;
    prediction.reserve(ts.size());
    prediction.push_back(w.w_out.dot(h0) + w.b_out);
    const std::vector<Equilibria> drive(eqs.begin(), eqs.end() - 1);
    const std::vector<double> outputs = evaluate_sequence(w, h0, drive);
    prediction.insert(prediction.end(), outputs.begin(), outputs.end());
    return prediction;
}

void check_truth_length(const TimeSeries& ts, const std::vector<double>* truth) {
    if (truth != nullptr && truth->size() != ts.size())
        throw ValidationError("truth length " + std::to_string(truth->size()) +
                              " does not match series length " + std::to_string(ts.size()));
}

}  // namespace

double rmse(const std::vector<double>& pred, const std::vector<double>& target,
            std::size_t begin, std::size_t end) {
    if (pred.size() != target.size())
        throw ValidationError("rmse requires equal-length prediction and target");
    if (end > pred.size() || begin > end) throw ValidationError("rmse range out of bounds");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = begin; k < end; ++k) {
        if (!std::isfinite(target[k])) continue;
        const double d = pred[k] - target[k];
        sum += d * d;
        ++count;
    }
    if (count == 0) return kNaN;
    return std::sqrt(sum / static_cast<double>(count));
}

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["rmse_learning"] = finite_or_null(report.rmse_learning);
    j["rmse_forecast"] = finite_or_null(report.rmse_forecast);
    j["dE_final"] = report.dE_final ? nlohmann::json(*report.dE_final) : nlohmann::json(nullptr);
    j["loss_history"] =
        report.loss_history ? nlohmann::json(*report.loss_history) : nlohmann::json(nullptr);
    j["config"] = report.config;
    j["seed"] = report.seed;
    return j;
}

std::vector<double> scoring_target(const TimeSeries& ts, const std::vector<double>* truth) {
    check_truth_length(ts, truth);
    if (truth != nullptr) return *truth;
    std::vector<double> target;
    target.reserve(ts.size());
    for (const AtmosphericSample& s : ts.samples) target.push_back(s.has_obs() ? s.obs : kNaN);
    return target;
}

KfPipelineResult run_kf_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                 const ModelConfig& cfg, const FilterConfig& fcfg) {
    check_truth_length(ts, truth);
    KfPipelineResult result;
    result.learning = run_learning(ts, cfg, fcfg);

    const std::vector<Equilibria> eqs = features(ts);
    const AugmentedState last = result.learning.back().state;
    // The forecast phase re-runs the model from the last posterior state with
    // dE frozen; its first value reproduces that state at step split-1.
    const std::vector<Equilibria> tail(eqs.begin() + static_cast<std::ptrdiff_t>(ts.split) - 1,
                                       eqs.end() - 1);
    const std::vector<double> forecast = run_forecast(last, tail, cfg);

    result.prediction.reserve(ts.size());
    for (const FilterStep& stepk : result.learning) result.prediction.push_back(stepk.state.m);
    result.prediction.insert(result.prediction.end(), forecast.begin() + 1, forecast.end());

    const std::vector<double> target = scoring_target(ts, truth);
    result.report.rmse_learning = rmse(result.prediction, target, 0, ts.split);
    result.report.rmse_forecast = rmse(result.prediction, target, ts.split, ts.size());
    result.report.dE_final = last.dE;
    result.report.config = {{"time_lag", cfg.time_lag},
                            {"dt", cfg.dt},
                            {"q_m", fcfg.q_m},
                            {"q_de", fcfg.q_dE},
                            {"r", fcfg.r},
                            {"p0_m", fcfg.p0_m},
                            {"p0_de", fcfg.p0_dE},
                            {"split", ts.split}};
    return result;
}

TrainPipelineResult train_rnn_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                       const ModelConfig& cfg, const TrainConfig& tcfg,
                                       int hidden) {
    check_truth_length(ts, truth);
    ts.validate();
    cfg.validate();
    if (std::abs(cfg.dt - ts.dt) > 1e-9)
        throw ValidationError("model dt does not match the series spacing");

    const std::vector<Equilibria> eqs = features(ts);
    const auto [learning, forecast_view] = split(ts);
    (void)forecast_view;

    // Training target at step k is the next step's observation: the output
    // after consuming features[k] estimates the moisture at step k+1.
    const std::size_t n_learn = learning.size();
    std::vector<Equilibria> train_features(eqs.begin(),
                                           eqs.begin() + static_cast<std::ptrdiff_t>(n_learn));
    std::vector<double> targets(n_learn, kNaN);
    for (std::size_t k = 0; k + 1 < n_learn; ++k) targets[k] = learning.obs(k + 1);

    const RnnWeights w0 = init_euler(hidden, cfg, tcfg.init_mode, tcfg.timescales);
    TrainResult trained = train(w0, train_features, targets, tcfg, cfg);

    TrainPipelineResult result;
    result.weights = std::move(trained.weights);
    result.prediction = rnn_full_prediction(result.weights, ts, eqs);

    const std::vector<double> target = scoring_target(ts, truth);
    result.report.rmse_learning = rmse(result.prediction, target, 0, ts.split);
    result.report.rmse_forecast = rmse(result.prediction, target, ts.split, ts.size());
    result.report.loss_history = std::move(trained.loss_history);
    result.report.seed = tcfg.seed;
    nlohmann::json timescales = nlohmann::json::array();
    for (double t : tcfg.timescales) timescales.push_back(t);
    result.report.config = {
        {"time_lag", cfg.time_lag},
        {"dt", cfg.dt},
        {"window", tcfg.window},
        {"lr", tcfg.lr},
        {"epochs", tcfg.epochs},
        {"hidden", hidden},
        {"init_mode", tcfg.init_mode == InitMode::Identical ? "identical" : "multi"},
        {"timescales", timescales},
        {"split", ts.split}};
    return result;
}

PredictPipelineResult predict_rnn_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                           const RnnWeights& weights) {
    check_truth_length(ts, truth);
    ts.validate();
    weights.validate();
    if (std::abs(weights.dt - ts.dt) > 1e-9)
        throw ValidationError("weights dt does not match the series spacing");

    const std::vector<Equilibria> eqs = features(ts);
    PredictPipelineResult result;
    result.prediction = rnn_full_prediction(weights, ts, eqs);

    const std::vector<double> target = scoring_target(ts, truth);
    result.report.rmse_learning = rmse(result.prediction, target, 0, ts.split);
    result.report.rmse_forecast = rmse(result.prediction, target, ts.split, ts.size());
    result.report.config = {{"hidden", weights.hidden()}, {"dt", weights.dt}, {"split", ts.split}};
    return result;
}

ComparePipelineResult compare_pipeline(const TimeSeries& ts, const std::vector<double>* truth,
                                       const ModelConfig& cfg, const FilterConfig& fcfg,
                                       const TrainConfig& tcfg, int hidden) {
    const std::vector<double> target = scoring_target(ts, truth);
    bool any_target = false;
    for (std::size_t k = ts.split; k < ts.size(); ++k)
        if (std::isfinite(target[k])) any_target = true;
    if (!any_target)
        throw ValidationError(
            "compare needs a scoring target on the forecast range (truth or held-out obs)");

    ComparePipelineResult result{run_kf_pipeline(ts, truth, cfg, fcfg),
                                 train_rnn_pipeline(ts, truth, cfg, tcfg, hidden),
                                 ""};
    const double kf = result.kf.report.rmse_forecast;
    const double rnn = result.rnn.report.rmse_forecast;
    if (rnn < kf) result.winner_forecast_rmse = "rnn";
    else if (kf < rnn) result.winner_forecast_rmse = "kf";
    else result.winner_forecast_rmse = "tie";
    return result;
}

void write_kf_trajectory_csv(const TimeSeries& ts, const KfPipelineResult& result,
                             const std::vector<double>* truth, const std::string& path) {
    check_truth_length(ts, truth);
    std::string out = "time,m_model,dE,p00,p11,obs,truth\n";
    const double final_dE = result.learning.back().state.dE;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        append_cell(out, ts.samples[k].time);
        out += ',';
        append_cell(out, result.prediction[k]);
        out += ',';
        if (k < result.learning.size()) {
            const FilterStep& stepk = result.learning[k];
            append_cell(out, stepk.state.dE);
            out += ',';
            append_cell(out, stepk.cov(0, 0));
            out += ',';
            append_cell(out, stepk.cov(1, 1));
        } else {
            append_cell(out, final_dE);
            out += ",,";
        }
        out += ',';
        if (ts.samples[k].has_obs()) append_cell(out, ts.samples[k].obs);
        out += ',';
        if (truth != nullptr) append_cell(out, (*truth)[k]);
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + path);
    file << out;
    if (!file) throw IoError("write failure: " + path);
}

void write_rnn_trajectory_csv(const TimeSeries& ts, const std::vector<double>& prediction,
                              const std::vector<double>* truth, const std::string& path) {
    check_truth_length(ts, truth);
    if (prediction.size() != ts.size())
        throw ValidationError("prediction length does not match series length");
    std::string out = "time,m_rnn,obs,truth\n";
    for (std::size_t k = 0; k < ts.size(); ++k) {
        append_cell(out, ts.samples[k].time);
        out += ',';
        append_cell(out, prediction[k]);
        out += ',';
        if (ts.samples[k].has_obs()) append_cell(out, ts.samples[k].obs);
        out += ',';
        if (truth != nullptr) append_cell(out, (*truth)[k]);
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + path);
    file << out;
    if (!file) throw IoError("write failure: " + path);
}

void write_compare_csv(const TimeSeries& ts, const ComparePipelineResult& result,
                       const std::vector<double>* truth, const std::string& path) {
    check_truth_length(ts, truth);
    std::string out = "time,truth,obs,kf_pred,rnn_pred\n";
    for (std::size_t k = 0; k < ts.size(); ++k) {
        append_cell(out, ts.samples[k].time);
        out += ',';
        if (truth != nullptr) append_cell(out, (*truth)[k]);
        out += ',';
        if (ts.samples[k].has_obs()) append_cell(out, ts.samples[k].obs);
        out += ',';
        append_cell(out, result.kf.prediction[k]);
        out += ',';
        append_cell(out, result.rnn.prediction[k]);
        out += '\n';
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + path);
    file << out;
    if (!file) throw IoError("write failure: " + path);
}

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + path);
    file << j.dump(2) << '\n';
    if (!file) throw IoError("write failure: " + path);
}

}  // namespace fmda
