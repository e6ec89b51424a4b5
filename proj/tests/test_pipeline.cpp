#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fmda/pipeline.hpp"

using namespace fmda;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

fs::path scratch_file(const std::string& name) {
    static const fs::path dir = [] {
        fs::path d =
            fs::temp_directory_path() / ("fmda_pipeline_tests_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

SynthResult small_scenario(bool with_anomaly) {
    SynthConfig cfg;
    cfg.n_steps = 150;
    cfg.split = 100;
    if (!with_anomaly)
        cfg.anomaly.reset();
    else
        cfg.anomaly = AnomalyConfig{30.0, 90.0, 20.0};
    return synth(cfg, ModelConfig{10.0, cfg.dt});
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("rmse scores the requested range and skips absent targets") {
    const std::vector<double> pred{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> target{1.0, 4.0, kNaN, 1.0};
    CHECK(rmse(pred, target, 0, 1) == 0.0);
    // Index 2 is skipped; indices 0, 1, 3 contribute 0, (2-4)^2, (4-1)^2.
    CHECK(rmse(pred, target, 0, 4) ==
          doctest::Approx(std::sqrt((0.0 + 4.0 + 9.0) / 3.0)).epsilon(1e-14));
    CHECK(std::isnan(rmse(pred, target, 2, 3)));
    CHECK_THROWS_AS(rmse(pred, std::vector<double>{1.0}, 0, 1), ValidationError);
    CHECK_THROWS_AS(rmse(pred, target, 0, 5), ValidationError);
    CHECK_THROWS_AS(rmse(pred, target, 3, 2), ValidationError);
}

TEST_CASE("scoring_target prefers the truth and falls back to observations") {
    const SynthResult sr = small_scenario(false);
    const std::vector<double> with_truth = scoring_target(sr.series, &sr.truth);
    CHECK(with_truth == sr.truth);
    const std::vector<double> fallback = scoring_target(sr.series, nullptr);
    REQUIRE(fallback.size() == sr.series.size());
    for (std::size_t k = 0; k < fallback.size(); ++k) {
        if (k < sr.series.split)
            CHECK(fallback[k] == sr.series.samples[k].obs);
        else
            CHECK(std::isnan(fallback[k]));
    }
    std::vector<double> short_truth(10, 1.0);
    CHECK_THROWS_AS(scoring_target(sr.series, &short_truth), ValidationError);
}

TEST_CASE("report JSON serializes absent metrics as null") {
    RunReport report;
    report.seed = 7;
    const nlohmann::json j = report_to_json(report);
    CHECK(j["rmse_learning"].is_null());
    CHECK(j["rmse_forecast"].is_null());
    CHECK(j["dE_final"].is_null());
    CHECK(j["loss_history"].is_null());
    CHECK(j["seed"] == 7);

    report.rmse_learning = 0.25;
    report.dE_final = 1.5;
    report.loss_history = std::vector<double>{2.0, 1.0};
    const nlohmann::json k = report_to_json(report);
    CHECK(k["rmse_learning"] == 0.25);
    CHECK(k["dE_final"] == 1.5);
    CHECK(k["loss_history"] == nlohmann::json::array({2.0, 1.0}));
}

TEST_CASE("the filter pipeline stitches the learning states to the frozen forecast") {
    const SynthResult sr = small_scenario(false);
    const ModelConfig cfg{10.0, 1.0};
    const FilterConfig fcfg;
    const KfPipelineResult r = run_kf_pipeline(sr.series, &sr.truth, cfg, fcfg);

    REQUIRE(r.prediction.size() == sr.series.size());
    REQUIRE(r.learning.size() == sr.series.split);
    for (std::size_t k = 0; k < r.learning.size(); ++k)
        CHECK(r.prediction[k] == r.learning[k].state.m);

    // The forecast tail is the model run from the final posterior state.
    const std::vector<Equilibria> eqs = features(sr.series);
    const std::vector<Equilibria> tail(eqs.begin() + sr.series.split - 1, eqs.end() - 1);
    const std::vector<double> fore = run_forecast(r.learning.back().state, tail, cfg);
    REQUIRE(fore.size() == sr.series.size() - sr.series.split + 1);
    for (std::size_t k = sr.series.split; k < sr.series.size(); ++k)
        CHECK(r.prediction[k] == fore[k - sr.series.split + 1]);

    CHECK(std::isfinite(r.report.rmse_learning));
    CHECK(std::isfinite(r.report.rmse_forecast));
    REQUIRE(r.report.dE_final.has_value());
    CHECK(*r.report.dE_final == r.learning.back().state.dE);
    CHECK(!r.report.loss_history.has_value());
    CHECK(r.report.config.at("split") == sr.series.split);
}

TEST_CASE("assimilation beats the uncorrected model on a correction-bearing scenario") {
    SynthConfig scfg;
    scfg.n_steps = 300;
    scfg.split = 200;
    scfg.true_dE = 1.0;
    scfg.anomaly.reset();
    const SynthResult sr = synth(scfg, ModelConfig{10.0, 1.0});
    const ModelConfig cfg{10.0, 1.0};
    const KfPipelineResult assimilated = run_kf_pipeline(sr.series, &sr.truth, cfg, FilterConfig{});

    // Reference: the same model run with no assimilation and no correction.
    const std::vector<Equilibria> eqs = features(sr.series);
    const std::vector<Equilibria> drive(eqs.begin(), eqs.end() - 1);
    const std::vector<double> plain = simulate(sr.series.samples[0].obs, 0.0, drive, cfg);
    const double plain_rmse = rmse(plain, sr.truth, sr.series.split, sr.series.size());

    CHECK(assimilated.report.rmse_forecast < plain_rmse);
}

TEST_CASE("the training pipeline with a zero learning rate returns the initialization") {
    const SynthResult sr = small_scenario(false);
    const ModelConfig cfg{10.0, 1.0};
    TrainConfig tcfg;
    tcfg.lr = 0.0;
    tcfg.epochs = 2;
    const TrainPipelineResult r = train_rnn_pipeline(sr.series, &sr.truth, cfg, tcfg, 6);
    const RnnWeights w0 = init_euler(6, cfg, tcfg.init_mode, tcfg.timescales);
    CHECK(r.weights.w_in == w0.w_in);
    CHECK(r.weights.w_hid == w0.w_hid);
    CHECK(r.weights.b_hid == w0.b_hid);
    CHECK(r.weights.w_out == w0.w_out);
    CHECK(r.weights.b_out == w0.b_out);
    REQUIRE(r.report.loss_history.has_value());
    CHECK(r.report.loss_history->size() == 2);
    CHECK(!r.report.dE_final.has_value());
    CHECK(r.report.config.at("init_mode") == "multi");
    REQUIRE(r.prediction.size() == sr.series.size());
}

TEST_CASE("the prediction pipeline is the stateless readout of stored weights") {
    const SynthResult sr = small_scenario(false);
    const ModelConfig cfg{10.0, 1.0};
    const RnnWeights w = init_euler(6, cfg, InitMode::MultiTimescale, {1, 2, 5, 10, 24, 48});
    const PredictPipelineResult r = predict_rnn_pipeline(sr.series, &sr.truth, w);
    REQUIRE(r.prediction.size() == sr.series.size());

    const std::vector<Equilibria> eqs = features(sr.series);
    const double h0_value = sr.series.samples[0].obs;  // first learning observation
    const Eigen::VectorXd h0 = Eigen::VectorXd::Constant(w.hidden(), h0_value);
    CHECK(r.prediction[0] == w.w_out.dot(h0) + w.b_out);
    const std::vector<Equilibria> drive(eqs.begin(), eqs.end() - 1);
    const std::vector<double> outputs = evaluate_sequence(w, h0, drive);
    for (std::size_t k = 1; k < r.prediction.size(); ++k)
        CHECK(r.prediction[k] == outputs[k - 1]);

    // Training and prediction agree on the full-series evaluation.
    TrainConfig tcfg;
    tcfg.lr = 0.0;
    tcfg.epochs = 1;
    const TrainPipelineResult t = train_rnn_pipeline(sr.series, &sr.truth, cfg, tcfg, 6);
    CHECK(t.prediction == r.prediction);

    RnnWeights mismatched = w;
    mismatched.dt = 0.5;
    CHECK_THROWS_WITH_AS(predict_rnn_pipeline(sr.series, &sr.truth, mismatched),
                         doctest::Contains("dt"), ValidationError);
}

TEST_CASE("compare runs both pipelines and names the lower forecast error") {
    const SynthResult sr = small_scenario(true);
    const ModelConfig cfg{10.0, 1.0};
    TrainConfig tcfg;
    tcfg.epochs = 5;
    const ComparePipelineResult r =
        compare_pipeline(sr.series, &sr.truth, cfg, FilterConfig{}, tcfg, 6);
    const double kf = r.kf.report.rmse_forecast;
    const double rnn = r.rnn.report.rmse_forecast;
    REQUIRE(std::isfinite(kf));
    REQUIRE(std::isfinite(rnn));
    if (rnn < kf) CHECK(r.winner_forecast_rmse == "rnn");
    else if (kf < rnn) CHECK(r.winner_forecast_rmse == "kf");
    else CHECK(r.winner_forecast_rmse == "tie");
}

TEST_CASE("compare refuses to score without any forecast-range target") {
    SynthResult sr = small_scenario(false);
    // No truth supplied and no held-out observations: nothing to score.
    for (std::size_t k = sr.series.split; k < sr.series.size(); ++k)
        sr.series.samples[k].obs = kNaN;
    CHECK_THROWS_WITH_AS(
        compare_pipeline(sr.series, nullptr, ModelConfig{10.0, 1.0}, FilterConfig{},
                         TrainConfig{}, 6),
        doctest::Contains("scoring target"), ValidationError);
}

TEST_CASE("trajectory and comparison files carry the documented columns") {
    const SynthResult sr = small_scenario(false);
    const ModelConfig cfg{10.0, 1.0};
    TrainConfig tcfg;
    tcfg.epochs = 2;
    const ComparePipelineResult r =
        compare_pipeline(sr.series, &sr.truth, cfg, FilterConfig{}, tcfg, 6);

    const fs::path kf_path = scratch_file("kf_trajectory.csv");
    write_kf_trajectory_csv(sr.series, r.kf, &sr.truth, kf_path.string());
    const std::vector<std::string> kf_lines = read_lines(kf_path);
    REQUIRE(kf_lines.size() == sr.series.size() + 1);
    CHECK(kf_lines[0] == "time,m_model,dE,p00,p11,obs,truth");
    // A forecast row keeps the frozen correction but has empty covariance and
    // observation cells: time,m,dE,,,,truth
    const std::string& fore_row = kf_lines[sr.series.split + 1];
    std::size_t commas = 0;
    for (char c : fore_row) commas += c == ',';
    CHECK(commas == 6);
    CHECK(fore_row.find(",,,,") != std::string::npos);

    const fs::path rnn_path = scratch_file("rnn_trajectory.csv");
    write_rnn_trajectory_csv(sr.series, r.rnn.prediction, &sr.truth, rnn_path.string());
    const std::vector<std::string> rnn_lines = read_lines(rnn_path);
    REQUIRE(rnn_lines.size() == sr.series.size() + 1);
    CHECK(rnn_lines[0] == "time,m_rnn,obs,truth");

    const fs::path cmp_path = scratch_file("compare.csv");
    write_compare_csv(sr.series, r, &sr.truth, cmp_path.string());
    const std::vector<std::string> cmp_lines = read_lines(cmp_path);
    REQUIRE(cmp_lines.size() == sr.series.size() + 1);
    CHECK(cmp_lines[0] == "time,truth,obs,kf_pred,rnn_pred");

    // Data rows are parseable back to the source values.
    std::stringstream row(cmp_lines[1]);
    std::string cell;
    std::getline(row, cell, ',');
    CHECK(cell == "0");

    const fs::path report_path = scratch_file("report.json");
    write_json(report_to_json(r.kf.report), report_path.string());
    std::ifstream in(report_path);
    nlohmann::json parsed;
    in >> parsed;
    CHECK(parsed.contains("rmse_forecast"));
    CHECK_THROWS_AS(write_json(nlohmann::json::object(),
                               (scratch_file("no_dir") / "x" / "y.json").string()),
                    IoError);
}
