#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fmda/dataset.hpp"
#include "fmda/kalman.hpp"
#include "fmda/moisture.hpp"
#include "fmda/pipeline.hpp"
#include "fmda/rnn.hpp"

namespace {

namespace fs = std::filesystem;

// FMDA_LOG levels: quiet < warn (default) < info < debug.
int log_level() {
    static const int level = [] {
        const char* env = std::getenv("FMDA_LOG");
        const std::string v = env ? env : "warn";
        if (v == "quiet") return 0;
        if (v == "warn") return 1;
        if (v == "info") return 2;
        if (v == "debug") return 3;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[fmda] " << msg << '\n';
}

void log_debug(const std::string& msg) {
    if (log_level() >= 3) std::cerr << "[fmda] " << msg << '\n';
}

std::string ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw fmda::IoError("cannot create output directory '" + out + "': " + ec.message());
    return out;
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

fmda::TimeSeries load_series(const std::string& path, std::optional<std::size_t> split_override) {
    fmda::TimeSeries ts = fmda::load_csv(path);
    if (split_override) {
        ts.split = *split_override;
        ts.validate();
    }
    log_info("loaded " + std::to_string(ts.size()) + " samples from " + path + " (split " +
             std::to_string(ts.split) + ")");
    return ts;
}

std::optional<std::vector<double>> load_truth(const std::string& path) {
    if (path.empty()) return std::nullopt;
    std::vector<double> truth = fmda::load_truth_csv(path);
    log_info("loaded truth trajectory from " + path);
    return truth;
}

fmda::InitMode parse_init_mode(const std::string& name) {
    if (name == "identical") return fmda::InitMode::Identical;
    if (name == "multi") return fmda::InitMode::MultiTimescale;
    throw fmda::ValidationError("init mode must be 'multi' or 'identical'");
}

const char* kPlotStub = R"PY(#!/usr/bin/env python3
"""Plot the side-by-side comparison written by `fmda compare`.

Usage: python3 plot_compare.py [compare.csv [out.png]]
"""
import csv
import os
import sys


def column(rows, name):
    return [float(r[name]) if r[name] != "" else float("nan") for r in rows]


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__) or ".", "compare.csv")
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    t = column(rows, "time")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(10, 5))
    ax.plot(t, column(rows, "obs"), ".", markersize=2, alpha=0.4, label="observations")
    ax.plot(t, column(rows, "truth"), label="truth")
    ax.plot(t, column(rows, "kf_pred"), label="time-lag model + EKF")
    ax.plot(t, column(rows, "rnn_pred"), label="trained RNN")
    ax.set_xlabel("time (hours)")
    ax.set_ylabel("fuel moisture (% dry mass)")
    ax.legend()
    out = sys.argv[2] if len(sys.argv) > 2 else os.path.splitext(path)[0] + ".png"
    fig.savefig(out, dpi=150, bbox_inches="tight")
    print(out)


if __name__ == "__main__":
    main()
)PY";

struct KfFlags {
    double time_lag = fmda::ModelConfig{}.time_lag;
    fmda::FilterConfig filter;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--time-lag", time_lag, "Model time constant T, hours");
        cmd->add_option("--q-m", filter.q_m, "Process noise variance for m per step");
        cmd->add_option("--q-de", filter.q_dE, "Process noise variance for dE per step");
        cmd->add_option("--r", filter.r, "Observation noise variance");
        cmd->add_option("--p0-m", filter.p0_m, "Initial covariance of m");
        cmd->add_option("--p0-de", filter.p0_dE, "Initial covariance of dE");
    }
};

struct RnnFlags {
    double time_lag = fmda::ModelConfig{}.time_lag;
    fmda::TrainConfig train;
    int hidden = 6;
    std::string init_mode = "multi";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--time-lag", time_lag, "Model time constant T, hours");
        cmd->add_option("--window", train.window, "Training window length s, timesteps");
        cmd->add_option("--lr", train.lr, "SGD learning rate");
        cmd->add_option("--epochs", train.epochs, "Training epochs");
        cmd->add_option("--hidden", hidden, "Hidden width");
        cmd->add_option("--init-mode", init_mode, "Initialization: multi or identical")
            ->check(CLI::IsMember({"multi", "identical"}));
        cmd->add_option("--seed", train.seed, "Training seed (echoed in the report)");
    }

    fmda::TrainConfig config() const {
        fmda::TrainConfig t = train;
        t.init_mode = parse_init_mode(init_mode);
        return t;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuel-moisture toolkit: time-lag model, EKF assimilation, RNN training"};
    app.require_subcommand(1);

    // --- synth --------------------------------------------------------------
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a synthetic scenario: series CSV + truth CSV");
    std::string synth_config_path, synth_out = ".";
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--config", synth_config_path,
                          "Scenario config JSON (defaults to the canonical benchmark)");
    synth_cmd->add_option("--out", synth_out, "Output directory");
    auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Override the config seed");
    synth_cmd->callback([&] {
        fmda::SynthConfig cfg;
        if (!synth_config_path.empty()) cfg = fmda::load_synth_config(synth_config_path);
        if (synth_seed_opt->count() > 0) cfg.seed = synth_seed;
        const fmda::ModelConfig model{fmda::ModelConfig{}.time_lag, cfg.dt};
        log_debug("scenario config: " + fmda::synth_config_to_json(cfg).dump());
        const fmda::SynthResult result = fmda::synth(cfg, model);
        const std::string out = ensure_out_dir(synth_out);
        fmda::save_csv(result.series, join(out, "series.csv"));
        std::vector<double> times;
        times.reserve(result.series.size());
        for (const auto& s : result.series.samples) times.push_back(s.time);
        fmda::save_truth_csv(times, result.truth, join(out, "truth.csv"));
        log_info("wrote " + join(out, "series.csv") + " and " + join(out, "truth.csv"));
    });

    // --- run-kf -------------------------------------------------------------
    auto* kf_cmd = app.add_subcommand("run-kf", "EKF learning phase + model forecast phase");
    std::string kf_series_path, kf_truth_path, kf_out = ".";
    std::optional<std::size_t> kf_split;
    KfFlags kf_flags;
    kf_cmd->add_option("--series", kf_series_path, "Series CSV")->required();
    kf_cmd->add_option("--truth", kf_truth_path, "Truth CSV for scoring");
    kf_cmd->add_option("--split", kf_split, "Override the learning/forecast split index");
    kf_cmd->add_option("--out", kf_out, "Output directory");
    kf_flags.add_to(kf_cmd);
    kf_cmd->callback([&] {
        const fmda::TimeSeries ts = load_series(kf_series_path, kf_split);
        const auto truth = load_truth(kf_truth_path);
        const fmda::ModelConfig model{kf_flags.time_lag, ts.dt};
        const fmda::KfPipelineResult result =
            fmda::run_kf_pipeline(ts, truth ? &*truth : nullptr, model, kf_flags.filter);
        const std::string out = ensure_out_dir(kf_out);
        fmda::write_json(fmda::report_to_json(result.report), join(out, "kf_report.json"));
        fmda::write_kf_trajectory_csv(ts, result, truth ? &*truth : nullptr,
                                      join(out, "kf_trajectory.csv"));
        log_info("terminal dE estimate: " + std::to_string(result.learning.back().state.dE));
        log_info("wrote " + join(out, "kf_report.json") + " and " +
                 join(out, "kf_trajectory.csv"));
    });

    // --- train-rnn ----------------------------------------------------------
    auto* train_cmd =
        app.add_subcommand("train-rnn", "Euler-init + truncated-BPTT training on the learning range");
    std::string train_series_path, train_truth_path, train_out = ".", train_weights_path;
    std::optional<std::size_t> train_split;
    RnnFlags train_flags;
    train_cmd->add_option("--series", train_series_path, "Series CSV")->required();
    train_cmd->add_option("--truth", train_truth_path, "Truth CSV for scoring");
    train_cmd->add_option("--split", train_split, "Override the learning/forecast split index");
    train_cmd->add_option("--out", train_out, "Output directory");
    train_cmd->add_option("--weights", train_weights_path,
                          "Weights output path (default: <out>/weights.json)");
    train_flags.add_to(train_cmd);
    train_cmd->callback([&] {
        const fmda::TimeSeries ts = load_series(train_series_path, train_split);
        const auto truth = load_truth(train_truth_path);
        const fmda::ModelConfig model{train_flags.time_lag, ts.dt};
        const fmda::TrainPipelineResult result = fmda::train_rnn_pipeline(
            ts, truth ? &*truth : nullptr, model, train_flags.config(), train_flags.hidden);
        const std::string out = ensure_out_dir(train_out);
        const std::string weights_path =
            train_weights_path.empty() ? join(out, "weights.json") : train_weights_path;
        fmda::save_weights_json(result.weights, weights_path);
        fmda::write_json(fmda::report_to_json(result.report), join(out, "train_report.json"));
        const auto& losses = *result.report.loss_history;
        log_info("epoch loss " + std::to_string(losses.front()) + " -> " +
                 std::to_string(losses.back()));
        log_info("wrote " + weights_path + " and " + join(out, "train_report.json"));
    });

    // --- predict-rnn --------------------------------------------------------
    auto* predict_cmd =
        app.add_subcommand("predict-rnn", "Stateless full-series evaluation of stored weights");
    std::string predict_series_path, predict_truth_path, predict_out = ".", predict_weights_path;
    std::optional<std::size_t> predict_split;
    predict_cmd->add_option("--series", predict_series_path, "Series CSV")->required();
    predict_cmd->add_option("--weights", predict_weights_path, "Weights JSON")->required();
    predict_cmd->add_option("--truth", predict_truth_path, "Truth CSV for scoring");
    predict_cmd->add_option("--split", predict_split,
                            "Override the learning/forecast split index");
    predict_cmd->add_option("--out", predict_out, "Output directory");
    predict_cmd->callback([&] {
        const fmda::TimeSeries ts = load_series(predict_series_path, predict_split);
        const auto truth = load_truth(predict_truth_path);
        const fmda::RnnWeights weights = fmda::load_weights_json(predict_weights_path);
        const fmda::PredictPipelineResult result =
            fmda::predict_rnn_pipeline(ts, truth ? &*truth : nullptr, weights);
        const std::string out = ensure_out_dir(predict_out);
        fmda::write_json(fmda::report_to_json(result.report), join(out, "predict_report.json"));
        fmda::write_rnn_trajectory_csv(ts, result.prediction, truth ? &*truth : nullptr,
                                       join(out, "rnn_trajectory.csv"));
        log_info("wrote " + join(out, "predict_report.json") + " and " +
                 join(out, "rnn_trajectory.csv"));
    });

    // --- compare ------------------------------------------------------------
    auto* compare_cmd =
        app.add_subcommand("compare", "Both pipelines on identical splits, side by side");
    std::string compare_series_path, compare_truth_path, compare_out = ".";
    std::optional<std::size_t> compare_split;
    KfFlags compare_kf_flags;
    RnnFlags compare_rnn_flags;
    compare_cmd->add_option("--series", compare_series_path, "Series CSV")->required();
    compare_cmd->add_option("--truth", compare_truth_path, "Truth CSV for scoring");
    compare_cmd->add_option("--split", compare_split,
                            "Override the learning/forecast split index");
    compare_cmd->add_option("--out", compare_out, "Output directory");
    compare_kf_flags.add_to(compare_cmd);
    // --time-lag is shared between the two pipelines; register it once.
    compare_cmd->add_option("--window", compare_rnn_flags.train.window,
                            "Training window length s, timesteps");
    compare_cmd->add_option("--lr", compare_rnn_flags.train.lr, "SGD learning rate");
    compare_cmd->add_option("--epochs", compare_rnn_flags.train.epochs, "Training epochs");
    compare_cmd->add_option("--hidden", compare_rnn_flags.hidden, "Hidden width");
    compare_cmd->add_option("--init-mode", compare_rnn_flags.init_mode,
                            "Initialization: multi or identical")
        ->check(CLI::IsMember({"multi", "identical"}));
    compare_cmd->add_option("--seed", compare_rnn_flags.train.seed,
                            "Training seed (echoed in the report)");
    compare_cmd->callback([&] {
        const fmda::TimeSeries ts = load_series(compare_series_path, compare_split);
        const auto truth = load_truth(compare_truth_path);
        const fmda::ModelConfig model{compare_kf_flags.time_lag, ts.dt};
        const fmda::ComparePipelineResult result =
            fmda::compare_pipeline(ts, truth ? &*truth : nullptr, model, compare_kf_flags.filter,
                                   compare_rnn_flags.config(), compare_rnn_flags.hidden);
        const std::string out = ensure_out_dir(compare_out);
        nlohmann::json report{{"kf", fmda::report_to_json(result.kf.report)},
                              {"rnn", fmda::report_to_json(result.rnn.report)},
                              {"winner_forecast_rmse", result.winner_forecast_rmse}};
        fmda::write_json(report, join(out, "compare_report.json"));
        fmda::write_compare_csv(ts, result, truth ? &*truth : nullptr, join(out, "compare.csv"));
        std::ofstream stub(join(out, "plot_compare.py"), std::ios::binary);
        if (!stub) throw fmda::IoError("cannot open for writing: " + join(out, "plot_compare.py"));
        stub << kPlotStub;
        log_info("forecast RMSE: kf " + std::to_string(result.kf.report.rmse_forecast) + ", rnn " +
                 std::to_string(result.rnn.report.rmse_forecast) + " -> winner " +
                 result.winner_forecast_rmse);
        log_info("wrote " + join(out, "compare_report.json") + ", " + join(out, "compare.csv") +
                 ", " + join(out, "plot_compare.py"));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const fmda::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const fmda::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
