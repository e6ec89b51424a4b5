#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "fmda/dataset.hpp"
#include "fmda/rnn.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* env = std::getenv("FMDA_BIN");
    REQUIRE_MESSAGE(env != nullptr, "FMDA_BIN must point at the command-line binary");
    return env;
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("fmda_cli_tests_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cmd(const std::string& args) {
    const std::string cmd = "\"" + binary() + "\" " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -2;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing expected output file: " << p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json slurp_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

// A small scenario config shared by the command tests.
fs::path scenario_config() {
    static const fs::path path = [] {
        const nlohmann::json j{{"n_steps", 150}, {"split", 100}, {"true_de", 1.0},
                               {"obs_sigma", 0.3},
                               {"anomaly", {{"start", 30.0}, {"end", 90.0}, {"rh_offset", 20.0}}}};
        const fs::path p = scratch_dir() / "scenario.json";
        std::ofstream out(p);
        out << j.dump(2);
        return p;
    }();
    return path;
}

// Generates the shared series/truth pair once and returns its directory.
fs::path synth_dir() {
    static const fs::path dir = [] {
        const fs::path d = scratch_dir() / "synth";
        const int rc = run_cmd("synth --config " + scenario_config().string() + " --out " +
                               d.string());
        REQUIRE(rc == 0);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("the command line requires a subcommand and documents itself") {
    CHECK(run_cmd("") == 1);
    CHECK(run_cmd("--help") == 0);
    CHECK(run_cmd("synth --help") == 0);
    CHECK(run_cmd("no-such-command") == 1);
    CHECK(run_cmd("synth --no-such-flag") == 1);
}

TEST_CASE("synth writes a loadable series and truth pair") {
    const fs::path d = synth_dir();
    const fmda::TimeSeries ts = fmda::load_csv((d / "series.csv").string());
    CHECK(ts.size() == 150);
    CHECK(ts.split == 100);
    const std::vector<double> truth = fmda::load_truth_csv((d / "truth.csv").string());
    CHECK(truth.size() == 150);
}

TEST_CASE("synth is deterministic and the seed flag overrides the config") {
    const fs::path a = scratch_dir() / "synth_repeat";
    REQUIRE(run_cmd("synth --config " + scenario_config().string() + " --out " + a.string()) == 0);
    CHECK(slurp(a / "series.csv") == slurp(synth_dir() / "series.csv"));
    CHECK(slurp(a / "truth.csv") == slurp(synth_dir() / "truth.csv"));

    const fs::path b = scratch_dir() / "synth_reseeded";
    REQUIRE(run_cmd("synth --config " + scenario_config().string() + " --seed 9 --out " +
                    b.string()) == 0);
    CHECK(slurp(b / "series.csv") != slurp(synth_dir() / "series.csv"));
    // The seed only shapes the observation noise; the truth is unchanged.
    CHECK(slurp(b / "truth.csv") == slurp(synth_dir() / "truth.csv"));
}

TEST_CASE("run-kf produces a report and a trajectory") {
    const fs::path d = synth_dir();
    const fs::path out = scratch_dir() / "kf";
    REQUIRE(run_cmd("run-kf --series " + (d / "series.csv").string() + " --truth " +
                    (d / "truth.csv").string() + " --out " + out.string()) == 0);
    const nlohmann::json report = slurp_json(out / "kf_report.json");
    CHECK(report.at("rmse_learning").is_number());
    CHECK(report.at("rmse_forecast").is_number());
    CHECK(report.at("dE_final").is_number());
    CHECK(report.at("loss_history").is_null());
    CHECK(report.at("config").at("split") == 100);

    const std::string traj = slurp(out / "kf_trajectory.csv");
    CHECK(traj.rfind("time,m_model,dE,p00,p11,obs,truth\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : traj) rows += c == '\n';
    CHECK(rows == 151);
}

TEST_CASE("run-kf honors the split override") {
    const fs::path d = synth_dir();
    const fs::path out = scratch_dir() / "kf_split";
    REQUIRE(run_cmd("run-kf --series " + (d / "series.csv").string() + " --split 50 --out " +
                    out.string()) == 0);
    CHECK(slurp_json(out / "kf_report.json").at("config").at("split") == 50);
}

TEST_CASE("train-rnn then predict-rnn round-trips the weight file") {
    const fs::path d = synth_dir();
    const fs::path out = scratch_dir() / "train";
    REQUIRE(run_cmd("train-rnn --series " + (d / "series.csv").string() + " --truth " +
                    (d / "truth.csv").string() + " --epochs 3 --out " + out.string()) == 0);
    const nlohmann::json report = slurp_json(out / "train_report.json");
    CHECK(report.at("loss_history").is_array());
    CHECK(report.at("loss_history").size() == 3);
    CHECK(report.at("config").at("epochs") == 3);
    const fmda::RnnWeights w = fmda::load_weights_json((out / "weights.json").string());
    CHECK(w.hidden() == 6);

    const fs::path pout = scratch_dir() / "predict";
    REQUIRE(run_cmd("predict-rnn --series " + (d / "series.csv").string() + " --weights " +
                    (out / "weights.json").string() + " --truth " + (d / "truth.csv").string() +
                    " --out " + pout.string()) == 0);
    const nlohmann::json preport = slurp_json(pout / "predict_report.json");
    CHECK(preport.at("rmse_forecast").is_number());
    const std::string traj = slurp(pout / "rnn_trajectory.csv");
    CHECK(traj.rfind("time,m_rnn,obs,truth\n", 0) == 0);
}

TEST_CASE("train-rnn accepts the paper-literal identical initialization") {
    const fs::path d = synth_dir();
    const fs::path out = scratch_dir() / "train_identical";
    REQUIRE(run_cmd("train-rnn --series " + (d / "series.csv").string() +
                    " --epochs 1 --hidden 4 --init-mode identical --lr 0 --out " +
                    out.string()) == 0);
    const fmda::RnnWeights w = fmda::load_weights_json((out / "weights.json").string());
    REQUIRE(w.hidden() == 4);
    for (Eigen::Index i = 1; i < 4; ++i) CHECK(w.w_hid(i, i) == w.w_hid(0, 0));
    CHECK(run_cmd("train-rnn --series " + (d / "series.csv").string() +
                  " --init-mode nonsense --out " + out.string()) == 1);
}

TEST_CASE("compare emits the side-by-side bundle") {
    const fs::path d = synth_dir();
    const fs::path out = scratch_dir() / "compare";
    REQUIRE(run_cmd("compare --series " + (d / "series.csv").string() + " --truth " +
                    (d / "truth.csv").string() + " --epochs 3 --out " + out.string()) == 0);
    const nlohmann::json report = slurp_json(out / "compare_report.json");
    CHECK(report.at("kf").at("rmse_forecast").is_number());
    CHECK(report.at("rnn").at("rmse_forecast").is_number());
    const std::string winner = report.at("winner_forecast_rmse").get<std::string>();
    CHECK((winner == "kf" || winner == "rnn" || winner == "tie"));
    const std::string csv = slurp(out / "compare.csv");
    CHECK(csv.rfind("time,truth,obs,kf_pred,rnn_pred\n", 0) == 0);
    CHECK(!slurp(out / "plot_compare.py").empty());
}

TEST_CASE("failure modes map to the documented exit codes") {
    SUBCASE("missing input files are I/O failures") {
        CHECK(run_cmd("run-kf --series " + (scratch_dir() / "nope.csv").string()) == 2);
        CHECK(run_cmd("synth --config " + (scratch_dir() / "nope.json").string()) == 2);
        CHECK(run_cmd("predict-rnn --series " + (synth_dir() / "series.csv").string() +
                      " --weights " + (scratch_dir() / "nope.json").string()) == 2);
    }
    SUBCASE("malformed content is a validation failure") {
        const fs::path bad_csv = scratch_dir() / "bad.csv";
        std::ofstream(bad_csv) << "time_hours,temp_k,rh_pct,fmc_pct\n0,293,forty,\n1,293,41,\n";
        CHECK(run_cmd("run-kf --series " + bad_csv.string()) == 1);

        const fs::path bad_json = scratch_dir() / "bad_weights.json";
        std::ofstream(bad_json) << "{\"h\": 1}";
        CHECK(run_cmd("predict-rnn --series " + (synth_dir() / "series.csv").string() +
                      " --weights " + bad_json.string()) == 1);

        CHECK(run_cmd("run-kf --series " + (synth_dir() / "series.csv").string() +
                      " --split 4000") == 1);
        CHECK(run_cmd("run-kf --series " + (synth_dir() / "series.csv").string() + " --r 0") ==
              1);
    }
}

TEST_CASE("the log level variable silences or enables diagnostics") {
    const fs::path d = synth_dir();
    const fs::path quiet_err = scratch_dir() / "quiet.err";
    const fs::path info_err = scratch_dir() / "info.err";
    const std::string base = "\"" + binary() + "\" run-kf --series " +
                             (d / "series.csv").string() + " --out " +
                             (scratch_dir() / "log_out").string();
    REQUIRE(std::system(("FMDA_LOG=quiet " + base + " >/dev/null 2>" + quiet_err.string()).c_str()) == 0);
    REQUIRE(std::system(("FMDA_LOG=info " + base + " >/dev/null 2>" + info_err.string()).c_str()) == 0);
    CHECK(slurp(quiet_err).empty());
    CHECK(slurp(info_err).find("[fmda]") != std::string::npos);
}
