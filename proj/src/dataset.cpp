#include "fmda/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace fmda {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shortest representation that round-trips exactly; locale-independent.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Strict full-token parse; empty() result signals failure to the caller.
bool parse_double(const std::string& token, double& out) {
    const char* first = token.data();
    const char* last = first + token.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

ValidationError line_error(const std::string& path, std::size_t line_no, const std::string& msg) {
    return ValidationError(path + ": line " + std::to_string(line_no) + ": " + msg);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (in.bad()) throw IoError("read failure: " + path);
    // A trailing newline produces no extra line; drop genuinely empty tail lines.
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failure: " + path);
}

constexpr double kTimeTolerance = 1e-9;

}  // namespace

void TimeSeries::validate() const {
    if (samples.size() < 2) throw ValidationError("series needs at least 2 samples");
    if (!(dt > 0.0)) throw ValidationError("series dt must be > 0");
    if (!(split > 0 && split < samples.size()))
        throw ValidationError("split must satisfy 0 < split < series length, got " +
                              std::to_string(split));
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const AtmosphericSample& s = samples[k];
        if (!(s.rh >= 0.0 && s.rh <= 100.0))
            throw ValidationError("sample " + std::to_string(k) + ": rh out of range [0, 100]");
        if (!(s.temp > 0.0))
            throw ValidationError("sample " + std::to_string(k) + ": temp must be > 0 K");
        if (s.has_obs() && !(s.obs >= 0.0))
            throw ValidationError("sample " + std::to_string(k) + ": obs must be >= 0");
        if (k > 0 && std::abs(samples[k].time - samples[k - 1].time - dt) > kTimeTolerance)
            throw ValidationError("sample " + std::to_string(k) + ": non-uniform time spacing");
    }
}

std::pair<SeriesView, SeriesView> split(const TimeSeries& ts) {
    ts.validate();
    return {SeriesView(ts, 0, ts.split, /*expose_obs=*/true),
            SeriesView(ts, ts.split, ts.size(), /*expose_obs=*/false)};
}

void SynthConfig::validate() const {
    if (n_steps < 2) throw ValidationError("n_steps must be >= 2");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    if (!(obs_sigma >= 0.0)) throw ValidationError("obs_sigma must be >= 0");
    if (!(m0 >= 0.0)) throw ValidationError("m0 must be >= 0");
    if (!(period > 0.0)) throw ValidationError("period must be > 0");
    if (!(rh_mean - std::abs(rh_amp) >= 0.0 && rh_mean + std::abs(rh_amp) <= 100.0))
        throw ValidationError("rh_mean/rh_amp must keep rh within [0, 100]");
    if (!(temp_mean - std::abs(temp_amp) > 0.0))
        throw ValidationError("temp_mean/temp_amp must keep temp > 0 K");
    if (!(split > 0 && split < n_steps))
        throw ValidationError("split must satisfy 0 < split < n_steps");
    if (!std::isfinite(true_dE)) throw ValidationError("true_dE must be finite");
    if (anomaly) {
        if (!(anomaly->end >= anomaly->start))
            throw ValidationError("anomaly end must be >= anomaly start");
        if (!std::isfinite(anomaly->rh_offset))
            throw ValidationError("anomaly rh_offset must be finite");
    }
}

SynthResult synth(const SynthConfig& cfg, const ModelConfig& model) {
    cfg.validate();
    if (!(model.time_lag > 0.0)) throw ValidationError("time_lag must be > 0");

    SynthResult out;
    out.series.dt = cfg.dt;
    out.series.split = cfg.split;
    out.series.samples.resize(cfg.n_steps);
    out.truth_features.resize(cfg.n_steps);

    const ModelConfig truth_model{model.time_lag, cfg.dt};
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const double phase = std::sin(2.0 * std::numbers::pi * t / cfg.period);
        const double rh_raw = cfg.rh_mean + cfg.rh_amp * phase;
        const double temp = cfg.temp_mean - cfg.temp_amp * phase;  // opposite phase
        double rh_truth_raw = rh_raw;
        if (cfg.anomaly && t >= cfg.anomaly->start && t < cfg.anomaly->end)
            rh_truth_raw += cfg.anomaly->rh_offset;
        AtmosphericSample& s = out.series.samples[k];
        s.time = t;
        s.temp = temp;
        s.rh = std::clamp(rh_raw, 0.0, 100.0);
        out.truth_features[k] = equilibria(temp, std::clamp(rh_truth_raw, 0.0, 100.0));
    }

    const std::vector<Equilibria> drive(out.truth_features.begin(),
                                        out.truth_features.end() - 1);
    out.truth = simulate(cfg.m0, cfg.true_dE, drive, truth_model);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.obs_sigma > 0.0 ? cfg.obs_sigma : 1.0);
    for (std::size_t k = 0; k < cfg.split; ++k) {
        const double draw = cfg.obs_sigma > 0.0 ? noise(rng) : 0.0;
        out.series.samples[k].obs = std::max(out.truth[k] + draw, 0.0);
    }
    out.series.validate();
    return out;
}

std::vector<Equilibria> features(const TimeSeries& ts) {
    std::vector<Equilibria> eqs;
    eqs.reserve(ts.size());
    for (const AtmosphericSample& s : ts.samples) eqs.push_back(equilibria(s.temp, s.rh));
    return eqs;
}

// --- JSON scenario configs --------------------------------------------------

namespace {

double require_number(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) throw ValidationError("config field '" + key + "' must be a number");
    return j.get<double>();
}

std::size_t require_index(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number_unsigned())
        throw ValidationError("config field '" + key + "' must be a non-negative integer");
    return j.get<std::size_t>();
}

}  // namespace

SynthConfig synth_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("scenario config must be a JSON object");
    SynthConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "n_steps") cfg.n_steps = require_index(value, key);
        else if (key == "dt") cfg.dt = require_number(value, key);
        else if (key == "true_de" || key == "true_dE") cfg.true_dE = require_number(value, key);
        else if (key == "obs_sigma") cfg.obs_sigma = require_number(value, key);
        else if (key == "m0") cfg.m0 = require_number(value, key);
        else if (key == "rh_mean") cfg.rh_mean = require_number(value, key);
        else if (key == "rh_amp") cfg.rh_amp = require_number(value, key);
        else if (key == "temp_mean") cfg.temp_mean = require_number(value, key);
        else if (key == "temp_amp") cfg.temp_amp = require_number(value, key);
        else if (key == "period") cfg.period = require_number(value, key);
        else if (key == "seed") {
            if (!value.is_number_unsigned())
                throw ValidationError("config field 'seed' must be a non-negative integer");
            cfg.seed = value.get<std::uint64_t>();
        } else if (key == "split") cfg.split = require_index(value, key);
        else if (key == "anomaly") {
            if (value.is_null()) {
                cfg.anomaly.reset();
            } else if (value.is_object()) {
                AnomalyConfig a;
                for (const auto& [akey, avalue] : value.items()) {
                    if (akey == "start") a.start = require_number(avalue, "anomaly.start");
                    else if (akey == "end") a.end = require_number(avalue, "anomaly.end");
                    else if (akey == "rh_offset")
                        a.rh_offset = require_number(avalue, "anomaly.rh_offset");
                    else throw ValidationError("unknown config field 'anomaly." + akey + "'");
                }
                cfg.anomaly = a;
            } else {
                throw ValidationError("config field 'anomaly' must be an object or null");
            }
        } else {
            throw ValidationError("unknown config field '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
    nlohmann::json j{{"n_steps", cfg.n_steps},
                     {"dt", cfg.dt},
                     {"true_de", cfg.true_dE},
                     {"obs_sigma", cfg.obs_sigma},
                     {"m0", cfg.m0},
                     {"rh_mean", cfg.rh_mean},
                     {"rh_amp", cfg.rh_amp},
                     {"temp_mean", cfg.temp_mean},
                     {"temp_amp", cfg.temp_amp},
                     {"period", cfg.period},
                     {"seed", cfg.seed},
                     {"split", cfg.split}};
    if (cfg.anomaly)
        j["anomaly"] = {{"start", cfg.anomaly->start},
                        {"end", cfg.anomaly->end},
                        {"rh_offset", cfg.anomaly->rh_offset}};
    else
        j["anomaly"] = nullptr;
    return j;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return synth_config_from_json(j);
}

// --- CSV formats ------------------------------------------------------------

namespace {
const std::string kSeriesHeader = "time_hours,temp_k,rh_pct,fmc_pct";
const std::string kTruthHeader = "time_hours,fmc_true_pct";
}  // namespace

TimeSeries load_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw ValidationError(path + ": empty file");
    if (lines[0] != kSeriesHeader)
        throw line_error(path, 1, "expected header '" + kSeriesHeader + "'");
    if (lines.size() < 3) throw ValidationError(path + ": needs at least 2 data rows");

    TimeSeries ts;
    ts.samples.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const std::vector<std::string> fields = split_fields(lines[i]);
        if (fields.size() != 4)
            throw line_error(path, line_no, "expected 4 comma-separated columns");
        AtmosphericSample s;
        if (!parse_double(fields[0], s.time))
            throw line_error(path, line_no, "unparsable time_hours '" + fields[0] + "'");
        if (!parse_double(fields[1], s.temp))
            throw line_error(path, line_no, "unparsable temp_k '" + fields[1] + "'");
        if (!parse_double(fields[2], s.rh))
            throw line_error(path, line_no, "unparsable rh_pct '" + fields[2] + "'");
        if (!(s.rh >= 0.0 && s.rh <= 100.0))
            throw line_error(path, line_no, "rh_pct out of range [0, 100]");
        if (!(s.temp > 0.0)) throw line_error(path, line_no, "temp_k must be > 0");
        if (!fields[3].empty()) {
            if (!parse_double(fields[3], s.obs))
                throw line_error(path, line_no, "unparsable fmc_pct '" + fields[3] + "'");
            if (!std::isfinite(s.obs)) throw line_error(path, line_no, "fmc_pct must be finite");
            if (!(s.obs >= 0.0)) throw line_error(path, line_no, "fmc_pct must be >= 0");
        }
        ts.samples.push_back(s);
    }

    ts.dt = ts.samples[1].time - ts.samples[0].time;
    if (!(ts.dt > 0.0)) throw line_error(path, 3, "time_hours must increase");
    for (std::size_t k = 1; k < ts.samples.size(); ++k) {
        if (std::abs(ts.samples[k].time - ts.samples[k - 1].time - ts.dt) > kTimeTolerance)
            throw line_error(path, k + 2, "non-uniform time spacing");
    }

    // Split inference: one past the last observed row; a fully observed file
    // falls back to 2n/3 and an unobserved one to 1.
    std::size_t last_obs = ts.samples.size();
    for (std::size_t k = ts.samples.size(); k-- > 0;) {
        if (ts.samples[k].has_obs()) {
            last_obs = k;
            break;
        }
    }
    if (last_obs == ts.samples.size()) {
        ts.split = 1;
    } else if (last_obs + 1 >= ts.samples.size()) {
        ts.split = std::max<std::size_t>(2 * ts.samples.size() / 3, 1);
    } else {
        ts.split = last_obs + 1;
    }
    ts.validate();
    return ts;
}

void save_csv(const TimeSeries& ts, const std::string& path) {
    ts.validate();
    std::string out = kSeriesHeader + "\n";
    for (const AtmosphericSample& s : ts.samples) {
        out += format_double(s.time);
        out += ',';
        out += format_double(s.temp);
        out += ',';
        out += format_double(s.rh);
        out += ',';
        if (s.has_obs()) out += format_double(s.obs);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<double> load_truth_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw ValidationError(path + ": empty file");
    if (lines[0] != kTruthHeader)
        throw line_error(path, 1, "expected header '" + kTruthHeader + "'");
    std::vector<double> truth;
    truth.reserve(lines.size() - 1);
    double prev_time = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const std::vector<std::string> fields = split_fields(lines[i]);
        if (fields.size() != 2)
            throw line_error(path, line_no, "expected 2 comma-separated columns");
        double t = kNaN, v = kNaN;
        if (!parse_double(fields[0], t))
            throw line_error(path, line_no, "unparsable time_hours '" + fields[0] + "'");
        if (!parse_double(fields[1], v))
            throw line_error(path, line_no, "unparsable fmc_true_pct '" + fields[1] + "'");
        if (!(t > prev_time)) throw line_error(path, line_no, "time_hours must increase");
        prev_time = t;
        truth.push_back(v);
    }
    return truth;
}

void save_truth_csv(const std::vector<double>& time_hours, const std::vector<double>& truth,
                    const std::string& path) {
    if (time_hours.size() != truth.size())
        throw ValidationError("truth and time vectors must have equal length");
    std::string out = kTruthHeader + "\n";
    for (std::size_t k = 0; k < truth.size(); ++k) {
        out += format_double(time_hours[k]);
        out += ',';
        out += format_double(truth[k]);
        out += '\n';
    }
    write_file(path, out);
}

}  // namespace fmda
