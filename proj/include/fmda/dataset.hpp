#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fmda/errors.hpp"
#include "fmda/moisture.hpp"

namespace fmda {

// One timestamped weather record, plus an optional moisture observation
// (NaN marks an absent observation).
struct AtmosphericSample {
    double time = 0.0;  // hours since series start
    double temp = 0.0;  // kelvin
    double rh = 0.0;    // percent in [0, 100]
    double obs = std::numeric_limits<double>::quiet_NaN();  // FMC percent

    bool has_obs() const { return obs == obs; }
};

// Ordered, uniformly spaced samples with a learning/forecast split index:
// learning phase is [0, split), forecast phase is [split, size()).
struct TimeSeries {
    std::vector<AtmosphericSample> samples;
    double dt = 1.0;
    std::size_t split = 1;

    std::size_t size() const { return samples.size(); }
    void validate() const;
};

// Read-only window [begin, end) of a series. The forecast-phase view hides
// observations: held-out values stay in the underlying series for scoring but
// are never surfaced through the view.
class SeriesView {
public:
    SeriesView(const TimeSeries& ts, std::size_t begin, std::size_t end, bool expose_obs)
        : ts_(&ts), begin_(begin), end_(end), expose_obs_(expose_obs) {}

    std::size_t size() const { return end_ - begin_; }
    const AtmosphericSample& sample(std::size_t i) const { return ts_->samples[begin_ + i]; }
    // NaN when the observation is absent or held out.
    double obs(std::size_t i) const {
        return expose_obs_ ? sample(i).obs : std::numeric_limits<double>::quiet_NaN();
    }

private:
    const TimeSeries* ts_;
    std::size_t begin_, end_;
    bool expose_obs_;
};

// (learning range, forecast range); the forecast view exposes no observations.
std::pair<SeriesView, SeriesView> split(const TimeSeries& ts);

// Relative-humidity anomaly window [start, end) in hours, applied only to the
// weather that drives the truth trajectory — the emitted series keeps the base
// weather, which is what creates the model/data mismatch regime.
struct AnomalyConfig {
    double start = 300.0;
    double end = 600.0;
    double rh_offset = 20.0;
};

// Synthetic scenario configuration. The defaults are the repository's
// canonical mismatch benchmark; set anomaly to nullopt for the plain
// identification scenario.
struct SynthConfig {
    std::size_t n_steps = 1000;
    double dt = 1.0;          // hours between samples (also the integration step)
    double true_dE = 1.0;     // equilibrium correction baked into the truth
    double obs_sigma = 0.3;   // observation noise std. dev., percent
    double m0 = 12.0;         // initial moisture, percent
    double rh_mean = 40.0, rh_amp = 25.0;     // percent
    double temp_mean = 295.0, temp_amp = 8.0; // kelvin, opposite phase to rh
    double period = 24.0;     // hours
    std::uint64_t seed = 0;
    std::size_t split = 667;
    std::optional<AnomalyConfig> anomaly = AnomalyConfig{};

    void validate() const;
};

// Observable series plus the full truth used for scoring. truth_features are
// the equilibria that actually drove the truth integration; they differ from
// features(series) only inside an anomaly window.
struct SynthResult {
    TimeSeries series;
    std::vector<double> truth;
    std::vector<Equilibria> truth_features;
};

// Generate a synthetic scenario: sinusoidal weather, truth integrated with the
// time-lag model at cfg.true_dE, noisy observations on the learning range
// only. model.time_lag drives the truth; the series spacing is cfg.dt.
SynthResult synth(const SynthConfig& cfg, const ModelConfig& model);

// Element-wise equilibria over the full series.
std::vector<Equilibria> features(const TimeSeries& ts);

// --- JSON scenario configs (snake_case keys mirroring SynthConfig) ---------
SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig load_synth_config(const std::string& path);

// --- CSV formats ------------------------------------------------------------
// Series files: header `time_hours,temp_k,rh_pct,fmc_pct`; an empty fmc_pct
// cell is an absent observation. Truth files: `time_hours,fmc_true_pct`.
// Numbers are written in shortest round-trip form (value-stable reload).

// Load a series; the split index is inferred as (last observed index + 1),
// falling back to 2n/3 when every row is observed and 1 when none is.
TimeSeries load_csv(const std::string& path);
void save_csv(const TimeSeries& ts, const std::string& path);

std::vector<double> load_truth_csv(const std::string& path);
void save_truth_csv(const std::vector<double>& time_hours, const std::vector<double>& truth,
                    const std::string& path);

}  // namespace fmda
