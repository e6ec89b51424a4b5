#include "fmda/moisture.hpp"

#include <cmath>
#include <string>

namespace fmda {

void ModelConfig::validate() const {
    if (!(time_lag > 0.0)) throw ValidationError("time_lag must be > 0");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
}

Equilibria equilibria(double temp_k, double rh_pct) {
    if (!(rh_pct >= 0.0 && rh_pct <= 100.0))
        throw ValidationError("rh out of range [0, 100]: " + std::to_string(rh_pct));
    if (!(temp_k > 0.0))
        throw ValidationError("temp must be > 0 K: " + std::to_string(temp_k));
    const double temp_term =
        0.18 * (21.1 + 273.15 - temp_k) * (1.0 - std::exp(-0.115 * rh_pct));
    const double ed =
        0.924 * std::pow(rh_pct, 0.679) + 0.000499 * std::exp(0.1 * rh_pct) + temp_term;
    const double ew =
        0.618 * std::pow(rh_pct, 0.753) + 0.000454 * std::exp(0.1 * rh_pct) + temp_term;
    // Hot, dry air can push the shared temperature term negative; clamp, since
    // an equilibrium moisture content cannot be.
    return {std::max(ed, 0.0), std::max(ew, 0.0)};
}

Regime select_regime(double m, const Equilibria& eq, double dE) {
    if (m > eq.ed + dE) return Regime::Drying;
    if (m < eq.ew + dE) return Regime::Wetting;
    return Regime::Dead;
}

double step(double m, double dE, const Equilibria& eq, const ModelConfig& cfg) {
    cfg.validate();
    switch (select_regime(m, eq, dE)) {
        case Regime::Dead:
            return m;
        case Regime::Drying: {
            const double target = eq.ed + dE;
            return target + (m - target) * std::exp(-cfg.dt / cfg.time_lag);
        }
        case Regime::Wetting: {
            const double target = eq.ew + dE;
            return target + (m - target) * std::exp(-cfg.dt / cfg.time_lag);
        }
    }
    return m;  // unreachable
}

std::vector<double> simulate(double m0, double dE, const std::vector<Equilibria>& eqs,
                             const ModelConfig& cfg) {
    cfg.validate();
    if (eqs.empty()) throw ValidationError("simulate requires a non-empty equilibrium sequence");
    std::vector<double> out;
    out.reserve(eqs.size() + 1);
    out.push_back(m0);
    for (const Equilibria& eq : eqs) out.push_back(step(out.back(), dE, eq, cfg));
    return out;
}

}  // namespace fmda
