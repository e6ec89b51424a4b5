#pragma once

#include <vector>

#include "fmda/errors.hpp"

namespace fmda {

// Drying/wetting equilibrium moisture contents in percent of dry mass.
// ew <= ed everywhere except the degenerate synthetic case ew == ed.
struct Equilibria {
    double ed = 0.0;
    double ew = 0.0;
};

// Time-lag model parameters: characteristic time constant and timestep, hours.
struct ModelConfig {
    double time_lag = 10.0;
    double dt = 1.0;

    void validate() const;
};

enum class Regime { Drying, Wetting, Dead };

// Equilibria from air temperature (kelvin) and relative humidity (percent).
// Negative values from the temperature term are clamped to zero.
Equilibria equilibria(double temp_k, double rh_pct);

// Regime at the interval start. The dead zone is the closed interval
// [ew + dE, ed + dE]; both boundary points count as Dead.
Regime select_regime(double m, const Equilibria& eq, double dE);

// One exact integration step of dm/dt = (E - m)/T with the regime frozen over
// the interval: m' = E + (m - E) * exp(-dt/T), where E is the active
// equilibrium plus dE. Identity in the dead zone.
double step(double m, double dE, const Equilibria& eq, const ModelConfig& cfg);

// Iterated step. Output length is eqs.size() + 1; element 0 is m0 and element
// k+1 is step(element k, dE, eqs[k], cfg). Empty eqs is an error.
std::vector<double> simulate(double m0, double dE, const std::vector<Equilibria>& eqs,
                             const ModelConfig& cfg);

}  // namespace fmda
