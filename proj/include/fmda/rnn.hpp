#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fmda/errors.hpp"
#include "fmda/moisture.hpp"

namespace fmda {

// Linear recurrent network over equilibrium features:
//   hidden' = w_hid * hidden + w_in * (ed, ew) + b_hid
//   output  = w_out * hidden' + b_out
// Weights carry the timestep they were initialized for.
struct RnnWeights {
    Eigen::MatrixXd w_in;      // h x 2
    Eigen::MatrixXd w_hid;     // h x h
    Eigen::VectorXd b_hid;     // h
    Eigen::RowVectorXd w_out;  // 1 x h
    double b_out = 0.0;
    double dt = 1.0;

    Eigen::Index hidden() const { return b_hid.size(); }
    void validate() const;
};

// Identical: every unit gets the same time constant (the model's time_lag).
// MultiTimescale: one time constant per unit, breaking the permanent gradient
// symmetry of identically initialized linear units.
enum class InitMode { Identical, MultiTimescale };

struct TrainConfig {
    int window = 5;       // timesteps per training sample
    double lr = 1e-5;     // plain SGD; stable for features in physical percent units
    int epochs = 500;
    std::uint64_t seed = 0;  // echoed in reports; time-ordered SGD draws no randomness
    InitMode init_mode = InitMode::MultiTimescale;
    std::vector<double> timescales = {1.0, 2.0, 5.0, 10.0, 24.0, 48.0};  // hours

    void validate() const;
};

// Gradient of the squared error at a window's final output with respect to
// every weight field, plus that squared error itself.
struct Gradients {
    Eigen::MatrixXd d_w_in;
    Eigen::MatrixXd d_w_hid;
    Eigen::VectorXd d_b_hid;
    Eigen::RowVectorXd d_w_out;
    double d_b_out = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    RnnWeights weights;
    std::vector<double> loss_history;  // per-epoch mean over windows with a target
};

// Euler-equivalent initialization: unit i with time constant T_i computes the
// exact relaxation step m' = a*m + (1-a)*E with a = exp(-dt/T_i) and E the
// mean of (ed, ew); w_hid = diag(a_i), w_in row i = (1-a_i)*(1/2, 1/2),
// b_hid = 0, w_out = (1/h, ..., 1/h), b_out = 0.
RnnWeights init_euler(int h, const ModelConfig& cfg, InitMode mode,
                      const std::vector<double>& timescales);

// One recurrence application; returns (hidden', output).
std::pair<Eigen::VectorXd, double> forward(const RnnWeights& w, const Eigen::VectorXd& hidden,
                                           const Equilibria& input);

// Stateless full-sequence evaluation: iterated forward from h0, one output per
// input, no weight mutation.
std::vector<double> evaluate_sequence(const RnnWeights& w, const Eigen::VectorXd& h0,
                                      const std::vector<Equilibria>& inputs);

// Exact backpropagation through one window, truncated at the window boundary
// (h0 treated as constant). Loss is (output at the final step - target)^2.
Gradients bptt_gradient(const RnnWeights& w, const Eigen::VectorXd& h0,
                        const std::vector<Equilibria>& window, double target);

// Truncated-BPTT SGD over consecutive stride-1 windows in time order.
// Stateful: the hidden state advances by one step per window and carries
// across windows within an epoch (computed with that window's pre-update
// weights), resetting to h0 at each epoch start. Windows whose final target
// is absent (NaN) contribute no update but still advance the hidden state.
// h0 is filled with the first present target (fallback: mean equilibrium at
// step 0). Requires features.size() == targets.size(), at least one window
// with a present target, and cfg.dt equal to the timestep the weights were
// initialized for.
TrainResult train(const RnnWeights& w0, const std::vector<Equilibria>& features,
                  const std::vector<double>& targets, const TrainConfig& tcfg,
                  const ModelConfig& cfg);

// Weight files: JSON {h, dt, w_in, w_hid, b_hid, w_out, b_out} with flat
// row-major arrays, numbers in shortest round-trip form.
void save_weights_json(const RnnWeights& w, const std::string& path);
RnnWeights load_weights_json(const std::string& path);

}  // namespace fmda
