#include "fmda/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace fmda {

namespace {

bool all_finite(const RnnWeights& w) {
    return w.w_in.allFinite() && w.w_hid.allFinite() && w.b_hid.allFinite() &&
           w.w_out.allFinite() && std::isfinite(w.b_out) && std::isfinite(w.dt);
}

Eigen::Vector2d as_vector(const Equilibria& eq) { return {eq.ed, eq.ew}; }

}  // namespace

void RnnWeights::validate() const {
    const Eigen::Index h = b_hid.size();
    if (h < 1) throw ValidationError("hidden width must be >= 1");
    if (w_in.rows() != h || w_in.cols() != 2 || w_hid.rows() != h || w_hid.cols() != h ||
        w_out.cols() != h)
        throw ValidationError("inconsistent weight dimensions");
    if (!all_finite(*this)) throw ValidationError("weights must be finite");
    if (!(dt > 0.0)) throw ValidationError("weights dt must be > 0");
}

void TrainConfig::validate() const {
    if (window < 1) throw ValidationError("window must be >= 1");
    // lr = 0 is the documented no-op training mode (weights unchanged).
    if (!(lr >= 0.0)) throw ValidationError("lr must be >= 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
}

RnnWeights init_euler(int h, const ModelConfig& cfg, InitMode mode,
                      const std::vector<double>& timescales) {
    cfg.validate();
    if (h < 1) throw ValidationError("hidden width must be >= 1");
    std::vector<double> lags;
    if (mode == InitMode::Identical) {
        lags.assign(static_cast<std::size_t>(h), cfg.time_lag);
    } else {
        if (timescales.size() != static_cast<std::size_t>(h))
            throw ValidationError("timescales must list exactly one time constant per hidden unit");
        lags = timescales;
    }
    for (double t : lags)
        if (!(t > 0.0)) throw ValidationError("timescales must be > 0");

    RnnWeights w;
    w.w_in = Eigen::MatrixXd::Zero(h, 2);
    w.w_hid = Eigen::MatrixXd::Zero(h, h);
    w.b_hid = Eigen::VectorXd::Zero(h);
    w.w_out = Eigen::RowVectorXd::Constant(h, 1.0 / h);
    w.b_out = 0.0;
    w.dt = cfg.dt;
    for (int i = 0; i < h; ++i) {
        const double a = std::exp(-cfg.dt / lags[static_cast<std::size_t>(i)]);
        w.w_hid(i, i) = a;
        w.w_in(i, 0) = 0.5 * (1.0 - a);
        w.w_in(i, 1) = 0.5 * (1.0 - a);
    }
    return w;
}

std::pair<Eigen::VectorXd, double> forward(const RnnWeights& w, const Eigen::VectorXd& hidden,
                                           const Equilibria& input) {
    if (hidden.size() != w.hidden()) throw ValidationError("hidden state size mismatch");
    Eigen::VectorXd next = w.w_hid * hidden + w.w_in * as_vector(input) + w.b_hid;
    const double output = w.w_out.dot(next) + w.b_out;
    return {std::move(next), output};
}

std::vector<double> evaluate_sequence(const RnnWeights& w, const Eigen::VectorXd& h0,
                                      const std::vector<Equilibria>& inputs) {
    w.validate();
    if (h0.size() != w.hidden()) throw ValidationError("hidden state size mismatch");
    std::vector<double> out;
    out.reserve(inputs.size());
    Eigen::VectorXd hidden = h0;
    for (const Equilibria& eq : inputs) {
        hidden = (w.w_hid * hidden + w.w_in * as_vector(eq) + w.b_hid).eval();
        out.push_back(w.w_out.dot(hidden) + w.b_out);
    }
    return out;
}

Gradients bptt_gradient(const RnnWeights& w, const Eigen::VectorXd& h0,
                        const std::vector<Equilibria>& window, double target) {
    w.validate();
    if (window.empty()) throw ValidationError("window must be non-empty");
    if (h0.size() != w.hidden()) throw ValidationError("hidden state size mismatch");

    const std::size_t s = window.size();
    std::vector<Eigen::VectorXd> states;
    states.reserve(s + 1);
    states.push_back(h0);
    for (const Equilibria& eq : window)
        states.push_back(w.w_hid * states.back() + w.w_in * as_vector(eq) + w.b_hid);
    const double y = w.w_out.dot(states.back()) + w.b_out;
    const double g = 2.0 * (y - target);

    Gradients grad;
    grad.loss = (y - target) * (y - target);
    grad.d_w_out = g * states.back().transpose();
    grad.d_b_out = g;
    grad.d_w_in = Eigen::MatrixXd::Zero(w.w_in.rows(), 2);
    grad.d_w_hid = Eigen::MatrixXd::Zero(w.w_hid.rows(), w.w_hid.cols());
    grad.d_b_hid = Eigen::VectorXd::Zero(w.b_hid.size());

    // delta_t = d(loss)/d(hidden_t); truncation makes h0 a constant.
    Eigen::VectorXd delta = g * w.w_out.transpose();
    for (std::size_t t = s; t >= 1; --t) {
        grad.d_b_hid += delta;
        grad.d_w_in += delta * as_vector(window[t - 1]).transpose();
        grad.d_w_hid += delta * states[t - 1].transpose();
        delta = (w.w_hid.transpose() * delta).eval();
    }
    return grad;
}

TrainResult train(const RnnWeights& w0, const std::vector<Equilibria>& features,
                  const std::vector<double>& targets, const TrainConfig& tcfg,
                  const ModelConfig& cfg) {
    w0.validate();
    tcfg.validate();
    cfg.validate();
    if (std::abs(cfg.dt - w0.dt) > 1e-9 * std::max(1.0, std::abs(w0.dt)))
        throw ValidationError("cfg.dt does not match the timestep the weights were built for");
    if (features.size() != targets.size())
        throw ValidationError("features and targets must have equal length");
    const std::size_t n = features.size();
    const std::size_t s = static_cast<std::size_t>(tcfg.window);
    if (n < s) throw ValidationError("series shorter than the training window");

    bool any_target = false;
    for (std::size_t j = 0; j + s <= n; ++j)
        if (std::isfinite(targets[j + s - 1])) any_target = true;
    if (!any_target) throw ValidationError("no training window has a present target");

    // h0: the first present target (the first observation the training range
    // sees); fallback is the mean equilibrium at step 0.
    double h0_value = 0.5 * (features[0].ed + features[0].ew);
    for (double t : targets) {
        if (std::isfinite(t)) {
            h0_value = t;
            break;
        }
    }
    const Eigen::VectorXd h0 = Eigen::VectorXd::Constant(w0.hidden(), h0_value);

    TrainResult result{w0, {}};
    result.loss_history.reserve(static_cast<std::size_t>(tcfg.epochs));
    RnnWeights& w = result.weights;
    std::vector<Equilibria> window(s);

    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        Eigen::VectorXd hidden = h0;
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t j = 0; j + s <= n; ++j) {
            const double target = targets[j + s - 1];
            // The carried state is this window's first forward step, computed
            // with the window's pre-update weights.
            Eigen::VectorXd next =
                w.w_hid * hidden + w.w_in * as_vector(features[j]) + w.b_hid;
            if (std::isfinite(target)) {
                std::copy(features.begin() + static_cast<std::ptrdiff_t>(j),
                          features.begin() + static_cast<std::ptrdiff_t>(j + s), window.begin());
                const Gradients grad = bptt_gradient(w, hidden, window, target);
                w.w_in -= tcfg.lr * grad.d_w_in;
                w.w_hid -= tcfg.lr * grad.d_w_hid;
                w.b_hid -= tcfg.lr * grad.d_b_hid;
                w.w_out -= tcfg.lr * grad.d_w_out;
                w.b_out -= tcfg.lr * grad.d_b_out;
                total += grad.loss;
                ++count;
            }
            hidden = std::move(next);
        }
        result.loss_history.push_back(count > 0 ? total / static_cast<double>(count) : 0.0);
    }
    return result;
}

void save_weights_json(const RnnWeights& w, const std::string& path) {
    w.validate();
    const auto flatten = [](const Eigen::MatrixXd& m) {
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
        return v;
    };
    nlohmann::json j{{"h", w.hidden()},
                     {"dt", w.dt},
                     {"w_in", flatten(w.w_in)},
                     {"w_hid", flatten(w.w_hid)},
                     {"b_hid", std::vector<double>(w.b_hid.begin(), w.b_hid.end())},
                     {"w_out", std::vector<double>(w.w_out.begin(), w.w_out.end())},
                     {"b_out", w.b_out}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failure: " + path);
}

RnnWeights load_weights_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    const auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key))
            throw ValidationError(path + ": missing weight field '" + std::string(key) + "'");
        return j.at(key);
    };
    const auto as_values = [&](const char* key, std::size_t expected) {
        const nlohmann::json& field = require(key);
        if (!field.is_array() || field.size() != expected)
            throw ValidationError(path + ": field '" + std::string(key) + "' must be an array of " +
                                  std::to_string(expected) + " numbers");
        std::vector<double> v;
        v.reserve(expected);
        for (const auto& x : field) {
            if (!x.is_number())
                throw ValidationError(path + ": field '" + std::string(key) +
                                      "' must contain only numbers");
            v.push_back(x.get<double>());
        }
        return v;
    };

    if (!require("h").is_number_integer() || j["h"].get<long long>() < 1)
        throw ValidationError(path + ": field 'h' must be a positive integer");
    const auto h = static_cast<Eigen::Index>(j["h"].get<long long>());
    const auto hu = static_cast<std::size_t>(h);

    RnnWeights w;
    if (!require("dt").is_number())
        throw ValidationError(path + ": field 'dt' must be a number");
    if (!require("b_out").is_number())
        throw ValidationError(path + ": field 'b_out' must be a number");
    w.dt = j["dt"].get<double>();
    w.b_out = j["b_out"].get<double>();
    const std::vector<double> win = as_values("w_in", hu * 2);
    const std::vector<double> whid = as_values("w_hid", hu * hu);
    const std::vector<double> bhid = as_values("b_hid", hu);
    const std::vector<double> wout = as_values("w_out", hu);
    w.w_in.resize(h, 2);
    w.w_hid.resize(h, h);
    w.b_hid.resize(h);
    w.w_out.resize(h);
    for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index c = 0; c < 2; ++c)
            w.w_in(i, c) = win[static_cast<std::size_t>(i * 2 + c)];
    for (Eigen::Index i = 0; i < h; ++i)
        for (Eigen::Index c = 0; c < h; ++c)
            w.w_hid(i, c) = whid[static_cast<std::size_t>(i * h + c)];
    for (Eigen::Index i = 0; i < h; ++i) {
        w.b_hid(i) = bhid[static_cast<std::size_t>(i)];
        w.w_out(i) = wout[static_cast<std::size_t>(i)];
    }
    w.validate();
    return w;
}

}  // namespace fmda
