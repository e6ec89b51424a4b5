#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fmda/dataset.hpp"
#include "fmda/kalman.hpp"
#include "fmda/moisture.hpp"
#include "fmda/pipeline.hpp"
#include "fmda/rnn.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fuel-moisture toolkit: time-lag model, EKF assimilation, RNN training";

    py::register_exception<fmda::ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<fmda::IoError>(m, "IoError", PyExc_IOError);

    // --- moisture model -----------------------------------------------------
    py::class_<fmda::Equilibria>(m, "Equilibria")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("ed"), py::arg("ew"))
        .def_readwrite("ed", &fmda::Equilibria::ed)
        .def_readwrite("ew", &fmda::Equilibria::ew)
        .def("__repr__", [](const fmda::Equilibria& e) {
            return "Equilibria(ed=" + std::to_string(e.ed) + ", ew=" + std::to_string(e.ew) + ")";
        });

    py::class_<fmda::ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("time_lag"), py::arg("dt"))
        .def_readwrite("time_lag", &fmda::ModelConfig::time_lag)
        .def_readwrite("dt", &fmda::ModelConfig::dt);

    py::enum_<fmda::Regime>(m, "Regime")
        .value("Drying", fmda::Regime::Drying)
        .value("Wetting", fmda::Regime::Wetting)
        .value("Dead", fmda::Regime::Dead);

    m.def("equilibria", &fmda::equilibria, py::arg("temp_k"), py::arg("rh_pct"));
    m.def("select_regime", &fmda::select_regime, py::arg("m"), py::arg("eq"), py::arg("dE"));
    m.def("step", &fmda::step, py::arg("m"), py::arg("dE"), py::arg("eq"), py::arg("cfg"));
    m.def("simulate", &fmda::simulate, py::arg("m0"), py::arg("dE"), py::arg("eqs"),
          py::arg("cfg"));

    // --- dataset ------------------------------------------------------------
    py::class_<fmda::AtmosphericSample>(m, "AtmosphericSample")
        .def(py::init<>())
        .def_readwrite("time", &fmda::AtmosphericSample::time)
        .def_readwrite("temp", &fmda::AtmosphericSample::temp)
        .def_readwrite("rh", &fmda::AtmosphericSample::rh)
        .def_readwrite("obs", &fmda::AtmosphericSample::obs)
        .def("has_obs", &fmda::AtmosphericSample::has_obs);

    py::class_<fmda::TimeSeries>(m, "TimeSeries")
        .def(py::init<>())
        .def_readwrite("samples", &fmda::TimeSeries::samples)
        .def_readwrite("dt", &fmda::TimeSeries::dt)
        .def_readwrite("split", &fmda::TimeSeries::split)
        .def("__len__", &fmda::TimeSeries::size)
        .def("validate", &fmda::TimeSeries::validate);

    py::class_<fmda::AnomalyConfig>(m, "AnomalyConfig")
        .def(py::init<>())
        .def(py::init<double, double, double>(), py::arg("start"), py::arg("end"),
             py::arg("rh_offset"))
        .def_readwrite("start", &fmda::AnomalyConfig::start)
        .def_readwrite("end", &fmda::AnomalyConfig::end)
        .def_readwrite("rh_offset", &fmda::AnomalyConfig::rh_offset);

    py::class_<fmda::SynthConfig>(m, "SynthConfig")
        .def(py::init<>())
        .def_readwrite("n_steps", &fmda::SynthConfig::n_steps)
        .def_readwrite("dt", &fmda::SynthConfig::dt)
        .def_readwrite("true_dE", &fmda::SynthConfig::true_dE)
        .def_readwrite("obs_sigma", &fmda::SynthConfig::obs_sigma)
        .def_readwrite("m0", &fmda::SynthConfig::m0)
        .def_readwrite("rh_mean", &fmda::SynthConfig::rh_mean)
        .def_readwrite("rh_amp", &fmda::SynthConfig::rh_amp)
        .def_readwrite("temp_mean", &fmda::SynthConfig::temp_mean)
        .def_readwrite("temp_amp", &fmda::SynthConfig::temp_amp)
        .def_readwrite("period", &fmda::SynthConfig::period)
        .def_readwrite("seed", &fmda::SynthConfig::seed)
        .def_readwrite("split", &fmda::SynthConfig::split)
        .def_readwrite("anomaly", &fmda::SynthConfig::anomaly);

    py::class_<fmda::SynthResult>(m, "SynthResult")
        .def_readonly("series", &fmda::SynthResult::series)
        .def_readonly("truth", &fmda::SynthResult::truth)
        .def_readonly("truth_features", &fmda::SynthResult::truth_features);

    m.def("synth", &fmda::synth, py::arg("cfg"), py::arg("model"));
    m.def("features", &fmda::features, py::arg("series"));
    m.def("load_csv", &fmda::load_csv, py::arg("path"));
    m.def("save_csv", &fmda::save_csv, py::arg("series"), py::arg("path"));
    m.def("load_truth_csv", &fmda::load_truth_csv, py::arg("path"));
    m.def("save_truth_csv", &fmda::save_truth_csv, py::arg("time_hours"), py::arg("truth"),
          py::arg("path"));

    // --- assimilation -------------------------------------------------------
    py::class_<fmda::AugmentedState>(m, "AugmentedState")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("m"), py::arg("dE"))
        .def_readwrite("m", &fmda::AugmentedState::m)
        .def_readwrite("dE", &fmda::AugmentedState::dE);

    py::class_<fmda::FilterConfig>(m, "FilterConfig")
        .def(py::init<>())
        .def_readwrite("q_m", &fmda::FilterConfig::q_m)
        .def_readwrite("q_dE", &fmda::FilterConfig::q_dE)
        .def_readwrite("r", &fmda::FilterConfig::r)
        .def_readwrite("p0_m", &fmda::FilterConfig::p0_m)
        .def_readwrite("p0_dE", &fmda::FilterConfig::p0_dE);

    py::class_<fmda::FilterStep>(m, "FilterStep")
        .def_readonly("state", &fmda::FilterStep::state)
        .def_readonly("cov", &fmda::FilterStep::cov);

    m.def("jacobian", &fmda::jacobian, py::arg("state"), py::arg("eq"), py::arg("cfg"));
    m.def("forecast_step", &fmda::forecast_step, py::arg("state"), py::arg("cov"), py::arg("eq"),
          py::arg("cfg"), py::arg("fcfg"));
    m.def("analysis_step", &fmda::analysis_step, py::arg("state"), py::arg("cov"), py::arg("obs"),
          py::arg("r"));
    m.def("run_learning", &fmda::run_learning, py::arg("series"), py::arg("cfg"), py::arg("fcfg"));
    m.def("run_forecast", &fmda::run_forecast, py::arg("state0"), py::arg("eqs"), py::arg("cfg"));
    m.def("is_valid_covariance", &fmda::is_valid_covariance, py::arg("p"));

    // --- rnn ----------------------------------------------------------------
    py::enum_<fmda::InitMode>(m, "InitMode")
        .value("Identical", fmda::InitMode::Identical)
        .value("MultiTimescale", fmda::InitMode::MultiTimescale);

    py::class_<fmda::RnnWeights>(m, "RnnWeights")
        .def(py::init<>())
        .def_readwrite("w_in", &fmda::RnnWeights::w_in)
        .def_readwrite("w_hid", &fmda::RnnWeights::w_hid)
        .def_readwrite("b_hid", &fmda::RnnWeights::b_hid)
        .def_readwrite("w_out", &fmda::RnnWeights::w_out)
        .def_readwrite("b_out", &fmda::RnnWeights::b_out)
        .def_readwrite("dt", &fmda::RnnWeights::dt)
        .def_property_readonly("hidden", &fmda::RnnWeights::hidden);

    py::class_<fmda::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("window", &fmda::TrainConfig::window)
        .def_readwrite("lr", &fmda::TrainConfig::lr)
        .def_readwrite("epochs", &fmda::TrainConfig::epochs)
        .def_readwrite("seed", &fmda::TrainConfig::seed)
        .def_readwrite("init_mode", &fmda::TrainConfig::init_mode)
        .def_readwrite("timescales", &fmda::TrainConfig::timescales);

    py::class_<fmda::Gradients>(m, "Gradients")
        .def_readonly("d_w_in", &fmda::Gradients::d_w_in)
        .def_readonly("d_w_hid", &fmda::Gradients::d_w_hid)
        .def_readonly("d_b_hid", &fmda::Gradients::d_b_hid)
        .def_readonly("d_w_out", &fmda::Gradients::d_w_out)
        .def_readonly("d_b_out", &fmda::Gradients::d_b_out)
        .def_readonly("loss", &fmda::Gradients::loss);

    py::class_<fmda::TrainResult>(m, "TrainResult")
        .def_readonly("weights", &fmda::TrainResult::weights)
        .def_readonly("loss_history", &fmda::TrainResult::loss_history);

    m.def("init_euler", &fmda::init_euler, py::arg("h"), py::arg("cfg"), py::arg("mode"),
          py::arg("timescales"));
    m.def("forward", &fmda::forward, py::arg("weights"), py::arg("hidden"), py::arg("input"));
    m.def("evaluate_sequence", &fmda::evaluate_sequence, py::arg("weights"), py::arg("h0"),
          py::arg("inputs"));
    m.def("bptt_gradient", &fmda::bptt_gradient, py::arg("weights"), py::arg("h0"),
          py::arg("window"), py::arg("target"));
    m.def("train", &fmda::train, py::arg("w0"), py::arg("features"), py::arg("targets"),
          py::arg("tcfg"), py::arg("cfg"));
    m.def("save_weights_json", &fmda::save_weights_json, py::arg("weights"), py::arg("path"));
    m.def("load_weights_json", &fmda::load_weights_json, py::arg("path"));

    // --- metrics ------------------------------------------------------------
    m.def("rmse", &fmda::rmse, py::arg("pred"), py::arg("target"), py::arg("begin"),
          py::arg("end"));
}
