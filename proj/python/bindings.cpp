// Python bindings for the surge_al core library.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "surge/active_learning.hpp"
#include "surge/errors.hpp"
#include "surge/experiment.hpp"

namespace py = pybind11;
using namespace surge;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Python callers pass one sample per row; the core expects one sample per column.
Batch batch_from_rows(const RowMatrix& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ShapeError("x has " + std::to_string(x.rows()) + " rows but y has " +
                                             std::to_string(y.size()) + " entries");
  return {x.transpose(), y};
}

py::tuple prediction_arrays(const BatchPrediction& pred) { return py::make_tuple(pred.mean, pred.variance); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Active-learning surrogate for pump surge distance";
  m.attr("__version__") = std::string(version());

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);

  // Physics and data -------------------------------------------------------
  m.def("flow_coefficient", &flow_coefficient, py::arg("qin"), py::arg("n_speed"));
  m.def("surge_distance", &surge_distance, py::arg("qin"), py::arg("n_speed"));

  py::class_<Range>(m, "Range")
      .def(py::init([](double lo, double hi) { return Range{lo, hi}; }), py::arg("lo"), py::arg("hi"))
      .def_readwrite("lo", &Range::lo)
      .def_readwrite("hi", &Range::hi);

  py::class_<GeneratorConfig>(m, "GeneratorConfig")
      .def(py::init<>())
      .def_readwrite("n_samples", &GeneratorConfig::n_samples)
      .def_readwrite("seed", &GeneratorConfig::seed)
      .def_readwrite("tin", &GeneratorConfig::tin)
      .def_readwrite("pin", &GeneratorConfig::pin)
      .def_readwrite("n_speed", &GeneratorConfig::n_speed)
      .def_readwrite("phi", &GeneratorConfig::phi)
      .def_readwrite("noise_scale", &GeneratorConfig::noise_scale)
      .def_readwrite("heteroscedastic", &GeneratorConfig::heteroscedastic);

  py::class_<PumpSample>(m, "PumpSample")
      .def(py::init<>())
      .def_readwrite("tin", &PumpSample::tin)
      .def_readwrite("pin", &PumpSample::pin)
      .def_readwrite("n_speed", &PumpSample::n_speed)
      .def_readwrite("delta_p", &PumpSample::delta_p)
      .def_readwrite("power", &PumpSample::power)
      .def_readwrite("sd", &PumpSample::sd)
      .def_readwrite("qin", &PumpSample::qin)
      .def("features", &PumpSample::features);

  m.def("generate_synthetic", &generate_synthetic, py::arg("config"));
  m.def(
      "generate",
      [](int n_samples, std::uint64_t seed) {
        GeneratorConfig c;
        c.n_samples = n_samples;
        c.seed = seed;
        return generate_synthetic(c);
      },
      py::arg("n_samples"), py::arg("seed") = 0, "Synthetic samples with the default generator settings");
  m.def("load_csv", &load_csv, py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("samples"), py::arg("path"));
  m.def(
      "to_arrays",
      [](const std::vector<PumpSample>& samples) {
        RowMatrix x(static_cast<Eigen::Index>(samples.size()), kNumFeatures);
        Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const auto f = samples[i].features();
          for (int j = 0; j < kNumFeatures; ++j) x(static_cast<Eigen::Index>(i), j) = f[j];
          y[static_cast<Eigen::Index>(i)] = samples[i].sd;
        }
        return py::make_tuple(x, y);
      },
      py::arg("samples"), "Raw features (n x 5) and surge distance (n) as numpy arrays");

  // Metrics ---------------------------------------------------------------
  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("r2", &MetricsReport::r2)
      .def_readonly("rmse", &MetricsReport::rmse)
      .def_readonly("max_error", &MetricsReport::max_error)
      .def_readonly("mape_pct", &MetricsReport::mape_pct)
      .def_readonly("acceptance_accuracy_pct", &MetricsReport::acceptance_accuracy_pct)
      .def_readonly("n", &MetricsReport::n);

  using Vec = std::vector<double>;
  m.def("r_squared", [](const Vec& p, const Vec& t) { return r_squared(p, t); }, py::arg("pred"), py::arg("truth"));
  m.def("rmse", [](const Vec& p, const Vec& t) { return rmse(p, t); }, py::arg("pred"), py::arg("truth"));
  m.def("max_error", [](const Vec& p, const Vec& t) { return max_error(p, t); }, py::arg("pred"), py::arg("truth"));
  m.def(
      "mape", [](const Vec& p, const Vec& t, double floor) { return mape(p, t, floor); }, py::arg("pred"),
      py::arg("truth"), py::arg("floor") = 1.0);
  m.def(
      "acceptance_accuracy",
      [](const Vec& p, const Vec& t, double threshold) { return acceptance_accuracy(p, t, threshold); },
      py::arg("pred"), py::arg("truth"), py::arg("threshold_pct") = 4.0);
  m.def(
      "metrics_report",
      [](const Vec& p, const Vec& t, double threshold, double floor) {
        MetricsOptions o;
        o.threshold_pct = threshold;
        o.mape_floor = floor;
        return metrics_report(p, t, o);
      },
      py::arg("pred"), py::arg("truth"), py::arg("threshold_pct") = 4.0, py::arg("floor") = 1.0);

  // Networks and ensembles ------------------------------------------------
  py::class_<Architecture>(m, "Architecture")
      .def(py::init<>())
      .def_readwrite("input_dim", &Architecture::input_dim)
      .def_readwrite("hidden_dims", &Architecture::hidden_dims)
      .def_readwrite("tanh_scale", &Architecture::tanh_scale)
      .def_readwrite("variance_floor", &Architecture::variance_floor);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("base_lr", &TrainConfig::base_lr)
      .def_readwrite("decay_factor", &TrainConfig::decay_factor)
      .def_readwrite("decay_start_epoch", &TrainConfig::decay_start_epoch)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<NetworkParams>(m, "NetworkParams")
      .def_property_readonly("parameter_count", &NetworkParams::parameter_count)
      .def_property_readonly("arch", [](const NetworkParams& p) { return p.arch; });

  m.def("init_network", &init_network, py::arg("arch"), py::arg("seed"));
  m.def(
      "forward",
      [](const NetworkParams& p, const RowMatrix& x) { return prediction_arrays(forward_batch(p, x.transpose())); },
      py::arg("params"), py::arg("x"), "Mean and variance arrays for each row of x");
  m.def(
      "gaussian_nll", [](double mean, double variance, double y) { return gaussian_nll({mean, variance}, y); },
      py::arg("mean"), py::arg("variance"), py::arg("y"));
  m.def(
      "batch_loss", [](const NetworkParams& p, const RowMatrix& x, const Eigen::VectorXd& y) {
        return batch_loss(p, batch_from_rows(x, y));
      },
      py::arg("params"), py::arg("x"), py::arg("y"));
  m.def("lr_schedule", &lr_schedule, py::arg("epoch"), py::arg("config"));

  py::class_<Ensemble>(m, "Ensemble")
      .def_property_readonly("size", &Ensemble::size)
      .def_readonly("member_seeds", &Ensemble::member_seeds)
      .def_property_readonly("arch", &Ensemble::arch);

  m.def(
      "train_ensemble",
      [](const RowMatrix& x, const Eigen::VectorXd& y, const TrainConfig& config, int n_members,
         const Architecture& arch) {
        const Batch batch = batch_from_rows(x, y);
        py::gil_scoped_release release;
        return train_ensemble(batch, config, n_members, arch);
      },
      py::arg("x"), py::arg("y"), py::arg("config") = TrainConfig{}, py::arg("n_members") = 5,
      py::arg("arch") = Architecture{}, "Train an ensemble on normalized rows x (n x input_dim) and targets y");
  m.def(
      "predict_pooled",
      [](const Ensemble& e, const RowMatrix& x) { return prediction_arrays(predict_pooled_batch(e, x.transpose())); },
      py::arg("ensemble"), py::arg("x"), "Mixture mean and variance for each row of x");

  // Active learning -------------------------------------------------------
  py::enum_<Strategy>(m, "Strategy")
      .value("TopVariance", Strategy::TopVariance)
      .value("Random", Strategy::Random);

  py::class_<ALConfig>(m, "ALConfig")
      .def(py::init<>())
      .def_readwrite("initial_train_size", &ALConfig::initial_train_size)
      .def_readwrite("candidate_multiplier", &ALConfig::candidate_multiplier)
      .def_readwrite("batch_k", &ALConfig::batch_k)
      .def_readwrite("iterations", &ALConfig::iterations)
      .def_readwrite("total_budget", &ALConfig::total_budget)
      .def_readwrite("seed", &ALConfig::seed)
      .def_readwrite("test_fraction", &ALConfig::test_fraction)
      .def_readwrite("n_members", &ALConfig::n_members)
      .def_readwrite("arch", &ALConfig::arch)
      .def_readwrite("train_config", &ALConfig::train_config)
      .def_readwrite("warm_start", &ALConfig::warm_start)
      .def_readwrite("allow_pool_exhaustion", &ALConfig::allow_pool_exhaustion)
      .def("validate", &ALConfig::validate, py::arg("n_samples"));

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("train_size", &IterationRecord::train_size)
      .def_readonly("selected_idx", &IterationRecord::selected_idx)
      .def_readonly("test_rmse", &IterationRecord::test_rmse)
      .def_readonly("test_r2", &IterationRecord::test_r2)
      .def_readonly("test_mape", &IterationRecord::test_mape)
      .def_readonly("test_max_error", &IterationRecord::test_max_error)
      .def_readonly("acceptance_accuracy", &IterationRecord::acceptance_accuracy)
      .def_readonly("mean_pool_variance", &IterationRecord::mean_pool_variance);

  py::class_<PoolState>(m, "PoolState")
      .def_readonly("train_idx", &PoolState::train_idx)
      .def_readonly("pool_idx", &PoolState::pool_idx)
      .def_readonly("test_idx", &PoolState::test_idx);

  py::class_<CampaignResult>(m, "CampaignResult")
      .def_property_readonly("records", [](const CampaignResult& r) { return r.curve.records; })
      .def_property_readonly("stop_reason", [](const CampaignResult& r) { return std::string(to_string(r.curve.stop_reason)); })
      .def_readonly("ensemble", &CampaignResult::ensemble)
      .def_readonly("state", &CampaignResult::state)
      .def(
          "predict_sd",
          [](const CampaignResult& r, const std::vector<PumpSample>& samples) {
            std::vector<std::size_t> idx(samples.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            return predict_sd(r.ensemble, r.scaler, samples, idx);
          },
          py::arg("samples"), "Pooled surge-distance predictions in percent");

  m.def(
      "al_loop",
      [](const std::vector<PumpSample>& samples, const ALConfig& config) {
        py::gil_scoped_release release;
        return al_loop(samples, config);
      },
      py::arg("samples"), py::arg("config"));
  m.def(
      "random_baseline_loop",
      [](const std::vector<PumpSample>& samples, const ALConfig& config) {
        py::gil_scoped_release release;
        return random_baseline_loop(samples, config);
      },
      py::arg("samples"), py::arg("config"));
}
