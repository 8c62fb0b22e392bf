#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <random>
#include <sstream>

#include "dopplertrack/config.hpp"
#include "dopplertrack/harness.hpp"

namespace py = pybind11;
namespace dt = dopplertrack;

namespace {

using CArray = py::array_t<dt::cplx, py::array::c_style | py::array::forcecast>;

CArray to_array(const dt::CVector& v) {
  CArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

dt::CVector from_array(const CArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-d complex array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> column(const std::vector<dt::DopplerEstimate>& s, double dt::DopplerEstimate::*field) {
  py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) out.mutable_data()[i] = s[i].*field;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Doppler spread estimation by delay-subspace tracking";

  py::register_exception<dt::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<dt::NewtonError>(m, "NewtonError", PyExc_ArithmeticError);

  // numerics
  m.def("bessel_j0", &dt::bessel_j0, py::arg("z"));
  m.def("xi_exact", &dt::xi_exact, py::arg("fd_hz"), py::arg("tones"), py::arg("sample_period_s"),
        py::arg("lag"), py::arg("cp_ratio") = 0.125);
  m.def(
      "xi0_series", [](double psi, int order) { return dt::xi0_series({psi, 0.0, order}); },
      py::arg("psi"), py::arg("order") = 8);
  m.def(
      "xi_beta_series", [](double psi, double phi, int order) { return dt::xi_beta_series({psi, phi, order}); },
      py::arg("psi"), py::arg("phi"), py::arg("order") = 8);
  m.def(
      "poly_coeffs", [](double eta, double phi, int order) { return dt::poly_coeffs(eta, phi, order).coeffs; },
      py::arg("eta"), py::arg("phi"), py::arg("order") = 8);
  m.def(
      "newton_solve",
      [](std::vector<double> coeffs, double tolerance, int max_iters, std::optional<double> init) {
        dt::DopplerPolynomial p;
        p.coeffs = std::move(coeffs);
        dt::NewtonConfig cfg{tolerance, max_iters, init};
        cfg.validate();
        const auto r = dt::newton_solve(p, cfg);
        return py::make_tuple(r.root, r.iterations, r.converged);
      },
      py::arg("coeffs"), py::arg("tolerance") = 1e-4, py::arg("max_iters") = 4, py::arg("init") = py::none(),
      "Returns (root, iterations, converged).");
  m.def("doppler_from_root", &dt::doppler_from_root, py::arg("x"), py::arg("tones"), py::arg("sample_period_s"));
  m.def(
      "invert_eta",
      [](double eta, int lag, int tones, double sample_period_s, double cp_ratio, int order) {
        const auto r = dt::invert_eta(eta, lag * (1.0 + cp_ratio), order, {}, tones, sample_period_s);
        py::dict d;
        d["fd_hz"] = r.fd_hz;
        d["root"] = r.root;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        d["eta_clamped"] = r.eta_clamped;
        return d;
      },
      py::arg("eta"), py::arg("lag") = 1, py::arg("tones") = 1024, py::arg("sample_period_s") = 1.0 / 12e6,
      py::arg("cp_ratio") = 0.125, py::arg("order") = 8);

  // channel
  py::class_<dt::ChannelProfile>(m, "ChannelProfile")
      .def_static("from_db", &dt::ChannelProfile::from_db, py::arg("name"), py::arg("delays_ns"),
                  py::arg("powers_db"))
      .def_static("preset", &dt::ChannelProfile::preset, py::arg("name"))
      .def_readonly("name", &dt::ChannelProfile::name)
      .def_readonly("delays_ns", &dt::ChannelProfile::delays_ns)
      .def_readonly("powers", &dt::ChannelProfile::powers)
      .def("__len__", &dt::ChannelProfile::size)
      .def("__repr__", [](const dt::ChannelProfile& p) {
        return "<ChannelProfile " + p.name + " with " + std::to_string(p.size()) + " paths>";
      });

  py::class_<dt::OfdmGeometry>(m, "OfdmGeometry")
      .def(py::init([](int tones, int cp_length, double sample_period_s, int pilots) {
             dt::OfdmGeometry g{tones, cp_length, sample_period_s, pilots};
             g.validate();
             return g;
           }),
           py::arg("tones") = 1024, py::arg("cp_length") = 128, py::arg("sample_period_s") = 1.0 / 12e6,
           py::arg("pilots") = 128)
      .def_readonly("tones", &dt::OfdmGeometry::tones)
      .def_readonly("cp_length", &dt::OfdmGeometry::cp_length)
      .def_readonly("sample_period_s", &dt::OfdmGeometry::sample_period_s)
      .def_readonly("pilots", &dt::OfdmGeometry::pilots)
      .def_property_readonly("symbol_duration", &dt::OfdmGeometry::symbol_duration);

  py::class_<dt::FadingRealization>(m, "Fading")
      .def(py::init<const dt::ChannelProfile&, double, std::uint64_t, int>(), py::arg("profile"),
           py::arg("fd_hz"), py::arg("seed"), py::arg("oscillators") = 64)
      .def("path_gain", &dt::FadingRealization::path_gain, py::arg("path"), py::arg("t"))
      .def_property_readonly("paths", &dt::FadingRealization::paths)
      .def_property_readonly("max_doppler", &dt::FadingRealization::max_doppler);

  m.def(
      "time_avg_cfr",
      [](const dt::FadingRealization& f, const dt::OfdmGeometry& g, const dt::ChannelProfile& p, long symbol,
         int avg_samples) { return to_array(dt::time_avg_cfr(f, g, p, symbol, avg_samples)); },
      py::arg("fading"), py::arg("geometry"), py::arg("profile"), py::arg("symbol"), py::arg("avg_samples") = 64);

  m.def(
      "ls_observe",
      [](const CArray& cfr, double snr_db, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        const auto v = from_array(cfr);
        return to_array(dt::ls_observe(v, snr_db, rng).values);
      },
      py::arg("cfr"), py::arg("snr_db"), py::arg("seed"));

  // tracker
  m.def("mdl_order", [](std::vector<double> e, double n_eff) { return dt::mdl_order(e, n_eff); },
        py::arg("eigs"), py::arg("n_eff"));
  m.def("noise_floor", [](std::vector<double> e, int L) { return dt::noise_floor(e, L); }, py::arg("eigs"),
        py::arg("L_hat"));

  py::class_<dt::DopplerEstimate>(m, "DopplerEstimate")
      .def_readonly("n", &dt::DopplerEstimate::n)
      .def_readonly("fd_hat", &dt::DopplerEstimate::fd_hat)
      .def_readonly("eta_hat", &dt::DopplerEstimate::eta_hat)
      .def_readonly("L_hat", &dt::DopplerEstimate::L_hat)
      .def_readonly("sigma_n2_hat", &dt::DopplerEstimate::sigma_n2_hat)
      .def_readonly("newton_iters", &dt::DopplerEstimate::newton_iters)
      .def_property_readonly("flags", [](const dt::DopplerEstimate& e) { return dt::flags_to_string(e.flags); })
      .def("__repr__", [](const dt::DopplerEstimate& e) {
        std::ostringstream os;
        os << "<DopplerEstimate n=" << e.n << " fd_hat=" << e.fd_hat << " flags=" << dt::flags_to_string(e.flags)
           << ">";
        return os.str();
      });

  py::class_<dt::DopplerTracker>(m, "DopplerTracker")
      .def(py::init([](double alpha, int lag, int max_rank, int warmup, const std::string& noise_offset,
                       std::optional<dt::OfdmGeometry> geometry) {
             dt::TrackerConfig cfg;
             cfg.alpha = alpha;
             cfg.lag = lag;
             cfg.max_rank = max_rank;
             cfg.warmup_symbols = warmup;
             if (noise_offset == "tracked") cfg.noise_offset = dt::NoiseOffset::tracked;
             else if (noise_offset != "pilot") throw py::value_error("noise_offset must be 'pilot' or 'tracked'");
             if (geometry) cfg.geometry = *geometry;
             return dt::DopplerTracker(cfg);
           }),
           py::arg("alpha") = 0.995, py::arg("lag") = 1, py::arg("max_rank") = 10, py::arg("warmup_symbols") = 20,
           py::arg("noise_offset") = "pilot", py::arg("geometry") = py::none())
      .def(
          "step",
          [](dt::DopplerTracker& t, const CArray& snapshot) {
            dt::PilotSnapshot s;
            s.index = t.state().processed;
            s.values = from_array(snapshot);
            return t.step(s);
          },
          py::arg("snapshot"))
      .def_property_readonly("processed", [](const dt::DopplerTracker& t) { return t.state().processed; })
      .def("lag0_eigenvalues", [](const dt::DopplerTracker& t) { return dt::lag0_eigenvalues(t.state()); })
      .def("orthonormality_error", [](const dt::DopplerTracker& t) {
        return std::max(t.state().lag0.orthonormality_error(), t.state().lagged.orthonormality_error());
      });

  // harness
  py::class_<dt::Scenario>(m, "Scenario")
      .def_readonly("id", &dt::Scenario::id)
      .def_readonly("fd_hz", &dt::Scenario::fd_hz)
      .def_readonly("snr_db", &dt::Scenario::snr_db)
      .def_readonly("duration_ms", &dt::Scenario::duration_ms)
      .def_readonly("trials", &dt::Scenario::trials)
      .def_readonly("master_seed", &dt::Scenario::master_seed)
      .def_property_readonly("profile", [](const dt::Scenario& s) { return s.profile.name; })
      .def_property_readonly("symbol_count", &dt::Scenario::symbol_count)
      .def("__repr__", [](const dt::Scenario& s) { return "<Scenario " + s.id + ">"; });

  m.def(
      "load_config",
      [](std::optional<std::string> text, std::optional<std::string> preset, std::optional<std::uint64_t> seed) {
        auto rc = dt::parse_config(text.value_or(""), preset);
        if (seed)
          for (auto& s : rc.scenarios) s.master_seed = *seed;
        return rc.scenarios;
      },
      py::arg("text") = py::none(), py::arg("preset") = py::none(), py::arg("seed") = py::none(),
      "Expand a JSON config (text) and/or a preset into scenarios.");
  m.def("preset_names", &dt::preset_names);

  py::class_<dt::TrialResult>(m, "TrialResult")
      .def_readonly("scenario_id", &dt::TrialResult::scenario_id)
      .def_readonly("trial", &dt::TrialResult::trial)
      .def_readonly("error", &dt::TrialResult::error)
      .def_property_readonly("fd_hat", [](const dt::TrialResult& r) { return column(r.series, &dt::DopplerEstimate::fd_hat); })
      .def_property_readonly("eta_hat", [](const dt::TrialResult& r) { return column(r.series, &dt::DopplerEstimate::eta_hat); })
      .def_property_readonly("flags", [](const dt::TrialResult& r) {
        std::vector<std::string> out;
        for (const auto& e : r.series) out.push_back(dt::flags_to_string(e.flags));
        return out;
      })
      .def_property_readonly("final_fd", [](const dt::TrialResult& r) { return r.summary.final_fd; })
      .def_property_readonly("norm_err", [](const dt::TrialResult& r) { return r.summary.norm_err; })
      .def_property_readonly("convergence_symbol", [](const dt::TrialResult& r) { return r.summary.convergence_symbol; })
      .def("__len__", [](const dt::TrialResult& r) { return r.series.size(); });

  py::class_<dt::ScenarioSummary>(m, "ScenarioSummary")
      .def_readonly("scenario_id", &dt::ScenarioSummary::scenario_id)
      .def_readonly("fd_true", &dt::ScenarioSummary::fd_true)
      .def_readonly("snr_db", &dt::ScenarioSummary::snr_db)
      .def_readonly("median_fd_hat", &dt::ScenarioSummary::median_fd_hat)
      .def_readonly("mean_norm_err", &dt::ScenarioSummary::mean_norm_err)
      .def_readonly("p10_fd_hat", &dt::ScenarioSummary::p10_fd_hat)
      .def_readonly("p90_fd_hat", &dt::ScenarioSummary::p90_fd_hat)
      .def_readonly("convergence_symbol", &dt::ScenarioSummary::convergence_symbol)
      .def_readonly("failed", &dt::ScenarioSummary::failed);

  py::class_<dt::GridResult>(m, "GridResult")
      .def_readonly("trials", &dt::GridResult::trials)
      .def_readonly("summaries", &dt::GridResult::summaries)
      .def("write_csv", &dt::emit_csv, py::arg("directory"))
      .def("symbols_csv", [](const dt::GridResult& g) {
        std::ostringstream os;
        dt::write_symbol_csv(os, g.trials);
        return os.str();
      })
      .def("summary_csv", [](const dt::GridResult& g) {
        std::ostringstream os;
        dt::write_summary_csv(os, g.summaries);
        return os.str();
      });

  m.def("run_trial", &dt::run_trial, py::arg("scenario"), py::arg("trial"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_grid", &dt::run_grid, py::arg("scenarios"), py::arg("parallelism") = 1,
        py::call_guard<py::gil_scoped_release>());
}
