#pragma once

// Oracles shared by the unit tests and the acceptance binary.

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dopplertrack/channel.hpp"
#include "dopplertrack/frontend.hpp"
#include "dopplertrack/tracker.hpp"

namespace dttest {

using namespace dopplertrack;

// Sample TCF E[h(t) h*(t + k T_s)] of one path, real part, for k = 0..3:
// time average over `instants` start points, then mean over `realizations`
// seeds.
inline std::array<double, 4> path_tcf(const ChannelProfile& prof, double fd, std::size_t path,
                                      int realizations, int instants, double ts,
                                      std::uint64_t seed0 = 100) {
  std::array<double, 4> acc{};
  for (int r = 0; r < realizations; ++r) {
    const auto fad = make_fading(prof, fd, mix_seed(seed0, r));
    for (int i = 0; i < instants; ++i) {
      const double t = i * 7.3 * ts;
      const cplx h0 = fad.path_gain(path, t);
      for (int k = 0; k < 4; ++k) acc[k] += (h0 * std::conj(fad.path_gain(path, t + k * ts))).real();
    }
  }
  for (double& v : acc) v /= static_cast<double>(realizations) * instants;
  return acc;
}

// Stationary synthetic stream: `taps` static paths with fixed delays
// (samples) and unit total power, plus white noise. Static channel
// coefficients are redrawn every symbol so the covariance has rank `taps`.
struct SyntheticStream {
  std::vector<double> delays;  // samples
  std::vector<double> powers;
  int pilots = 128;
  int tones = 1024;
  double snr_db = 20.0;
  std::mt19937_64 rng{42};

  Eigen::MatrixXcd basis() const {
    Eigen::MatrixXcd F(pilots, delays.size());
    for (int p = 0; p < pilots; ++p)
      for (std::size_t l = 0; l < delays.size(); ++l) {
        const double arg = -2.0 * std::numbers::pi * (p * (tones / pilots)) * delays[l] / tones;
        F(p, l) = std::sqrt(powers[l]) * cplx(std::cos(arg), std::sin(arg));
      }
    return F;
  }

  PilotSnapshot next(long n) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    Eigen::VectorXcd a(delays.size());
    for (auto& v : a) v = cplx(g(rng), g(rng));
    const Eigen::VectorXcd h = basis() * a;
    const CVector clean(h.data(), h.data() + h.size());
    return ls_observe(clean, snr_db, rng, n);
  }
};

inline SyntheticStream three_tap(double snr_db, std::uint64_t seed) {
  SyntheticStream s;
  s.delays = {0.0, 3.7, 11.2};
  s.powers = {0.5, 0.3, 0.2};
  s.snr_db = snr_db;
  s.rng.seed(seed);
  return s;
}

// Exponentially weighted covariance R(n) = a R(n-1) + (1 - a) h h^H.
struct BatchCovariance {
  Eigen::MatrixXcd R;
  double alpha;

  BatchCovariance(int p, double a) : R(Eigen::MatrixXcd::Zero(p, p)), alpha(a) {}

  void add(const CVector& h) {
    const Eigen::Map<const Eigen::VectorXcd> v(h.data(), static_cast<Eigen::Index>(h.size()));
    R = alpha * R + (1.0 - alpha) * v * v.adjoint();
  }

  // descending eigenvalues
  std::vector<double> eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.rbegin(), ev.rend());
    return ev;
  }
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace dttest
