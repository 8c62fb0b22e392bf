#include "dopplertrack/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace dopplertrack {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sin(M x / 2) / (M sin(x / 2)), the mean of exp(j x k) over k = 0..M-1 up
// to the phase at the block centre.
double dirichlet(double x, int m) {
  const double s = std::sin(0.5 * x);
  if (std::fabs(s) < 1e-12) return 1.0;
  return std::sin(0.5 * m * x) / (m * s);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ChannelProfile ChannelProfile::from_db(std::string name, std::vector<double> delays_ns,
                                       const std::vector<double>& powers_db) {
  if (delays_ns.size() != powers_db.size())
    throw std::invalid_argument("channel profile '" + name + "': delay and power lists differ in length");
  ChannelProfile p;
  p.name = std::move(name);
  p.delays_ns = std::move(delays_ns);
  p.powers.reserve(powers_db.size());
  double total = 0.0;
  for (double db : powers_db) {
    if (!std::isfinite(db)) throw std::invalid_argument("channel profile: non-finite power");
    p.powers.push_back(std::pow(10.0, db / 10.0));
    total += p.powers.back();
  }
  for (double& w : p.powers) w /= total;
  p.validate();
  return p;
}

ChannelProfile ChannelProfile::eva() {
  return from_db("eva", {0, 30, 150, 310, 370, 710, 1090, 1730, 2510},
                 {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9});
}

ChannelProfile ChannelProfile::etu() {
  return from_db("etu", {0, 50, 120, 200, 230, 500, 1600, 2300, 5000},
                 {-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0});
}

ChannelProfile ChannelProfile::preset(const std::string& name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (key == "eva") return eva();
  if (key == "etu") return etu();
  throw std::invalid_argument("unknown channel profile '" + name + "'");
}

void ChannelProfile::validate() const {
  if (delays_ns.empty()) throw std::invalid_argument("channel profile '" + name + "': no paths");
  if (delays_ns.size() != powers.size())
    throw std::invalid_argument("channel profile '" + name + "': delay and power lists differ in length");
  for (std::size_t l = 0; l < delays_ns.size(); ++l) {
    if (!(delays_ns[l] >= 0.0))
      throw std::invalid_argument("channel profile '" + name + "': negative delay");
    if (l > 0 && !(delays_ns[l] > delays_ns[l - 1]))
      throw std::invalid_argument("channel profile '" + name + "': delays must be strictly increasing");
    if (!(powers[l] > 0.0)) throw std::invalid_argument("channel profile '" + name + "': non-positive power");
  }
  double total = 0.0;
  for (double w : powers) total += w;
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("channel profile '" + name + "': powers not normalized");
}

void OfdmGeometry::validate() const {
  if (tones <= 0 || cp_length <= 0 || pilots <= 0)
    throw std::invalid_argument("geometry: N, L_cp and P must be positive");
  if (!(sample_period_s > 0.0)) throw std::invalid_argument("geometry: sample period must be > 0");
  if (tones % pilots != 0) throw std::invalid_argument("geometry: P must divide N");
}

void OfdmGeometry::validate_against(const ChannelProfile& profile) const {
  validate();
  profile.validate();
  if (static_cast<std::size_t>(pilots) < profile.size())
    throw std::invalid_argument("geometry: fewer pilots than channel paths");
  const double max_tau = profile.delays_ns.back() * 1e-9 / sample_period_s;
  if (max_tau > cp_length)
    throw std::invalid_argument("geometry: channel delay spread exceeds the cyclic prefix");
}

FadingRealization::FadingRealization(const ChannelProfile& profile, double fd_hz,
                                     std::uint64_t seed, int oscillators)
    : fd_hz_(fd_hz), seed_(seed), oscillators_(oscillators) {
  if (!(fd_hz >= 0.0)) throw std::invalid_argument("fading: f_d must be >= 0");
  if (oscillators < 16) throw std::invalid_argument("fading: need at least 16 oscillators");
  profile.validate();

  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  paths_.resize(profile.size());
  for (std::size_t l = 0; l < profile.size(); ++l) {
    std::mt19937_64 rng(mix_seed(seed, l));
    Path& p = paths_[l];
    p.amplitude = std::sqrt(profile.powers[l] / oscillators);
    for (Branch* b : {&p.in_phase, &p.quadrature}) {
      b->omega.resize(oscillators);
      b->phase.resize(oscillators);
      for (int i = 0; i < oscillators; ++i) {
        b->omega[i] = kTwoPi * fd_hz * std::cos(uniform(rng));
        b->phase[i] = uniform(rng);
      }
    }
  }
}

const FadingRealization::Path& FadingRealization::at(std::size_t path) const {
  if (path >= paths_.size()) throw std::out_of_range("fading: path index out of range");
  return paths_[path];
}

cplx FadingRealization::path_gain(std::size_t path, double t) const {
  const Path& p = at(path);
  double re = 0.0;
  double im = 0.0;
  for (int i = 0; i < oscillators_; ++i) {
    re += std::cos(p.in_phase.omega[i] * t + p.in_phase.phase[i]);
    im += std::cos(p.quadrature.omega[i] * t + p.quadrature.phase[i]);
  }
  return {p.amplitude * re, p.amplitude * im};
}

cplx FadingRealization::mean_path_gain(std::size_t path, double t0, double dt, int count) const {
  if (count < 1) throw std::invalid_argument("fading: averaging count must be >= 1");
  const Path& p = at(path);
  const double centre = t0 + 0.5 * (count - 1) * dt;
  auto branch = [&](const Branch& b) {
    double acc = 0.0;
    for (int i = 0; i < oscillators_; ++i)
      acc += dirichlet(b.omega[i] * dt, count) * std::cos(b.omega[i] * centre + b.phase[i]);
    return acc;
  };
  return {p.amplitude * branch(p.in_phase), p.amplitude * branch(p.quadrature)};
}

FadingRealization make_fading(const ChannelProfile& profile, double fd_hz, std::uint64_t seed,
                              int oscillators) {
  return FadingRealization(profile, fd_hz, seed, oscillators);
}

CVector time_avg_cfr(const FadingRealization& fading, const OfdmGeometry& geo,
                     const ChannelProfile& profile, long symbol, int avg_samples,
                     double delay_drift_ns_per_s) {
  if (avg_samples < 1 || avg_samples > geo.tones)
    throw std::invalid_argument("time_avg_cfr: avg_samples must lie in [1, N]");
  if (profile.size() != fading.paths())
    throw std::invalid_argument("time_avg_cfr: profile and fading path counts differ");

  const double T = geo.sample_period_s;
  const double stride = static_cast<double>(geo.tones) / avg_samples;  // in samples
  // sample positions m_j = (j + 1/2) * stride - 1/2 inside the symbol body
  const double body_start = symbol * geo.symbol_duration() + geo.cp_length * T;
  const double t0 = body_start + (0.5 * stride - 0.5) * T;
  const double t_mid = body_start + 0.5 * (geo.tones - 1) * T;

  CVector cfr(geo.pilots, cplx{});
  for (std::size_t l = 0; l < profile.size(); ++l) {
    const cplx g = fading.mean_path_gain(l, t0, stride * T, avg_samples);
    const double delay_ns = profile.delays_ns[l] + delay_drift_ns_per_s * t_mid;
    const double tau = delay_ns * 1e-9 / T;
    for (int p = 0; p < geo.pilots; ++p) {
      const double arg = -kTwoPi * geo.pilot_tone(p) * tau / geo.tones;
      cfr[p] += g * cplx(std::cos(arg), std::sin(arg));
    }
  }
  return cfr;
}

}  // namespace dopplertrack
