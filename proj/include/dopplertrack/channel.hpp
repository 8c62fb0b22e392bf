#pragma once

// WSSUS tapped-delay-line channel with Clarke/Jakes Doppler and
// non-sample-spaced delays, reduced to the per-symbol time-averaged CFR on
// comb pilot tones (diagonal-channel approximation, no ICI).

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace dopplertrack {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Multipath delay/power profile. Powers are stored linear and normalized to
/// unit total power.
struct ChannelProfile {
  std::string name;
  std::vector<double> delays_ns;
  std::vector<double> powers;

  static ChannelProfile from_db(std::string name, std::vector<double> delays_ns,
                                const std::vector<double>& powers_db);
  static ChannelProfile eva();
  static ChannelProfile etu();
  /// "eva" / "etu", case-insensitive; throws std::invalid_argument otherwise.
  static ChannelProfile preset(const std::string& name);

  std::size_t size() const { return delays_ns.size(); }
  void validate() const;
};

struct OfdmGeometry {
  int tones = 1024;
  int cp_length = 128;
  double sample_period_s = 1.0 / 12e6;
  int pilots = 128;

  double cp_ratio() const { return static_cast<double>(cp_length) / tones; }
  double symbol_duration() const { return (1.0 + cp_ratio()) * tones * sample_period_s; }
  int pilot_spacing() const { return tones / pilots; }
  int pilot_tone(int p) const { return p * pilot_spacing(); }

  void validate() const;
  /// Profile-dependent checks: P >= L and max delay within the CP.
  void validate_against(const ChannelProfile& profile) const;
};

/// Sum-of-sinusoids Rayleigh fading for every path of a profile. Immutable
/// after construction; evaluable at any continuous time.
class FadingRealization {
 public:
  FadingRealization(const ChannelProfile& profile, double fd_hz, std::uint64_t seed,
                    int oscillators = 64);

  std::size_t paths() const { return paths_.size(); }
  double max_doppler() const { return fd_hz_; }
  std::uint64_t seed() const { return seed_; }
  int oscillators() const { return oscillators_; }

  /// Complex gain h_l(t). Throws std::out_of_range for a bad path index.
  cplx path_gain(std::size_t path, double t) const;

  /// Mean of h_l over `count` instants t0, t0 + dt, ..., evaluated in closed
  /// form per oscillator (Dirichlet kernel).
  cplx mean_path_gain(std::size_t path, double t0, double dt, int count) const;

 private:
  struct Branch {
    std::vector<double> omega;  // rad/s
    std::vector<double> phase;
  };
  struct Path {
    double amplitude = 0.0;  // sqrt(sigma_l^2 / M)
    Branch in_phase;
    Branch quadrature;
  };

  const Path& at(std::size_t path) const;

  double fd_hz_;
  std::uint64_t seed_;
  int oscillators_;
  std::vector<Path> paths_;
};

FadingRealization make_fading(const ChannelProfile& profile, double fd_hz,
                              std::uint64_t seed, int oscillators = 64);

/// Time-averaged CFR on the P pilot tones of OFDM symbol n, averaging the
/// instantaneous CFR over `avg_samples` evenly spaced positions of the
/// symbol body. avg_samples == N reproduces the full per-sample average.
/// A nonzero drift moves every delay linearly in time (ns per second).
CVector time_avg_cfr(const FadingRealization& fading, const OfdmGeometry& geo,
                     const ChannelProfile& profile, long symbol, int avg_samples = 64,
                     double delay_drift_ns_per_s = 0.0);

/// Deterministic 64-bit seed mixing (splitmix64 finalizer over a ^ golden * b).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace dopplertrack
