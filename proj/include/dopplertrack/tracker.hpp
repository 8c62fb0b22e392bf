#pragma once

// Streaming Doppler estimator. Two QR-based low-rank recursions track the
// dominant subspace of the exponentially weighted 0-lag and lag-beta pilot
// autocorrelation matrices; the diagonals of their triangular factors stand
// in for the eigenvalues. From those the tracker picks the model order (MDL),
// the noise floor, the Doppler ratio eta and finally f_d.

#include <cstdint>
#include <deque>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "dopplertrack/channel.hpp"
#include "dopplertrack/frontend.hpp"
#include "dopplertrack/numerics.hpp"

namespace dopplertrack {

/// What eta subtracts from the leading diag(R_0) entries.
///   pilot:   sum of trailing tracked entries / (P - L_hat); positions the
///            rank-Lm recursion does not track count as zero.
///   tracked: the plain trailing mean, i.e. the reported noise floor.
/// The tracked signal entries shed most of their noise offset through the
/// basis rotation, so `tracked` over-subtracts at low SNR.
enum class NoiseOffset { pilot, tracked };

struct TrackerConfig {
  double alpha = 0.995;
  int lag = 1;
  int max_rank = 10;
  int series_order = 8;
  int warmup_symbols = 20;
  NoiseOffset noise_offset = NoiseOffset::pilot;
  NewtonConfig newton{};
  OfdmGeometry geometry{};

  double lag_phase() const { return lag * (1.0 + geometry.cp_ratio()); }
  void validate() const;
};

/// Q (P x Lm, orthonormal columns), A (P x Lm), C (Lm x Lm) and the upper
/// triangular R (Lm x Lm, real non-negative diagonal) for one lag.
struct LagRecursion {
  Eigen::MatrixXcd Q;
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd C;
  Eigen::MatrixXcd R;

  static LagRecursion initial(int pilots, int max_rank);
  /// ||Q^H Q - I||_F
  double orthonormality_error() const;
};

struct TrackerState {
  LagRecursion lag0;
  LagRecursion lagged;
  std::deque<Eigen::VectorXcd> history;  // newest at the back, at most lag + 1
  long processed = 0;

  static TrackerState initial(const TrackerConfig& cfg);
};

enum EstimateFlag : std::uint32_t {
  kFlagNone = 0,
  kFlagWarmup = 1u << 0,
  kFlagEtaClamped = 1u << 1,
  kFlagNotConverged = 1u << 2,
};

/// "none" or a '|'-joined list such as "warmup|not_converged".
std::string flags_to_string(std::uint32_t flags);

struct DopplerEstimate {
  long n = 0;
  double fd_hat = 0.0;
  double eta_hat = 0.0;
  int L_hat = 0;
  double sigma_n2_hat = 0.0;
  int newton_iters = 0;
  std::uint32_t flags = kFlagNone;

  bool has(EstimateFlag f) const { return (flags & f) != 0; }
};

/// Appends the snapshot to the lag history (trimmed to lag + 1 entries).
void record_snapshot(TrackerState& state, const PilotSnapshot& snap, int lag);

/// Rank-one update of the 0-lag recursion with Z = h h^H.
void update_lag0(TrackerState& state, const PilotSnapshot& snap, double alpha);

/// Update of the lag-beta recursion with Z = h(n) h(n - lag)^H. Expects the
/// snapshot to have been recorded already; returns false (and leaves the
/// recursion untouched) while fewer than `lag` earlier snapshots exist.
bool update_lagbeta(TrackerState& state, const PilotSnapshot& snap, double alpha, int lag);

/// MDL model order over eigenvalues sorted in descending order.
int mdl_order(std::span<const double> eigs, double n_eff);

/// Mean of the eigenvalues past the first L_hat.
double noise_floor(std::span<const double> eigs, int L_hat);

/// Value subtracted from diag(R_0) inside eta for the configured policy.
double eta_noise_offset(std::span<const double> eigs, int L_hat, int pilots, NoiseOffset policy);

/// sqrt( sum |R_beta,ll|^2 / sum |R_0,ll - offset|^2 ) over the L_hat largest
/// diagonal entries of each factor.
double eta_estimate(const TrackerState& state, int L_hat, double noise_offset);

/// Descending, non-negative real parts of diag(R_0).
std::vector<double> lag0_eigenvalues(const TrackerState& state);

class DopplerTracker {
 public:
  explicit DopplerTracker(TrackerConfig cfg);

  /// Processes the next snapshot of the stream. Numerical failures surface as
  /// flags; the previous f_d is carried forward in that case.
  DopplerEstimate step(const PilotSnapshot& snap);

  const TrackerState& state() const { return state_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  TrackerState state_;
  double last_fd_ = 0.0;
};

}  // namespace dopplertrack
