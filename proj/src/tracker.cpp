#include "dopplertrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace dopplertrack {

namespace {

Eigen::Map<const Eigen::VectorXcd> as_vector(const PilotSnapshot& snap) {
  return {snap.values.data(), static_cast<Eigen::Index>(snap.values.size())};
}

// A <- alpha A C + (1 - alpha) x (y^H Q), then A = Q R with diag(R) >= 0 and
// C = Q_prev^H Q.
void advance(LagRecursion& rec, const Eigen::VectorXcd& x, const Eigen::VectorXcd& y,
             double alpha) {
  if (x.size() != rec.Q.rows())
    throw std::invalid_argument("tracker: snapshot length does not match pilot count");

  const Eigen::RowVectorXcd proj = y.adjoint() * rec.Q;
  Eigen::MatrixXcd a = alpha * (rec.A * rec.C);
  a.noalias() += (1.0 - alpha) * x * proj;

  const Eigen::Index rows = a.rows();
  const Eigen::Index rank = a.cols();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, rank);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();

  for (Eigen::Index j = 0; j < rank; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag == 0.0) continue;
    const std::complex<double> phase = r(j, j) / mag;
    q.col(j) *= phase;
    r.row(j) *= std::conj(phase);
    r(j, j) = mag;
  }

  rec.C = rec.Q.adjoint() * q;
  rec.Q = std::move(q);
  rec.R = std::move(r);
  rec.A = std::move(a);
}

std::vector<double> top_moduli(const Eigen::MatrixXcd& r, int count) {
  std::vector<double> d(r.rows());
  for (Eigen::Index i = 0; i < r.rows(); ++i) d[i] = std::abs(r(i, i));
  std::sort(d.begin(), d.end(), std::greater<>());
  d.resize(std::min<std::size_t>(d.size(), count));
  return d;
}

}  // namespace

void TrackerConfig::validate() const {
  geometry.validate();
  newton.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tracker: alpha must lie in (0, 1)");
  if (lag < 1 || lag > 4) throw std::invalid_argument("tracker: lag must lie in [1, 4]");
  if (max_rank < 1 || max_rank > geometry.pilots)
    throw std::invalid_argument("tracker: max_rank must lie in [1, P]");
  if (series_order < 2) throw std::invalid_argument("tracker: series order must be >= 2");
  if (warmup_symbols < 0) throw std::invalid_argument("tracker: warmup must be >= 0");
}

LagRecursion LagRecursion::initial(int pilots, int max_rank) {
  LagRecursion rec;
  rec.Q = Eigen::MatrixXcd::Identity(pilots, max_rank);
  rec.A = Eigen::MatrixXcd::Zero(pilots, max_rank);
  rec.C = Eigen::MatrixXcd::Identity(max_rank, max_rank);
  rec.R = Eigen::MatrixXcd::Zero(max_rank, max_rank);
  return rec;
}

double LagRecursion::orthonormality_error() const {
  const Eigen::Index k = Q.cols();
  return (Q.adjoint() * Q - Eigen::MatrixXcd::Identity(k, k)).norm();
}

TrackerState TrackerState::initial(const TrackerConfig& cfg) {
  cfg.validate();
  TrackerState s;
  s.lag0 = LagRecursion::initial(cfg.geometry.pilots, cfg.max_rank);
  s.lagged = LagRecursion::initial(cfg.geometry.pilots, cfg.max_rank);
  return s;
}

std::string flags_to_string(std::uint32_t flags) {
  std::string out;
  auto add = [&](EstimateFlag f, const char* name) {
    if (!(flags & f)) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(kFlagWarmup, "warmup");
  add(kFlagEtaClamped, "eta_clamped");
  add(kFlagNotConverged, "not_converged");
  return out.empty() ? "none" : out;
}

void record_snapshot(TrackerState& state, const PilotSnapshot& snap, int lag) {
  state.history.emplace_back(as_vector(snap));
  while (state.history.size() > static_cast<std::size_t>(lag) + 1) state.history.pop_front();
}

void update_lag0(TrackerState& state, const PilotSnapshot& snap, double alpha) {
  const Eigen::VectorXcd h = as_vector(snap);
  advance(state.lag0, h, h, alpha);
}

bool update_lagbeta(TrackerState& state, const PilotSnapshot& snap, double alpha, int lag) {
  if (state.history.size() < static_cast<std::size_t>(lag) + 1) return false;
  const Eigen::VectorXcd& earlier = state.history[state.history.size() - 1 - lag];
  advance(state.lagged, as_vector(snap), earlier, alpha);
  return true;
}

int mdl_order(std::span<const double> eigs, double n_eff) {
  const int m = static_cast<int>(eigs.size());
  if (m == 0) throw std::invalid_argument("mdl_order: no eigenvalues");
  if (!(n_eff > 0.0)) throw std::invalid_argument("mdl_order: n_eff must be positive");

  std::vector<double> lam(eigs.begin(), eigs.end());
  for (double& v : lam) v = std::max(v, 1e-15);

  int best = 0;
  double best_score = 0.0;
  for (int k = 0; k < m; ++k) {
    const int tail = m - k;
    double log_sum = 0.0;
    double sum = 0.0;
    for (int i = k; i < m; ++i) {
      log_sum += std::log(lam[i]);
      sum += lam[i];
    }
    // ln(geometric mean / arithmetic mean) of the trailing eigenvalues
    const double log_ratio = log_sum / tail - std::log(sum / tail);
    const double score = -n_eff * tail * log_ratio + 0.5 * k * (2.0 * m - k) * std::log(n_eff);
    if (k == 0 || score < best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

double noise_floor(std::span<const double> eigs, int L_hat) {
  const int m = static_cast<int>(eigs.size());
  if (L_hat < 0) throw std::invalid_argument("noise_floor: negative model order");
  if (L_hat >= m) throw std::invalid_argument("noise_floor: no eigenvalues left beyond the signal subspace");
  double sum = 0.0;
  for (int i = L_hat; i < m; ++i) sum += eigs[i];
  return sum / (m - L_hat);
}

std::vector<double> lag0_eigenvalues(const TrackerState& state) {
  const auto& r = state.lag0.R;
  std::vector<double> d(r.rows());
  for (Eigen::Index i = 0; i < r.rows(); ++i) d[i] = std::max(r(i, i).real(), 0.0);
  std::sort(d.begin(), d.end(), std::greater<>());
  return d;
}

double eta_noise_offset(std::span<const double> eigs, int L_hat, int pilots, NoiseOffset policy) {
  const double mean = noise_floor(eigs, L_hat);
  if (policy == NoiseOffset::tracked) return mean;
  const int tracked = static_cast<int>(eigs.size());
  return mean * (tracked - L_hat) / static_cast<double>(pilots - L_hat);
}

double eta_estimate(const TrackerState& state, int L_hat, double noise_offset) {
  if (L_hat < 1) throw std::invalid_argument("eta_estimate: model order must be >= 1");
  const auto num = top_moduli(state.lagged.R, L_hat);
  const auto den = lag0_eigenvalues(state);
  double n = 0.0;
  double d = 0.0;
  for (double v : num) n += v * v;
  for (int l = 0; l < std::min<int>(L_hat, static_cast<int>(den.size())); ++l)
    d += (den[l] - noise_offset) * (den[l] - noise_offset);
  if (!(d > 0.0)) throw std::domain_error("eta_estimate: no signal energy above the noise floor");
  return std::sqrt(n / d);
}

DopplerTracker::DopplerTracker(TrackerConfig cfg)
    : cfg_(std::move(cfg)), state_(TrackerState::initial(cfg_)) {}

DopplerEstimate DopplerTracker::step(const PilotSnapshot& snap) {
  const long n = state_.processed;
  record_snapshot(state_, snap, cfg_.lag);
  update_lag0(state_, snap, cfg_.alpha);
  const bool lag_ready = update_lagbeta(state_, snap, cfg_.alpha, cfg_.lag);
  ++state_.processed;

  DopplerEstimate est;
  est.n = n;
  est.fd_hat = last_fd_;
  if (!lag_ready || n < std::max(cfg_.lag, cfg_.warmup_symbols)) {
    est.flags |= kFlagWarmup;
    return est;
  }

  const auto eigs = lag0_eigenvalues(state_);
  const double n_eff = std::min(static_cast<double>(n + 1), 1.0 / (1.0 - cfg_.alpha));
  est.L_hat = mdl_order(eigs, n_eff);
  est.sigma_n2_hat = noise_floor(eigs, est.L_hat);
  if (est.L_hat == 0) {
    est.flags |= kFlagNotConverged;
    return est;
  }

  try {
    const double offset =
        eta_noise_offset(eigs, est.L_hat, cfg_.geometry.pilots, cfg_.noise_offset);
    est.eta_hat = eta_estimate(state_, est.L_hat, offset);
    const auto inv = invert_eta(est.eta_hat, cfg_.lag_phase(), cfg_.series_order, cfg_.newton,
                                cfg_.geometry.tones, cfg_.geometry.sample_period_s);
    est.newton_iters = inv.iterations;
    if (inv.eta_clamped) est.flags |= kFlagEtaClamped;
    if (!inv.converged) est.flags |= kFlagNotConverged;
    est.fd_hat = inv.fd_hz;
    last_fd_ = est.fd_hat;
  } catch (const std::exception&) {
    est.flags |= kFlagNotConverged;
  }
  return est;
}

}  // namespace dopplertrack
