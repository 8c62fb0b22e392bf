#pragma once

// Scalar and polynomial mathematics behind the Doppler inversion: the J0
// Bessel function, the intra-symbol correlation factors xi_0 / xi_beta (both
// the exact double sum and its power series), the Doppler polynomial and a
// Newton solver for its small negative root.

#include <optional>
#include <stdexcept>
#include <vector>

namespace dopplertrack {

/// Zeroth-order Bessel function of the first kind.
/// Throws std::domain_error for non-finite input.
double bessel_j0(double z);

/// Parameters of the truncated correlation-factor series.
///   psi   = pi * f_d * N * T
///   phi   = lag * (1 + r_cp)
///   order = number of retained terms K
struct SeriesParams {
  double psi = 0.0;
  double phi = 0.0;
  int order = 8;

  void validate() const;
};

/// Exact time-averaged correlation factor
///   (1/N^2) sum_m sum_q J0(2 pi f_d (m - q + lag (1 + r_cp) N) T).
/// lag = 0 gives xi_0. The double sum is folded over m - q, which is exact.
double xi_exact(double fd_hz, int tones, double sample_period_s, int lag,
                double cp_ratio);

double xi0_series(const SeriesParams& p);
double xi_beta_series(const SeriesParams& p);

/// Half of (1+phi)^(2k+2) + (1-phi)^(2k+2) - 2 phi^(2k+2), evaluated as the
/// cancellation-free even binomial sum  sum_{i<=k} C(2k+2, 2i) phi^(2i).
double lag_bracket_half(int k, double phi);

/// sum_k c_k x^k = 0 with x = -psi^2; the root near zero encodes f_d.
struct DopplerPolynomial {
  std::vector<double> coeffs;
  double eta = 1.0;
  double phi = 0.0;

  double value(double x) const;
  double derivative(double x) const;
  int order() const { return static_cast<int>(coeffs.size()); }
};

DopplerPolynomial poly_coeffs(double eta, double phi, int order);

struct NewtonConfig {
  double tolerance = 1e-4;  // absolute, on the step in x
  int max_iters = 4;
  std::optional<double> init;  // defaults to -c0/c1

  void validate() const;
};

struct NewtonResult {
  double root = 0.0;
  int iterations = 0;
  bool converged = false;
};

class NewtonError : public std::runtime_error {
 public:
  enum class Kind { singular_derivative, diverged };

  NewtonError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Linearized root -c0/c1; lands next to the small negative root for lag <= 4.
double default_initial_guess(const DopplerPolynomial& poly);

/// Newton iteration with the analytic derivative. Running out of iterations
/// is reported through `converged`, not thrown.
NewtonResult newton_solve(const DopplerPolynomial& poly, const NewtonConfig& cfg);

/// f_d = sqrt(-x) / (pi N T). Positive roots up to 1e-12 are clamped to 0;
/// larger ones throw std::domain_error (eta outside the model's range).
double doppler_from_root(double x_star, int tones, double sample_period_s);

/// Full eta -> f_d inversion including the eta > 1 clamp.
struct DopplerInversion {
  double fd_hz = 0.0;
  double root = 0.0;
  int iterations = 0;
  bool converged = true;
  bool eta_clamped = false;
};

DopplerInversion invert_eta(double eta, double phi, int order,
                            const NewtonConfig& cfg, int tones,
                            double sample_period_s);

}  // namespace dopplertrack
