#include "dopplertrack/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dopplertrack {

namespace {

constexpr double kSeriesSwitch = 12.0;

// Maclaurin series, accumulated in extended precision: around |z| = 12 the
// largest term is ~4e3 and double accumulation would cost the last digits.
double j0_series(double z) {
  const long double half = static_cast<long double>(z) / 2.0L;
  const long double x2 = half * half;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -x2 / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) + 1e-30L) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion, truncated at its smallest term.
double j0_asymptotic(double z) {
  const double inv8z = 1.0 / (8.0 * z);
  double p = 1.0;
  double q = 0.0;
  double mag = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double next = mag * (2.0 * k - 1.0) * (2.0 * k - 1.0) * inv8z / k;
    if (next >= mag || next < 1e-18) break;
    mag = next;
    // a_k alternates in pairs: +P, -Q, -P, +Q, ...
    switch (k % 4) {
      case 1: q -= mag; break;
      case 2: p -= mag; break;
      case 3: q += mag; break;
      default: p += mag; break;
    }
  }
  const double chi = z - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * z)) *
         (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double z) {
  if (!std::isfinite(z)) throw std::domain_error("bessel_j0: non-finite argument");
  const double az = std::fabs(z);
  return az <= kSeriesSwitch ? j0_series(az) : j0_asymptotic(az);
}

void SeriesParams::validate() const {
  if (!(psi >= 0.0) || !std::isfinite(psi))
    throw std::invalid_argument("SeriesParams: psi must be finite and >= 0");
  if (!(phi >= 0.0) || !std::isfinite(phi))
    throw std::invalid_argument("SeriesParams: phi must be finite and >= 0");
  if (order < 2) throw std::invalid_argument("SeriesParams: order must be >= 2");
}

double xi_exact(double fd_hz, int tones, double sample_period_s, int lag,
                double cp_ratio) {
  if (!(fd_hz >= 0.0)) throw std::invalid_argument("xi_exact: f_d must be >= 0");
  if (tones < 2) throw std::invalid_argument("xi_exact: N must be >= 2");
  if (lag < 0) throw std::invalid_argument("xi_exact: lag must be >= 0");
  if (!(sample_period_s > 0.0) || !std::isfinite(sample_period_s))
    throw std::invalid_argument("xi_exact: T must be finite and > 0");
  if (!(cp_ratio >= 0.0)) throw std::invalid_argument("xi_exact: r_cp must be >= 0");
  if (fd_hz == 0.0) return 1.0;

  const double n = tones;
  const double offset = lag * (1.0 + cp_ratio) * n;
  const double w = 2.0 * std::numbers::pi * fd_hz * sample_period_s;
  // sum over m - q = d with multiplicity N - |d|
  double sum = n * bessel_j0(w * offset);
  for (int d = 1; d < tones; ++d) {
    const double mult = n - d;
    sum += mult * (bessel_j0(w * (offset + d)) + bessel_j0(w * (offset - d)));
  }
  return sum / (n * n);
}

double lag_bracket_half(int k, double phi) {
  const int n = 2 * k + 2;
  const double phi2 = phi * phi;
  double binom = 1.0;  // C(n, 2i)
  double power = 1.0;  // phi^(2i)
  double sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    sum += binom * power;
    binom *= static_cast<double>(n - 2 * i) * (n - 2 * i - 1) /
             (static_cast<double>(2 * i + 1) * (2 * i + 2));
    power *= phi2;
  }
  return sum;
}

namespace {

// sum_k w_k (-psi^2)^k B_k / (2k+1) with w_k = 1 / (k! (k+1)!) built by ratio.
double correlation_series(const SeriesParams& p, bool lagged) {
  p.validate();
  const double x = -p.psi * p.psi;
  double g = 1.0;  // x^k / (k! (k+1)!)
  double sum = 0.0;
  for (int k = 0; k < p.order; ++k) {
    if (k > 0) g *= x / (static_cast<double>(k) * (k + 1));
    const double bracket = lagged ? lag_bracket_half(k, p.phi) : 1.0;
    sum += g * bracket / (2.0 * k + 1.0);
  }
  return sum;
}

}  // namespace

double xi0_series(const SeriesParams& p) { return correlation_series(p, false); }

double xi_beta_series(const SeriesParams& p) { return correlation_series(p, true); }

double DopplerPolynomial::value(double x) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double DopplerPolynomial::derivative(double x) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * x + k * coeffs[k];
  return acc;
}

DopplerPolynomial poly_coeffs(double eta, double phi, int order) {
  if (order < 2) throw std::invalid_argument("poly_coeffs: order must be >= 2");
  if (!std::isfinite(eta)) throw std::invalid_argument("poly_coeffs: eta must be finite");
  if (!(phi >= 0.0)) throw std::invalid_argument("poly_coeffs: phi must be >= 0");

  DopplerPolynomial poly;
  poly.eta = eta;
  poly.phi = phi;
  poly.coeffs.resize(order);
  // c_k = (B_k - eta) / (k! (k+1)! (2k+1))
  double inv_fact = 1.0;  // 1 / (k! (k+1)!)
  for (int k = 0; k < order; ++k) {
    if (k > 0) inv_fact /= static_cast<double>(k) * (k + 1);
    poly.coeffs[k] = (lag_bracket_half(k, phi) - eta) * inv_fact / (2.0 * k + 1.0);
  }
  return poly;
}

void NewtonConfig::validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("NewtonConfig: tolerance must be > 0");
  if (max_iters < 1) throw std::invalid_argument("NewtonConfig: max_iters must be >= 1");
  if (init && !std::isfinite(*init))
    throw std::invalid_argument("NewtonConfig: init must be finite");
}

double default_initial_guess(const DopplerPolynomial& poly) {
  if (poly.coeffs.size() < 2 || poly.coeffs[1] == 0.0) return 0.0;
  return -poly.coeffs[0] / poly.coeffs[1];
}

NewtonResult newton_solve(const DopplerPolynomial& poly, const NewtonConfig& cfg) {
  cfg.validate();
  if (poly.coeffs.size() < 2) throw std::invalid_argument("newton_solve: polynomial order < 2");

  const double init = cfg.init.value_or(default_initial_guess(poly));
  const double bound = 10.0 * std::fabs(init) + 10.0;

  NewtonResult out;
  out.root = init;
  if (poly.value(init) == 0.0) {
    out.converged = true;
    return out;
  }
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double f = poly.value(out.root);
    const double df = poly.derivative(out.root);
    if (std::fabs(df) < 1e-30)
      throw NewtonError(NewtonError::Kind::singular_derivative,
                        "newton_solve: vanishing derivative at x = " + std::to_string(out.root));
    const double step = f / df;
    out.root -= step;
    out.iterations = it;
    if (!std::isfinite(out.root) || std::fabs(out.root) > bound)
      throw NewtonError(NewtonError::Kind::diverged, "newton_solve: iterate left the search bound");
    if (std::fabs(step) <= cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double doppler_from_root(double x_star, int tones, double sample_period_s) {
  if (x_star > 1e-12)
    throw std::domain_error("doppler_from_root: positive root, eta outside model range");
  const double x = std::min(x_star, 0.0);
  return std::sqrt(-x) / (std::numbers::pi * tones * sample_period_s);
}

DopplerInversion invert_eta(double eta, double phi, int order, const NewtonConfig& cfg,
                            int tones, double sample_period_s) {
  DopplerInversion out;
  if (eta >= 1.0) {
    // eta == 1 is the exact zero-Doppler root; only strictly larger is a clamp
    out.eta_clamped = eta > 1.0;
    return out;
  }
  const auto poly = poly_coeffs(eta, phi, order);
  const auto res = newton_solve(poly, cfg);
  out.root = res.root;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.fd_hz = doppler_from_root(res.root, tones, sample_period_s);
  return out;
}

}  // namespace dopplertrack
