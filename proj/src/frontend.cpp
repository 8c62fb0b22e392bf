#include "dopplertrack/frontend.hpp"

#include <cmath>
#include <stdexcept>

namespace dopplertrack {

double noise_variance(double snr_db) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("snr_db must be a number below +inf or +inf itself");
  if (std::isinf(snr_db)) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

PilotSnapshot ls_observe(std::span<const cplx> true_cfr, double snr_db, std::mt19937_64& rng,
                         long index) {
  PilotSnapshot snap;
  snap.index = index;
  snap.snr_db = snr_db;
  snap.values.assign(true_cfr.begin(), true_cfr.end());

  const double var = noise_variance(snr_db);
  if (var == 0.0) return snap;
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * var));
  for (cplx& v : snap.values) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += cplx(re, im);
  }
  return snap;
}

}  // namespace dopplertrack
