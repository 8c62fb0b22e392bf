#pragma once

// Receiver pilot extraction + LS estimation. With unit-modulus pilots the LS
// estimate is the true time-averaged CFR plus white CN(0, sigma_n^2) noise,
// so the pilot symbols themselves are never materialized.

#include <limits>
#include <random>
#include <span>

#include "dopplertrack/channel.hpp"

namespace dopplertrack {

struct PilotSnapshot {
  long index = 0;
  CVector values;
  double snr_db = std::numeric_limits<double>::infinity();
};

/// sigma_n^2 = 10^(-snr/10) against unit total channel power; +inf -> 0.
double noise_variance(double snr_db);

PilotSnapshot ls_observe(std::span<const cplx> true_cfr, double snr_db, std::mt19937_64& rng,
                         long index = 0);

}  // namespace dopplertrack
