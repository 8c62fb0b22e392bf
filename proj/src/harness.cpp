#include "dopplertrack/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "dopplertrack/frontend.hpp"

namespace dopplertrack {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double median_of(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - lo;
  if (frac == 0.0 || std::isinf(values[lo]) || std::isinf(values[hi])) return frac < 0.5 ? values[lo] : values[hi];
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::uint64_t trial_seed(const Scenario& s, int trial_index) {
  return mix_seed(mix_seed(s.master_seed, fnv1a(s.profile.name)),
                  static_cast<std::uint64_t>(trial_index));
}

long convergence_symbol(std::span<const DopplerEstimate> series, double fd_true,
                        const ConvergenceRule& rule) {
  if (!(fd_true > 0.0) || rule.window < 1 || series.size() < static_cast<std::size_t>(rule.window))
    return -1;
  const long count = static_cast<long>(series.size());
  std::vector<double> err(count);
  for (long i = 0; i < count; ++i) err[i] = std::fabs(series[i].fd_hat - fd_true) / fd_true;

  // below[i] is meaningful from i = window - 1 on
  std::vector<char> below(count, 0);
  std::vector<double> win;
  for (long i = rule.window - 1; i < count; ++i) {
    win.assign(err.begin() + (i - rule.window + 1), err.begin() + i + 1);
    below[i] = median_of(win) < rule.threshold;
  }
  for (long i = rule.window - 1; i < count; ++i) {
    if (!below[i]) continue;
    const long last = std::min(count - 1, i + rule.hold - 1);
    bool held = true;
    for (long k = i; k <= last && held; ++k) held = below[k];
    if (held) return i;
  }
  return -1;
}

TrialSummary summarize_trial(std::span<const DopplerEstimate> series, double fd_true) {
  TrialSummary s;
  std::vector<double> live;
  for (const auto& e : series) {
    if (e.has(kFlagWarmup)) ++s.warmup_count;
    else live.push_back(e.fd_hat);
    if (e.has(kFlagEtaClamped)) ++s.clamped_count;
    if (e.has(kFlagNotConverged)) ++s.not_converged_count;
  }
  s.final_fd = series.empty() ? 0.0 : series.back().fd_hat;
  s.median_fd = live.empty() ? 0.0 : median_of(live);
  s.norm_err = fd_true > 0.0 ? std::fabs(s.final_fd - fd_true) / fd_true : kNaN;
  s.convergence_symbol = convergence_symbol(series, fd_true);
  return s;
}

TrialResult run_trial(const Scenario& s, int trial_index) {
  s.validate();
  TrialResult r;
  r.scenario_id = s.id;
  r.trial = trial_index;
  try {
    const std::uint64_t seed = trial_seed(s, trial_index);
    const auto fading = make_fading(s.profile, s.fd_hz, mix_seed(seed, 1), s.oscillators);
    std::mt19937_64 noise(mix_seed(seed, 2));
    DopplerTracker tracker(s.tracker);

    const long symbols = s.symbol_count();
    r.series.reserve(symbols);
    for (long n = 0; n < symbols; ++n) {
      const auto cfr = time_avg_cfr(fading, s.geometry(), s.profile, n, s.avg_samples,
                                    s.delay_drift_ns_per_s);
      r.series.push_back(tracker.step(ls_observe(cfr, s.snr_db, noise, n)));
    }
    r.summary = summarize_trial(r.series, s.fd_hz);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

ScenarioSummary summarize_scenario(const Scenario& s, std::span<const TrialResult> trials) {
  ScenarioSummary out;
  out.scenario_id = s.id;
  out.profile = s.profile.name;
  out.fd_true = s.fd_hz;
  out.snr_db = s.snr_db;
  out.duration_ms = s.duration_ms;

  std::vector<double> finals;
  std::vector<double> conv;
  double err_sum = 0.0;
  for (const auto& t : trials) {
    ++out.trials;
    if (!t.ok()) {
      ++out.failed;
      continue;
    }
    finals.push_back(t.summary.final_fd);
    err_sum += t.summary.norm_err;
    conv.push_back(t.summary.convergence_symbol < 0 ? std::numeric_limits<double>::infinity()
                                                    : static_cast<double>(t.summary.convergence_symbol));
  }
  out.median_fd_hat = median_of(finals);
  out.p10_fd_hat = quantile(finals, 0.1);
  out.p90_fd_hat = quantile(finals, 0.9);
  out.mean_norm_err = finals.empty() ? kNaN : err_sum / finals.size();
  const double c = median_of(conv);
  out.convergence_symbol = std::isfinite(c) ? c : -1.0;
  return out;
}

GridResult run_grid(const std::vector<Scenario>& scenarios, int parallelism) {
  struct Task {
    std::size_t scenario;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    for (int t = 0; t < scenarios[i].trials; ++t) tasks.push_back({i, t});

  GridResult out;
  out.trials.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const auto& task = tasks[k];
      const Scenario& s = scenarios[task.scenario];
      try {
        out.trials[k] = run_trial(s, task.trial);
      } catch (const std::exception& e) {
        out.trials[k].scenario_id = s.id;
        out.trials[k].trial = task.trial;
        out.trials[k].error = e.what();
      }
    }
  };

  const int threads = std::clamp<int>(parallelism, 1, std::max<int>(1, static_cast<int>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::size_t offset = 0;
  for (const auto& s : scenarios) {
    const std::span<const TrialResult> slice(out.trials.data() + offset, s.trials);
    out.summaries.push_back(summarize_scenario(s, slice));
    offset += s.trials;
  }
  return out;
}

void write_symbol_csv(std::ostream& out, std::span<const TrialResult> trials) {
  out << "scenario_id,trial,n,fd_hat_hz,eta_hat,L_hat,sigma_n2_hat,newton_iters,flags\n";
  for (const auto& t : trials)
    for (const auto& e : t.series)
      out << t.scenario_id << ',' << t.trial << ',' << e.n << ',' << format_number(e.fd_hat) << ','
          << format_number(e.eta_hat) << ',' << e.L_hat << ',' << format_number(e.sigma_n2_hat) << ','
          << e.newton_iters << ',' << flags_to_string(e.flags) << '\n';
}

void write_summary_csv(std::ostream& out, std::span<const ScenarioSummary> summaries) {
  out << "scenario_id,profile,fd_true,snr_db,duration_ms,trials,failed,median_fd_hat,mean_norm_err,"
         "p10_fd_hat,p90_fd_hat,convergence_symbol\n";
  for (const auto& s : summaries)
    out << s.scenario_id << ',' << s.profile << ',' << format_number(s.fd_true) << ','
        << format_number(s.snr_db) << ',' << format_number(s.duration_ms) << ',' << s.trials << ','
        << s.failed << ',' << format_number(s.median_fd_hat) << ',' << format_number(s.mean_norm_err)
        << ',' << format_number(s.p10_fd_hat) << ',' << format_number(s.p90_fd_hat) << ','
        << format_number(s.convergence_symbol) << '\n';
}

void emit_csv(const GridResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    return f;
  };
  auto symbols = open("symbols.csv");
  write_symbol_csv(symbols, result.trials);
  auto summary = open("summary.csv");
  write_summary_csv(summary, result.summaries);
  if (!symbols.flush() || !summary.flush())
    throw std::runtime_error("failed writing CSV output in '" + dir.string() + "'");
}

}  // namespace dopplertrack
