#include "dopplertrack/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace dopplertrack {

using nlohmann::json;

namespace {

constexpr const char* kPresetEva = R"({
  "name": "eva",
  "profiles": ["eva"],
  "fd_hz": [400],
  "snr_db": [15],
  "duration_ms": [40],
  "trials": 20
})";

constexpr const char* kPresetEtu = R"({
  "name": "etu",
  "profiles": ["etu"],
  "fd_hz": [400],
  "snr_db": [15],
  "duration_ms": [40],
  "trials": 20
})";

constexpr const char* kPresetFig1 = R"({
  "name": "paper-fig1",
  "profiles": ["eva", "etu"],
  "fd_hz": [200, 400, 600],
  "snr_db": [0, 5, 10, 15, 20, 25, 30],
  "duration_ms": [20, 40],
  "trials": 20
})";

constexpr const char* kPresetFig2 = R"({
  "name": "paper-fig2",
  "profiles": ["eva", "etu"],
  "fd_hz": [200, 400, 600],
  "snr_db": [15],
  "duration_ms": [200],
  "trials": 20
})";

template <class T>
std::vector<T> as_list(const json& j) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(e.get<T>());
  } else {
    out.push_back(j.get<T>());
  }
  return out;
}

double as_snr(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("snr_db: unsupported string value '" + s + "'");
  }
  return j.get<double>();
}

ChannelProfile parse_profile(const json& j) {
  if (j.is_string()) return ChannelProfile::preset(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("profile entries must be a preset name or an object");
  return ChannelProfile::from_db(j.value("name", std::string("custom")),
                                 j.at("delays_ns").get<std::vector<double>>(),
                                 j.at("powers_db").get<std::vector<double>>());
}

void apply_geometry(const json& j, OfdmGeometry& g) {
  g.tones = j.value("tones", g.tones);
  g.cp_length = j.value("cp_length", g.cp_length);
  g.pilots = j.value("pilots", g.pilots);
  if (j.contains("bandwidth_hz") && j.contains("sample_period_ns"))
    throw ConfigError("geometry: give either bandwidth_hz or sample_period_ns, not both");
  if (j.contains("bandwidth_hz")) g.sample_period_s = 1.0 / j.at("bandwidth_hz").get<double>();
  if (j.contains("sample_period_ns")) g.sample_period_s = j.at("sample_period_ns").get<double>() * 1e-9;
}

void apply_tracker(const json& j, TrackerConfig& t) {
  t.alpha = j.value("alpha", t.alpha);
  t.lag = j.value("lag", t.lag);
  t.max_rank = j.value("max_rank", t.max_rank);
  t.series_order = j.value("series_order", t.series_order);
  t.warmup_symbols = j.value("warmup_symbols", t.warmup_symbols);
  if (j.contains("noise_offset")) {
    const auto v = j.at("noise_offset").get<std::string>();
    if (v == "pilot") t.noise_offset = NoiseOffset::pilot;
    else if (v == "tracked") t.noise_offset = NoiseOffset::tracked;
    else throw ConfigError("tracker.noise_offset must be 'pilot' or 'tracked'");
  }
  if (j.contains("newton")) {
    const auto& n = j.at("newton");
    t.newton.tolerance = n.value("tolerance", t.newton.tolerance);
    t.newton.max_iters = n.value("max_iters", t.newton.max_iters);
    if (n.contains("init")) t.newton.init = n.at("init").get<double>();
  }
}

RunConfig expand(const json& doc) {
  static const std::vector<std::string> known = {
      "name", "profiles", "profile", "fd_hz", "snr_db", "duration_ms", "trials", "master_seed",
      "delay_drift_ns_per_s", "geometry", "tracker", "channel"};
  for (const auto& [key, _] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
  if (doc.contains("profiles") && doc.contains("profile"))
    throw ConfigError("give either 'profile' or 'profiles', not both");

  Scenario base;
  base.trials = doc.value("trials", base.trials);
  base.master_seed = doc.value("master_seed", base.master_seed);
  base.delay_drift_ns_per_s = doc.value("delay_drift_ns_per_s", base.delay_drift_ns_per_s);
  if (doc.contains("geometry")) apply_geometry(doc.at("geometry"), base.tracker.geometry);
  if (doc.contains("tracker")) apply_tracker(doc.at("tracker"), base.tracker);
  if (doc.contains("channel")) {
    base.oscillators = doc.at("channel").value("oscillators", base.oscillators);
    base.avg_samples = doc.at("channel").value("avg_samples", base.avg_samples);
  }

  const json& pj = doc.contains("profiles") ? doc.at("profiles")
                   : doc.contains("profile") ? doc.at("profile")
                                             : json("eva");
  std::vector<ChannelProfile> profiles;
  if (pj.is_array()) {
    for (const auto& e : pj) profiles.push_back(parse_profile(e));
  } else {
    profiles.push_back(parse_profile(pj));
  }
  const auto fds = as_list<double>(doc.value("fd_hz", json(base.fd_hz)));
  const auto durations = as_list<double>(doc.value("duration_ms", json(base.duration_ms)));
  std::vector<double> snrs;
  const json sj = doc.value("snr_db", json(base.snr_db));
  if (sj.is_array()) {
    for (const auto& e : sj) snrs.push_back(as_snr(e));
  } else {
    snrs.push_back(as_snr(sj));
  }

  RunConfig rc;
  rc.name = doc.value("name", std::string("custom"));
  for (const auto& prof : profiles)
    for (double fd : fds)
      for (double snr : snrs)
        for (double dur : durations) {
          Scenario s = base;
          s.profile = prof;
          s.fd_hz = fd;
          s.snr_db = snr;
          s.duration_ms = dur;
          s.id = make_scenario_id(s);
          s.validate();
          rc.scenarios.push_back(std::move(s));
        }
  if (rc.scenarios.empty()) throw ConfigError("config expands to zero scenarios");

  std::stable_sort(rc.scenarios.begin(), rc.scenarios.end(), [](const Scenario& a, const Scenario& b) {
    return std::tie(a.profile.name, a.fd_hz, a.snr_db, a.duration_ms) <
           std::tie(b.profile.name, b.fd_hz, b.snr_db, b.duration_ms);
  });
  for (std::size_t i = 1; i < rc.scenarios.size(); ++i)
    if (rc.scenarios[i].id == rc.scenarios[i - 1].id)
      throw ConfigError("duplicate scenario '" + rc.scenarios[i].id + "'");
  return rc;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string make_scenario_id(const Scenario& s) {
  return s.profile.name + "_fd" + format_number(s.fd_hz) + "_snr" + format_number(s.snr_db) +
         "_dur" + format_number(s.duration_ms);
}

long Scenario::symbol_count() const {
  // guard against 40 ms / 96 us landing a hair below an integer
  return static_cast<long>(std::floor(duration_ms * 1e-3 / geometry().symbol_duration() + 1e-9));
}

void Scenario::validate() const {
  try {
    tracker.validate();
    geometry().validate_against(profile);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(id + ": " + e.what());
  }
  if (!(fd_hz >= 0.0) || !std::isfinite(fd_hz)) throw ConfigError(id + ": fd_hz must be finite and >= 0");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw ConfigError(id + ": snr_db must be a number or +inf");
  if (!(duration_ms > 0.0)) throw ConfigError(id + ": duration_ms must be > 0");
  if (trials < 1) throw ConfigError(id + ": trials must be >= 1");
  if (!std::isfinite(delay_drift_ns_per_s)) throw ConfigError(id + ": delay drift must be finite");
  if (oscillators < 16) throw ConfigError(id + ": channel.oscillators must be >= 16");
  if (avg_samples < 1 || avg_samples > geometry().tones)
    throw ConfigError(id + ": channel.avg_samples must lie in [1, N]");
  if (symbol_count() < 1) throw ConfigError(id + ": duration shorter than one OFDM symbol");
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  const double norm = fd_hz * geometry().symbol_duration();
  if (norm > 0.1)
    out.push_back(id + ": f_d T_s = " + format_number(norm) +
                  " exceeds 0.1; the diagonal-channel approximation degrades");
  return out;
}

std::vector<std::string> preset_names() { return {"eva", "etu", "paper-fig1", "paper-fig2"}; }

std::string preset_text(const std::string& name) {
  if (name == "eva") return kPresetEva;
  if (name == "etu") return kPresetEtu;
  if (name == "paper-fig1") return kPresetFig1;
  if (name == "paper-fig2") return kPresetFig2;
  throw ConfigError("unknown preset '" + name + "'");
}

RunConfig parse_config(std::string_view json_text, const std::optional<std::string>& base_preset) {
  try {
    json doc = base_preset ? json::parse(preset_text(*base_preset)) : json::object();
    if (!json_text.empty()) {
      const json user = json::parse(json_text);
      if (!user.is_object()) throw ConfigError("config root must be a JSON object");
      doc.merge_patch(user);
    }
    return expand(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::optional<std::string>& path, const std::optional<std::string>& preset,
                      std::optional<std::uint64_t> seed_override) {
  if (!path && !preset) throw ConfigError("need --config and/or --preset");
  std::string text;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file '" + *path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  RunConfig rc = parse_config(text, preset);
  if (seed_override)
    for (auto& s : rc.scenarios) s.master_seed = *seed_override;
  return rc;
}

}  // namespace dopplertrack
