#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "mstlab/config_io.hpp"
#include "mstlab/dynamics.hpp"
#include "mstlab/errors.hpp"
#include "mstlab/euclidean.hpp"
#include "mstlab/geometry.hpp"
#include "mstlab/lattice.hpp"
#include "mstlab/models.hpp"
#include "mstlab/mst.hpp"
#include "mstlab/parallel.hpp"
#include "mstlab/percolation.hpp"
#include "mstlab/rng.hpp"
#include "mstlab/stats.hpp"
#include "mstlab/stein.hpp"
#include "mstlab/version.hpp"

namespace mstlab {

enum class ExperimentKind {
  clt_poisson,
  clt_lattice,
  arm_decay,
  variance_scaling,
  stein_bound_run
};

inline const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::clt_poisson: return "clt_poisson";
    case ExperimentKind::clt_lattice: return "clt_lattice";
    case ExperimentKind::arm_decay: return "arm_decay";
    case ExperimentKind::variance_scaling: return "variance_scaling";
    case ExperimentKind::stein_bound_run: return "stein_bound";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "clt_poisson") return ExperimentKind::clt_poisson;
  if (s == "clt_lattice") return ExperimentKind::clt_lattice;
  if (s == "arm_decay") return ExperimentKind::arm_decay;
  if (s == "variance_scaling") return ExperimentKind::variance_scaling;
  if (s == "stein_bound") return ExperimentKind::stein_bound_run;
  throw config_error("unknown experiment kind: " + s);
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::clt_poisson;
  int dimension = 2;
  std::vector<int> n_grid;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::string output_prefix;

  double intensity = 1.0;                  // continuum kinds
  WeightLaw law = WeightLaw::uniform01();  // lattice kinds
  std::string family;                      // arm_decay / variance_scaling / stein_bound

  std::vector<double> param_grid;  // arm_decay: r (continuum) or p (lattice)
  int arm_k = 2;
  ArmVariant arm_variant = ArmVariant::touch;
  std::string lattice_site = "edge";  // "edge" | "cube"
  int site_radius = 1;                // cube-site inner radius
  int inner_reps = 64;                // stein_bound
  double block_side = 1.5;            // stein_bound poisson target cell half-width
  int bootstrap = 200;                // clt confidence intervals

  bool allow_large = false;  // set from the command line, not the file
};

namespace detail {

inline void check_keys(const nlohmann::json& j,
                       const std::vector<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw config_error(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw config_error(where + ": unknown key \"" + it.key() + "\"");
  }
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("field \"" + key + "\": " + e.what());
  }
}

template <typename T>
T require_field(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw config_error("missing required field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error("field \"" + key + "\": " + e.what());
  }
}

inline WeightLaw parse_law(const nlohmann::json& j) {
  check_keys(j, {"name", "rate", "a", "b", "q", "values", "probs"}, "law");
  const std::string name = require_field<std::string>(j, "name");
  try {
    if (name == "uniform01") {
      check_keys(j, {"name"}, "law(uniform01)");
      return WeightLaw::uniform01();
    }
    if (name == "exponential") {
      check_keys(j, {"name", "rate"}, "law(exponential)");
      return WeightLaw::exponential(require_field<double>(j, "rate"));
    }
    if (name == "two_point") {
      check_keys(j, {"name", "a", "b", "q"}, "law(two_point)");
      return WeightLaw::two_point(require_field<double>(j, "a"),
                                  require_field<double>(j, "b"),
                                  require_field<double>(j, "q"));
    }
    if (name == "table") {
      check_keys(j, {"name", "values", "probs"}, "law(table)");
      return WeightLaw::table(require_field<std::vector<double>>(j, "values"),
                              require_field<std::vector<double>>(j, "probs"));
    }
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("law: ") + e.what());
  }
  throw config_error("law: unknown name \"" + name + "\"");
}

inline nlohmann::json law_to_json(const WeightLaw& law) {
  nlohmann::json j;
  j["name"] = law.name();
  switch (law.kind()) {
    case WeightLaw::Kind::uniform01:
      break;
    case WeightLaw::Kind::exponential:
      j["rate"] = law.rate();
      break;
    case WeightLaw::Kind::two_point:
      j["a"] = law.low();
      j["b"] = law.high();
      j["q"] = law.high_prob();
      break;
    case WeightLaw::Kind::table: {
      j["values"] = law.values();
      std::vector<double> probs(law.cumulative().size());
      double prev = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = law.cumulative()[i] - prev;
        prev = law.cumulative()[i];
      }
      j["probs"] = probs;
      break;
    }
  }
  return j;
}

inline std::string format_sig10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline nlohmann::json json_num(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace detail

// Parses and validates a single-experiment JSON config.  Unknown keys are
// rejected outright so typos fail fast instead of silently using defaults.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::get_field;
  using detail::require_field;

  ExperimentConfig cfg;
  cfg.kind = parse_kind(require_field<std::string>(j, "kind"));

  std::vector<std::string> allowed = {"kind",       "dimension", "n_grid",
                                      "replicates", "seed",      "output_prefix"};
  switch (cfg.kind) {
    case ExperimentKind::clt_poisson:
      allowed.insert(allowed.end(), {"intensity", "bootstrap"});
      break;
    case ExperimentKind::clt_lattice:
      allowed.insert(allowed.end(), {"law", "bootstrap"});
      break;
    case ExperimentKind::arm_decay:
      allowed.insert(allowed.end(),
                     {"family", "param_grid", "intensity", "law", "arm"});
      break;
    case ExperimentKind::variance_scaling:
      allowed.insert(allowed.end(), {"family", "intensity", "law"});
      break;
    case ExperimentKind::stein_bound_run:
      allowed.insert(allowed.end(),
                     {"family", "intensity", "law", "inner_reps", "block_side"});
      break;
  }
  check_keys(j, allowed, "config");

  cfg.dimension = get_field<int>(j, "dimension", 2);
  cfg.n_grid = require_field<std::vector<int>>(j, "n_grid");
  cfg.replicates = require_field<int>(j, "replicates");
  cfg.seed = get_field<std::uint64_t>(j, "seed", 0);
  cfg.output_prefix = get_field<std::string>(j, "output_prefix", kind_name(cfg.kind));
  cfg.intensity = get_field<double>(j, "intensity", 1.0);
  if (j.contains("law")) cfg.law = detail::parse_law(j.at("law"));
  cfg.family = get_field<std::string>(j, "family", "");
  cfg.param_grid = get_field<std::vector<double>>(j, "param_grid", {});
  cfg.inner_reps = get_field<int>(j, "inner_reps", 64);
  cfg.block_side = get_field<double>(j, "block_side", 1.5);
  cfg.bootstrap = get_field<int>(j, "bootstrap", 200);

  if (j.contains("arm")) {
    const nlohmann::json& a = j.at("arm");
    check_keys(a, {"k", "variant", "site", "site_radius"}, "arm");
    cfg.arm_k = get_field<int>(a, "k", 2);
    const std::string variant = get_field<std::string>(a, "variant", "touch");
    if (variant == "touch")
      cfg.arm_variant = ArmVariant::touch;
    else if (variant == "reach")
      cfg.arm_variant = ArmVariant::reach;
    else
      throw config_error("arm.variant must be \"touch\" or \"reach\"");
    cfg.lattice_site = get_field<std::string>(a, "site", "edge");
    if (cfg.lattice_site != "edge" && cfg.lattice_site != "cube")
      throw config_error("arm.site must be \"edge\" or \"cube\"");
    cfg.site_radius = get_field<int>(a, "site_radius", 1);
  }
  return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

// Scale caps: desk-size runs by default so a config typo cannot burn hours.
inline void validate_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.dimension < 1) throw config_error("dimension must be >= 1");
  if (cfg.n_grid.empty()) throw config_error("n_grid must be non-empty");
  for (int n : cfg.n_grid)
    if (n < 1) throw config_error("n_grid entries must be >= 1");
  if (cfg.replicates < 1) throw config_error("replicates must be >= 1");

  const bool continuum =
      cfg.kind == ExperimentKind::clt_poisson ||
      ((cfg.kind == ExperimentKind::arm_decay) && cfg.family == "continuum") ||
      ((cfg.kind == ExperimentKind::variance_scaling ||
        cfg.kind == ExperimentKind::stein_bound_run) &&
       cfg.family == "poisson");
  const int n_max = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
  if (!cfg.allow_large) {
    if (continuum && n_max > 32)
      throw config_error("continuum n > 32 requires --allow-large");
    if (!continuum && n_max > 64)
      throw config_error("lattice n > 64 requires --allow-large");
    if (cfg.replicates > 10000)
      throw config_error("replicates > 10000 requires --allow-large");
  }
  if (!(cfg.intensity >= 0.0) || !std::isfinite(cfg.intensity))
    throw config_error("intensity must be finite and >= 0");

  switch (cfg.kind) {
    case ExperimentKind::clt_poisson:
    case ExperimentKind::clt_lattice:
      if (cfg.bootstrap < 1) throw config_error("bootstrap must be >= 1");
      break;
    case ExperimentKind::arm_decay: {
      if (cfg.family != "continuum" && cfg.family != "lattice")
        throw config_error("arm_decay family must be \"continuum\" or \"lattice\"");
      if (cfg.param_grid.empty()) throw config_error("param_grid must be non-empty");
      for (double v : cfg.param_grid) {
        if (cfg.family == "continuum" && !(v > 0.0))
          throw config_error("continuum param_grid entries (r) must be > 0");
        if (cfg.family == "lattice" && !(v >= 0.0 && v <= 1.0))
          throw config_error("lattice param_grid entries (p) must lie in [0,1]");
      }
      if (cfg.arm_k < 1) throw config_error("arm.k must be >= 1");
      if (cfg.lattice_site == "cube") {
        if (cfg.site_radius < 0) throw config_error("arm.site_radius must be >= 0");
        for (int n : cfg.n_grid)
          if (cfg.site_radius >= n)
            throw config_error("arm.site_radius must be smaller than every n");
      }
      break;
    }
    case ExperimentKind::variance_scaling:
      if (cfg.family != "poisson" && cfg.family != "lattice")
        throw config_error("variance_scaling family must be \"poisson\" or \"lattice\"");
      break;
    case ExperimentKind::stein_bound_run: {
      if (cfg.family != "poisson" && cfg.family != "lattice")
        throw config_error("stein_bound family must be \"poisson\" or \"lattice\"");
      if (cfg.inner_reps < 1) throw config_error("inner_reps must be >= 1");
      if (!cfg.allow_large && cfg.inner_reps > 10000)
        throw config_error("inner_reps > 10000 requires --allow-large");
      if (cfg.replicates < 2) throw config_error("stein_bound needs replicates >= 2");
      if (cfg.family == "poisson") {
        if (!(cfg.block_side >= 1.0 && cfg.block_side <= 2.0))
          throw config_error("block_side must lie in [1,2]");
        for (int n : cfg.n_grid) {
          const int k = std::max(0L, std::lround((double(n) / cfg.block_side - 1.0) / 2.0));
          const double s = double(n) / double(2 * k + 1);
          if (!(s >= 1.0 && s <= 2.0))
            throw config_error("no block decomposition of n=" + std::to_string(n) +
                               " with cell half-width in [1,2]");
        }
      }
      break;
    }
  }
}

// Canonical JSON image of the effective config (defaults filled, CLI seed
// applied), used for hashing and echoed into the summary.
inline nlohmann::json canonical_config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = kind_name(cfg.kind);
  j["dimension"] = cfg.dimension;
  j["n_grid"] = cfg.n_grid;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["output_prefix"] = cfg.output_prefix;
  switch (cfg.kind) {
    case ExperimentKind::clt_poisson:
      j["intensity"] = cfg.intensity;
      j["bootstrap"] = cfg.bootstrap;
      break;
    case ExperimentKind::clt_lattice:
      j["law"] = detail::law_to_json(cfg.law);
      j["bootstrap"] = cfg.bootstrap;
      break;
    case ExperimentKind::arm_decay:
      j["family"] = cfg.family;
      j["param_grid"] = cfg.param_grid;
      if (cfg.family == "continuum") j["intensity"] = cfg.intensity;
      if (cfg.family == "lattice") j["law"] = detail::law_to_json(cfg.law);
      j["arm"] = {{"k", cfg.arm_k},
                  {"variant", cfg.arm_variant == ArmVariant::touch ? "touch" : "reach"},
                  {"site", cfg.lattice_site},
                  {"site_radius", cfg.site_radius}};
      break;
    case ExperimentKind::variance_scaling:
      j["family"] = cfg.family;
      if (cfg.family == "poisson") j["intensity"] = cfg.intensity;
      if (cfg.family == "lattice") j["law"] = detail::law_to_json(cfg.law);
      break;
    case ExperimentKind::stein_bound_run:
      j["family"] = cfg.family;
      j["inner_reps"] = cfg.inner_reps;
      if (cfg.family == "poisson") {
        j["intensity"] = cfg.intensity;
        j["block_side"] = cfg.block_side;
      }
      if (cfg.family == "lattice") j["law"] = detail::law_to_json(cfg.law);
      break;
  }
  return j;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = canonical_config_json(cfg).dump();  // keys sorted
  std::uint64_t h = 0xcbf29ce484222325ull;                     // FNV-1a 64
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Optional on-disk cache for sampled configurations.

inline std::optional<std::string> cache_dir_from_env() {
  const char* dir = std::getenv("MSTLAB_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::string(dir);
}

inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

// Poisson draw with optional disk cache; the filename keys both the stream
// and the sampling parameters, and an unreadable or mismatched file is
// regenerated rather than trusted.
inline Configuration draw_poisson_cached(const Box& domain, double intensity,
                                         Rng stream,
                                         const std::optional<std::string>& cache) {
  if (!cache) return sample_poisson(domain, intensity, stream);
  std::uint64_t aux = 0xcbf29ce484222325ull;
  auto fold = [&aux](double v) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      aux ^= (bits >> (8 * i)) & 0xffu;
      aux *= 0x100000001b3ull;
    }
  };
  fold(double(domain.center.dim()));
  for (double c : domain.center.x) fold(c);
  fold(domain.half_width);
  fold(intensity);
  char name[80];
  std::snprintf(name, sizeof name, "poisson_%016llx_%016llx.cfg",
                static_cast<unsigned long long>(stream.key()),
                static_cast<unsigned long long>(aux));
  const std::string path = *cache + "/" + name;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      try {
        Configuration cfg = read_configuration(in);
        if (cfg.domain.center.x == domain.center.x &&
            cfg.domain.half_width == domain.half_width)
          return cfg;
      } catch (const std::exception&) {
        // fall through: regenerate and overwrite
      }
    }
  }
  Configuration cfg = sample_poisson(domain, intensity, stream);
  std::ostringstream out;
  write_configuration(out, cfg);
  write_file_atomic(path, out.str());
  return cfg;
}

inline Box origin_box(int dim, double half_width) {
  Point c;
  c.x.assign(std::size_t(dim), 0.0);
  return Box{c, half_width};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Runs and artifacts.

struct RunArtifacts {
  std::string csv;  // empty when the experiment emits JSON only
  nlohmann::json summary;
  std::string csv_name;
  std::string json_name;
};

namespace detail {

// One M_n draw per replicate, deterministic in (seed, kind, n index, rep).
inline std::vector<double> draw_mst_weights(const ExperimentConfig& cfg, int n,
                                            std::size_t ni, bool poisson_family,
                                            int threads) {
  const Rng root = Rng(cfg.seed).derive(std::uint64_t(cfg.kind));
  const auto cache = cache_dir_from_env();
  std::vector<double> values(std::size_t(cfg.replicates));
  parallel_for(std::size_t(cfg.replicates), threads, [&](std::size_t rep) {
    Rng stream = root.derive(ni, rep);
    if (poisson_family) {
      const Configuration c =
          draw_poisson_cached(origin_box(cfg.dimension, double(n)), cfg.intensity,
                              stream, cache);
      values[rep] = euclidean_mst(c.points).total_weight();
    } else {
      const LatticeBox box =
          build_lattice_box(n, cfg.dimension, cfg.law, stream.key());
      values[rep] = kruskal_mst(box.to_graph()).total_weight();
    }
  });
  return values;
}

struct CltRow {
  int n = 0;
  int replicates = 0;
  double mean = 0.0, sd = 0.0;
  double dhat = 0.0, dhat_lo = 0.0, dhat_hi = 0.0;
  double what = 0.0, what_lo = 0.0, what_hi = 0.0;
};

}  // namespace detail

// Central-limit study: per n, draw M_n replicates, standardize by the sample
// mean and standard deviation, and measure the distance of the standardized
// empirical law to the standard normal, with bootstrap percentile intervals.
inline RunArtifacts run_clt(const ExperimentConfig& cfg, int threads = 1) {
  const bool poisson_family = cfg.kind == ExperimentKind::clt_poisson;
  std::vector<detail::CltRow> rows;
  const Rng boot_root = Rng(cfg.seed).derive(std::uint64_t(cfg.kind), 0x626f6f74ull);

  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const int n = cfg.n_grid[ni];
    const std::vector<double> values =
        detail::draw_mst_weights(cfg, n, ni, poisson_family, threads);
    Moments m;
    for (double v : values) m.add(v);
    const double mu = m.mean, sd = m.sd();
    if (!(sd > 0.0))
      throw degenerate_statistic_error("run_clt: M_n has zero sample deviation");
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mu) / sd;

    detail::CltRow row;
    row.n = n;
    row.replicates = cfg.replicates;
    row.mean = mu;
    row.sd = sd;
    row.dhat = kolmogorov_distance(z);
    row.what = wasserstein_distance(z);

    std::vector<double> dboot(std::size_t(cfg.bootstrap));
    std::vector<double> wboot(std::size_t(cfg.bootstrap));
    parallel_for(std::size_t(cfg.bootstrap), threads, [&](std::size_t b) {
      Rng stream = boot_root.derive(ni, b);
      std::vector<double> res(values.size());
      Moments mb;
      for (std::size_t i = 0; i < values.size(); ++i) {
        res[i] = values[stream.uniform_int(values.size())];
        mb.add(res[i]);
      }
      const double sb = mb.sd();
      if (!(sb > 0.0)) {
        dboot[b] = row.dhat;
        wboot[b] = row.what;
        return;
      }
      for (double& v : res) v = (v - mb.mean) / sb;
      dboot[b] = kolmogorov_distance(res);
      wboot[b] = wasserstein_distance(res);
    });
    auto percentile_pair = [](std::vector<double> xs) {
      std::sort(xs.begin(), xs.end());
      const double m1 = double(xs.size()) - 1.0;
      const std::size_t lo = std::size_t(std::floor(0.025 * m1));
      const std::size_t hi = std::size_t(std::ceil(0.975 * m1));
      return std::pair<double, double>(xs[lo], xs[hi]);
    };
    std::tie(row.dhat_lo, row.dhat_hi) = percentile_pair(dboot);
    std::tie(row.what_lo, row.what_hi) = percentile_pair(wboot);
    rows.push_back(row);
  }

  RunArtifacts art;
  std::ostringstream csv;
  csv << "n,replicates,mean,sd,dhat,dhat_ci_lo,dhat_ci_hi,what,what_ci_lo,what_ci_hi\n";
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rows) {
    using detail::format_sig10;
    csv << r.n << ',' << r.replicates << ',' << format_sig10(r.mean) << ','
        << format_sig10(r.sd) << ',' << format_sig10(r.dhat) << ','
        << format_sig10(r.dhat_lo) << ',' << format_sig10(r.dhat_hi) << ','
        << format_sig10(r.what) << ',' << format_sig10(r.what_lo) << ','
        << format_sig10(r.what_hi) << '\n';
    jrows.push_back({{"n", r.n},
                     {"replicates", r.replicates},
                     {"mean", r.mean},
                     {"sd", r.sd},
                     {"dhat", r.dhat},
                     {"dhat_ci_lo", r.dhat_lo},
                     {"dhat_ci_hi", r.dhat_hi},
                     {"what", r.what},
                     {"what_ci_lo", r.what_lo},
                     {"what_ci_hi", r.what_hi}});
  }
  art.csv = csv.str();
  art.summary["rows"] = jrows;
  return art;
}

// Arm-probability decay over an (n, parameter) grid, with a weighted
// least-squares fit of log phat against log n per parameter value.
inline RunArtifacts run_arm_decay(const ExperimentConfig& cfg, int threads = 1) {
  std::function<bool(int, double, Rng&)> runner;
  if (cfg.family == "continuum") {
    runner = [&cfg](int n, double r, Rng& rng) {
      const Configuration c = sample_poisson(
          detail::origin_box(cfg.dimension, double(n)), cfg.intensity, rng);
      ArmQuery q;
      q.inner = ContactSet{detail::origin_box(cfg.dimension, 1.0), 0.0, {}};
      q.outer = detail::origin_box(cfg.dimension, double(n));
      q.r = r;
      q.k = cfg.arm_k;
      q.variant = cfg.arm_variant;
      return arm_event(c, q);
    };
  } else {
    // Identify the structural index of the site edge (origin -> origin+e1)
    // once per n; the enumeration is weight-independent.
    std::vector<std::size_t> edge_at_n(cfg.n_grid.size(), 0);
    if (cfg.lattice_site == "edge") {
      for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
        const LatticeBox probe =
            build_lattice_box(cfg.n_grid[ni], cfg.dimension, cfg.law, 0);
        std::vector<int> o(std::size_t(cfg.dimension), 0), e1 = o;
        e1[0] = 1;
        const int u = probe.vertex_id(o), v = probe.vertex_id(e1);
        bool found = false;
        for (std::size_t j = 0; j < probe.edges.size(); ++j)
          if (probe.edges[j].u == u && probe.edges[j].v == v) {
            edge_at_n[ni] = j;
            found = true;
            break;
          }
        if (!found) throw std::logic_error("run_arm_decay: site edge not found");
      }
    }
    const std::vector<int> grid = cfg.n_grid;
    runner = [&cfg, edge_at_n, grid](int n, double p, Rng& rng) {
      const LatticeBox box =
          build_lattice_box(n, cfg.dimension, cfg.law, rng.derive(0).key());
      LatticeTwoArmQuery q;
      q.outer = centered_ibox(cfg.dimension, n);
      q.p = p;
      if (cfg.lattice_site == "edge") {
        const std::size_t ni =
            std::size_t(std::find(grid.begin(), grid.end(), n) - grid.begin());
        q.site.edge = edge_at_n[ni];
      } else {
        q.site.cube = centered_ibox(cfg.dimension, cfg.site_radius);
      }
      return lattice_two_arm(box, q);
    };
  }

  const std::uint64_t arm_seed =
      Rng(cfg.seed).derive(std::uint64_t(cfg.kind)).key();
  const std::vector<ArmRow> rows = estimate_arm_probability(
      runner, cfg.n_grid, cfg.param_grid, cfg.replicates, arm_seed, threads);

  RunArtifacts art;
  std::ostringstream csv;
  csv << "n,param,replicates,successes,phat,ci_lo,ci_hi\n";
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rows) {
    using detail::format_sig10;
    csv << r.n << ',' << format_sig10(r.param) << ',' << r.replicates << ','
        << r.successes << ',' << format_sig10(r.phat) << ','
        << format_sig10(r.ci_lo) << ',' << format_sig10(r.ci_hi) << '\n';
    jrows.push_back({{"n", r.n},
                     {"param", r.param},
                     {"replicates", r.replicates},
                     {"successes", r.successes},
                     {"phat", r.phat},
                     {"ci_lo", r.ci_lo},
                     {"ci_hi", r.ci_hi}});
  }
  art.csv = csv.str();
  art.summary["rows"] = jrows;

  // Per-parameter decay fit: log phat = alpha - beta * log n on rows with
  // phat > 0, weighted by the delta-method inverse variance of log phat
  // (computed from a half-success-adjusted phat so saturated rows stay
  // finite).
  nlohmann::json fits = nlohmann::json::array();
  for (double param : cfg.param_grid) {
    std::vector<double> x, y, w;
    for (const auto& r : rows) {
      if (r.param != param || !(r.phat > 0.0)) continue;
      const double ptilde =
          (double(r.successes) + 0.5) / (double(r.replicates) + 1.0);
      x.push_back(std::log(double(r.n)));
      y.push_back(std::log(r.phat));
      w.push_back(double(r.replicates) * ptilde / (1.0 - ptilde));
    }
    nlohmann::json fit;
    fit["param"] = param;
    fit["points"] = x.size();
    try {
      const WlsFit f = wls_fit(x, y, w);
      fit["beta_hat"] = -f.slope;
      fit["beta_se"] = f.slope_se;
      fit["beta_ci_lo"] = -f.slope - 1.959963984540054 * f.slope_se;
      fit["beta_ci_hi"] = -f.slope + 1.959963984540054 * f.slope_se;
      fit["alpha_hat"] = f.intercept;
      fit["status"] = "ok";
    } catch (const std::exception&) {
      fit["status"] = "undefined";
    }
    fits.push_back(fit);
  }
  art.summary["fits"] = fits;
  return art;
}

// Variance of M_n per n, normalized by the region size: lattice boxes carry
// (2n+1)^d vertices, Poisson windows have volume (2n)^d.
inline RunArtifacts run_variance_scaling(const ExperimentConfig& cfg,
                                         int threads = 1) {
  const bool poisson_family = cfg.family == "poisson";
  RunArtifacts art;
  std::ostringstream csv;
  csv << "n,volume,replicates,var,var_se,normalized,normalized_se\n";
  nlohmann::json jrows = nlohmann::json::array();
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const int n = cfg.n_grid[ni];
    const std::vector<double> values =
        detail::draw_mst_weights(cfg, n, ni, poisson_family, threads);
    const double var = sample_variance(values);  // throws when replicates < 2
    const double var_se = detail::batch_statistic_se(values, sample_variance);
    double volume = 1.0;
    for (int a = 0; a < cfg.dimension; ++a)
      volume *= poisson_family ? 2.0 * double(n) : 2.0 * double(n) + 1.0;
    using detail::format_sig10;
    csv << n << ',' << format_sig10(volume) << ',' << cfg.replicates << ','
        << format_sig10(var) << ',' << format_sig10(var_se) << ','
        << format_sig10(var / volume) << ',' << format_sig10(var_se / volume)
        << '\n';
    jrows.push_back({{"n", n},
                     {"volume", volume},
                     {"replicates", cfg.replicates},
                     {"var", var},
                     {"var_se", detail::json_num(var_se)},
                     {"normalized", var / volume},
                     {"normalized_se", detail::json_num(var_se / volume)}});
  }
  art.csv = csv.str();
  art.summary["rows"] = jrows;
  return art;
}

// Normal-approximation bound for the MST functional under block resampling,
// paired with the empirical distance of the same standardized draws so the
// bound and the observed deviation are logged together.
inline RunArtifacts run_stein_bound(const ExperimentConfig& cfg, int threads = 1) {
  RunArtifacts art;
  nlohmann::json jrows = nlohmann::json::array();
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    const int n = cfg.n_grid[ni];
    ModelFactory factory;
    int cells_per_axis = 0;
    if (cfg.family == "lattice") {
      factory = lattice_edge_model_factory(n, cfg.dimension, cfg.law);
    } else {
      const int k =
          int(std::max(0L, std::lround((double(n) / cfg.block_side - 1.0) / 2.0)));
      cells_per_axis = 2 * k + 1;
      factory = poisson_cell_model_factory(double(n), cfg.intensity, cfg.dimension,
                                           cells_per_axis);
    }
    const std::uint64_t run_seed =
        Rng(cfg.seed).derive(std::uint64_t(cfg.kind), ni).key();
    const SteinEstimate est =
        stein_bound(factory, cfg.replicates, cfg.inner_reps, run_seed, threads);

    Moments m;
    for (double v : est.f_values) m.add(v);
    std::vector<double> z(est.f_values.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = (est.f_values[i] - m.mean) / m.sd();
    const DistanceReport dist = distance_report(z);

    nlohmann::json row;
    row["n"] = n;
    row["n_blocks"] = est.n_blocks;
    if (cfg.family == "poisson") row["cells_per_axis"] = cells_per_axis;
    row["outer_reps"] = est.outer_reps;
    row["inner_reps"] = est.inner_reps;
    row["exact_inner"] = est.exact_inner;
    row["bound_kind"] = "variance_upper_bound";
    row["t_mean"] = est.t_mean;
    row["t_var"] = est.t_var;
    row["sigma2_hat"] = est.sigma2_hat;
    row["third_moment_hat"] = est.third_moment_hat;
    row["bound_value"] = est.bound_value;
    row["se_t_mean"] = detail::json_num(est.se_t_mean);
    row["se_t_var"] = detail::json_num(est.se_t_var);
    row["se_sigma2_hat"] = detail::json_num(est.se_sigma2_hat);
    row["se_third_moment_hat"] = detail::json_num(est.se_third_moment_hat);
    row["se_bound_value"] = detail::json_num(est.se_bound_value);
    row["dhat"] = dist.kolmogorov;
    row["what"] = dist.wasserstein;
    row["distance_sample_size"] = dist.sample_size;
    jrows.push_back(row);
  }
  art.summary["rows"] = jrows;
  return art;
}

// Dispatch + manifest assembly.  CSV bytes depend only on the effective
// config; elapsed_seconds lives in the JSON summary alone.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg, int threads = 1) {
  validate_experiment_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunArtifacts art;
  switch (cfg.kind) {
    case ExperimentKind::clt_poisson:
    case ExperimentKind::clt_lattice:
      art = run_clt(cfg, threads);
      break;
    case ExperimentKind::arm_decay:
      art = run_arm_decay(cfg, threads);
      break;
    case ExperimentKind::variance_scaling:
      art = run_variance_scaling(cfg, threads);
      break;
    case ExperimentKind::stein_bound_run:
      art = run_stein_bound(cfg, threads);
      break;
  }
  const auto t1 = std::chrono::steady_clock::now();
  nlohmann::json summary;
  summary["config_hash"] = config_hash(cfg);
  summary["code_version"] = code_version;
  summary["config"] = canonical_config_json(cfg);
  summary["rows"] = art.summary.contains("rows") ? art.summary["rows"]
                                                 : nlohmann::json::array();
  if (art.summary.contains("fits")) summary["fits"] = art.summary["fits"];
  summary["elapsed_seconds"] =
      std::chrono::duration<double>(t1 - t0).count();
  summary["seed"] = cfg.seed;
  art.summary = summary;
  art.csv_name = cfg.output_prefix + ".csv";
  art.json_name = cfg.output_prefix + "_summary.json";
  return art;
}

// Writes the artifacts under out_dir (created if missing), atomically: the
// content lands in a temp file first and is renamed into place.
inline void write_artifacts(const RunArtifacts& art, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (!art.csv.empty())
    write_file_atomic(out_dir + "/" + art.csv_name, art.csv);
  write_file_atomic(out_dir + "/" + art.json_name, art.summary.dump(2) + "\n");
}

}  // namespace mstlab
