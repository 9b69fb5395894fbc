#include "maxstable/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "maxstable/errors.hpp"

namespace maxstable {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ",";
    out += f(v[i]);
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  if (text.empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number<T>(key, item));
  return out;
}

struct Entry {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<Entry>& entries() {
  using C = ExperimentConfig;
  static const std::vector<Entry> table = {
      {"model", [](const C& c) { return c.model; }, [](C& c, const std::string& v) { c.model = v; }},
      {"dim", [](const C& c) { return std::to_string(c.dim); },
       [](C& c, const std::string& v) { c.dim = parse_number<int>("dim", v); }},
      {"variogram.family", [](const C& c) { return c.variogram_family; },
       [](C& c, const std::string& v) { c.variogram_family = v; }},
      {"variogram.scale", [](const C& c) { return format_double(c.variogram_scale); },
       [](C& c, const std::string& v) { c.variogram_scale = parse_number<double>("variogram.scale", v); }},
      {"variogram.exponent", [](const C& c) { return format_double(c.variogram_exponent); },
       [](C& c, const std::string& v) { c.variogram_exponent = parse_number<double>("variogram.exponent", v); }},
      {"kernel.family", [](const C& c) { return c.kernel_family; },
       [](C& c, const std::string& v) { c.kernel_family = v; }},
      {"kernel.bandwidth", [](const C& c) { return format_double(c.kernel_bandwidth); },
       [](C& c, const std::string& v) { c.kernel_bandwidth = parse_number<double>("kernel.bandwidth", v); }},
      {"kernel.radius", [](const C& c) { return format_double(c.kernel_radius); },
       [](C& c, const std::string& v) { c.kernel_radius = parse_number<double>("kernel.radius", v); }},
      {"window.shape", [](const C& c) { return c.window_shape; },
       [](C& c, const std::string& v) { c.window_shape = v; }},
      {"window.sizes",
       [](const C& c) { return join<int>(c.window_sizes, [](const int& x) { return std::to_string(x); }); },
       [](C& c, const std::string& v) { c.window_sizes = parse_list<int>("window.sizes", v); }},
      {"window.thickness", [](const C& c) { return std::to_string(c.window_thickness); },
       [](C& c, const std::string& v) { c.window_thickness = parse_number<int>("window.thickness", v); }},
      {"window.max_boundary_ratio", [](const C& c) { return format_double(c.max_boundary_ratio); },
       [](C& c, const std::string& v) {
         c.max_boundary_ratio = parse_number<double>("window.max_boundary_ratio", v);
       }},
      {"lags", [](const C& c) { return format_sites(c.lags); },
       [](C& c, const std::string& v) { c.lags = parse_sites(v, c.dim); }},
      {"thresholds", [](const C& c) { return join<double>(c.thresholds, format_double); },
       [](C& c, const std::string& v) { c.thresholds = parse_list<double>("thresholds", v); }},
      {"estimators",
       [](const C& c) { return join<int>(c.estimators, [](const int& x) { return std::to_string(x); }); },
       [](C& c, const std::string& v) { c.estimators = parse_list<int>("estimators", v); }},
      {"replicates", [](const C& c) { return std::to_string(c.replicates); },
       [](C& c, const std::string& v) { c.replicates = parse_number<std::size_t>("replicates", v); }},
      {"seed", [](const C& c) { return std::to_string(c.seed); },
       [](C& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"workers", [](const C& c) { return std::to_string(c.workers); },
       [](C& c, const std::string& v) { c.workers = parse_number<int>("workers", v); }},
      {"out", [](const C& c) { return c.out; }, [](C& c, const std::string& v) { c.out = v; }},
      {"format", [](const C& c) { return c.format; }, [](C& c, const std::string& v) { c.format = v; }},
      {"trunc.max_atoms", [](const C& c) { return std::to_string(c.truncation.max_atoms); },
       [](C& c, const std::string& v) { c.truncation.max_atoms = parse_number<std::size_t>("trunc.max_atoms", v); }},
      {"trunc.epsilon", [](const C& c) { return format_double(c.truncation.epsilon); },
       [](C& c, const std::string& v) { c.truncation.epsilon = parse_number<double>("trunc.epsilon", v); }},
      {"trunc.quantile", [](const C& c) { return format_double(c.truncation.quantile); },
       [](C& c, const std::string& v) { c.truncation.quantile = parse_number<double>("trunc.quantile", v); }},
      {"trunc.pilot_draws", [](const C& c) { return std::to_string(c.truncation.pilot_draws); },
       [](C& c, const std::string& v) {
         c.truncation.pilot_draws = parse_number<std::size_t>("trunc.pilot_draws", v);
       }},
      {"trunc.pilot_seed", [](const C& c) { return std::to_string(c.truncation.pilot_seed); },
       [](C& c, const std::string& v) {
         c.truncation.pilot_seed = parse_number<std::uint64_t>("trunc.pilot_seed", v);
       }},
      {"bandwidth", [](const C& c) { return std::to_string(c.bandwidth); },
       [](C& c, const std::string& v) { c.bandwidth = parse_number<int>("bandwidth", v); }},
      {"clt.delta", [](const C& c) { return format_double(c.clt_delta); },
       [](C& c, const std::string& v) { c.clt_delta = parse_number<double>("clt.delta", v); }},
      {"clt.max_radius", [](const C& c) { return std::to_string(c.clt_max_radius); },
       [](C& c, const std::string& v) { c.clt_max_radius = parse_number<int>("clt.max_radius", v); }},
      {"clt.ratio_low", [](const C& c) { return format_double(c.clt_ratio_low); },
       [](C& c, const std::string& v) { c.clt_ratio_low = parse_number<double>("clt.ratio_low", v); }},
      {"clt.ratio_high", [](const C& c) { return format_double(c.clt_ratio_high); },
       [](C& c, const std::string& v) { c.clt_ratio_high = parse_number<double>("clt.ratio_high", v); }},
      {"clt.ks_level", [](const C& c) { return format_double(c.clt_ks_level); },
       [](C& c, const std::string& v) { c.clt_ks_level = parse_number<double>("clt.ks_level", v); }},
      {"theta4_draws", [](const C& c) { return std::to_string(c.theta4_draws); },
       [](C& c, const std::string& v) { c.theta4_draws = parse_number<std::size_t>("theta4_draws", v); }},
      {"bounds.max_distance", [](const C& c) { return std::to_string(c.bounds_max_distance); },
       [](C& c, const std::string& v) { c.bounds_max_distance = parse_number<int>("bounds.max_distance", v); }},
      {"sets.s1", [](const C& c) { return format_sites(c.set1); },
       [](C& c, const std::string& v) { c.set1 = parse_sites(v, c.dim); }},
      {"sets.s2", [](const C& c) { return format_sites(c.set2); },
       [](C& c, const std::string& v) { c.set2 = parse_sites(v, c.dim); }},
      {"slyvniak.inner_draws", [](const C& c) { return std::to_string(c.inner_draws); },
       [](C& c, const std::string& v) { c.inner_draws = parse_number<std::size_t>("slyvniak.inner_draws", v); }},
      {"slyvniak.cells", [](const C& c) { return std::to_string(c.slyvniak_cells); },
       [](C& c, const std::string& v) { c.slyvniak_cells = parse_number<int>("slyvniak.cells", v); }},
  };
  return table;
}

}  // namespace

std::vector<Site> parse_sites(std::string_view text, int dim) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("dimension must be in [1, 3]");
  std::vector<Site> out;
  const std::string t = trim(text);
  if (t.empty()) return out;
  for (const auto& item : split(t, ';')) {
    const auto coords = split(item, ',');
    if (static_cast<int>(coords.size()) != dim) {
      throw ConfigError("site '" + item + "' has " + std::to_string(coords.size()) + " coordinates, expected " +
                        std::to_string(dim));
    }
    Site s = Site::zero(dim);
    for (int i = 0; i < dim; ++i) s[i] = parse_number<int>("site", coords[static_cast<std::size_t>(i)]);
    out.push_back(s);
  }
  return out;
}

std::string format_sites(const std::vector<Site>& sites) {
  std::string out;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (k > 0) out += ";";
    for (int i = 0; i < sites[k].dim; ++i) {
      if (i > 0) out += ",";
      out += std::to_string(sites[k][i]);
    }
  }
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, std::pair<std::string, int>> values;  // key -> (value, line)
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!values.emplace(key, std::make_pair(value, lineno)).second) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  ExperimentConfig c;
  std::map<std::string, const Entry*> by_key;
  for (const auto& e : entries()) by_key[e.key] = &e;
  for (const auto& [key, v] : values) {
    if (!by_key.count(key)) throw ConfigError("config line " + std::to_string(v.second) + ": unknown key '" + key + "'");
  }
  // dimension first; site lists depend on it
  const bool dim_given = values.count("dim") > 0;
  if (dim_given) by_key["dim"]->set(c, values["dim"].first);
  if (c.dim < 1 || c.dim > kMaxDim) throw ConfigError("dim must be in [1, 3]");
  if (!values.count("lags")) c.lags = {Site::axis(c.dim, 0, 1)};
  for (const auto& e : entries()) {
    const auto it = values.find(e.key);
    if (it == values.end() || std::string(e.key) == "dim") continue;
    try {
      e.set(c, it->second.first);
    } catch (const ConfigError& err) {
      throw ConfigError("config line " + std::to_string(it->second.second) + ": " + err.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + " = " + e.get(config) + "\n";
  return out;
}

ModelSpec model_spec(const ExperimentConfig& c) {
  if (c.model == "brown-resnick") {
    VariogramSpec v = VariogramSpec::degenerate();
    if (c.variogram_family == "power") {
      v = VariogramSpec::power(c.variogram_scale, c.variogram_exponent);
    } else if (c.variogram_family == "fractional") {
      v = VariogramSpec::fractional(c.variogram_scale, c.variogram_exponent);
    } else if (c.variogram_family != "degenerate") {
      throw ConfigError("unknown variogram.family '" + c.variogram_family + "'");
    }
    return ModelSpec::brown_resnick(c.dim, v);
  }
  if (c.model == "moving-maximum") {
    if (c.kernel_family == "gaussian") return ModelSpec::moving_maximum(KernelSpec::gaussian(c.dim, c.kernel_bandwidth));
    if (c.kernel_family == "truncated-gaussian") {
      return ModelSpec::moving_maximum(KernelSpec::truncated_gaussian(c.dim, c.kernel_bandwidth, c.kernel_radius));
    }
    if (c.kernel_family == "indicator-box") {
      return ModelSpec::moving_maximum(KernelSpec::indicator_box(c.dim, c.kernel_radius));
    }
    throw ConfigError("unknown kernel.family '" + c.kernel_family + "'");
  }
  throw ConfigError("unknown model '" + c.model + "' (brown-resnick | moving-maximum)");
}

LatticeWindow region_window(const ExperimentConfig& c, int n) {
  if (n < 1) throw ConfigError("window sizes must be >= 1");
  std::vector<int> extent(static_cast<std::size_t>(c.dim), n);
  if (c.window_shape == "slab") {
    if (c.window_thickness < 1) throw ConfigError("window.thickness must be >= 1");
    for (std::size_t i = 1; i < extent.size(); ++i) extent[i] = c.window_thickness;
  } else if (c.window_shape != "box") {
    throw ConfigError("unknown window.shape '" + c.window_shape + "' (box | slab)");
  }
  return LatticeWindow::box(Site::zero(c.dim), extent);
}

void validate_config(const ExperimentConfig& c) {
  if (c.dim < 1 || c.dim > kMaxDim) throw ConfigError("dim must be in [1, 3]");
  (void)model_spec(c);
  if (c.window_sizes.empty()) throw ConfigError("window.sizes must list at least one size");
  double prev = 0.0;
  for (std::size_t i = 0; i < c.window_sizes.size(); ++i) {
    const int n = c.window_sizes[i];
    if (i > 0 && n <= c.window_sizes[i - 1]) throw ConfigError("window.sizes must be strictly increasing");
    const double ratio = region_window(c, n).boundary_ratio();
    if (i > 0 && !(ratio < prev)) {
      std::ostringstream os;
      os << "window family does not satisfy |dLambda|/|Lambda| -> 0: ratio " << ratio << " at size " << n
         << " is not below " << prev << " at size " << c.window_sizes[i - 1];
      throw ConfigError(os.str());
    }
    prev = ratio;
  }
  if (prev > c.max_boundary_ratio) {
    std::ostringstream os;
    os << "largest window has boundary ratio " << prev << " above window.max_boundary_ratio "
       << c.max_boundary_ratio;
    throw ConfigError(os.str());
  }
  for (const auto& h : c.lags) {
    if (h.dim != c.dim) throw ConfigError("lag dimension differs from dim");
  }
  for (double y : c.thresholds) {
    if (!(y > 0.0) || !std::isfinite(y)) throw ConfigError("thresholds must be positive");
  }
  for (int e : c.estimators) {
    if (e < 1 || e > 3) throw ConfigError("estimators must be among 1, 2, 3");
  }
  if (c.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (c.workers < 0) throw ConfigError("workers must be >= 0");
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  if (c.truncation.max_atoms < 1 || !(c.truncation.epsilon > 0.0) || !(c.truncation.quantile > 0.0) ||
      !(c.truncation.quantile < 1.0)) {
    throw ConfigError("truncation needs max_atoms >= 1, epsilon > 0, quantile in (0, 1)");
  }
  if (!(c.clt_delta > 0.0)) throw ConfigError("clt.delta must be positive");
  if (c.clt_max_radius < 4) throw ConfigError("clt.max_radius must be >= 4");
  if (!(c.clt_ratio_low < c.clt_ratio_high)) throw ConfigError("clt.ratio_low must be below clt.ratio_high");
  if (!(c.clt_ks_level > 0.0 && c.clt_ks_level < 1.0)) throw ConfigError("clt.ks_level must be in (0, 1)");
  if (c.bounds_max_distance < 1) throw ConfigError("bounds.max_distance must be >= 1");
  if (c.bandwidth < 0) throw ConfigError("bandwidth must be >= 0");
  if (c.theta4_draws < 1000) throw ConfigError("theta4_draws must be >= 1000");
  if (c.inner_draws < 2 || c.slyvniak_cells < 1) throw ConfigError("slyvniak settings must be positive");
}

}  // namespace maxstable
