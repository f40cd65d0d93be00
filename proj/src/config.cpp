#include "gdl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "gdl/error.hpp"

namespace gdl::cli {

namespace {

struct Value {
  enum class Kind { kScalar, kList } kind = Kind::kScalar;
  std::string text;                // raw scalar token (unquoted for strings)
  bool quoted = false;             // scalar came from a quoted string
  std::vector<std::string> items;  // raw list element tokens
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Removes a trailing comment, honoring double quotes.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    else if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.';
  });
}

Value parse_value(const std::string& raw, const std::string& key) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("config: empty value for key " + key);
  Value out;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("config: unterminated string for key " + key);
    out.text = v.substr(1, v.size() - 2);
    if (out.text.find('"') != std::string::npos)
      throw ConfigError("config: embedded quote in value of key " + key);
    out.quoted = true;
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']')
      throw ConfigError("config: unterminated list for key " + key);
    out.kind = Value::Kind::kList;
    std::string body = v.substr(1, v.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty())
        throw ConfigError("config: empty list element for key " + key);
      out.items.push_back(item);
    }
    return out;
  }
  out.text = v;
  return out;
}

using ValueMap = std::map<std::string, Value>;

ValueMap parse_file_text(const std::string& text) {
  ValueMap values;
  std::string section;
  std::stringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section))
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": bad section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!valid_key(key))
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": bad key name");
    if (!section.empty()) key = section + "." + key;
    if (values.count(key))
      throw ConfigError("config: duplicate key " + key);
    values.emplace(key, parse_value(line.substr(eq + 1), key));
  }
  return values;
}

void apply_override(ValueMap& values, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects key=value, got: " + spec);
  const std::string key = trim(spec.substr(0, eq));
  if (!valid_key(key)) throw ConfigError("--set: bad key name: " + key);
  values[key] = parse_value(spec.substr(eq + 1), key);  // replaces silently
}

// Typed access over the parsed map; tracks which keys were consumed so
// leftovers can be rejected as unknown.
class Reader {
 public:
  explicit Reader(ValueMap values) : values_(std::move(values)) {}

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double number(const std::string& key, double fallback) {
    const Value* v = take_scalar(key);
    if (!v) return fallback;
    return to_number(v->text, key);
  }

  long long integer(const std::string& key, long long fallback) {
    const Value* v = take_scalar(key);
    if (!v) return fallback;
    return to_integer(v->text, key);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const Value* v = take_scalar(key);
    if (!v) return fallback;
    if (!std::all_of(v->text.begin(), v->text.end(), [](unsigned char c) {
          return std::isdigit(c);
        }))
      throw ConfigError("config: " + key + " must be a nonnegative integer");
    errno = 0;
    const std::uint64_t out = std::strtoull(v->text.c_str(), nullptr, 10);
    if (errno != 0)
      throw ConfigError("config: " + key + " is out of range");
    return out;
  }

  bool boolean(const std::string& key, bool fallback) {
    const Value* v = take_scalar(key);
    if (!v) return fallback;
    if (v->text == "true") return true;
    if (v->text == "false") return false;
    throw ConfigError("config: " + key + " must be true or false");
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const Value* v = take_scalar(key);
    if (!v) return fallback;
    return v->text;
  }

  std::vector<double> number_list(const std::string& key,
                                  std::vector<double> fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::kList)
      throw ConfigError("config: " + key + " must be a list");
    std::vector<double> out;
    out.reserve(v->items.size());
    for (const auto& item : v->items) out.push_back(to_number(item, key));
    return out;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> fallback) {
    const Value* v = take(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::kList)
      throw ConfigError("config: " + key + " must be a list");
    std::vector<int> out;
    out.reserve(v->items.size());
    for (const auto& item : v->items) {
      const long long n = to_integer(item, key);
      if (n < INT_MIN_SAFE || n > INT_MAX_SAFE)
        throw ConfigError("config: " + key + " element out of range");
      out.push_back(static_cast<int>(n));
    }
    return out;
  }

  void reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty())
      throw ConfigError("config: unknown key(s): " + unknown);
  }

 private:
  static constexpr long long INT_MIN_SAFE = -2147483648LL;
  static constexpr long long INT_MAX_SAFE = 2147483647LL;

  const Value* take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  const Value* take_scalar(const std::string& key) {
    const Value* v = take(key);
    if (v && v->kind != Value::Kind::kScalar)
      throw ConfigError("config: " + key + " must be a single value");
    return v;
  }

  static double to_number(const std::string& text, const std::string& key) {
    char* end = nullptr;
    errno = 0;
    const double out = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno != 0 || !std::isfinite(out))
      throw ConfigError("config: " + key + " must be a finite number, got \"" +
                        text + "\"");
    return out;
  }

  static long long to_integer(const std::string& text, const std::string& key) {
    const double d = to_number(text, key);
    const double r = std::nearbyint(d);
    if (d != r)
      throw ConfigError("config: " + key + " must be an integer, got \"" +
                        text + "\"");
    return static_cast<long long>(r);
  }

  ValueMap values_;
  std::set<std::string> consumed_;
};

int bounded_int(Reader& reader, const std::string& key, long long fallback,
                long long lo, long long hi) {
  const long long v = reader.integer(key, fallback);
  if (v < lo || v > hi)
    throw ConfigError("config: " + key + " must lie in [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double bounded_number(Reader& reader, const std::string& key, double fallback,
                      double lo, double hi) {
  const double v = reader.number(key, fallback);
  if (!(v >= lo && v <= hi))
    throw ConfigError("config: " + key + " is out of range");
  return v;
}

template <typename Fn>
auto parse_choice(Fn&& fn, const std::string& value, const std::string& key) {
  try {
    return fn(value);
  } catch (const std::invalid_argument& err) {
    throw ConfigError("config: " + key + ": " + err.what());
  }
}

ExperimentConfig materialize(ValueMap values) {
  Reader reader(std::move(values));

  if (!reader.has("config_version"))
    throw ConfigError("config: missing config_version");
  const long long version = reader.integer("config_version", -1);
  if (version != 1)
    throw ConfigError("config: unsupported config_version " +
                      std::to_string(version));

  ExperimentConfig cfg;
  cfg.output_dir = reader.text("output_dir", cfg.output_dir);
  if (cfg.output_dir.empty())
    throw ConfigError("config: output_dir must not be empty");
  cfg.data_dir = reader.text("data.dir", cfg.data_dir);

  cfg.scene.kind = parse_choice(scene::scene_kind_from_string,
                                reader.text("scene.kind", "terrain"),
                                "scene.kind");
  cfg.scene.width = bounded_int(reader, "scene.width", 128, 16, 4096);
  cfg.scene.height = bounded_int(reader, "scene.height", 96, 16, 4096);
  cfg.scene.r_near = bounded_number(reader, "scene.r_near", 3.0, 3.0, 1e6);
  cfg.scene.r_far = bounded_number(reader, "scene.r_far", 150.0, 3.0, 1e6);
  if (!(cfg.scene.r_near < cfg.scene.r_far))
    throw ConfigError("config: scene.r_near must be below scene.r_far");
  cfg.scene.plane_distance =
      bounded_number(reader, "scene.plane_distance", 0.0, 0.0, 1e6);
  cfg.scene.object_count = bounded_int(reader, "scene.object_count", 6, 0, 1000);
  cfg.scene.shadow_patches =
      bounded_int(reader, "scene.shadow_patches", 0, 0, 1000);
  cfg.scene_seed = reader.seed("scene.seed", cfg.scene_seed);

  cfg.mask_lines = bounded_int(reader, "mask.lines", 24, 1, 4096);
  cfg.mask_dropout = bounded_number(reader, "mask.dropout", 0.1, 0.0, 1.0);
  cfg.mask_seed = reader.seed("mask.seed", cfg.mask_seed);

  cfg.pulse_shape = parse_choice(rip::profile_kind_from_string,
                                 reader.text("rip.pulse_shape", "rectangular"),
                                 "rip.pulse_shape");
  cfg.gate_shape = parse_choice(rip::profile_kind_from_string,
                                reader.text("rip.gate_shape", "rectangular"),
                                "rip.gate_shape");
  cfg.pulse_duration_ns =
      bounded_number(reader, "rip.pulse_duration_ns", 200.0, 1e-3, 1e6);
  cfg.gate_duration_ns =
      bounded_number(reader, "rip.gate_duration_ns", 200.0, 1e-3, 1e6);
  cfg.profile_dt_ns = bounded_number(reader, "rip.dt_ns", 1.0, 1e-6, 1e3);
  {
    const auto delays = reader.number_list(
        "rip.delays_ns", {cfg.delays_ns[0], cfg.delays_ns[1], cfg.delays_ns[2]});
    if (delays.size() != 3)
      throw ConfigError("config: rip.delays_ns needs exactly 3 entries");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(delays[i] >= 0.0))
        throw ConfigError("config: rip.delays_ns entries must be nonnegative");
      if (i > 0 && !(delays[i] > delays[i - 1]))
        throw ConfigError("config: rip.delays_ns must increase strictly");
      cfg.delays_ns[i] = delays[i];
    }
  }
  cfg.grid_r_min = bounded_number(reader, "rip.r_min_m", 0.0, 0.0, 1e6);
  cfg.grid_r_max = bounded_number(reader, "rip.r_max_m", 150.0, 1e-3, 1e6);
  cfg.grid_dr = bounded_number(reader, "rip.dr_m", 0.05, 1e-6, 1e3);
  if (!(cfg.grid_r_min < cfg.grid_r_max))
    throw ConfigError("config: rip.r_min_m must be below rip.r_max_m");
  cfg.peak_counts = bounded_number(reader, "rip.peak_counts", 800.0, 1.0, 1023.0);
  {
    const std::string a = reader.text("rip.attenuation", "none");
    if (a == "none") cfg.attenuation = rip::AttenuationKind::kNone;
    else if (a == "beer_lambert") cfg.attenuation = rip::AttenuationKind::kBeerLambert;
    else throw ConfigError("config: rip.attenuation must be none or beer_lambert");
  }
  cfg.kappa = bounded_number(reader, "rip.kappa", 0.0, 0.0, 10.0);

  cfg.noise.a = bounded_number(reader, "noise.a", 1.0, 0.0, 1e6);
  cfg.noise.b = bounded_number(reader, "noise.b", 4.0, 0.0, 1e6);
  cfg.noise.seed = reader.seed("noise.seed", cfg.noise.seed);

  cfg.estimator = reader.text("estimator.kind", cfg.estimator);
  if (cfg.estimator != "regressor" && cfg.estimator != "timeslice" &&
      cfg.estimator != "triangular_ratio" && cfg.estimator != "poly_ratio")
    throw ConfigError("config: estimator.kind must be one of regressor, "
                      "timeslice, triangular_ratio, poly_ratio");
  cfg.timeslice_method =
      reader.text("estimator.timeslice_method", cfg.timeslice_method);
  if (cfg.timeslice_method != "rising_edge" && cfg.timeslice_method != "argmax" &&
      cfg.timeslice_method != "weighted_average")
    throw ConfigError("config: estimator.timeslice_method must be one of "
                      "rising_edge, argmax, weighted_average");
  cfg.rising_threshold =
      bounded_number(reader, "estimator.rising_threshold", 0.5, 1e-9, 1.0);
  cfg.checkpoint = reader.text("estimator.checkpoint", cfg.checkpoint);

  cfg.epochs = bounded_int(reader, "train.epochs", 15, 1, 100000);
  cfg.batch_size = bounded_int(reader, "train.batch_size", 32, 1, 1 << 20);
  cfg.learning_rate =
      bounded_number(reader, "train.learning_rate", 1e-4, 1e-12, 10.0);
  cfg.val_fraction = reader.number("train.val_fraction", 0.2);
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
    throw ConfigError("config: train.val_fraction must lie in (0, 1)");
  cfg.train_seed = reader.seed("train.seed", cfg.train_seed);
  cfg.hidden = reader.int_list("train.hidden", cfg.hidden);
  if (cfg.hidden.empty())
    throw ConfigError("config: train.hidden needs at least one layer");
  for (int h : cfg.hidden)
    if (h < 1 || h > 4096)
      throw ConfigError("config: train.hidden widths must lie in [1, 4096]");

  cfg.lambda_s = bounded_number(reader, "loss.lambda_s", 10.0, 0.0, 1e6);
  cfg.lambda_adv = bounded_number(reader, "loss.lambda_adv", 0.0, 0.0, 1e6);
  cfg.scale_weights = reader.number_list("loss.scale_weights", cfg.scale_weights);
  if (cfg.scale_weights.empty())
    throw ConfigError("config: loss.scale_weights needs at least one entry");
  for (double w : cfg.scale_weights)
    if (!(w >= 0.0))
      throw ConfigError("config: loss.scale_weights must be nonnegative");
  cfg.aleatoric = reader.boolean("loss.aleatoric", cfg.aleatoric);

  cfg.filter_kind = reader.text("filter.kind", cfg.filter_kind);
  if (cfg.filter_kind != "uncertainty" && cfg.filter_kind != "snr")
    throw ConfigError("config: filter.kind must be uncertainty or snr");
  cfg.thresholds = reader.number_list("filter.thresholds", {});
  cfg.coverages = reader.number_list("filter.coverages", {});
  for (double c : cfg.coverages)
    if (!(c > 0.0 && c <= 1.0))
      throw ConfigError("config: filter.coverages entries must lie in (0, 1]");

  cfg.eval_r_lo = bounded_number(reader, "eval.r_lo_m", 3.0, 1e-6, 1e6);
  cfg.eval_r_hi = bounded_number(reader, "eval.r_hi_m", 150.0, 1e-6, 1e6);
  if (!(cfg.eval_r_lo < cfg.eval_r_hi))
    throw ConfigError("config: eval.r_lo_m must be below eval.r_hi_m");
  cfg.eval_pred = reader.text("eval.pred", cfg.eval_pred);
  cfg.eval_gt = reader.text("eval.gt", cfg.eval_gt);
  cfg.eval_mask = reader.text("eval.mask", cfg.eval_mask);

  cfg.render_kind = reader.text("render.kind", cfg.render_kind);
  if (cfg.render_kind != "depth" && cfg.render_kind != "uncertainty")
    throw ConfigError("config: render.kind must be depth or uncertainty");
  cfg.render_input = reader.text("render.input", cfg.render_input);
  cfg.render_output = reader.text("render.output", cfg.render_output);
  if (cfg.render_output.empty())
    throw ConfigError("config: render.output must not be empty");

  reader.reject_unknown();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides) {
  ValueMap values = parse_file_text(text);
  for (const auto& spec : overrides) apply_override(values, spec);
  return materialize(std::move(values));
}

ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (!in && !in.eof())
    throw IoError("failed reading config file: " + file.string());
  return parse_config(buffer.str(), overrides);
}

}  // namespace gdl::cli
