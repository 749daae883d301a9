#include "scorekit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "scorekit/error.hpp"
#include "scorekit/expr.hpp"

namespace scorekit::config {

namespace fs = std::filesystem;

namespace {

double parse_real(const std::string& text, const std::string& what) {
  std::string t = text;
  t.erase(0, t.find_first_not_of(" \t"));
  t.erase(t.find_last_not_of(" \t\r") + 1);
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    fail(ErrorCode::ParseError, what + ": '" + text + "' is not a number");
  }
  return v;
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    fail(ErrorCode::ParseError, origin + ": " + e.what());
  }
  for (auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    if (kv.items_.count(key) != 0) fail(ErrorCode::ParseError, origin + ": duplicate key '" + key + "'");
    kv.items_.emplace(key, std::move(item.inputs));
  }
  return kv;
}

KeyValues KeyValues::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  auto kv = parse(in, path.string());
  kv.base_dir_ = path.parent_path();
  return kv;
}

bool KeyValues::has(const std::string& key) const { return items_.count(key) != 0; }

std::string KeyValues::str(const std::string& key) const {
  const auto it = items_.find(key);
  if (it == items_.end()) fail(ErrorCode::ParseError, origin_ + ": missing key '" + key + "'");
  if (it->second.size() != 1) fail(ErrorCode::ParseError, origin_ + ": '" + key + "' must be a single value");
  return it->second.front();
}

std::string KeyValues::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

double KeyValues::num(const std::string& key) const { return parse_real(str(key), origin_ + ": " + key); }

double KeyValues::num_or(const std::string& key, double fallback) const {
  return has(key) ? num(key) : fallback;
}

bool KeyValues::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto v = str(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(ErrorCode::ParseError, origin_ + ": '" + key + "' must be true or false");
}

std::vector<double> KeyValues::nums(const std::string& key) const {
  const auto it = items_.find(key);
  if (it == items_.end()) fail(ErrorCode::ParseError, origin_ + ": missing key '" + key + "'");
  std::vector<double> out;
  for (const auto& s : it->second) out.push_back(parse_real(s, origin_ + ": " + key));
  return out;
}

KeyValues KeyValues::table(const std::string& prefix) const {
  KeyValues out;
  out.origin_ = origin_ + " [" + prefix + "]";
  out.base_dir_ = base_dir_;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : items_) {
    if (k.rfind(p, 0) == 0) out.items_.emplace(k.substr(p.size()), v);
  }
  return out;
}

std::vector<std::string> KeyValues::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : items_) out.push_back(k);
  return out;
}

std::vector<std::string> KeyValues::tables() const {
  std::set<std::string> names;
  for (const auto& [k, v] : items_) {
    const auto dot = k.find('.');
    if (dot != std::string::npos) names.insert(k.substr(0, dot));
  }
  return {names.begin(), names.end()};
}

void KeyValues::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : items_) {
    const std::string head = k.substr(0, k.find('.'));
    if (std::find(allowed.begin(), allowed.end(), head) == allowed.end()) {
      fail(ErrorCode::ParseError, origin_ + ": unknown key '" + k + "'");
    }
  }
}

namespace {

Params numeric_table(const KeyValues& t) {
  Params out;
  for (const auto& k : t.keys()) out[k] = t.num(k);
  return out;
}

Params merged(Params base, const Params& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
  return base;
}

Density base_density(const KeyValues& kv, const Params& overrides) {
  const bool has_family = kv.has("family");
  const bool has_expr = kv.has("log_pdf");
  if (has_family == has_expr) {
    fail(ErrorCode::ParseError, kv.origin() + ": exactly one of 'family' or 'log_pdf' is required");
  }
  if (has_family) {
    kv.require_known({"family", "params", "power", "scale_pair"});
    return make_builtin(kv.str("family"), merged(numeric_table(kv.table("params")), overrides));
  }
  kv.require_known({"log_pdf", "support_lo", "support_hi", "symmetric", "nondiff", "name",
                    "constants", "power", "scale_pair"});
  ExpressionDensitySpec spec;
  spec.log_pdf = kv.str("log_pdf");
  spec.support.lo = kv.num_or("support_lo", -numerics::kInf);
  spec.support.hi = kv.num_or("support_hi", numerics::kInf);
  spec.symmetric = kv.flag_or("symmetric", false);
  if (kv.has("nondiff")) spec.nondiff_points = kv.nums("nondiff");
  spec.constants = merged(numeric_table(kv.table("constants")), overrides);
  spec.name = kv.str_or("name", "custom");
  return make_from_expression(spec);
}

}  // namespace

Density density_from_config(const KeyValues& kv, const Params& overrides) {
  Density d = base_density(kv, overrides);
  if (kv.has("power") && kv.has("scale_pair")) {
    fail(ErrorCode::ParseError, kv.origin() + ": 'power' and 'scale_pair' are exclusive");
  }
  if (kv.has("power")) return power_density(d, kv.num("power"));
  if (kv.has("scale_pair")) {
    const auto c = kv.nums("scale_pair");
    if (c.size() != 2) fail(ErrorCode::ParseError, kv.origin() + ": scale_pair needs [c1, c2]");
    return skewsym::construct_singular_scale_pair(d, c[0], c[1]);
  }
  return d;
}

Density resolve_density(const std::string& name_or_path, const Params& overrides,
                        const fs::path& base_dir) {
  const auto families = builtin_families();
  if (std::find(families.begin(), families.end(), name_or_path) != families.end()) {
    return make_builtin(name_or_path, overrides);
  }
  fs::path p(name_or_path);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  if (!fs::exists(p)) {
    fail(ErrorCode::UnknownFamily,
         "'" + name_or_path + "' is neither a built-in family nor a density spec file");
  }
  return density_from_config(KeyValues::load(p), overrides);
}

namespace {

Density nested_density(const KeyValues& kv, const std::string& key) {
  if (kv.has(key)) return resolve_density(kv.str(key), {}, kv.base_dir());
  const auto t = kv.table(key);
  if (t.keys().empty()) fail(ErrorCode::ParseError, kv.origin() + ": missing [" + key + "]");
  return density_from_config(t);
}

ArgumentSpec argument_spec_from(const KeyValues& kv) {
  const auto t = kv.table("arg");
  t.require_known({"kind", "nu", "expr", "parity", "density"});
  ArgumentSpec spec;
  spec.kind = t.str_or("kind", spec.kind);
  spec.nu = t.num_or("nu", spec.nu);
  spec.expr = t.str_or("expr", "");
  spec.parity = t.str_or("parity", spec.parity);
  if (t.has("density") || !t.table("density").keys().empty()) spec.density = nested_density(t, "density");
  return spec;
}

}  // namespace

skewsym::SkewSymmetricModel model_from_config(const KeyValues& kv) {
  kv.require_known({"base", "arg", "skewing", "params"});
  const Density base = nested_density(kv, "base");
  const auto arg = make_argument(argument_spec_from(kv), base);
  const auto sk = kv.table("skewing");
  sk.require_known({"cdf", "nu"});
  const auto cdf = skewsym::SkewingCdf::from_name(sk.str_or("cdf", "normal"), sk.num_or("nu", 5.0));
  const auto pr = kv.table("params");
  pr.require_known({"mu", "sigma", "delta"});
  return skewsym::SkewSymmetricModel(base, cdf, arg, pr.num_or("mu", 0.0), pr.num_or("sigma", 1.0),
                                     pr.num_or("delta", 0.0));
}

skewsym::SkewingArgument make_argument(const ArgumentSpec& spec, const Density& base) {
  const Density& p = spec.density ? *spec.density : base;
  if (spec.kind == "identity") return skewsym::SkewingArgument::identity();
  if (spec.kind == "location_score") return skewsym::SkewingArgument::location_score(p);
  if (spec.kind == "scale_score") return skewsym::SkewingArgument::scale_score(p);
  if (spec.kind == "skew_t") return skewsym::SkewingArgument::skew_t(spec.nu);
  if (spec.kind == "expression") {
    if (spec.parity != "odd" && spec.parity != "even") {
      fail(ErrorCode::ParseError, "argument parity must be odd or even, got '" + spec.parity + "'");
    }
    const auto e = expr::Expression::parse(spec.expr);
    return skewsym::SkewingArgument::custom(
        [e](double z) { return e(z); },
        spec.parity == "odd" ? skewsym::Parity::Odd : skewsym::Parity::Even, e.text());
  }
  fail(ErrorCode::ParseError, "unknown argument kind '" + spec.kind + "'");
}

skewsym::SkewSymmetricModel load_model(const fs::path& path) {
  return model_from_config(KeyValues::load(path));
}

Params parse_param_overrides(const std::vector<std::string>& pairs) {
  Params out;
  for (const auto& s : pairs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::ParseError, "parameter override '" + s + "' is not of the form key=value");
    }
    out[s.substr(0, eq)] = parse_real(s.substr(eq + 1), "parameter " + s.substr(0, eq));
  }
  return out;
}

std::vector<double> read_sample_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line.erase(0, line.find_first_not_of(" \t"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    if (out.empty() && (line == "x" || line == "\"x\"")) continue;
    out.push_back(parse_real(line, path.string() + ":" + std::to_string(lineno)));
  }
  if (out.empty()) fail(ErrorCode::EmptySample, path.string() + " contains no observations");
  return out;
}

}  // namespace scorekit::config
