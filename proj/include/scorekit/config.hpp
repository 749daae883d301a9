#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scorekit/density.hpp"
#include "scorekit/skewsym.hpp"

namespace scorekit::config {

/// Flattened contents of a TOML-subset file: "table.sub.key" -> values.
/// Arrays hold one string per element; scalars a single string.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& origin);
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  double num(const std::string& key) const;
  double num_or(const std::string& key, double fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::vector<double> nums(const std::string& key) const;

  /// Keys below "prefix.", with the prefix stripped.
  KeyValues table(const std::string& prefix) const;
  /// All flattened keys, sorted.
  std::vector<std::string> keys() const;
  /// Top-level table names present.
  std::vector<std::string> tables() const;
  /// Throws ParseError naming the first key outside `allowed` (tables are
  /// matched by their first component).
  void require_known(const std::vector<std::string>& allowed) const;

  const std::string& origin() const { return origin_; }
  /// Directory relative paths inside the file resolve against.
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::string origin_;
  std::filesystem::path base_dir_;
  std::map<std::string, std::vector<std::string>> items_;
};

/// Density spec. Either a built-in
///   family = "laplace"
///   [params]
///   b = 2.0
/// or an expression density
///   log_pdf = "-abs(x)^3"
///   support_lo = "-inf"      # optional, numbers or +-inf
///   support_hi = "inf"
///   symmetric = true
///   nondiff = [0.0]
///   name = "cubic"
///   [constants]
///   a = 1.5
/// optionally followed by one transform: `power = c` (density proportional
/// to p^c) or `scale_pair = [c1, c2]`.
/// `overrides` replace [params] entries (built-ins) or [constants] entries
/// (expressions).
Density density_from_config(const KeyValues& kv, const Params& overrides = {});

/// A family name or a path to a density spec file. Relative paths resolve
/// against `base_dir`.
Density resolve_density(const std::string& name_or_path, const Params& overrides = {},
                        const std::filesystem::path& base_dir = {});

/// Skew-symmetric model spec:
///   [base]              density spec
///   [arg]
///   kind = "identity" | "location_score" | "scale_score" | "skew_t" | "expression"
///   nu = 5              # skew_t
///   expr = "x^3"        # expression, with parity = "odd" | "even"
///   [arg.density]       # p for location_score / scale_score, defaults to base
///   [skewing]
///   cdf = "normal" | "logistic" | "student"
///   nu = 3              # student
///   [params]
///   mu = 0
///   sigma = 1
///   delta = 0
skewsym::SkewSymmetricModel model_from_config(const KeyValues& kv);

struct ArgumentSpec {
  std::string kind = "identity";
  double nu = 5.0;
  std::string expr;
  std::string parity = "odd";
  std::optional<Density> density;  // p for the score kinds; base when empty
};

skewsym::SkewingArgument make_argument(const ArgumentSpec& spec, const Density& base);
skewsym::SkewSymmetricModel load_model(const std::filesystem::path& path);

/// "k=v" pairs into Params.
Params parse_param_overrides(const std::vector<std::string>& pairs);

/// One value per line with an optional "x" header line. Blank lines are
/// skipped.
std::vector<double> read_sample_csv(const std::filesystem::path& path);

}  // namespace scorekit::config
