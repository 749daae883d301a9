#include "scorekit/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scorekit/config.hpp"
#include "scorekit/density.hpp"
#include "scorekit/error.hpp"
#include "scorekit/mle.hpp"
#include "scorekit/parallel.hpp"
#include "scorekit/skewsym.hpp"
#include "scorekit/stein.hpp"
#include "scorekit/varbounds.hpp"

namespace scorekit::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string density = "normal";
  std::vector<std::string> params;

  std::vector<double> at;
  std::vector<double> grid;
  std::optional<double> power;
  bool zero_mean = false;
  bool log_concavity = false;

  std::string op = "location";
  std::vector<std::string> functions;
  std::string sample;
  std::string draw;
  std::vector<std::string> draw_params;
  std::size_t draw_n = 10000;
  std::uint64_t seed = 42;

  std::string g = "x";
  bool chain = false;

  std::string model;
  std::string base = "normal";
  std::string arg = "identity";
  std::string arg_density;
  double arg_nu = 5.0;
  std::string arg_expr;
  std::string parity = "odd";
  std::string cdf = "normal";
  double cdf_nu = 5.0;
  double mu = 0.0;
  double sigma = 1.0;
  double delta = 0.0;
  double rank_tol = 1e-6;
  bool crosscheck = false;
  std::vector<double> scores_at;
  std::vector<double> density_at;

  double c1 = 1.0;
  double c2 = 2.0;

  std::string kind = "location";
  std::string reference = "mean";
  int trials = 100;
  int sample_size = 5;

  std::string score_expr;
  std::vector<std::pair<double, double>> pairs;
  bool witnesses = false;
  double witness_a = 1.0;
  double witness_b = 2.0;
  int witness_n = 5;
  std::string power_base;

  std::string dir;
};

Density load_density(const std::string& spec, const std::vector<std::string>& params) {
  return config::resolve_density(spec, config::parse_param_overrides(params));
}

std::vector<stein::TestFunction> test_functions(const Options& o) {
  if (o.functions.empty()) return stein::default_bank();
  std::vector<stein::TestFunction> out;
  for (const auto& f : o.functions) out.push_back(stein::from_expression(f));
  return out;
}

json point_json(const Density& d, double x) {
  const auto loc = location_score(d, x);
  const auto sc = scale_score(d, x);
  return {{"x", x},
          {"phi", loc.phi},
          {"psi", sc.psi},
          {"source", loc.source == ScoreSource::Analytic ? "analytic" : "finite_difference"}};
}

json cmd_score(const Options& o) {
  Density d = load_density(o.density, o.params);
  if (o.power) d = power_density(d, *o.power);
  std::vector<double> xs = o.at;
  if (!o.grid.empty()) {
    if (o.grid.size() != 3 || o.grid[2] < 2 || o.grid[2] != std::floor(o.grid[2])) {
      fail(ErrorCode::InvalidArgument, "--grid expects LO HI COUNT with COUNT >= 2");
    }
    const int n = static_cast<int>(o.grid[2]);
    for (int i = 0; i < n; ++i) xs.push_back(o.grid[0] + (o.grid[1] - o.grid[0]) * i / (n - 1));
  }
  if (xs.empty() && !o.zero_mean && !o.log_concavity) {
    fail(ErrorCode::InvalidArgument, "score needs --at, --grid, --zero-mean or --log-concavity");
  }
  json j;
  j["density"] = d.name();
  if (xs.size() == 1) {
    const json pt = point_json(d, xs.front());
    for (const auto& [k, v] : pt.items()) j[k] = v;
  } else if (!xs.empty()) {
    json pts = json::array();
    for (double x : xs) pts.push_back(point_json(d, x));
    j["points"] = pts;
  }
  if (o.zero_mean) j["score_mean"] = score_zero_mean_check(d);
  if (o.log_concavity) {
    j["log_concave"] = is_log_concave(d, false);
    j["strictly_log_concave"] = is_log_concave(d, true);
  }
  return j;
}

json cmd_stein_check(const Options& o) {
  const Density d = load_density(o.density, o.params);
  const auto kind = stein::operator_kind_from_string(o.op);
  json fns = json::array();
  double max_abs = 0.0;
  int admissible = 0;
  for (const auto& tf : test_functions(o)) {
    json e;
    e["label"] = tf.label;
    const bool ok = stein::boundary_condition_check(d, tf, kind);
    e["admissible"] = ok;
    if (ok) {
      const double v = stein::expected_operator(d, kind, tf);
      e["expected"] = v;
      max_abs = std::max(max_abs, std::abs(v));
      ++admissible;
    } else {
      e["expected"] = nullptr;
    }
    fns.push_back(e);
  }
  return {{"target", d.name()},
          {"kind", stein::to_string(kind)},
          {"functions", fns},
          {"admissible_count", admissible},
          {"max_abs", max_abs}};
}

json cmd_stein_gof(const Options& o) {
  const Density d = load_density(o.density, o.params);
  std::vector<double> x;
  if (!o.sample.empty() && !o.draw.empty()) {
    fail(ErrorCode::InvalidArgument, "--sample and --draw are exclusive");
  }
  if (!o.sample.empty()) {
    x = config::read_sample_csv(o.sample);
  } else if (!o.draw.empty()) {
    x = draw_sample(load_density(o.draw, o.draw_params), o.draw_n, o.seed);
  } else {
    fail(ErrorCode::InvalidArgument, "stein-gof needs --sample or --draw");
  }
  const auto r = stein::empirical_discrepancy(x, d, stein::operator_kind_from_string(o.op),
                                              test_functions(o));
  json per = json::array();
  for (const auto& lv : r.per_function) per.push_back({{"label", lv.label}, {"value", lv.value}});
  return {{"target", r.target},   {"kind", stein::to_string(r.kind)},
          {"n", r.n},             {"excluded", r.excluded},
          {"per_function", per}, {"max_abs", r.max_abs}};
}

json cmd_varbound(const Options& o) {
  const Density d = load_density(o.density, o.params);
  const auto g = varbounds::from_expression(o.g);
  const auto r = varbounds::bound_report(d, g);
  json bounds = json::array();
  json ratios = json::object();
  for (const auto& b : r.bounds) {
    if (b.value) {
      bounds.push_back({{"name", b.name}, {"value", *b.value}});
    } else {
      bounds.push_back({{"name", b.name}, {"reason", b.reason}});
    }
    if (b.ratio) ratios[b.name] = *b.ratio;
  }
  json j{{"density", r.density}, {"g", r.g},           {"mean_x", r.mean_x},
         {"variance", r.variance}, {"bounds", bounds}, {"ratios", ratios}};
  if (o.chain) {
    const auto c = varbounds::cacoullos_chain(d, g);
    j["chain"] = {{"variance", c.variance},
                  {"second_moment_about_g0", c.second_moment_about_g0},
                  {"cauchy_schwarz", c.cauchy_schwarz}};
  }
  return j;
}

skewsym::SkewSymmetricModel model_from_flags(const Options& o) {
  if (!o.model.empty()) return config::load_model(o.model);
  const Density base = load_density(o.base, o.params);
  config::ArgumentSpec spec;
  spec.kind = o.arg;
  spec.nu = o.arg_nu;
  spec.expr = o.arg_expr;
  spec.parity = o.parity;
  if (!o.arg_density.empty()) spec.density = load_density(o.arg_density, {});
  return skewsym::SkewSymmetricModel(base, skewsym::SkewingCdf::from_name(o.cdf, o.cdf_nu),
                                     config::make_argument(spec, base), o.mu, o.sigma, o.delta);
}

json model_json(const skewsym::SkewSymmetricModel& m) {
  std::string cdf = m.skewing_cdf().name();
  if (cdf == "student") {
    std::ostringstream os;
    os << "student(" << m.skewing_cdf().nu() << ")";
    cdf = os.str();
  }
  return {{"base", m.base().name()}, {"cdf", cdf},           {"arg", m.arg().label()},
          {"mu", m.mu()},            {"sigma", m.sigma()}, {"delta", m.delta()}};
}

json fisher_json(const skewsym::SkewSymmetricModel& m, double tol) {
  const auto rep = skewsym::singularity_report(m, tol);
  const auto& r = rep.detail;
  json matrix = json::array();
  for (const auto& row : r.matrix) {
    for (double v : row) matrix.push_back(v);
  }
  json j{{"matrix", matrix},
         {"eigenvalues", r.eigenvalues},
         {"min_rel_eigenvalue", r.min_rel_eigenvalue},
         {"rank", r.rank_at_tol},
         {"singular", rep.singular}};
  if (r.collinearity) {
    j["collinearity"] = {{"c1", r.collinearity->c1}, {"c2", r.collinearity->c2}};
  } else {
    j["collinearity"] = nullptr;
  }
  return j;
}

json cmd_fisher(const Options& o) {
  const auto m = model_from_flags(o);
  const auto sym = m.with(m.mu(), m.sigma(), 0.0);
  json j{{"model", model_json(m)}};
  const json info = fisher_json(sym, o.rank_tol);
  for (const auto& [k, v] : info.items()) j[k] = v;
  if (o.crosscheck) j["score_crosscheck_max_gap"] = skewsym::score_crosscheck(sym);
  if (!o.scores_at.empty()) {
    const auto s = skewsym::scores_at_symmetry(sym);
    json pts = json::array();
    for (double x : o.scores_at) {
      pts.push_back({{"x", x}, {"s_mu", s.mu(x)}, {"s_sigma", s.sigma(x)}, {"s_delta", s.delta(x)}});
    }
    j["scores"] = pts;
  }
  if (!o.density_at.empty()) {
    json pts = json::array();
    for (double x : o.density_at) pts.push_back({{"x", x}, {"value", skewsym::skew_density(m, x)}});
    j["density"] = pts;
  }
  return j;
}

json cmd_singular_pair(const Options& o) {
  const Density p = load_density(o.density, o.params);
  const Density q = skewsym::construct_singular_scale_pair(p, o.c1, o.c2);
  double gap = 0.0;
  for (double x : central_grid(q, 0.99, 101)) {
    if (q.is_nondiff_point(x) || p.is_nondiff_point(x)) continue;
    const double lhs = scale_score(q, x).psi;
    const double rhs = o.c1 * scale_score(p, x).psi + o.c2;
    gap = std::max(gap, std::abs(lhs - rhs));
  }
  const skewsym::SkewSymmetricModel m(q, skewsym::SkewingCdf::from_name(o.cdf, o.cdf_nu),
                                      skewsym::SkewingArgument::scale_score(p));
  return {{"p", p.name()},
          {"q", q.name()},
          {"c1", o.c1},
          {"c2", o.c2},
          {"psi_identity_max_gap", gap},
          {"model", model_json(m)},
          {"fisher", fisher_json(m, o.rank_tol)}};
}

json cmd_mle_verify(const Options& o) {
  const Density d = load_density(o.density, o.params);
  const auto kind = mle::kind_from_string(o.kind);
  const auto reference = mle::reference_from_string(o.reference);
  if (!o.sample.empty()) {
    const auto x = config::read_sample_csv(o.sample);
    const auto s = kind == mle::Kind::Location ? mle::solve_location_mle(d, x)
                                               : mle::solve_scale_mle(d, x);
    const double ref = mle::reference_estimate(reference, x);
    json j{{"density", d.name()},
           {"kind", mle::to_string(kind)},
           {"reference", mle::to_string(reference)},
           {"sample_size", x.size()},
           {"estimate", s.estimate},
           {"reference_value", ref},
           {"gap", std::abs(s.estimate - ref)},
           {"residual", s.residual},
           {"iterations", s.iterations},
           {"bracket", {s.bracket_used.lo, s.bracket_used.hi}}};
    if (s.flat_interval) {
      j["flat_interval"] = {s.flat_interval->first, s.flat_interval->second};
    } else {
      j["flat_interval"] = nullptr;
    }
    return j;
  }
  const auto r = mle::verify_characterization(d, kind, reference, o.trials, o.sample_size, o.seed);
  return {{"density", r.density},
          {"kind", mle::to_string(r.kind)},
          {"reference", mle::to_string(r.reference)},
          {"n_trials", r.n_trials},
          {"sample_size", r.sample_size},
          {"seed", r.seed},
          {"max_abs_gap", r.max_abs_gap},
          {"failures", r.failures}};
}

json cmd_cauchy_check(const Options& o) {
  RealFn score;
  std::string label;
  std::optional<Density> d;
  if (!o.score_expr.empty()) {
    const auto tf = stein::from_expression(o.score_expr);
    score = tf.f;
    label = tf.label;
  } else {
    d = load_density(o.density, o.params);
    const Density dd = *d;
    score = [dd](double x) { return location_score(dd, x).phi; };
    label = "score(" + dd.name() + ")";
  }
  std::vector<std::pair<double, double>> pairs = o.pairs;
  if (pairs.empty()) {
    for (double a : {-2.0, -1.0, 1.0, 2.0}) {
      for (double b : {-2.0, -1.0, 1.0, 2.0}) pairs.emplace_back(a, b);
    }
  }
  json j{{"score", label},
         {"pairs", pairs.size()},
         {"max_residual", mle::cauchy_additivity_check(score, pairs)}};
  if (o.witnesses) {
    j["witnesses"] = {
        {"all_zero", mle::mean_score_residual(score, mle::witness::all_zero(o.witness_n))},
        {"symmetric_pair",
         mle::mean_score_residual(score, mle::witness::symmetric_pair(o.witness_a, o.witness_n))},
        {"triple", mle::mean_score_residual(
                       score, mle::witness::triple(o.witness_a, o.witness_b, o.witness_n))}};
  }
  if (!o.power_base.empty()) {
    if (!d) fail(ErrorCode::InvalidArgument, "--power-base needs --density");
    const Density p = load_density(o.power_base, {});
    const auto fit = mle::fit_power_relation(*d, p);
    j["power_fit"] = {{"base", p.name()},
                      {"c", fit.c},
                      {"max_residual", fit.max_residual},
                      {"strictly_monotone", fit.strictly_monotone}};
  }
  return j;
}

json cmd_reproduce(const Options& o) {
  if (o.dir.empty()) fail(ErrorCode::InvalidArgument, "reproduce needs --dir");
  emit_reproduction_suite(o.dir);
  std::ifstream in(fs::path(o.dir) / "manifest.json");
  const auto manifest = json::parse(in);
  return {{"directory", o.dir}, {"cases", manifest.at("cases").size()}};
}

// CSV: the "points" table when present, key,value rows otherwise.
void flatten(const json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), os);
  } else {
    os << prefix << "," << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

std::string render(const json& j, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    os << j.dump(2) << "\n";
    return os.str();
  }
  if (j.contains("points") && j["points"].is_array() && !j["points"].empty()) {
    const auto& pts = j["points"];
    bool first = true;
    for (const auto& [k, v] : pts[0].items()) {
      os << (first ? "" : ",") << k;
      first = false;
    }
    os << "\n";
    for (const auto& p : pts) {
      first = true;
      for (const auto& [k, v] : p.items()) {
        os << (first ? "" : ",") << (v.is_string() ? v.get<std::string>() : v.dump());
        first = false;
      }
      os << "\n";
    }
    return os.str();
  }
  os << "key,value\n";
  flatten(j, "", os);
  return os.str();
}

void report_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

void append_log(const std::string& path, const std::string& command, int code,
                std::chrono::steady_clock::duration elapsed) {
  if (path.empty()) return;
  std::ofstream log(path, std::ios::app);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  log << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " " << command << " exit=" << code
      << " elapsed_ms="
      << std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() << "\n";
}

void add_density(CLI::App* c, Options& o, const std::string& what) {
  c->add_option("--density", o.density, what + " (family name or density spec file)")
      ->capture_default_str();
  c->add_option("--param", o.params, "Parameter override key=value (repeatable)");
}

void add_tfs(CLI::App* c, Options& o) {
  c->add_option("--operator", o.op, "location | exp_unit | exp_scale")->capture_default_str();
  c->add_option("--f", o.functions, "Test function expression (repeatable; default bank)");
}

}  // namespace

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table = {
      {"score",
       "Location and scale scores of a density",
       {"density::make_builtin", "density::location_score", "density::scale_score",
        "density::score_zero_mean_check", "density::power_density", "numerics::integrate"},
       {"score", "--density", "laplace", "--power", "2", "--at", "1.5", "--zero-mean"}},
      {"stein-check",
       "Expected Stein operator per test function",
       {"stein::boundary_condition_check", "stein::expected_operator", "stein::apply_operator"},
       {"stein-check", "--density", "gumbel"}},
      {"stein-gof",
       "Empirical Stein discrepancy of a sample",
       {"stein::empirical_discrepancy", "stein::apply_operator"},
       {"stein-gof", "--density", "normal", "--draw", "logistic", "--n", "2000", "--seed", "7"}},
      {"varbound",
       "Variance and its Chernoff, Cacoullos and sharp bounds",
       {"varbounds::variance_of", "varbounds::chernoff_bound", "varbounds::cacoullos_bound",
        "varbounds::sharp_bound", "varbounds::bound_report"},
       {"varbound", "--density", "normal", "--g", "x^2", "--chain"}},
      {"fisher",
       "Fisher information of a skew-symmetric model at delta = 0",
       {"skewsym::fisher_info_at_symmetry", "skewsym::singularity_report",
        "skewsym::scores_at_symmetry", "skewsym::skew_density", "numerics::eig_sym3",
        "numerics::central_diff"},
       {"fisher", "--base", "normal", "--crosscheck", "--scores-at", "1", "--density-at", "0.5",
        "--delta", "2"}},
      {"singular-pair",
       "Scale-score singular pair q and its information matrix",
       {"skewsym::construct_singular_scale_pair", "skewsym::fisher_info_at_symmetry"},
       {"singular-pair", "--density", "normal", "--c1", "1", "--c2", "2"}},
      {"mle-verify",
       "Score-equation roots against reference estimators",
       {"mle::solve_location_mle", "mle::solve_scale_mle", "mle::verify_characterization",
        "numerics::find_root"},
       {"mle-verify", "--density", "exponential", "--kind", "scale", "--trials", "20"}},
      {"cauchy-check",
       "Cauchy additivity residual of a score and power-family fit",
       {"mle::cauchy_additivity_check", "mle::fit_power_relation"},
       {"cauchy-check", "--density", "normal", "--witnesses", "--power-base", "normal"}},
      {"reproduce", "Write the reproduction suite", {"cli::emit_reproduction_suite"}, {}},
      {"run-suite", "Run a reproduction suite and check its manifest", {}, {}},
  };
  return table;
}

const std::vector<std::string>& module_operations() {
  static const std::vector<std::string> ops = {
      "numerics::integrate",
      "numerics::find_root",
      "numerics::central_diff",
      "numerics::eig_sym3",
      "density::make_builtin",
      "density::location_score",
      "density::scale_score",
      "density::score_zero_mean_check",
      "density::power_density",
      "stein::apply_operator",
      "stein::boundary_condition_check",
      "stein::expected_operator",
      "stein::empirical_discrepancy",
      "varbounds::variance_of",
      "varbounds::chernoff_bound",
      "varbounds::cacoullos_bound",
      "varbounds::sharp_bound",
      "varbounds::bound_report",
      "skewsym::skew_density",
      "skewsym::scores_at_symmetry",
      "skewsym::fisher_info_at_symmetry",
      "skewsym::construct_singular_scale_pair",
      "skewsym::singularity_report",
      "mle::solve_location_mle",
      "mle::solve_scale_mle",
      "mle::verify_characterization",
      "mle::cauchy_additivity_check",
      "mle::fit_power_relation",
      "cli::emit_reproduction_suite",
  };
  return ops;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  parallel::apply_thread_cap_from_env();
  const auto started = std::chrono::steady_clock::now();

  CLI::App app{"scorekit: score functions, Stein operators, variance bounds, Fisher information "
               "singularity and MLE characterizations"};
  app.set_config("--config", "", "TOML file with a [command] table; command-line flags win");
  app.fallthrough();
  app.require_subcommand(1);
  std::string output;
  std::string format = "json";
  std::string log_path;
  app.add_option("--output,-o", output, "Write the report here instead of stdout");
  app.add_option("--format", format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--log", log_path, "Append a timestamped run record to this file");

  Options o;
  const auto sub = [&](const std::string& name) {
    for (const auto& c : command_table()) {
      if (c.name == name) {
        auto* s = app.add_subcommand(name, c.summary);
        s->configurable();
        return s;
      }
    }
    fail(ErrorCode::InvalidArgument, "no command " + name);
  };

  auto* score = sub("score");
  add_density(score, o, "Density");
  score->add_option("--at", o.at, "Evaluation point (repeatable)");
  score->add_option("--grid", o.grid, "LO HI COUNT evenly spaced points")->expected(3);
  score->add_option("--power", o.power, "Replace the density by its normalized c-th power");
  score->add_flag("--zero-mean", o.zero_mean, "Report E[phi]");
  score->add_flag("--log-concavity", o.log_concavity, "Report the log-concavity grid checks");

  auto* sc = sub("stein-check");
  add_density(sc, o, "Target density");
  add_tfs(sc, o);

  auto* gof = sub("stein-gof");
  add_density(gof, o, "Target density");
  add_tfs(gof, o);
  gof->add_option("--sample", o.sample, "Sample CSV (one value per line, optional header x)");
  gof->add_option("--draw", o.draw, "Draw the sample from this density instead");
  gof->add_option("--draw-param", o.draw_params, "Parameter override for --draw");
  gof->add_option("--n", o.draw_n, "Size of the drawn sample")->capture_default_str();
  gof->add_option("--seed", o.seed, "Seed of the drawn sample")->capture_default_str();

  auto* vb = sub("varbound");
  add_density(vb, o, "Density");
  vb->add_option("--g", o.g, "Function g(x) as an expression")->capture_default_str();
  vb->add_flag("--chain", o.chain, "Also report the Cauchy-Schwarz chain");

  auto* fi = sub("fisher");
  fi->add_option("--model", o.model, "Model spec file (overrides the model flags)");
  fi->add_option("--base", o.base, "Base density q")->capture_default_str();
  fi->add_option("--param", o.params, "Parameter override for the base");
  fi->add_option("--arg", o.arg, "identity | location_score | scale_score | skew_t | expression")
      ->capture_default_str();
  fi->add_option("--arg-density", o.arg_density, "p for the score arguments (default: base)");
  fi->add_option("--arg-nu", o.arg_nu, "nu of the skew_t argument")->capture_default_str();
  fi->add_option("--arg-expr", o.arg_expr, "w(z) for the expression argument");
  fi->add_option("--parity", o.parity, "odd | even, for the expression argument");
  fi->add_option("--cdf", o.cdf, "normal | logistic | student")->capture_default_str();
  fi->add_option("--cdf-nu", o.cdf_nu, "Degrees of freedom of the student cdf")
      ->capture_default_str();
  fi->add_option("--mu", o.mu, "Location")->capture_default_str();
  fi->add_option("--sigma", o.sigma, "Scale")->capture_default_str();
  fi->add_option("--delta", o.delta, "Skewness, used by --density-at")->capture_default_str();
  fi->add_option("--rank-tol", o.rank_tol, "Relative eigenvalue tolerance")->capture_default_str();
  fi->add_flag("--crosscheck", o.crosscheck, "Compare scores with finite differences");
  fi->add_option("--scores-at", o.scores_at, "Report the three scores here (repeatable)");
  fi->add_option("--density-at", o.density_at, "Report the model density here (repeatable)");

  auto* sp = sub("singular-pair");
  add_density(sp, o, "Density p");
  sp->add_option("--c1", o.c1)->capture_default_str();
  sp->add_option("--c2", o.c2)->capture_default_str();
  sp->add_option("--cdf", o.cdf, "normal | logistic | student")->capture_default_str();
  sp->add_option("--cdf-nu", o.cdf_nu)->capture_default_str();
  sp->add_option("--rank-tol", o.rank_tol)->capture_default_str();

  auto* mv = sub("mle-verify");
  add_density(mv, o, "Density");
  mv->add_option("--kind", o.kind, "location | scale")->capture_default_str();
  mv->add_option("--reference", o.reference, "mean | median | rms")->capture_default_str();
  mv->add_option("--trials", o.trials)->capture_default_str();
  mv->add_option("--n", o.sample_size, "Sample size per trial")->capture_default_str();
  mv->add_option("--seed", o.seed)->capture_default_str();
  mv->add_option("--sample", o.sample, "Solve on this sample CSV instead of simulating");

  auto* cc = sub("cauchy-check");
  add_density(cc, o, "Density whose score is checked");
  cc->add_option("--score", o.score_expr, "Score as an expression instead of a density");
  cc->add_option("--pair", o.pairs, "A B pair (repeatable; default {-2,-1,1,2}^2)");
  cc->add_flag("--witnesses", o.witnesses, "Report the mean-score residual on witness samples");
  cc->add_option("--witness-a", o.witness_a)->capture_default_str();
  cc->add_option("--witness-b", o.witness_b)->capture_default_str();
  cc->add_option("--witness-n", o.witness_n)->capture_default_str();
  cc->add_option("--power-base", o.power_base, "Fit the density's score as c times this one's");

  auto* rp = sub("reproduce");
  rp->add_option("--dir", o.dir, "Output directory")->required();

  auto* rs = sub("run-suite");
  rs->add_option("--dir", o.dir, "Suite directory written by reproduce")->required();

  std::string command = "?";
  int code = kOk;
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    const auto selected = app.get_subcommands();
    const std::set<CLI::App*> parsed(selected.begin(), selected.end());
    if (parsed.size() != 1) fail(ErrorCode::ParseError, "exactly one command is required");
    command = (*parsed.begin())->get_name();

    std::string text;
    if (command == "run-suite") {
      std::ostringstream summary;
      code = run_suite(o.dir, summary, err);
      text = summary.str();
    } else {
      json j;
      if (command == "score") j = cmd_score(o);
      else if (command == "stein-check") j = cmd_stein_check(o);
      else if (command == "stein-gof") j = cmd_stein_gof(o);
      else if (command == "varbound") j = cmd_varbound(o);
      else if (command == "fisher") j = cmd_fisher(o);
      else if (command == "singular-pair") j = cmd_singular_pair(o);
      else if (command == "mle-verify") j = cmd_mle_verify(o);
      else if (command == "cauchy-check") j = cmd_cauchy_check(o);
      else if (command == "reproduce") j = cmd_reproduce(o);
      text = render(j, format);
    }
    if (output.empty()) {
      out << text;
    } else {
      std::ofstream f(output, std::ios::binary);
      if (!f) fail(ErrorCode::IoError, "cannot write " + output);
      f << text;
    }
  } catch (const CLI::CallForHelp& e) {
    code = app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    code = app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report_error(err, "ParseError", e.what());
    code = kValidationFailure;
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    code = is_numerical(e.code()) ? kNumericalFailure : kValidationFailure;
  } catch (const json::exception& e) {
    report_error(err, "ParseError", e.what());
    code = kValidationFailure;
  } catch (const std::exception& e) {
    report_error(err, "Internal", e.what());
    code = kNumericalFailure;
  }
  append_log(log_path, command, code, std::chrono::steady_clock::now() - started);
  return code;
}

namespace {

struct SuiteCase {
  std::string id;
  int criterion;
  std::string description;
  std::string config;
  json checks;
};

json check(const std::string& pointer, const std::string& op, json value, double tol = 0.0) {
  json c{{"pointer", pointer}, {"op", op}, {"value", std::move(value)}};
  if (tol > 0.0) c["tol"] = tol;
  return c;
}

std::vector<SuiteCase> suite_cases() {
  std::vector<SuiteCase> cases;
  cases.push_back({"c1-normal-score", 1, "phi(x) = -x and psi(x) = 1 - x^2 for the standard normal",
                   "[score]\ndensity = \"normal\"\nat = [2.0]\n",
                   {check("/phi", "near", -2.0, 1e-12), check("/psi", "near", -3.0, 1e-12)}});
  cases.push_back({"c1-exponential-scale-score", 1, "psi(x) = 1 - x for the unit exponential",
                   "[score]\ndensity = \"exponential\"\nat = [0.5]\n",
                   {check("/psi", "near", 0.5, 1e-12)}});
  for (const auto& fam : builtin_families()) {
    cases.push_back({"c2-stein-" + fam, 2, "E[f' + phi f] = 0 over admissible bank entries",
                     "[stein-check]\ndensity = \"" + fam + "\"\n",
                     {check("/max_abs", "le", 1e-7), check("/admissible_count", "ge", 1)}});
  }
  for (const std::string op : {"exp_unit", "exp_scale"}) {
    cases.push_back({"c2-stein-exponential-" + op, 2, "exponential Stein operator " + op,
                     "[stein-check]\ndensity = \"exponential\"\noperator = \"" + op + "\"\n",
                     {check("/max_abs", "le", 1e-7), check("/admissible_count", "ge", 1)}});
  }
  const std::string bank = "f = [\"x\", \"x^2\", \"sin(x)\"]\n";
  cases.push_back({"c3-gof-normal", 3, "normal sample against the normal target",
                   "[stein-gof]\ndensity = \"normal\"\ndraw = \"normal\"\nn = 10000\nseed = 42\n" +
                       bank,
                   {check("/max_abs", "le", 0.05)}});
  cases.push_back({"c3-gof-laplace", 3, "Laplace sample: mean of 1 - x^2 near -1",
                   "[stein-gof]\ndensity = \"normal\"\ndraw = \"laplace\"\nn = 10000\nseed = 42\n" +
                       bank,
                   {check("/per_function/0/value", "within", json::array({-1.1, -0.9}))}});
  cases.push_back({"c4-varbound-normal-linear", 4, "Chernoff equality and Cacoullos collapse",
                   "[varbound]\ndensity = \"normal\"\ng = \"x\"\n",
                   {check("/ratios/chernoff", "within", json::array({1.0 - 1e-8, 1.0 + 1e-8})),
                    check("/bounds/1/value", "near_pointer", "/bounds/0/value", 2e-8)}});
  cases.push_back({"c4-varbound-normal-cubic", 4, "bounds dominate the variance of x^3",
                   "[varbound]\ndensity = \"normal\"\ng = \"x^3\"\n",
                   {check("/variance", "le_pointer", "/bounds/0/value"),
                    check("/variance", "le_pointer", "/bounds/1/value"),
                    check("/variance", "le_pointer", "/bounds/2/value")}});
  cases.push_back({"c4-varbound-exponential", 4, "Cacoullos bound 2 against variance 1",
                   "[varbound]\ndensity = \"exponential\"\ng = \"x\"\n",
                   {check("/bounds/1/value", "near", 2.0, 1e-6), check("/variance", "near", 1.0, 1e-6),
                    check("/bounds/2/reason", "contains", "NotStrictlyLogConcave")}});
  cases.push_back({"c5-varbound-logistic-sharp", 5, "sharp bound equality for g = phi_p",
                   "[varbound]\ndensity = \"logistic\"\ng = \"-tanh(x/2)\"\n",
                   {check("/ratios/sharp", "within", json::array({0.99999, 1.00001}))}});
  cases.push_back({"c6-fisher-skew-normal", 6, "skew-normal information has rank 2",
                   "[fisher]\nmodel = \"models/skew_normal.toml\"\n",
                   {check("/rank", "eq", 2), check("/min_rel_eigenvalue", "le", 1e-8)}});
  cases.push_back({"c6-fisher-skew-t5", 6, "skew-t (nu = 5) information has rank 3",
                   "[fisher]\nmodel = \"models/skew_t5.toml\"\n",
                   {check("/rank", "eq", 3), check("/min_rel_eigenvalue", "ge", 1e-3)}});
  for (const std::string f : {"normal", "logistic", "student"}) {
    cases.push_back({"c6-fisher-skewp-laplace-" + f, 6, "Laplace skew-p model is singular for any F",
                     "[fisher]\nmodel = \"models/skewp_laplace_" + f + ".toml\"\n",
                     {check("/rank", "eq", 2)}});
  }
  cases.push_back({"c7-singular-pair-normal", 7, "q = x^2 phi(x) gives rank 2 with (c1, c2) = (1, 2)",
                   "[singular-pair]\ndensity = \"normal\"\nc1 = 1.0\nc2 = 2.0\n",
                   {check("/fisher/rank", "eq", 2), check("/fisher/collinearity/c1", "near", 1.0, 0.01),
                    check("/fisher/collinearity/c2", "near", 2.0, 0.01)}});
  cases.push_back({"c7-fisher-logistic-scale-score", 7, "logistic base with psi_normal argument",
                   "[fisher]\nmodel = \"models/scass_logistic_normal.toml\"\n",
                   {check("/rank", "eq", 3)}});
  cases.push_back({"c8-mle-normal-location", 8, "normal location root equals the mean",
                   "[mle-verify]\ndensity = \"normal\"\nkind = \"location\"\nreference = \"mean\"\n"
                   "trials = 100\nn = 5\nseed = 42\n",
                   {check("/max_abs_gap", "le", 1e-9), check("/failures", "eq", 0)}});
  cases.push_back({"c8-mle-exponential-scale", 8, "exponential scale root equals the mean",
                   "[mle-verify]\ndensity = \"exponential\"\nkind = \"scale\"\nreference = \"mean\"\n"
                   "trials = 100\nn = 5\nseed = 42\n",
                   {check("/max_abs_gap", "le", 1e-9), check("/failures", "eq", 0)}});
  cases.push_back({"c8-mle-normal-scale", 8, "normal scale root equals the RMS",
                   "[mle-verify]\ndensity = \"normal\"\nkind = \"scale\"\nreference = \"rms\"\n"
                   "trials = 100\nn = 5\nseed = 42\n",
                   {check("/max_abs_gap", "le", 1e-9), check("/failures", "eq", 0)}});
  cases.push_back({"c8-mle-logistic-witness", 8, "logistic root differs from the mean on {0, 0, 3}",
                   "[mle-verify]\ndensity = \"logistic\"\nsample = \"samples/logistic_witness.csv\"\n",
                   {check("/gap", "ge", 0.01)}});
  cases.push_back({"c8-cauchy-normal", 8, "normal score is additive",
                   "[cauchy-check]\ndensity = \"normal\"\n",
                   {check("/max_residual", "le", 1e-9)}});
  cases.push_back({"c8-cauchy-laplace", 8, "Laplace score fails additivity at (1, 1)",
                   "[cauchy-check]\ndensity = \"laplace\"\npair = [1.0, 1.0]\n",
                   {check("/max_residual", "near", 1.0, 1e-12)}});
  for (const auto& [c, tag] : std::vector<std::pair<double, std::string>>{
           {0.5, "0.5"}, {1.0, "1"}, {2.0, "2"}, {4.0, "4"}}) {
    cases.push_back({"c9-power-normal-" + tag, 9, "recover c from p^c with p normal",
                     "[cauchy-check]\ndensity = \"densities/normal_power_" + tag +
                         ".toml\"\npower-base = \"normal\"\n",
                     {check("/power_fit/c", "near", c, 1e-6 * c)}});
  }
  return cases;
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write " + p.string());
  f << text;
  if (!f) fail(ErrorCode::IoError, "write failed for " + p.string());
}

double as_number(const json& j, const std::string& what) {
  if (!j.is_number()) fail(ErrorCode::ParseError, what + " is not a number");
  return j.get<double>();
}

json evaluate(const json& report, const json& c) {
  const auto ptr = json::json_pointer(c.at("pointer").get<std::string>());
  const auto op = c.at("op").get<std::string>();
  json out{{"pointer", c.at("pointer")}, {"op", op}, {"expected", c.at("value")}};
  if (c.contains("tol")) out["tol"] = c["tol"];
  if (!report.contains(ptr)) {
    out["actual"] = nullptr;
    out["passed"] = false;
    return out;
  }
  const json& actual = report.at(ptr);
  out["actual"] = actual;
  bool ok = false;
  const json& v = c.at("value");
  const double tol = c.value("tol", 0.0);
  if (op == "eq") {
    ok = actual == v;
  } else if (op == "contains") {
    ok = actual.is_string() && actual.get<std::string>().find(v.get<std::string>()) != std::string::npos;
  } else if (actual.is_number()) {
    const double a = actual.get<double>();
    if (op == "near") ok = std::abs(a - as_number(v, "value")) <= tol;
    else if (op == "le") ok = a <= as_number(v, "value");
    else if (op == "ge") ok = a >= as_number(v, "value");
    else if (op == "within") ok = a >= as_number(v.at(0), "lo") && a <= as_number(v.at(1), "hi");
    else if (op == "near_pointer" || op == "le_pointer") {
      const auto other = json::json_pointer(v.get<std::string>());
      if (report.contains(other) && report.at(other).is_number()) {
        const double b = report.at(other).get<double>();
        ok = op == "near_pointer" ? std::abs(a - b) <= tol : a <= b;
      }
    } else {
      fail(ErrorCode::ParseError, "unknown check op '" + op + "'");
    }
  }
  out["passed"] = ok;
  return out;
}

class ScopedCwd {
 public:
  explicit ScopedCwd(const fs::path& dir) : saved_(fs::current_path()) { fs::current_path(dir); }
  ~ScopedCwd() {
    std::error_code ec;
    fs::current_path(saved_, ec);
  }
  ScopedCwd(const ScopedCwd&) = delete;
  ScopedCwd& operator=(const ScopedCwd&) = delete;

 private:
  fs::path saved_;
};

}  // namespace

void emit_reproduction_suite(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  write_text(dir / "models/skew_normal.toml",
             "[base]\nfamily = \"normal\"\n\n[arg]\nkind = \"identity\"\n\n[skewing]\ncdf = "
             "\"normal\"\n\n[params]\nmu = 0.0\nsigma = 1.0\ndelta = 0.0\n");
  write_text(dir / "models/skew_t5.toml",
             "[base]\nfamily = \"normal\"\n\n[arg]\nkind = \"skew_t\"\nnu = 5.0\n\n[skewing]\ncdf = "
             "\"student\"\nnu = 6.0\n");
  for (const std::string f : {"normal", "logistic", "student"}) {
    write_text(dir / ("models/skewp_laplace_" + f + ".toml"),
               "[base]\nfamily = \"laplace\"\n\n[arg]\nkind = \"location_score\"\n\n[skewing]\ncdf = \"" +
                   f + "\"\n" + (f == "student" ? "nu = 6.0\n" : ""));
  }
  write_text(dir / "models/scass_logistic_normal.toml",
             "[base]\nfamily = \"logistic\"\n\n[arg]\nkind = \"scale_score\"\n\n[arg.density]\nfamily = "
             "\"normal\"\n\n[skewing]\ncdf = \"normal\"\n");
  for (const std::string tag : {"0.5", "1", "2", "4"}) {
    write_text(dir / ("densities/normal_power_" + tag + ".toml"),
               "family = \"normal\"\npower = " + tag + "\n");
  }
  write_text(dir / "samples/logistic_witness.csv", "x\n0\n0\n3\n");

  json manifest;
  manifest["suite"] = "scorekit reproduction suite";
  json cases = json::array();
  for (const auto& c : suite_cases()) {
    const std::string cfg = "cases/" + c.id + ".toml";
    write_text(dir / cfg, "# " + c.description + "\n" + c.config);
    cases.push_back({{"id", c.id},
                     {"criterion", c.criterion},
                     {"description", c.description},
                     {"config", cfg},
                     {"checks", c.checks}});
  }
  manifest["cases"] = cases;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

int run_suite(const fs::path& dir, std::ostream& out, std::ostream& err) {
  std::ifstream in(dir / "manifest.json");
  if (!in) fail(ErrorCode::IoError, "no manifest.json in " + dir.string());
  const auto manifest = json::parse(in);
  const fs::path abs_dir = fs::absolute(dir);
  fs::create_directories(abs_dir / "outputs");

  json results = json::array();
  int passed = 0;
  int failed = 0;
  for (const auto& c : manifest.at("cases")) {
    const auto id = c.at("id").get<std::string>();
    const std::string out_rel = "outputs/" + id + ".json";
    std::ostringstream case_out;
    std::ostringstream case_err;
    int code = 0;
    {
      ScopedCwd cwd(abs_dir);
      code = run({"--config", c.at("config").get<std::string>(), "--output", out_rel}, case_out,
                 case_err);
    }
    json entry{{"id", id}, {"criterion", c.at("criterion")}, {"exit_code", code}};
    bool ok = code == kOk;
    json checks = json::array();
    if (code == kOk) {
      std::ifstream rf(abs_dir / out_rel);
      const auto report = json::parse(rf);
      for (const auto& chk : c.at("checks")) {
        auto r = evaluate(report, chk);
        ok = ok && r.at("passed").get<bool>();
        checks.push_back(std::move(r));
      }
    } else {
      entry["error"] = case_err.str();
      err << id << ": " << case_err.str();
    }
    entry["checks"] = checks;
    entry["passed"] = ok;
    (ok ? passed : failed) += 1;
    results.push_back(std::move(entry));
  }
  json summary{{"cases", results}, {"passed", passed}, {"failed", failed}};
  out << summary.dump(2) << "\n";
  return failed == 0 ? kOk : kValidationFailure;
}

}  // namespace scorekit::cli
