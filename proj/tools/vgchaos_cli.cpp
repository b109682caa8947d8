// vgchaos-cli: experiment runner. Every subcommand reads one JSON config and
// writes CSV tables plus a JSON summary into --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vgchaos/chaos2.hpp"
#include "vgchaos/empirical.hpp"
#include "vgchaos/errors.hpp"
#include "vgchaos/experiments.hpp"
#include "vgchaos/stats.hpp"
#include "vgchaos/stein.hpp"
#include "vgchaos/tensorq.hpp"
#include "vgchaos/vgdist.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace vgchaos;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mc;
  bool reproducible = false;
};

struct Context {
  Options opt;
  json cfg;
  fs::path base_dir;  // directory of the config, for file references

  std::uint64_t seed() const {
    if (opt.seed) return *opt.seed;
    return cfg.value("seed", std::uint64_t{1});
  }
  std::size_t mc(std::size_t fallback) const {
    if (opt.mc) return *opt.mc;
    return cfg.value("mc", fallback);
  }
};

std::string timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_out(const Context& ctx, const std::string& name) {
  fs::create_directories(ctx.opt.out);
  const fs::path p = fs::path(ctx.opt.out) / name;
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << std::setprecision(17);
  return os;
}

// CSV with an optional timestamp comment, header row, then rows.
class Csv {
 public:
  Csv(const Context& ctx, const std::string& name, const std::vector<std::string>& cols)
      : os_(open_out(ctx, name)) {
    if (!ctx.opt.reproducible) os_ << "# generated " << timestamp() << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    std::size_t i = 0;
    ((os_ << (i++ ? "," : "") << v), ...);
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

void write_summary(const Context& ctx, const std::string& name, json j) {
  if (!ctx.opt.reproducible) j["generated"] = timestamp();
  auto os = open_out(ctx, name);
  os << j.dump(2) << '\n';
}

json report_json(const BoundReport& r) {
  json terms = json::array();
  for (const auto& t : r.terms)
    terms.push_back({{"name", t.name}, {"value", t.value}, {"std_error", t.std_error}});
  return {{"kind", r.kind},     {"terms", terms},
          {"total", r.total},   {"c1", r.c1},
          {"c2", r.c2},         {"interior_negative", r.interior_negative}};
}

void write_report_csv(const Context& ctx, const std::string& name, const BoundReport& r) {
  Csv csv(ctx, name, {"term", "value", "std_error"});
  for (const auto& t : r.terms) csv.row(t.name, t.value, t.std_error);
  csv.row("total", r.total, 0.0);
}

// ---- config parsing -----------------------------------------------------

Eigen::MatrixXd matrix_from(const json& j) {
  const std::size_t d = j.size();
  Eigen::MatrixXd m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    if (j[i].size() != d) throw std::invalid_argument("kernel rows must form a square matrix");
    for (std::size_t k = 0; k < d; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

Kernel2 parse_kernel(const Context& ctx, const json& j) {
  if (j.is_array()) return Kernel2(matrix_from(j));
  if (j.contains("file")) {
    fs::path p = j["file"].get<std::string>();
    if (p.is_relative()) p = ctx.base_dir / p;
    std::ifstream is(p);
    if (!is) throw std::runtime_error("cannot read kernel file " + p.string());
    return read_kernel_csv(is);
  }
  if (j.contains("diag")) {
    const auto d = j["diag"].get<std::vector<double>>();
    return Kernel2::diagonal(d);
  }
  if (j.contains("symgamma")) {
    const auto& s = j["symgamma"];
    return exact_symgamma_kernel(s.at("m").get<int>(), s.at("lambda").get<double>()).embed();
  }
  throw std::invalid_argument("kernel: expected nested array, {file}, {diag} or {symgamma}");
}

SymTensor parse_tensor(const json& j) {
  const int q = j.at("q").get<int>();
  const int d = j.at("dim").get<int>();
  if (j.contains("data")) return SymTensor(Tensor(q, d, j["data"].get<std::vector<double>>()));
  if (j.contains("random_seed")) return random_symtensor(q, d, j["random_seed"].get<std::uint64_t>());
  throw std::invalid_argument("tensor: expected data or random_seed");
}

VGParams parse_target(const json& j) {
  if (j.contains("special")) {
    const auto args = j.value("args", std::vector<double>{});
    return special_case(j["special"].get<std::string>(), args);
  }
  return VGParams(j.at("r").get<double>(), j.value("theta", 0.0), j.value("sigma", 1.0),
                  j.value("mu", 0.0));
}

json target_json(const VGParams& p) {
  return {{"r", p.r}, {"theta", p.theta}, {"sigma", p.sigma}, {"mu", p.mu}, {"origin", p.origin}};
}

json cumulant_json(const CumulantSet& c) {
  json k = json::object();
  for (int j = 1; j <= 6; ++j) k["k" + std::to_string(j)] = c(j);
  return k;
}

std::vector<int> int_list(const json& cfg, const char* key, std::vector<int> fallback) {
  return cfg.contains(key) ? cfg[key].get<std::vector<int>>() : fallback;
}

// ---- subcommands --------------------------------------------------------

void cmd_cumulants(const Context& ctx) {
  const auto& c = ctx.cfg;
  CumulantSet k;
  std::string source;
  if (c.contains("kernel")) {
    k = cumulants2(parse_kernel(ctx, c["kernel"]));
    source = "kernel";
  } else if (c.contains("tensor")) {
    const SymTensor f = parse_tensor(c["tensor"]);
    if (f.order() != 2) throw UnsupportedError("cumulants: tensors must have q = 2");
    k = cumulants2(to_kernel2(f));
    source = "tensor";
  } else if (c.contains("target")) {
    k = vg_cumulants(parse_target(c["target"]));
    source = "target";
  } else {
    throw std::invalid_argument("cumulants: config needs kernel, tensor or target");
  }
  Csv csv(ctx, "cumulants.csv", {"order", "cumulant", "moment"});
  const auto m = k.moments();
  for (int j = 1; j <= 6; ++j) csv.row(j, k(j), m[j - 1]);
  json s = {{"command", "cumulants"}, {"source", source}, {"cumulants", cumulant_json(k)}};
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

void cmd_bound(const Context& ctx) {
  const auto& c = ctx.cfg;
  json s = {{"command", "bound"}};
  if (c.contains("tensors")) {
    const SymTensor f1 = parse_tensor(c["tensors"].at(0));
    const SymTensor f2 = parse_tensor(c["tensors"].at(1));
    const auto r = mixed_sum_bound(f1, f2, c.at("lambda").get<double>());
    write_report_csv(ctx, "bound.csv", r);
    s["report"] = report_json(r);
  } else if (c.contains("tensor")) {
    const VGParams t = parse_target(c.at("target"));
    const auto r = vg_contraction_bound(parse_tensor(c["tensor"]), t);
    write_report_csv(ctx, "bound.csv", r);
    s["target"] = target_json(t);
    s["report"] = report_json(r);
  } else {
    const Kernel2 a = parse_kernel(ctx, c.at("kernel"));
    const VGParams t = parse_target(c.at("target"));
    const auto r = vg_bound2(a, t);
    write_report_csv(ctx, "bound.csv", r);
    s["target"] = target_json(t);
    s["report"] = report_json(r);
    if (c.value("l1", false)) {
      const auto l1 = result1_l1_bound(a, t, ctx.mc(1'000'000), ctx.seed());
      write_report_csv(ctx, "bound_l1.csv", l1);
      s["l1_report"] = report_json(l1);
    }
  }
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

void cmd_stein_check(const Context& ctx) {
  const auto& c = ctx.cfg;
  const VGParams t = parse_target(c.at("target"));
  json s = {{"command", "stein-check"}, {"target", target_json(t)}};

  Csv res(ctx, "residuals.csv", {"test_function", "residual"});
  json residuals = json::object();
  for (int k = 0; k <= c.value("max_degree", 5); ++k) {
    const double v = residual_vg(t, monomial(k));
    res.row("x^" + std::to_string(k), v);
    residuals["x^" + std::to_string(k)] = v;
  }
  s["residuals"] = residuals;

  struct Named {
    std::string name;
    std::function<double(double)> h;
  };
  const std::vector<Named> hs = {
      {"sin", [](double x) { return std::sin(x); }},
      {"atan", [](double x) { return std::atan(x); }},
      {"tanh", [](double x) { return std::tanh(x); }},
      {"softabs", [](double x) { return std::sqrt(1.0 + x * x); }},
      {"x_over_1px2", [](double x) { return x / (1.0 + x * x); }},
  };
  std::vector<std::function<double(double)>> fns;
  for (const auto& h : hs) fns.push_back(h.h);
  const auto sols = solve_stein_batch(t, fns);

  const bool integer_sym = t.symmetric() && std::fmod(0.5 * t.r, 1.0) == 0.0;
  Csv sum(ctx, "stein.csv",
          {"test_function", "residual_sup", "jump_f", "jump_df", "sup_f", "sup_df", "sup_d2f",
           "bound_f", "bound_df", "bound_d2f"});
  json solutions = json::array();
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& sol = sols[i];
    double bf = NAN, bdf = NAN, bd2f = NAN;
    json js = {{"test_function", hs[i].name},
               {"residual_sup", sol.residual_sup()},
               {"jump_f", sol.jump_f()},
               {"jump_df", sol.jump_df()},
               {"sup_f", sol.sup_f()},
               {"sup_df", sol.sup_df()},
               {"sup_d2f", sol.sup_d2f()}};
    if (integer_sym) {
      const auto chk = stein_bound_check(sol, 1.0 / t.sigma, 0.5 * t.r);
      bf = chk.bound_f, bdf = chk.bound_df, bd2f = chk.bound_d2f;
      js["bounds_hold"] = chk.holds();
      js["bound_f"] = bf, js["bound_df"] = bdf, js["bound_d2f"] = bd2f;
    }
    sum.row(hs[i].name, sol.residual_sup(), sol.jump_f(), sol.jump_df(), sol.sup_f(),
            sol.sup_df(), sol.sup_d2f(), bf, bdf, bd2f);
    auto os = open_out(ctx, "solution_" + hs[i].name + ".csv");
    sol.write_csv(os);
    solutions.push_back(js);
  }
  s["solutions"] = solutions;
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

void cmd_sample(const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.mc(100'000);
  const std::uint64_t seed = ctx.seed();
  SampleSet set;
  if (c.contains("kernel")) {
    set = SampleSet(sample_chaos2(parse_kernel(ctx, c["kernel"]), n, seed), seed, "chaos2");
  } else if (c.contains("tensor")) {
    const SymTensor f = parse_tensor(c["tensor"]);
    set = SampleSet(sample_multiple_integrals(f, n, seed), seed,
                    "multiple_integral q=" + std::to_string(f.order()));
  } else if (c.contains("coefficients")) {
    const auto& h = c["coefficients"];
    const HomogeneousCoeff coeff =
        h.is_array() ? HomogeneousCoeff::from_matrix(matrix_from(h))
                     : HomogeneousCoeff(h.at("n").get<int>(), h.at("q").get<int>(),
                                        h.at("data").get<std::vector<double>>());
    set = homogeneous_sum(coeff, parse_base_law(c.value("base", std::string("gaussian"))), n, seed);
  } else if (c.contains("target")) {
    set = SampleSet(vg_sample(parse_target(c["target"]), n, seed), seed, "vg");
  } else {
    throw std::invalid_argument("sample: config needs kernel, tensor, coefficients or target");
  }
  {
    auto os = open_out(ctx, "sample.csv");
    set.write_csv(os);
  }
  const auto ks = k_statistics(set);
  json s = {{"command", "sample"}, {"n", set.size()}, {"seed", seed}, {"meta", set.meta},
            {"k_statistics", cumulant_json(ks.kappa)},
            {"k_statistics_se", ks.std_error}};
  if (c.contains("compare_to")) s["w1_to_target"] = wasserstein_to_vg(set, parse_target(c["compare_to"]));
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

void cmd_converge(const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::string kind = c.value("kind", std::string("six_moment"));
  json s = {{"command", "converge"}, {"kind", kind}};
  std::vector<double> xs, ys, ys2;
  if (kind == "six_moment") {
    SixMomentConfig sc;
    sc.lambda = c.value("lambda", sc.lambda);
    sc.m = c.value("m", sc.m);
    sc.ns = int_list(c, "ns", sc.ns);
    sc.perturbation_norm = c.value("perturbation_norm", sc.perturbation_norm);
    sc.n_mc = ctx.mc(sc.n_mc);
    sc.seed = ctx.seed();
    const auto rows = run_six_moment(sc);
    Csv csv(ctx, "six_moment.csv",
            {"n", "m2_gap", "m4_gap", "m6_gap", "bound_interior", "bound_total", "empirical_dW"});
    for (const auto& r : rows) {
      csv.row(r.n, r.m2_gap, r.m4_gap, r.m6_gap, r.bound_interior, r.bound_total, r.empirical_dw);
      xs.push_back(r.n), ys.push_back(r.bound_total), ys2.push_back(r.empirical_dw);
    }
    s["slope_bound_total"] = loglog_slope(xs, ys);
    s["slope_empirical_dW"] = loglog_slope(xs, ys2);
  } else if (kind == "clt") {
    CltConfig cc;
    cc.ns = int_list(c, "ns", cc.ns);
    cc.variance = c.value("variance", cc.variance);
    const auto rows = run_clt(cc);
    Csv csv(ctx, "clt.csv", {"n", "T", "sqrt_T", "variance_gap", "gauss_bound2"});
    for (const auto& r : rows) {
      csv.row(r.n, r.T, r.sqrt_T, r.variance_gap, r.total);
      xs.push_back(r.n), ys.push_back(r.sqrt_T);
    }
    s["slope_sqrt_T"] = loglog_slope(xs, ys);
  } else {
    throw std::invalid_argument("converge: unknown kind " + kind);
  }
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

void cmd_universality(const Context& ctx) {
  const auto& c = ctx.cfg;
  UniversalityConfig uc;
  uc.ns = int_list(c, "ns", uc.ns);
  uc.n_draws = ctx.mc(uc.n_draws);
  uc.seed = ctx.seed();
  uc.base = parse_base_law(c.value("base", std::string("rademacher")));
  const auto rows = run_universality(uc);
  Csv csv(ctx, "universality.csv", {"n", "w1_" + to_string(uc.base) + "_gaussian", "variance"});
  json w = json::array();
  for (const auto& r : rows) {
    csv.row(r.n, r.w1, r.variance);
    w.push_back({{"n", r.n}, {"w1", r.w1}});
  }
  json s = {{"command", "universality"}, {"base", to_string(uc.base)}, {"rows", w}};
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

void cmd_multivariate(const Context& ctx) {
  const auto& c = ctx.cfg;
  std::vector<Kernel2> ks;
  std::vector<VGParams> ts;
  for (const auto& k : c.at("kernels")) ks.push_back(parse_kernel(ctx, k));
  for (const auto& t : c.at("targets")) ts.push_back(parse_target(t));
  const auto r = multivariate_bound(ks, ts, ctx.mc(1'000'000), ctx.seed());
  write_report_csv(ctx, "multivariate.csv", r);
  json s = {{"command", "multivariate"}, {"report", report_json(r)}};
  write_summary(ctx, "summary.json", s);
  std::cout << s.dump(2) << '\n';
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  return json::parse(is);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-Gamma approximation of Wiener chaos: bounds and experiments"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "JSON experiment config");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--seed", opt.seed, "overrides the config seed");
  app.add_option("--mc", opt.mc, "Monte Carlo sample size");
  app.add_flag("--reproducible", opt.reproducible, "omit timestamps from outputs");

  using Cmd = void (*)(const Context&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> cmds = {
      {"cumulants", "cumulants of a kernel, q=2 tensor or target law", cmd_cumulants},
      {"bound", "second-chaos, contraction or two-chaos bound", cmd_bound},
      {"stein-check", "characterization residuals and Stein solutions", cmd_stein_check},
      {"sample", "export draws", cmd_sample},
      {"converge", "six_moment or clt sequence", cmd_converge},
      {"universality", "homogeneous sums against the Gaussian base", cmd_universality},
      {"multivariate", "vector bound and covariance of squares", cmd_multivariate},
  };
  Cmd chosen = nullptr;
  for (const auto& [name, help, fn] : cmds) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&chosen, f = fn] { chosen = f; });
  }
  // "run" dispatches on the config's kind tag.
  auto* run = app.add_subcommand("run", "dispatch on the config kind tag");
  run->fallthrough();
  bool run_chosen = false;
  run->callback([&] { run_chosen = true; });

  CLI11_PARSE(app, argc, argv);
  try {
    Context ctx{opt, load_config(opt.config), fs::path(opt.config).parent_path()};
    if (run_chosen) {
      const std::string kind = ctx.cfg.value("kind", std::string());
      if (kind == "six_moment" || kind == "clt") chosen = cmd_converge;
      else if (kind == "universality") chosen = cmd_universality;
      else if (kind == "multivariate") chosen = cmd_multivariate;
      else if (kind == "bound") chosen = cmd_bound;
      else if (kind == "cumulants") chosen = cmd_cumulants;
      else if (kind == "sample") chosen = cmd_sample;
      else if (kind == "stein-check") chosen = cmd_stein_check;
      else throw std::invalid_argument("unknown experiment kind: " + kind);
    }
    chosen(ctx);
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
