#include "hivelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "hivelab/errors.hpp"
#include "hivelab/functional.hpp"
#include "hivelab/hive.hpp"
#include "hivelab/polytope.hpp"
#include "hivelab/rmt.hpp"
#include "hivelab/spectra.hpp"
#include "hivelab/surface_tension.hpp"
#include "hivelab/vandermonde.hpp"

namespace hivelab::cli {
namespace {

using nlohmann::json;

// Non-finite numbers become strings so the output stays valid JSON.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json volume_json(const VolumeEstimate& v) {
  return {{"volume", num(v.volume())},
          {"log_volume", num(v.log_volume)},
          {"log_std_error", num(v.std_error)},
          {"volume_std_error", num(v.volume_stderr())},
          {"method", to_string(v.method)},
          {"samples", v.samples},
          {"dimension", v.dimension},
          {"phases", v.phases},
          {"bound_only", v.bound_only},
          {"lower_dimensional", v.lower_dimensional}};
}

json fn_json(const FnEstimate& f) {
  return {{"n", f.n},
          {"f", num(f.value)},
          {"std_error", num(f.std_error)},
          {"log_volume", num(f.log_volume)},
          {"log_std_error", num(f.log_std_error)},
          {"method", to_string(f.method)},
          {"samples", f.samples}};
}

json probability_json(const ProbabilityEstimate& p) {
  return {{"p", num(p.p)}, {"std_error", num(p.std_error)}, {"trials", p.trials}, {"hits", p.hits},
          {"shift", num(p.shift)}};
}

json prediction_json(const Prediction& p) {
  return {{"value", num(p.value)},         {"std_error", num(p.std_error)}, {"log_prefactor", num(p.log_prefactor)},
          {"log_volume", num(p.log_volume)}, {"method", p.method},          {"infeasible", p.infeasible}};
}

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
  VolumeMethod method = VolumeMethod::Auto;

  VolumeOptions volume_options(long default_budget) const {
    VolumeOptions o;
    o.budget = cfg.budget > 0 ? cfg.budget : default_budget;
    o.method = method;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    return o;
  }
  McOptions mc_options(long default_trials) const {
    McOptions o;
    o.trials = cfg.budget > 0 ? cfg.budget : default_trials;
    o.seed = cfg.seed;
    o.threads = cfg.threads;
    return o;
  }

  void write(const std::string& text) const {
    if (cfg.out.empty()) {
      out << text;
      return;
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw DomainError("cannot write '" + cfg.out + "'");
    f << text;
  }

  void emit(json j) const {
    json doc{{"schema_version", kSchemaVersion}, {"command", cfg.command}};
    doc.update(j);
    write(doc.dump(2) + "\n");
  }
};

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "RNG seed");
  sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--budget", cfg.budget, "samples, steps or trials");
  sub->add_option("--out", cfg.out, "output file (default stdout)");
  sub->add_option("--tol", cfg.tol, "tolerance override");
}

CLI::Option* add_vector(CLI::App* sub, const std::string& name, std::vector<double>& v, const std::string& help) {
  return sub->add_option(name, v, help)->delimiter(',')->expected(1, -1);
}

CLI::Option* add_ints(CLI::App* sub, const std::string& name, std::vector<int>& v, const std::string& help) {
  return sub->add_option(name, v, help)->delimiter(',')->expected(1, -1);
}

Slopes slopes_of(const std::vector<double>& s) {
  if (s.size() != 3) throw DomainError("--s needs three values");
  for (double x : s)
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("--s entries must be positive");
  return {s[0], s[1], s[2]};
}

void check_same_length(const std::vector<const std::vector<double>*>& vs) {
  for (const auto* v : vs)
    if (v->size() != vs.front()->size()) throw DomainError("spectra must have the same length");
}

void check_ns(const std::vector<int>& ns, int lo, int hi) {
  if (ns.empty()) throw DomainError("empty n list");
  for (int n : ns)
    if (n < lo || n > hi) throw DomainError("n = " + std::to_string(n) + " outside [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
}

// Sampled violation list, capped so large hives stay readable.
json violations_json(const HiveReport& r) {
  json v = json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(r.violations.size(), 20); ++i) {
    const auto& e = r.violations[i];
    v.push_back({{"kind", kind_name(e.rhombus.kind)},
                 {"anchor", {e.rhombus.anchor.x, e.rhombus.anchor.y}},
                 {"value", num(e.value)}});
  }
  json b = json::array();
  for (const auto& m : r.boundary_failures)
    b.push_back({{"side", m.side}, {"k", m.k}, {"expected", num(m.expected)}, {"actual", num(m.actual)}});
  return {{"pass", r.pass}, {"rhombus_violations", r.violations.size()}, {"first_violations", v},
          {"boundary_failures", b}};
}

// Π_{i<j} (ν_i - ν_j)/(j - i) in linear arithmetic while it stays in range,
// so small integer cases print exactly.
double gt_volume_direct(const std::vector<double>& nu, double log_value) {
  if (log_value > 600.0 || log_value < -600.0) return std::exp(log_value);
  double v = 1.0;
  for (std::size_t i = 0; i < nu.size(); ++i)
    for (std::size_t j = i + 1; j < nu.size(); ++j) v *= (nu[i] - nu[j]) / static_cast<double>(j - i);
  return v;
}

double top_lower_bound(const std::vector<double>& l, const std::vector<double>& m) {
  return std::max(l.front() + m.back(), l.back() + m.front());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hivelab: hives, Horn probabilities and surface tension experiments", "hivelab"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::function<int(Context&)> action;

  // Shared per-command inputs; each command registers the ones it reads.
  std::vector<double> lam, mu, nu, s, eps_list, s2_list;
  std::vector<int> ns;
  std::string file, mode_name = "antiderivative", method_name = "auto", variant = "pinned", table_path;
  double eps = 0.25, c = 1.0, mollify_eps = 0.0, s0 = 1.0, s1 = 1.0, lo = 0.25, hi = 4.0, scale = 1.0, target = 1.5;
  double hist_lo = std::nan(""), hist_hi = std::nan("");
  int rmt_n = 0;
  int n = 3, level = 1, iterations = 2000, points = 5, bins = 50;
  bool mc = false;

  auto leaf = [&](CLI::App* group, const std::string& name, const std::string& help,
                  std::function<int(Context&)> body) {
    CLI::App* sub = group->add_subcommand(name, help);
    add_common(sub, cfg);
    sub->callback([&, body, sub, group] {
      cfg.command = group->get_name() + " " + sub->get_name();
      action = body;
    });
    return sub;
  };

  auto spectra3 = [&](CLI::App* sub, bool nu_required) {
    add_vector(sub, "--lam", lam, "spectrum lambda, comma separated")->required();
    add_vector(sub, "--mu", mu, "spectrum mu")->required();
    auto* o = add_vector(sub, "--nu", nu, "spectrum nu");
    if (nu_required) o->required();
  };

  // ---- hive ----
  CLI::App* hive = app.add_subcommand("hive", "discrete hives");
  hive->require_subcommand(1);
  {
    auto* sub = leaf(hive, "validate", "check a hive JSON file", [&](Context& ctx) {
      const DiscreteHive h = hive_from_json(json::parse(std::ifstream(file)));
      HiveBoundary bd = boundary_of(h);
      if (!lam.empty()) bd.lambda = lam;
      if (!mu.empty()) bd.mu = mu;
      if (!nu.empty()) bd.nu = nu;
      const HiveReport r = validate_hive(h, bd.lambda, bd.mu, bd.nu, ctx.cfg.tol);
      ctx.emit({{"n", h.n()}, {"report", violations_json(r)}});
      return r.pass ? kExitOk : kExitInfeasible;
    });
    sub->add_option("--file", file, "hive JSON")->required()->check(CLI::ExistingFile);
    spectra3(sub, false);
    sub->get_option("--lam")->required(false);
    sub->get_option("--mu")->required(false);
  }
  {
    auto* sub = leaf(hive, "sample", "hit-and-run sample from the hive polytope", [&](Context& ctx) {
      check_same_length({&lam, &mu, &nu});
      const auto sys = build_hive_polytope(lam, mu, nu);
      const InteriorPoint ip = interior_point(sys);
      Eigen::VectorXd x = ip.x;
      long steps = 0;
      if (ip.full_dimensional && sys.dimension() > 0) {
        steps = ctx.cfg.budget > 0 ? ctx.cfg.budget : 1000;
        const auto stream = hit_and_run(sys, ip.x, steps, ctx.cfg.seed);
        if (!stream.samples.empty()) x = stream.samples.back();
      }
      const DiscreteHive h = hive_from_coordinates(sys, lam, mu, nu, x);
      const HiveReport r = validate_hive(h, lam, mu, nu);
      ctx.emit({{"n", h.n()},
                {"steps", steps},
                {"full_dimensional", ip.full_dimensional},
                {"hive", hive_to_json(h)},
                {"report", violations_json(r)}});
      return kExitOk;
    });
    spectra3(sub, true);
  }
  {
    auto* sub = leaf(hive, "lift", "lift a constant-Hessian (optionally mollified) hive to T_n", [&](Context& ctx) {
      if (n < 1) throw DomainError("--n must be >= 1");
      if (!(c > 0.0)) throw DomainError("--c must be positive");
      if (mollify_eps < 0.0 || mollify_eps >= 1.0 / 16.0) throw DomainError("--mollify must be in [0, 1/16)");
      ContinuumHive ch = constant_hessian_hive(c);
      if (mollify_eps > 0.0) ch = mollify(ch, mollify_eps);
      const DiscreteHive h = lift(ch, n);
      const HiveBoundary bd = boundary_of(h);
      const HiveReport r = validate_hive(h, bd.lambda, bd.mu, bd.nu);
      ctx.emit({{"n", n},
                {"c", c},
                {"mollify", mollify_eps},
                {"lambda", bd.lambda},
                {"mu", bd.mu},
                {"nu", bd.nu},
                {"hive", hive_to_json(h)},
                {"report", violations_json(r)}});
      return kExitOk;
    });
    sub->add_option("--n", n, "grid size")->required();
    sub->add_option("--c", c, "Hessian scale");
    sub->add_option("--mollify", mollify_eps, "mollifier width (0 = none)");
  }

  // ---- gt ----
  CLI::App* gt = app.add_subcommand("gt", "Gelfand-Tsetlin patterns");
  gt->require_subcommand(1);
  {
    auto* sub = leaf(gt, "volume", "GT polytope volume with top row nu", [&](Context& ctx) {
      validate_spectrum(nu, "nu");
      const LogValue lv = gt_log_volume(nu);
      json j{{"n", nu.size()},
             {"volume", lv.degenerate ? json(0.0) : num(gt_volume_direct(nu, lv.value))},
             {"log_volume", lv.degenerate ? json("-inf") : num(lv.value)},
             {"degenerate", lv.degenerate}};
      if (mc) j["monte_carlo"] = volume_json(estimate_volume(build_gt_polytope(nu), ctx.volume_options(200000)));
      ctx.emit(j);
      return kExitOk;
    });
    add_vector(sub, "--nu", nu, "top row")->required();
    sub->add_flag("--mc", mc, "also estimate the volume by Monte Carlo");
  }

  // ---- vol ----
  CLI::App* vol = app.add_subcommand("vol", "polytope volumes");
  vol->require_subcommand(1);
  {
    auto* sub = leaf(vol, "hive", "volume of the hive polytope", [&](Context& ctx) {
      check_same_length({&lam, &mu, &nu});
      const auto sys = build_hive_polytope(lam, mu, nu);
      ctx.emit({{"n", lam.size()}, {"estimate", volume_json(estimate_volume(sys, ctx.volume_options(200000)))}});
      return kExitOk;
    });
    spectra3(sub, true);
    sub->add_option("--method", method_name, "auto|rejection|annealed");
  }
  {
    auto* sub = leaf(vol, "augmented", "volume of the augmented polytope, optionally over a ball around nu",
                     [&](Context& ctx) {
                       check_same_length({&lam, &mu});
                       std::optional<AugmentedBall> ball;
                       if (!nu.empty()) {
                         check_same_length({&lam, &nu});
                         if (!(eps > 0.0)) throw DomainError("--eps must be positive");
                         ball = AugmentedBall{nu, eps};
                       }
                       const auto sys = build_augmented_polytope(lam, mu, ball);
                       ctx.emit({{"n", lam.size()},
                                 {"ball_radius", ball ? num(eps) : json(nullptr)},
                                 {"estimate", volume_json(estimate_volume(sys, ctx.volume_options(200000)))}});
                       return kExitOk;
                     });
    spectra3(sub, false);
    sub->add_option("--eps", eps, "ball radius in the antiderivative seminorm");
    sub->add_option("--method", method_name, "auto|rejection|annealed");
  }
  {
    auto* sub = leaf(vol, "torus", "volume of the torus polytope P_n(s)", [&](Context& ctx) {
      const Slopes sl = slopes_of(s);
      if (n < 1) throw DomainError("--n must be >= 1");
      TorusVariant v;
      if (variant == "pinned") v = TorusVariant::Pinned;
      else if (variant == "sumzero") v = TorusVariant::SumZero;
      else throw DomainError("--variant must be pinned|sumzero");
      const auto sys = build_torus_polytope(n, sl, v);
      ctx.emit({{"n", n}, {"s", s}, {"variant", variant},
                {"estimate", volume_json(estimate_volume(sys, ctx.volume_options(200000)))}});
      return kExitOk;
    });
    add_vector(sub, "--s", s, "three slopes")->required();
    sub->add_option("--n", n, "torus size")->required();
    sub->add_option("--variant", variant, "pinned|sumzero");
    sub->add_option("--method", method_name, "auto|rejection|annealed");
  }

  // ---- sigma ----
  CLI::App* sigma = app.add_subcommand("sigma", "surface tension");
  sigma->require_subcommand(1);
  {
    auto* sub = leaf(sigma, "fit", "estimate sigma(s) from f_n over several n", [&](Context& ctx) {
      const Slopes sl = slopes_of(s);
      check_ns(ns, 1, 8);
      const SigmaEstimate e = sigma_estimate(sl, ns, ctx.volume_options(200000));
      json per = json::array();
      for (const auto& f : e.per_n) per.push_back(fn_json(f));
      ctx.emit({{"s", s}, {"sigma", num(e.sigma)}, {"std_error", num(e.std_error)}, {"f", num(e.f)}, {"per_n", per}});
      return kExitOk;
    });
    add_vector(sub, "--s", s, "three slopes")->required();
    add_ints(sub, "--n", ns, "torus sizes");
    sub->add_option("--method", method_name, "auto|rejection|annealed");
  }
  {
    auto* sub = leaf(sigma, "table", "build a sigma table on a log-spaced grid", [&](Context& ctx) {
      check_ns(ns, 1, 8);
      if (!(lo > 0.0) || !(hi > lo) || points < 2) throw DomainError("need 0 < lo < hi and points >= 2");
      SigmaGridSpec spec;
      spec.lo = lo;
      spec.hi = hi;
      spec.points = points;
      spec.n_list = ns;
      const SigmaTable t = SigmaTable::build(spec, ctx.volume_options(50000));
      json j = t.to_json();
      j["version"] = t.version();
      const auto cert = t.certify_convexity();
      j["convexity"] = {{"nodes", cert.nodes}, {"violations", cert.violations}, {"worst_gap", num(cert.worst_gap)}};
      j["monotonicity_violations"] = t.monotonicity_violations();
      ctx.emit(j);
      return kExitOk;
    });
    add_ints(sub, "--n", ns, "torus sizes");
    sub->add_option("--lo", lo, "smallest grid value");
    sub->add_option("--hi", hi, "largest grid value");
    sub->add_option("--points", points, "grid points per axis");
    sub->add_option("--method", method_name, "auto|rejection|annealed");
  }
  {
    auto* sub = leaf(sigma, "conjecture", "compare sigma(s0, s1, s2) with the s2 -> inf closed form",
                     [&](Context& ctx) {
                       check_ns(ns, 1, 8);
                       if (!(s0 > 0.0) || !(s1 > 0.0)) throw DomainError("--s0 and --s1 must be positive");
                       if (s2_list.empty()) throw DomainError("--s2 is empty");
                       const ConjectureReport r = conjecture_gap(s0, s1, s2_list, ns, ctx.volume_options(100000));
                       json rows = json::array();
                       for (const auto& row : r.rows)
                         rows.push_back({{"s2", row.s2}, {"sigma", num(row.sigma)}, {"std_error", num(row.std_error)},
                                         {"conjectured", num(row.conjectured)}, {"gap", num(row.gap)}});
                       ctx.emit({{"s0", s0}, {"s1", s1}, {"rows", rows}, {"gap_monotone", r.gap_monotone}});
                       return kExitOk;
                     });
    sub->add_option("--s0", s0, "first slope");
    sub->add_option("--s1", s1, "second slope");
    add_vector(sub, "--s2", s2_list, "third slopes")->required();
    add_ints(sub, "--n", ns, "torus sizes");
    sub->add_option("--method", method_name, "auto|rejection|annealed");
  }

  // ---- rmt ----
  CLI::App* rmt = app.add_subcommand("rmt", "random matrix experiments");
  rmt->require_subcommand(1);
  auto rmt_inputs = [&](CLI::App* sub) {
    spectra3(sub, true);
    sub->add_option("--eps", eps, "ball radius");
    sub->add_option("--mode", mode_name, "seminorm: antiderivative|sorted");
    sub->add_option("--trials", cfg.budget, "Monte Carlo trials (same as --budget)");
    sub->add_option("--n", rmt_n, "matrix size (checked against the spectra)");
  };
  auto check_rmt = [&] {
    check_same_length({&lam, &mu, &nu});
    if (rmt_n > 0 && rmt_n != static_cast<int>(lam.size())) throw DomainError("--n does not match the spectra");
    validate_spectrum(lam, "lambda");
    if (!(eps > 0.0)) throw DomainError("--eps must be positive");
  };
  {
    auto* sub = leaf(rmt, "horn", "Monte Carlo estimate of P(||spec(X+Y) - nu|| < eps)", [&](Context& ctx) {
      check_rmt();
      const SeminormMode mode = parse_seminorm_mode(mode_name);
      const auto p = horn_probability(lam, mu, nu, eps, mode, ctx.mc_options(100000));
      ctx.emit({{"n", lam.size()}, {"eps", eps}, {"mode", to_string(mode)}, {"monte_carlo", probability_json(p)}});
      return kExitOk;
    });
    rmt_inputs(sub);
  }
  {
    auto* sub = leaf(rmt, "compare", "Monte Carlo against the polytope-volume prediction", [&](Context& ctx) {
      check_rmt();
      const SeminormMode mode = parse_seminorm_mode(mode_name);
      const auto p = horn_probability(lam, mu, nu, eps, mode, ctx.mc_options(100000));
      VolumeOptions vo = ctx.volume_options(400000);
      const Prediction pred =
          lam.size() == 2 ? predicted_probability_n2(lam, mu, nu, eps) : predicted_probability(lam, mu, nu, eps, mode, vo);
      const double se = std::hypot(p.std_error, pred.std_error);
      const double z = se > 0.0 ? (p.p - pred.value) / se : (p.p == pred.value ? 0.0 : std::nan(""));
      ctx.emit({{"n", lam.size()},
                {"eps", eps},
                {"mode", to_string(mode)},
                {"monte_carlo", probability_json(p)},
                {"prediction", prediction_json(pred)},
                {"z", num(z)},
                {"agree_3sigma", std::isfinite(z) && std::abs(z) < 3.0}});
      return kExitOk;
    });
    rmt_inputs(sub);
  }
  {
    auto* sub = leaf(rmt, "density", "histogram (CSV) of the top eigenvalue of X + Y", [&](Context& ctx) {
      check_same_length({&lam, &mu});
      validate_spectrum(lam, "lambda");
      if (bins < 1) throw DomainError("--bins must be >= 1");
      const double a = std::isnan(hist_lo) ? top_lower_bound(lam, mu) : hist_lo;
      const double b = std::isnan(hist_hi) ? lam.front() + mu.front() : hist_hi;
      if (!(b > a)) throw DomainError("histogram range is empty");
      const auto samples = top_eigenvalue_samples(lam, mu, ctx.mc_options(100000));
      ctx.write(histogram_csv(samples, bins, a, b));
      return kExitOk;
    });
    spectra3(sub, false);
    sub->add_option("--bins", bins, "histogram bins");
    sub->add_option("--lo", hist_lo, "histogram lower edge");
    sub->add_option("--hi", hist_hi, "histogram upper edge");
    sub->add_option("--trials", cfg.budget, "Monte Carlo trials (same as --budget)");
  }

  // ---- rate ----
  CLI::App* rate = app.add_subcommand("rate", "rate functional");
  rate->require_subcommand(1);
  {
    auto* sub = leaf(rate, "eval", "evaluate the discrete rate I(lambda, mu; nu)", [&](Context& ctx) {
      check_same_length({&lam, &mu, &nu});
      std::string path = table_path;
      if (path.empty())
        if (const char* env = std::getenv("HIVELAB_SIGMA_TABLE")) path = env;
      if (path.empty()) throw DomainError("rate eval needs --table or HIVELAB_SIGMA_TABLE");
      const SigmaTable table = SigmaTable::load(path);
      MinimizeOptions mo;
      mo.level = level;
      mo.iterations = iterations;
      if (ctx.cfg.tol > 0.0) mo.projection_tol = ctx.cfg.tol;
      const RateResult r = rate_I(lam, mu, nu, table, mo);
      json j = r.to_json();
      j["sigma_version"] = table.version();
      ctx.emit(j);
      return r.infeasible ? kExitInfeasible : kExitOk;
    });
    spectra3(sub, true);
    sub->add_option("--table", table_path, "sigma table JSON");
    sub->add_option("--level", level, "dyadic level of the sigma integral");
    sub->add_option("--iterations", iterations, "optimizer iterations");
  }

  // ---- ldp ----
  CLI::App* ldp = app.add_subcommand("ldp", "large deviation experiments");
  ldp->require_subcommand(1);
  {
    auto* sub = leaf(ldp, "sweep", "(2/n^2) log P over n and eps on a quadratic benchmark triple", [&](Context& ctx) {
      if (ns.empty()) ns = {2, 3, 4};
      if (eps_list.empty()) eps_list = {0.05, 0.1};
      check_ns(ns, 1, 12);
      for (double e : eps_list)
        if (!(e > 0.0)) throw DomainError("--eps entries must be positive");
      if (!(scale > 0.0)) throw DomainError("--scale must be positive");
      if (!(target > 0.0) || target > 2.0) throw DomainError("--target must be in (0, 2]");
      const SeminormMode mode = parse_seminorm_mode(mode_name);
      const BoundaryProfile profile = BoundaryProfile::quadratic(scale);
      const BoundaryProfile target_profile = BoundaryProfile::quadratic(scale * target);
      json rows = json::array();
      for (double e : eps_list) {
        json per_n = json::array();
        std::vector<double> values;
        for (int k : ns) {
          const SpectrumVec v = discretize(profile, k);
          const SpectrumVec w = discretize(target_profile, k);
          const double radius = e * k * k;
          const auto p = horn_probability(v, v, w, radius, mode, ctx.mc_options(100000));
          const double rate_value = p.hits > 0 ? 2.0 / (k * k) * std::log(p.p) : -kInfinity;
          values.push_back(rate_value);
          per_n.push_back({{"n", k}, {"radius", radius}, {"p", num(p.p)}, {"std_error", num(p.std_error)},
                           {"hits", p.hits}, {"scaled_log_p", num(rate_value)}});
        }
        json diffs = json::array();
        std::vector<double> d;
        for (std::size_t i = 1; i < values.size(); ++i) {
          d.push_back(values[i] - values[i - 1]);
          diffs.push_back(num(d.back()));
        }
        bool shrinking = !d.empty();
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (!std::isfinite(d[i])) shrinking = false;
          if (i > 0 && std::abs(d[i]) > std::abs(d[i - 1])) shrinking = false;
        }
        rows.push_back({{"eps", e}, {"per_n", per_n}, {"differences", diffs}, {"differences_shrink", shrinking}});
      }
      ctx.emit({{"benchmark",
                 {{"alpha", profile.to_json()},
                  {"gamma", target_profile.to_json()},
                  {"triple", "lambda = mu = discretize(alpha, n), nu = discretize(gamma, n)"}}},
                {"mode", to_string(mode)},
                {"sweep", rows}});
      return kExitOk;
    });
    add_ints(sub, "--n", ns, "sizes (default 2,3,4)");
    add_vector(sub, "--eps", eps_list, "radii per unit n^2 (default 0.05,0.1)");
    sub->add_option("--scale", scale, "quadratic profile scale of lambda and mu");
    sub->add_option("--target", target, "nu profile scale relative to --scale (default 1.5)");
    sub->add_option("--mode", mode_name, "seminorm: antiderivative|sorted");
    sub->add_option("--trials", cfg.budget, "Monte Carlo trials per point (same as --budget)");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  if (!action) {
    err << app.help();
    return kExitUsage;
  }

  Context ctx{cfg, out, err};
  try {
    ctx.method = parse_volume_method(method_name);
    return action(ctx);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    ctx.emit({{"infeasible", true}, {"message", e.what()}});
    return kExitInfeasible;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DegenerateCellError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const json::exception& e) {
    err << "error: bad JSON input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace hivelab::cli
