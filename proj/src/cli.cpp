#include "mixcenter/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <map>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "mixcenter/cauchy_mix.hpp"
#include "mixcenter/center_bounds.hpp"
#include "mixcenter/discrete_mix.hpp"
#include "mixcenter/errors.hpp"
#include "mixcenter/io.hpp"
#include "mixcenter/verify.hpp"

#ifndef MIXCENTER_DATA_DIR
#define MIXCENTER_DATA_DIR "data"
#endif

namespace mixcenter::cli {

namespace fs = std::filesystem;

fs::path default_out_dir() {
  const char* env = std::getenv("MIXCENTER_OUT_DIR");
  return env && *env ? fs::path(env) : fs::current_path();
}

namespace {

json header(const std::string& command) { return {{"schema_version", kSchemaVersion}, {"command", command}}; }

json merged(json a, const json& b) {
  for (auto it = b.begin(); it != b.end(); ++it) a[it.key()] = it.value();
  return a;
}

/// A distribution from an inline JSON spec or a file holding either one spec
/// or a marginals list (first entry used).
DistributionPtr load_distribution(const std::string& inline_spec, const std::string& file) {
  if (!inline_spec.empty()) {
    try {
      return distribution_from_json(json::parse(inline_spec));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("--dist: ") + e.what());
    }
  }
  if (!file.empty()) {
    const json doc = io::read_json_file(file);
    if (doc.is_object() && doc.contains("kind")) return distribution_from_json(doc);
    return marginals_from_json(doc).front();
  }
  return std::make_shared<Cauchy>();
}

std::vector<FiniteDiscrete> finite_marginals(const std::string& file) {
  std::vector<FiniteDiscrete> out;
  for (const auto& d : marginals_from_json(io::read_json_file(file))) {
    const auto* f = dynamic_cast<const FiniteDiscrete*>(d.get());
    if (!f) throw DomainError("marginal of kind \"" + d->kind() + "\" is not finite; the LP takes finite marginals only");
    out.push_back(*f);
  }
  return out;
}

fs::path out_path(const std::string& given, const std::string& fallback) {
  return given.empty() ? default_out_dir() / fallback : fs::path(given);
}

void emit(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

MixerConfig mixer_config(int n, double c, int t_grid, double tail_eps, int ra_m, std::uint64_t seed) {
  MixerConfig cfg;
  cfg.n = n;
  cfg.c = c;
  cfg.t_grid = t_grid;
  cfg.tail_eps = tail_eps;
  cfg.ra_grid_m = ra_m;
  cfg.seed = seed;
  return cfg;
}

MixerConfig config_from_metadata(const json& meta) {
  try {
    MixerConfig cfg;
    cfg.n = meta.at("n").get<int>();
    cfg.c = meta.at("c").get<double>();
    cfg.t_grid = meta.value("t_grid", cfg.t_grid);
    cfg.tail_eps = meta.value("tail_eps", cfg.tail_eps);
    cfg.ra_grid_m = meta.value("ra_grid_m", cfg.ra_grid_m);
    cfg.root_tol = meta.value("root_tol", cfg.root_tol);
    cfg.t_min = meta.value("t_min", cfg.t_min);
    cfg.seed = meta.value("seed", cfg.seed);
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("sample metadata: ") + e.what());
  }
}

std::uint64_t sample_stream(std::uint64_t seed) { return substream_seed(seed, "cli_sample"); }

}  // namespace

// ---------------------------------------------------------------- repro

namespace {

using Measure = std::function<json()>;

std::map<std::string, Measure> repro_measures() {
  const double ln2pi = std::log(2.0) / std::numbers::pi;
  std::map<std::string, Measure> m;

  m["ex01_nu_sample_p_one"] = [] {
    const CountableDiscreteEx01 nu(CountableDiscreteEx01::Kind::nu, 20);
    Rng rng = substream(kDefaultSeed, "repro_nu");
    const auto xs = sample(nu, rng, 10000);
    return static_cast<double>(std::count(xs.begin(), xs.end(), 1.0)) / static_cast<double>(xs.size());
  };
  m["cauchy_cm_b_star_n3"] = [] { return cm_bounds(Cauchy(), 3).b_star; };
  m["cauchy_cm_a_star_n3"] = [] { return cm_bounds(Cauchy(), 3).a_star; };
  auto ex_mu = [] { return distribution_from_json({{"kind", "ex01_mu"}, {"K", 40}}); };
  m["ex01_mu_a_star"] = [ex_mu] { return cm_bounds(*ex_mu(), 3).a_star; };
  m["ex01_mu_b_star"] = [ex_mu] { return cm_bounds(*ex_mu(), 3).b_star; };
  m["cauchy_R_small_alpha_n3"] = [] { return cauchy_R_closed_form(3, 1e-12); };
  m["cauchy_interval_n2_hi"] = [] { return cauchy_center_interval(2).hi; };
  m["cauchy_interval_n3_hi"] = [] { return cauchy_center_interval(3).hi; };
  m["infinite_mean_pareto"] = [] {
    const std::vector<DistributionPtr> ms{std::make_shared<Pareto>(0.5), std::make_shared<FiniteDiscrete>(FiniteDiscrete::point(0.0)),
                                          std::make_shared<FiniteDiscrete>(FiniteDiscrete::point(0.0))};
    return to_string(infinite_mean_classifier(ms));
  };
  m["eval_A_at_upper_window"] = [] {
    MixerConfig cfg;
    cfg.c = 0.1;
    const MixGeometry g(cfg);
    return g.eval_A(1.0, g.f(cfg.c + 1.0));
  };
  m["eval_A_very_negative_y"] = [] {
    MixerConfig cfg;
    cfg.c = 0.1;
    return MixGeometry(cfg).eval_A(1.0, -1e6);
  };
  m["eval_A_large_t_limit_gap"] = [ln2pi] {
    MixerConfig cfg;
    cfg.c = 0.1;
    return MixGeometry(cfg).eval_A(1e8, 0.0) - (ln2pi - 0.1);
  };
  m["dual_bound_inside_n3"] = [] { return dual_bound(Cauchy(), 3, 0.15).value; };

  auto mixer = [] {
    MixerConfig cfg;
    cfg.c = 0.15;
    return std::make_shared<CauchyMixer>(cfg);
  };
  m["k2_zero_below_switch"] = [mixer] {
    const auto mx = mixer();
    // Every knot before the first switch has K2 = 0 and f(c + (n-1) t) <= h.
    bool ok = true;
    for (const auto& k : mx->knots()) {
      const bool inactive = mx->geometry().f(0.15 + 2.0 * k.t) <= k.root.h;
      if (inactive && k.comps.K2 != 0.0) ok = false;
    }
    return ok;
  };
  m["mu_t_mean_max_error"] = [mixer] {
    const auto mx = mixer();
    double e = 0.0;
    for (const auto& k : mx->knots()) e = std::max(e, std::abs(k.comps.mean_offset(3)));
    return e;
  };
  m["branch2_alpha_formula"] = [mixer] {
    const auto mx = mixer();
    double e = 0.0;
    for (const auto& k : mx->knots()) {
      const auto& q = k.comps;
      const double ex = q.K1 - 2.0 * q.K2;
      if (ex + q.K4 > 0.0) e = std::max(e, std::abs(q.alpha - ex / (ex + q.K4)));
    }
    return e;
  };
  m["q_total_mass_error"] = [mixer] { return std::abs(mixer()->t_measure().total_mass - 1.0); };
  m["q_cdf_at_t_min"] = [mixer] { return mixer()->t_measure().cdf.front(); };
  m["reconstruction_max_error"] = [] {
    MixerConfig cfg;
    cfg.c = 0.15;
    SuiteOptions opt;
    opt.rows = 2000;
    for (const auto& r : run_invariant_suite(cfg, opt).invariants)
      if (r.name == "reconstruction") return r.measured;
    return std::numeric_limits<double>::infinity();
  };
  m["c_outside_interval_rejected"] = [] {
    MixerConfig cfg;
    cfg.c = 0.3;
    try {
      make_joint_mix(cfg);
    } catch (const DomainError&) {
      return true;
    }
    return false;
  };
  m["convex_half_center"] = [ln2pi] {
    MixerConfig cfg;
    cfg.c = ln2pi;
    const SamplerPtr a = make_joint_mix(cfg);
    cfg.c = -ln2pi;
    const SamplerPtr b = make_joint_mix(cfg);
    return convex_interpolate_mixes(a, b, 0.5)->center();
  };
  m["admissibility_cauchy_ok"] = [] { return generic_admissibility(Cauchy(), 3).ok; };
  m["admissibility_cauchy_q_max"] = [] { return generic_admissibility(Cauchy(), 3).q_max; };
  m["admissibility_power_1_5_fails"] = [] { return !generic_admissibility(*power_density(1.5), 3).ok; };
  m["two_point_family_C2"] = [] {
    const FiniteDiscrete f({{0.0, 1.0 / 3.0}, {1.0, 2.0 / 3.0}});
    return to_string(lp_feasible_center({f, f, f}, 2.0).verdict);
  };
  auto ex01 = [](const std::string& name) {
    for (const auto& r : verify_ex01(20).invariants)
      if (r.name == name) return r.measured;
    return std::numeric_limits<double>::infinity();
  };
  for (const char* name : {"sum_x_zero", "sum_y_one", "p_one_half", "geometric_pmf", "symmetrized_marginal"})
    m[std::string("ex01_") + name] = [ex01, name] { return ex01(name); };
  m["sum_two_excluded"] = [] { return sum_two_exclusion(20).excludes_two; };
  return m;
}

bool compare(const std::string& how, const json& measured, const json& expected, double tol) {
  if (how == "eq") return measured == expected;
  const double v = measured.get<double>(), e = expected.get<double>();
  if (how == "abs") return std::abs(v - e) <= tol;
  if (how == "le") return v <= e + tol;
  if (how == "ge") return v >= e - tol;
  if (how == "lt") return v < e;
  if (how == "gt") return v > e;
  throw ParseError("repro: unknown comparison \"" + how + "\"");
}

}  // namespace

json run_repro(const json& expectations) {
  const auto measures = repro_measures();
  json rows = json::array();
  bool all = true;
  std::set<std::string> seen;
  try {
    for (const auto& e : expectations.at("entries")) {
      const std::string id = e.at("id").get<std::string>();
      seen.insert(id);
      json row = {{"id", id}, {"expected", e.at("expected")}, {"compare", e.value("compare", "abs")},
                  {"tol", e.value("tol", 0.0)}, {"claim", e.value("claim", "")}};
      const auto it = measures.find(id);
      if (it == measures.end()) {
        row["status"] = "unknown_id";
        all = false;
      } else {
        const json measured = it->second();
        row["measured"] = measured;
        const bool ok = compare(row["compare"], measured, e.at("expected"), row["tol"]);
        row["status"] = ok ? "match" : "differs";
        all = all && ok;
      }
      rows.push_back(row);
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("repro expectations: ") + ex.what());
  }
  json missing = json::array();
  for (const auto& [id, fn] : measures)
    if (!seen.count(id)) missing.push_back(id);
  if (!missing.empty()) all = false;
  return {{"entries", rows}, {"unexpected_measurements", missing}, {"all_match", all}};
}

// ---------------------------------------------------------------- main

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Centers of jointly mixable distributions and Cauchy joint-mix sampling", "mixcenter"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mixcenter 0.1.0 (schema " + std::to_string(kSchemaVersion) + ")");

  std::uint64_t seed = kDefaultSeed;
  std::string format = "json";
  std::string out_file;

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Quantile bounds a*, b* on n-centers, or joint-mix bounds with --betas");
  int b_n = 3;
  std::string b_dist, b_file, b_marginals;
  std::vector<double> b_betas;
  bounds->add_option("--n", b_n, "Number of variables")->check(CLI::Range(2, 1000));
  bounds->add_option("--dist", b_dist, "Inline distribution spec (JSON)");
  bounds->add_option("--marginal", b_file, "Distribution spec file");
  bounds->add_option("--marginals", b_marginals, "Marginals file, for joint-mix bounds");
  bounds->add_option("--betas", b_betas, "Per-marginal betas with sum below 1");

  auto* interval = app.add_subcommand("interval", "Exact n-center interval of the standard Cauchy");
  int i_n = 3;
  interval->add_option("--n", i_n, "Number of variables")->check(CLI::Range(2, 100000));

  auto* dual = app.add_subcommand("dual", "Dual upper bound D(c) on the probability that the sum equals n c");
  int d_n = 3;
  double d_c = 0.0;
  std::string d_dist, d_file;
  dual->add_option("--n", d_n, "Number of variables")->check(CLI::Range(2, 1000));
  dual->add_option("--c", d_c, "Per-variable center")->required();
  dual->add_option("--dist", d_dist, "Inline distribution spec (JSON)");
  dual->add_option("--marginal", d_file, "Distribution spec file");

  auto* feasible = app.add_subcommand("feasible", "LP feasibility of a sum center for finite marginals");
  std::string f_marginals;
  double f_center = 0.0, f_tol = 1e-9;
  bool f_exact = false;
  feasible->add_option("--marginals", f_marginals, "Marginals file")->required();
  feasible->add_option("--center", f_center, "Sum center C")->required();
  feasible->add_option("--tol", f_tol, "Sum and feasibility tolerance");
  feasible->add_flag("--exact", f_exact, "Exact rational arithmetic");
  feasible->add_option("--out", out_file, "Also write the result to this file");

  auto* centers = app.add_subcommand("centers", "All sum centers of finite marginals");
  std::string c_marginals;
  double c_tol = 1e-9;
  bool c_exact = false;
  centers->add_option("--marginals", c_marginals, "Marginals file")->required();
  centers->add_option("--tol", c_tol, "Sum and feasibility tolerance");
  centers->add_flag("--exact", c_exact, "Exact rational arithmetic");
  centers->add_option("--out", out_file, "Also write the result to this file");

  auto* samp = app.add_subcommand("sample", "Rows of n standard Cauchy variates with sum n c");
  int s_n = 3, s_t_grid = 2048, s_ra_m = 512;
  double s_c = 0.0, s_tail = 1e-4;
  std::size_t s_count = 100000;
  unsigned s_threads = 0;
  std::string s_engine = "construction";
  samp->add_option("--n", s_n, "Number of variables")->check(CLI::Range(2, 1000));
  samp->add_option("--c", s_c, "Per-variable center");
  samp->add_option("--count", s_count, "Number of rows")->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  samp->add_option("--seed", seed, "Master seed");
  samp->add_option("--out", out_file, "CSV output (default $MIXCENTER_OUT_DIR/samples.csv)");
  samp->add_option("--engine", s_engine, "construction or ra")->check(CLI::IsMember({"construction", "ra"}));
  samp->add_option("--ra-grid-m", s_ra_m, "Rearrangement grid size")->check(CLI::Range(8, 1 << 20));
  samp->add_option("--tail-eps", s_tail, "Mass left out of the mixing measure");
  samp->add_option("--t-grid", s_t_grid, "Knots of the t grid")->check(CLI::Range(16, 1 << 22));
  samp->add_option("--threads", s_threads, "Worker threads (0: all cores)");

  auto* ver = app.add_subcommand("verify", "Invariant suite for a sample file, a fresh mixer, or a coupling");
  std::string v_csv, v_coupling, v_marginals;
  std::optional<int> v_n;
  std::optional<double> v_c, v_center;
  std::size_t v_count = 100000;
  ver->add_option("samples", v_csv, "CSV written by sample (its .meta.json sidecar supplies the config)");
  ver->add_option("--n", v_n, "Number of variables (fresh mixer)");
  ver->add_option("--c", v_c, "Per-variable center (fresh mixer)");
  ver->add_option("--count", v_count, "Rows drawn for a fresh mixer");
  ver->add_option("--seed", seed, "Master seed for a fresh mixer");
  ver->add_option("--coupling", v_coupling, "Coupling JSON to certify");
  ver->add_option("--marginals", v_marginals, "Marginals the coupling must have");
  ver->add_option("--center", v_center, "Sum center the coupling must have");
  ver->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  ver->add_option("--out", out_file, "Also write the report to this file");

  auto* ex01 = app.add_subcommand("ex01", "The two exact couplings with sums 0 and 1");
  int e_K = 20;
  std::string e_dir;
  ex01->add_option("--K", e_K, "Truncation of Z")->check(CLI::Range(1, 1000));
  ex01->add_option("--out-dir", e_dir, "Directory for ex01_x.json and ex01_y.json (default $MIXCENTER_OUT_DIR)");

  auto* repro = app.add_subcommand("repro", "Recompute the stored reference values and diff them");
  std::string r_file = std::string(MIXCENTER_DATA_DIR) + "/repro_expectations.json";
  repro->add_option("--expectations", r_file, "Expectation file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 2;
  }

  try {
    json result;
    if (bounds->parsed()) {
      result = header("bounds");
      if (!b_marginals.empty()) {
        JmBoundsInput in;
        in.marginals = marginals_from_json(io::read_json_file(b_marginals));
        in.betas = b_betas.empty() ? std::vector<double>(in.marginals.size(), 0.1 / static_cast<double>(in.marginals.size()))
                                   : b_betas;
        const JmBounds jb = jm_center_bounds(in);
        result.update({{"lo", jb.lower}, {"hi", jb.upper}, {"method", "jm_average_quantile"},
                       {"grid_resolution", 0.0}, {"betas", in.betas}, {"n", in.marginals.size()},
                       {"kind", "numeric_necessary_bound"}, {"scale", "sum"}});
      } else {
        const DistributionPtr mu = load_distribution(b_dist, b_file);
        const CmBounds cb = cm_bounds(*mu, b_n);
        result.update({{"lo", cb.a_star}, {"hi", cb.b_star}, {"method", cb.method},
                       {"grid_resolution", cb.grid_resolution}, {"alpha_a", cb.alpha_a}, {"alpha_b", cb.alpha_b},
                       {"n", b_n}, {"kind", "numeric_necessary_bound"}, {"scale", "per_variable"},
                       {"distribution", mu->to_json()}});
      }
      emit(out, result);
    } else if (interval->parsed()) {
      const CenterInterval ci = cauchy_center_interval(i_n);
      result = merged(header("interval"), ci.to_json());
      result.update({{"method", "exact_formula"}, {"grid_resolution", 0.0}, {"scale", "per_variable"}});
      emit(out, result);
    } else if (dual->parsed()) {
      const DistributionPtr mu = load_distribution(d_dist, d_file);
      const DualBound db = dual_bound(*mu, d_n, d_c);
      result = header("dual");
      result.update({{"value", db.value}, {"hi", db.value}, {"t_argmin", db.t_argmin},
                     {"grid_resolution", db.grid_resolution}, {"evaluations", db.evaluations},
                     {"method", "log_grid_golden"}, {"n", d_n}, {"c", d_c}, {"distribution", mu->to_json()}});
      emit(out, result);
    } else if (feasible->parsed()) {
      LpOptions opt;
      opt.tol = f_tol;
      opt.arithmetic = f_exact ? LpArithmetic::exact : LpArithmetic::floating;
      const FeasibilityResult r = lp_feasible_center(finite_marginals(f_marginals), f_center, opt);
      result = merged(header("feasible"), r.to_json());
      emit(out, result);
      if (!out_file.empty()) io::write_json_file(out_file, result);
    } else if (centers->parsed()) {
      LpOptions opt;
      opt.tol = c_tol;
      opt.arithmetic = c_exact ? LpArithmetic::exact : LpArithmetic::floating;
      const CenterSet cs = enumerate_centers(finite_marginals(c_marginals), opt);
      result = merged(header("centers"), cs.to_json());
      emit(out, result);
      if (!out_file.empty()) io::write_json_file(out_file, result);
    } else if (samp->parsed()) {
      const MixerConfig cfg = mixer_config(s_n, s_c, s_t_grid, s_tail, s_ra_m, seed);
      const SamplerPtr sampler = make_engine(cfg, s_engine);
      const auto rows = sample_joint_mix(*sampler, sample_stream(seed), s_count, s_threads);
      const fs::path csv = out_path(out_file, "samples.csv");
      io::write_samples_csv(csv, rows, s_n);
      json meta = header("sample");
      meta.update(cfg.to_json());
      double deficit = 0.0;
      const json engine_meta = sampler->metadata();
      if (engine_meta.contains("mass_deficit")) deficit = engine_meta["mass_deficit"];
      meta.update({{"engine", s_engine}, {"count", s_count}, {"mass_deficit", deficit}, {"engine_metadata", engine_meta}});
      io::write_json_file(io::sidecar_path(csv), meta);
      const SumStats st = sum_stats(rows, s_n * s_c);
      result = header("sample");
      result.update({{"out", csv.string()}, {"metadata", io::sidecar_path(csv).string()}, {"rows", s_count},
                     {"sum_stats", st.to_json()}});
      emit(out, result);
    } else if (ver->parsed()) {
      VerificationReport rep;
      if (!v_coupling.empty()) {
        if (v_marginals.empty() || !v_center) throw DomainError("verify --coupling needs --marginals and --center");
        const Coupling cp = Coupling::from_json(io::read_json_file(v_coupling));
        rep = run_invariant_suite(cp, finite_marginals(v_marginals), *v_center);
      } else if (!v_csv.empty()) {
        const io::SampleTable table = io::read_samples_csv(v_csv);
        const json meta = io::read_json_file(io::sidecar_path(v_csv));
        const MixerConfig cfg = config_from_metadata(meta);
        if (cfg.n != table.n) throw ParseError("sample file width differs from its metadata");
        SuiteOptions opt;
        opt.seed = sample_stream(cfg.seed);
        opt.engine = meta.value("engine", "construction");
        rep = run_invariant_suite(cfg, opt, &table.rows);
      } else {
        if (!v_n || !v_c) throw DomainError("verify needs a sample file, --coupling, or --n and --c");
        SuiteOptions opt;
        opt.rows = v_count;
        opt.seed = sample_stream(seed);
        rep = run_invariant_suite(mixer_config(*v_n, *v_c, 2048, 1e-4, 512, seed), opt);
      }
      result = merged(header("verify"), rep.to_json());
      if (format == "csv") out << rep.to_csv();
      else emit(out, result);
      if (!out_file.empty()) {
        if (format == "csv") {
          std::ofstream f(out_file);
          if (!f) throw std::ios_base::failure("cannot open " + out_file);
          f << rep.to_csv();
        } else {
          io::write_json_file(out_file, result);
        }
      }
      return rep.all_passed() ? 0 : 1;
    } else if (ex01->parsed()) {
      const Ex01Couplings ex = ex01_couplings(e_K);
      const fs::path dir = e_dir.empty() ? default_out_dir() : fs::path(e_dir);
      io::write_json_file(dir / "ex01_x.json", merged(header("ex01"), ex.mix_x.to_json()));
      io::write_json_file(dir / "ex01_y.json", merged(header("ex01"), ex.mix_y.to_json()));
      auto sums = [](const Coupling& cp) {
        std::vector<double> s;
        for (const auto& r : cp.support) s.push_back(r[0] + r[1] + r[2]);
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        return s;
      };
      result = header("ex01");
      result.update({{"K", e_K}, {"tail_mass", ex.mix_x.tail_mass},
                     {"mix_x", {{"file", (dir / "ex01_x.json").string()}, {"rows", ex.mix_x.size()}, {"sums", sums(ex.mix_x)}}},
                     {"mix_y", {{"file", (dir / "ex01_y.json").string()}, {"rows", ex.mix_y.size()}, {"sums", sums(ex.mix_y)}}}});
      emit(out, result);
    } else if (repro->parsed()) {
      result = merged(header("repro"), run_repro(io::read_json_file(r_file)));
      emit(out, result);
      return result["all_match"].get<bool>() ? 0 : 1;
    }
    return 0;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantViolation& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const SizeError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace mixcenter::cli
