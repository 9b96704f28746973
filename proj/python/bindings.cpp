#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mixcenter/cauchy_mix.hpp"
#include "mixcenter/center_bounds.hpp"
#include "mixcenter/cli.hpp"
#include "mixcenter/discrete_mix.hpp"
#include "mixcenter/errors.hpp"
#include "mixcenter/rearrangement.hpp"
#include "mixcenter/verify.hpp"

namespace py = pybind11;
using namespace mixcenter;

namespace {

// JSON crosses the boundary as text; the Python side sees plain dicts.
json from_py(const py::object& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object to_py(const json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

std::vector<FiniteDiscrete> finite(const py::object& marginals) {
  std::vector<FiniteDiscrete> out;
  for (const auto& d : marginals_from_json(from_py(marginals))) {
    const auto* f = dynamic_cast<const FiniteDiscrete*>(d.get());
    if (!f) throw DomainError("finite marginals required, got \"" + d->kind() + "\"");
    out.push_back(*f);
  }
  return out;
}

MixerConfig config(int n, double c, double tail_eps, int t_grid, int ra_grid_m, std::uint64_t seed) {
  MixerConfig cfg;
  cfg.n = n;
  cfg.c = c;
  cfg.tail_eps = tail_eps;
  cfg.t_grid = t_grid;
  cfg.ra_grid_m = ra_grid_m;
  cfg.seed = seed;
  return cfg;
}

LpOptions lp_options(double tol, bool exact) {
  LpOptions opt;
  opt.tol = tol;
  opt.arithmetic = exact ? LpArithmetic::exact : LpArithmetic::floating;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Centers of jointly mixable distributions";

  auto base = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_AssertionError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  (void)base;

  m.attr("DEFAULT_SEED") = kDefaultSeed;

  m.def("cauchy_center_interval", [](int n) { return to_py(cauchy_center_interval(n).to_json()); }, py::arg("n"));
  m.def("cauchy_R", &cauchy_R_closed_form, py::arg("n"), py::arg("alpha"));
  m.def("avg_quantile",
        [](const py::object& dist, double a, double b) { return avg_quantile(*distribution_from_json(from_py(dist)), a, b); },
        py::arg("dist"), py::arg("alpha"), py::arg("beta"));
  m.def(
      "cm_bounds",
      [](const py::object& dist, int n) {
        const CmBounds b = cm_bounds(*distribution_from_json(from_py(dist)), n);
        return py::dict(py::arg("a_star") = b.a_star, py::arg("b_star") = b.b_star, py::arg("alpha_a") = b.alpha_a,
                        py::arg("alpha_b") = b.alpha_b, py::arg("method") = b.method,
                        py::arg("grid_resolution") = b.grid_resolution);
      },
      py::arg("dist"), py::arg("n"));
  m.def(
      "jm_center_bounds",
      [](const py::object& marginals, std::vector<double> betas) {
        JmBoundsInput in{marginals_from_json(from_py(marginals)), std::move(betas)};
        const JmBounds b = jm_center_bounds(in);
        return py::make_tuple(b.lower, b.upper);
      },
      py::arg("marginals"), py::arg("betas"));
  m.def(
      "dual_bound",
      [](const py::object& dist, int n, double c) {
        const DualBound d = dual_bound(*distribution_from_json(from_py(dist)), n, c);
        return py::dict(py::arg("value") = d.value, py::arg("t_argmin") = d.t_argmin,
                        py::arg("grid_resolution") = d.grid_resolution, py::arg("evaluations") = d.evaluations);
      },
      py::arg("dist"), py::arg("n"), py::arg("c"));

  m.def("eval_A", [](double t, double y, int n, double c) { return eval_A(t, y, config(n, c, 1e-4, 2048, 512, kDefaultSeed)); },
        py::arg("t"), py::arg("y"), py::arg("n"), py::arg("c"));
  m.def("solve_h", [](double t, int n, double c) { return solve_h(t, config(n, c, 1e-4, 2048, 512, kDefaultSeed)).h; },
        py::arg("t"), py::arg("n"), py::arg("c"));

  m.def(
      "sample_joint_mix",
      [](int n, double c, std::size_t count, std::uint64_t seed, const std::string& engine, unsigned threads,
         double tail_eps, int t_grid, int ra_grid_m) {
        const SamplerPtr s = make_engine(config(n, c, tail_eps, t_grid, ra_grid_m, seed), engine);
        std::vector<SampleRow> rows;
        {
          py::gil_scoped_release release;
          rows = sample_joint_mix(*s, substream_seed(seed, "cli_sample"), count, threads);
        }
        py::array_t<double> out({count, static_cast<std::size_t>(n)});
        auto v = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < count; ++i)
          for (int j = 0; j < n; ++j) v(i, j) = rows[i].x[j];
        return out;
      },
      py::arg("n"), py::arg("c"), py::arg("count"), py::arg("seed") = kDefaultSeed, py::arg("engine") = "construction",
      py::arg("threads") = 0, py::arg("tail_eps") = 1e-4, py::arg("t_grid") = 2048, py::arg("ra_grid_m") = 512);

  m.def(
      "verify_mixer",
      [](int n, double c, std::size_t rows, std::uint64_t seed) {
        SuiteOptions opt;
        opt.rows = rows;
        opt.seed = substream_seed(seed, "cli_sample");
        VerificationReport r;
        {
          py::gil_scoped_release release;
          r = run_invariant_suite(config(n, c, 1e-4, 2048, 512, seed), opt);
        }
        return to_py(r.to_json());
      },
      py::arg("n"), py::arg("c"), py::arg("rows") = 100000, py::arg("seed") = kDefaultSeed);

  m.def(
      "lp_feasible_center",
      [](const py::object& marginals, double C, double tol, bool exact) {
        return to_py(lp_feasible_center(finite(marginals), C, lp_options(tol, exact)).to_json());
      },
      py::arg("marginals"), py::arg("center"), py::arg("tol") = 1e-9, py::arg("exact") = false);
  m.def(
      "enumerate_centers",
      [](const py::object& marginals, double tol, bool exact) {
        return to_py(enumerate_centers(finite(marginals), lp_options(tol, exact)).to_json());
      },
      py::arg("marginals"), py::arg("tol") = 1e-9, py::arg("exact") = false);
  m.def(
      "ex01_couplings",
      [](int K) {
        const Ex01Couplings e = ex01_couplings(K);
        return py::make_tuple(to_py(e.mix_x.to_json()), to_py(e.mix_y.to_json()));
      },
      py::arg("K") = 20);
  m.def("sum_two_exclusion", [](int K) { return to_py(sum_two_exclusion(K).to_json()); }, py::arg("K") = 20);
  m.def("verify_ex01", [](int K) { return to_py(verify_ex01(K).to_json()); }, py::arg("K") = 20);

  m.def(
      "ra_flatten",
      [](const py::object& dist, int n, std::size_t m_rows, std::uint64_t seed) {
        const DistributionPtr mu = distribution_from_json(from_py(dist));
        const std::vector<double> col = discretize(*mu, m_rows);
        QuantileMatrix original(std::vector<std::vector<double>>(static_cast<std::size_t>(n), col));
        RaOptions opt;
        opt.seed = seed;
        const RaResult r = ra_flatten(original, opt);
        return py::dict(py::arg("spread") = r.spread, py::arg("sweeps") = r.sweeps, py::arg("converged") = r.converged,
                        py::arg("row_sums") = r.matrix.row_sums(), py::arg("spread_history") = r.spread_history);
      },
      py::arg("dist"), py::arg("n"), py::arg("m"), py::arg("seed") = kDefaultSeed);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "mixcenter");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
