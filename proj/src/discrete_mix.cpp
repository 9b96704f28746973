#include "mixcenter/discrete_mix.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "mixcenter/center_bounds.hpp"
#include "mixcenter/errors.hpp"

namespace mixcenter {

using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------- Coupling

std::vector<Atom> Coupling::marginal(int i) const {
  if (i < 0 || i >= n) throw DomainError("Coupling::marginal: coordinate out of range");
  std::map<double, long double> acc;
  for (std::size_t r = 0; r < size(); ++r) acc[support[r][static_cast<std::size_t>(i)]] += weights[r];
  std::vector<Atom> out;
  out.reserve(acc.size());
  for (const auto& [v, p] : acc) out.push_back({v, static_cast<double>(p)});
  return out;
}

Coupling Coupling::canonical() const {
  std::map<std::vector<double>, long double> acc;
  for (std::size_t r = 0; r < size(); ++r)
    if (weights[r] > 0.0) acc[support[r]] += weights[r];
  Coupling out;
  out.n = n;
  out.tail_mass = tail_mass;
  for (const auto& [row, w] : acc) {
    out.support.push_back(row);
    out.weights.push_back(static_cast<double>(w));
  }
  return out;
}

json Coupling::to_json() const {
  json j = {{"n", n}, {"support", support}, {"weights", weights}};
  if (tail_mass > 0.0) j["tail_mass"] = tail_mass;
  return j;
}

Coupling Coupling::from_json(const json& doc) {
  try {
    Coupling c;
    c.support = doc.at("support").get<std::vector<std::vector<double>>>();
    c.weights = doc.at("weights").get<std::vector<double>>();
    c.tail_mass = doc.value("tail_mass", 0.0);
    if (c.support.size() != c.weights.size()) throw ParseError("coupling: support and weights differ in length");
    c.n = doc.contains("n") ? doc.at("n").get<int>()
                            : (c.support.empty() ? 0 : static_cast<int>(c.support.front().size()));
    for (const auto& row : c.support)
      if (static_cast<int>(row.size()) != c.n) throw ParseError("coupling: ragged support tuple");
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("coupling: ") + e.what());
  }
}

CouplingCheck check_coupling(const Coupling& coupling, const std::vector<FiniteDiscrete>& marginals,
                             double C, double sum_tol) {
  CouplingCheck out;
  if (static_cast<std::size_t>(coupling.n) != marginals.size())
    throw DomainError("check_coupling: coupling and marginal counts differ");
  long double wsum = 0.0L;
  out.min_weight = coupling.weights.empty() ? 0.0 : coupling.weights.front();
  for (std::size_t r = 0; r < coupling.size(); ++r) {
    wsum += coupling.weights[r];
    out.min_weight = std::min(out.min_weight, coupling.weights[r]);
    long double s = 0.0L;
    for (double v : coupling.support[r]) s += v;
    out.max_sum_deviation = std::max(out.max_sum_deviation, static_cast<double>(std::abs(s - C)));
  }
  out.weight_sum_error = static_cast<double>(std::abs(wsum - 1.0L));
  for (int i = 0; i < coupling.n; ++i) {
    const std::vector<Atom> got = coupling.marginal(i);
    std::map<double, double> want;
    for (const Atom& a : marginals[static_cast<std::size_t>(i)].atoms()) want[a.value] = a.prob;
    std::map<double, double> diff = want;
    for (const Atom& a : got) diff[a.value] -= a.prob;
    for (const auto& [v, d] : diff) out.max_marginal_residual = std::max(out.max_marginal_residual, std::abs(d));
  }
  out.ok = out.min_weight >= 0.0 && out.weight_sum_error <= 1e-12 && out.max_marginal_residual <= 1e-10 &&
           out.max_sum_deviation <= sum_tol;
  return out;
}

std::string to_string(LpVerdict v) {
  switch (v) {
    case LpVerdict::feasible: return "feasible";
    case LpVerdict::infeasible: return "infeasible";
    case LpVerdict::borderline: return "borderline";
  }
  return "?";
}

// ---------------------------------------------------------------- simplex

namespace {

template <class T>
struct Tol {
  static bool negative(const T& v) { return v < 0; }
  static bool positive(const T& v) { return v > 0; }
};

template <>
struct Tol<double> {
  static bool negative(double v) { return v < -1e-12; }
  static bool positive(double v) { return v > 1e-11; }
};

double to_double(double v) { return v; }
double to_double(const Rational& v) { return static_cast<double>(v); }

/// Structural columns have exactly one 1 in the row block of each marginal.
struct SliceProblem {
  std::size_t rows = 0;
  std::size_t n = 0;
  std::vector<std::size_t> row_offset;  // first row of marginal i
  std::vector<std::uint32_t> cols;      // n row indices per column, flattened
  std::size_t columns() const { return n == 0 ? 0 : cols.size() / n; }
};

template <class T>
struct PhaseOne {
  T objective{};
  std::vector<T> x;   // structural values
  std::vector<T> pi;  // simplex multipliers at the optimum
  std::size_t pivots = 0;
};

// Revised phase-1 simplex with an explicit basis inverse and Bland's rule.
// Artificial r has index N + r and starts basic in row r.
template <class T>
PhaseOne<T> phase_one(const SliceProblem& p, const std::vector<T>& b) {
  const std::size_t R = p.rows, N = p.columns(), n = p.n;
  std::vector<T> binv(R * R, T(0));
  for (std::size_t r = 0; r < R; ++r) binv[r * R + r] = T(1);
  std::vector<std::size_t> basis(R);
  std::iota(basis.begin(), basis.end(), N);
  std::vector<T> xb = b;
  std::vector<T> pi(R), u(R);

  const std::size_t max_pivots = 50 * (N + R) + 1000;
  std::size_t pivots = 0;
  for (;;) {
    for (std::size_t k = 0; k < R; ++k) {
      T s(0);
      for (std::size_t r = 0; r < R; ++r)
        if (basis[r] >= N) s += binv[r * R + k];
      pi[k] = s;
    }
    // Bland: lowest index with negative reduced cost.
    std::size_t enter = N + R;
    for (std::size_t j = 0; j < N && enter == N + R; ++j) {
      T d(0);
      for (std::size_t i = 0; i < n; ++i) d -= pi[p.cols[j * n + i]];
      if (Tol<T>::negative(d)) enter = j;
    }
    for (std::size_t r = 0; r < R && enter == N + R; ++r)
      if (Tol<T>::negative(T(1) - pi[r])) enter = N + r;
    if (enter == N + R) break;

    for (std::size_t r = 0; r < R; ++r) {
      if (enter >= N) {
        u[r] = binv[r * R + (enter - N)];
      } else {
        T s(0);
        for (std::size_t i = 0; i < n; ++i) s += binv[r * R + p.cols[enter * n + i]];
        u[r] = s;
      }
    }
    std::size_t leave = R;
    T best{};
    for (std::size_t r = 0; r < R; ++r) {
      if (!Tol<T>::positive(u[r])) continue;
      const T ratio = xb[r] / u[r];
      if (leave == R || ratio < best || (ratio == best && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == R) throw NumericError("phase-1 simplex: unbounded direction", 0.0);

    const T piv = u[leave];
    for (std::size_t k = 0; k < R; ++k) binv[leave * R + k] /= piv;
    xb[leave] /= piv;
    for (std::size_t r = 0; r < R; ++r) {
      if (r == leave || u[r] == T(0)) continue;
      const T f = u[r];
      for (std::size_t k = 0; k < R; ++k) binv[r * R + k] -= f * binv[leave * R + k];
      xb[r] -= f * xb[leave];
    }
    basis[leave] = enter;
    if (++pivots > max_pivots) throw NumericError("phase-1 simplex: pivot limit reached", static_cast<double>(pivots));
  }

  PhaseOne<T> out;
  out.x.assign(N, T(0));
  out.objective = T(0);
  for (std::size_t r = 0; r < R; ++r) {
    if (basis[r] < N) out.x[basis[r]] = xb[r];
    else out.objective += xb[r];
  }
  out.pi = pi;
  out.pivots = pivots;
  return out;
}

struct Slice {
  SliceProblem problem;
  std::vector<std::vector<double>> tuples;
};

Slice build_slice(const std::vector<FiniteDiscrete>& marginals, double C, double tol, std::size_t max_vars) {
  Slice s;
  const std::size_t n = marginals.size();
  s.problem.n = n;
  s.problem.row_offset.resize(n);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s.problem.row_offset[i] = rows;
    rows += marginals[i].atoms().size();
  }
  s.problem.rows = rows;

  // Bounds on the sum of the coordinates after i, for pruning.
  std::vector<double> min_rest(n + 1, 0.0), max_rest(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    min_rest[i] = min_rest[i + 1] + marginals[i].atoms().front().value;
    max_rest[i] = max_rest[i + 1] + marginals[i].atoms().back().value;
  }
  std::vector<std::uint32_t> idx(n);
  std::vector<double> vals(n);
  auto rec = [&](auto&& self, std::size_t i, double prefix) -> void {
    if (i == n) {
      if (std::abs(prefix - C) > tol) return;
      if (s.tuples.size() >= max_vars)
        throw SizeError("lp_feasible_center: more than " + std::to_string(max_vars) + " variables on the sum slice");
      s.tuples.push_back(vals);
      for (std::size_t k = 0; k < n; ++k) s.problem.cols.push_back(idx[k]);
      return;
    }
    const auto& atoms = marginals[i].atoms();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const double next = prefix + atoms[a].value;
      if (next + min_rest[i + 1] > C + tol) break;
      if (next + max_rest[i + 1] < C - tol) continue;
      idx[i] = static_cast<std::uint32_t>(s.problem.row_offset[i] + a);
      vals[i] = atoms[a].value;
      self(self, i + 1, next);
    }
  };
  if (n > 0) rec(rec, 0, 0.0);
  return s;
}

template <class T>
std::vector<T> rhs(const std::vector<FiniteDiscrete>& marginals);

template <>
std::vector<double> rhs<double>(const std::vector<FiniteDiscrete>& marginals) {
  std::vector<double> b;
  for (const auto& m : marginals)
    for (const Atom& a : m.atoms()) b.push_back(a.prob);
  return b;
}

/// The simplest fraction with denominator <= 2^20 that rounds to v within a
/// few ulps, else v itself. Probabilities typed as decimals (1/3 written as
/// 0.3333333333333333) then enter the exact system as the intended rational.
Rational recover_rational(double v) {
  using Int = boost::multiprecision::cpp_int;
  const Rational x(v);
  Int p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Rational r = x;
  for (int iter = 0; iter < 64; ++iter) {
    const Int a = boost::multiprecision::numerator(r) / boost::multiprecision::denominator(r);
    const Int p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > (Int(1) << 20)) break;
    p0 = p1, q0 = q1, p1 = p2, q1 = q2;
    const Rational cand(p1, q1);
    if (std::abs(static_cast<double>(cand) - v) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v))
      return cand;
    const Rational frac = r - Rational(a);
    if (frac == 0) break;
    r = 1 / frac;
  }
  return x;
}

template <>
std::vector<Rational> rhs<Rational>(const std::vector<FiniteDiscrete>& marginals) {
  // Renormalize every marginal to total mass exactly 1; otherwise rounding in
  // the inputs alone would make the exact system inconsistent.
  std::vector<Rational> b;
  for (const auto& m : marginals) {
    Rational total(0);
    const std::size_t start = b.size();
    for (const Atom& a : m.atoms()) {
      b.push_back(recover_rational(a.prob));
      total += b.back();
    }
    for (std::size_t k = start; k < b.size(); ++k) b[k] /= total;
  }
  return b;
}

template <class T>
FeasibilityResult solve_slice(const std::vector<FiniteDiscrete>& marginals, const Slice& s, double C, double tol) {
  FeasibilityResult out;
  out.center = C;
  out.variables = s.tuples.size();
  out.exact = std::is_same_v<T, Rational>;
  const std::vector<T> b = rhs<T>(marginals);
  const PhaseOne<T> r = phase_one<T>(s.problem, b);
  out.pivots = r.pivots;
  out.phase1_objective = to_double(r.objective);

  Coupling cp;
  cp.n = static_cast<int>(marginals.size());
  for (std::size_t j = 0; j < s.tuples.size(); ++j) {
    const double w = to_double(r.x[j]);
    if (w > 0.0) {
      cp.support.push_back(s.tuples[j]);
      cp.weights.push_back(w);
    }
  }
  // Marginal residuals of the (possibly partial) basic solution.
  std::vector<double> got(s.problem.rows, 0.0);
  for (std::size_t j = 0; j < s.tuples.size(); ++j) {
    const double w = std::max(0.0, to_double(r.x[j]));
    for (std::size_t i = 0; i < s.problem.n; ++i) got[s.problem.cols[j * s.problem.n + i]] += w;
  }
  const std::vector<double> bd = rhs<double>(marginals);
  double residual = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) residual = std::max(residual, std::abs(got[k] - bd[k]));
  out.residual = residual;

  const bool zero_objective = out.exact ? r.objective == T(0) : out.phase1_objective <= tol;
  if (zero_objective && residual <= tol) {
    out.verdict = LpVerdict::feasible;
    out.coupling = cp.canonical();
    return out;
  }
  if (std::min(out.phase1_objective, residual) <= 10.0 * tol && !(out.exact && !zero_objective)) {
    out.verdict = LpVerdict::borderline;
    out.coupling = cp.canonical();
    return out;
  }
  out.verdict = LpVerdict::infeasible;
  out.farkas.resize(marginals.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < marginals.size(); ++i)
    for (std::size_t a = 0; a < marginals[i].atoms().size(); ++a) {
      const std::size_t row = s.problem.row_offset[i] + a;
      out.farkas[i].push_back(to_double(r.pi[row]));
      gap += to_double(r.pi[row]) * bd[row];
    }
  out.farkas_gap = gap;
  return out;
}

}  // namespace

json FeasibilityResult::to_json() const {
  json j = {{"verdict", to_string(verdict)},
            {"center", center},
            {"phase1_objective", phase1_objective},
            {"residual", residual},
            {"variables", variables},
            {"pivots", pivots},
            {"exact", exact}};
  if (coupling) j["coupling"] = coupling->to_json();
  if (!farkas.empty()) j["farkas"] = {{"y", farkas}, {"gap", farkas_gap}};
  return j;
}

FeasibilityResult lp_feasible_center(const std::vector<FiniteDiscrete>& marginals, double C, const LpOptions& opt) {
  if (marginals.empty()) throw DomainError("lp_feasible_center: need at least one marginal");
  if (!(opt.tol >= 0.0)) throw DomainError("lp_feasible_center: tol must be nonnegative");
  if (!std::isfinite(C)) throw DomainError("lp_feasible_center: C must be finite");
  const Slice s = build_slice(marginals, C, opt.tol, opt.max_variables);
  if (s.tuples.empty()) {
    // No tuple on the slice: y = 1 on one atom row of the first marginal and
    // 0 elsewhere certifies infeasibility.
    FeasibilityResult out;
    out.center = C;
    out.verdict = LpVerdict::infeasible;
    out.phase1_objective = 1.0;
    out.exact = opt.arithmetic == LpArithmetic::exact;
    out.residual = 1.0;
    out.farkas.resize(marginals.size());
    for (std::size_t i = 0; i < marginals.size(); ++i) out.farkas[i].assign(marginals[i].atoms().size(), 0.0);
    out.farkas[0].assign(marginals[0].atoms().size(), 1.0);
    out.farkas_gap = 1.0;
    return out;
  }
  if (opt.arithmetic == LpArithmetic::exact) {
    if (s.tuples.size() > opt.max_exact_variables)
      throw SizeError("lp_feasible_center: exact mode is limited to " + std::to_string(opt.max_exact_variables) +
                      " variables");
    return solve_slice<Rational>(marginals, s, C, opt.tol);
  }
  return solve_slice<double>(marginals, s, C, opt.tol);
}

// ---------------------------------------------------------------- centers

std::pair<double, double> discrete_center_bounds(const std::vector<FiniteDiscrete>& marginals) {
  const std::size_t n = marginals.size();
  JmBoundsInput in;
  for (const auto& m : marginals) in.marginals.push_back(std::make_shared<FiniteDiscrete>(m));
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  // Any beta vector gives valid bounds; intersect a few.
  for (double beta : {0.5, 0.1, 1e-3, 1e-9}) {
    in.betas.assign(n, beta / static_cast<double>(n));
    const JmBounds b = jm_center_bounds(in);
    lo = std::max(lo, b.lower);
    hi = std::min(hi, b.upper);
  }
  return {lo, hi};
}

CenterSet enumerate_centers(const std::vector<FiniteDiscrete>& marginals, const LpOptions& opt) {
  if (marginals.empty()) throw DomainError("enumerate_centers: need at least one marginal");
  double product = 1.0;
  for (const auto& m : marginals) product *= static_cast<double>(m.atoms().size());
  if (product > 1e7) throw SizeError("enumerate_centers: support product exceeds 1e7 candidate sums");

  std::vector<double> sums{0.0};
  for (const auto& m : marginals) {
    std::vector<double> next;
    next.reserve(sums.size() * m.atoms().size());
    for (double s : sums)
      for (const Atom& a : m.atoms()) next.push_back(s + a.value);
    std::sort(next.begin(), next.end());
    // Dedupe within tolerance.
    std::vector<double> uniq;
    for (double v : next)
      if (uniq.empty() || v - uniq.back() > opt.tol) uniq.push_back(v);
    sums = std::move(uniq);
  }

  CenterSet out;
  out.candidates_total = sums.size();
  const auto [lo, hi] = discrete_center_bounds(marginals);
  out.bound_lower = lo;
  out.bound_upper = hi;
  const double slack = opt.tol + 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
  for (double C : sums) {
    if (C < lo - slack || C > hi + slack) continue;
    ++out.candidates_examined;
    FeasibilityResult r = lp_feasible_center(marginals, C, opt);
    if (r.verdict == LpVerdict::feasible) {
      out.centers.push_back(C);
      out.certificates.push_back(std::move(*r.coupling));
    } else if (r.verdict == LpVerdict::borderline) {
      out.borderline.push_back(C);
    }
  }
  return out;
}

json CenterSet::to_json() const {
  json certs = json::array();
  for (const auto& c : certificates) certs.push_back(c.to_json());
  return {{"centers", centers},
          {"certificates", certs},
          {"borderline", borderline},
          {"candidates_total", candidates_total},
          {"candidates_examined", candidates_examined},
          {"bounds", {{"lower", bound_lower}, {"upper", bound_upper}}}};
}

// ---------------------------------------------------------------- ex01

Ex01Couplings ex01_couplings(int K) {
  if (K < 1) throw DomainError("ex01_couplings: K must be at least 1");
  if (K > 1000) throw DomainError("ex01_couplings: K must be at most 1000");
  Ex01Couplings out;
  out.mix_x.n = out.mix_y.n = 3;
  // Z = 0..K with P(Z = k) = 2^-(k+1); Z = K + 1 carries the tail 2^-(K+1).
  for (int k = 0; k <= K + 1; ++k) {
    const double w = std::ldexp(1.0, -(std::min(k, K) + 1));
    const double x = std::ldexp(1.0, k);
    const double x2 = std::ldexp(1.0, k + 1);
    out.mix_x.support.push_back({x, x, -x2});
    out.mix_x.weights.push_back(w);
    // B = 1 and B = 0, each with probability 1/2.
    out.mix_y.support.push_back({x2, 1.0, -x2});
    out.mix_y.weights.push_back(0.5 * w);
    out.mix_y.support.push_back({1.0, x2, -x2});
    out.mix_y.weights.push_back(0.5 * w);
  }
  out.mix_x.tail_mass = out.mix_y.tail_mass = std::ldexp(1.0, -(K + 1));
  return out;
}

Coupling exchangeable_permute(const Coupling& coupling) {
  const int n = coupling.n;
  if (n > 8) throw SizeError("exchangeable_permute: exact mode is limited to n <= 8");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  const double scale = 1.0 / static_cast<double>(perms.size());

  std::map<std::vector<double>, long double> acc;
  std::vector<double> row(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < coupling.size(); ++r)
    for (const auto& p : perms) {
      for (int i = 0; i < n; ++i) row[static_cast<std::size_t>(i)] = coupling.support[r][static_cast<std::size_t>(p[static_cast<std::size_t>(i)])];
      acc[row] += static_cast<long double>(coupling.weights[r]) * scale;
    }
  Coupling out;
  out.n = n;
  out.tail_mass = coupling.tail_mass;
  for (const auto& [k, w] : acc) {
    out.support.push_back(k);
    out.weights.push_back(static_cast<double>(w));
  }
  return out;
}

Coupling exchangeable_permute(const Coupling& coupling, Rng& rng) {
  Coupling out = coupling;
  for (auto& row : out.support) rng.shuffle(std::span<double>(row));
  return out;
}

// ---------------------------------------------------------------- Ex 3.7

json SumTwoExclusion::to_json() const {
  return {{"a_star", a_star},
          {"b_star", b_star},
          {"integer_sums", integer_sums},
          {"pair_sums_to_one", pair_sums_to_one},
          {"p_x1_not_one", static_cast<double>(p_x1_not_one)},
          {"excludes_two", excludes_two}};
}

SumTwoExclusion sum_two_exclusion(int K) {
  if (K < 1 || K > 60) throw DomainError("sum_two_exclusion: K must lie in [1, 60]");
  SumTwoExclusion out;
  auto nu = std::make_shared<CountableDiscreteEx01>(CountableDiscreteEx01::Kind::nu, K);
  auto gamma = std::make_shared<CountableDiscreteEx01>(CountableDiscreteEx01::Kind::gamma, K);
  const Mixture mu({2.0 / 3.0, 1.0 / 3.0}, {nu, gamma});
  const CmBounds b = cm_bounds(mu, 3);
  out.a_star = b.a_star;
  out.b_star = b.b_star;
  // The support is integer, so the sum of a complete mix lies in [3a, 3b] n Z.
  // a* = 0 is attained only in the limit, so the grid value is rounded.
  const long long lo = static_cast<long long>(std::ceil(3.0 * b.a_star - 1e-4));
  const long long hi = static_cast<long long>(std::floor(3.0 * b.b_star + 1e-4));
  for (long long s = lo; s <= hi; ++s) out.integer_sums.push_back(s);

  // Support points as exact integers: 2^k (k = 0..K+1) and -2^(k+1) (k = 0..K+1).
  std::vector<long long> support;
  for (int k = 0; k <= K + 1; ++k) {
    support.push_back(1LL << k);
    support.push_back(-(1LL << (k + 1)));
  }
  for (long long u : support)
    for (long long v : support)
      if (u + v == 1) out.pair_sums_to_one = true;

  // mu({1}) = (2/3) nu({1}) = 1/3.
  const long double p_one = 2.0L / 3.0L * 0.5L;
  out.p_x1_not_one = 1.0L - p_one;
  const bool two_allowed = std::find(out.integer_sums.begin(), out.integer_sums.end(), 2) != out.integer_sums.end();
  // With X_2 + X_3 != 1, the sum is 2 only when X_1 != 1.
  out.excludes_two = two_allowed && !out.pair_sums_to_one && out.p_x1_not_one < 1.0L;
  return out;
}

}  // namespace mixcenter
