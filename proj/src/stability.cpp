#include "agentinv/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace agentinv {

SwitchedPair build_matrices(const ModelParams& p) {
  const double am = p.alpha * p.mu;
  const double leave = (1.0 - p.alpha) * p.mu;
  SwitchedPair pair;
  pair.a1.rows = {{{-p.gamma * p.beta, p.gamma * am + p.gamma * p.theta - p.epsilon, -p.gamma * am},
                   {p.beta, -am - p.theta, am},
                   {p.beta, leave - p.theta, -leave}}};
  pair.a2.rows = {{{-p.gamma * p.beta, p.gamma * p.delta - p.epsilon, -p.gamma * am},
                   {p.beta, -p.delta, am},
                   {p.beta, 0.0, -leave}}};
  return pair;
}

CubicCoeffs char_poly(const Mat3& a) {
  return {1.0, -trace(a), principal_minor_sum(a), -determinant(a)};
}

bool is_hurwitz_cubic(const CubicCoeffs& c) {
  if (!(c.c0 > 0.0)) throw ModelError("not a monic-orientable cubic");
  return c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0 && c.c1 * c.c2 > c.c0 * c.c3;
}

bool a2_hurwitz_condition(const ModelParams& p) {
  const double lhs = (p.beta * p.gamma + p.delta) / p.mu + (1.0 - p.alpha);
  const double rhs = (p.beta * p.gamma * p.mu + p.delta * p.mu * (1.0 - p.alpha)) / (p.beta * p.epsilon) + 1.0;
  return lhs * rhs > 1.0;
}

namespace {

double drift(const ModelParams& p) { return p.alpha * p.mu - p.delta; }

double level_root(const ModelParams& p) {
  return std::sqrt(((2.0 - p.alpha) * p.epsilon * p.mu + p.alpha * p.epsilon * p.delta) /
                   (p.beta * p.mu));
}

double drift_root(const ModelParams& p, double extra) {
  const double d = drift(p);
  return (d + std::sqrt(d * d + extra)) / (2.0 * p.beta);
}

}  // namespace

GainCondition condition_i(const ModelParams& p) {
  GainCondition c{false, drift(p) / p.beta, level_root(p)};
  c.satisfied = p.gamma > c.first && p.gamma > c.second;
  return c;
}

GainCondition condition_ii(const ModelParams& p) {
  const double abandon = p.alpha * p.epsilon * (p.delta - p.mu) / (p.beta * p.mu);
  GainCondition c{false, drift_root(p, 4.0 * p.alpha * p.mu * p.mu), std::sqrt(std::max(abandon, 0.0))};
  c.satisfied = p.gamma > c.first && p.gamma > c.second;
  return c;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::no: return "no";
    case Verdict::yes: return "yes";
    case Verdict::undetermined: return "undetermined";
  }
  return "unknown";
}

bool difference_is_rank_one(const SwitchedPair& pair) {
  const Mat3 diff = pair.a1 - pair.a2;
  bool middle_nonzero = false;
  for (int i = 0; i < 3; ++i) {
    if (diff(i, 0) != 0.0 || diff(i, 2) != 0.0) return false;
    middle_nonzero = middle_nonzero || diff(i, 1) != 0.0;
  }
  return middle_nonzero;
}

CqlfCheck check_cqlf(const SwitchedPair& pair) {
  CqlfCheck out;
  out.a1_hurwitz = is_hurwitz_cubic(char_poly(pair.a1));
  out.a2_hurwitz = is_hurwitz_cubic(char_poly(pair.a2));
  out.rank_one = difference_is_rank_one(pair);

  // det(A1 A2) taken as a product of determinants: forming it from the
  // product matrix loses everything to cancellation when the norms are large.
  const Mat3 product = pair.a1 * pair.a2;
  auto pc = char_poly(product);
  pc.c3 = -determinant(pair.a1) * determinant(pair.a2);
  out.product_real_eigenvalues = real_cubic_roots(pc.c0, pc.c1, pc.c2, pc.c3);

  // Forward error of each root: coefficient perturbations of order
  // eps * ||M||^k pushed through p' (simple root) or p'' (double root).
  const double eps = std::numeric_limits<double>::epsilon();
  const double nm = norm_inf(product);
  const std::array<double, 3> coeff_err = {eps * nm, eps * nm * nm, 8.0 * eps * std::abs(pc.c3)};
  auto root_band = [&](double s) {
    const double a = std::abs(s);
    const double perturb = coeff_err[0] * a * a + coeff_err[1] * a + coeff_err[2];
    const double d1 = std::abs((3.0 * s + 2.0 * pc.c1) * s + pc.c2);
    const double d2 = std::abs(6.0 * s + 2.0 * pc.c1);
    double err = d1 > 0.0 ? perturb / d1 : std::numeric_limits<double>::infinity();
    if (d2 > 0.0) err = std::min(err, std::sqrt(2.0 * perturb / d2));
    if (!std::isfinite(err)) err = std::cbrt(perturb);
    return std::max(1e3 * err, 64.0 * eps * a);
  };
  out.tolerance = 0.0;
  double nearest = std::numeric_limits<double>::infinity();
  for (double s : out.product_real_eigenvalues) {
    if (std::abs(s) < nearest) {
      nearest = std::abs(s);
      out.tolerance = root_band(s);
    }
  }

  if (!out.a1_hurwitz || !out.a2_hurwitz) return out;
  if (!out.rank_one) {
    // Identical matrices: a single Hurwitz LTI system always has a quadratic
    // Lyapunov function.
    out.verdict = (pair.a1 == pair.a2) ? Verdict::yes : Verdict::no;
    return out;
  }
  bool marginal = false;
  for (double s : out.product_real_eigenvalues) {
    const double band = root_band(s);
    if (s < -band) return out;
    if (s <= band) marginal = true;
  }
  out.verdict = marginal ? Verdict::undetermined : Verdict::yes;
  return out;
}

Verdict cqlf_exists(const SwitchedPair& pair) { return check_cqlf(pair).verdict; }

CubicCoeffs det_poly_numerator(const ModelParams& p) {
  const double a = p.alpha, b = p.beta, m = p.mu, d = p.delta, th = p.theta, g = p.gamma,
               e = p.epsilon;
  CubicCoeffs c;
  c.c0 = b * b * e * e * m * m;
  c.c1 = b * b * e * e + b * b * g * g * m * m - 2.0 * b * e * m * m + d * m * m * th +
         a * b * e * m * m + b * d * g * m * m - a * d * m * m * th + b * g * m * m * th -
         a * b * d * e * m - a * b * d * g * m * m;
  c.c2 = m * m - a * m * m + b * b * g * g - 2.0 * b * e + d * th + b * d * g + a * d * m +
         b * g * th - a * m * th - a * b * g * m;
  c.c3 = 1.0;
  return c;
}

Mat3 a1_inverse(const ModelParams& p) {
  const double a = p.alpha, b = p.beta, m = p.mu, th = p.theta, g = p.gamma, e = p.epsilon;
  Mat3 inv;
  inv.rows = {{{-th / (b * e), -(a * e - e + g * th) / (b * e), a / b},
               {-1.0 / e, -g / e, 0.0},
               {-1.0 / e, (e - g * m) / (e * m), -1.0 / m}}};
  return inv;
}

std::vector<CorollaryResult> corollary_report(const ModelParams& p) {
  const double a = p.alpha, b = p.beta, m = p.mu, d = p.delta, g = p.gamma, e = p.epsilon;
  const double dr = drift(p);
  const double root_i = level_root(p);
  const bool no_cust_abandon = d == 0.0;
  // Corollaries 8/9 split on this epsilon bound; 3/4 are its delta = 0 form.
  const double eps_bound = dr * dr * m / ((2.0 - a) * m * b + a * d * b);
  const double eps_bound_nd = a * a * m * m / ((2.0 - a) * b);

  std::vector<CorollaryResult> out;
  for (int id : kCorollaryIds) {
    CorollaryResult r{id, false, false};
    switch (id) {
      case 1:
        r.applicable = true;
        r.satisfied = condition_i(p).satisfied || condition_ii(p).satisfied;
        break;
      case 7:
        r.applicable = a * m <= d;
        r.satisfied = g > root_i;
        break;
      case 5:
        r.applicable = a * m <= d;
        r.satisfied = e < b * m * g * g / ((2.0 - a) * m + a * d);
        break;
      case 8:
        r.applicable = a * m > d && e <= eps_bound;
        r.satisfied = g > dr / b;
        break;
      case 9:
        r.applicable = a * m > d && e > eps_bound;
        r.satisfied = g > root_i;
        break;
      case 2:
        r.applicable = a * m >= d;
        r.satisfied = g > drift_root(p, 8.0 * b * e);
        break;
      case 11:
        r.applicable = m > d;
        r.satisfied = g > drift_root(p, 4.0 * a * m * m);
        break;
      case 12:
        r.applicable = a == 0.0;
        r.satisfied = true;
        break;
      case 3:
        r.applicable = no_cust_abandon && a > 0.0 && e <= eps_bound_nd;
        r.satisfied = g > a * m / b;
        break;
      case 4:
        r.applicable = no_cust_abandon && a > 0.0 && e > eps_bound_nd;
        r.satisfied = g > std::sqrt((2.0 - a) * e / b);
        break;
      case 6:
        r.applicable = no_cust_abandon;
        r.satisfied = g > (a * m + std::sqrt(a * a * m * m + 8.0 * b * e)) / (2.0 * b);
        break;
      case 10:
        r.applicable = no_cust_abandon;
        r.satisfied = g > (a + std::sqrt(a * a + 4.0 * a)) * m / (2.0 * b);
        break;
    }
    out.push_back(r);
  }
  return out;
}

StabilityReport stability_report(const ModelParams& params) {
  validate(params);
  const auto pair = build_matrices(params);
  const auto cq = check_cqlf(pair);
  const auto ci = condition_i(params);
  const auto cii = condition_ii(params);

  StabilityReport rep;
  rep.a1_poly = char_poly(pair.a1);
  rep.a2_poly = char_poly(pair.a2);
  rep.a1_hurwitz = cq.a1_hurwitz;
  rep.a2_hurwitz = cq.a2_hurwitz;
  rep.a2_closed_form = a2_hurwitz_condition(params);
  rep.cond_i = ci.satisfied;
  rep.cond_ii = cii.satisfied;
  rep.cqlf = cq.verdict;
  rep.product_real_eigenvalues = cq.product_real_eigenvalues;
  rep.corollaries = corollary_report(params);
  rep.thresholds = {{"cond_i_drift", ci.first},
                    {"cond_i_level", ci.second},
                    {"cond_ii_drift", cii.first},
                    {"cond_ii_abandonment", cii.second}};
  return rep;
}

}  // namespace agentinv
