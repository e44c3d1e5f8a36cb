#pragma once

#include <array>
#include <string>
#include <vector>

#include "agentinv/core.hpp"
#include "agentinv/linalg.hpp"

namespace agentinv {

/// Constituent LTI matrices of the boundary-free fluid system in (x, y, v):
/// `a1` governs y >= 0, `a2` governs y < 0.
struct SwitchedPair {
  Mat3 a1;
  Mat3 a2;
};

/// c0 s^3 + c1 s^2 + c2 s + c3.
struct CubicCoeffs {
  double c0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double operator()(double s) const { return ((c0 * s + c1) * s + c2) * s + c3; }
};

SwitchedPair build_matrices(const ModelParams& params);

/// Coefficients of det(sI - A); c0 is always 1.
CubicCoeffs char_poly(const Mat3& a);

/// Routh-Hurwitz test for a cubic; throws ModelError if c0 <= 0.
bool is_hurwitz_cubic(const CubicCoeffs& c);

/// Closed-form Hurwitz condition for the y < 0 matrix.
bool a2_hurwitz_condition(const ModelParams& params);

/// Outcome of one sufficient gamma-condition: gamma must strictly exceed both operands.
struct GainCondition {
  bool satisfied = false;
  double first = 0.0;
  double second = 0.0;

  double threshold() const { return first > second ? first : second; }
};

/// Operands (alpha mu - delta)/beta and sqrt(((2-alpha) eps mu + alpha eps delta)/(beta mu)).
GainCondition condition_i(const ModelParams& params);
/// Operands (alpha mu - delta + sqrt((alpha mu - delta)^2 + 4 alpha mu^2))/(2 beta) and
/// sqrt(max(alpha eps (delta - mu)/(beta mu), 0)).
GainCondition condition_ii(const ModelParams& params);

enum class Verdict { no, yes, undetermined };

const char* to_string(Verdict v);

/// Details behind a common-quadratic-Lyapunov-function existence decision.
struct CqlfCheck {
  Verdict verdict = Verdict::no;
  bool a1_hurwitz = false;
  bool a2_hurwitz = false;
  bool rank_one = false;
  /// Real eigenvalues of a1 * a2, ascending.
  std::vector<double> product_real_eigenvalues;
  /// Error band of the real eigenvalue closest to zero.
  double tolerance = 0.0;
};

/// Structural rank-one test: only the middle column of a1 - a2 may be nonzero.
bool difference_is_rank_one(const SwitchedPair& pair);

/// Decides whether the two LTI systems share a quadratic Lyapunov function.
/// Both matrices Hurwitz, a rank-one difference and no negative real eigenvalue
/// of the product give `yes`; a real eigenvalue whose error band contains
/// zero gives `undetermined`.
CqlfCheck check_cqlf(const SwitchedPair& pair);
Verdict cqlf_exists(const SwitchedPair& pair);

/// Numerator of det(inv(a1) + tau a2) * (-beta eps mu) as a cubic in tau.
CubicCoeffs det_poly_numerator(const ModelParams& params);

/// Closed-form inverse of the y >= 0 matrix.
Mat3 a1_inverse(const ModelParams& params);

struct CorollaryResult {
  int id = 0;
  bool applicable = false;
  bool satisfied = false;
};

/// Corollary ids in reporting order.
inline constexpr std::array<int, 12> kCorollaryIds = {1, 7, 5, 8, 9, 2, 11, 12, 3, 4, 6, 10};

std::vector<CorollaryResult> corollary_report(const ModelParams& params);

struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct StabilityReport {
  bool a1_hurwitz = false;
  bool a2_hurwitz = false;
  bool a2_closed_form = false;
  bool cond_i = false;
  bool cond_ii = false;
  Verdict cqlf = Verdict::no;
  CubicCoeffs a1_poly;
  CubicCoeffs a2_poly;
  std::vector<double> product_real_eigenvalues;
  std::vector<CorollaryResult> corollaries;
  std::vector<NamedValue> thresholds;
};

StabilityReport stability_report(const ModelParams& params);

}  // namespace agentinv
