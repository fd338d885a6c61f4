#pragma once

// Degenerate stiffness coefficient a(x) on [c, d] vanishing at the interior
// point x = 1, together with the closed-form constants derived from it.

#include <string>
#include <variant>
#include <vector>

namespace degenwave {

/// Interval [c, d] split at the singular point x = 1, plus the onsets
/// x1star < 1 < x2star of the monotone regions around it.
struct DomainSpec {
  double c = 0.0;
  double d = 2.0;
  double x1star = 0.0;
  double x2star = 2.0;

  /// Throws Error{Domain} unless 0 <= c <= x1star < 1 < x2star <= d <= 2.
  void validate() const;
  double length() const { return d - c; }
};

/// a(x) = (1-x)^{2 p1} on [c,1], (x-1)^{2 p2} on (1,d].
struct TwoSidedPower {
  double p1 = 0.5;
  double p2 = 0.5;
};

/// a(x) = |x-1|^p.
struct SymmetricPower {
  double p = 1.0;
};

/// a(x) = value everywhere. Nondegenerate; used for calibration against the
/// classical string and rejected wherever a degeneracy is required.
struct Uniform {
  double value = 1.0;
};

/// Sampled weight. The node nearest x = 1 must sit at 1 and carry a = 0.
/// `da_values` may be empty, in which case monotone (Fritsch-Carlson) slopes
/// are used for the cubic Hermite interpolant.
struct Tabulated {
  std::vector<double> nodes;
  std::vector<double> a_values;
  std::vector<double> da_values;
};

using WeightSpec = std::variant<TwoSidedPower, SymmetricPower, Uniform, Tabulated>;

/// Reads a two- or three-column (x, a[, a']) numeric table. Lines starting
/// with '#' and blank lines are skipped.
Tabulated read_weight_table(const std::string& path);

struct WeightValue {
  double a;
  double da;
};

enum class DegeneracyClass { Weak, Strong };

std::string to_string(DegeneracyClass cls);

/// A validated weight bound to its domain. Construction performs all
/// validation and, for tabulated data, the interpolation setup.
class Weight {
 public:
  Weight(WeightSpec spec, DomainSpec domain);

  const WeightSpec& spec() const { return spec_; }
  const DomainSpec& domain() const { return domain_; }

  /// a(x) and a'(x); at x = 1 the derivative is the one-sided value from the
  /// left. Throws Error{Domain} outside [c, d].
  WeightValue eval(double x) const;
  double operator()(double x) const { return eval(x).a; }

  /// a and a' at x = 1 + s. Keeps full relative accuracy for |s| far below
  /// the spacing of doubles near 1, which strongly graded meshes need.
  WeightValue eval_offset(double s) const;

  bool is_analytic() const { return !std::holds_alternative<Tabulated>(spec_); }
  bool is_degenerate() const { return !std::holds_alternative<Uniform>(spec_); }

  /// Local power-law exponents left/right of x = 1 used by the tabulated
  /// interpolant in the two cells touching the singular node.
  double closure_exponent_left() const { return sigma_left_; }
  double closure_exponent_right() const { return sigma_right_; }

 private:
  WeightValue eval_tabulated(double x) const;

  WeightSpec spec_;
  DomainSpec domain_;
  // Tabulated-only state.
  std::vector<double> slopes_;
  std::size_t singular_ = 0;
  double sigma_left_ = 0.0;
  double sigma_right_ = 0.0;
};

WeightValue eval(const Weight& w, double x);

struct MuKappa {
  double mu1;
  double kappa1;
  double mu2;
  double kappa2;
};

/// Degeneracy exponents: mu_i is the supremum of |x-1||a'|/a over the inner
/// interval, kappa_i * mu_i the supremum over the whole side. Closed form for
/// analytic weights, dense sampling for tabulated ones.
MuKappa compute_mu_kappa(const Weight& w);

/// Weak iff 1/a is integrable across x = 1. Tabulated weights use log-log
/// regression of the local exponent on the 8 nodes nearest the singularity.
DegeneracyClass classify(const Weight& w);

/// Local exponents fitted by `classify` for tabulated weights.
struct LocalExponents {
  double left;
  double right;
};
LocalExponents fit_local_exponents(const Tabulated& table);

struct FriedrichsConstants {
  double D1a;
  double D2a;
  double Ca2;  // C_a squared
  double Ca;
  double Da;
  double poincare;  // min(Da, Ca)
};

FriedrichsConstants friedrichs_constants(const Weight& w, double mu1, double mu2);

/// Minimal observability time
///   T_a = [max{4, Ca^2} + min{Da, Ca} max mu] / (2 - max mu).
double observability_time(const Weight& w);
double observability_time(const FriedrichsConstants& k, double mu1, double mu2);

/// Slope conditions on the outer intervals [c, x1star] and [x2star, d].
bool check_slope_conditions(const Weight& w);

struct EnvelopeBounds {
  double global;  // exponent kappa*mu, valid on the whole side
  double inner;   // exponent mu, valid on [x1star, 1] / [1, x2star]
  bool inner_valid;
};

EnvelopeBounds envelope_lower_bounds(const Weight& w, double x);

struct DegeneracyReport {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  DegeneracyClass cls = DegeneracyClass::Weak;
  double D1a = 0.0;
  double D2a = 0.0;
  double Ca = 0.0;
  double Ca2 = 0.0;  // C_a squared, kept to avoid a sqrt round trip
  double Da = 0.0;
  double poincare = 0.0;
  double Ta = 0.0;
  bool slope_conditions_ok = true;
  /// True when every number above is a closed form.
  bool exact = true;
  /// Spacing of the sampling grid behind tabulated suprema/minima (0 if exact).
  double sampling_tolerance = 0.0;

  double max_mu() const { return mu1 > mu2 ? mu1 : mu2; }
  double max_kappa_mu() const {
    return kappa1 * mu1 > kappa2 * mu2 ? kappa1 * mu1 : kappa2 * mu2;
  }
};

DegeneracyReport analyze(const Weight& w);

/// C_T = [(2 - max mu) T - max{4, Ca^2} - min{Da, Ca} max mu]
///       / max{(1-c) a(c), (d-1) a(d)}.
/// Nonpositive for T <= Ta.
double observability_constant(const DegeneracyReport& report, const Weight& w, double T);

/// Bracket [(2 - max mu) T - max{4, Ca^2} - min{Da, Ca} max mu] alone.
double observability_bracket(const DegeneracyReport& report, double T);

}  // namespace degenwave
