#include "degenwave/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kSingularExclusion = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Tie-breaking tolerance for the weak/strong exponent threshold.
constexpr double kExponentTie = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// a = |s|^q, derivative with respect to |s|; at s = 0 returns the limit.
WeightValue power_branch(double s, double q) {
  if (s == 0.0) {
    double da = 0.0;
    if (q < 1.0) {
      da = kInf;
    } else if (q == 1.0) {
      da = 1.0;
    }
    return {q == 0.0 ? 1.0 : 0.0, da};
  }
  const double a = std::pow(s, q);
  return {a, q * a / s};
}

double exclusion(const DomainSpec& dom) {
  return kSingularExclusion * std::max(1.0, dom.length());
}

// Dense sample grid on [lo, hi] with extra geometric points approaching the
// end nearer to x = 1.
std::vector<double> sample_grid(double lo, double hi, std::size_t count,
                                const std::vector<double>& extra, double eps) {
  std::vector<double> xs;
  if (hi < lo) return xs;
  xs.reserve(count + extra.size() + 128);
  for (std::size_t k = 0; k <= count; ++k) {
    xs.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count));
  }
  for (double x : extra) {
    if (x >= lo && x <= hi) xs.push_back(x);
  }
  const bool left_side = hi <= 1.0;
  const double span = hi - lo;
  if (span > 0.0) {
    for (int k = 1; k <= 96; ++k) {
      const double dist = std::max(eps, std::abs(left_side ? 1.0 - hi : lo - 1.0) +
                                            span * std::pow(0.7, k));
      const double x = left_side ? 1.0 - dist : 1.0 + dist;
      if (x >= lo && x <= hi) xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::size_t sample_count(const Weight& w) {
  if (const auto* t = std::get_if<Tabulated>(&w.spec())) {
    return std::max<std::size_t>(10 * t->nodes.size(), 4096);
  }
  return 4096;
}

double log_slope_ratio(const Weight& w, double x) {
  const auto [a, da] = w.eval(x);
  if (!(a > 0.0)) {
    throw Error(ErrorKind::InvalidWeight,
                "weight vanishes at x = " + fmt(x) + " away from the singular point");
  }
  return std::abs(x - 1.0) * std::abs(da) / a;
}

// Minimum of a over [lo, hi] on one side of x = 1.
double side_minimum(const Weight& w, double lo, double hi) {
  if (w.is_analytic()) {
    // Analytic weights are monotone on each side: the minimum sits at the end
    // nearest the singularity.
    return hi <= 1.0 ? w(hi) : w(lo);
  }
  const auto& t = std::get<Tabulated>(w.spec());
  double m = kInf;
  for (double x : sample_grid(lo, hi, sample_count(w), t.nodes, 0.0)) {
    m = std::min(m, w(x));
  }
  return m;
}

void fritsch_carlson(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t first, std::size_t last, std::vector<double>& m) {
  // Monotone slopes on nodes [first, last].
  const std::size_t n = last - first + 1;
  if (n < 2) return;
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[first + k + 1] - x[first + k];
    delta[k] = (y[first + k + 1] - y[first + k]) / h[k];
  }
  if (n == 2) {
    m[first] = m[last] = delta[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double d0 = delta[k - 1];
    const double d1 = delta[k];
    if (d0 == 0.0 || d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0)) {
      m[first + k] = 0.0;
    } else {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      m[first + k] = (w1 + w2) / (w1 / d0 + w2 / d1);
    }
  }
  auto edge = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if ((s > 0.0) != (d0 > 0.0) || s == 0.0) {
      s = 0.0;
    } else if ((d0 > 0.0) != (d1 > 0.0) && std::abs(s) > 3.0 * std::abs(d0)) {
      s = 3.0 * d0;
    }
    return s;
  };
  m[first] = edge(h[0], h[1], delta[0], delta[1]);
  m[last] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidWeight: return "invalid-weight";
    case ErrorKind::ClassificationFailure: return "classification-failure";
    case ErrorKind::InvalidExponent: return "invalid-exponent";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string to_string(DegeneracyClass cls) {
  return cls == DegeneracyClass::Weak ? "weak" : "strong";
}

void DomainSpec::validate() const {
  if (!(0.0 <= c && c < 1.0 && 1.0 < d && d <= 2.0)) {
    throw Error(ErrorKind::Domain, "domain requires 0 <= c < 1 < d <= 2, got c = " + fmt(c) +
                                       ", d = " + fmt(d));
  }
  if (!(c <= x1star && x1star < 1.0 && 1.0 < x2star && x2star <= d)) {
    throw Error(ErrorKind::Domain, "domain requires c <= x1star < 1 < x2star <= d, got x1star = " +
                                       fmt(x1star) + ", x2star = " + fmt(x2star));
  }
}

Tabulated read_weight_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open weight table '" + path + "'");
  Tabulated t;
  std::string line;
  int lineno = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    if (!row.eof() || vals.size() < 2 || vals.size() > 3) {
      throw Error(ErrorKind::Io, path + ":" + std::to_string(lineno) +
                                     ": expected 2 or 3 numeric columns");
    }
    if (columns == 0) columns = vals.size();
    if (vals.size() != columns) {
      throw Error(ErrorKind::Io, path + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    t.nodes.push_back(vals[0]);
    t.a_values.push_back(vals[1]);
    if (columns == 3) t.da_values.push_back(vals[2]);
  }
  return t;
}

Weight::Weight(WeightSpec spec, DomainSpec domain) : spec_(std::move(spec)), domain_(domain) {
  domain_.validate();
  if (const auto* s = std::get_if<SymmetricPower>(&spec_)) {
    if (!(s->p > 0.0)) throw Error(ErrorKind::InvalidWeight, "SymmetricPower requires p > 0");
  } else if (const auto* s = std::get_if<TwoSidedPower>(&spec_)) {
    if (!(s->p1 > 0.0 && s->p2 > 0.0)) {
      throw Error(ErrorKind::InvalidWeight, "TwoSidedPower requires p1 > 0 and p2 > 0");
    }
  } else if (const auto* s = std::get_if<Uniform>(&spec_)) {
    if (!(s->value > 0.0)) throw Error(ErrorKind::InvalidWeight, "Uniform requires value > 0");
  } else {
    auto& t = std::get<Tabulated>(spec_);
    const std::size_t n = t.nodes.size();
    if (n < 5 || t.a_values.size() != n || (!t.da_values.empty() && t.da_values.size() != n)) {
      throw Error(ErrorKind::InvalidWeight,
                  "tabulated weight needs >= 5 nodes and matching value columns");
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (!(t.nodes[k] < t.nodes[k + 1])) {
        throw Error(ErrorKind::InvalidWeight, "tabulated nodes must be strictly increasing");
      }
    }
    const double tol = 1e-12;
    if (std::abs(t.nodes.front() - domain_.c) > tol || std::abs(t.nodes.back() - domain_.d) > tol) {
      throw Error(ErrorKind::InvalidWeight, "tabulated nodes must span exactly [c, d]");
    }
    t.nodes.front() = domain_.c;
    t.nodes.back() = domain_.d;
    singular_ = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (std::abs(t.nodes[k] - 1.0) < std::abs(t.nodes[singular_] - 1.0)) singular_ = k;
    }
    if (std::abs(t.nodes[singular_] - 1.0) > tol) {
      throw Error(ErrorKind::InvalidWeight, "tabulated weight needs a node at x = 1");
    }
    t.nodes[singular_] = 1.0;
    if (t.a_values[singular_] != 0.0) {
      throw Error(ErrorKind::InvalidWeight, "tabulated weight must vanish at the node x = 1");
    }
    if (singular_ < 2 || singular_ + 3 > n) {
      throw Error(ErrorKind::InvalidWeight,
                  "tabulated weight needs at least two nodes on each side of x = 1");
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (k != singular_ && !(t.a_values[k] > 0.0)) {
        throw Error(ErrorKind::InvalidWeight,
                    "tabulated weight vanishes at x = " + fmt(t.nodes[k]) +
                        " away from the singular node");
      }
    }
    const auto& x = t.nodes;
    const auto& a = t.a_values;
    const std::size_t j = singular_;
    sigma_left_ = std::log(a[j - 1] / a[j - 2]) / std::log((1.0 - x[j - 1]) / (1.0 - x[j - 2]));
    sigma_right_ = std::log(a[j + 1] / a[j + 2]) / std::log((x[j + 1] - 1.0) / (x[j + 2] - 1.0));
    if (!(sigma_left_ > 0.0) || !(sigma_right_ > 0.0)) {
      throw Error(ErrorKind::InvalidWeight,
                  "tabulated weight must increase away from x = 1 next to the singular node");
    }
    if (!t.da_values.empty()) {
      slopes_ = t.da_values;
    } else {
      slopes_.assign(n, 0.0);
      fritsch_carlson(x, a, 0, j - 1, slopes_);
      fritsch_carlson(x, a, j + 1, n - 1, slopes_);
      slopes_[j - 1] = -sigma_left_ * a[j - 1] / (1.0 - x[j - 1]);
      slopes_[j + 1] = sigma_right_ * a[j + 1] / (x[j + 1] - 1.0);
    }
  }
}

WeightValue Weight::eval(double x) const {
  if (!(x >= domain_.c && x <= domain_.d)) {
    throw Error(ErrorKind::Domain, "x = " + fmt(x) + " lies outside [" + fmt(domain_.c) + ", " +
                                       fmt(domain_.d) + "]");
  }
  if (std::holds_alternative<Tabulated>(spec_)) return eval_tabulated(x);
  return eval_offset(x - 1.0);
}

WeightValue Weight::eval_offset(double s) const {
  if (!(s >= domain_.c - 1.0 && s <= domain_.d - 1.0)) {
    throw Error(ErrorKind::Domain, "offset " + fmt(s) + " from x = 1 lies outside the domain");
  }
  if (const auto* w = std::get_if<SymmetricPower>(&spec_)) {
    const auto v = power_branch(std::abs(s), w->p);
    return {v.a, s <= 0.0 ? -v.da : v.da};
  }
  if (const auto* w = std::get_if<TwoSidedPower>(&spec_)) {
    if (s <= 0.0) {
      const auto v = power_branch(-s, 2.0 * w->p1);
      return {v.a, -v.da};
    }
    return power_branch(s, 2.0 * w->p2);
  }
  if (const auto* w = std::get_if<Uniform>(&spec_)) {
    return {w->value, 0.0};
  }
  const auto& t = std::get<Tabulated>(spec_);
  const std::size_t j = singular_;
  if (s < 0.0 && -s <= 1.0 - t.nodes[j - 1]) {
    const double a = t.a_values[j - 1] * std::pow(-s / (1.0 - t.nodes[j - 1]), sigma_left_);
    return {a, sigma_left_ * a / s};
  }
  if (s > 0.0 && s <= t.nodes[j + 1] - 1.0) {
    const double a = t.a_values[j + 1] * std::pow(s / (t.nodes[j + 1] - 1.0), sigma_right_);
    return {a, sigma_right_ * a / s};
  }
  return eval_tabulated(1.0 + s);
}

WeightValue Weight::eval_tabulated(double x) const {
  const auto& t = std::get<Tabulated>(spec_);
  const auto& xs = t.nodes;
  const auto& as = t.a_values;
  const std::size_t s = singular_;
  if (x == 1.0) {
    const auto v = power_branch(0.0, sigma_left_);
    const double scale = as[s - 1] / std::pow(1.0 - xs[s - 1], sigma_left_);
    return {0.0, -v.da * scale};
  }
  if (x >= xs[s - 1] && x < 1.0) {
    const double a = as[s - 1] * std::pow((1.0 - x) / (1.0 - xs[s - 1]), sigma_left_);
    return {a, -sigma_left_ * a / (1.0 - x)};
  }
  if (x > 1.0 && x <= xs[s + 1]) {
    const double a = as[s + 1] * std::pow((x - 1.0) / (xs[s + 1] - 1.0), sigma_right_);
    return {a, sigma_right_ * a / (x - 1.0)};
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  if (k + 1 >= xs.size()) k = xs.size() - 2;
  const double h = xs[k + 1] - xs[k];
  const double u = (x - xs[k]) / h;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  const double a = h00 * as[k] + h10 * h * slopes_[k] + h01 * as[k + 1] + h11 * h * slopes_[k + 1];
  const double da = ((6 * u2 - 6 * u) * as[k] + (3 * u2 - 4 * u + 1) * h * slopes_[k] +
                     (-6 * u2 + 6 * u) * as[k + 1] + (3 * u2 - 2 * u) * h * slopes_[k + 1]) /
                    h;
  return {a, da};
}

WeightValue eval(const Weight& w, double x) { return w.eval(x); }

MuKappa compute_mu_kappa(const Weight& w) {
  const auto& dom = w.domain();
  if (const auto* s = std::get_if<SymmetricPower>(&w.spec())) {
    return {s->p, 1.0, s->p, 1.0};
  }
  if (const auto* s = std::get_if<TwoSidedPower>(&w.spec())) {
    return {2.0 * s->p1, 1.0, 2.0 * s->p2, 1.0};
  }
  if (std::holds_alternative<Uniform>(w.spec())) {
    return {0.0, 1.0, 0.0, 1.0};
  }
  const auto& t = std::get<Tabulated>(w.spec());
  const double eps = exclusion(dom);
  const std::size_t count = sample_count(w);
  double mu1 = 0.0, sup1 = 0.0, mu2 = 0.0, sup2 = 0.0;
  for (double x : sample_grid(dom.c, 1.0 - eps, count, t.nodes, eps)) {
    const double r = log_slope_ratio(w, x);
    sup1 = std::max(sup1, r);
    if (x >= dom.x1star) mu1 = std::max(mu1, r);
  }
  for (double x : sample_grid(1.0 + eps, dom.d, count, t.nodes, eps)) {
    const double r = log_slope_ratio(w, x);
    sup2 = std::max(sup2, r);
    if (x <= dom.x2star) mu2 = std::max(mu2, r);
  }
  return {mu1, mu1 > 0.0 ? sup1 / mu1 : 1.0, mu2, mu2 > 0.0 ? sup2 / mu2 : 1.0};
}

LocalExponents fit_local_exponents(const Tabulated& t) {
  std::size_t s = 0;
  for (std::size_t k = 1; k < t.nodes.size(); ++k) {
    if (std::abs(t.nodes[k] - 1.0) < std::abs(t.nodes[s] - 1.0)) s = k;
  }
  auto fit = [&](int dir) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (int step = 1; step <= 8; ++step) {
      const long k = static_cast<long>(s) + dir * step;
      if (k < 0 || k >= static_cast<long>(t.nodes.size())) break;
      const double dist = std::abs(t.nodes[k] - 1.0);
      const double a = t.a_values[k];
      if (!(a > 0.0) || !(dist > 0.0)) continue;
      const double lx = std::log(dist);
      const double ly = std::log(a);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++used;
    }
    const double det = used * sxx - sx * sx;
    if (used < 4 || !(std::abs(det) > 1e-14 * std::max(1.0, used * sxx))) {
      throw Error(ErrorKind::ClassificationFailure,
                  "too few usable nodes near x = 1 for exponent regression (" +
                      std::to_string(used) + " < 4)");
    }
    return (used * sxy - sx * sy) / det;
  };
  return {fit(-1), fit(+1)};
}

DegeneracyClass classify(const Weight& w) {
  auto from_exponents = [](double left, double right) {
    return (left < 1.0 - kExponentTie && right < 1.0 - kExponentTie) ? DegeneracyClass::Weak
                                                                     : DegeneracyClass::Strong;
  };
  if (const auto* s = std::get_if<SymmetricPower>(&w.spec())) return from_exponents(s->p, s->p);
  if (const auto* s = std::get_if<TwoSidedPower>(&w.spec())) {
    return from_exponents(2.0 * s->p1, 2.0 * s->p2);
  }
  if (std::holds_alternative<Uniform>(w.spec())) return DegeneracyClass::Weak;
  const auto e = fit_local_exponents(std::get<Tabulated>(w.spec()));
  return from_exponents(e.left, e.right);
}

FriedrichsConstants friedrichs_constants(const Weight& w, double mu1, double mu2) {
  if (!(mu1 < 2.0 && mu2 < 2.0)) {
    throw Error(ErrorKind::InvalidExponent, "degeneracy exponents must satisfy mu < 2, got mu1 = " +
                                                fmt(mu1) + ", mu2 = " + fmt(mu2));
  }
  if (!(mu1 >= 0.0 && mu2 >= 0.0)) {
    throw Error(ErrorKind::InvalidExponent, "degeneracy exponents must be nonnegative");
  }
  const auto& dom = w.domain();
  const double c = dom.c, d = dom.d, x1 = dom.x1star, x2 = dom.x2star;
  const double min1 = side_minimum(w, c, x1);
  const double min2 = side_minimum(w, x2, d);
  const double a1 = w(x1);
  const double a2 = w(x2);

  FriedrichsConstants k{};
  k.D1a = (x1 - c) * (2.0 - x1 - c) / (2.0 * min1) + (1.0 - x1) * (1.0 - x1) / (a1 * (2.0 - mu1));
  k.D2a = (d - x2) * (d + x2 - 2.0) / (2.0 * min2) + (x2 - 1.0) * (x2 - 1.0) / (a2 * (2.0 - mu2));
  k.Ca2 = 4.0 * std::max({std::pow(1.0 - c, mu1) / min1, std::pow(1.0 - x1, mu1) / a1,
                          std::pow(d - 1.0, mu2) / min2, std::pow(x2 - 1.0, mu2) / a2});
  k.Ca = std::sqrt(k.Ca2);
  k.Da = std::max(std::sqrt(k.D1a), std::sqrt(k.D2a));
  k.poincare = std::min(k.Da, k.Ca);
  return k;
}

double observability_time(const FriedrichsConstants& k, double mu1, double mu2) {
  const double m = std::max(mu1, mu2);
  return (std::max(4.0, k.Ca2) + k.poincare * m) / (2.0 - m);
}

double observability_time(const Weight& w) {
  const auto mk = compute_mu_kappa(w);
  return observability_time(friedrichs_constants(w, mk.mu1, mk.mu2), mk.mu1, mk.mu2);
}

bool check_slope_conditions(const Weight& w) {
  const auto& dom = w.domain();
  const auto mk = compute_mu_kappa(w);
  constexpr int kSamples = 256;
  auto ok = [](double lhs, double scale) { return lhs >= -1e-12 * std::max(1.0, scale); };
  if (dom.x1star > dom.c) {
    for (int k = 0; k <= kSamples; ++k) {
      const double x = dom.c + (dom.x1star - dom.c) * k / kSamples;
      const auto [a, da] = w.eval(x);
      // a'/a >= -mu1/(1-x)  <=>  (1-x) a' + mu1 a >= 0
      if (!ok((1.0 - x) * da + mk.mu1 * a, mk.mu1 * a)) return false;
    }
  }
  if (dom.x2star < dom.d) {
    for (int k = 0; k <= kSamples; ++k) {
      const double x = dom.x2star + (dom.d - dom.x2star) * k / kSamples;
      const auto [a, da] = w.eval(x);
      if (!ok(mk.mu2 * a - (x - 1.0) * da, mk.mu2 * a)) return false;
    }
  }
  return true;
}

EnvelopeBounds envelope_lower_bounds(const Weight& w, double x) {
  const auto& dom = w.domain();
  if (!(x >= dom.c && x <= dom.d)) {
    throw Error(ErrorKind::Domain, "x = " + fmt(x) + " lies outside the domain");
  }
  if (x == 1.0 && w.is_degenerate()) return {0.0, 0.0, true};
  const auto mk = compute_mu_kappa(w);
  if (x <= 1.0) {
    const double global = w(dom.c) * std::pow((1.0 - x) / (1.0 - dom.c), mk.kappa1 * mk.mu1);
    const double inner = w(dom.x1star) * std::pow((1.0 - x) / (1.0 - dom.x1star), mk.mu1);
    return {global, inner, x >= dom.x1star};
  }
  const double global = w(dom.d) * std::pow((x - 1.0) / (dom.d - 1.0), mk.kappa2 * mk.mu2);
  const double inner = w(dom.x2star) * std::pow((x - 1.0) / (dom.x2star - 1.0), mk.mu2);
  return {global, inner, x <= dom.x2star};
}

DegeneracyReport analyze(const Weight& w) {
  DegeneracyReport r;
  const auto mk = compute_mu_kappa(w);
  r.mu1 = mk.mu1;
  r.mu2 = mk.mu2;
  r.kappa1 = mk.kappa1;
  r.kappa2 = mk.kappa2;
  r.cls = classify(w);
  const auto k = friedrichs_constants(w, mk.mu1, mk.mu2);
  r.D1a = k.D1a;
  r.D2a = k.D2a;
  r.Ca = k.Ca;
  r.Ca2 = k.Ca2;
  r.Da = k.Da;
  r.poincare = k.poincare;
  r.Ta = observability_time(k, mk.mu1, mk.mu2);
  r.slope_conditions_ok = check_slope_conditions(w);
  r.exact = w.is_analytic();
  if (!r.exact) {
    r.sampling_tolerance = std::max(1.0 - w.domain().c, w.domain().d - 1.0) /
                           static_cast<double>(sample_count(w));
  }
  return r;
}

double observability_bracket(const DegeneracyReport& r, double T) {
  const double m = r.max_mu();
  return (2.0 - m) * T - std::max(4.0, r.Ca2) - r.poincare * m;
}

double observability_constant(const DegeneracyReport& r, const Weight& w, double T) {
  const auto& dom = w.domain();
  const double denom = std::max((1.0 - dom.c) * w(dom.c), (dom.d - 1.0) * w(dom.d));
  return observability_bracket(r, T) / denom;
}

}  // namespace degenwave
