#include "sktlimit/quadrature.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "sktlimit/errors.hpp"

namespace sktlimit {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr int kPanels = 8;

GaussRule build_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Mirrored nodes take their half angles from the partner so that both ends of
// [0, pi] are resolved equally well.
void fill_half_angles(std::vector<PhiNode>& rule) {
  for (PhiNode& node : rule) {
    const double mirror = kPi - node.phi;
    node.sin_half = node.phi <= mirror ? std::sin(0.5 * node.phi) : std::cos(0.5 * mirror);
    node.cos_half = node.phi <= mirror ? std::cos(0.5 * node.phi) : std::sin(0.5 * mirror);
  }
}

std::vector<PhiNode> build_phi_rule(const QuadratureOptions& options) {
  std::vector<PhiNode> out;
  if (options.scheme == QuadratureScheme::GaussLegendre) {
    const GaussRule& g = gauss_legendre(options.order);
    out.reserve(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      out.push_back({0.5 * kPi * (g.nodes[i] + 1.0), 0.5 * kPi * g.weights[i], 0.0, 0.0});
    }
    fill_half_angles(out);
    return out;
  }
  // Graded: kPanels panels per half with ratio 4, mirrored about pi/2.
  const int per_panel = std::max(4, options.order / (2 * kPanels));
  const GaussRule& g = gauss_legendre(per_panel);
  std::vector<double> breaks{0.0};
  for (int i = kPanels - 1; i >= 0; --i) {
    breaks.push_back(0.5 * kPi * std::pow(0.25, i));
  }
  std::vector<PhiNode> left;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      left.push_back({0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i],
                      0.5 * (b - a) * g.weights[i], 0.0, 0.0});
    }
  }
  out = left;
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    out.push_back({kPi - it->phi, it->weight, 0.0, 0.0});
  }
  fill_half_angles(out);
  return out;
}

struct RuleKey {
  QuadratureScheme scheme;
  int order;
  bool operator<(const RuleKey& o) const {
    return scheme != o.scheme ? scheme < o.scheme : order < o.order;
  }
};

}  // namespace

double graded_end_width() { return 0.5 * kPi * std::pow(0.25, kPanels - 1); }

std::vector<PhiNode> graded_end_nodes(double lo, double hi, int per_panel) {
  const GaussRule& g = gauss_legendre(per_panel);
  std::vector<double> breaks{0.0, lo};
  while (breaks.back() * 4.0 < hi) breaks.push_back(breaks.back() * 4.0);
  breaks.push_back(hi);
  std::vector<PhiNode> out;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      out.push_back({0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i],
                     0.5 * (b - a) * g.weights[i], 0.0, 0.0});
    }
  }
  fill_half_angles(out);
  return out;
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(build_gauss_legendre(n));
  return *slot;
}

std::string_view to_string(QuadratureScheme scheme) {
  switch (scheme) {
    case QuadratureScheme::GaussLegendre:
      return "gauss-legendre";
    case QuadratureScheme::GradedGaussLegendre:
      return "graded";
    case QuadratureScheme::TanhSinh:
      return "tanh-sinh";
  }
  return "graded";
}

QuadratureScheme quadrature_scheme_from_string(std::string_view name) {
  if (name == "gauss-legendre") return QuadratureScheme::GaussLegendre;
  if (name == "graded") return QuadratureScheme::GradedGaussLegendre;
  if (name == "tanh-sinh") return QuadratureScheme::TanhSinh;
  throw ConfigError("unknown quadrature scheme '" + std::string(name) + "'");
}

std::span<const PhiNode> phi_rule(const QuadratureOptions& options) {
  if (options.scheme == QuadratureScheme::TanhSinh) {
    throw DomainError("phi_rule: tanh-sinh has no fixed rule");
  }
  if (options.order < 2) throw DomainError("quadrature order must be >= 2");
  static std::mutex mu;
  static std::map<RuleKey, std::unique_ptr<std::vector<PhiNode>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{options.scheme, options.order}];
  if (!slot) slot = std::make_unique<std::vector<PhiNode>>(build_phi_rule(options));
  return *slot;
}

double integrate_phi(const std::function<double(double)>& integrand,
                     const QuadratureOptions& options) {
  if (options.scheme == QuadratureScheme::TanhSinh) {
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    constexpr double kClamp = 1e-13;
    auto clamped = [&](double phi) {
      return integrand(std::clamp(phi, kClamp, kPi - kClamp));
    };
    try {
      return integrator.integrate(clamped, 0.0, kPi, 1e-13);
    } catch (const std::exception& e) {
      throw QuadratureError(std::string("tanh-sinh failed: ") + e.what());
    }
  }
  double acc = 0.0;
  for (const PhiNode& node : phi_rule(options)) {
    const double v = integrand(node.phi);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite integrand at phi=" << node.phi;
      throw QuadratureError(os.str());
    }
    acc += node.weight * v;
  }
  return acc;
}

}  // namespace sktlimit
