#include "coulomb/kernel.hpp"

#include <atomic>
#include <cmath>
#include <iostream>

#include "coulomb/error.hpp"

namespace coulomb {
namespace {

std::atomic<int> g_theory_warnings{0};
std::atomic<bool> g_theory_warnings_enabled{true};

void check_dims(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InputError("kernel arguments differ in dimension: " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  if (a.empty()) throw InputError("kernel arguments must have dimension >= 1");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    r2 += diff * diff;
  }
  return r2;
}

// k(r) from r^2.
double value_from_r2(double r2, const KernelSpec& spec) {
  const double eps2 = spec.epsilon * spec.epsilon;
  if (spec.family == KernelFamily::Gaussian) return std::exp(-r2 / (2.0 * eps2));
  return std::pow(r2 + eps2, -0.5 * spec.d);
}

// Scalar c(r) with grad_a k = c * (a - b).
double grad_coefficient(double r2, const KernelSpec& spec) {
  const double eps2 = spec.epsilon * spec.epsilon;
  if (spec.family == KernelFamily::Gaussian) return -std::exp(-r2 / (2.0 * eps2)) / eps2;
  return -spec.d * std::pow(r2 + eps2, -0.5 * (spec.d + 2.0));
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Plummer ? "plummer" : "gaussian";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "plummer" || name == "Plummer") return KernelFamily::Plummer;
  if (name == "gaussian" || name == "Gaussian") return KernelFamily::Gaussian;
  throw InputError("unknown kernel family '" + name + "' (expected plummer or gaussian)");
}

void KernelSpec::validate() const {
  if (!(std::isfinite(epsilon) && epsilon > 0.0))
    throw InputError("kernel epsilon must be positive, got " + std::to_string(epsilon));
  if (!(std::isfinite(d) && d > 0.0))
    throw InputError("kernel d must be positive, got " + std::to_string(d));
}

bool within_theory_regime(const KernelSpec& spec, int m) {
  return spec.family == KernelFamily::Plummer && spec.d <= static_cast<double>(m) - 2.0;
}

bool note_theory_condition(const KernelSpec& spec, int m) {
  if (spec.family != KernelFamily::Plummer || within_theory_regime(spec, m)) return false;
  if (g_theory_warnings.fetch_add(1) == 0 && g_theory_warnings_enabled.load()) {
    std::cerr << "warning: Plummer kernel with d=" << spec.d << " in m=" << m
              << " dimensions violates d <= m-2; convergence guarantees do not apply\n";
  }
  return true;
}

int theory_warning_count() { return g_theory_warnings.load(); }

void set_theory_warnings_enabled(bool enabled) { g_theory_warnings_enabled.store(enabled); }

double radial_value(double r, const KernelSpec& spec) { return value_from_r2(r * r, spec); }

double radial_grad_norm(double r, const KernelSpec& spec) {
  return std::abs(grad_coefficient(r * r, spec)) * r;
}

double radial_laplacian(double r, const KernelSpec& spec, int m) {
  const double r2 = r * r;
  const double eps2 = spec.epsilon * spec.epsilon;
  const double dm = static_cast<double>(m);
  if (spec.family == KernelFamily::Gaussian) {
    return value_from_r2(r2, spec) * (r2 / (eps2 * eps2) - dm / eps2);
  }
  const double d = spec.d;
  return d * (-eps2 * dm + (2.0 + d - dm) * r2) * std::pow(eps2 + r2, -2.0 - 0.5 * d);
}

double kernel_value(std::span<const double> a, std::span<const double> b, const KernelSpec& spec) {
  check_dims(a, b);
  spec.validate();
  return value_from_r2(squared_distance(a, b), spec);
}

void kernel_grad(std::span<const double> a, std::span<const double> b, const KernelSpec& spec,
                 std::span<double> out) {
  check_dims(a, b);
  spec.validate();
  if (out.size() != a.size()) throw InputError("gradient output has wrong dimension");
  const double c = grad_coefficient(squared_distance(a, b), spec);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = c * (a[k] - b[k]);
}

std::vector<double> kernel_grad(std::span<const double> a, std::span<const double> b,
                                const KernelSpec& spec) {
  std::vector<double> out(a.size());
  kernel_grad(a, b, spec, out);
  return out;
}

double kernel_laplacian(std::span<const double> a, std::span<const double> b,
                        const KernelSpec& spec, int m) {
  check_dims(a, b);
  spec.validate();
  if (m != static_cast<int>(a.size()))
    throw InputError("laplacian dimension m=" + std::to_string(m) +
                     " does not match point dimension " + std::to_string(a.size()));
  return radial_laplacian(std::sqrt(squared_distance(a, b)), spec, m);
}

}  // namespace coulomb
