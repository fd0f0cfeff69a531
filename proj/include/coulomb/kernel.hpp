#pragma once

#include <span>
#include <string>
#include <vector>

namespace coulomb {

enum class KernelFamily { Plummer, Gaussian };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

// Radial kernel description.
//
// Plummer:  k(a,b) = (|a-b|^2 + eps^2)^(-d/2)
// Gaussian: k(a,b) = exp(-|a-b|^2 / (2 eps^2))   (ablation only; `d` unused)
//
// The convergence guarantees of the Plummer potential need d <= m - 2 for
// data dimension m. Other values are evaluated normally but trigger a single
// process-wide warning the first time a batch-level routine sees them.
struct KernelSpec {
  KernelFamily family = KernelFamily::Plummer;
  double d = 1.0;
  double epsilon = 1.0;

  static KernelSpec plummer(double d, double epsilon) { return {KernelFamily::Plummer, d, epsilon}; }
  static KernelSpec gaussian(double epsilon) { return {KernelFamily::Gaussian, 1.0, epsilon}; }

  // Throws InputError unless epsilon > 0 and d > 0 (both finite).
  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// True for a Plummer kernel with d <= m - 2.
bool within_theory_regime(const KernelSpec& spec, int m);

// Emits the one-time stderr warning when `spec` is outside the regime for
// dimension m. Returns true if the regime condition is violated.
bool note_theory_condition(const KernelSpec& spec, int m);
int theory_warning_count();
void set_theory_warnings_enabled(bool enabled);

// Radial forms, r = |a - b| >= 0.
double radial_value(double r, const KernelSpec& spec);
// |grad_a k| as a function of r.
double radial_grad_norm(double r, const KernelSpec& spec);
// Laplacian in m dimensions as a function of r.
double radial_laplacian(double r, const KernelSpec& spec, int m);

double kernel_value(std::span<const double> a, std::span<const double> b, const KernelSpec& spec);

// Gradient with respect to the first argument.
void kernel_grad(std::span<const double> a, std::span<const double> b, const KernelSpec& spec,
                 std::span<double> out);
std::vector<double> kernel_grad(std::span<const double> a, std::span<const double> b,
                                const KernelSpec& spec);

// Laplacian with respect to a. For Plummer:
//   d (-eps^2 m + (2 + d - m) r^2) (eps^2 + r^2)^(-2 - d/2)
// `m` must equal the dimension of a and b.
double kernel_laplacian(std::span<const double> a, std::span<const double> b,
                        const KernelSpec& spec, int m);

}  // namespace coulomb
