#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "softq/matrix.hpp"

namespace softq {

// Entrywise slack below which a bound counts as violated.
inline constexpr double kSlackTolerance = 1e-6;

// Divergence coefficient in the C recursion. The inductive proof produces 1/2;
// the headline statement of the bound writes the recursion with coefficient 1.
inline constexpr double kProofDivergenceFactor = 0.5;
inline constexpr double kStatedDivergenceFactor = 1.0;

enum class CertificateStatus { valid, vacuous, failed };

std::string_view to_string(CertificateStatus status);

struct CertificateSummary {
  double min_lemma_upper_slack;
  double min_lemma_lower_slack;
  double min_theorem_slack;
  double min_corollary_upper_slack;
  double min_corollary_lower_slack;
  double max_c_star;
  double max_d_star;
  CertificateStatus status;

  // Smallest slack over all five inequalities.
  double min_slack() const;
};

// Numerical certificate for pairwise additive composition.
//
//   lemma_upper_slack   = Q_sigma - Q*_C              (>= 0)
//   lemma_lower_slack   = Q*_C - (Q_sigma - C*)       (>= 0)
//   theorem_slack       = Q^{pi_sigma}_C - (Q*_C - D*) (>= 0)
//   corollary_upper     = V_sigma - V*_C              (>= 0, per state)
//   corollary_lower     = V*_C - (V_sigma - max_a C*) (>= 0, per state)
//
// C* and D* are +inf everywhere when some state's constituent policies have
// disjoint support; such certificates are vacuous rather than failed.
struct BoundCertificate {
  std::array<std::size_t, 2> subset{};
  double temperature = 1.0;
  double divergence_factor = kProofDivergenceFactor;

  Matrix c_star;
  Matrix d_star;
  Matrix lemma_upper_slack;
  Matrix lemma_lower_slack;
  Matrix theorem_slack;
  std::vector<double> corollary_upper_slack;
  std::vector<double> corollary_lower_slack;

  bool vacuous() const;
  CertificateSummary summary() const;
  CertificateStatus status() const { return summary().status; }
  bool valid() const { return status() != CertificateStatus::failed; }
};

// Largest entrywise disagreement over every matrix and vector field.
double max_field_difference(const BoundCertificate& a, const BoundCertificate& b);

}  // namespace softq
