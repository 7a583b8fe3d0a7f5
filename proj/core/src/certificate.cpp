#include "softq/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softq {

namespace {

double min_of(std::span<const double> xs) {
  double lo = std::numeric_limits<double>::infinity();
  for (double x : xs) lo = std::min(lo, x);
  return lo;
}

}  // namespace

std::string_view to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::valid: return "valid";
    case CertificateStatus::vacuous: return "vacuous";
    case CertificateStatus::failed: return "failed";
  }
  return "unknown";
}

double CertificateSummary::min_slack() const {
  return std::min({min_lemma_upper_slack, min_lemma_lower_slack, min_theorem_slack,
                   min_corollary_upper_slack, min_corollary_lower_slack});
}

bool BoundCertificate::vacuous() const {
  return std::any_of(c_star.data().begin(), c_star.data().end(),
                     [](double c) { return std::isinf(c); });
}

CertificateSummary BoundCertificate::summary() const {
  CertificateSummary s{};
  s.min_lemma_upper_slack = min_of(lemma_upper_slack.data());
  s.min_lemma_lower_slack = min_of(lemma_lower_slack.data());
  s.min_theorem_slack = min_of(theorem_slack.data());
  s.min_corollary_upper_slack = min_of(corollary_upper_slack);
  s.min_corollary_lower_slack = min_of(corollary_lower_slack);
  s.max_c_star = max_entry(c_star);
  s.max_d_star = max_entry(d_star);

  // NaN slacks fail: !(x >= tol) is true for NaN.
  const bool violated = !(s.min_lemma_upper_slack >= -kSlackTolerance) ||
                        !(s.min_lemma_lower_slack >= -kSlackTolerance) ||
                        !(s.min_theorem_slack >= -kSlackTolerance) ||
                        !(s.min_corollary_upper_slack >= -kSlackTolerance) ||
                        !(s.min_corollary_lower_slack >= -kSlackTolerance) ||
                        !(min_entry(c_star) >= 0.0) || !(min_entry(d_star) >= 0.0);
  if (violated) {
    s.status = CertificateStatus::failed;
  } else if (vacuous()) {
    s.status = CertificateStatus::vacuous;
  } else {
    s.status = CertificateStatus::valid;
  }
  return s;
}

double max_field_difference(const BoundCertificate& a, const BoundCertificate& b) {
  const double diffs[] = {
      max_abs_diff(a.c_star, b.c_star),
      max_abs_diff(a.d_star, b.d_star),
      max_abs_diff(a.lemma_upper_slack, b.lemma_upper_slack),
      max_abs_diff(a.lemma_lower_slack, b.lemma_lower_slack),
      max_abs_diff(a.theorem_slack, b.theorem_slack),
      max_abs_diff(a.corollary_upper_slack, b.corollary_upper_slack),
      max_abs_diff(a.corollary_lower_slack, b.corollary_lower_slack),
  };
  double worst = 0.0;
  for (double d : diffs) {
    if (std::isnan(d)) return d;
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace softq
