#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "softq/certificate.hpp"
#include "softq/io.hpp"

namespace softq {

// Method names used in report rows.
inline constexpr const char* kSoftDirect = "soft-direct";
inline constexpr const char* kSoftMerged = "soft-merged";
inline constexpr const char* kHardDirect = "hard-direct";
inline constexpr const char* kHardMerged = "hard-merged";
inline constexpr const char* kResidualDescent = "residual-descent";

// Metric names.
inline constexpr const char* kFinalDistance = "final_distance";
inline constexpr const char* kReachedGoal = "reached_goal";
inline constexpr const char* kHitObstacle = "hit_obstacle";
inline constexpr const char* kAdditionalSweeps = "additional_sweeps";

struct ReportRow {
  std::string task;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct RolloutRecord {
  std::string task;
  std::string method;
  std::uint64_t seed = 0;
  double final_distance = 0.0;
  bool reached_goal = false;
  bool hit_obstacle = false;
};

struct CertificateRecord {
  std::string instance;
  std::uint64_t seed = 0;
  std::string subset;
  double divergence_factor = kProofDivergenceFactor;
  CertificateSummary summary{};
  // C* under the other divergence factor, reported alongside because the two
  // recursions differ.
  double alternate_factor = kStatedDivergenceFactor;
  double alternate_max_c_star = 0.0;
};

struct Provenance {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string tool_version;
};

struct ExperimentReport {
  Provenance provenance;
  std::vector<ReportRow> rows;
  std::vector<CertificateRecord> certificates;

  // First row matching (task, method, metric); throws std::out_of_range.
  const ReportRow& find(const std::string& task, const std::string& method,
                        const std::string& metric) const;
};

struct TraceRecord {
  std::string task;
  std::string method;
  std::size_t iteration = 0;
  double residual = 0.0;
};

// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double x);

// Columns: task,method,metric,mean,std,n
std::string report_csv(const ExperimentReport& report);
// Columns: task,method,seed,final_distance,reached_goal,hit_obstacle
std::string rollouts_csv(std::span<const RolloutRecord> rollouts);
// Columns: task,method,iteration,residual
std::string traces_csv(std::span<const TraceRecord> traces);
// Columns: instance,seed,subset,status,<five min slacks>,max_c_star,max_d_star
std::string certificates_csv(std::span<const CertificateRecord> certificates);

io::Json to_json(const Provenance& provenance);
io::Json to_json(const CertificateRecord& record);
io::Json to_json(const ExperimentReport& report);

}  // namespace softq
