#include "softq/report.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace softq {

const ReportRow& ExperimentReport::find(const std::string& task, const std::string& method,
                                        const std::string& metric) const {
  for (const auto& row : rows) {
    if (row.task == task && row.method == method && row.metric == metric) return row;
  }
  throw std::out_of_range("no report row " + task + "/" + method + "/" + metric);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = "task,method,metric,mean,std,n\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{}\n", r.task, r.method, r.metric, format_number(r.mean),
                       format_number(r.std), r.n);
  }
  return out;
}

std::string rollouts_csv(std::span<const RolloutRecord> rollouts) {
  std::string out = "task,method,seed,final_distance,reached_goal,hit_obstacle\n";
  for (const auto& r : rollouts) {
    out += fmt::format("{},{},{},{},{},{}\n", r.task, r.method, r.seed,
                       format_number(r.final_distance), r.reached_goal ? 1 : 0,
                       r.hit_obstacle ? 1 : 0);
  }
  return out;
}

std::string traces_csv(std::span<const TraceRecord> traces) {
  std::string out = "task,method,iteration,residual\n";
  for (const auto& t : traces) {
    out += fmt::format("{},{},{},{}\n", t.task, t.method, t.iteration, format_number(t.residual));
  }
  return out;
}

std::string certificates_csv(std::span<const CertificateRecord> certificates) {
  std::string out =
      "instance,seed,subset,status,min_lemma_upper_slack,min_lemma_lower_slack,"
      "min_theorem_slack,min_corollary_upper_slack,min_corollary_lower_slack,max_c_star,"
      "max_d_star\n";
  for (const auto& c : certificates) {
    const auto& s = c.summary;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", c.instance, c.seed, c.subset,
                       to_string(s.status), format_number(s.min_lemma_upper_slack),
                       format_number(s.min_lemma_lower_slack), format_number(s.min_theorem_slack),
                       format_number(s.min_corollary_upper_slack),
                       format_number(s.min_corollary_lower_slack), format_number(s.max_c_star),
                       format_number(s.max_d_star));
  }
  return out;
}

io::Json to_json(const Provenance& provenance) {
  io::Json j;
  j["config_hash"] = provenance.config_hash;
  j["seeds"] = provenance.seeds;
  j["tool_version"] = provenance.tool_version;
  return j;
}

io::Json to_json(const CertificateRecord& record) {
  io::Json j;
  j["instance"] = record.instance;
  j["seed"] = record.seed;
  j["subset"] = record.subset;
  j["divergence_factor"] = record.divergence_factor;
  j["summary"] = io::to_json(record.summary);
  j["alternate_factor"] = record.alternate_factor;
  j["alternate_max_c_star"] = record.alternate_max_c_star;
  return j;
}

io::Json to_json(const ExperimentReport& report) {
  io::Json j;
  j["provenance"] = to_json(report.provenance);
  io::Json rows = io::Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"task", r.task},
                    {"method", r.method},
                    {"metric", r.metric},
                    {"mean", r.mean},
                    {"std", r.std},
                    {"n", r.n}});
  }
  j["rows"] = std::move(rows);
  io::Json certificates = io::Json::array();
  for (const auto& c : report.certificates) certificates.push_back(to_json(c));
  j["certificates"] = std::move(certificates);
  return j;
}

}  // namespace softq
