#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "softq/certificate.hpp"
#include "softq/mdp.hpp"
#include "softq/tables.hpp"

namespace softq::io {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// MDP file:
//   { "num_states": S, "num_actions": A, "discount": g,
//     "transition": [[[P(s'|s,a) ...] ...] ...],
//     "terminal": [state indices],            (optional)
//     "rewards": { "label": [[r(s,a) ...] ...], ... } }
//
// Doubles are written in shortest round-trip form (at most 17 significant
// digits), so reading a written document reproduces every value bit-exactly.
struct MdpDocument {
  FiniteMdp mdp;
  TaskSet tasks;
};

Json to_json(const FiniteMdp& mdp, const TaskSet& tasks);
MdpDocument mdp_document_from_json(const Json& doc);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const QTable& q);
QTable q_table_from_json(const Json& j);
Json to_json(const ValueTable& v);
Json to_json(const StochasticPolicy& policy);
StochasticPolicy policy_from_json(const Json& j);
Json to_json(const SolveDiagnostics& diagnostics);

// Infinite entries (vacuous certificates) serialize as null.
Json to_json(const CertificateSummary& summary);
Json to_json(const BoundCertificate& certificate);

std::string dump(const Json& doc);
Json parse(const std::string& text);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& contents);
void write_json_file(const std::filesystem::path& path, const Json& doc);

MdpDocument read_mdp_file(const std::filesystem::path& path);
void write_mdp_file(const std::filesystem::path& path, const FiniteMdp& mdp, const TaskSet& tasks);

}  // namespace softq::io
