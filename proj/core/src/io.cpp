#include "softq/io.hpp"

#include <fstream>
#include <sstream>

namespace softq::io {

namespace {

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  return doc.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t count(const Json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw FormatError(std::string(what) + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

Json vector_json(std::span<const double> xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(x);
  return out;
}

}  // namespace

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r)));
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("matrix must be an array of rows");
  std::vector<std::vector<double>> rows;
  rows.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array()) throw FormatError("matrix row must be an array");
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& x : row) values.push_back(number(x, "matrix entry"));
    rows.push_back(std::move(values));
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

Json to_json(const FiniteMdp& mdp, const TaskSet& tasks) {
  Json doc;
  doc["num_states"] = mdp.num_states();
  doc["num_actions"] = mdp.num_actions();
  doc["discount"] = mdp.discount();
  Json transition = Json::array();
  for (StateIndex s = 0; s < mdp.num_states(); ++s) {
    Json per_action = Json::array();
    for (ActionIndex a = 0; a < mdp.num_actions(); ++a) {
      per_action.push_back(vector_json(mdp.successors(s, a)));
    }
    transition.push_back(std::move(per_action));
  }
  doc["transition"] = std::move(transition);
  if (!mdp.terminal_mask().empty()) {
    Json terminal = Json::array();
    for (StateIndex s = 0; s < mdp.num_states(); ++s) {
      if (mdp.is_terminal(s)) terminal.push_back(s);
    }
    doc["terminal"] = std::move(terminal);
  }
  Json rewards = Json::object();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    rewards[tasks.label(i)] = to_json(tasks.reward(i).values());
  }
  doc["rewards"] = std::move(rewards);
  return doc;
}

MdpDocument mdp_document_from_json(const Json& doc) {
  static const char* const kKnown[] = {"num_states", "num_actions", "discount",
                                       "transition", "terminal", "rewards"};
  if (!doc.is_object()) throw FormatError("MDP document must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw FormatError("unknown field '" + key + "' in MDP document");
    }
  }
  const std::size_t num_states = count(require(doc, "num_states"), "num_states");
  const std::size_t num_actions = count(require(doc, "num_actions"), "num_actions");
  const double discount = number(require(doc, "discount"), "discount");
  const Json& transition = require(doc, "transition");

  std::vector<double> flat;
  flat.reserve(num_states * num_actions * num_states);
  if (!transition.is_array() || transition.size() != num_states) {
    throw FormatError("transition must have num_states entries");
  }
  for (const auto& per_action : transition) {
    if (!per_action.is_array() || per_action.size() != num_actions) {
      throw FormatError("transition[s] must have num_actions entries");
    }
    for (const auto& row : per_action) {
      if (!row.is_array() || row.size() != num_states) {
        throw FormatError("transition[s][a] must have num_states entries");
      }
      for (const auto& p : row) flat.push_back(number(p, "transition probability"));
    }
  }

  std::vector<bool> terminal;
  if (doc.contains("terminal")) {
    terminal.assign(num_states, false);
    for (const auto& s : doc.at("terminal")) {
      const std::size_t index = count(s, "terminal state");
      if (index >= num_states) throw FormatError("terminal state index out of range");
      terminal[index] = true;
    }
  }

  try {
    FiniteMdp mdp(num_states, num_actions, std::move(flat), discount, std::move(terminal));
    std::vector<RewardTable> rewards;
    std::vector<std::string> labels;
    if (doc.contains("rewards")) {
      const Json& map = doc.at("rewards");
      if (!map.is_object()) throw FormatError("rewards must map labels to matrices");
      for (const auto& [label, values] : map.items()) {
        labels.push_back(label);
        rewards.emplace_back(matrix_from_json(values));
      }
    }
    TaskSet tasks(mdp, std::move(rewards), std::move(labels));
    return MdpDocument{std::move(mdp), std::move(tasks)};
  } catch (const InvalidModel& e) {
    throw FormatError(e.what());
  }
}

Json to_json(const QTable& q) {
  Json out;
  out["temperature"] = q.temperature();
  out["q"] = to_json(q.values());
  return out;
}

QTable q_table_from_json(const Json& j) {
  return QTable(matrix_from_json(require(j, "q")), number(require(j, "temperature"), "temperature"));
}

Json to_json(const ValueTable& v) { return vector_json(v.values()); }

Json to_json(const StochasticPolicy& policy) { return to_json(policy.probs()); }

StochasticPolicy policy_from_json(const Json& j) {
  try {
    return StochasticPolicy::from_probs(matrix_from_json(j));
  } catch (const InvalidModel& e) {
    throw FormatError(e.what());
  }
}

Json to_json(const SolveDiagnostics& diagnostics) {
  Json out;
  out["iterations"] = diagnostics.iterations;
  out["final_residual"] = diagnostics.final_residual;
  out["contraction_trace"] = vector_json(diagnostics.contraction_trace);
  return out;
}

Json to_json(const CertificateSummary& summary) {
  Json out;
  out["status"] = std::string(to_string(summary.status));
  out["valid"] = summary.status != CertificateStatus::failed;
  out["min_lemma_upper_slack"] = summary.min_lemma_upper_slack;
  out["min_lemma_lower_slack"] = summary.min_lemma_lower_slack;
  out["min_theorem_slack"] = summary.min_theorem_slack;
  out["min_corollary_upper_slack"] = summary.min_corollary_upper_slack;
  out["min_corollary_lower_slack"] = summary.min_corollary_lower_slack;
  out["max_c_star"] = summary.max_c_star;
  out["max_d_star"] = summary.max_d_star;
  return out;
}

Json to_json(const BoundCertificate& certificate) {
  Json out;
  out["subset"] = {certificate.subset[0], certificate.subset[1]};
  out["temperature"] = certificate.temperature;
  out["divergence_factor"] = certificate.divergence_factor;
  out["summary"] = to_json(certificate.summary());
  out["c_star"] = to_json(certificate.c_star);
  out["d_star"] = to_json(certificate.d_star);
  out["lemma_upper_slack"] = to_json(certificate.lemma_upper_slack);
  out["lemma_lower_slack"] = to_json(certificate.lemma_lower_slack);
  out["theorem_slack"] = to_json(certificate.theorem_slack);
  out["corollary_upper_slack"] = vector_json(certificate.corollary_upper_slack);
  out["corollary_lower_slack"] = vector_json(certificate.corollary_lower_slack);
  return out;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  write_text_file(path, dump(doc));
}

MdpDocument read_mdp_file(const std::filesystem::path& path) {
  return mdp_document_from_json(read_json_file(path));
}

void write_mdp_file(const std::filesystem::path& path, const FiniteMdp& mdp, const TaskSet& tasks) {
  write_json_file(path, to_json(mdp, tasks));
}

}  // namespace softq::io
