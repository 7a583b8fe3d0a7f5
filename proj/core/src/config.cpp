#include "softq/config.hpp"

#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <set>

namespace softq {

namespace {

using io::Json;

class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : j_.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        throw ConfigError("config: unknown field '" + key + "' in " + where_);
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const {
    if (!has(key)) fail(std::string("missing field '") + key + "'");
    return j_.at(key);
  }
  std::string path(const char* key) const { return where_ + "." + key; }

  double number(const char* key) const {
    const Json& v = at(key);
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    return v.get<double>();
  }
  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t integer(const char* key) const { return as_integer(at(key), path(key)); }
  std::string string(const char* key) const {
    const Json& v = at(key);
    if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError("config: " + where_ + ": " + message);
  }

  static std::uint64_t as_integer(const Json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
    throw ConfigError("config: " + where + " must be a non-negative integer");
  }

 private:
  const Json& j_;
  std::string where_;
};

Cell parse_cell(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("config: " + where + " must be [row, col]");
  return Cell{static_cast<int>(Reader::as_integer(j[0], where)),
              static_cast<int>(Reader::as_integer(j[1], where))};
}

Json cell_json(Cell c) { return Json::array({c.row, c.col}); }

template <typename T, typename F>
std::vector<T> scalar_or_list(const Json& j, const std::string& where, F convert) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(convert(x));
  } else {
    out.push_back(convert(j));
  }
  if (out.empty()) throw ConfigError("config: " + where + " must not be empty");
  return out;
}

MdpSource parse_mdp(const Json& j, const std::filesystem::path& base_dir) {
  Reader r(j, "mdp");
  r.allow({"file", "random", "grid"});
  if (j.size() != 1) r.fail("exactly one of 'file', 'random', 'grid' is required");
  if (r.has("file")) {
    FileSource f;
    f.declared = r.string("file");
    f.path = std::filesystem::path(f.declared);
    if (f.path.is_relative() && !base_dir.empty()) f.path = base_dir / f.path;
    return f;
  }
  if (r.has("random")) {
    Reader g(r.at("random"), "mdp.random");
    g.allow({"num_states", "num_actions", "discount", "sparsity", "reward_bound"});
    RandomSource s;
    auto count = [&](const char* key) {
      const std::string where = g.path(key);
      return scalar_or_list<std::size_t>(g.at(key), where, [&](const Json& x) {
        const auto n = Reader::as_integer(x, where);
        if (n == 0) throw ConfigError("config: " + where + " must be positive");
        return static_cast<std::size_t>(n);
      });
    };
    s.num_states = count("num_states");
    s.num_actions = count("num_actions");
    s.discount = scalar_or_list<double>(g.at("discount"), g.path("discount"), [&](const Json& x) {
      if (!x.is_number()) g.fail("'discount' must be a number or a list of numbers");
      return x.get<double>();
    });
    s.sparsity = g.number_or("sparsity", 1.0);
    s.reward_bound = g.number_or("reward_bound", 1.0);
    if (!(s.sparsity > 0.0 && s.sparsity <= 1.0)) g.fail("'sparsity' must be in (0, 1]");
    if (!(s.reward_bound > 0.0)) g.fail("'reward_bound' must be positive");
    for (double d : s.discount) {
      if (!(d >= 0.0 && d < 1.0)) g.fail("'discount' must be in [0, 1)");
    }
    return s;
  }
  Reader g(r.at("grid"), "mdp.grid");
  g.allow({"width", "height", "start", "obstacles", "slip_prob", "discount"});
  GridSource s;
  s.grid.width = g.integer("width");
  s.grid.height = g.integer("height");
  s.grid.start = parse_cell(g.at("start"), g.path("start"));
  if (g.has("obstacles")) {
    for (const auto& c : g.at("obstacles")) s.grid.obstacles.insert(parse_cell(c, g.path("obstacles")));
  }
  s.grid.slip_prob = g.number_or("slip_prob", 0.0);
  s.discount = g.number("discount");
  if (!(s.discount >= 0.0 && s.discount < 1.0)) g.fail("'discount' must be in [0, 1)");
  try {
    s.grid.validate();
  } catch (const InvalidModel& e) {
    g.fail(e.what());
  }
  return s;
}

TaskDef parse_task(const Json& j, std::size_t index) {
  const std::string where = "tasks[" + std::to_string(index) + "]";
  Reader r(j, where);
  r.allow({"label", "line", "goal", "avoid", "random", "copy"});
  if (j.size() != 2) r.fail("needs 'label' and exactly one task kind");
  TaskDef t;
  t.label = r.string("label");
  if (t.label.empty()) r.fail("'label' must not be empty");
  if (r.has("line")) {
    Reader l(r.at("line"), where + ".line");
    l.allow({"axis", "target", "style"});
    LineGoalTask task;
    const std::string axis = l.string("axis");
    if (axis == "column") {
      task.axis = LineAxis::column;
    } else if (axis == "row") {
      task.axis = LineAxis::row;
    } else {
      l.fail("'axis' must be \"column\" or \"row\"");
    }
    task.target_index = l.integer("target");
    const std::string style = l.has("style") ? l.string("style") : "negative_distance";
    if (style == "negative_distance") {
      task.style = RewardStyle::negative_distance;
    } else if (style == "goal_indicator") {
      task.style = RewardStyle::goal_indicator;
    } else {
      l.fail("'style' must be \"negative_distance\" or \"goal_indicator\"");
    }
    t.kind = task;
  } else if (r.has("goal")) {
    Reader g(r.at("goal"), where + ".goal");
    g.allow({"cell"});
    t.kind = GoalTaskDef{parse_cell(g.at("cell"), g.path("cell"))};
  } else if (r.has("avoid")) {
    Reader a(r.at("avoid"), where + ".avoid");
    a.allow({"goal", "penalty"});
    AvoidTaskDef def{parse_cell(a.at("goal"), a.path("goal")), a.number("penalty")};
    if (!(def.penalty > 0.0)) a.fail("'penalty' must be positive");
    t.kind = def;
  } else if (r.has("random")) {
    Reader g(r.at("random"), where + ".random");
    g.allow({"bound"});
    RandomTaskDef def{g.number_or("bound", 1.0)};
    if (!(def.bound > 0.0)) g.fail("'bound' must be positive");
    t.kind = def;
  } else {
    t.kind = CopyTaskDef{r.string("copy")};
  }
  return t;
}

std::vector<std::uint64_t> parse_seeds(const Json& j) {
  std::vector<std::uint64_t> out;
  if (j.is_array()) {
    for (const auto& s : j) out.push_back(Reader::as_integer(s, "seeds"));
  } else {
    Reader r(j, "seeds");
    r.allow({"first", "count"});
    const std::uint64_t first = r.integer("first");
    const std::uint64_t count = r.integer("count");
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(first + i);
  }
  if (out.empty()) throw ConfigError("config: seeds must not be empty");
  return out;
}

Json task_json(const TaskDef& t) {
  Json j;
  j["label"] = t.label;
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, LineGoalTask>) {
          j["line"] = {{"axis", kind.axis == LineAxis::column ? "column" : "row"},
                       {"target", kind.target_index},
                       {"style", kind.style == RewardStyle::negative_distance ? "negative_distance"
                                                                              : "goal_indicator"}};
        } else if constexpr (std::is_same_v<K, GoalTaskDef>) {
          j["goal"] = {{"cell", cell_json(kind.goal)}};
        } else if constexpr (std::is_same_v<K, AvoidTaskDef>) {
          j["avoid"] = {{"goal", cell_json(kind.goal)}, {"penalty", kind.penalty}};
        } else if constexpr (std::is_same_v<K, RandomTaskDef>) {
          j["random"] = {{"bound", kind.bound}};
        } else {
          j["copy"] = kind.source;
        }
      },
      t.kind);
  return j;
}

}  // namespace

ExperimentConfig parse_config(const io::Json& doc, const std::filesystem::path& base_dir) {
  Reader r(doc, "top level");
  r.allow({"version", "mdp", "tasks", "subsets", "temperature", "tol", "divergence_factor",
           "seeds", "output_dir", "formats", "bench", "residual_descent"});
  ExperimentConfig c;
  c.version = static_cast<int>(r.integer("version"));
  if (c.version != kConfigVersion) {
    throw ConfigError("config: unsupported version " + std::to_string(c.version));
  }
  c.mdp = parse_mdp(r.at("mdp"), base_dir);

  if (r.has("tasks")) {
    const Json& tasks = r.at("tasks");
    if (!tasks.is_array()) r.fail("'tasks' must be an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) c.tasks.push_back(parse_task(tasks[i], i));
  }
  std::set<std::string> labels;
  for (const auto& t : c.tasks) {
    if (!labels.insert(t.label).second) throw ConfigError("config: duplicate task label '" + t.label + "'");
  }
  for (const auto& t : c.tasks) {
    const bool grid = std::holds_alternative<GridSource>(c.mdp);
    const bool needs_grid = std::holds_alternative<LineGoalTask>(t.kind) ||
                            std::holds_alternative<GoalTaskDef>(t.kind) ||
                            std::holds_alternative<AvoidTaskDef>(t.kind);
    if (needs_grid && !grid) {
      throw ConfigError("config: task '" + t.label + "' needs a grid MDP source");
    }
  }

  if (r.has("subsets")) {
    const Json& subsets = r.at("subsets");
    if (!subsets.is_array()) r.fail("'subsets' must be an array");
    for (const auto& s : subsets) {
      if (!s.is_array() || s.empty()) r.fail("each subset must be a non-empty array");
      std::vector<TaskRef> refs;
      for (const auto& x : s) {
        if (x.is_string()) {
          refs.emplace_back(x.get<std::string>());
        } else {
          refs.emplace_back(static_cast<std::size_t>(Reader::as_integer(x, "subsets")));
        }
      }
      c.subsets.push_back(std::move(refs));
    }
  }

  c.temperature = r.number_or("temperature", 1.0);
  if (!(c.temperature > 0.0)) r.fail("'temperature' must be positive");
  c.tol = r.number_or("tol", 1e-10);
  if (!(c.tol > 0.0)) r.fail("'tol' must be positive");
  c.divergence_factor = r.number_or("divergence_factor", 0.5);
  if (c.divergence_factor != 0.5 && c.divergence_factor != 1.0) {
    r.fail("'divergence_factor' must be 0.5 or 1");
  }
  c.seeds = r.has("seeds") ? parse_seeds(r.at("seeds")) : std::vector<std::uint64_t>{0};
  if (r.has("output_dir")) c.output_dir = r.string("output_dir");
  if (r.has("formats")) {
    c.formats.clear();
    for (const auto& f : r.at("formats")) {
      if (!f.is_string() || (f != "csv" && f != "json")) r.fail("'formats' entries must be \"csv\" or \"json\"");
      c.formats.push_back(f.get<std::string>());
    }
    std::sort(c.formats.begin(), c.formats.end());
    c.formats.erase(std::unique(c.formats.begin(), c.formats.end()), c.formats.end());
  }
  if (r.has("bench")) {
    Reader b(r.at("bench"), "bench");
    b.allow({"horizon", "target"});
    if (b.has("horizon")) {
      c.bench.horizon = b.integer("horizon");
      if (*c.bench.horizon == 0) b.fail("'horizon' must be >= 1");
    }
    if (b.has("target")) c.bench.target = parse_cell(b.at("target"), "bench.target");
  }
  if (r.has("residual_descent")) {
    Reader d(r.at("residual_descent"), "residual_descent");
    d.allow({"step", "max_iter"});
    c.residual_descent.step = d.number_or("step", 1.0);
    if (!(c.residual_descent.step > 0.0)) d.fail("'step' must be positive");
    if (d.has("max_iter")) c.residual_descent.max_iter = d.integer("max_iter");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  io::Json doc;
  try {
    doc = io::read_json_file(path);
  } catch (const io::FormatError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides) {
  if (overrides.output_dir) config.output_dir = *overrides.output_dir;
  if (overrides.seed) config.seeds = {*overrides.seed};
  if (overrides.tol) {
    if (!(*overrides.tol > 0.0)) throw ConfigError("--tol must be positive");
    config.tol = *overrides.tol;
  }
}

std::string canonical_config(const ExperimentConfig& c) {
  nlohmann::json j;  // std::map keys: sorted
  j["version"] = c.version;
  std::visit(
      [&](const auto& src) {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, FileSource>) {
          j["mdp"]["file"] = src.declared;
        } else if constexpr (std::is_same_v<S, RandomSource>) {
          j["mdp"]["random"] = {{"num_states", src.num_states},
                                {"num_actions", src.num_actions},
                                {"discount", src.discount},
                                {"sparsity", src.sparsity},
                                {"reward_bound", src.reward_bound}};
        } else {
          nlohmann::json obstacles = nlohmann::json::array();
          for (const Cell& o : src.grid.obstacles) obstacles.push_back({o.row, o.col});
          j["mdp"]["grid"] = {{"width", src.grid.width},
                              {"height", src.grid.height},
                              {"start", {src.grid.start.row, src.grid.start.col}},
                              {"obstacles", obstacles},
                              {"slip_prob", src.grid.slip_prob},
                              {"discount", src.discount}};
        }
      },
      c.mdp);
  j["tasks"] = nlohmann::json::array();
  for (const auto& t : c.tasks) j["tasks"].push_back(nlohmann::json::parse(task_json(t).dump()));
  j["subsets"] = nlohmann::json::array();
  for (const auto& s : c.subsets) {
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& ref : s) {
      std::visit([&](const auto& v) { refs.push_back(v); }, ref);
    }
    j["subsets"].push_back(refs);
  }
  j["temperature"] = c.temperature;
  j["tol"] = c.tol;
  j["divergence_factor"] = c.divergence_factor;
  j["seeds"] = c.seeds;
  j["formats"] = c.formats;
  if (c.bench.horizon) j["bench"]["horizon"] = *c.bench.horizon;
  if (c.bench.target) j["bench"]["target"] = {c.bench.target->row, c.bench.target->col};
  j["residual_descent"]["step"] = c.residual_descent.step;
  if (c.residual_descent.max_iter) j["residual_descent"]["max_iter"] = *c.residual_descent.max_iter;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

bool wants_format(const ExperimentConfig& config, const std::string& format) {
  return std::find(config.formats.begin(), config.formats.end(), format) != config.formats.end();
}

}  // namespace softq
