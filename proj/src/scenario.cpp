#include "csp/scenario.hpp"

#include <fstream>
#include <sstream>

#include "csp/error.hpp"

namespace csp {

using nlohmann::json;

namespace {

// Collects type errors instead of throwing on the first one.
class Reader {
 public:
  std::vector<std::string> errors;

  const json* member(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
      errors.push_back(where + ": missing key '" + key + "'");
      return nullptr;
    }
    return &obj.at(key);
  }

  std::optional<long long> integer(const json& obj, const char* key, const std::string& where) {
    const json* v = member(obj, key, where);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      errors.push_back(where + "." + key + ": expected integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<StateIndex> state(const json& v, const std::string& where) {
    if (!v.is_number_integer()) {
      errors.push_back(where + ": expected integer state index");
      return std::nullopt;
    }
    const long long s = v.get<long long>();
    if (s < 0) {
      errors.push_back(where + ": state index out of range (" + std::to_string(s) + ")");
      return std::nullopt;
    }
    return static_cast<StateIndex>(s);
  }

  std::optional<DeadlineDistribution> deadline(const json& v, const std::string& where) {
    if (!v.is_object() || !v.contains("type") || !v.at("type").is_string()) {
      errors.push_back(where + ": deadline needs a string 'type' of \"det\" or \"pmf\"");
      return std::nullopt;
    }
    const std::string type = v.at("type").get<std::string>();
    if (type == "det") {
      auto t = integer(v, "time", where);
      if (!t) return std::nullopt;
      return Deterministic{static_cast<int>(*t)};
    }
    if (type == "pmf") {
      const json* support = member(v, "support", where);
      if (!support) return std::nullopt;
      if (!support->is_array()) {
        errors.push_back(where + ".support: expected array of [time, probability]");
        return std::nullopt;
      }
      DiscretePmf pmf;
      for (const json& entry : *support) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() || !entry[1].is_number()) {
          errors.push_back(where + ".support: entries must be [integer time, probability]");
          return std::nullopt;
        }
        pmf.support.emplace_back(entry[0].get<int>(), entry[1].get<double>());
      }
      return pmf;
    }
    errors.push_back(where + ": unknown deadline type '" + type + "'");
    return std::nullopt;
  }
};

}  // namespace

Scenario parse_scenario(const json& doc) {
  Reader r;
  Scenario sc;

  if (!doc.is_object()) throw SchemaError({"scenario must be a JSON object"});

  if (const json* grid = r.member(doc, "grid", "scenario")) {
    auto w = r.integer(*grid, "width", "grid");
    auto h = r.integer(*grid, "height", "grid");
    if (w) sc.grid.width = static_cast<int>(*w);
    if (h) sc.grid.height = static_cast<int>(*h);
  }

  if (const json* envs = r.member(doc, "environments", "scenario")) {
    if (!envs->is_array()) {
      r.errors.push_back("environments: expected array");
    } else {
      for (std::size_t k = 0; k < envs->size(); ++k) {
        const std::string where = "environments[" + std::to_string(k) + "]";
        const json& env = (*envs)[k];
        ObstacleSet obstacles;
        if (const json* obs = r.member(env, "obstacles", where)) {
          if (!obs->is_array()) {
            r.errors.push_back(where + ".obstacles: expected array");
          } else {
            for (const json& s : *obs) {
              if (auto idx = r.state(s, where + ".obstacles")) obstacles.push_back(*idx);
            }
          }
        }
        auto start = r.integer(env, "start", where);
        sc.schedule.obstacles.push_back(std::move(obstacles));
        sc.schedule.starts.push_back(start ? static_cast<int>(*start) : 0);
      }
    }
  }

  if (auto horizon = r.integer(doc, "horizon", "scenario")) sc.schedule.horizon = static_cast<int>(*horizon);

  if (const json* goals = r.member(doc, "goals", "scenario")) {
    if (!goals->is_array()) {
      r.errors.push_back("goals: expected array");
    } else {
      for (std::size_t c = 0; c < goals->size(); ++c) {
        const std::string where = "goals[" + std::to_string(c) + "]";
        const json& g = (*goals)[c];
        Goal goal;
        if (const json* label = r.member(g, "label", where)) {
          if (label->is_string()) {
            goal.label = label->get<std::string>();
          } else {
            r.errors.push_back(where + ".label: expected string");
          }
        }
        if (const json* s = r.member(g, "state", where)) {
          if (auto idx = r.state(*s, where + ".state")) goal.state = *idx;
        }
        if (const json* d = r.member(g, "deadline", where)) {
          if (auto dl = r.deadline(*d, where + ".deadline")) goal.deadline = std::move(*dl);
        }
        sc.goals.goals.push_back(std::move(goal));
      }
    }
  }

  if (const json* task = r.member(doc, "task", "scenario")) {
    if (task->is_string()) {
      sc.task = task->get<std::string>();
    } else {
      r.errors.push_back("task: expected formula string");
    }
  }

  if (const json* start = r.member(doc, "start_state", "scenario")) {
    if (auto idx = r.state(*start, "start_state")) sc.start_state = *idx;
  }

  if (!r.errors.empty()) throw SchemaError(std::move(r.errors));

  std::vector<std::string> errors;
  try {
    sc.schedule = validate_schedule(std::move(sc.schedule), sc.grid);
  } catch (const SchemaError& e) {
    errors.insert(errors.end(), e.violations().begin(), e.violations().end());
  }
  try {
    validate_goals(sc.goals, sc.grid, sc.schedule.horizon);
  } catch (const SchemaError& e) {
    errors.insert(errors.end(), e.violations().begin(), e.violations().end());
  }
  if (sc.grid.width > 0 && sc.grid.height > 0 && !sc.grid.contains(sc.start_state)) {
    errors.push_back("state index out of range: start_state " + std::to_string(sc.start_state));
  }
  if (!errors.empty()) throw SchemaError(std::move(errors));
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError({"cannot open scenario file " + path.string()});
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError({path.string() + ": " + e.what()});
  }
  return parse_scenario(doc);
}

json to_json(const DeadlineDistribution& deadline) {
  if (const auto* det = std::get_if<Deterministic>(&deadline)) return {{"type", "det"}, {"time", det->time}};
  json support = json::array();
  for (const auto& [t, p] : std::get<DiscretePmf>(deadline).support) support.push_back({t, p});
  return {{"type", "pmf"}, {"support", support}};
}

json to_json(const Scenario& sc) {
  json envs = json::array();
  for (std::size_t k = 0; k < sc.schedule.count(); ++k) {
    envs.push_back({{"obstacles", sc.schedule.obstacles[k]}, {"start", sc.schedule.starts[k]}});
  }
  json goals = json::array();
  for (const Goal& g : sc.goals.goals) {
    goals.push_back({{"label", g.label}, {"state", g.state}, {"deadline", to_json(g.deadline)}});
  }
  return {{"grid", {{"width", sc.grid.width}, {"height", sc.grid.height}}},
          {"environments", envs},
          {"horizon", sc.schedule.horizon},
          {"goals", goals},
          {"task", sc.task},
          {"start_state", sc.start_state}};
}

void validate_task_groundings(const Scenario& sc, const std::vector<std::string>& task_labels) {
  std::vector<std::string> errors;
  for (const std::string& label : task_labels) {
    const auto c = sc.goals.find(label);
    if (!c) {
      errors.push_back("task references unknown goal " + label);
      continue;
    }
    const StateIndex s = sc.goals[*c].state;
    for (std::size_t k = 0; k < sc.schedule.count(); ++k) {
      if (sc.schedule.blocked(k, s)) {
        errors.push_back("goal " + label + " grounded at " + std::to_string(s) + " is an obstacle in environment " +
                         std::to_string(k + 1));
      }
    }
  }
  if (sc.schedule.count() > 0 && sc.schedule.blocked(0, sc.start_state)) {
    errors.push_back("start_state " + std::to_string(sc.start_state) + " is an obstacle at t = 0");
  }
  if (!errors.empty()) throw SchemaError(std::move(errors));
}

}  // namespace csp
