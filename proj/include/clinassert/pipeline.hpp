#ifndef CLINASSERT_PIPELINE_HPP
#define CLINASSERT_PIPELINE_HPP

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinassert/error.hpp"
#include "clinassert/merger.hpp"

namespace clinassert {

/// Merge stages wired as a DAG. Stage inputs name either annotator streams
/// or other stages.
struct PipelineConfig {
  std::vector<MergerConfig> stages;
  std::string final_stage;  // empty: the unique stage no other stage consumes

  const MergerConfig* stage(const std::string& name) const {
    for (const auto& s : stages)
      if (s.name == name) return &s;
    return nullptr;
  }

  /// Stream names referenced by some stage that are not stages themselves.
  std::set<std::string> referenced_streams() const {
    std::set<std::string> out;
    for (const auto& s : stages)
      for (const auto& in : s.inputs)
        if (!stage(in)) out.insert(in);
    return out;
  }

  std::string resolve_final() const {
    if (stages.empty()) throw ConfigError("pipeline has no stages");
    if (!final_stage.empty()) {
      if (!stage(final_stage)) throw ConfigError("pipeline final stage '" + final_stage + "' does not exist");
      return final_stage;
    }
    std::set<std::string> consumed;
    for (const auto& s : stages) consumed.insert(s.inputs.begin(), s.inputs.end());
    std::vector<std::string> sinks;
    for (const auto& s : stages)
      if (!consumed.contains(s.name)) sinks.push_back(s.name);
    if (sinks.size() != 1)
      throw ConfigError("pipeline must have exactly one final stage, found " + std::to_string(sinks.size()));
    return sinks.front();
  }

  /// Stages needed for the final one, dependencies first.
  std::vector<const MergerConfig*> execution_order(const std::set<std::string>& stream_names) const {
    std::set<std::string> names;
    for (const auto& s : stages) {
      s.validate();
      if (!names.insert(s.name).second) throw ConfigError("duplicate stage name '" + s.name + "'");
      if (stream_names.contains(s.name))
        throw ConfigError("stage name '" + s.name + "' collides with a stream name");
    }
    std::vector<const MergerConfig*> order;
    std::map<std::string, int> state;  // 1 visiting, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& name) {
      const MergerConfig* s = stage(name);
      if (!s) {
        if (!stream_names.contains(name)) throw ConfigError("dangling reference to '" + name + "'");
        return;
      }
      if (state[name] == 2) return;
      if (state[name] == 1) throw ConfigError("pipeline has a cycle through stage '" + name + "'");
      state[name] = 1;
      for (const auto& in : s->inputs) visit(in);
      state[name] = 2;
      order.push_back(s);
    };
    visit(resolve_final());
    return order;
  }
};

namespace detail {

inline bool json_flag(const nlohmann::json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(where + ": " + key + " must be a boolean");
  return j[key].get<bool>();
}

inline std::vector<std::string> json_strings(const nlohmann::json& j, const char* key, const std::string& where) {
  std::vector<std::string> out;
  if (!j[key].is_array()) throw ConfigError(where + ": " + key + " must be an array of strings");
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw ConfigError(where + ": " + key + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline PipelineConfig parse_pipeline(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("stages") || !j["stages"].is_array())
    throw ConfigError("pipeline: expected {\"stages\": [...]}");
  PipelineConfig p;
  if (j.contains("final")) {
    if (!j["final"].is_string()) throw ConfigError("pipeline: final must be a string");
    p.final_stage = j["final"].get<std::string>();
  }
  for (const auto& s : j["stages"]) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string())
      throw ConfigError("pipeline: every stage needs a name");
    MergerConfig m;
    m.name = s["name"].get<std::string>();
    const std::string where = "stage '" + m.name + "'";
    if (!s.contains("inputs")) throw ConfigError(where + ": missing inputs");
    m.inputs = detail::json_strings(s, "inputs", where);
    if (s.contains("whitelist")) {
      std::set<AssertionLabel> wl;
      for (const auto& l : detail::json_strings(s, "whitelist", where)) {
        const auto label = parse_assertion(l);
        if (!label) throw ConfigError(where + ": unknown whitelist label '" + l + "'");
        wl.insert(AssertionLabel(*label));
      }
      m.whitelist = std::move(wl);
    }
    m.merge_overlapping = detail::json_flag(s, "merge_overlapping", m.merge_overlapping, where);
    m.majority_voting = detail::json_flag(s, "majority_voting", m.majority_voting, where);
    m.apply_filter_before_merge = detail::json_flag(s, "apply_filter_before_merge", m.apply_filter_before_merge, where);
    if (s.contains("ordering_features")) m.ordering_features = detail::json_strings(s, "ordering_features", where);
    m.validate();
    p.stages.push_back(std::move(m));
  }
  return p;
}

inline PipelineConfig load_pipeline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open pipeline config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
  try {
    return parse_pipeline(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Runs the stages in dependency order and returns the final stage output.
inline std::vector<Annotation> run_pipeline(const StreamMap& streams, const PipelineConfig& pipeline) {
  std::set<std::string> stream_names;
  for (const auto& [name, _] : streams) stream_names.insert(name);
  StreamMap available = streams;
  std::vector<Annotation> last;
  for (const MergerConfig* stage : pipeline.execution_order(stream_names)) {
    last = merge(available, *stage);
    available[stage->name] = last;
  }
  return last;
}

}  // namespace clinassert

#endif  // CLINASSERT_PIPELINE_HPP
