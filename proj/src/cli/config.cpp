#include <algorithm>
#include <set>

#include <json.hpp>

#include "embspec/cli.hpp"
#include "embspec/error.hpp"

namespace embspec::cli {

void RunConfig::validate() const {
  static const std::set<std::string> commands = {"analyze", "shuffle-check", "heatmap", "layers"};
  if (!commands.contains(command)) throw UsageError("unknown command '" + command + "'");
  if (manifest.empty()) throw UsageError("--manifest is required");
  window.validate();
  if (shuffle && !seed) throw UsageError("--shuffle requires --seed");
  if (workers < 1) throw UsageError("--workers must be at least 1");
  for (const auto& key : group_by)
    if (std::find(kGroupKeys.begin(), kGroupKeys.end(), key) == kGroupKeys.end())
      throw UsageError("unknown group key '" + key + "'");
  if (command == "layers" && std::find(group_by.begin(), group_by.end(), "layer") != group_by.end())
    throw UsageError("layers sweeps over layer; it cannot also be a --group-by key");
}

CorpusOptions RunConfig::corpus_options() const {
  CorpusOptions opts;
  opts.workers = workers;
  if (shuffle) opts.shuffle = ShuffleSpec{*seed};
  opts.shuffle_level = shuffle_level;
  opts.skip_bad = skip_bad;
  return opts;
}

std::string run_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["manifest"] = cfg.manifest.generic_string();
  j["group_by"] = cfg.group_by;
  j["fit_lo"] = cfg.window.lo;
  j["fit_hi"] = cfg.window.hi;
  j["norm"] = to_string(cfg.norm);
  j["shuffle"] = cfg.shuffle;
  j["shuffle_level"] = to_string(cfg.shuffle_level);
  if (cfg.seed)
    j["seed"] = *cfg.seed;
  else
    j["seed"] = nullptr;
  j["skip_bad"] = cfg.skip_bad;
  return j.dump(2) + "\n";
}

void apply_run_json(RunConfig& cfg, const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    if (j.contains("command")) cfg.command = j["command"].get<std::string>();
    if (j.contains("manifest")) cfg.manifest = j["manifest"].get<std::string>();
    if (j.contains("group_by")) cfg.group_by = j["group_by"].get<std::vector<std::string>>();
    if (j.contains("fit_lo")) cfg.window.lo = j["fit_lo"].get<double>();
    if (j.contains("fit_hi")) cfg.window.hi = j["fit_hi"].get<double>();
    if (j.contains("norm")) cfg.norm = parse_norm_mode(j["norm"].get<std::string>());
    if (j.contains("shuffle")) cfg.shuffle = j["shuffle"].get<bool>();
    if (j.contains("shuffle_level")) cfg.shuffle_level = parse_shuffle_level(j["shuffle_level"].get<std::string>());
    if (j.contains("seed")) {
      if (j["seed"].is_null())
        cfg.seed.reset();
      else
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("skip_bad")) cfg.skip_bad = j["skip_bad"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config field: ") + e.what());
  }
}

namespace {

std::string key_value(const DocumentMeta& meta, const std::string& key) {
  if (key == "language") return meta.language.str();
  if (key == "source") return to_string(meta.source);
  if (key == "model_id") return meta.model_id;
  return meta.layer.str();
}

bool same_key(const DocumentMeta& a, const DocumentMeta& b, const std::vector<std::string>& group_by) {
  for (const auto& key : group_by) {
    if (key == "language" && !(a.language == b.language)) return false;
    if (key == "source" && a.source != b.source) return false;
    if (key == "model_id" && a.model_id != b.model_id) return false;
    if (key == "layer" && !(a.layer == b.layer)) return false;
  }
  return true;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    if (!ok) c = '-';
  }
  return out;
}

}  // namespace

std::vector<Group> discover_groups(const Manifest& manifest, const std::vector<std::string>& group_by) {
  std::vector<Group> groups;
  for (const auto& entry : manifest.entries) {
    const bool known = std::any_of(groups.begin(), groups.end(),
                                   [&](const Group& g) { return same_key(g.key, entry.meta, group_by); });
    if (known) continue;
    Group g;
    g.key = entry.meta;
    if (group_by.empty()) {
      g.label = "all";
    } else {
      for (const auto& key : group_by) {
        if (!g.label.empty()) g.label += '_';
        g.label += key == "model_id" ? "model" : key;
        g.label += '-' + sanitize(key_value(entry.meta, key));
      }
    }
    if (std::any_of(groups.begin(), groups.end(), [&](const Group& o) { return o.label == g.label; }))
      throw ValidationError("groups collide on file label '" + g.label + "'");
    groups.push_back(std::move(g));
  }
  return groups;
}

DocumentFilter group_filter(const Group& group, const std::vector<std::string>& group_by) {
  return [key = group.key, group_by](const DocumentMeta& meta) { return same_key(key, meta, group_by); };
}

}  // namespace embspec::cli
