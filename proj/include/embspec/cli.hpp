#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "embspec/corpus.hpp"
#include "embspec/fitting.hpp"
#include "embspec/spectral.hpp"

namespace embspec::cli {

enum class ExitCode : int { Ok = 0, Usage = 2, Data = 3, Numeric = 4 };

ExitCode exit_code_for(ErrorKind kind);

/// Shortest decimal string that parses back to the same binary64 value.
std::string format_double(double v);

/// Metadata keys usable with --group-by, in canonical order.
inline const std::vector<std::string> kGroupKeys = {"language", "source", "model_id", "layer"};

/// Parses "source,language" style lists; result is deduplicated and in canonical order.
std::vector<std::string> parse_group_by(const std::string& text);

struct RunConfig {
  std::string command = "analyze";  // analyze | shuffle-check | heatmap | layers
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::vector<std::string> group_by;
  FitWindow window;
  NormMode norm = NormMode::Corpus;
  bool shuffle = false;
  std::optional<std::uint64_t> seed;
  ShuffleLevel shuffle_level = ShuffleLevel::Tokens;
  unsigned workers = 1;
  bool skip_bad = false;

  /// Throws UsageError on an invalid window, missing seed, etc.
  void validate() const;
  CorpusOptions corpus_options() const;
};

/// The resolved configuration as written to run.json. Worker count and output
/// directory are execution details and are left out, so runs that differ only
/// in those produce identical bytes.
std::string run_json(const RunConfig& cfg);

/// Overlays the settings stored in a run.json document onto cfg.
void apply_run_json(RunConfig& cfg, const std::string& json_text);

/// One labelled subset of the manifest.
struct Group {
  std::string label;  // filename-safe, "all" when ungrouped
  DocumentMeta key;   // only the group_by fields are meaningful
};

/// Distinct groups in order of first appearance in the manifest.
std::vector<Group> discover_groups(const Manifest& manifest, const std::vector<std::string>& group_by);
DocumentFilter group_filter(const Group& group, const std::vector<std::string>& group_by);

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  std::vector<std::string> warnings;
};

RunResult analyze(const RunConfig& cfg);
RunResult heatmap(const RunConfig& cfg);
RunResult layers(const RunConfig& cfg);

/// Writes every artifact into dir, removing the ones already written if any write fails.
void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts);

struct SynthConfig {
  Eigen::Index n = 1198;  // steps per document
  Eigen::Index dims = 64;
  double alpha = 5.0 / 3.0;
  std::size_t docs = 200;
  std::uint64_t seed = 0;
  unsigned layer = 0;
  std::filesystem::path out_dir;

  void validate() const;
};

/// Writes `docs` ESEQ trajectories (T = n + 1) whose step signals are
/// synth_power_law outputs, plus manifest.jsonl. Returns the manifest path.
std::filesystem::path synth(const SynthConfig& cfg);

/// Full command-line entry point.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace embspec::cli
