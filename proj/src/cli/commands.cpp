#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "embspec/cli.hpp"
#include "embspec/error.hpp"
#include "embspec/random.hpp"
#include "embspec/seqio.hpp"
#include "embspec/signal.hpp"

namespace embspec::cli {

namespace {

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row += ',';
    row += c;
  }
  return row + '\n';
}

Manifest load_nonempty_manifest(const RunConfig& cfg) {
  Manifest manifest = load_manifest(cfg.manifest);
  if (manifest.empty()) throw EmptyGroupError("no documents in manifest '" + cfg.manifest.string() + "'");
  return manifest;
}

[[noreturn]] void rethrow_in_group(const Error& e, const std::string& label) {
  throw Error(e.kind(), "group '" + label + "': " + e.what());
}

void collect_skipped(const std::vector<SkippedDocument>& skipped, std::vector<std::string>& warnings) {
  for (const auto& s : skipped) warnings.push_back("skipped document '" + s.doc_id + "': " + s.reason);
}

// Population std of per-document exponents; documents the fit cannot handle are left out.
double document_alpha_std(const CorpusAccumulation& acc, const FitWindow& window) {
  std::vector<double> alphas;
  for (const auto& mean : acc.doc_means) {
    try {
      alphas.push_back(fit_power_law(acc.f_norm, mean, window).alpha);
    } catch (const FitDomainError&) {
    }
  }
  if (alphas.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double a : alphas) sum += a;
  const double mean = sum / static_cast<double>(alphas.size());
  double ss = 0.0;
  for (double a : alphas) ss += (a - mean) * (a - mean);
  return std::sqrt(ss / static_cast<double>(alphas.size()));
}

}  // namespace

RunResult analyze(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  if (cfg.command == "shuffle-check") cfg.shuffle = true;
  cfg.validate();
  const Manifest manifest = load_nonempty_manifest(cfg);
  const CorpusOptions opts = cfg.corpus_options();

  RunResult result;
  std::string fits = csv_row({"group", "alpha", "stderr", "r2", "n_bins", "alpha_dim_mean", "alpha_dim_std",
                              "frac_within_10pct", "excluded_dims", "doc_count", "degenerate", "skipped_docs",
                              "alpha_doc_std"});
  for (const Group& group : discover_groups(manifest, cfg.group_by)) {
    try {
      const CorpusAccumulation acc = accumulate_corpus(manifest, group_filter(group, cfg.group_by), opts);
      const NormalizedSpectrum spec = corpus_spectrum(acc, cfg.norm);
      const PowerLawFit fit = fit_power_law(spec.f_norm, spec.e_mean, cfg.window);
      const DimensionStats dims = per_dimension_stats(acc.mean_power(), cfg.window);

      std::string spectra = csv_row({"f_norm", "e_mean", "e_std"});
      for (Eigen::Index k = 0; k < spec.f_norm.size(); ++k)
        spectra += csv_row({format_double(spec.f_norm(k)), format_double(spec.e_mean(k)), format_double(spec.e_std(k))});
      result.artifacts.push_back({"spectra_" + group.label + ".csv", std::move(spectra)});

      fits += csv_row({group.label, format_double(fit.alpha), format_double(fit.stderr_alpha), format_double(fit.r2),
                       std::to_string(fit.n_bins), format_double(dims.alpha_mean), format_double(dims.alpha_std),
                       format_double(dims.frac_within_10pct), std::to_string(dims.excluded_dims),
                       std::to_string(acc.doc_count()), fit.degenerate ? "1" : "0", std::to_string(acc.skipped.size()),
                       format_double(document_alpha_std(acc, cfg.window))});
      collect_skipped(acc.skipped, result.warnings);
      if (dims.excluded_dims > 0)
        result.warnings.push_back("group '" + group.label + "': " + std::to_string(dims.excluded_dims) +
                                  " dimensions excluded from per-dimension fits");
    } catch (const Error& e) {
      rethrow_in_group(e, group.label);
    }
  }
  result.artifacts.push_back({"fits.csv", std::move(fits)});
  result.artifacts.push_back({"run.json", run_json(cfg)});
  return result;
}

RunResult heatmap(const RunConfig& cfg) {
  cfg.validate();
  const Manifest manifest = load_nonempty_manifest(cfg);
  const CorpusOptions opts = cfg.corpus_options();

  RunResult result;
  for (const Group& group : discover_groups(manifest, cfg.group_by)) {
    try {
      const CorpusAccumulation acc = accumulate_corpus(manifest, group_filter(group, cfg.group_by), opts);
      const PowerSpectrum mean = acc.mean_power();

      std::ostringstream csv;
      csv << "dim\\f_norm";
      for (Eigen::Index k = 0; k < mean.bins(); ++k) csv << ',' << format_double(mean.f_norm(k));
      csv << '\n';
      for (Eigen::Index j = 0; j < mean.dim(); ++j) {
        const double integral = rectangle_integral(mean.power.col(j));
        if (!(integral > 0.0))
          result.warnings.push_back("group '" + group.label + "': dimension " + std::to_string(j) +
                                    " has no power; row left at zero");
        csv << j;
        for (Eigen::Index k = 0; k < mean.bins(); ++k)
          csv << ',' << format_double(integral > 0.0 ? mean.power(k, j) / integral : 0.0);
        csv << '\n';
      }
      result.artifacts.push_back({"heatmap_" + group.label + ".csv", csv.str()});
      collect_skipped(acc.skipped, result.warnings);
    } catch (const Error& e) {
      rethrow_in_group(e, group.label);
    }
  }
  result.artifacts.push_back({"run.json", run_json(cfg)});
  return result;
}

RunResult layers(const RunConfig& cfg) {
  cfg.validate();
  const Manifest manifest = load_nonempty_manifest(cfg);
  const CorpusOptions opts = cfg.corpus_options();
  if (numeric_layers(manifest).size() < 2)
    throw UsageError("layers needs a manifest with at least 2 numeric layers");

  Manifest layered;
  for (const auto& e : manifest.entries)
    if (!e.meta.layer.is_static()) layered.entries.push_back(e);

  RunResult result;
  for (const Group& group : discover_groups(layered, cfg.group_by)) {
    try {
      const LayerSweep sweep = layer_sweep(manifest, group_filter(group, cfg.group_by), cfg.window, cfg.norm, opts);
      std::string csv = csv_row({"layer", "alpha", "stderr", "r2"});
      for (const auto& p : sweep.points)
        csv += csv_row({std::to_string(p.layer), format_double(p.fit.alpha), format_double(p.fit.stderr_alpha),
                        format_double(p.fit.r2)});
      result.artifacts.push_back({"layers_" + group.label + ".csv", std::move(csv)});
      for (const auto& w : sweep.warnings) result.warnings.push_back("group '" + group.label + "': " + w);
      collect_skipped(sweep.skipped, result.warnings);
    } catch (const Error& e) {
      rethrow_in_group(e, group.label);
    }
  }
  result.artifacts.push_back({"run.json", run_json(cfg)});
  return result;
}

void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  try {
    for (const auto& a : artifacts) {
      const auto path = dir / a.name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
      written.push_back(path);
      out << a.content;
      out.close();
      if (!out) throw IoError("failed writing '" + path.string() + "'");
    }
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
}

void SynthConfig::validate() const {
  if (n < kMinSynthLength) throw UsageError("--n must be at least " + std::to_string(kMinSynthLength));
  if (dims < 1) throw UsageError("--dims must be positive");
  if (!(std::abs(alpha) <= kMaxSynthAlpha)) throw UsageError("--alpha must lie in [-4, 4]");
  if (docs < 1) throw UsageError("--docs must be positive");
  if (out_dir.empty()) throw UsageError("--out-dir is required");
}

std::filesystem::path synth(const SynthConfig& cfg) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  const auto manifest_path = cfg.out_dir / "manifest.jsonl";
  try {
    std::string manifest;
    const std::uint64_t base = splitmix64(cfg.seed);
    for (std::size_t i = 0; i < cfg.docs; ++i) {
      char index[16];
      std::snprintf(index, sizeof index, "%05zu", i);

      const StepSignal sig = synth_power_law(cfg.n, cfg.dims, cfg.alpha, splitmix64(base + i));
      // Cumulative trajectory from x(0) = 0, summed in double.
      Eigen::MatrixXd traj(cfg.n + 1, cfg.dims);
      traj.row(0).setZero();
      for (Eigen::Index t = 0; t < cfg.n; ++t) traj.row(t + 1) = traj.row(t) + sig.values.row(t);

      EmbeddingSequence seq;
      seq.values = traj.cast<float>();
      seq.meta.doc_id = "synth-L" + std::to_string(cfg.layer) + "-" + index;
      seq.meta.language = Language{LanguageCode::Other, "synthetic"};
      seq.meta.source = Source::Ai;
      seq.meta.model_id = "synthetic";
      seq.meta.layer = LayerId::at(cfg.layer);
      seq.meta.tokenizer_id = "none";

      const std::string file = std::string("doc_") + index + ".eseq";
      written.push_back(cfg.out_dir / file);
      write_sequence_file(seq, cfg.out_dir / file);
      manifest += manifest_line(file, seq.meta) + '\n';
    }
    std::ofstream out(manifest_path, std::ios::trunc);
    written.push_back(manifest_path);
    out << manifest;
    out.close();
    if (!out) throw IoError("failed writing '" + manifest_path.string() + "'");
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return manifest_path;
}

namespace {

struct AnalysisFlags {
  std::string config;
  std::string manifest;
  std::string out_dir;
  double fit_lo = 0.02;
  double fit_hi = 0.2;
  std::string norm = "corpus";
  std::string group_by;
  bool shuffle = false;
  std::uint64_t seed = 0;
  std::string shuffle_level = "tokens";
  unsigned workers = 1;
  bool skip_bad = false;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--config", f.config, "Re-run from an emitted run.json; explicit flags override it");
  cmd->add_option("--manifest", f.manifest, "JSONL corpus manifest");
  cmd->add_option("--out-dir", f.out_dir, "Directory for CSV/JSON artifacts")->required();
  cmd->add_option("--fit-lo", f.fit_lo, "Lower edge of the fit window in f/f_max")->capture_default_str();
  cmd->add_option("--fit-hi", f.fit_hi, "Upper edge of the fit window in f/f_max")->capture_default_str();
  cmd->add_option("--norm", f.norm, "Normalization: corpus or per-doc")
      ->check(CLI::IsMember({"corpus", "per-doc"}))
      ->capture_default_str();
  cmd->add_option("--group-by", f.group_by, "Comma-separated keys: language,source,model_id,layer");
  cmd->add_flag("--shuffle", f.shuffle, "Shuffle row order within each document before analysis");
  cmd->add_option("--seed", f.seed, "Shuffle seed");
  cmd->add_option("--shuffle-level", f.shuffle_level, "Rows to shuffle: tokens (embeddings) or steps")
      ->check(CLI::IsMember({"tokens", "steps"}))
      ->capture_default_str();
  cmd->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
  cmd->add_flag("--skip-bad", f.skip_bad, "Skip unreadable or mismatched documents instead of aborting");
}

RunConfig resolve(const std::string& command, CLI::App* cmd, const AnalysisFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot open config '" + f.config + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_run_json(cfg, buf.str());
  }
  cfg.command = command;
  if (cmd->count("--manifest")) cfg.manifest = f.manifest;
  cfg.out_dir = f.out_dir;
  if (cmd->count("--fit-lo")) cfg.window.lo = f.fit_lo;
  if (cmd->count("--fit-hi")) cfg.window.hi = f.fit_hi;
  if (cmd->count("--norm")) cfg.norm = parse_norm_mode(f.norm);
  if (cmd->count("--group-by")) cfg.group_by = parse_group_by(f.group_by);
  if (cmd->count("--shuffle")) cfg.shuffle = f.shuffle;
  if (cmd->count("--seed")) cfg.seed = f.seed;
  if (cmd->count("--shuffle-level")) cfg.shuffle_level = parse_shuffle_level(f.shuffle_level);
  if (cmd->count("--skip-bad")) cfg.skip_bad = f.skip_bad;
  cfg.workers = std::thread::hardware_concurrency();
  if (cmd->count("--workers") && f.workers > 0) cfg.workers = f.workers;
  cfg.workers = std::max(1u, cfg.workers);
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power spectra and scaling exponents of embedding-step signals", "embspec"};
  app.require_subcommand(1);

  AnalysisFlags flags;
  const std::vector<std::pair<std::string, std::string>> analysis_commands = {
      {"analyze", "Corpus spectra, exponent fits and per-dimension statistics"},
      {"shuffle-check", "analyze with the shuffle control applied (requires --seed)"},
      {"heatmap", "Per-dimension normalized spectra for polar heatmaps"},
      {"layers", "Fitted exponent per transformer layer"},
  };
  std::vector<CLI::App*> analysis;
  for (const auto& [name, help] : analysis_commands) {
    analysis.push_back(app.add_subcommand(name, help));
    add_analysis_flags(analysis.back(), flags);
  }

  SynthConfig synth_cfg;
  std::string synth_out;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic power-law corpus with manifest");
  synth_cmd->add_option("--n", synth_cfg.n, "Steps per document (tokens = n + 1)")->capture_default_str();
  synth_cmd->add_option("--dims", synth_cfg.dims, "Embedding dimensions")->capture_default_str();
  synth_cmd->add_option("--alpha", synth_cfg.alpha, "Spectral exponent in [-4, 4]")->required();
  synth_cmd->add_option("--docs", synth_cfg.docs, "Number of documents")->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--layer", synth_cfg.layer, "Layer index recorded in the manifest")->capture_default_str();
  synth_cmd->add_option("--out-dir", synth_out, "Output directory")->required();

  std::vector<std::string> argv_store = {"embspec"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::Usage);
  }

  try {
    if (synth_cmd->parsed()) {
      synth_cfg.out_dir = synth_out;
      const auto manifest = synth(synth_cfg);
      out << "wrote " << synth_cfg.docs << " documents and " << manifest.string() << '\n';
      return 0;
    }
    for (CLI::App* cmd : analysis) {
      if (!cmd->parsed()) continue;
      const RunConfig cfg = resolve(cmd->get_name(), cmd, flags);
      RunResult result;
      if (cfg.command == "heatmap")
        result = heatmap(cfg);
      else if (cfg.command == "layers")
        result = layers(cfg);
      else
        result = analyze(cfg);
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';
      write_artifacts(cfg.out_dir, result.artifacts);
      for (const auto& a : result.artifacts) out << "wrote " << (cfg.out_dir / a.name).string() << '\n';
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::Data);
  }
  return static_cast<int>(ExitCode::Usage);
}

}  // namespace embspec::cli
