#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bhs/preprocess.hpp"

namespace bhs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Relative output paths are resolved against this directory when set.
inline constexpr const char* kOutputRootEnv = "BHS_OUTPUT_ROOT";

using Path = std::filesystem::path;

/// Unset entries fall back to the resource files shipped with the library.
struct ResourceOptions {
  std::optional<Path> stopwords;
  std::optional<Path> stem_rules;
  std::optional<Path> emot_dict;
  std::string unknown_emoji = "drop";  // drop | placeholder

  ResourcePaths resolve() const;
};

struct PreprocessOptions {
  Path input;
  Path output;
  ResourceOptions resources;
};

struct FitFeaturesOptions {
  Path data;
  Path out;
  ResourceOptions resources;
  std::size_t min_count = 5;
  std::optional<std::size_t> max_terms;
};

/// Flags left unset take their value from the optional JSON config file,
/// then from the library defaults.
struct TrainOptions {
  Path data;
  std::string arch = "attention";
  Path out;
  std::optional<Path> config;
  ResourceOptions resources;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> max_len;
  std::optional<std::size_t> min_count;
};

struct EvaluateOptions {
  Path model_dir;
  Path data;
  std::optional<Path> out;
};

struct PredictOptions {
  Path model_dir;
  std::optional<std::string> text;
  std::optional<Path> data;
  std::string format = "text";  // text | json-lines
};

struct ReportOptions {
  std::vector<Path> run_dirs;
  std::optional<Path> out;
};

/// Writes `text,tokens,label` rows; tokens are the space-joined output of
/// every pipeline stage except corpus-level pruning, which train fits on its
/// own training split.
int cmd_preprocess(const PreprocessOptions& opts, std::ostream& out, std::ostream& err);

/// Fits the prune set and vocabulary on the given data and writes
/// vocab.tsv, pipeline/, tfidf.csv and manifest.json under `out`.
int cmd_fit_features(const FitFeaturesOptions& opts, std::ostream& out, std::ostream& err);

/// Split, fit, evaluate and persist one model. Writes model.bin, vocab.tsv,
/// pipeline/, history.csv, report.txt, report.json, test.csv and
/// manifest.json under `out`.
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);

/// Scores a trained model directory on a labeled CSV.
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err);

/// One line per input: the label then the seven probabilities, tab
/// separated, or one JSON object per line.
int cmd_predict(const PredictOptions& opts, std::ostream& out, std::ostream& err);

/// Comparison table and per-class F1 table over run directories; with
/// `out`, also one accuracy-curve SVG per run.
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace bhs::cli
