#include "bhs/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bhs/corpus.hpp"
#include "bhs/csv.hpp"
#include "bhs/error.hpp"
#include "bhs/features.hpp"
#include "bhs/hash.hpp"
#include "bhs/inference.hpp"
#include "bhs/metrics.hpp"
#include "bhs/model.hpp"
#include "bhs/report.hpp"
#include "bhs/serialize.hpp"
#include "bhs/train.hpp"

namespace bhs::cli {

namespace {

using nlohmann::json;

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Path output_path(const Path& p) {
  if (p.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
      return Path(root) / p;
    }
  }
  return p;
}

class Manifest {
 public:
  Manifest(std::string command, json config)
      : command_(std::move(command)), config_(std::move(config)), started_(timestamp()) {}

  void input(const Path& p) { inputs_[p.string()] = sha256_file_hex(p); }
  void output(const Path& p) { outputs_.push_back(p.string()); }
  void seed(std::uint64_t s) { seed_ = s; }
  void config(json c) { config_ = std::move(c); }

  void write(const Path& path) const {
    json j = {
        {"command", command_},
        {"config", config_},
        {"seed", seed_ ? json(*seed_) : json(nullptr)},
        {"inputs", inputs_},
        {"outputs", outputs_},
        {"tool_version", BHS_VERSION},
        {"started_at", started_},
        {"finished_at", timestamp()},
    };
    write_file(path, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  json config_;
  std::string started_;
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
  std::optional<std::uint64_t> seed_;
};

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == Errc::kDivergedLoss || e.code() == Errc::kNonFinite ? kExitNumeric
                                                                           : kExitInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

UnknownEmojiPolicy parse_emoji_policy(std::string_view s) {
  if (s == "drop") {
    return UnknownEmojiPolicy::kDrop;
  }
  if (s == "placeholder") {
    return UnknownEmojiPolicy::kPlaceholder;
  }
  throw Error(Errc::kInvalidArgument,
              "unknown emoji policy \"" + std::string(s) + "\" (valid: drop, placeholder)");
}

TokenPipelineConfig load_config(const ResourceOptions& r, Manifest* manifest) {
  const ResourcePaths paths = r.resolve();
  TokenPipelineConfig config = load_pipeline_config(paths);
  config.unknown_emoji = parse_emoji_policy(r.unknown_emoji);
  if (manifest != nullptr) {
    manifest->input(paths.stopwords);
    manifest->input(paths.stem_rules);
    manifest->input(paths.emot_dict);
  }
  return config;
}

json resources_json(const ResourceOptions& r) {
  const ResourcePaths p = r.resolve();
  return {{"stopwords", p.stopwords.string()},
          {"stem_rules", p.stem_rules.string()},
          {"emot_dict", p.emot_dict.string()},
          {"unknown_emoji", r.unknown_emoji}};
}

TokenSequence split_tokens(std::string_view s) {
  TokenSequence out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') {
      ++i;
    }
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') {
      ++i;
    }
    if (i > start) {
      out.emplace_back(s.substr(start, i - start));
    }
  }
  return out;
}

std::string join_tokens(const TokenSequence& tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) {
      out += ' ';
    }
    out += t;
  }
  return out;
}

/// Labeled corpus plus, per sample, the unpruned token sequence: the
/// `tokens` column when the file has one, otherwise the pipeline output.
struct TokenizedCorpus {
  LabeledCorpus corpus;
  std::vector<TokenSequence> docs;
  std::vector<int> labels;
};

TokenizedCorpus load_tokenized(const Path& path, const TokenPipelineConfig& config) {
  TokenizedCorpus out;
  const std::string text = read_file(path);
  out.corpus = parse_corpus(text, {}, path.string());
  const std::vector<csv::Record> records = csv::parse(text);
  std::optional<std::size_t> tokens_col;
  for (std::size_t c = 0; c < records.front().fields.size(); ++c) {
    if (records.front().fields[c] == "tokens") {
      tokens_col = c;
    }
  }
  for (std::size_t i = 0; i < out.corpus.size(); ++i) {
    const Sample& s = out.corpus.samples[i];
    out.docs.push_back(tokens_col ? split_tokens(records[i + 1].fields[*tokens_col])
                                  : run_pipeline_unpruned(s.text, config));
    out.labels.push_back(label_index(s.label));
  }
  return out;
}

std::vector<std::string> read_texts(const Path& path) {
  const std::vector<csv::Record> records = csv::parse(read_file(path));
  if (records.empty()) {
    throw Error(Errc::kMalformedRow, path.string() + ": missing header row");
  }
  const auto& header = records.front().fields;
  const auto it = std::find(header.begin(), header.end(), "text");
  if (it == header.end()) {
    throw Error(Errc::kMalformedRow, path.string() + ": line 1: no \"text\" column");
  }
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<std::string> texts;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != header.size()) {
      throw Error(Errc::kMalformedRow, path.string() + ": line " +
                                           std::to_string(records[r].line) + ": expected " +
                                           std::to_string(header.size()) + " fields");
    }
    texts.push_back(records[r].fields[col]);
  }
  return texts;
}

template <class T>
void pick(std::optional<T>& flag, const json& config, const char* key) {
  if (!flag && config.contains(key)) {
    flag = config.at(key).get<T>();
  }
}

template <class T>
void pick_value(T& value, const json& config, const char* key) {
  if (config.contains(key)) {
    value = config.at(key).get<T>();
  }
}

/// Loads model.bin, vocab.tsv and pipeline/ from a run directory. Any hash
/// disagreement between the three is an error.
struct RunArtifacts {
  TrainedModel trained;
  TokenPipelineConfig pipeline;
};

RunArtifacts load_run(const Path& dir) {
  for (const char* name : {"model.bin", "vocab.tsv", "pipeline"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw Error(Errc::kFileNotFound, (dir / name).string() + ": no such file");
    }
  }
  LoadedModel loaded = load_model(dir / "model.bin", dir / "vocab.tsv");
  for (const LoadWarning& w : loaded.warnings) {
    throw Error(w.code, w.message);
  }
  TokenPipelineConfig pipeline = load_pipeline(dir / "pipeline");
  if (pipeline.fingerprint() != loaded.trained.pipeline_hash) {
    throw Error(Errc::kPipelineHashMismatch,
                (dir / "pipeline").string() + ": pipeline differs from the one the model was trained with");
  }
  return {std::move(loaded.trained), std::move(pipeline)};
}

std::string format_probs(const Prediction& p) {
  std::string line(label_name(p.label));
  char buf[32];
  for (double v : p.distribution) {
    std::snprintf(buf, sizeof buf, "\t%.6f", v);
    line += buf;
  }
  return line;
}

}  // namespace

ResourcePaths ResourceOptions::resolve() const {
  ResourcePaths paths = default_resource_paths();
  if (stopwords) {
    paths.stopwords = *stopwords;
  }
  if (stem_rules) {
    paths.stem_rules = *stem_rules;
  }
  if (emot_dict) {
    paths.emot_dict = *emot_dict;
  }
  return paths;
}

int cmd_preprocess(const PreprocessOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Manifest manifest("preprocess", {{"resources", resources_json(opts.resources)}});
    const TokenPipelineConfig config = load_config(opts.resources, &manifest);
    const LabeledCorpus corpus = load_corpus(opts.input);
    manifest.input(opts.input);

    std::string csv_out = csv::format_row({"text", "tokens", "label"});
    std::size_t empty = 0;
    for (const Sample& s : corpus.samples) {
      const TokenSequence tokens = run_pipeline_unpruned(s.text, config);
      empty += tokens.empty() ? 1 : 0;
      csv_out += csv::format_row({s.text, join_tokens(tokens), std::string(label_name(s.label))});
    }
    const Path target = output_path(opts.output);
    write_file(target, csv_out);
    manifest.output(target);
    Path manifest_path = target;
    manifest_path.replace_extension(".manifest.json");
    manifest.write(manifest_path);

    out << "preprocessed " << corpus.size() << " rows; " << empty
        << " rows empty after preprocessing\n";
    return kExitOk;
  });
}

int cmd_fit_features(const FitFeaturesOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    json snapshot = {{"resources", resources_json(opts.resources)}, {"min_count", opts.min_count}};
    snapshot["max_terms"] = opts.max_terms ? json(*opts.max_terms) : json(nullptr);
    Manifest manifest("fit-features", snapshot);
    TokenPipelineConfig config = load_config(opts.resources, &manifest);
    TokenizedCorpus data = load_tokenized(opts.data, config);
    manifest.input(opts.data);

    config.min_count = opts.min_count;
    config.prune = build_frequency_filter(data.docs, opts.min_count);
    for (TokenSequence& doc : data.docs) {
      doc = remove_pruned(doc, config.prune);
    }
    const Vocabulary vocab = Vocabulary::fit(data.docs, opts.max_terms);

    const Path dir = output_path(opts.out);
    write_file(dir / "vocab.tsv", vocab.to_tsv());
    save_pipeline(config, dir / "pipeline");
    std::string rows = csv::format_row({"row", "label", "tfidf"});
    char buf[64];
    for (std::size_t i = 0; i < data.docs.size(); ++i) {
      std::string cells;
      for (const auto& [id, w] : tfidf(data.docs[i], vocab)) {
        std::snprintf(buf, sizeof buf, "%s%d:%.17g", cells.empty() ? "" : " ", id, w);
        cells += buf;
      }
      rows += csv::format_row(
          {std::to_string(i), std::string(decode_label(data.labels[i])), cells});
    }
    write_file(dir / "tfidf.csv", rows);
    for (const char* name : {"vocab.tsv", "pipeline", "tfidf.csv"}) {
      manifest.output(dir / name);
    }
    manifest.write(dir / "manifest.json");
    out << "vocabulary: " << vocab.term_count() << " terms over " << vocab.corpus_size()
        << " documents; " << config.prune.size() << " rare types pruned\n";
    return kExitOk;
  });
}

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Architecture arch = parse_architecture(opts.arch);
    json file_config = json::object();
    if (opts.config) {
      file_config = json::parse(read_file(*opts.config));
    }
    TrainOptions o = opts;
    pick(o.seed, file_config, "seed");
    pick(o.epochs, file_config, "epochs");
    pick(o.batch_size, file_config, "batch_size");
    pick(o.patience, file_config, "patience");
    pick(o.max_len, file_config, "max_len");
    pick(o.min_count, file_config, "min_count");

    TrainConfig tc;
    tc.seed = o.seed.value_or(tc.seed);
    tc.max_epochs = o.epochs.value_or(tc.max_epochs);
    tc.batch_size = o.batch_size.value_or(tc.batch_size);
    tc.patience = o.patience.value_or(tc.patience);
    pick_value(tc.adam.learning_rate, file_config, "learning_rate");
    pick_value(tc.min_delta, file_config, "min_delta");
    pick_value(tc.validation_fraction, file_config, "validation_fraction");
    tc.validate();

    ModelSpec spec;
    spec.architecture = arch;
    pick_value(spec.embed_dim, file_config, "embed_dim");
    pick_value(spec.kernel_width, file_config, "kernel_width");
    pick_value(spec.conv_channels, file_config, "conv_channels");
    pick_value(spec.rnn_hidden, file_config, "rnn_hidden");
    pick_value(spec.attention_dim, file_config, "attention_dim");
    pick_value(spec.dropout_node, file_config, "dropout_node");
    pick_value(spec.dropout_recurrent, file_config, "dropout_recurrent");
    double train_fraction = 0.8;
    pick_value(train_fraction, file_config, "train_fraction");

    Manifest manifest("train", {});
    manifest.seed(tc.seed);
    TokenPipelineConfig pipeline = load_config(o.resources, &manifest);
    pipeline.min_count = o.min_count.value_or(pipeline.min_count);
    TokenizedCorpus data = load_tokenized(o.data, pipeline);
    manifest.input(o.data);

    const IndexSplit outer = split_indices(data.labels, {train_fraction, tc.seed, true});
    auto gather = [&](const std::vector<std::size_t>& idx) {
      std::vector<TokenSequence> docs;
      std::vector<int> labels;
      for (std::size_t i : idx) {
        docs.push_back(data.docs[i]);
        labels.push_back(data.labels[i]);
      }
      return std::pair(std::move(docs), std::move(labels));
    };
    auto [train_docs, train_labels] = gather(outer.train);
    auto [test_docs, test_labels] = gather(outer.test);

    pipeline.prune = build_frequency_filter(train_docs, pipeline.min_count);
    for (auto* docs : {&train_docs, &test_docs}) {
      for (TokenSequence& d : *docs) {
        d = remove_pruned(d, pipeline.prune);
      }
    }
    const Vocabulary vocab = Vocabulary::fit(train_docs);
    spec.vocab_size = vocab.size();
    spec.max_len = o.max_len.value_or(choose_max_len(train_docs, 64, spec.kernel_width));

    // Validation is carved from the training side only.
    const SplitSpec inner_spec{1.0 - tc.validation_fraction, tc.seed + 1, true};
    IndexSplit inner;
    try {
      inner = split_indices(train_labels, inner_spec);
    } catch (const Error& e) {
      if (e.code() != Errc::kTooFewSamples) {
        throw;
      }
      inner = split_indices(train_labels, {inner_spec.train_fraction, inner_spec.seed, false});
    }
    auto subset = [](const auto& v, const std::vector<std::size_t>& idx) {
      std::remove_cvref_t<decltype(v)> out;
      for (std::size_t i : idx) {
        out.push_back(v[i]);
      }
      return out;
    };
    const SequenceDataset fit_set =
        encode_dataset(subset(train_docs, inner.train), subset(train_labels, inner.train), vocab,
                       spec.max_len);
    const SequenceDataset val_set =
        encode_dataset(subset(train_docs, inner.test), subset(train_labels, inner.test), vocab,
                       spec.max_len);
    const SequenceDataset test_set = encode_dataset(test_docs, test_labels, vocab, spec.max_len);

    Model model(spec, tc.seed);
    const TrainResult result = fit(model, fit_set, val_set, tc);

    std::vector<std::size_t> predicted;
    const auto probs = model.predict_proba(test_set.ids, test_set.size());
    for (const auto& row : probs) {
      predicted.push_back(argmax(row));
    }
    EvalReport report;
    report.architecture = std::string(architecture_name(arch));
    report.metrics = compute_metrics(test_set.labels, predicted, kNumClasses);
    report.train_seconds = result.seconds;
    report.peak_memory_mb = peak_memory_mb();
    report.train_samples = fit_set.size();
    report.validation_samples = val_set.size();
    report.test_samples = test_set.size();
    report.epochs_run = result.epochs_run;
    report.best_epoch = result.best_epoch;
    report.early_stopped = result.early_stopped;

    const Path dir = output_path(o.out);
    const TrainedModel trained{std::move(model), vocab, pipeline.fingerprint()};
    save_model(trained, dir / "model.bin");
    write_file(dir / "vocab.tsv", vocab.to_tsv());
    save_pipeline(pipeline, dir / "pipeline");
    write_file(dir / "history.csv", history_to_csv(result.history));
    write_file(dir / "report.txt", report.to_text());
    write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    LabeledCorpus test_corpus{{}, o.data.string()};
    for (std::size_t i : outer.test) {
      test_corpus.samples.push_back(data.corpus.samples[i]);
    }
    write_file(dir / "test.csv", corpus_to_csv(test_corpus));
    for (const char* name : {"model.bin", "vocab.tsv", "pipeline", "history.csv", "report.txt",
                             "report.json", "test.csv"}) {
      manifest.output(dir / name);
    }
    json snapshot = {{"model", spec.to_json()},
                     {"train", tc.to_json()},
                     {"resources", resources_json(o.resources)},
                     {"min_count", pipeline.min_count},
                     {"train_fraction", train_fraction}};
    if (o.config) {
      snapshot["config_file"] = o.config->string();
      manifest.input(*o.config);
    }
    manifest.config(std::move(snapshot));
    manifest.write(dir / "manifest.json");
    out << report.to_text();
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunArtifacts run = load_run(opts.model_dir);
    const LabeledCorpus corpus = load_corpus(opts.data);
    std::vector<std::string> texts;
    std::vector<std::size_t> gold;
    for (const Sample& s : corpus.samples) {
      texts.push_back(s.text);
      gold.push_back(static_cast<std::size_t>(label_index(s.label)));
    }
    std::vector<std::size_t> predicted;
    for (const Prediction& p : predict_batch(run.trained, texts, run.pipeline)) {
      predicted.push_back(static_cast<std::size_t>(label_index(p.label)));
    }
    EvalReport report;
    report.architecture = std::string(architecture_name(run.trained.model.spec().architecture));
    report.metrics = compute_metrics(gold, predicted, kNumClasses);
    report.test_samples = corpus.size();
    if (std::filesystem::exists(opts.model_dir / "report.json")) {
      const EvalReport trained_report =
          EvalReport::from_json(json::parse(read_file(opts.model_dir / "report.json")));
      report.train_seconds = trained_report.train_seconds;
      report.peak_memory_mb = trained_report.peak_memory_mb;
      report.train_samples = trained_report.train_samples;
      report.validation_samples = trained_report.validation_samples;
      report.epochs_run = trained_report.epochs_run;
      report.best_epoch = trained_report.best_epoch;
      report.early_stopped = trained_report.early_stopped;
    }
    if (opts.out) {
      const Path target = output_path(*opts.out);
      write_file(target, report.to_json().dump(2) + "\n");
      Manifest manifest("evaluate", {{"model_dir", opts.model_dir.string()}});
      manifest.input(opts.model_dir / "model.bin");
      manifest.input(opts.data);
      manifest.output(target);
      Path manifest_path = target;
      manifest_path.replace_extension(".manifest.json");
      manifest.write(manifest_path);
    }
    out << report.to_text();
    return kExitOk;
  });
}

int cmd_predict(const PredictOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.format != "text" && opts.format != "json-lines") {
      throw Error(Errc::kInvalidArgument,
                  "unknown format \"" + opts.format + "\" (valid: text, json-lines)");
    }
    if (opts.text.has_value() == opts.data.has_value()) {
      throw Error(Errc::kInvalidArgument, "give exactly one of --text or --data");
    }
    const RunArtifacts run = load_run(opts.model_dir);
    const std::vector<std::string> texts = opts.text ? std::vector{*opts.text} : read_texts(*opts.data);
    for (const Prediction& p : predict_batch(run.trained, texts, run.pipeline)) {
      if (opts.format == "text") {
        out << format_probs(p) << "\n";
      } else {
        json j = {{"label", label_name(p.label)},
                  {"label_index", label_index(p.label)},
                  {"distribution", p.distribution},
                  {"empty_after_preprocessing", p.empty_after_preprocessing}};
        out << j.dump() << "\n";
      }
    }
    return kExitOk;
  });
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.run_dirs.empty()) {
      throw Error(Errc::kInvalidArgument, "no run directories given");
    }
    std::vector<RunSummary> runs;
    std::vector<std::optional<History>> histories;
    for (const Path& dir : opts.run_dirs) {
      const Path report_path = dir / "report.json";
      if (!std::filesystem::exists(report_path)) {
        throw Error(Errc::kFileNotFound, report_path.string() + ": no such file");
      }
      runs.push_back({dir.filename().string(),
                      EvalReport::from_json(json::parse(read_file(report_path)))});
      const Path history_path = dir / "history.csv";
      histories.push_back(std::filesystem::exists(history_path)
                              ? std::optional(history_from_csv(read_file(history_path)))
                              : std::nullopt);
    }
    const std::string comparison = format_comparison_table(runs);
    const std::string f1 = format_f1_table(runs);
    out << comparison << "\n" << f1;

    if (opts.out) {
      const Path dir = output_path(*opts.out);
      Manifest manifest("report", {{"run_dirs", [&] {
                                      std::vector<std::string> v;
                                      for (const Path& p : opts.run_dirs) v.push_back(p.string());
                                      return v;
                                    }()}});
      write_file(dir / "comparison.txt", comparison);
      write_file(dir / "f1.txt", f1);
      manifest.output(dir / "comparison.txt");
      manifest.output(dir / "f1.txt");
      for (std::size_t i = 0; i < runs.size(); ++i) {
        manifest.input(opts.run_dirs[i] / "report.json");
        if (!histories[i]) {
          continue;
        }
        manifest.input(opts.run_dirs[i] / "history.csv");
        const Path svg = dir / (runs[i].name + "_accuracy.svg");
        write_file(svg, history_svg(*histories[i], runs[i].report.architecture + " (" +
                                                       runs[i].name + ") accuracy"));
        manifest.output(svg);
      }
      manifest.write(dir / "manifest.json");
    }
    return kExitOk;
  });
}

}  // namespace bhs::cli
