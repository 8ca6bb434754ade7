#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "bhs/cli/commands.hpp"
#include "bhs/corpus.hpp"
#include "bhs/features.hpp"
#include "bhs/metrics.hpp"
#include "bhs/train.hpp"
#include "synthetic.hpp"

using namespace bhs;
using namespace bhs::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("bhs_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, std::string_view s) {
  std::ofstream out(p, std::ios::binary);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct Result {
  int code;
  std::string out, err;
};

template <typename Options, typename Fn>
Result run(Fn fn, const Options& opts) {
  std::ostringstream out, err;
  const int code = fn(opts, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_synthetic(const fs::path& dir, std::size_t per_class) {
  testing::SyntheticSpec spec;
  spec.per_class = per_class;
  const fs::path p = dir / "corpus.csv";
  write_text(p, corpus_to_csv(testing::synthetic_corpus(spec, testing::default_pipeline())));
  return p;
}

TrainOptions quick_train(const fs::path& data, const fs::path& out, std::string arch) {
  TrainOptions o;
  o.data = data;
  o.out = out;
  o.arch = std::move(arch);
  o.epochs = 8;
  o.seed = 3;
  return o;
}

// One trained run shared by the predict tests.
const fs::path& trained_run() {
  static TempDir dir;
  static const fs::path path = [] {
    const fs::path data = write_synthetic(dir.path, 10);
    const fs::path out = dir.path / "run";
    REQUIRE(run(cmd_train, quick_train(data, out, "gru")).code == kExitOk);
    return out;
  }();
  return path;
}

}  // namespace

TEST_CASE("preprocess writes text, tokens and label") {
  TempDir dir;
  write_text(dir.path / "in.csv", "text,label\n\"আমি ওর হাতগুলি ভেঙে দিয়েছিলাম 😡\",Hate Speech\n"
                                  "খুব ভালো খেলা,Political Comment\n");
  PreprocessOptions o{dir.path / "in.csv", dir.path / "out.csv", {}};
  const Result r = run(cmd_preprocess, o);
  REQUIRE(r.code == kExitOk);
  const std::string csv = read_text(dir.path / "out.csv");
  CHECK(count_lines(csv) == 3);
  CHECK(csv.rfind("text,tokens,label\n", 0) == 0);
  CHECK(csv.find("হাত ভেঙে দেই ঘৃণা") != std::string::npos);
  CHECK(r.out.find("preprocessed 2 rows; 0 rows empty") != std::string::npos);
  CHECK(fs::exists(dir.path / "out.manifest.json"));
  const auto manifest = nlohmann::json::parse(read_text(dir.path / "out.manifest.json"));
  CHECK(manifest["command"] == "preprocess");
  CHECK(manifest["inputs"].size() == 4);  // the corpus and three resource files
  CHECK(manifest["outputs"].size() == 1);
}

TEST_CASE("preprocess keeps rows that end up empty and counts them") {
  TempDir dir;
  write_text(dir.path / "in.csv", "text,label\n!!! ???,Religious Comment\nখুব ভালো খেলা,Political Comment\n");
  const Result r = run(cmd_preprocess, PreprocessOptions{dir.path / "in.csv", dir.path / "o.csv", {}});
  REQUIRE(r.code == kExitOk);
  const std::string csv = read_text(dir.path / "o.csv");
  CHECK(count_lines(csv) == 3);
  CHECK(csv.find("!!! ???,,Religious Comment\n") != std::string::npos);
  CHECK(r.out.find("1 rows empty after preprocessing") != std::string::npos);
}

TEST_CASE("preprocess input errors exit 2") {
  TempDir dir;
  const fs::path missing = dir.path / "does_not_exist.csv";
  Result r = run(cmd_preprocess, PreprocessOptions{missing, dir.path / "o.csv", {}});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find(missing.string()) != std::string::npos);

  write_text(dir.path / "bad.csv", "text,label\nএক,Political Comment\nদুই,Nonsense\n");
  r = run(cmd_preprocess, PreprocessOptions{dir.path / "bad.csv", dir.path / "o.csv", {}});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "o.csv"));
}

TEST_CASE("train writes every artifact for each architecture") {
  TempDir dir;
  const fs::path data = write_synthetic(dir.path, 10);
  for (const char* arch : {"lstm", "gru", "attention"}) {
    CAPTURE(arch);
    const fs::path out = dir.path / arch;
    const Result r = run(cmd_train, quick_train(data, out, arch));
    REQUIRE(r.code == kExitOk);
    for (const char* f : {"model.bin", "vocab.tsv", "history.csv", "report.txt", "report.json",
                          "manifest.json", "test.csv", "pipeline/pipeline.json"}) {
      CHECK_MESSAGE(fs::exists(out / f), f);
    }
    const EvalReport report =
        EvalReport::from_json(nlohmann::json::parse(read_text(out / "report.json")));
    CHECK(report.architecture == arch);
    CHECK(report.test_samples == 14);
    CHECK(report.train_samples + report.validation_samples == 56);
    CHECK(history_from_csv(read_text(out / "history.csv")).size() == report.epochs_run);
    const auto manifest = nlohmann::json::parse(read_text(out / "manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["inputs"].contains(data.string()));
  }
}

TEST_CASE("train is deterministic for a fixed seed") {
  TempDir dir;
  const fs::path data = write_synthetic(dir.path, 10);
  REQUIRE(run(cmd_train, quick_train(data, dir.path / "a", "attention")).code == kExitOk);
  REQUIRE(run(cmd_train, quick_train(data, dir.path / "b", "attention")).code == kExitOk);
  CHECK(read_text(dir.path / "a/history.csv") == read_text(dir.path / "b/history.csv"));
  CHECK(read_text(dir.path / "a/model.bin") == read_text(dir.path / "b/model.bin"));
}

TEST_CASE("train reads a config file and flags override it") {
  TempDir dir;
  const fs::path data = write_synthetic(dir.path, 10);
  write_text(dir.path / "config.json", R"({"epochs": 2, "patience": 9, "rnn_hidden": 8})");
  TrainOptions o = quick_train(data, dir.path / "run", "lstm");
  o.epochs.reset();
  o.patience = 1;
  o.config = dir.path / "config.json";
  REQUIRE(run(cmd_train, o).code == kExitOk);
  const auto manifest = nlohmann::json::parse(read_text(dir.path / "run/manifest.json"));
  CHECK(manifest["config"]["train"]["max_epochs"] == 2);
  CHECK(manifest["config"]["train"]["patience"] == 1);
  CHECK(manifest["config"]["model"]["rnn_hidden"] == 8);
}

TEST_CASE("train rejects an unknown architecture") {
  TempDir dir;
  const fs::path data = write_synthetic(dir.path, 3);
  const Result r = run(cmd_train, quick_train(data, dir.path / "run", "cnn"));
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("cnn") != std::string::npos);
  for (const char* valid : {"lstm", "gru", "attention"}) {
    CHECK(r.err.find(valid) != std::string::npos);
  }
  CHECK_FALSE(fs::exists(dir.path / "run/model.bin"));
}

TEST_CASE("train reports a diverged loss with exit 3") {
  TempDir dir;
  const fs::path data = write_synthetic(dir.path, 4);
  write_text(dir.path / "config.json", R"({"learning_rate": 1e300})");
  TrainOptions o = quick_train(data, dir.path / "run", "lstm");
  o.config = dir.path / "config.json";
  o.epochs = 50;
  const Result r = run(cmd_train, o);
  CHECK(r.code == kExitNumeric);
  CHECK(r.err.find("DivergedLoss") != std::string::npos);
  CHECK(r.err.find("epoch") != std::string::npos);
}

TEST_CASE("predict prints one line per input") {
  const fs::path& model_dir = trained_run();
  PredictOptions o;
  o.model_dir = model_dir;
  o.text = "খুব ভালো খেলা";
  Result r = run(cmd_predict, o);
  REQUIRE(r.code == kExitOk);
  const std::regex line(
      R"(^[A-Za-z ]+(\t[01]\.\d{6}){7}\n$)");
  CHECK(std::regex_match(r.out, line));

  o.text.reset();
  o.data = model_dir / "test.csv";
  r = run(cmd_predict, o);
  REQUIRE(r.code == kExitOk);
  const LabeledCorpus test = load_corpus(model_dir / "test.csv");
  CHECK(count_lines(r.out) == test.size());

  // Order is preserved: each line matches predicting that row alone.
  std::istringstream lines(r.out);
  std::string got;
  for (const Sample& s : test.samples) {
    std::getline(lines, got);
    PredictOptions single;
    single.model_dir = model_dir;
    single.text = s.text;
    CHECK(run(cmd_predict, single).out == got + "\n");
  }

  o.format = "json-lines";
  r = run(cmd_predict, o);
  REQUIRE(r.code == kExitOk);
  std::istringstream json_lines(r.out);
  std::size_t n = 0;
  for (std::string l; std::getline(json_lines, l); ++n) {
    const auto j = nlohmann::json::parse(l);
    CHECK(j["distribution"].size() == 7);
    CHECK(j.contains("label"));
    CHECK(j.contains("empty_after_preprocessing"));
  }
  CHECK(n == test.size());
}

TEST_CASE("predict argument errors") {
  const fs::path& model_dir = trained_run();
  PredictOptions o;
  o.model_dir = model_dir;
  CHECK(run(cmd_predict, o).code == kExitInput);
  o.text = "x";
  o.format = "xml";
  CHECK(run(cmd_predict, o).code == kExitInput);
  o.format = "text";
  o.model_dir = model_dir / "missing";
  const Result r = run(cmd_predict, o);
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("missing") != std::string::npos);
}

TEST_CASE("predict rejects tampered artifacts") {
  TempDir dir;
  fs::copy(trained_run(), dir.path / "run", fs::copy_options::recursive);
  PredictOptions o;
  o.model_dir = dir.path / "run";
  o.text = "খুব ভালো খেলা";

  SUBCASE("model bytes") {
    std::string bytes = read_text(dir.path / "run/model.bin");
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 1);
    write_text(dir.path / "run/model.bin", bytes);
    const Result r = run(cmd_predict, o);
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("ChecksumMismatch") != std::string::npos);
  }
  SUBCASE("vocabulary") {
    const Vocabulary other = Vocabulary::fit(std::vector<TokenSequence>{{"খেলা", "ভালো"}});
    write_text(dir.path / "run/vocab.tsv", other.to_tsv());
    const Result r = run(cmd_predict, o);
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("VocabHashMismatch") != std::string::npos);
  }
  SUBCASE("pipeline") {
    std::ofstream(dir.path / "run/pipeline/stopwords.txt", std::ios::app) << "খেলা\n";
    const Result r = run(cmd_predict, o);
    CHECK(r.code == kExitInput);
    CHECK(r.err.find("PipelineHashMismatch") != std::string::npos);
  }
}

TEST_CASE("evaluate scores a labeled file") {
  TempDir dir;
  const fs::path& model_dir = trained_run();
  EvaluateOptions o{model_dir, model_dir / "test.csv", dir.path / "eval.json"};
  const Result r = run(cmd_evaluate, o);
  REQUIRE(r.code == kExitOk);
  const EvalReport rep =
      EvalReport::from_json(nlohmann::json::parse(read_text(dir.path / "eval.json")));
  const EvalReport trained =
      EvalReport::from_json(nlohmann::json::parse(read_text(model_dir / "report.json")));
  CHECK(rep.metrics.accuracy == trained.metrics.accuracy);
  CHECK(rep.metrics.confusion == trained.metrics.confusion);
  CHECK(fs::exists(dir.path / "eval.manifest.json"));
}

namespace {

fs::path fake_run(const fs::path& root, const std::string& name, const std::string& arch,
                  std::size_t epochs) {
  const fs::path dir = root / name;
  fs::create_directories(dir);
  const std::vector<std::size_t> gold{0, 1, 2, 3, 4, 5, 6, 0}, pred{0, 1, 2, 3, 4, 5, 6, 1};
  EvalReport r;
  r.architecture = arch;
  r.metrics = compute_metrics(gold, pred, kNumClasses);
  r.train_seconds = 1.5;
  r.peak_memory_mb = 40.0;
  write_text(dir / "report.json", r.to_json().dump(2));
  History h;
  for (std::size_t e = 1; e <= epochs; ++e) {
    const double t = static_cast<double>(e) / static_cast<double>(epochs);
    h.push_back({e, 1.0 - t / 2, t, 1.1 - t / 2, 0.9 * t});
  }
  write_text(dir / "history.csv", history_to_csv(h));
  return dir;
}

std::size_t table_rows(const std::string& out) {
  // Rows of the comparison table end before the first blank line.
  return count_lines(out.substr(0, out.find("\n\n") + 1)) - 1;
}

}  // namespace

TEST_CASE("report over one and three runs") {
  TempDir dir;
  const fs::path a = fake_run(dir.path, "run_lstm", "lstm", 10);
  const fs::path b = fake_run(dir.path, "run_gru", "gru", 10);
  const fs::path c = fake_run(dir.path, "run_att", "attention", 10);

  Result r = run(cmd_report, ReportOptions{{a}, std::nullopt});
  REQUIRE(r.code == kExitOk);
  CHECK(table_rows(r.out) == 1);

  r = run(cmd_report, ReportOptions{{a, b, c}, dir.path / "plots"});
  REQUIRE(r.code == kExitOk);
  CHECK(table_rows(r.out) == 3);
  const std::string header = r.out.substr(0, r.out.find('\n'));
  for (const char* col : {"Architecture", "Memory usage (MB)", "Time for training (s)",
                          "Accuracy (%)"}) {
    CHECK(header.find(col) != std::string::npos);
  }
  CHECK(r.out.find("87.50") != std::string::npos);
  for (const char* f : {"comparison.txt", "f1.txt", "manifest.json", "run_lstm_accuracy.svg",
                        "run_gru_accuracy.svg", "run_att_accuracy.svg"}) {
    CHECK_MESSAGE(fs::exists(dir.path / "plots" / f), f);
  }
  // F1 table: header, 7 classes, macro row.
  const std::string f1 = read_text(dir.path / "plots/f1.txt");
  CHECK(count_lines(f1) == 9);
}

TEST_CASE("report svg has two ten-point series") {
  TempDir dir;
  const fs::path a = fake_run(dir.path, "run", "attention", 10);
  REQUIRE(run(cmd_report, ReportOptions{{a}, dir.path / "plots"}).code == kExitOk);
  const std::string svg = read_text(dir.path / "plots/run_accuracy.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  const std::regex polyline(R"re(<polyline id="(\w+)"[^>]*points="([^"]*)")re");
  std::vector<std::string> ids;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), polyline);
       it != std::sregex_iterator(); ++it) {
    ids.push_back((*it)[1]);
    std::istringstream pts((*it)[2].str());
    std::size_t n = 0;
    for (std::string p; pts >> p; ++n) {
      CHECK(p.find(',') != std::string::npos);
    }
    CHECK(n == 10);
  }
  CHECK(ids == std::vector<std::string>{"train", "validation"});
}

TEST_CASE("report needs a report in every run directory") {
  TempDir dir;
  const fs::path a = fake_run(dir.path, "ok", "gru", 3);
  fs::create_directories(dir.path / "empty");
  const Result r = run(cmd_report, ReportOptions{{a, dir.path / "empty"}, std::nullopt});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("report.json") != std::string::npos);
}

TEST_CASE("relative outputs go under the output root") {
  TempDir dir;
  write_text(dir.path / "in.csv", "text,label\nখুব ভালো খেলা,Political Comment\n");
  ::setenv(kOutputRootEnv, (dir.path / "root").string().c_str(), 1);
  fs::create_directories(dir.path / "root");
  const Result r = run(cmd_preprocess, PreprocessOptions{dir.path / "in.csv", "rel.csv", {}});
  ::unsetenv(kOutputRootEnv);
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir.path / "root/rel.csv"));
}

TEST_CASE("the executable maps errors to exit codes") {
  TempDir dir;
  auto status = [&](const std::string& args) {
    const std::string cmd = std::string(BHS_CLI_PATH) + " " + args + " > " +
                            (dir.path / "stdout").string() + " 2> " +
                            (dir.path / "stderr").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("--help") == 0);
  CHECK(status("--version") == 0);
  CHECK(status("--no-such-flag") == 2);
  CHECK(status("train --data x.csv --arch cnn --out " + (dir.path / "r").string()) == 2);
  CHECK(read_text(dir.path / "stderr").find("attention") != std::string::npos);
  CHECK(status("preprocess --data " + (dir.path / "missing.csv").string() + " --out " +
               (dir.path / "o.csv").string()) == 2);
  CHECK(read_text(dir.path / "stderr").find("missing.csv") != std::string::npos);
  CHECK(status("predict --model " + trained_run().string() + " --text 'খুব ভালো খেলা'") == 0);
  CHECK(count_lines(read_text(dir.path / "stdout")) == 1);
}
