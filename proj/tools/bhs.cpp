#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bhs/cli/commands.hpp"

namespace {

void add_resource_flags(CLI::App* cmd, bhs::cli::ResourceOptions& r) {
  cmd->add_option("--stopwords", r.stopwords, "Stopword list (one word per line)");
  cmd->add_option("--stem-rules", r.stem_rules, "Stemmer rule table (TSV)");
  cmd->add_option("--emot-dict", r.emot_dict, "Emoji/emoticon dictionary (TSV)");
  cmd->add_option("--unknown-emoji", r.unknown_emoji, "Emoji missing from the dictionary")
      ->check(CLI::IsMember({"drop", "placeholder"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bangla hate-speech classifier: preprocessing, training, evaluation"};
  app.set_version_flag("--version", std::string(BHS_VERSION));
  app.require_subcommand(1);

  bhs::cli::PreprocessOptions pre;
  auto* c_pre = app.add_subcommand("preprocess", "Run the token pipeline over a labeled CSV");
  c_pre->add_option("--data,input", pre.input, "Input CSV (text,label)")->required();
  c_pre->add_option("--out,output", pre.output, "Output CSV (text,tokens,label)")->required();
  add_resource_flags(c_pre, pre.resources);

  bhs::cli::FitFeaturesOptions feat;
  auto* c_feat = app.add_subcommand("fit-features", "Fit vocabulary and TF-IDF vectors");
  c_feat->add_option("--data", feat.data, "Labeled CSV, raw or preprocessed")->required();
  c_feat->add_option("--out", feat.out, "Output directory")->required();
  c_feat->add_option("--min-count", feat.min_count, "Prune token types rarer than this")
      ->check(CLI::PositiveNumber);
  c_feat->add_option("--max-terms", feat.max_terms, "Keep only the most frequent terms");
  add_resource_flags(c_feat, feat.resources);

  bhs::cli::TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Split, train and evaluate one architecture");
  c_train->add_option("--data", train.data, "Labeled CSV, raw or preprocessed")->required();
  c_train->add_option("--arch", train.arch, "lstm, gru or attention");
  c_train->add_option("--out", train.out, "Run directory")->required();
  c_train->add_option("--config", train.config, "JSON config; flags take precedence");
  c_train->add_option("--seed", train.seed, "Seed for the split, init, shuffling and dropout");
  c_train->add_option("--epochs", train.epochs, "Maximum number of epochs");
  c_train->add_option("--batch-size", train.batch_size, "Minibatch size");
  c_train->add_option("--patience", train.patience, "Early-stopping patience (epochs)");
  c_train->add_option("--max-len", train.max_len, "Sequence length (default: 95th percentile)");
  c_train->add_option("--min-count", train.min_count, "Prune token types rarer than this");
  add_resource_flags(c_train, train.resources);

  bhs::cli::EvaluateOptions eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score a trained run on a labeled CSV");
  c_eval->add_option("--model,model-dir", eval.model_dir, "Run directory")->required();
  c_eval->add_option("--data", eval.data, "Labeled CSV")->required();
  c_eval->add_option("--out", eval.out, "Write the report as JSON here");

  bhs::cli::PredictOptions pred;
  auto* c_pred = app.add_subcommand("predict", "Classify a text or every row of a CSV");
  c_pred->add_option("--model,model-dir", pred.model_dir, "Run directory")->required();
  auto* o_text = c_pred->add_option("--text", pred.text, "A single comment");
  auto* o_data = c_pred->add_option("--data", pred.data, "CSV with a text column");
  o_text->excludes(o_data);
  c_pred->add_option("--format", pred.format, "text or json-lines");

  bhs::cli::ReportOptions rep;
  auto* c_rep = app.add_subcommand("report", "Compare run directories");
  c_rep->add_option("runs", rep.run_dirs, "Run directories")->required();
  c_rep->add_option("--out", rep.out, "Write tables and accuracy-curve SVGs here");

  bhs::cli::ReportOptions plots;
  auto* c_plots = app.add_subcommand("export-plots", "Write accuracy-curve SVGs for runs");
  c_plots->add_option("runs", plots.run_dirs, "Run directories")->required();
  c_plots->add_option("--out", plots.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bhs::cli::kExitInput;
  }

  if (c_pre->parsed()) {
    return bhs::cli::cmd_preprocess(pre, std::cout, std::cerr);
  }
  if (c_feat->parsed()) {
    return bhs::cli::cmd_fit_features(feat, std::cout, std::cerr);
  }
  if (c_train->parsed()) {
    return bhs::cli::cmd_train(train, std::cout, std::cerr);
  }
  if (c_eval->parsed()) {
    return bhs::cli::cmd_evaluate(eval, std::cout, std::cerr);
  }
  if (c_pred->parsed()) {
    return bhs::cli::cmd_predict(pred, std::cout, std::cerr);
  }
  if (c_rep->parsed()) {
    return bhs::cli::cmd_report(rep, std::cout, std::cerr);
  }
  std::ostream null(nullptr);
  return bhs::cli::cmd_report(plots, null, std::cerr);
}
