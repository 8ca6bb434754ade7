#include <json.hpp>

#include "bhs/error.hpp"
#include "bhs/hash.hpp"
#include "bhs/preprocess.hpp"
#include "bhs/unicode.hpp"

namespace bhs {

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

/// Calls fn(line_no, line) for each line, with CR stripped and a leading
/// BOM removed.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  if (text.starts_with("\xEF\xBB\xBF")) {
    text.remove_prefix(3);
  }
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (line.ends_with('\r')) {
      line.remove_suffix(1);
    }
    fn(line_no, line);
    if (nl == std::string_view::npos) {
      break;
    }
    text.remove_prefix(nl + 1);
  }
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what) {
  throw Error(Errc::kMalformedRow, "line " + std::to_string(line_no) + ": " + what);
}

std::string category_name(StemCategory c) {
  return c == StemCategory::kVerbal ? "verbal" : "nominal";
}

}  // namespace

StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet words;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    std::string_view w = unicode::trim(line);
    if (w.empty() || w.starts_with('#')) {
      return;
    }
    if (!unicode::is_valid_utf8(w) || unicode::split_whitespace(w).size() != 1) {
      bad_line(line_no, "stopword must be a single whitespace-free word");
    }
    words.insert(unicode::normalize_nfc(w));
  });
  return words;
}

std::string format_stopwords(const StopwordSet& words) {
  std::string out;
  for (const std::string& w : words) {
    out += w;
    out += '\n';
  }
  return out;
}

StemRuleTable parse_stem_rules(std::string_view text) {
  std::vector<StemRule> rules;
  std::map<std::string, std::string> exceptions;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (unicode::trim(line).empty() || line.starts_with('#')) {
      return;
    }
    std::vector<std::string> f = split_tabs(line);
    const std::string& category = f[0];
    if (category == "exception") {
      if (f.size() != 3 || f[1].empty() || f[2].empty()) {
        bad_line(line_no, "exception rows need: exception, surface form, root");
      }
      exceptions[unicode::normalize_nfc(f[1])] = unicode::normalize_nfc(f[2]);
      return;
    }
    if (category != "verbal" && category != "nominal") {
      bad_line(line_no, "unknown rule category \"" + category + "\"");
    }
    if (f.size() != 4 || f[1].empty()) {
      bad_line(line_no, "rule rows need: category, suffix, replacement, min_stem_length");
    }
    StemRule rule;
    rule.category = category == "verbal" ? StemCategory::kVerbal : StemCategory::kNominal;
    rule.suffix = unicode::normalize_nfc(f[1]);
    rule.replacement = unicode::normalize_nfc(f[2]);
    try {
      rule.min_stem_length = std::stoul(f[3]);
    } catch (const std::exception&) {
      bad_line(line_no, "min_stem_length is not an integer");
    }
    rules.push_back(std::move(rule));
  });
  return StemRuleTable(std::move(rules), std::move(exceptions));
}

std::string format_stem_rules(const StemRuleTable& table) {
  std::string out;
  for (const StemRule& r : table.rules()) {
    out += category_name(r.category) + "\t" + r.suffix + "\t" + r.replacement + "\t" +
           std::to_string(r.min_stem_length) + "\n";
  }
  for (const auto& [surface, root] : table.exceptions()) {
    out += "exception\t" + surface + "\t" + root + "\n";
  }
  return out;
}

EmotDictionary parse_emot_dictionary(std::string_view text) {
  EmotDictionary dict;
  bool header_seen = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) {
      return;
    }
    std::vector<std::string> f = split_tabs(line);
    if (!header_seen) {
      header_seen = true;
      if (f.size() >= 2 && f[0] == "key" && f[1] == "bangla_word") {
        return;
      }
    }
    if (f.size() != 3) {
      bad_line(line_no, "emot rows need: key, bangla_word, english_gloss");
    }
    try {
      dict.add(f[0], f[1], f[2]);
    } catch (const Error& e) {
      bad_line(line_no, e.what());
    }
  });
  return dict;
}

std::string format_emot_dictionary(const EmotDictionary& dict) {
  std::string out = "key\tbangla_word\tenglish_gloss\n";
  for (const auto& [key, entry] : dict.entries()) {
    out += key + "\t" + entry.word + "\t" + entry.gloss + "\n";
  }
  return out;
}

ResourcePaths default_resource_paths() {
  const std::filesystem::path dir = BHS_DATA_DIR;
  return {dir / "stopwords_bn.txt", dir / "stem_rules_bn.tsv", dir / "emot_bn.tsv"};
}

TokenPipelineConfig load_pipeline_config(const ResourcePaths& paths) {
  TokenPipelineConfig config;
  config.stopwords = parse_stopwords(read_file(paths.stopwords));
  config.stem_rules = parse_stem_rules(read_file(paths.stem_rules));
  config.emots = parse_emot_dictionary(read_file(paths.emot_dict));
  if (!config.emots.has_kind(EmotKind::kEmoji) || !config.emots.has_kind(EmotKind::kEmoticon)) {
    throw Error(Errc::kInvalidArgument,
                paths.emot_dict.string() + ": dictionary needs both emoji and emoticon keys");
  }
  return config;
}

void save_pipeline(const TokenPipelineConfig& config, const std::filesystem::path& dir) {
  write_file(dir / "stopwords.txt", format_stopwords(config.stopwords));
  write_file(dir / "stem_rules.tsv", format_stem_rules(config.stem_rules));
  write_file(dir / "emot.tsv", format_emot_dictionary(config.emots));
  std::string prune;
  for (const std::string& t : config.prune) {
    prune += t;
    prune += '\n';
  }
  write_file(dir / "prune.txt", prune);
  nlohmann::json meta = {
      {"format_version", 1},
      {"min_count", config.min_count},
      {"unknown_emoji",
       config.unknown_emoji == UnknownEmojiPolicy::kDrop ? "drop" : "placeholder"},
      {"fingerprint", config.fingerprint()},
  };
  write_file(dir / "pipeline.json", meta.dump(2) + "\n");
}

TokenPipelineConfig load_pipeline(const std::filesystem::path& dir) {
  TokenPipelineConfig config;
  config.stopwords = parse_stopwords(read_file(dir / "stopwords.txt"));
  config.stem_rules = parse_stem_rules(read_file(dir / "stem_rules.tsv"));
  config.emots = parse_emot_dictionary(read_file(dir / "emot.tsv"));
  for_each_line(read_file(dir / "prune.txt"), [&](std::size_t, std::string_view line) {
    if (!line.empty()) {
      config.prune.emplace(line);
    }
  });
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "pipeline.json"));
    config.min_count = meta.at("min_count").get<std::size_t>();
    config.unknown_emoji = meta.at("unknown_emoji").get<std::string>() == "placeholder"
                               ? UnknownEmojiPolicy::kPlaceholder
                               : UnknownEmojiPolicy::kDrop;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kMalformedRow, (dir / "pipeline.json").string() + ": " + e.what());
  }
  if (meta.contains("fingerprint") &&
      meta["fingerprint"].get<std::string>() != config.fingerprint()) {
    throw Error(Errc::kPipelineHashMismatch,
                dir.string() + ": resource files do not match pipeline.json");
  }
  return config;
}

}  // namespace bhs
