#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "bhs/error.hpp"
#include "bhs/hash.hpp"
#include "bhs/preprocess.hpp"
#include "bhs/unicode.hpp"
#include "synthetic.hpp"

using namespace bhs;
using bhs::testing::default_pipeline;

namespace {

using Tokens = TokenSequence;

bool is_subsequence(const Tokens& sub, const Tokens& full) {
  auto it = full.begin();
  for (const std::string& t : sub) {
    it = std::find(it, full.end(), t);
    if (it == full.end()) {
      return false;
    }
    ++it;
  }
  return true;
}

// Pieces drawn to build random comments: Bangla words (some stopwords, some
// inflected), punctuation, emoji, emoticons, Latin and whitespace.
const std::vector<std::string>& pieces() {
  static const std::vector<std::string> p = {
      "আমি", "ওর", "হাতগুলি", "ভেঙে", "দিয়েছিলাম", "ছেলেরা", "বইটা", "কথাগুলো",
      "খারাপ", "মানুষ", "দেশের", "এবং", "কিন্তু", "তুমি", "করেছিলাম", "যাচ্ছে",
      "😡", "😂😂", "👍🏽", "❤️", "🤬", ":-D", ":)", ":(", "!", "?", "।", ",", "...",
      "-", "\"", "(", ")", "abc", "Hi", "123", "১২৩", " ", "  ", "\t", "\n", "ক", "খ",
      "🇧🇩", "‍", "বাংলা😡", ":-D:-D"};
  return p;
}

std::string random_text(std::mt19937_64& rng) {
  const std::size_t n = rng() % 12;
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s += pieces()[rng() % pieces().size()];
    if (rng() % 3 != 0) {
      s += ' ';
    }
  }
  return s;
}

}  // namespace

TEST_CASE("golden: tokenization example") {
  CHECK(tokenize("আমি ওর হাতগুলি ভেঙে দিয়েছিলাম") ==
        Tokens{"আমি", "ওর", "হাতগুলি", "ভেঙে", "দিয়েছিলাম"});
}

TEST_CASE("golden: stemmer examples") {
  const StemRuleTable& rules = default_pipeline().stem_rules;
  CHECK(stem("হাতগুলি", rules) == "হাত");
  CHECK(stem("দিয়েছিলাম", rules) == "দেই");
  CHECK(stem("হাত", rules) == "হাত");
}

TEST_CASE("golden: stopword removal example") {
  const StopwordSet& sw = default_pipeline().stopwords;
  REQUIRE(sw.contains("আমি"));
  REQUIRE(sw.contains("ওর"));
  CHECK(remove_stopwords({"আমি", "ওর", "হাত", "ভেঙে", "দেই"}, sw) ==
        Tokens{"হাত", "ভেঙে", "দেই"});
}

TEST_CASE("golden: emot substitution example") {
  CHECK(substitute_emots({"হাত", "ভেঙে", "দেই", "😡"}, default_pipeline().emots) ==
        Tokens{"হাত", "ভেঙে", "দেই", "ঘৃণা"});
}

TEST_CASE("golden: chained pipeline") {
  CHECK(run_pipeline("আমি ওর হাতগুলি ভেঙে দিয়েছিলাম 😡", default_pipeline()) ==
        Tokens{"হাত", "ভেঙে", "দেই", "ঘৃণা"});
}

TEST_CASE("clean") {
  CHECK(clean("আমি!") == "আমি");
  CHECK(clean("") == "");
  CHECK(clean("ক,খ।গ?") == "ক খ গ");
  CHECK(clean("  ক \t\n খ  ") == "ক খ");
  CHECK(clean("ক;খ-গ_ঘ") == "ক খ গ ঘ");
  CHECK(clean("রাগ😡") == "রাগ 😡");
  CHECK(clean("বাহ :-D!", &default_pipeline().emots) == "বাহ :-D");
  CHECK(clean("বাহ :-D!") == "বাহ D");
  // U+09DC is a composition exclusion: NFC keeps it decomposed.
  CHECK(clean("\u09DC") == "\u09A1\u09BC");
  CHECK(clean("\u09A1\u09BC") == "\u09A1\u09BC");
}

TEST_CASE("tokenize") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("।?!").empty());
  CHECK(tokenize("হাসি :) ঠিক", &default_pipeline().emots) == Tokens{"হাসি", ":)", "ঠিক"});
}

TEST_CASE("stopwords and emots edge cases") {
  const auto& cfg = default_pipeline();
  CHECK(remove_stopwords({}, cfg.stopwords).empty());
  CHECK(remove_stopwords({"আমি", "ওর", "এবং"}, cfg.stopwords).empty());
  CHECK(substitute_emots({}, cfg.emots).empty());
  CHECK(substitute_emots({":-D"}, cfg.emots) == Tokens{"হাসি"});
  CHECK(substitute_emots({"😡😡"}, cfg.emots) == Tokens{"ঘৃণা", "ঘৃণা"});
  CHECK(substitute_emots({"শব্দ"}, cfg.emots) == Tokens{"শব্দ"});
  // Variation selectors and skin tones fold onto the base key.
  CHECK(substitute_emots({"👍🏽"}, cfg.emots) == substitute_emots({"👍"}, cfg.emots));
}

TEST_CASE("unknown emoji policy") {
  const auto& cfg = default_pipeline();
  const std::string unknown = "\U0001F9FF";  // nazar amulet
  REQUIRE(cfg.emots.find(unknown) == nullptr);
  CHECK(substitute_emots({"ক", unknown}, cfg.emots, UnknownEmojiPolicy::kDrop) == Tokens{"ক"});
  CHECK(substitute_emots({"ক", unknown}, cfg.emots, UnknownEmojiPolicy::kPlaceholder) ==
        Tokens{"ক", std::string(kUnknownEmojiToken)});
}

TEST_CASE("emot dictionary covers both kinds and every key maps") {
  const EmotDictionary& d = default_pipeline().emots;
  CHECK(d.has_kind(EmotKind::kEmoji));
  CHECK(d.has_kind(EmotKind::kEmoticon));
  for (const auto& [key, entry] : d.entries()) {
    CAPTURE(key);
    CHECK(substitute_emots({key}, d, UnknownEmojiPolicy::kPlaceholder) == Tokens{entry.word});
    CHECK(run_pipeline_unpruned(key, default_pipeline()) == Tokens{entry.word});
  }
}

TEST_CASE("emot dictionary rejects bad entries") {
  EmotDictionary d;
  d.add(":-)", "হাসি");
  CHECK_THROWS_AS(d.add(":-)", "আবার"), Error);
  CHECK_THROWS_AS(d.add(":-(", ""), Error);
  CHECK_THROWS_AS(d.add(":-P", "দুই শব্দ"), Error);
}

TEST_CASE("frequency filter thresholds") {
  const std::vector<Tokens> corpus = {{"ক", "ক", "খ"}, {"ক", "খ", "খ"}, {"ক", "খ", "গ"},
                                      {"ক", "খ"}};
  // ক: 5, খ: 5, গ: 1
  CHECK(build_frequency_filter(corpus, 5) == std::set<std::string>{"গ"});
  CHECK(build_frequency_filter(corpus, 6) == std::set<std::string>{"ক", "খ", "গ"});
  CHECK(build_frequency_filter(corpus, 1).empty());
  const std::vector<Tokens> four = {{"ঘ", "ঘ"}, {"ঘ", "ঘ"}};
  CHECK(build_frequency_filter(four, 5) == std::set<std::string>{"ঘ"});
  CHECK_THROWS_AS(build_frequency_filter(corpus, 0), Error);
  CHECK(remove_pruned({"ক", "গ", "খ", "গ"}, {"গ"}) == Tokens{"ক", "খ"});
}

TEST_CASE("pipeline edge cases") {
  CHECK(run_pipeline("", default_pipeline()).empty());
  CHECK(run_pipeline("আমি, ওর! এবং।", default_pipeline()).empty());
  TokenPipelineConfig cfg = default_pipeline();
  cfg.prune = {"হাত"};
  CHECK(run_pipeline("আমি ওর হাতগুলি ভেঙে দিয়েছিলাম 😡", cfg) == Tokens{"ভেঙে", "দেই", "ঘৃণা"});
}

TEST_CASE("property: clean is idempotent and punctuation-free") {
  std::mt19937_64 rng(11);
  const EmotDictionary& emots = default_pipeline().emots;
  for (int i = 0; i < 1000; ++i) {
    const std::string x = random_text(rng);
    CAPTURE(x);
    const std::string once = clean(x);
    CHECK(clean(once) == once);
    CHECK(clean(clean(x, &emots), &emots) == clean(x, &emots));
    for (char32_t cp : unicode::decode(once)) {
      CHECK(unicode::char_class(cp) != unicode::CharClass::kPunctuation);
    }
    CHECK(once.find("  ") == std::string::npos);
  }
}

TEST_CASE("property: stages preserve order and never emit empty tokens") {
  std::mt19937_64 rng(12);
  const auto& cfg = default_pipeline();
  for (int i = 0; i < 1000; ++i) {
    const std::string x = random_text(rng);
    CAPTURE(x);
    const Tokens t = tokenize(x, &cfg.emots);
    const Tokens s = stem_each(t, cfg.stem_rules);
    CHECK(s.size() == t.size());
    const Tokens r = remove_stopwords(s, cfg.stopwords);
    CHECK(is_subsequence(r, s));
    CHECK(remove_stopwords(r, cfg.stopwords) == r);
    for (const Tokens* seq : {&t, &s, &r}) {
      for (const std::string& tok : *seq) {
        CHECK(!tok.empty());
        CHECK(unicode::split_whitespace(tok).size() == 1);
      }
    }
  }
}

TEST_CASE("property: run_pipeline equals the manual composition") {
  std::mt19937_64 rng(13);
  TokenPipelineConfig cfg = default_pipeline();
  cfg.prune = {"মানুষ", "হাত", "হাসি"};
  for (int i = 0; i < 1000; ++i) {
    const std::string x = random_text(rng);
    CAPTURE(x);
    const Tokens manual = remove_pruned(
        substitute_emots(remove_stopwords(stem_each(tokenize(clean(x, &cfg.emots), &cfg.emots),
                                                    cfg.stem_rules),
                                          cfg.stopwords),
                         cfg.emots, cfg.unknown_emoji),
        cfg.prune);
    CHECK(run_pipeline(x, cfg) == manual);
  }
}

TEST_CASE("property: stemming with the shipped table is idempotent") {
  const StemRuleTable& rules = default_pipeline().stem_rules;
  // The table's outputs (exception roots) carry no rule suffix.
  for (const auto& [surface, root] : rules.exceptions()) {
    CAPTURE(root);
    CHECK(stem(root, rules) == root);
  }
  for (const StemRule& r : rules.rules()) {
    CHECK(r.replacement.empty());
  }
  const auto roots = bhs::testing::stable_words(default_pipeline(), 40);
  for (const std::string& root : roots) {
    for (const StemRule& r : rules.rules()) {
      const std::string once = stem(root + r.suffix, rules);
      CAPTURE(root + r.suffix);
      CHECK(stem(once, rules) == once);
    }
  }
}

TEST_CASE("stem rules: longest suffix first and minimum stem length") {
  StemRuleTable t({{StemCategory::kNominal, "টা", "", 1},
                   {StemCategory::kNominal, "গুলোটা", "", 1},
                   {StemCategory::kVerbal, "লাম", "", 3}},
                  {{"গেলাম", "যাই"}});
  CHECK(t.apply("বইগুলোটা") == "বই");
  CHECK(t.apply("বইটা") == "বই");
  CHECK(t.apply("টা") == "টা");          // would leave an empty stem
  CHECK(t.apply("করলাম") == "করলাম");    // stem of 2 clusters < 3
  CHECK(t.apply("পড়তলাম") == "পড়ত");
  CHECK(t.apply("গেলাম") == "যাই");
  CHECK(t.apply("") == "");
}

TEST_CASE("resource files round-trip through format and parse") {
  const auto& cfg = default_pipeline();
  CHECK(cfg.stopwords.size() >= 350);
  CHECK(parse_stopwords(format_stopwords(cfg.stopwords)) == cfg.stopwords);
  const StemRuleTable rules = parse_stem_rules(format_stem_rules(cfg.stem_rules));
  CHECK(format_stem_rules(rules) == format_stem_rules(cfg.stem_rules));
  const EmotDictionary emots = parse_emot_dictionary(format_emot_dictionary(cfg.emots));
  CHECK(format_emot_dictionary(emots) == format_emot_dictionary(cfg.emots));
  CHECK_THROWS_AS(parse_stem_rules("bogus\tটা\t\t1\n"), Error);
  CHECK(parse_stopwords("# comment\nক\n\nখ\n") == StopwordSet{"ক", "খ"});
}

TEST_CASE("pipeline directories round-trip and detect tampering") {
  TokenPipelineConfig cfg = default_pipeline();
  cfg.prune = {"ক", "খ"};
  cfg.min_count = 3;
  cfg.unknown_emoji = UnknownEmojiPolicy::kPlaceholder;
  const auto dir = std::filesystem::temp_directory_path() / "bhs-pipeline-test";
  std::filesystem::remove_all(dir);
  save_pipeline(cfg, dir);
  const TokenPipelineConfig back = load_pipeline(dir);
  CHECK(back.fingerprint() == cfg.fingerprint());
  CHECK(back.prune == cfg.prune);
  CHECK(back.min_count == 3);
  CHECK(back.unknown_emoji == UnknownEmojiPolicy::kPlaceholder);

  write_file(dir / "prune.txt", "ক\n");
  try {
    load_pipeline(dir);
    FAIL("expected a hash mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kPipelineHashMismatch);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("fingerprint depends on every field") {
  const TokenPipelineConfig base = default_pipeline();
  TokenPipelineConfig a = base;
  a.min_count = 4;
  TokenPipelineConfig b = base;
  b.prune.insert("ক");
  TokenPipelineConfig c = base;
  c.stopwords.erase("আমি");
  TokenPipelineConfig d = base;
  d.unknown_emoji = UnknownEmojiPolicy::kPlaceholder;
  const std::set<std::string> prints = {base.fingerprint(), a.fingerprint(), b.fingerprint(),
                                        c.fingerprint(), d.fingerprint()};
  CHECK(prints.size() == 5);
}
