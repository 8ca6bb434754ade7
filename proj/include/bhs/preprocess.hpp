#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bhs {

using TokenSequence = std::vector<std::string>;

// ---------------------------------------------------------------------------
// Stemmer rule table
// ---------------------------------------------------------------------------

enum class StemCategory { kVerbal, kNominal };

struct StemRule {
  StemCategory category = StemCategory::kNominal;
  std::string suffix;
  std::string replacement;          // may be empty
  std::size_t min_stem_length = 1;  // in grapheme clusters
};

/// Ordered suffix rules plus whole-word exceptions for irregular forms.
///
/// Rules are applied longest suffix first (ties: verbal before nominal, then
/// file order). A rule whose result would fall below its min_stem_length is
/// skipped and the search continues with the next rule.
class StemRuleTable {
 public:
  StemRuleTable() = default;
  StemRuleTable(std::vector<StemRule> rules, std::map<std::string, std::string> exceptions);

  const std::vector<StemRule>& rules() const { return rules_; }
  const std::map<std::string, std::string>& exceptions() const { return exceptions_; }

  std::string apply(std::string_view token) const;

 private:
  std::vector<StemRule> rules_;
  std::map<std::string, std::string> exceptions_;
};

// ---------------------------------------------------------------------------
// Emot dictionary
// ---------------------------------------------------------------------------

enum class EmotKind { kEmoji, kEmoticon };

struct EmotEntry {
  std::string key;
  std::string word;   // Bangla emotion word, single token
  std::string gloss;  // English meaning, informational
  EmotKind kind = EmotKind::kEmoji;
};

class EmotDictionary {
 public:
  /// Throws Error(kInvalidArgument) on a duplicate key or an empty /
  /// whitespace-containing word.
  void add(std::string key, std::string word, std::string gloss = {});

  /// Exact lookup, then lookup with variation selectors and skin-tone
  /// modifiers removed. Returns nullptr when absent.
  const std::string* find(std::string_view key) const;

  const std::map<std::string, EmotEntry>& entries() const { return entries_; }

  /// Emoticon keys, longest first.
  const std::vector<std::u32string>& emoticon_keys() const { return emoticons_; }

  std::size_t size() const { return entries_.size(); }
  bool has_kind(EmotKind kind) const;

 private:
  std::map<std::string, EmotEntry> entries_;
  std::map<std::string, std::string> folded_;
  std::vector<std::u32string> emoticons_;
};

/// Classifies a key: emoji if it holds any pictographic codepoint or a keycap.
EmotKind classify_emot_key(std::string_view key);

/// Removes U+FE0E/U+FE0F and skin-tone modifiers.
std::string fold_emoji(std::string_view key);

// ---------------------------------------------------------------------------
// Stopwords and pipeline configuration
// ---------------------------------------------------------------------------

using StopwordSet = std::set<std::string>;

enum class UnknownEmojiPolicy { kDrop, kPlaceholder };

/// Token substituted for emoji absent from the dictionary under kPlaceholder.
inline constexpr std::string_view kUnknownEmojiToken = "ইমোজি";

struct TokenPipelineConfig {
  StopwordSet stopwords;
  StemRuleTable stem_rules;
  EmotDictionary emots;
  std::size_t min_count = 5;
  std::set<std::string> prune;  // fitted from the training split
  UnknownEmojiPolicy unknown_emoji = UnknownEmojiPolicy::kDrop;

  /// SHA-256 over a canonical rendering of every field above.
  std::string fingerprint() const;
};

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// NFC-normalizes, replaces punctuation, non-emoji symbols and control
/// characters with spaces, separates emoji runs from adjacent letters, and
/// collapses whitespace. When `emots` is given, its emoticon keys are kept
/// verbatim as standalone pieces.
std::string clean(std::string_view text, const EmotDictionary* emots = nullptr);

/// Whitespace split of the cleaned text; punctuation never survives.
TokenSequence tokenize(std::string_view text, const EmotDictionary* emots = nullptr);

std::string stem(std::string_view token, const StemRuleTable& rules);
TokenSequence stem_each(const TokenSequence& tokens, const StemRuleTable& rules);

TokenSequence remove_stopwords(const TokenSequence& tokens, const StopwordSet& stopwords);

/// Dictionary keys become their Bangla word; an emoji-only token of k
/// emoji expands to k words; other tokens pass through.
TokenSequence substitute_emots(const TokenSequence& tokens, const EmotDictionary& dict,
                               UnknownEmojiPolicy unknown = UnknownEmojiPolicy::kDrop);

/// Token types whose total count across `corpus_tokens` is below min_count.
/// Throws Error(kInvalidArgument) if min_count is 0.
std::set<std::string> build_frequency_filter(std::span<const TokenSequence> corpus_tokens,
                                             std::size_t min_count = 5);

TokenSequence remove_pruned(const TokenSequence& tokens, const std::set<std::string>& prune);

/// clean → tokenize → stem → stopwords → emots → prune, in that order.
TokenSequence run_pipeline(std::string_view text, const TokenPipelineConfig& config);

/// The same chain without the final prune step (used to fit the prune set).
TokenSequence run_pipeline_unpruned(std::string_view text, const TokenPipelineConfig& config);

// ---------------------------------------------------------------------------
// Resource files
// ---------------------------------------------------------------------------

StopwordSet parse_stopwords(std::string_view text);
StemRuleTable parse_stem_rules(std::string_view text);
EmotDictionary parse_emot_dictionary(std::string_view text);

std::string format_stopwords(const StopwordSet& words);
std::string format_stem_rules(const StemRuleTable& table);
std::string format_emot_dictionary(const EmotDictionary& dict);

struct ResourcePaths {
  std::filesystem::path stopwords;
  std::filesystem::path stem_rules;
  std::filesystem::path emot_dict;
};

/// Paths of the resources shipped in the data directory.
ResourcePaths default_resource_paths();

/// Loads the three resource files. The emot dictionary must contain both
/// emoji and emoticon keys.
TokenPipelineConfig load_pipeline_config(const ResourcePaths& paths);

/// Writes/reads a self-contained pipeline directory: the three resources,
/// the prune list, and pipeline.json with min_count and the emoji policy.
void save_pipeline(const TokenPipelineConfig& config, const std::filesystem::path& dir);
TokenPipelineConfig load_pipeline(const std::filesystem::path& dir);

}  // namespace bhs
