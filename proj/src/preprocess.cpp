#include "bhs/preprocess.hpp"

#include <algorithm>
#include <unordered_map>

#include "bhs/error.hpp"
#include "bhs/hash.hpp"
#include "bhs/unicode.hpp"

namespace bhs {

namespace {

constexpr char32_t kKeycap = 0x20E3;

bool is_ascii_alnum(char32_t cp) {
  return (cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
         (cp >= U'A' && cp <= U'Z');
}

bool is_emoji_cluster(std::u32string_view cluster) {
  return std::any_of(cluster.begin(), cluster.end(), [](char32_t cp) {
    return cp == kKeycap || unicode::is_emoji(cp);
  });
}

enum class PieceKind { kWord, kEmoji, kBreak };

PieceKind classify_cluster(std::u32string_view cluster) {
  if (cluster.empty() || unicode::is_whitespace(cluster.front())) {
    return PieceKind::kBreak;
  }
  if (is_emoji_cluster(cluster)) {
    return PieceKind::kEmoji;
  }
  switch (unicode::char_class(cluster.front())) {
    case unicode::CharClass::kLetter:
    case unicode::CharClass::kMark:
    case unicode::CharClass::kNumber:
      return PieceKind::kWord;
    default:
      return PieceKind::kBreak;
  }
}

// Appends the cleaned form of an unprotected span to `pieces`.
void clean_span(std::string_view span, std::vector<std::string>& pieces) {
  std::string current;
  PieceKind current_kind = PieceKind::kBreak;
  auto flush = [&] {
    if (!current.empty()) {
      pieces.push_back(std::move(current));
      current.clear();
    }
    current_kind = PieceKind::kBreak;
  };
  for (const std::string& cluster : unicode::graphemes(span)) {
    PieceKind kind = classify_cluster(unicode::decode(cluster));
    if (kind == PieceKind::kBreak) {
      flush();
      continue;
    }
    if (kind != current_kind) {
      flush();
      current_kind = kind;
    }
    current += cluster;
  }
  flush();
}

bool matches_at(const std::u32string& text, std::size_t pos, const std::u32string& key) {
  return text.compare(pos, key.size(), key) == 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// StemRuleTable
// ---------------------------------------------------------------------------

StemRuleTable::StemRuleTable(std::vector<StemRule> rules,
                             std::map<std::string, std::string> exceptions)
    : rules_(std::move(rules)), exceptions_(std::move(exceptions)) {
  for (StemRule& r : rules_) {
    if (r.suffix.empty()) {
      throw Error(Errc::kInvalidArgument, "stem rule with empty suffix");
    }
    if (r.min_stem_length == 0) {
      r.min_stem_length = 1;
    }
  }
  std::stable_sort(rules_.begin(), rules_.end(), [](const StemRule& a, const StemRule& b) {
    std::size_t la = unicode::decode(a.suffix).size();
    std::size_t lb = unicode::decode(b.suffix).size();
    if (la != lb) {
      return la > lb;
    }
    return a.category == StemCategory::kVerbal && b.category == StemCategory::kNominal;
  });
}

std::string StemRuleTable::apply(std::string_view token) const {
  if (auto it = exceptions_.find(std::string(token)); it != exceptions_.end()) {
    return it->second;
  }
  for (const StemRule& rule : rules_) {
    if (token.size() <= rule.suffix.size() || !token.ends_with(rule.suffix)) {
      continue;
    }
    std::string candidate(token.substr(0, token.size() - rule.suffix.size()));
    candidate += rule.replacement;
    if (unicode::grapheme_count(candidate) >= rule.min_stem_length) {
      return candidate;
    }
  }
  return std::string(token);
}

// ---------------------------------------------------------------------------
// EmotDictionary
// ---------------------------------------------------------------------------

EmotKind classify_emot_key(std::string_view key) {
  return is_emoji_cluster(unicode::decode(key)) ? EmotKind::kEmoji : EmotKind::kEmoticon;
}

std::string fold_emoji(std::string_view key) {
  std::u32string out;
  for (char32_t cp : unicode::decode(key)) {
    if (cp == 0xFE0E || cp == 0xFE0F || (cp >= 0x1F3FB && cp <= 0x1F3FF)) {
      continue;
    }
    out.push_back(cp);
  }
  return unicode::encode(out);
}

void EmotDictionary::add(std::string key, std::string word, std::string gloss) {
  key = unicode::normalize_nfc(key);
  word = unicode::normalize_nfc(word);
  if (key.empty()) {
    throw Error(Errc::kInvalidArgument, "empty emot key");
  }
  if (word.empty() || unicode::split_whitespace(word).size() != 1 ||
      unicode::trim(word).size() != word.size()) {
    throw Error(Errc::kInvalidArgument, "emot word for \"" + key + "\" must be one token");
  }
  if (entries_.contains(key)) {
    throw Error(Errc::kInvalidArgument, "duplicate emot key \"" + key + "\"");
  }
  EmotKind kind = classify_emot_key(key);
  if (kind == EmotKind::kEmoji) {
    folded_.emplace(fold_emoji(key), word);
  } else {
    std::u32string k = unicode::decode(key);
    auto pos = std::lower_bound(emoticons_.begin(), emoticons_.end(), k,
                                [](const std::u32string& a, const std::u32string& b) {
                                  if (a.size() != b.size()) {
                                    return a.size() > b.size();
                                  }
                                  return a < b;
                                });
    emoticons_.insert(pos, std::move(k));
  }
  entries_.emplace(key, EmotEntry{key, std::move(word), std::move(gloss), kind});
}

const std::string* EmotDictionary::find(std::string_view key) const {
  if (auto it = entries_.find(std::string(key)); it != entries_.end()) {
    return &it->second.word;
  }
  if (auto it = folded_.find(fold_emoji(key)); it != folded_.end()) {
    return &it->second;
  }
  return nullptr;
}

bool EmotDictionary::has_kind(EmotKind kind) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [kind](const auto& kv) { return kv.second.kind == kind; });
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

std::string clean(std::string_view text, const EmotDictionary* emots) {
  const std::string normalized = unicode::normalize_nfc(text);
  std::vector<std::string> pieces;

  if (emots == nullptr || emots->emoticon_keys().empty()) {
    clean_span(normalized, pieces);
  } else {
    // Emoticons are made of punctuation, so they are located before any
    // character is dropped. A match may not touch an ASCII letter or digit.
    const std::u32string cps = unicode::decode(normalized);
    std::size_t span_start = 0;
    std::size_t i = 0;
    while (i < cps.size()) {
      const bool boundary_before = i == 0 || !is_ascii_alnum(cps[i - 1]);
      const std::u32string* hit = nullptr;
      if (boundary_before) {
        for (const std::u32string& key : emots->emoticon_keys()) {
          std::size_t end = i + key.size();
          if (end <= cps.size() && matches_at(cps, i, key) &&
              (end == cps.size() || !is_ascii_alnum(cps[end]))) {
            hit = &key;
            break;
          }
        }
      }
      if (hit == nullptr) {
        ++i;
        continue;
      }
      clean_span(unicode::encode(std::u32string_view(cps).substr(span_start, i - span_start)),
                 pieces);
      pieces.push_back(unicode::encode(*hit));
      i += hit->size();
      span_start = i;
    }
    clean_span(unicode::encode(std::u32string_view(cps).substr(span_start)), pieces);
  }

  std::string out;
  for (const std::string& p : pieces) {
    if (!out.empty()) {
      out.push_back(' ');
    }
    out += p;
  }
  return out;
}

TokenSequence tokenize(std::string_view text, const EmotDictionary* emots) {
  return unicode::split_whitespace(clean(text, emots));
}

std::string stem(std::string_view token, const StemRuleTable& rules) {
  return rules.apply(token);
}

TokenSequence stem_each(const TokenSequence& tokens, const StemRuleTable& rules) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    out.push_back(rules.apply(t));
  }
  return out;
}

TokenSequence remove_stopwords(const TokenSequence& tokens, const StopwordSet& stopwords) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    if (!stopwords.contains(t)) {
      out.push_back(t);
    }
  }
  return out;
}

TokenSequence substitute_emots(const TokenSequence& tokens, const EmotDictionary& dict,
                               UnknownEmojiPolicy unknown) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const std::string& token : tokens) {
    if (const std::string* word = dict.find(token)) {
      out.push_back(*word);
      continue;
    }
    std::vector<std::string> clusters = unicode::graphemes(token);
    const bool all_emoji =
        !clusters.empty() && std::all_of(clusters.begin(), clusters.end(), [](const auto& c) {
          return is_emoji_cluster(unicode::decode(c));
        });
    if (!all_emoji) {
      out.push_back(token);
      continue;
    }
    for (const std::string& cluster : clusters) {
      if (const std::string* word = dict.find(cluster)) {
        out.push_back(*word);
      } else if (unknown == UnknownEmojiPolicy::kPlaceholder) {
        out.emplace_back(kUnknownEmojiToken);
      }
    }
  }
  return out;
}

std::set<std::string> build_frequency_filter(std::span<const TokenSequence> corpus_tokens,
                                             std::size_t min_count) {
  if (min_count == 0) {
    throw Error(Errc::kInvalidArgument, "min_count must be at least 1");
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const TokenSequence& doc : corpus_tokens) {
    for (const std::string& t : doc) {
      ++counts[t];
    }
  }
  std::set<std::string> prune;
  for (const auto& [token, n] : counts) {
    if (n < min_count) {
      prune.insert(token);
    }
  }
  return prune;
}

TokenSequence remove_pruned(const TokenSequence& tokens, const std::set<std::string>& prune) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    if (!prune.contains(t)) {
      out.push_back(t);
    }
  }
  return out;
}

TokenSequence run_pipeline_unpruned(std::string_view text, const TokenPipelineConfig& config) {
  TokenSequence tokens = tokenize(text, &config.emots);
  tokens = stem_each(tokens, config.stem_rules);
  tokens = remove_stopwords(tokens, config.stopwords);
  return substitute_emots(tokens, config.emots, config.unknown_emoji);
}

TokenSequence run_pipeline(std::string_view text, const TokenPipelineConfig& config) {
  TokenSequence tokens = run_pipeline_unpruned(text, config);
  if (config.prune.empty()) {
    return tokens;
  }
  return remove_pruned(tokens, config.prune);
}

std::string TokenPipelineConfig::fingerprint() const {
  std::string canon = "bhs-pipeline/1\n[stopwords]\n";
  canon += format_stopwords(stopwords);
  canon += "[stem_rules]\n";
  canon += format_stem_rules(stem_rules);
  canon += "[emots]\n";
  canon += format_emot_dictionary(emots);
  canon += "[prune]\n";
  for (const std::string& t : prune) {
    canon += t;
    canon += '\n';
  }
  canon += "[options]\nmin_count=" + std::to_string(min_count) + "\nunknown_emoji=" +
           (unknown_emoji == UnknownEmojiPolicy::kDrop ? "drop" : "placeholder") + "\n";
  return sha256_hex(canon);
}

}  // namespace bhs
