#include "synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace bhs::testing {

std::vector<std::string> stable_words(const TokenPipelineConfig& config, std::size_t count) {
  static const char* const kConsonants[] = {"ক", "খ", "গ", "ঘ", "চ", "জ", "ঝ", "ট", "ড",
                                            "ত", "থ", "দ", "ধ", "ন", "প", "ফ", "ব", "ভ",
                                            "ম", "য", "ল", "শ", "স", "হ"};
  static const char* const kVowelSigns[] = {"া", "ি", "ু", "ো", ""};
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const char* a : kConsonants) {
    for (const char* v : kVowelSigns) {
      for (const char* b : kConsonants) {
        for (const char* c : kConsonants) {
          if (out.size() == count) {
            return out;
          }
          const std::string w = std::string(a) + v + b + c;
          const TokenSequence t = run_pipeline_unpruned(w, config);
          if (t.size() == 1 && t[0] == w && seen.insert(w).second) {
            out.push_back(w);
          }
        }
      }
    }
  }
  return out;
}

LabeledCorpus synthetic_corpus(const SyntheticSpec& spec, const TokenPipelineConfig& config) {
  const std::size_t n_keys = kNumClasses * spec.keys_per_class;
  const std::vector<std::string> words = stable_words(config, n_keys + spec.noise_vocab);
  std::mt19937_64 rng(spec.seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  LabeledCorpus corpus{{}, "synthetic"};
  for (std::size_t i = 0; i < spec.per_class; ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      std::vector<std::string> doc;
      for (std::size_t k = 0; k < spec.keys_per_doc; ++k) {
        doc.push_back(words[c * spec.keys_per_class + pick(0, spec.keys_per_class - 1)]);
      }
      const std::size_t n_noise = pick(spec.noise_min, spec.noise_max);
      for (std::size_t k = 0; k < n_noise; ++k) {
        doc.push_back(words[n_keys + pick(0, spec.noise_vocab - 1)]);
      }
      std::shuffle(doc.begin(), doc.end(), rng);
      std::string text;
      for (const std::string& w : doc) {
        text += (text.empty() ? "" : " ") + w;
      }
      corpus.samples.push_back({text, label_from_index(static_cast<int>(c))});
    }
  }
  return corpus;
}

const TokenPipelineConfig& default_pipeline() {
  static const TokenPipelineConfig config = load_pipeline_config(default_resource_paths());
  return config;
}

}  // namespace bhs::testing
