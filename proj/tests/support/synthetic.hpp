#pragma once

// Seeded synthetic review corpora built from Arabic-letter pseudo-words.

#include <cstdint>
#include <string>
#include <vector>

#include "arsent/corpus.hpp"
#include "arsent/random.hpp"
#include "arsent/textprep.hpp"

namespace synth {

// Letters untouched by normalization.
inline const std::vector<std::string>& letters() {
  static const std::vector<std::string> l = {"ب", "ت", "ث", "ج", "ح", "خ", "د", "ذ", "ر", "ز", "س", "ش", "ص", "ض",
                                             "ط", "ظ", "ع", "غ", "ف", "ق", "ك", "ل", "م", "ن", "ه", "و", "ي"};
  return l;
}

// Distinct pseudo-word for every index (mixed-radix digits where each letter
// differs from the previous one, so no repeat runs). Alef closes the word.
inline std::string word(std::size_t index, std::size_t length = 4) {
  const auto& l = letters();
  std::string out;
  std::size_t v = index;
  std::size_t prev = l.size();
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t radix = i == 0 ? l.size() : l.size() - 1;
    std::size_t digit = v % radix;
    v /= radix;
    if (i > 0 && digit >= prev) ++digit;
    out += l[digit];
    prev = digit;
  }
  return out + "ا";
}

struct Corpus {
  arsent::LabeledCorpus corpus;
  std::vector<std::string> positive_terms;
  std::vector<std::string> negative_terms;
  std::vector<std::string> neutral_terms;

  std::vector<std::string> pure_terms() const {
    auto out = positive_terms;
    out.insert(out.end(), negative_terms.begin(), negative_terms.end());
    return out;
  }
};

struct Options {
  std::size_t docs = 200;          // split evenly between the classes
  std::size_t pure_per_class = 5;  // class-pure terms per class
  std::size_t neutral = 40;        // terms drawn regardless of class
  std::size_t pure_per_doc = 2;
  std::size_t neutral_per_doc = 6;
  bool hapax = false;              // add one document-unique word per document
  std::uint64_t seed = 1;
};

inline Corpus make(const Options& o) {
  Corpus c;
  std::size_t next = 0;
  for (std::size_t i = 0; i < o.pure_per_class; ++i) c.positive_terms.push_back(word(next++));
  for (std::size_t i = 0; i < o.pure_per_class; ++i) c.negative_terms.push_back(word(next++));
  for (std::size_t i = 0; i < o.neutral; ++i) c.neutral_terms.push_back(word(next++));

  arsent::Rng rng(o.seed);
  auto draw = [&](std::vector<std::string> pool, std::size_t k, std::vector<std::string>& out) {
    rng.shuffle(std::span<std::string>(pool));
    for (std::size_t i = 0; i < k && i < pool.size(); ++i) out.push_back(pool[i]);
  };
  std::vector<arsent::Document> docs;
  for (std::size_t d = 0; d < o.docs; ++d) {
    const bool pos = d % 2 == 0;
    std::vector<std::string> tokens;
    draw(pos ? c.positive_terms : c.negative_terms, o.pure_per_doc, tokens);
    draw(c.neutral_terms, o.neutral_per_doc, tokens);
    if (o.hapax) tokens.push_back(word(10000 + d, 5));
    rng.shuffle(std::span<std::string>(tokens));
    std::string text;
    for (const auto& t : tokens) text += (text.empty() ? "" : " ") + t;
    docs.push_back({std::to_string(d), text, pos ? arsent::Polarity::Positive : arsent::Polarity::Negative});
  }
  c.corpus = arsent::LabeledCorpus(std::move(docs));
  return c;
}

}  // namespace synth
