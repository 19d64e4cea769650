#include "arsent/textprep.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <unordered_map>

#include "arsent/error.hpp"
#include "arsent/utf8.hpp"

namespace arsent {
namespace {

// Code points removed outright, without splitting the word they sit in.
bool is_in_word_mark(char32_t cp) {
  return (cp >= 0x0610 && cp <= 0x061A) ||  // Arabic honorific signs
         (cp >= 0x064B && cp <= 0x065F) ||  // harakat, shadda, sukun and extended marks
         cp == 0x0640 ||                    // tatweel
         cp == 0x0670 ||                    // superscript alef
         (cp >= 0x06D6 && cp <= 0x06ED) ||  // Quranic annotation marks
         (cp >= 0x0300 && cp <= 0x036F) ||  // combining diacritics
         (cp >= 0x200B && cp <= 0x200F) ||  // zero-width characters, LRM/RLM
         (cp >= 0x202A && cp <= 0x202E) || (cp >= 0x2066 && cp <= 0x2069) || cp == 0xFEFF;
}

char32_t normalize_letter(char32_t cp) {
  switch (cp) {
    case 0x0623:  // alef with hamza above
    case 0x0625:  // alef with hamza below
    case 0x0622:  // alef with madda
      return 0x0627;
    case 0x0649: return 0x064A;  // alef maksura -> ya
    case 0x0629: return 0x0647;  // taa marbuta -> ha
    case 0x0624: return 0x0648;  // hamza on waw -> waw
    case 0x0626: return 0x064A;  // hamza on ya -> ya
    default: return cp;
  }
}

const std::array<std::u32string, 7> kPrefixes = {U"وال", U"بال", U"كال", U"فال", U"ال", U"لل", U"و"};
const std::array<std::u32string, 8> kSuffixes = {U"ها", U"ان", U"ات", U"ون", U"ين", U"يه", U"ه", U"ي"};
constexpr std::size_t kMinStem = 3;

// Longest affix in `affixes` matching `word`, or nullptr.
template <class Pred>
const std::u32string* longest_match(const auto& affixes, Pred matches) {
  const std::u32string* best = nullptr;
  for (const auto& a : affixes) {
    if (matches(a) && (best == nullptr || a.size() > best->size())) best = &a;
  }
  return best;
}

}  // namespace

StemmerKind parse_stemmer(std::string_view name) {
  if (name == "none") return StemmerKind::None;
  if (name == "light") return StemmerKind::Light;
  if (name == "external") return StemmerKind::External;
  throw ValidationError("unknown stemmer '" + std::string(name) + "' (expected none, light or external)");
}

std::string_view to_string(StemmerKind kind) {
  switch (kind) {
    case StemmerKind::None: return "none";
    case StemmerKind::Light: return "light";
    case StemmerKind::External: return "external";
  }
  return "none";
}

bool is_arabic_letter(char32_t cp) {
  return (cp >= 0x0621 && cp <= 0x063A) || (cp >= 0x0641 && cp <= 0x064A) ||
         (cp >= 0x066E && cp <= 0x066F) || (cp >= 0x0671 && cp <= 0x06D3) || cp == 0x06D5 ||
         (cp >= 0x06EE && cp <= 0x06EF) || (cp >= 0x06FA && cp <= 0x06FC) || cp == 0x06FF;
}

std::string strip_noise(std::string_view text, bool collapse_repeats) {
  const std::u32string in = utf8::decode(text);

  std::u32string letters;
  letters.reserve(in.size());
  for (char32_t cp : in) {
    if (is_arabic_letter(cp)) {
      letters.push_back(cp);
    } else if (!is_in_word_mark(cp)) {
      letters.push_back(U' ');
    }
  }

  std::u32string out;
  out.reserve(letters.size());
  for (std::size_t i = 0; i < letters.size();) {
    std::size_t j = i;
    while (j < letters.size() && letters[j] == letters[i]) ++j;
    const std::size_t run = j - i;
    if (letters[i] == U' ') {
      if (!out.empty()) out.push_back(U' ');
    } else if (collapse_repeats && run >= 3) {
      out.push_back(letters[i]);
    } else {
      out.append(run, letters[i]);
    }
    i = j;
  }
  if (!out.empty() && out.back() == U' ') out.pop_back();
  return utf8::encode(out);
}

std::string normalize(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  for (char32_t& cp : cps) cp = normalize_letter(cp);
  return utf8::encode(cps);
}

TokenStream tokenize(std::string_view text) {
  TokenStream tokens;
  std::string current;
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_space(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      utf8::append(current, cp);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TokenStream remove_stopwords(TokenStream tokens, const Stoplist& stoplist) {
  if (stoplist.empty()) return tokens;
  std::erase_if(tokens, [&](const std::string& t) { return stoplist.contains(t); });
  return tokens;
}

std::string light_stem(std::string_view token) {
  std::u32string w = utf8::decode(token);

  const auto* prefix = longest_match<>(kPrefixes, [&](const std::u32string& p) {
    return w.size() > p.size() && w.starts_with(p);
  });
  if (prefix != nullptr && w.size() - prefix->size() >= kMinStem) w.erase(0, prefix->size());

  const auto* suffix = longest_match<>(kSuffixes, [&](const std::u32string& s) {
    return w.size() > s.size() && w.ends_with(s);
  });
  if (suffix != nullptr && w.size() - suffix->size() >= kMinStem) w.resize(w.size() - suffix->size());

  return utf8::encode(w);
}

Stoplist load_stoplist(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read stop-word list '" + path + "'");
  Stoplist list;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with('#')) continue;
    if (!utf8::valid(line)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": not valid UTF-8");
    }
    for (auto& tok : tokenize(normalize(line))) list.insert(std::move(tok));
  }
  return list;
}

StemFn load_stem_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read stem table '" + path + "'");
  auto table = std::make_shared<std::unordered_map<std::string, std::string>>();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with('#')) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 'token<TAB>stem'");
    }
    (*table)[normalize(line.substr(0, tab))] = normalize(line.substr(tab + 1));
  }
  return [table](std::string_view token) {
    const auto it = table->find(std::string(token));
    return it == table->end() ? std::string(token) : it->second;
  };
}

Preprocessor::Preprocessor(PrepConfig config) : config_(std::move(config)) {
  if (config_.remove_stopwords) {
    stoplist_ = config_.stoplist_path ? load_stoplist(*config_.stoplist_path) : default_stoplist();
  }
  if (config_.stemmer == StemmerKind::External) {
    if (!config_.stem_table_path) {
      throw ValidationError("external stemmer selected but no stem table configured");
    }
    external_ = load_stem_table(*config_.stem_table_path);
  }
}

Preprocessor::Preprocessor(PrepConfig config, StemFn external_stemmer)
    : Preprocessor([&] {
        // The injected stemmer takes precedence over any configured table.
        config.stem_table_path.reset();
        if (config.stemmer == StemmerKind::External) config.stemmer = StemmerKind::None;
        return config;
      }()) {
  config_.stemmer = StemmerKind::External;
  external_ = std::move(external_stemmer);
}

TokenStream Preprocessor::operator()(std::string_view text) const {
  TokenStream tokens = tokenize(normalize(strip_noise(text, config_.collapse_repeats)));
  if (config_.remove_stopwords) tokens = remove_stopwords(std::move(tokens), stoplist_);
  switch (config_.stemmer) {
    case StemmerKind::None:
      break;
    case StemmerKind::Light:
      for (auto& t : tokens) t = light_stem(t);
      break;
    case StemmerKind::External: {
      // Plug-in output is squeezed back into one whitespace-free token (or
      // dropped when empty) so stemming never adds tokens.
      TokenStream stemmed;
      stemmed.reserve(tokens.size());
      for (const auto& t : tokens) {
        std::string joined;
        for (const auto& piece : tokenize(external_(t))) joined += piece;
        if (!joined.empty()) stemmed.push_back(std::move(joined));
      }
      tokens = std::move(stemmed);
      break;
    }
  }
  return tokens;
}

TokenStream preprocess(std::string_view text, const PrepConfig& config) {
  return Preprocessor(config)(text);
}

}  // namespace arsent
