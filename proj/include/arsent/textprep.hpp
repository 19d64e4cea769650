#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace arsent {

/// Ordered tokens; none empty, none containing whitespace.
using TokenStream = std::vector<std::string>;

/// Normalized stop words. Transparent comparator allows string_view lookups.
using Stoplist = std::set<std::string, std::less<>>;

/// Maps a normalized token to its stem.
using StemFn = std::function<std::string(std::string_view)>;

enum class StemmerKind { None, Light, External };

/// "none", "light" or "external"; throws ValidationError otherwise.
StemmerKind parse_stemmer(std::string_view name);
std::string_view to_string(StemmerKind kind);

struct PrepConfig {
  bool remove_stopwords = true;
  // Replaces the bundled list when set.
  std::optional<std::string> stoplist_path;
  StemmerKind stemmer = StemmerKind::None;
  // Lookup table backing StemmerKind::External: UTF-8 lines "token<TAB>stem".
  std::optional<std::string> stem_table_path;
  bool collapse_repeats = true;
};

bool is_arabic_letter(char32_t cp);

/// Keeps Arabic letters only. Diacritics (U+064B..U+0652), tatweel and other
/// in-word marks are deleted; punctuation, digits, Latin letters and any
/// other symbol act as word separators. Runs of three or more identical
/// letters collapse to one when `collapse_repeats` is set. Whitespace is
/// collapsed to single spaces and trimmed.
std::string strip_noise(std::string_view text, bool collapse_repeats = true);

/// Letter normalization: alef variants (U+0623, U+0625, U+0622) -> U+0627,
/// U+0649 -> U+064A, U+0629 -> U+0647, U+0624 -> U+0648, U+0626 -> U+064A.
/// One code point maps to one code point; idempotent.
std::string normalize(std::string_view text);

/// Splits on Unicode whitespace, dropping empty fragments.
TokenStream tokenize(std::string_view text);

TokenStream remove_stopwords(TokenStream tokens, const Stoplist& stoplist);

/// Strips at most one prefix (longest matching of وال بال كال فال ال لل و) and
/// then at most one suffix (longest matching of ها ان ات ون ين يه ه ي). A strip
/// happens only when at least three letters remain.
std::string light_stem(std::string_view token);

/// Bundled list of common Arabic function words, already normalized.
const Stoplist& default_stoplist();

/// One word per line, '#' starts a comment line; entries are normalized.
Stoplist load_stoplist(const std::string& path);

/// Reads "token<TAB>stem" lines. Tokens are normalized; unknown tokens stem
/// to themselves.
StemFn load_stem_table(const std::string& path);

/// The full cleaning pipeline: strip_noise, normalize, tokenize, stop-word
/// removal, stemming, in that order. Resources named in the config are loaded
/// once at construction. Thread-safe after construction.
class Preprocessor {
 public:
  explicit Preprocessor(PrepConfig config = {});
  Preprocessor(PrepConfig config, StemFn external_stemmer);

  TokenStream operator()(std::string_view text) const;

  const PrepConfig& config() const { return config_; }
  const Stoplist& stoplist() const { return stoplist_; }

 private:
  PrepConfig config_;
  Stoplist stoplist_;
  StemFn external_;
};

TokenStream preprocess(std::string_view text, const PrepConfig& config = {});

}  // namespace arsent
