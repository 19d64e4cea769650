#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "arsent/error.hpp"
#include "arsent/textprep.hpp"

using namespace arsent;

TEST_CASE("strip_noise") {
  CHECK(strip_noise("رائــــع!!") == "رائع");
  CHECK(strip_noise("جدااااا 123 great") == "جدا");
  CHECK(strip_noise("مُمْتاز") == "ممتاز");
  CHECK(strip_noise("جدااااا", false) == "جدااااا");
  CHECK(strip_noise("حلو،كثير") == "حلو كثير");
  CHECK(strip_noise("  \t ") == "");
  // Two identical letters are legitimate and stay.
  CHECK(strip_noise("مدّة") == "مدة");
  CHECK(strip_noise("ممتاز") == "ممتاز");
}

TEST_CASE("normalize") {
  CHECK(normalize("أحمد") == "احمد");
  CHECK(normalize("مدرسة") == "مدرسه");
  CHECK(normalize("إلى") == "الي");
  CHECK(normalize("آمن مؤمن رئيس") == "امن مومن رييس");
  for (const char* s : {"أحمد", "مدرسة", "إلى", "شيء"}) {
    CHECK(normalize(normalize(s)) == normalize(s));
    CHECK(normalize(s).size() == std::string(s).size());
  }
}

TEST_CASE("tokenize") {
  CHECK(tokenize("الخدمه ممتازه") == TokenStream{"الخدمه", "ممتازه"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("ا ب ا") == TokenStream{"ا", "ب", "ا"});
  CHECK(tokenize("ا\t\nب") == TokenStream{"ا", "ب"});
}

TEST_CASE("remove_stopwords") {
  CHECK(remove_stopwords({"في", "البيت"}, Stoplist{"في"}) == TokenStream{"البيت"});
  CHECK(remove_stopwords({"في", "البيت"}, Stoplist{}) == TokenStream{"في", "البيت"});
  CHECK(remove_stopwords({"في", "في"}, Stoplist{"في"}).empty());
  CHECK(default_stoplist().count("في") == 1);
  for (const auto& w : default_stoplist()) CHECK(normalize(w) == w);
}

TEST_CASE("light_stem") {
  CHECK(light_stem("المدرسه") == "مدرس");
  CHECK(light_stem("سيارات") == "سيار");
  CHECK(light_stem("ابن") == "ابن");
  CHECK(light_stem("والكتاب") == "كتاب");
  CHECK(light_stem("كتابها") == "كتاب");
  CHECK(light_stem("الي") == "الي");
}

TEST_CASE("preprocess") {
  PrepConfig off;
  off.remove_stopwords = false;
  CHECK(preprocess("أحب المطعم!!", off) == TokenStream{"احب", "المطعم"});

  const std::vector<std::string> inputs = {"أحب المطعم في المدينة!!", "الخدمة ممتازة جداااا 👍",
                                           "ما عجبني الأكل، سيء والأسعار غالية", ""};
  for (const auto& x : inputs) {
    CHECK(preprocess(x) == remove_stopwords(tokenize(normalize(strip_noise(x))), default_stoplist()));
    PrepConfig light;
    light.stemmer = StemmerKind::Light;
    TokenStream expected = preprocess(x);
    for (auto& t : expected) t = light_stem(t);
    CHECK(preprocess(x, light) == expected);
  }
}

TEST_CASE("stoplist and stem table files") {
  const auto dir = std::filesystem::temp_directory_path() / "arsent_textprep_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "stop.txt") << "# comment\nإلى\n\nهذا\n";
    std::ofstream(dir / "stems.tsv") << "مدارس\tدرس\nكتابة\tكتب\n";
  }
  const Stoplist s = load_stoplist((dir / "stop.txt").string());
  CHECK(s == Stoplist{"الي", "هذا"});

  const StemFn stem = load_stem_table((dir / "stems.tsv").string());
  CHECK(stem("مدارس") == "درس");
  CHECK(stem("كتابه") == "كتب");
  CHECK(stem("بيت") == "بيت");

  PrepConfig c;
  c.stoplist_path = (dir / "stop.txt").string();
  c.stemmer = StemmerKind::External;
  c.stem_table_path = (dir / "stems.tsv").string();
  CHECK(Preprocessor(c)("هذا مدارس في") == TokenStream{"درس", "في"});

  CHECK_THROWS_AS(load_stoplist((dir / "missing.txt").string()), DataError);
  CHECK_THROWS_AS(parse_stemmer("root"), ValidationError);
  std::filesystem::remove_all(dir);
}
