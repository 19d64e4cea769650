#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "arsent/error.hpp"
#include "arsent/experiment.hpp"

namespace arsent {
namespace {

constexpr std::size_t kDefaultTopK[] = {1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500};

std::vector<std::size_t> k_range(std::size_t from, std::size_t to, std::size_t step) {
  std::vector<std::size_t> out;
  for (std::size_t k = from; k <= to; k += step) out.push_back(k);
  return out;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

void check_keys(const toml::table& t, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
  for (auto&& [k, v] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k.str() == a;
    if (!ok) fail(join(prefix, k.str()), "unknown key");
  }
}

const toml::table* sub_table(const toml::table& t, std::string_view key, const std::string& path) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) fail(path, "expected a table");
  return n->as_table();
}

std::string get_string(const toml::node& n, const std::string& path) {
  if (!n.is_string()) fail(path, "expected a string");
  return n.as_string()->get();
}

bool get_bool(const toml::node& n, const std::string& path) {
  if (!n.is_boolean()) fail(path, "expected true or false");
  return n.as_boolean()->get();
}

std::int64_t get_int(const toml::node& n, const std::string& path) {
  if (!n.is_integer()) fail(path, "expected an integer");
  return n.as_integer()->get();
}

// Negative integers are rejected here; zero is left for validate() so that
// defaults and parsed values share one rule.
std::size_t get_count(const toml::node& n, const std::string& path) {
  const auto v = get_int(n, path);
  if (v < 0) fail(path, "must not be negative (got " + std::to_string(v) + ")");
  return static_cast<std::size_t>(v);
}

double get_double(const toml::node& n, const std::string& path) {
  if (n.is_integer()) return static_cast<double>(n.as_integer()->get());
  if (!n.is_floating_point()) fail(path, "expected a number");
  return n.as_floating_point()->get();
}

std::vector<std::size_t> get_count_list(const toml::node& n, const std::string& path) {
  if (n.is_integer()) return {get_count(n, path)};
  if (!n.is_array()) fail(path, "expected an integer or a list of integers");
  std::vector<std::size_t> out;
  std::size_t i = 0;
  for (const auto& e : *n.as_array()) out.push_back(get_count(e, path + "[" + std::to_string(i++) + "]"));
  return out;
}

std::vector<std::string> get_string_list(const toml::node& n, const std::string& path) {
  if (n.is_string()) return {n.as_string()->get()};
  if (!n.is_array()) fail(path, "expected a string or a list of strings");
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& e : *n.as_array()) out.push_back(get_string(e, path + "[" + std::to_string(i++) + "]"));
  return out;
}

// Wraps component parsers so their ValidationError names the config field.
template <class F>
auto parse_field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || base.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

void parse_corpus_table(const toml::table& t, ExperimentConfig& c, const std::filesystem::path& base) {
  check_keys(t, "corpus", {"path", "format", "text_field", "label_field", "id_field", "label_map", "sample_per_class"});
  if (auto n = t.get("path")) c.corpus.path = resolve(base, get_string(*n, "corpus.path"));
  if (auto n = t.get("format")) {
    const auto s = get_string(*n, "corpus.format");
    c.corpus.format = parse_field("corpus.format", [&] { return parse_format(s); });
  }
  if (auto n = t.get("text_field")) c.corpus.text_field = get_string(*n, "corpus.text_field");
  if (auto n = t.get("label_field")) c.corpus.label_field = get_string(*n, "corpus.label_field");
  if (auto n = t.get("id_field")) c.corpus.id_field = get_string(*n, "corpus.id_field");
  if (auto n = t.get("sample_per_class")) c.sample_per_class = get_count(*n, "corpus.sample_per_class");
  if (auto m = sub_table(t, "label_map", "corpus.label_map")) {
    c.corpus.label_map.clear();
    for (auto&& [k, v] : *m) {
      const std::string path = "corpus.label_map." + std::string(k.str());
      const auto s = get_string(v, path);
      const auto p = parse_polarity(s);
      if (!p) fail(path, "expected \"positive\" or \"negative\", got \"" + s + "\"");
      c.corpus.label_map.emplace(std::string(k.str()), *p);
    }
  }
}

void parse_prep_table(const toml::table& t, ExperimentConfig& c, const std::filesystem::path& base) {
  check_keys(t, "prep", {"remove_stopwords", "stoplist", "stemmer", "stem_table", "collapse_repeats"});
  if (auto n = t.get("remove_stopwords")) c.prep.remove_stopwords = get_bool(*n, "prep.remove_stopwords");
  if (auto n = t.get("stoplist")) c.prep.stoplist_path = resolve(base, get_string(*n, "prep.stoplist"));
  if (auto n = t.get("stemmer")) {
    const auto s = get_string(*n, "prep.stemmer");
    c.prep.stemmer = parse_field("prep.stemmer", [&] { return parse_stemmer(s); });
  }
  if (auto n = t.get("stem_table")) c.prep.stem_table_path = resolve(base, get_string(*n, "prep.stem_table"));
  if (auto n = t.get("collapse_repeats")) c.prep.collapse_repeats = get_bool(*n, "prep.collapse_repeats");
}

void parse_vectorize_table(const toml::table& t, ExperimentConfig& c) {
  check_keys(t, "vectorize", {"schemes", "ngrams", "scheme", "ngram", "min_df"});
  if (auto n = t.get("schemes")) {
    c.schemes.clear();
    std::size_t i = 0;
    for (const auto& s : get_string_list(*n, "vectorize.schemes")) {
      c.schemes.push_back(parse_field("vectorize.schemes[" + std::to_string(i++) + "]", [&] { return parse_scheme(s); }));
    }
  }
  if (auto n = t.get("ngrams")) {
    c.ngrams.clear();
    std::size_t i = 0;
    for (const auto& s : get_string_list(*n, "vectorize.ngrams")) {
      c.ngrams.push_back(parse_field("vectorize.ngrams[" + std::to_string(i++) + "]", [&] { return NgramSpec::parse(s); }));
    }
  }
  if (auto n = t.get("scheme")) {
    const auto s = get_string(*n, "vectorize.scheme");
    c.scheme = parse_field("vectorize.scheme", [&] { return parse_scheme(s); });
  }
  if (auto n = t.get("ngram")) {
    const auto s = get_string(*n, "vectorize.ngram");
    c.ngram = parse_field("vectorize.ngram", [&] { return NgramSpec::parse(s); });
  }
  if (auto n = t.get("min_df")) c.min_df = get_count(*n, "vectorize.min_df");
}

void parse_svm_table(const toml::table& t, ExperimentConfig& c) {
  check_keys(t, "svm", {"C", "tolerance", "max_epochs"});
  if (auto n = t.get("C")) c.svm.C = get_double(*n, "svm.C");
  if (auto n = t.get("tolerance")) c.svm.tolerance = get_double(*n, "svm.tolerance");
  if (auto n = t.get("max_epochs")) c.svm.max_epochs = get_count(*n, "svm.max_epochs");
}

const toml::array& table_array(const toml::node& n, const std::string& path) {
  if (!n.is_array_of_tables() && !(n.is_array() && n.as_array()->empty())) {
    fail(path, "expected an array of tables ([[" + path + "]])");
  }
  return *n.as_array();
}

Method method_at(const toml::node& n, const std::string& path) {
  const auto s = get_string(n, path);
  return parse_field(path, [&] { return parse_method(s); });
}

void parse_selector_grid(const toml::node& node, ExperimentConfig& c) {
  c.selector_grid.clear();
  std::size_t i = 0;
  for (const auto& e : table_array(node, "selector_grid")) {
    const std::string path = "selector_grid[" + std::to_string(i++) + "]";
    const auto& t = *e.as_table();
    check_keys(t, path, {"method", "k"});
    SelectorGridEntry entry;
    const toml::node* m = t.get("method");
    if (!m) fail(path + ".method", "missing");
    if (get_string(*m, path + ".method") != "none") entry.method = method_at(*m, path + ".method");
    if (auto k = t.get("k")) {
      entry.k = get_count_list(*k, path + ".k");
    } else if (entry.method) {
      entry.k.assign(std::begin(kDefaultTopK), std::end(kDefaultTopK));
    }
    c.selector_grid.push_back(std::move(entry));
  }
}

void parse_pipelines(const toml::node& node, ExperimentConfig& c) {
  c.pipelines.clear();
  std::size_t i = 0;
  for (const auto& e : table_array(node, "pipelines")) {
    const std::string path = "pipelines[" + std::to_string(i++) + "]";
    const auto& t = *e.as_table();
    check_keys(t, path, {"first", "first_k", "second", "second_k"});
    CombinationSpec spec;
    for (const char* key : {"first", "first_k", "second", "second_k"}) {
      if (!t.get(key)) fail(path + "." + key, "missing");
    }
    spec.first.method = method_at(*t.get("first"), path + ".first");
    spec.first.k = get_count(*t.get("first_k"), path + ".first_k");
    spec.second = method_at(*t.get("second"), path + ".second");
    spec.second_k = get_count_list(*t.get("second_k"), path + ".second_k");
    c.pipelines.push_back(std::move(spec));
  }
}

void parse_stage_table(const toml::table& t, StageSettings& s, const std::string& path) {
  check_keys(t, path, {"enabled", "k_folds", "sample_per_class"});
  if (auto n = t.get("enabled")) s.enabled = get_bool(*n, path + ".enabled");
  if (auto n = t.get("k_folds")) s.k_folds = get_count(*n, path + ".k_folds");
  if (auto n = t.get("sample_per_class")) s.sample_per_class = get_count(*n, path + ".sample_per_class");
}

// --- TOML writing ---------------------------------------------------------

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04X", c);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

std::string toml_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

template <class T, class F>
std::string toml_list(const std::vector<T>& xs, F&& render) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + render(xs[i]);
  return out + "]";
}

std::string num(std::size_t v) { return std::to_string(v); }

}  // namespace

std::size_t ExperimentConfig::folds_for(std::size_t stage) const {
  const auto& s = stages.at(stage - 1);
  if (s.k_folds) return *s.k_folds;
  if (k_folds) return *k_folds;
  return stage == 5 ? 10 : 5;
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  for (Method m : kAllMethods) c.selector_grid.push_back({m, {std::begin(kDefaultTopK), std::end(kDefaultTopK)}});
  c.pipelines.push_back({{Method::Correlation, 3500}, Method::SvmWeight, k_range(1000, 3500, 500)});
  c.pipelines.push_back({{Method::SvmWeight, 4000}, Method::Correlation, k_range(1000, 4000, 500)});
  return c;
}

ExperimentConfig parse_experiment(std::string_view toml_text, const std::string& source_name,
                                  const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source_name);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ValidationError(source_name + ":" + std::to_string(b.line) + ":" + std::to_string(b.column) + ": " +
                          std::string(e.description()));
  }

  ExperimentConfig c = default_experiment();
  check_keys(root, "", {"seed", "mode", "workers", "out", "k_folds", "corpus", "prep", "vectorize", "svm",
                        "selector_grid", "pipelines", "stage1", "stage2", "stage3", "stage4", "stage5"});
  if (auto n = root.get("seed")) {
    const auto v = get_int(*n, "seed");
    if (v < 0) fail("seed", "must not be negative");
    c.seed = static_cast<std::uint64_t>(v);
  }
  if (auto n = root.get("mode")) {
    const auto s = get_string(*n, "mode");
    c.mode = parse_field("mode", [&] { return parse_mode(s); });
  }
  if (auto n = root.get("workers")) c.workers = get_count(*n, "workers");
  if (auto n = root.get("out")) c.out = get_string(*n, "out");
  if (auto n = root.get("k_folds")) c.k_folds = get_count(*n, "k_folds");
  if (auto t = sub_table(root, "corpus", "corpus")) parse_corpus_table(*t, c, base_dir);
  if (auto t = sub_table(root, "prep", "prep")) parse_prep_table(*t, c, base_dir);
  if (auto t = sub_table(root, "vectorize", "vectorize")) parse_vectorize_table(*t, c);
  if (auto t = sub_table(root, "svm", "svm")) parse_svm_table(*t, c);
  if (auto n = root.get("selector_grid")) parse_selector_grid(*n, c);
  if (auto n = root.get("pipelines")) parse_pipelines(*n, c);
  for (std::size_t s = 0; s < kStageCount; ++s) {
    const std::string key = "stage" + std::to_string(s + 1);
    if (auto t = sub_table(root, key, key)) parse_stage_table(*t, c.stages[s], key);
  }
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path.string(), std::filesystem::absolute(path).parent_path());
}

void validate(const ExperimentConfig& c) {
  if (c.corpus.path.empty()) fail("corpus.path", "required");
  if (c.corpus.text_field.empty()) fail("corpus.text_field", "must not be empty");
  if (c.corpus.label_field.empty()) fail("corpus.label_field", "must not be empty");
  if (c.prep.stemmer == StemmerKind::External && !c.prep.stem_table_path) {
    fail("prep.stem_table", "required when prep.stemmer = \"external\"");
  }
  if (c.schemes.empty()) fail("vectorize.schemes", "at least one scheme is required");
  if (c.ngrams.empty()) fail("vectorize.ngrams", "at least one n-gram spec is required");
  if (c.min_df == 0) fail("vectorize.min_df", "must be positive");
  if (!(c.svm.C > 0.0)) fail("svm.C", "must be positive");
  if (!(c.svm.tolerance > 0.0)) fail("svm.tolerance", "must be positive");
  if (c.svm.max_epochs == 0) fail("svm.max_epochs", "must be positive");
  if (c.workers == 0) fail("workers", "must be positive");
  if (c.out.empty()) fail("out", "must not be empty");
  if (c.k_folds && *c.k_folds < 2) fail("k_folds", "must be at least 2");
  for (std::size_t s = 0; s < kStageCount; ++s) {
    const auto& st = c.stages[s];
    if (st.k_folds && *st.k_folds < 2) fail("stage" + std::to_string(s + 1) + ".k_folds", "must be at least 2");
  }

  if (c.stages[3].enabled && c.selector_grid.empty()) {
    fail("selector_grid", "at least one entry is required (use method = \"none\" for a no-selection baseline)");
  }
  for (std::size_t i = 0; i < c.selector_grid.size(); ++i) {
    const std::string path = "selector_grid[" + std::to_string(i) + "].k";
    const auto& e = c.selector_grid[i];
    if (e.method && e.k.empty()) fail(path, "at least one K is required");
    for (std::size_t j = 0; j < e.k.size(); ++j) {
      if (e.k[j] == 0) {
        fail(path, e.k.size() == 1 ? "K must be positive"
                                   : "K must be positive (entry " + std::to_string(j) + " is 0)");
      }
    }
  }
  if (c.stages[4].enabled && c.pipelines.empty()) fail("pipelines", "at least one two-stage pipeline is required");
  for (std::size_t i = 0; i < c.pipelines.size(); ++i) {
    const std::string path = "pipelines[" + std::to_string(i) + "]";
    const auto& p = c.pipelines[i];
    if (p.first.k == 0) fail(path + ".first_k", "K must be positive");
    if (p.second_k.empty()) fail(path + ".second_k", "at least one K is required");
    for (std::size_t j = 0; j < p.second_k.size(); ++j) {
      if (p.second_k[j] == 0) fail(path + ".second_k", "K must be positive (entry " + std::to_string(j) + " is 0)");
    }
  }
}

std::string to_toml(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << '\n'
    << "mode = " << toml_string(to_string(c.mode)) << '\n'
    << "workers = " << c.workers << '\n'
    << "out = " << toml_string(c.out) << '\n';
  if (c.k_folds) o << "k_folds = " << *c.k_folds << '\n';

  o << "\n[corpus]\n"
    << "path = " << toml_string(c.corpus.path) << '\n'
    << "format = " << toml_string(to_string(c.corpus.format)) << '\n'
    << "text_field = " << toml_string(c.corpus.text_field) << '\n'
    << "label_field = " << toml_string(c.corpus.label_field) << '\n'
    << "id_field = " << toml_string(c.corpus.id_field) << '\n'
    << "sample_per_class = " << c.sample_per_class << '\n';
  if (!c.corpus.label_map.empty()) {
    o << "\n[corpus.label_map]\n";
    for (const auto& [k, v] : c.corpus.label_map) o << toml_string(k) << " = " << toml_string(to_string(v)) << '\n';
  }

  o << "\n[prep]\n"
    << "remove_stopwords = " << (c.prep.remove_stopwords ? "true" : "false") << '\n';
  if (c.prep.stoplist_path) o << "stoplist = " << toml_string(*c.prep.stoplist_path) << '\n';
  o << "stemmer = " << toml_string(to_string(c.prep.stemmer)) << '\n';
  if (c.prep.stem_table_path) o << "stem_table = " << toml_string(*c.prep.stem_table_path) << '\n';
  o << "collapse_repeats = " << (c.prep.collapse_repeats ? "true" : "false") << '\n';

  o << "\n[vectorize]\n"
    << "schemes = " << toml_list(c.schemes, [](Scheme s) { return toml_string(scheme_key(s)); }) << '\n'
    << "ngrams = " << toml_list(c.ngrams, [](const NgramSpec& n) { return toml_string(n.key()); }) << '\n'
    << "scheme = " << toml_string(scheme_key(c.scheme)) << '\n'
    << "ngram = " << toml_string(c.ngram.key()) << '\n'
    << "min_df = " << c.min_df << '\n';

  o << "\n[svm]\n"
    << "C = " << toml_double(c.svm.C) << '\n'
    << "tolerance = " << toml_double(c.svm.tolerance) << '\n'
    << "max_epochs = " << c.svm.max_epochs << '\n';

  for (std::size_t s = 0; s < kStageCount; ++s) {
    const auto& st = c.stages[s];
    o << "\n[stage" << s + 1 << "]\n"
      << "enabled = " << (st.enabled ? "true" : "false") << '\n';
    if (st.k_folds) o << "k_folds = " << *st.k_folds << '\n';
    o << "sample_per_class = " << st.sample_per_class << '\n';
  }

  if (c.selector_grid.empty()) o << "\nselector_grid = []\n";
  for (const auto& e : c.selector_grid) {
    o << "\n[[selector_grid]]\n"
      << "method = " << toml_string(e.method ? method_key(*e.method) : "none") << '\n';
    if (!e.k.empty()) o << "k = " << toml_list(e.k, num) << '\n';
  }
  if (c.pipelines.empty()) o << "\npipelines = []\n";
  for (const auto& p : c.pipelines) {
    o << "\n[[pipelines]]\n"
      << "first = " << toml_string(method_key(p.first.method)) << '\n'
      << "first_k = " << p.first.k << '\n'
      << "second = " << toml_string(method_key(p.second)) << '\n'
      << "second_k = " << toml_list(p.second_k, num) << '\n';
  }
  return o.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["mode"] = to_string(c.mode);
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["k_folds"] = c.k_folds ? nlohmann::json(*c.k_folds) : nlohmann::json(nullptr);
  nlohmann::json label_map = nlohmann::json::object();
  for (const auto& [k, v] : c.corpus.label_map) label_map[k] = to_string(v);
  j["corpus"] = {{"path", c.corpus.path},
                 {"format", to_string(c.corpus.format)},
                 {"text_field", c.corpus.text_field},
                 {"label_field", c.corpus.label_field},
                 {"id_field", c.corpus.id_field},
                 {"label_map", label_map},
                 {"sample_per_class", c.sample_per_class}};
  j["prep"] = to_json(c.prep);
  nlohmann::json schemes = nlohmann::json::array();
  for (auto s : c.schemes) schemes.push_back(scheme_key(s));
  nlohmann::json ngrams = nlohmann::json::array();
  for (const auto& n : c.ngrams) ngrams.push_back(n.key());
  j["vectorize"] = {{"schemes", schemes},
                    {"ngrams", ngrams},
                    {"scheme", scheme_key(c.scheme)},
                    {"ngram", c.ngram.key()},
                    {"min_df", c.min_df}};
  j["svm"] = {{"C", c.svm.C}, {"tolerance", c.svm.tolerance}, {"max_epochs", c.svm.max_epochs}};
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& e : c.selector_grid) {
    grid.push_back({{"method", e.method ? std::string(method_key(*e.method)) : "none"}, {"k", e.k}});
  }
  j["selector_grid"] = grid;
  nlohmann::json pipes = nlohmann::json::array();
  for (const auto& p : c.pipelines) {
    pipes.push_back({{"first", method_key(p.first.method)},
                     {"first_k", p.first.k},
                     {"second", method_key(p.second)},
                     {"second_k", p.second_k}});
  }
  j["pipelines"] = pipes;
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t s = 0; s < kStageCount; ++s) {
    stages.push_back({{"stage", s + 1},
                      {"enabled", c.stages[s].enabled},
                      {"k_folds", c.folds_for(s + 1)},
                      {"sample_per_class", c.stages[s].sample_per_class}});
  }
  j["stages"] = stages;
  return j;
}

}  // namespace arsent
