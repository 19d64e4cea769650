#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "arsent/corpus.hpp"
#include "arsent/error.hpp"
#include "arsent/evaluate.hpp"
#include "arsent/experiment.hpp"
#include "arsent/linsvm.hpp"
#include "arsent/report.hpp"
#include "arsent/selection.hpp"
#include "arsent/textprep.hpp"
#include "arsent/vectorize.hpp"

namespace py = pybind11;
using namespace arsent;

namespace {

std::vector<Polarity> to_labels(const std::vector<int>& ys) {
  std::vector<Polarity> out;
  out.reserve(ys.size());
  for (int y : ys) {
    if (y != 1 && y != -1) throw py::value_error("labels must be +1 or -1");
    out.push_back(y == 1 ? Polarity::Positive : Polarity::Negative);
  }
  return out;
}

std::vector<int> from_labels(const std::vector<Polarity>& ls) {
  std::vector<int> out;
  out.reserve(ls.size());
  for (auto p : ls) out.push_back(sign(p));
  return out;
}

std::vector<std::vector<double>> dense(const DocTermMatrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols(), 0.0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const SparseRow row = m.row(r);
    for (std::size_t i = 0; i < row.indices.size(); ++i) out[r][row.indices[i]] = row.values[i];
  }
  return out;
}

LabeledCorpus make_corpus(const std::vector<std::string>& texts, const std::vector<int>& labels) {
  if (texts.size() != labels.size()) throw py::value_error("texts and labels differ in length");
  const auto ls = to_labels(labels);
  std::vector<Document> docs;
  docs.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) docs.push_back({std::to_string(i), texts[i], ls[i]});
  return LabeledCorpus(std::move(docs));
}

std::vector<SelectorStage> stages_from(const std::vector<std::string>& specs) {
  std::vector<SelectorStage> out;
  for (const auto& s : specs) out.push_back(parse_stage(s));
  return out;
}

py::dict report_dict(const MetricsReport& rep) {
  return py::module_::import("json").attr("loads")(to_json(rep).dump());
}

}  // namespace

PYBIND11_MODULE(_arsent, m) {
  m.doc() = "Dialectal Arabic sentiment pipeline: preprocessing, n-gram weighting, feature selection, linear SVM.";
  m.attr("__version__") = ARSENT_VERSION;

  // Translators run newest first, so the subclasses are matched before Error.
  auto& base_exc = py::register_exception<Error>(m, "ArsentError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base_exc.ptr());
  py::register_exception<DataError>(m, "DataError", base_exc.ptr());

  // Text preparation.
  m.def("strip_noise", &strip_noise, py::arg("text"), py::arg("collapse_repeats") = true);
  m.def("normalize", &normalize, py::arg("text"));
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("light_stem", &light_stem, py::arg("token"));
  m.def(
      "preprocess",
      [](const std::string& text, bool remove_stopwords, const std::string& stemmer, bool collapse_repeats) {
        PrepConfig c;
        c.remove_stopwords = remove_stopwords;
        c.stemmer = parse_stemmer(stemmer);
        c.collapse_repeats = collapse_repeats;
        if (c.stemmer == StemmerKind::External) throw ValidationError("use Preprocessor with a stem function");
        return preprocess(text, c);
      },
      py::arg("text"), py::arg("remove_stopwords") = true, py::arg("stemmer") = "none",
      py::arg("collapse_repeats") = true);

  py::class_<Preprocessor>(m, "Preprocessor")
      .def(py::init([](bool remove_stopwords, const std::string& stemmer, bool collapse_repeats,
                       std::optional<StemFn> stem_fn) {
             PrepConfig c;
             c.remove_stopwords = remove_stopwords;
             c.stemmer = stem_fn ? StemmerKind::External : parse_stemmer(stemmer);
             c.collapse_repeats = collapse_repeats;
             return stem_fn ? Preprocessor(c, *stem_fn) : Preprocessor(c);
           }),
           py::arg("remove_stopwords") = true, py::arg("stemmer") = "none", py::arg("collapse_repeats") = true,
           py::arg("stem_fn") = py::none())
      .def("__call__", &Preprocessor::operator(), py::arg("text"));

  // Vectorization.
  py::class_<Vocabulary>(m, "Vocabulary")
      .def("__len__", &Vocabulary::size)
      .def_property_readonly("n_docs", &Vocabulary::n_docs)
      .def_property_readonly("terms", &Vocabulary::terms)
      .def_property_readonly("dfs", &Vocabulary::dfs)
      .def("find", &Vocabulary::find, py::arg("term"))
      .def("idf", &Vocabulary::idf, py::arg("index"));

  m.def(
      "build_vocab",
      [](const std::vector<TokenStream>& docs, const std::string& ngrams, std::size_t min_df) {
        return build_vocab(docs, NgramSpec::parse(ngrams), min_df);
      },
      py::arg("docs"), py::arg("ngrams") = "1", py::arg("min_df") = 1);

  py::class_<DocTermMatrix>(m, "DocTermMatrix")
      .def_static(
          "from_dense",
          [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels, const std::string& scheme) {
            return DocTermMatrix::from_dense(rows, to_labels(labels), parse_scheme(scheme));
          },
          py::arg("rows"), py::arg("labels"), py::arg("scheme") = "tf")
      .def_property_readonly("rows", &DocTermMatrix::rows)
      .def_property_readonly("cols", &DocTermMatrix::cols)
      .def_property_readonly("nnz", &DocTermMatrix::nnz)
      .def_property_readonly("scheme", [](const DocTermMatrix& x) { return std::string(scheme_key(x.scheme())); })
      .def_property_readonly("labels", [](const DocTermMatrix& x) { return from_labels(x.labels()); })
      .def_property_readonly("column_origin", &DocTermMatrix::column_origin)
      .def("at", &DocTermMatrix::at, py::arg("row"), py::arg("col"))
      .def("to_dense", &dense);

  m.def(
      "vectorize",
      [](const std::vector<TokenStream>& docs, const Vocabulary& vocab, const std::string& scheme,
         const std::vector<int>& labels) { return vectorize(docs, vocab, parse_scheme(scheme), to_labels(labels)); },
      py::arg("docs"), py::arg("vocab"), py::arg("scheme"), py::arg("labels"));

  // Selection.
  m.def(
      "score",
      [](const DocTermMatrix& x, const std::string& method, double C) {
        SvmParams p;
        p.C = C;
        return score(x, parse_method(method), p).scores;
      },
      py::arg("matrix"), py::arg("method"), py::arg("C") = 1.0);
  m.def(
      "select",
      [](const DocTermMatrix& x, const std::vector<std::string>& stages, double C) {
        SvmParams p;
        p.C = C;
        return sequential_select(x, stages_from(stages), p).indices;
      },
      py::arg("matrix"), py::arg("stages"), py::arg("C") = 1.0,
      "Sequential Top-K selection, e.g. stages=['correlation:3500', 'svm:1500']. Returns column indices, best first.");
  m.def(
      "project", [](const DocTermMatrix& x, const std::vector<std::size_t>& cols) { return project(x, FeatureSet{cols}); },
      py::arg("matrix"), py::arg("columns"));

  // SVM.
  py::class_<SvmModel>(m, "SvmModel")
      .def_readonly("w", &SvmModel::w)
      .def_readonly("b", &SvmModel::b)
      .def_readonly("alpha", &SvmModel::alpha)
      .def_readonly("objective", &SvmModel::objective)
      .def_readonly("converged", &SvmModel::converged)
      .def_readonly("iterations", &SvmModel::iterations)
      .def("decision_value",
           [](const SvmModel& mdl, const std::vector<double>& x) { return decision_value(mdl, x); }, py::arg("x"))
      .def("predict", [](const SvmModel& mdl, const std::vector<double>& x) { return sign(predict(mdl, x)); },
           py::arg("x"))
      .def("margin", [](const SvmModel& mdl) { return margin(mdl); })
      .def("dump", [](const SvmModel& mdl) {
        std::ostringstream os;
        write_model(os, mdl);
        return os.str();
      });

  m.def(
      "train_svm",
      [](const DocTermMatrix& x, double C, double tolerance, std::size_t max_epochs, std::uint64_t seed) {
        SvmParams p{C, tolerance, max_epochs, seed};
        p.validate();
        py::gil_scoped_release release;
        return train(x, p);
      },
      py::arg("matrix"), py::arg("C") = 1.0, py::arg("tolerance") = 1e-3, py::arg("max_epochs") = 1000,
      py::arg("seed") = 1);

  // Evaluation.
  m.def(
      "metrics",
      [](const std::vector<int>& predictions, const std::vector<int>& truth) {
        const ConfusionCounts c = confusion(to_labels(predictions), to_labels(truth));
        const Metrics mt = metrics(c);
        py::dict d;
        d["tp"] = c.tp;
        d["tn"] = c.tn;
        d["fp"] = c.fp;
        d["fn"] = c.fn;
        d["accuracy"] = mt.accuracy;
        d["precision"] = mt.precision;
        d["recall"] = mt.recall;
        d["precision_undefined"] = mt.precision_undefined;
        d["recall_undefined"] = mt.recall_undefined;
        return d;
      },
      py::arg("predictions"), py::arg("truth"));
  m.def(
      "stratified_kfold",
      [](const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
        return stratified_kfold(to_labels(labels), k, seed).assignment();
      },
      py::arg("labels"), py::arg("k"), py::arg("seed") = 1);
  m.def(
      "cross_validate",
      [](const std::vector<std::string>& texts, const std::vector<int>& labels, std::size_t k,
         const std::string& scheme, const std::string& ngrams, const std::vector<std::string>& stages,
         const std::string& mode, bool remove_stopwords, const std::string& stemmer, double C, std::uint64_t seed,
         std::size_t workers) {
        const LabeledCorpus corpus = make_corpus(texts, labels);
        PipelineConfig pc;
        pc.prep.remove_stopwords = remove_stopwords;
        pc.prep.stemmer = parse_stemmer(stemmer);
        pc.features.scheme = parse_scheme(scheme);
        pc.features.ngrams = NgramSpec::parse(ngrams);
        pc.features.stages = stages_from(stages);
        pc.features.svm.C = C;
        pc.features.svm.seed = seed;
        CrossValidateOptions opts;
        opts.mode = parse_mode(mode);
        opts.workers = workers;
        MetricsReport rep;
        {
          py::gil_scoped_release release;
          rep = cross_validate(corpus, pc, stratified_kfold(corpus, k, seed), opts);
        }
        return report_dict(rep);
      },
      py::arg("texts"), py::arg("labels"), py::arg("k") = 5, py::arg("scheme") = "tfidf", py::arg("ngrams") = "1",
      py::arg("stages") = std::vector<std::string>{}, py::arg("mode") = "strict", py::arg("remove_stopwords") = true,
      py::arg("stemmer") = "none", py::arg("C") = 1.0, py::arg("seed") = 1, py::arg("workers") = 1);

  // Experiment runner.
  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, std::optional<std::string> out) {
        ExperimentConfig c = load_experiment(config);
        if (out) c.out = *out;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        return py::module_::import("json").attr("loads")(r.manifest.dump());
      },
      py::arg("config"), py::arg("out") = py::none(),
      "Runs the configured stages and writes tables plus a manifest; returns the manifest.");
  m.def(
      "percent", &to_percent, py::arg("fraction"), "100 * fraction rounded half-up to two decimals.");
}
