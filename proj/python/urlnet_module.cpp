#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "urlnet/archive.hpp"
#include "urlnet/cli.hpp"
#include "urlnet/error.hpp"
#include "urlnet/metrics.hpp"
#include "urlnet/synthetic.hpp"
#include "urlnet/tokenizer.hpp"
#include "urlnet/workflows.hpp"

namespace py = pybind11;
using namespace urlnet;

namespace {

std::vector<EncodedUrl> encode_all(const ModelArchive& a, const std::vector<std::string>& urls) {
  std::vector<EncodedUrl> out;
  out.reserve(urls.size());
  for (const auto& u : urls) out.push_back(encode_url(u, a.char_vocab, a.word_vocab, a.model.config().lengths));
  return out;
}

}  // namespace

PYBIND11_MODULE(_urlnet, m) {
  m.doc() = "URLNet malicious URL classifier";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("tokenize_words", &tokenize_words, py::arg("url"), py::arg("special_as_words") = false);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) { return auc(roc_curve(scores, labels)); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "tpr_at_fpr",
      [](const std::vector<double>& scores, const std::vector<int>& labels, double level) {
        return tpr_at_fpr(roc_curve(scores, labels), level);
      },
      py::arg("scores"), py::arg("labels"), py::arg("fpr_level"));

  m.def(
      "synthetic_corpus",
      [](std::size_t count, double malicious_fraction, std::uint64_t seed, bool marker_only) {
        SyntheticOptions opt;
        opt.count = count;
        opt.malicious_fraction = malicious_fraction;
        opt.seed = seed;
        opt.marker_only = marker_only;
        std::vector<std::pair<int, std::string>> out;
        for (const auto& r : generate_synthetic(opt).records) out.emplace_back(r.label, r.url);
        return out;
      },
      py::arg("count") = 10000, py::arg("malicious_fraction") = 0.05, py::arg("seed") = 1,
      py::arg("marker_only") = false, "Labelled synthetic URLs as (label, url) pairs in timestamp order.");

  py::class_<ModelArchive>(m, "Model")
      .def_static(
          "load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
      .def(
          "save", [](const ModelArchive& a, const std::string& path) { save_model(a, path); }, py::arg("path"))
      .def(
          "score",
          [](const ModelArchive& a, const std::vector<std::string>& urls, int threads) {
            py::gil_scoped_release release;
            return score_urls(a, urls, threads);
          },
          py::arg("urls"), py::arg("threads") = 0, "Malicious-class logits, one per URL.")
      .def(
          "embed",
          [](const ModelArchive& a, const std::vector<std::string>& urls) {
            const auto enc = encode_all(a, urls);
            std::vector<std::vector<Scalar>> out;
            for (const auto& e : enc) out.push_back(a.model.feature_vector(e));
            return out;
          },
          py::arg("urls"))
      .def_property_readonly("config_json", [](const ModelArchive& a) { return a.model.config().to_json().dump(); })
      .def_property_readonly("metadata_json", [](const ModelArchive& a) { return a.metadata.dump(); })
      .def_property_readonly("parameter_count", [](const ModelArchive& a) { return a.model.parameter_count(); })
      .def_property_readonly("char_vocab_size", [](const ModelArchive& a) { return a.char_vocab.size(); })
      .def_property_readonly("word_vocab_size", [](const ModelArchive& a) { return a.word_vocab.size(); });
}
