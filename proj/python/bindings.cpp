// Copyright 2026 The keyfind Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "keyfind/extractor.hpp"
#include "keyfind/kaf.hpp"
#include "keyfind/matcher.hpp"
#include "keyfind/metrics.hpp"
#include "keyfind/prompts.hpp"
#include "keyfind/regex_suite.hpp"
#include "keyfind/runner.hpp"
#include "keyfind/version.hpp"

namespace py = pybind11;
using namespace keyfind;

namespace {

std::unique_ptr<Extractor> make_extractor_impl(const std::string& name) {
  if (name == "reference-rules") return std::make_unique<RuleExtractor>();
  if (name == "regex:opencompass-style")
    return std::make_unique<RegexSuiteExtractor>(RegexSuite::opencompass_style());
  if (name == "regex:lmeval-style")
    return std::make_unique<RegexSuiteExtractor>(RegexSuite::lmeval_style());
  if (name == "regex:ultraeval-style")
    return std::make_unique<RegexSuiteExtractor>(RegexSuite::ultraeval_style());
  throw std::invalid_argument("unknown extractor '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Key answer extraction and matching for LLM evaluation";
  m.attr("__version__") = kVersion;
  m.attr("NO_VALID_ANSWER") = std::string(kNoValidAnswerLiteral);

  py::enum_<TaskType>(m, "TaskType")
      .value("ALPHABET_OPTION", TaskType::kAlphabetOption)
      .value("SHORT_TEXT", TaskType::kShortText)
      .value("CATEGORICAL_LABEL", TaskType::kCategoricalLabel)
      .value("MATH", TaskType::kMath);
  m.def("task_type_name", [](TaskType t) { return std::string(to_string(t)); });
  m.def("task_type_from_name", [](const std::string& name) {
    auto t = task_type_from_string(name);
    if (!t) throw std::invalid_argument("unknown task type '" + name + "'");
    return *t;
  });

  py::class_<ExtractedKey>(m, "ExtractedKey")
      .def_static("key", &ExtractedKey::key, py::arg("value"))
      .def_static("no_valid_answer", &ExtractedKey::no_valid_answer)
      .def_static("parse", [](const std::string& s) { return ExtractedKey::parse(s); })
      .def_property_readonly("has_value", &ExtractedKey::has_value)
      .def_property_readonly("value",
                             [](const ExtractedKey& k) -> py::object {
                               if (!k.has_value()) return py::none();
                               return py::cast(k.value());
                             })
      .def("serialize", &ExtractedKey::serialize)
      .def("__eq__", [](const ExtractedKey& a, const ExtractedKey& b) { return a == b; })
      .def("__repr__", [](const ExtractedKey& k) {
        return k.has_value() ? "ExtractedKey('" + k.value() + "')"
                             : "ExtractedKey(no_valid_answer)";
      });

  py::class_<AnswerRange>(m, "AnswerRange")
      .def_static("pairs",
                  [](const std::vector<std::pair<std::string, std::string>>& options) {
                    std::vector<OptionPair> pairs;
                    pairs.reserve(options.size());
                    for (const auto& [letter, content] : options)
                      pairs.push_back({letter, content});
                    return AnswerRange::pairs(std::move(pairs));
                  })
      .def_static("flat", &AnswerRange::flat)
      .def_static("math_domain", &AnswerRange::math_domain)
      .def("serialize", &AnswerRange::serialize);

  py::class_<EvalItem>(m, "EvalItem")
      .def(py::init([](std::string id, std::string question, TaskType task_type,
                       AnswerRange answer_range, std::optional<std::string> gold_answer,
                       std::string source_dataset) {
             EvalItem item;
             item.id = std::move(id);
             item.question = std::move(question);
             item.task_type = task_type;
             item.answer_range = std::move(answer_range);
             item.gold_answer = std::move(gold_answer);
             item.source_dataset = std::move(source_dataset);
             return item;
           }),
           py::arg("id"), py::arg("question"), py::arg("task_type"), py::arg("answer_range"),
           py::arg("gold_answer") = std::nullopt, py::arg("source_dataset") = "")
      .def_readonly("id", &EvalItem::id)
      .def_readonly("question", &EvalItem::question)
      .def_readonly("task_type", &EvalItem::task_type)
      .def_readonly("answer_range", &EvalItem::answer_range)
      .def_readonly("gold_answer", &EvalItem::gold_answer)
      .def_readonly("source_dataset", &EvalItem::source_dataset);
  m.def("validate_item", &validate_item);

  py::class_<ModelResponse>(m, "ModelResponse")
      .def(py::init([](std::string item_id, std::string text, std::string producer_model) {
             return ModelResponse{std::move(item_id), std::move(producer_model),
                                  std::move(text)};
           }),
           py::arg("item_id"), py::arg("text"), py::arg("producer_model") = "unknown")
      .def_readonly("item_id", &ModelResponse::item_id)
      .def_readonly("producer_model", &ModelResponse::producer_model)
      .def_readonly("text", &ModelResponse::text);

  m.def(
      "normalize",
      [](const std::string& raw, TaskType type) { return normalize(raw, type); },
      py::arg("raw"), py::arg("task_type"));
  m.def(
      "judge",
      [](const EvalItem& item, const ExtractedKey& extracted) {
        return std::string(to_string(judge(item, extracted)));
      },
      py::arg("item"), py::arg("extracted"));
  m.def("score_extraction", &score_extraction, py::arg("extracted"), py::arg("gold_extraction"));

  py::class_<Extractor>(m, "Extractor")
      .def_property_readonly("id", &Extractor::id)
      .def(
          "extract",
          [](Extractor& self, const EvalItem& item, const ModelResponse& response)
              -> py::object {
            auto key = self.extract(item, response);
            if (!key) return py::none();
            return py::cast(*key);
          },
          py::arg("item"), py::arg("response"));
  m.def("make_extractor", &make_extractor_impl, py::arg("name"));

  py::class_<LoadedItem>(m, "LoadedItem")
      .def_readonly("item", &LoadedItem::item)
      .def_readonly("response", &LoadedItem::response)
      .def_readonly("gold_extraction", &LoadedItem::gold_extraction);
  m.def(
      "load_kaf",
      [](const std::string& path) {
        LoadResult result = load_kaf(path);
        std::vector<std::pair<size_t, std::string>> failures;
        for (const auto& f : result.failures) failures.emplace_back(f.line_number, f.message);
        return py::make_tuple(result.items, failures);
      },
      py::arg("path"));

  m.def("kendall_tau_b", &kendall_tau_b, py::arg("x"), py::arg("y"));
  m.def(
      "compute_delta_acc",
      [](const std::vector<std::pair<std::string, double>>& accuracies,
         const std::map<std::string, double>& params) {
        std::vector<AccuracySummary> summaries;
        summaries.reserve(accuracies.size());
        for (const auto& [id, acc] : accuracies) summaries.push_back({id, acc, std::nullopt});
        std::vector<py::tuple> rows;
        for (const auto& row : compute_delta_acc(summaries, params)) {
          rows.push_back(py::make_tuple(row.extractor_id, row.delta_acc,
                                        row.delta_acc_per_billion
                                            ? py::cast(*row.delta_acc_per_billion)
                                            : py::none()));
        }
        return rows;
      },
      py::arg("accuracies"), py::arg("params") = std::map<std::string, double>{});

  m.def(
      "evaluate_corpus",
      [](const std::string& dataset_path, const std::string& extractor_name) {
        LoadResult loaded = load_kaf(dataset_path);
        auto extractor = make_extractor_impl(extractor_name);
        std::vector<Verdict> verdicts = run_extractor(*extractor, loaded.items);
        MetricReport report = compute_report(verdicts);
        return report_to_json(report).dump();
      },
      py::arg("dataset_path"), py::arg("extractor_name"),
      "Runs one local extractor over a KAF file; returns the metric report as JSON text.");

  py::class_<PromptLibrary>(m, "PromptLibrary")
      .def_static("load",
                  [](const std::string& dir) { return PromptLibrary::load(dir); })
      .def("render_question_prompt",
           [](const PromptLibrary& lib, const EvalItem& item, const std::string& config_name,
              const std::vector<std::pair<std::string, std::string>>& demos,
              const std::string& expertise) {
             auto config = PromptConfig::from_name(config_name);
             if (!config)
               throw std::invalid_argument("unknown prompt configuration '" + config_name + "'");
             std::vector<QaPair> qa;
             qa.reserve(demos.size());
             for (const auto& [q, a] : demos) qa.push_back({q, a});
             return lib.render_question_prompt(item, *config, qa, expertise);
           },
           py::arg("item"), py::arg("config"),
           py::arg("demos") = std::vector<std::pair<std::string, std::string>>{},
           py::arg("expertise") = "commonsense reasoning")
      .def("render_extraction_prompt",
           [](const PromptLibrary& lib, const EvalItem& item, const ModelResponse& response) {
             return lib.render_extraction_prompt(item, response);
           })
      .def("render_judge_prompt",
           [](const PromptLibrary& lib, const std::string& question, const std::string& reference,
              const std::string& answer, bool cot) {
             return lib.render_judge_prompt(question, reference, answer, cot);
           },
           py::arg("question"), py::arg("reference"), py::arg("answer"), py::arg("cot") = false);
}
