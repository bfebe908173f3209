// Copyright 2026 The MLNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlnet/artifact.h"
#include "mlnet/corpus.h"
#include "mlnet/errors.h"
#include "mlnet/fixtures.h"
#include "mlnet/parallel.h"
#include "mlnet/preprocess.h"

namespace mlnet::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed: " + path.string());
}

void require_path(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing required path: ") + what);
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::optional<LabelHierarchy> maybe_hierarchy(const RunConfig& config) {
  if (config.hierarchy.empty()) return std::nullopt;
  require_path(config.hierarchy, "hierarchy");
  return load_hierarchy(config.hierarchy);
}

void augment_all(std::vector<Document>& docs, const LabelHierarchy& hierarchy) {
  for (auto& d : docs) d.gold_labels = augment_labels(d.gold_labels, hierarchy);
}

std::size_t worker_count(const RunConfig& config) {
  std::size_t threads = config.train.threads;
  if (std::getenv("MLNET_THREADS") != nullptr) threads = std::min(threads, configured_threads());
  return std::max<std::size_t>(1, threads);
}

EmbeddingTable load_matching_embeddings(const RunConfig& config, const ModelBundle& bundle) {
  require_path(config.embeddings, "embeddings");
  EmbeddingTable table = load_embeddings(config.embeddings);
  if (table.dim() != bundle.config.encoder.embedding_dim) {
    throw DimensionError("embedding width " + std::to_string(table.dim()) +
                         " does not match the model (" +
                         std::to_string(bundle.config.encoder.embedding_dim) + ")");
  }
  if (!bundle.embedding_digest.empty() && table.digest() != bundle.embedding_digest) {
    throw DataError("embedding table " + config.embeddings +
                    " differs from the one the model was trained with");
  }
  return table;
}

ModelBundle load_bundle(const RunConfig& config) {
  require_path(config.model, "model");
  return load_model(config.model);
}

std::vector<ScoreVector> score_documents(const std::vector<Document>& docs,
                                         const ModelBundle& bundle,
                                         const EmbeddingTable& table, std::size_t threads) {
  std::vector<ScoreVector> scores(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    EncoderInput input = prepare_input(docs[i], table, bundle.config.preprocess);
    scores[i] = score_labels(encode_document(input, bundle.encoder, Mode::kEval), bundle.label_head);
  });
  return scores;
}

std::vector<LabelSet> parse_prediction_file(const fs::path& path,
                                            std::vector<std::string>* ids) {
  std::vector<LabelSet> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::set<std::string> seen;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string(), lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("labels") ||
        !j["labels"].is_array()) {
      throw ParseError(path.string(), lineno, "expected {\"id\": string, \"labels\": [...]}");
    }
    std::string id = j["id"].get<std::string>();
    if (!seen.insert(id).second) throw ParseError(path.string(), lineno, "duplicate id " + id);
    LabelSet labels;
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) throw ParseError(path.string(), lineno, "labels must be strings");
      labels.insert(l.get<std::string>());
    }
    ids->push_back(std::move(id));
    out.push_back(std::move(labels));
  }
  return out;
}

}  // namespace

void cmd_prepare(const RunConfig& config, const fs::path& out_dir) {
  require_path(config.corpus, "corpus");
  std::vector<Document> docs = load_corpus(config.corpus);
  auto hierarchy = maybe_hierarchy(config);
  if (config.augment_labels) {
    if (!hierarchy) throw UsageError("augment_labels requires a hierarchy");
    augment_all(docs, *hierarchy);
  }
  DatasetSplit split = split_corpus(docs, config.ratios, config.seed);

  fs::create_directories(out_dir);
  write_file(out_dir / "train.jsonl", to_jsonl(split.train));
  write_file(out_dir / "validation.jsonl", to_jsonl(split.validation));
  write_file(out_dir / "test.jsonl", to_jsonl(split.test));

  json manifest;
  manifest["seed"] = config.seed;
  manifest["task"] = std::string(to_string(config.task));
  manifest["ratios"] = {config.ratios.train, config.ratios.validation, config.ratios.test};
  manifest["augmented"] = config.augment_labels;
  if (hierarchy) manifest["hierarchy_digest"] = hierarchy->digest();
  auto ids = [](const std::vector<Document>& part) {
    json arr = json::array();
    for (const auto& d : part) arr.push_back(d.id);
    return arr;
  };
  manifest["splits"]["train"] = ids(split.train);
  manifest["splits"]["validation"] = ids(split.validation);
  manifest["splits"]["test"] = ids(split.test);
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<EpochLog> cmd_train(const RunConfig& config, const TrainPaths& paths,
                                std::ostream* diagnostics) {
  if (config.model.empty()) throw UsageError("missing required path: model");
  require_path(config.embeddings, "embeddings");
  EmbeddingTable table = load_embeddings(config.embeddings);
  if (config.expected_embedding_dim != 0 && table.dim() != config.expected_embedding_dim) {
    throw DimensionError("embedding file has width " + std::to_string(table.dim()) +
                         " but the configuration expects " +
                         std::to_string(config.expected_embedding_dim));
  }

  std::vector<Document> train_docs;
  std::vector<Document> val_docs;
  if (!paths.train.empty()) {
    require_path(paths.train.string(), "training split");
    train_docs = load_corpus(paths.train);
    if (!paths.validation.empty()) {
      require_path(paths.validation.string(), "validation split");
      val_docs = load_corpus(paths.validation);
    }
  } else {
    require_path(config.corpus, "corpus");
    DatasetSplit split = split_corpus(load_corpus(config.corpus), config.ratios, config.seed);
    train_docs = std::move(split.train);
    val_docs = std::move(split.validation);
  }
  auto hierarchy = maybe_hierarchy(config);
  if (config.augment_labels) {
    if (!hierarchy) throw UsageError("augment_labels requires a hierarchy");
    augment_all(train_docs, *hierarchy);
    augment_all(val_docs, *hierarchy);
  }

  ModelConfig model_config = config.model_config;
  model_config.encoder.embedding_dim = table.dim();
  if (!config.stopwords.empty()) {
    require_path(config.stopwords, "stopwords");
    model_config.preprocess.stopwords = load_stopwords(config.stopwords);
  }
  ModelBundle bundle = init_model(model_config, build_vocabulary(train_docs), config.seed);
  bundle.embedding_digest = table.digest();
  if (hierarchy) bundle.hierarchy_digest = hierarchy->digest();

  TrainConfig train_config = config.train;
  train_config.threads = worker_count(config);
  train_config.diagnostics = diagnostics;

  auto train = prepare_examples(train_docs, table, bundle, diagnostics);
  auto val = prepare_examples(val_docs, table, bundle, diagnostics);
  if (train.empty()) throw DataError("no usable training documents");

  std::vector<EpochLog> log = train_stage1(train, val, bundle, train_config);
  if (!paths.skip_stage2) {
    auto stage2 = train_stage2(train, val, bundle, train_config);
    log.insert(log.end(), stage2.begin(), stage2.end());
  }

  save_model(bundle, config.model);
  std::string text;
  for (const auto& entry : log) text += format_log_line(entry) + "\n";
  fs::path log_path = paths.log.empty() ? fs::path(config.model + ".log") : paths.log;
  write_file(log_path, text);
  return log;
}

void cmd_predict(const RunConfig& config, const PredictPaths& paths) {
  std::optional<GlobalThreshold> threshold;
  if (config.decode_mode == DecodeMode::kThreshold) {
    if (paths.threshold) {
      threshold = GlobalThreshold{*paths.threshold, "flag", 0.0};
    } else if (!paths.threshold_file.empty()) {
      require_path(paths.threshold_file.string(), "threshold file");
      threshold = threshold_from_json(read_file(paths.threshold_file),
                                      paths.threshold_file.string());
    } else {
      throw UsageError("threshold decoding needs --threshold or --threshold-file");
    }
  }
  ModelBundle bundle = load_bundle(config);
  if (config.decode_mode == DecodeMode::kTopK && !bundle.count_head_trained) {
    throw UsageError("top-K decoding needs a trained count head; this model skipped stage 2");
  }
  if (config.output.empty()) throw UsageError("missing required path: output");
  EmbeddingTable table = load_matching_embeddings(config, bundle);

  fs::path input = paths.input.empty() ? fs::path(config.corpus) : paths.input;
  require_path(input.string(), "input documents");
  std::vector<Document> docs = load_corpus(input);

  std::vector<std::string> lines(docs.size());
  const GlobalThreshold* t = threshold ? &*threshold : nullptr;
  parallel_for(docs.size(), worker_count(config), [&](std::size_t i) {
    lines[i] = prediction_to_json(predict(docs[i], bundle, table, config.decode_mode, t),
                                  bundle.vocab);
  });
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  write_file(config.output, text);
}

MetricsReport cmd_evaluate(const RunConfig& config, const fs::path& predictions,
                           const fs::path& gold, bool per_example) {
  std::optional<LabelHierarchy> hierarchy;
  if (config.matching == Matching::kHierarchical) {
    if (config.hierarchy.empty()) throw UsageError("hierarchical matching requires a hierarchy");
    hierarchy = maybe_hierarchy(config);
  }
  require_path(predictions.string(), "predictions");
  require_path(gold.string(), "gold documents");

  std::vector<std::string> pred_ids;
  std::vector<LabelSet> pred_sets = parse_prediction_file(predictions, &pred_ids);
  std::vector<Document> gold_docs = load_corpus(gold);

  std::map<std::string, std::size_t> pred_index;
  for (std::size_t i = 0; i < pred_ids.size(); ++i) pred_index[pred_ids[i]] = i;
  std::set<std::string> gold_ids;
  std::vector<std::string> missing;
  std::vector<LabelSet> golds;
  std::vector<LabelSet> preds;
  for (const auto& d : gold_docs) {
    gold_ids.insert(d.id);
    auto it = pred_index.find(d.id);
    if (it == pred_index.end()) {
      missing.push_back(d.id);
      continue;
    }
    golds.push_back(d.gold_labels);
    preds.push_back(pred_sets[it->second]);
  }
  std::vector<std::string> extra;
  for (const auto& id : pred_ids) {
    if (!gold_ids.count(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "prediction and gold ids differ";
    if (!missing.empty()) {
      msg += "; no prediction for:";
      for (const auto& id : missing) msg += " " + id;
    }
    if (!extra.empty()) {
      msg += "; not in gold:";
      for (const auto& id : extra) msg += " " + id;
    }
    throw DataError(msg);
  }
  return example_based_metrics(golds, preds, config.matching,
                               hierarchy ? &*hierarchy : nullptr, per_example);
}

GlobalThreshold cmd_threshold_search(const RunConfig& config, const fs::path& split) {
  std::optional<LabelHierarchy> hierarchy;
  if (config.matching == Matching::kHierarchical) {
    if (config.hierarchy.empty()) throw UsageError("hierarchical matching requires a hierarchy");
    hierarchy = maybe_hierarchy(config);
  }
  ModelBundle bundle = load_bundle(config);
  EmbeddingTable table = load_matching_embeddings(config, bundle);
  require_path(split.string(), "split documents");
  std::vector<Document> docs = load_corpus(split);
  if (config.augment_labels && hierarchy) augment_all(docs, *hierarchy);

  std::vector<ScoreVector> scores = score_documents(docs, bundle, table, worker_count(config));
  std::vector<LabelSet> gold;
  gold.reserve(docs.size());
  for (const auto& d : docs) gold.push_back(d.gold_labels);
  GlobalThreshold t = search_threshold(scores, gold, bundle.vocab,
                                       hierarchy ? &*hierarchy : nullptr, config.threshold_split);
  if (!config.output.empty()) write_file(config.output, threshold_to_json(t) + "\n");
  return t;
}

bool cmd_grad_check(const RunConfig& config, const GradCheckOptions& options, std::ostream& out) {
  if (options.instances < 1) throw UsageError("grad-check needs at least one instance");
  Stage1Backward backward;
  if (options.corrupt_backward) {
    backward = [](const ModelBundle& b, std::span<const LabeledInput> ex, std::uint64_t seed,
                  const TrainConfig& tc) {
      Stage1Grads g = stage1_gradient(b, ex, seed, tc);
      g.scale(1.1);
      return g;
    };
  }
  bool all_passed = true;
  double worst = 0.0;
  std::map<std::string, GradientGroupReport> groups;
  for (int i = 0; i < options.instances; ++i) {
    GradientFixture fx = make_gradient_fixture(config.seed + static_cast<std::uint64_t>(i));
    GradientCheckReport r = gradient_check(fx.bundle, fx.examples, options.tolerance, backward);
    all_passed = all_passed && r.passed;
    worst = std::max(worst, r.max_rel_error);
    for (const auto& g : r.groups) {
      auto& acc = groups[g.name];
      acc.name = g.name;
      acc.checked += g.checked;
      acc.max_rel_error = std::max(acc.max_rel_error, g.max_rel_error);
      acc.max_abs_error = std::max(acc.max_abs_error, g.max_abs_error);
    }
  }
  out << std::scientific << std::setprecision(3);
  for (const auto& [name, g] : groups) {
    out << (g.max_rel_error < options.tolerance ? "ok  " : "FAIL") << "  " << name
        << "  elements=" << g.checked << "  max_rel=" << g.max_rel_error
        << "  max_abs=" << g.max_abs_error << "\n";
  }
  out << (all_passed ? "PASS" : "FAIL") << "  instances=" << options.instances
      << "  max_rel=" << worst << "  tolerance=" << options.tolerance << "\n";
  out << std::defaultfloat;
  return all_passed;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mlnet: hierarchical-attention multi-label document classifier", "mlnet"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string task;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value settings file");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--task", task, "preset: task1, task2, task3 or custom");
  app.add_option("--set", overrides, "override a setting, key=value (repeatable)");

  Settings path_flags;
  auto path_option = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                         const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&path_flags, key](const std::string& v) { path_flags[key] = v; }, help);
  };

  auto* prepare = app.add_subcommand("prepare", "split a corpus into train/validation/test");
  std::string out_dir;
  path_option(prepare, "--corpus", "corpus", "corpus JSONL");
  path_option(prepare, "--hierarchy", "hierarchy", "child<TAB>parent edges");
  prepare->add_option("--out-dir", out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train", "run both training stages and write a model");
  TrainPaths train_paths;
  std::string train_file;
  std::string val_file;
  std::string log_file;
  path_option(train, "--corpus", "corpus", "corpus JSONL, split on the fly");
  train->add_option("--train", train_file, "training split JSONL");
  train->add_option("--validation", val_file, "validation split JSONL");
  path_option(train, "--embeddings", "embeddings", "word vectors");
  path_option(train, "--hierarchy", "hierarchy", "child<TAB>parent edges");
  path_option(train, "--stopwords", "stopwords", "stop-word list, one per line");
  path_option(train, "--model", "model", "artifact to write");
  train->add_option("--log", log_file, "training log (default <model>.log)");
  train->add_flag("--skip-stage2", train_paths.skip_stage2, "leave the count head untrained");

  auto* predict_cmd = app.add_subcommand("predict", "label documents with a trained model");
  PredictPaths predict_paths;
  std::string input_file;
  std::string threshold_file;
  path_option(predict_cmd, "--model", "model", "model artifact");
  path_option(predict_cmd, "--embeddings", "embeddings", "word vectors");
  predict_cmd->add_option("--input", input_file, "documents JSONL");
  path_option(predict_cmd, "--output", "output", "predictions JSONL to write");
  path_option(predict_cmd, "--mode", "decode_mode", "topk or threshold");
  predict_cmd->add_option("--threshold", predict_paths.threshold, "global threshold value");
  predict_cmd->add_option("--threshold-file", threshold_file, "threshold JSON");

  auto* evaluate = app.add_subcommand("evaluate", "example-based precision, recall and F1");
  std::string pred_file;
  std::string gold_file;
  bool per_example = false;
  evaluate->add_option("--predictions", pred_file, "predictions JSONL")->required();
  evaluate->add_option("--gold", gold_file, "gold documents JSONL")->required();
  path_option(evaluate, "--matching", "matching", "exact or hierarchical");
  path_option(evaluate, "--hierarchy", "hierarchy", "child<TAB>parent edges");
  path_option(evaluate, "--output", "output", "metrics JSON (default stdout)");
  evaluate->add_flag("--per-example", per_example, "include per-document scores");

  auto* search = app.add_subcommand("threshold-search", "pick the F1-optimal global threshold");
  std::string split_file;
  path_option(search, "--model", "model", "model artifact");
  path_option(search, "--embeddings", "embeddings", "word vectors");
  search->add_option("--split", split_file, "documents to tune on")->required();
  path_option(search, "--matching", "matching", "exact or hierarchical");
  path_option(search, "--hierarchy", "hierarchy", "child<TAB>parent edges");
  path_option(search, "--output", "output", "threshold JSON to write");

  auto* grad = app.add_subcommand("grad-check", "finite-difference check of the backward pass");
  GradCheckOptions grad_options;
  grad->add_option("--instances", grad_options.instances, "random fixtures to check");
  grad->add_option("--tolerance", grad_options.tolerance, "maximum relative error");
  grad->add_flag("--corrupt-backward", grad_options.corrupt_backward,
                 "scale the analytic gradient by 1.1 (the check must fail)");

  // CLI11 consumes its argument vector back to front, without argv[0].
  std::vector<std::string> pending(args.empty() ? args.end() : args.begin() + 1, args.end());
  std::reverse(pending.begin(), pending.end());
  try {
    app.parse(pending);
  } catch (const CLI::ParseError& e) {
    const bool ok = e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success);
    std::ostream& stream = ok ? out : err;
    if (ok) {
      stream << app.help();
    } else {
      stream << "mlnet: " << e.what() << "\n";
    }
    return ok ? 0 : 1;
  }

  try {
    Settings file_settings;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
      file_settings = load_config_file(config_path);
    }
    Settings flags = path_flags;
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value: " + kv);
      flags[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (seed) flags["seed"] = std::to_string(*seed);
    if (!task.empty()) flags["task"] = task;
    RunConfig config = resolve_config(file_settings, flags);

    if (*prepare) {
      cmd_prepare(config, out_dir);
    } else if (*train) {
      train_paths.train = train_file;
      train_paths.validation = val_file;
      train_paths.log = log_file;
      cmd_train(config, train_paths, &err);
    } else if (*predict_cmd) {
      predict_paths.input = input_file;
      predict_paths.threshold_file = threshold_file;
      cmd_predict(config, predict_paths);
    } else if (*evaluate) {
      MetricsReport report = cmd_evaluate(config, pred_file, gold_file, per_example);
      std::string text = to_json(report) + "\n";
      if (config.output.empty()) {
        out << text;
      } else {
        write_file(config.output, text);
      }
    } else if (*search) {
      GlobalThreshold t = cmd_threshold_search(config, split_file);
      if (config.output.empty()) out << threshold_to_json(t) << "\n";
    } else if (*grad) {
      if (!cmd_grad_check(config, grad_options, out)) return 3;
    }
    return 0;
  } catch (const Error& e) {
    err << "mlnet: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kUsage:
        return 1;
      case ErrorKind::kData:
        return 2;
      case ErrorKind::kNumeric:
        return 3;
    }
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "mlnet: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mlnet::cli
