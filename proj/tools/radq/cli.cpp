// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "radq/adapter.hpp"
#include "radq/corpus.hpp"
#include "radq/error.hpp"
#include "radq/quantize.hpp"
#include "radq/textmetrics.hpp"
#include "radq/trainer.hpp"

namespace radq::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- options

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out;
  bool verbose = false;
  std::string config;
};

struct EvaluateOptions {
  std::string candidates;
  std::string references;
  std::string aggregation = "corpus";
  std::string smoothing = "none";
  double alpha = 0.9;
  double gamma = 0.5;
  double frag_beta = 3.0;
  double rouge_beta = 1.0;
};

struct SplitOptions {
  std::string corpus;
};

struct PromptOptions {
  std::string corpus;
  std::string manifest;
  std::string partition = "train";
  std::string mode = "train";
};

struct DemoOptions {
  std::size_t vocab = 8;
  std::size_t hidden = 16;
  std::size_t rank = 8;
  std::size_t block_size = kDefaultBlockSize;
  std::size_t train_size = 512;
  std::size_t val_size = 128;
  std::size_t context_len = 1;
  std::size_t batch_size = 8;
  std::size_t grad_accum_steps = 4;
  std::size_t epochs = 3;
  double lr_max = 0.01;
  std::uint64_t warmup_steps = 5;
  double weight_decay = 0.01;
  std::size_t patience = 1;
  bool eight_bit = false;
  std::string targets;
  std::string checkpoint;
};

struct QuantizeOptions {
  std::string input;
  std::size_t block_size = kDefaultBlockSize;
  int scale_width = 4;
};

/// Fills options that were not given on the command line from the --config
/// file, and remembers every key it consumed.
class ConfigOverlay {
 public:
  ConfigOverlay(json config, fs::path base_dir) : config_(std::move(config)), base_dir_(std::move(base_dir)) {}

  template <class T>
  void bind(const CLI::Option* opt, const std::string& key, T& value) {
    used_.insert(key);
    if (opt->count() > 0 || !config_.contains(key)) return;
    try {
      value = config_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InputError("config key '" + key + "': " + e.what());
    }
  }

  /// Like bind, but a relative path from the file is taken relative to it.
  void bind_path(const CLI::Option* opt, const std::string& key, std::string& value) {
    const bool from_file = opt->count() == 0 && config_.contains(key);
    bind(opt, key, value);
    if (from_file && !value.empty() && fs::path(value).is_relative()) value = (base_dir_ / value).string();
  }

  void reject_unknown_keys() const {
    for (const auto& [key, _] : config_.items()) {
      if (!used_.count(key)) throw ContractError("unknown config key '" + key + "'");
    }
  }

 private:
  json config_;
  fs::path base_dir_;
  std::set<std::string> used_;
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  try {
    json doc = json::parse(in);
    if (!doc.is_object()) throw InputError("config '" + path + "' must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------- io helpers

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to the --out path if set, otherwise to `out`.
void emit(const GlobalOptions& g, std::ostream& out, const std::string& data) {
  if (g.out.empty()) {
    out << data;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InputError("cannot open output '" + g.out + "'");
  f << data;
  if (!f) throw InputError("write failed for '" + g.out + "'");
}

std::string with_thousands(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string fixed(double v, int places = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw ContractError(std::string("missing required option ") + flag);
}

void log_config(std::ostream& err, const std::string& command, const json& resolved) {
  err << "radq " << command << ": config " << resolved.dump() << '\n';
}

// ---------------------------------------------------------------- evaluate

std::vector<std::pair<std::string, json>> read_jsonl_by_id(const std::string& path) {
  std::vector<std::pair<std::string, json>> rows;
  std::set<std::string> seen;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string()) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected an object with a string \"id\"");
    }
    std::string id = doc["id"].get<std::string>();
    if (!seen.insert(id).second) throw InputError(path + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
    rows.emplace_back(std::move(id), std::move(doc));
  }
  return rows;
}

std::vector<std::string> reference_texts(const json& doc, const std::string& id) {
  const json* field = doc.contains("text") ? &doc["text"] : doc.contains("report") ? &doc["report"] : nullptr;
  if (field && field->is_string()) return {field->get<std::string>()};
  if (field && field->is_array() && !field->empty()) {
    std::vector<std::string> out;
    for (const auto& t : *field) {
      if (!t.is_string()) throw InputError("reference '" + id + "': texts must be strings");
      out.push_back(t.get<std::string>());
    }
    return out;
  }
  throw InputError("reference '" + id + "': expected \"text\" (string or array) or \"report\"");
}

int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o, std::ostream& out) {
  require(o.candidates, "--candidates");
  require(o.references, "--references");
  EvalParams params;
  if (o.aggregation == "corpus") {
    params.aggregation = Aggregation::corpus;
  } else if (o.aggregation == "sentence") {
    params.aggregation = Aggregation::sentence_mean;
  } else {
    throw ContractError("unknown aggregation '" + o.aggregation + "' (expected corpus or sentence)");
  }
  if (o.smoothing == "none") {
    params.bleu_smoothing = BleuSmoothing::none;
  } else if (o.smoothing == "epsilon") {
    params.bleu_smoothing = BleuSmoothing::epsilon;
  } else {
    throw ContractError("unknown smoothing '" + o.smoothing + "' (expected none or epsilon)");
  }
  params.meteor = {o.alpha, o.gamma, o.frag_beta};
  params.rouge.beta = o.rouge_beta;

  const auto cands = read_jsonl_by_id(o.candidates);
  const auto refs = read_jsonl_by_id(o.references);
  std::map<std::string, const json*> ref_by_id;
  for (const auto& [id, doc] : refs) ref_by_id[id] = &doc;

  std::vector<EvalPair> pairs;
  for (const auto& [id, doc] : cands) {
    if (!doc.contains("text") || !doc["text"].is_string()) {
      throw InputError("candidate '" + id + "': expected a string \"text\"");
    }
    const auto it = ref_by_id.find(id);
    if (it == ref_by_id.end()) throw ContractError("no reference for candidate id '" + id + "'");
    EvalPair pair{id, tokenize(doc["text"].get<std::string>()), {}};
    for (const auto& text : reference_texts(*it->second, id)) pair.references.push_back(tokenize(text));
    pairs.push_back(std::move(pair));
    ref_by_id.erase(it);
  }
  if (!ref_by_id.empty()) throw ContractError("no candidate for reference id '" + ref_by_id.begin()->first + "'");

  emit(g, out, to_json(evaluate_corpus(pairs, params)) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------- split / prompt

LoadedCorpus load_nonempty(const std::string& path, std::ostream& err) {
  LoadedCorpus corpus = load_corpus(path);
  for (const auto& w : corpus.warnings) err << "radq: warning: " << path << ": " << w << '\n';
  if (corpus.records.empty()) throw InputError("corpus '" + path + "' has no records");
  return corpus;
}

int cmd_split(const GlobalOptions& g, const SplitOptions& o, std::ostream& out, std::ostream& err) {
  require(o.corpus, "--corpus");
  const LoadedCorpus corpus = load_nonempty(o.corpus, err);
  const SplitAssignment s = split(corpus.records, g.seed);
  emit(g, out, to_json(s) + "\n");
  (g.out.empty() ? err : out) << "split " << corpus.records.size() << " records: train " << s.train.size()
                               << ", val " << s.val.size() << ", test " << s.test.size() << '\n';
  return kExitOk;
}

int cmd_prompt(const GlobalOptions& g, const PromptOptions& o, std::ostream& out, std::ostream& err) {
  require(o.corpus, "--corpus");
  require(o.manifest, "--manifest");
  const Partition partition = parse_partition(o.partition);
  const PromptMode mode = parse_prompt_mode(o.mode);
  const LoadedCorpus corpus = load_nonempty(o.corpus, err);
  const SplitAssignment s = parse_manifest(read_file(o.manifest));
  std::ostringstream lines;
  const std::size_t count = export_prompts(corpus.records, s, partition, mode, lines);
  emit(g, out, lines.str());
  (g.out.empty() ? err : out) << "wrote " << count << " " << o.mode << " prompts for partition " << o.partition
                               << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- qlora-demo

int cmd_qlora_demo(const GlobalOptions& g, const DemoOptions& o, std::ostream& out, std::ostream& err) {
  std::ostream& summary = g.out.empty() ? err : out;

  if (!o.targets.empty()) {
    const AdapterTargetSpec spec = load_target_spec(o.targets);
    std::uint64_t base = 0, adapters = 0, dense = 0;
    for (const auto& t : spec.targets) {
      const MemoryFootprint f = footprint(t.rows, t.cols, o.block_size, spec.rank);
      base += f.weight_bytes + f.scale_bytes;
      adapters += f.adapter_bytes;
      dense += dense_bytes(t.rows, t.cols);
    }
    summary << "target spec: " << spec.targets.size() << " matrices, rank " << spec.rank << '\n';
    summary << "trainable parameters: " << with_thousands(count_trainable(spec)) << '\n';
    summary << "footprint: 4-bit base " << with_thousands(base) << " bytes + adapters " << with_thousands(adapters)
            << " bytes vs 16-bit dense " << with_thousands(dense) << " bytes (base ratio "
            << fixed(static_cast<double>(base) / static_cast<double>(dense)) << ")\n";
  }

  ToyModelConfig mc;
  mc.vocab = o.vocab;
  mc.hidden = o.hidden;
  mc.rank = o.rank;
  mc.block_size = o.block_size;
  mc.seed = g.seed;
  ToyModel model = make_toy_model(mc);
  const auto train_set = make_copy_task(o.train_size, o.vocab, o.context_len, g.seed + 1);
  const auto val_set = make_copy_task(o.val_size, o.vocab, o.context_len, g.seed + 2);

  TrainConfig tc;
  tc.batch_size = o.batch_size;
  tc.grad_accum_steps = o.grad_accum_steps;
  tc.epochs = o.epochs;
  tc.lr_max = o.lr_max;
  tc.warmup_steps = o.warmup_steps;
  tc.weight_decay = o.weight_decay;
  tc.early_stop_patience = o.patience;
  tc.seed = g.seed;
  tc.optimizer.eight_bit_state = o.eight_bit;

  const AdapterTargetSpec toy_spec{{{"toy", o.hidden, o.hidden}}, o.rank};
  summary << "toy adapter trainable parameters: " << with_thousands(count_trainable(toy_spec)) << '\n';
  const MemoryFootprint toy_fp = footprint(model.layer().base(), o.rank);
  summary << "toy layer footprint: " << toy_fp.total_bytes << " bytes vs 16-bit dense "
          << dense_bytes(o.hidden, o.hidden) << " bytes\n";

  const TrainReport report = train(model, train_set, val_set, tc);
  if (report.frozen_hashes_before != report.frozen_hashes_after) {
    throw NumericalError("frozen tensor changed during training");
  }
  if (g.verbose) {
    for (std::size_t e = 0; e < report.val_losses.size(); ++e) {
      err << "radq qlora-demo: epoch " << e << " validation loss " << fixed(report.val_losses[e], 6) << '\n';
    }
  }
  summary << "loss: initial " << fixed(report.initial_train_loss) << " -> final " << fixed(report.final_train_loss)
          << " (ratio " << fixed(report.final_train_loss / report.initial_train_loss) << ") after "
          << report.steps_run << " steps\n";
  summary << "best epoch " << report.best_epoch << ", validation loss " << fixed(report.best_val_loss)
          << (report.stopped_early ? ", stopped early" : "") << '\n';
  summary << "frozen base unchanged: sha256 " << report.frozen_hashes_after[1] << '\n';

  if (!o.checkpoint.empty()) {
    std::ofstream f(o.checkpoint, std::ios::binary);
    if (!f) throw InputError("cannot open checkpoint '" + o.checkpoint + "'");
    write_checkpoint(f, model.layer(), g.seed);
  }
  emit(g, out, to_json(report) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------- quantize

int cmd_quantize(const GlobalOptions& g, const QuantizeOptions& o, std::ostream& out) {
  require(o.input, "--input");
  require(g.out, "--out");
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw InputError("cannot open '" + o.input + "'");
  const Matrix w = read_dense_matrix(in);
  const QuantizedMatrix q = quantize_matrix(w, o.block_size, o.scale_width);
  const Matrix back = dequantize_matrix(q);

  double max_err = 0.0, sum_err = 0.0, max_scale = 0.0;
  bool bound_holds = true;
  for (std::size_t f = 0; f < q.size(); ++f) {
    const auto i = static_cast<Eigen::Index>(f / q.cols()), j = static_cast<Eigen::Index>(f % q.cols());
    const double e = std::abs(w(i, j) - back(i, j));
    max_err = std::max(max_err, e);
    sum_err += e;
    bound_holds = bound_holds && e <= reconstruction_bound(q, f);
  }
  for (double s : q.scales()) max_scale = std::max(max_scale, s);

  const auto bytes = encode_xrq4(q);
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InputError("cannot open output '" + g.out + "'");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InputError("write failed for '" + g.out + "'");

  const MemoryFootprint fp = footprint(q, std::nullopt, o.scale_width);
  const std::uint64_t dense = dense_bytes(q.rows(), q.cols());
  json stats;
  stats["rows"] = q.rows();
  stats["cols"] = q.cols();
  stats["block_size"] = q.block_size();
  stats["scale_width_bytes"] = q.scale_width_bytes();
  stats["max_abs_error"] = max_err;
  stats["mean_abs_error"] = q.size() ? sum_err / static_cast<double>(q.size()) : 0.0;
  stats["max_block_scale"] = max_scale;
  stats["error_within_half_scale"] = bound_holds;
  stats["quantized_bytes"] = fp.total_bytes;
  stats["container_bytes"] = bytes.size();
  stats["dense16_bytes"] = dense;
  stats["storage_ratio"] = dense ? static_cast<double>(fp.total_bytes) / static_cast<double>(dense) : 0.0;
  out << stats.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"radq: report-generation metrics, 4-bit adapters and prompt tooling", "radq"};
  app.require_subcommand(1);
  GlobalOptions g;
  auto* o_seed = app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  auto* o_out = app.add_option("--out", g.out, "Output path (default: standard output)");
  app.add_flag("--verbose,-v", g.verbose, "Extra logging to standard error");
  app.add_option("--config", g.config, "JSON file of option values; flags take precedence");

  EvaluateOptions ev;
  auto* sub_eval = app.add_subcommand("evaluate", "Score candidate reports against references")->fallthrough();
  auto* o_cand = sub_eval->add_option("--candidates", ev.candidates, "JSONL {id, text}");
  auto* o_refs = sub_eval->add_option("--references", ev.references, "JSONL {id, text|report}");
  auto* o_agg = sub_eval->add_option("--aggregation", ev.aggregation, "corpus or sentence")->capture_default_str();
  auto* o_smooth = sub_eval->add_option("--smoothing", ev.smoothing, "BLEU smoothing: none or epsilon")->capture_default_str();
  auto* o_alpha = sub_eval->add_option("--alpha", ev.alpha, "METEOR precision weight")->capture_default_str();
  auto* o_gamma = sub_eval->add_option("--gamma", ev.gamma, "METEOR penalty weight")->capture_default_str();
  auto* o_fbeta = sub_eval->add_option("--frag-beta", ev.frag_beta, "METEOR penalty exponent")->capture_default_str();
  auto* o_rbeta = sub_eval->add_option("--rouge-beta", ev.rouge_beta, "ROUGE-L recall weight")->capture_default_str();

  SplitOptions sp;
  auto* sub_split = app.add_subcommand("split", "Seeded 70/10/20 split of a study corpus")->fallthrough();
  auto* o_sp_corpus = sub_split->add_option("--corpus", sp.corpus, "Study records, JSONL");

  PromptOptions pr;
  auto* sub_prompt = app.add_subcommand("prompt", "Render prompts for one split partition")->fallthrough();
  auto* o_pr_corpus = sub_prompt->add_option("--corpus", pr.corpus, "Study records, JSONL");
  auto* o_pr_manifest = sub_prompt->add_option("--manifest", pr.manifest, "Split manifest from 'radq split'");
  auto* o_pr_part = sub_prompt->add_option("--partition", pr.partition, "train, val or test")->capture_default_str();
  auto* o_pr_mode = sub_prompt->add_option("--mode", pr.mode, "train or infer")->capture_default_str();

  DemoOptions dm;
  auto* sub_demo = app.add_subcommand("qlora-demo", "Train a 4-bit base + adapter toy model")->fallthrough();
  auto* o_vocab = sub_demo->add_option("--vocab", dm.vocab)->capture_default_str();
  auto* o_hidden = sub_demo->add_option("--hidden", dm.hidden)->capture_default_str();
  auto* o_rank = sub_demo->add_option("--rank", dm.rank)->capture_default_str();
  auto* o_block = sub_demo->add_option("--block-size", dm.block_size)->capture_default_str();
  auto* o_tsize = sub_demo->add_option("--train-size", dm.train_size)->capture_default_str();
  auto* o_vsize = sub_demo->add_option("--val-size", dm.val_size)->capture_default_str();
  auto* o_ctx = sub_demo->add_option("--context-len", dm.context_len)->capture_default_str();
  auto* o_batch = sub_demo->add_option("--batch-size", dm.batch_size)->capture_default_str();
  auto* o_accum = sub_demo->add_option("--grad-accum-steps", dm.grad_accum_steps)->capture_default_str();
  auto* o_epochs = sub_demo->add_option("--epochs", dm.epochs)->capture_default_str();
  auto* o_lr = sub_demo->add_option("--lr-max", dm.lr_max)->capture_default_str();
  auto* o_warm = sub_demo->add_option("--warmup-steps", dm.warmup_steps)->capture_default_str();
  auto* o_wd = sub_demo->add_option("--weight-decay", dm.weight_decay)->capture_default_str();
  auto* o_pat = sub_demo->add_option("--patience", dm.patience, "Early-stopping patience")->capture_default_str();
  auto* o_8bit = sub_demo->add_flag("--eight-bit", dm.eight_bit, "8-bit optimizer state");
  auto* o_targets = sub_demo->add_option("--targets", dm.targets, "Adapter target spec JSON to count");
  auto* o_ckpt = sub_demo->add_option("--checkpoint", dm.checkpoint, "Write the trained adapter here");

  QuantizeOptions qz;
  auto* sub_quant = app.add_subcommand("quantize", "Quantize a dense matrix to an XRQ4 container")->fallthrough();
  auto* o_input = sub_quant->add_option("--input", qz.input, "Dense matrix, CSV or XRDM binary");
  auto* o_qblock = sub_quant->add_option("--block-size", qz.block_size)->capture_default_str();
  auto* o_width = sub_quant->add_option("--scale-width", qz.scale_width, "Scale bytes: 4 or 8")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "radq: " << e.what() << "\nRun with --help for usage.\n";
    return kExitContract;
  }

  try {
    json file_config = read_config(g.config);
    ConfigOverlay cfg(std::move(file_config), g.config.empty() ? fs::path{} : fs::path(g.config).parent_path());
    cfg.bind(o_seed, "seed", g.seed);
    cfg.bind_path(o_out, "out", g.out);
    json resolved = {{"seed", g.seed}, {"out", g.out}, {"verbose", g.verbose}, {"config", g.config}};
    CLI::App* sub = app.get_subcommands().front();

    if (sub == sub_eval) {
      cfg.bind_path(o_cand, "candidates", ev.candidates);
      cfg.bind_path(o_refs, "references", ev.references);
      cfg.bind(o_agg, "aggregation", ev.aggregation);
      cfg.bind(o_smooth, "smoothing", ev.smoothing);
      cfg.bind(o_alpha, "alpha", ev.alpha);
      cfg.bind(o_gamma, "gamma", ev.gamma);
      cfg.bind(o_fbeta, "frag_beta", ev.frag_beta);
      cfg.bind(o_rbeta, "rouge_beta", ev.rouge_beta);
      cfg.reject_unknown_keys();
      resolved.update({{"candidates", ev.candidates}, {"references", ev.references}, {"aggregation", ev.aggregation},
                       {"smoothing", ev.smoothing}, {"alpha", ev.alpha}, {"gamma", ev.gamma},
                       {"frag_beta", ev.frag_beta}, {"rouge_beta", ev.rouge_beta}});
      log_config(err, "evaluate", resolved);
      return cmd_evaluate(g, ev, out);
    }
    if (sub == sub_split) {
      cfg.bind_path(o_sp_corpus, "corpus", sp.corpus);
      cfg.reject_unknown_keys();
      resolved["corpus"] = sp.corpus;
      log_config(err, "split", resolved);
      return cmd_split(g, sp, out, err);
    }
    if (sub == sub_prompt) {
      cfg.bind_path(o_pr_corpus, "corpus", pr.corpus);
      cfg.bind_path(o_pr_manifest, "manifest", pr.manifest);
      cfg.bind(o_pr_part, "partition", pr.partition);
      cfg.bind(o_pr_mode, "mode", pr.mode);
      cfg.reject_unknown_keys();
      resolved.update({{"corpus", pr.corpus}, {"manifest", pr.manifest}, {"partition", pr.partition},
                       {"mode", pr.mode}, {"instruction_version", kPromptInstructionVersion}});
      log_config(err, "prompt", resolved);
      return cmd_prompt(g, pr, out, err);
    }
    if (sub == sub_demo) {
      cfg.bind(o_vocab, "vocab", dm.vocab);
      cfg.bind(o_hidden, "hidden", dm.hidden);
      cfg.bind(o_rank, "rank", dm.rank);
      cfg.bind(o_block, "block_size", dm.block_size);
      cfg.bind(o_tsize, "train_size", dm.train_size);
      cfg.bind(o_vsize, "val_size", dm.val_size);
      cfg.bind(o_ctx, "context_len", dm.context_len);
      cfg.bind(o_batch, "batch_size", dm.batch_size);
      cfg.bind(o_accum, "grad_accum_steps", dm.grad_accum_steps);
      cfg.bind(o_epochs, "epochs", dm.epochs);
      cfg.bind(o_lr, "lr_max", dm.lr_max);
      cfg.bind(o_warm, "warmup_steps", dm.warmup_steps);
      cfg.bind(o_wd, "weight_decay", dm.weight_decay);
      cfg.bind(o_pat, "patience", dm.patience);
      cfg.bind(o_8bit, "eight_bit", dm.eight_bit);
      cfg.bind_path(o_targets, "targets", dm.targets);
      cfg.bind_path(o_ckpt, "checkpoint", dm.checkpoint);
      cfg.reject_unknown_keys();
      resolved.update({{"vocab", dm.vocab}, {"hidden", dm.hidden}, {"rank", dm.rank}, {"block_size", dm.block_size},
                       {"train_size", dm.train_size}, {"val_size", dm.val_size}, {"context_len", dm.context_len},
                       {"batch_size", dm.batch_size}, {"grad_accum_steps", dm.grad_accum_steps},
                       {"epochs", dm.epochs}, {"lr_max", dm.lr_max}, {"warmup_steps", dm.warmup_steps},
                       {"weight_decay", dm.weight_decay}, {"patience", dm.patience}, {"eight_bit", dm.eight_bit},
                       {"targets", dm.targets}, {"checkpoint", dm.checkpoint}});
      log_config(err, "qlora-demo", resolved);
      return cmd_qlora_demo(g, dm, out, err);
    }
    cfg.bind_path(o_input, "input", qz.input);
    cfg.bind(o_qblock, "block_size", qz.block_size);
    cfg.bind(o_width, "scale_width", qz.scale_width);
    cfg.reject_unknown_keys();
    resolved.update({{"input", qz.input}, {"block_size", qz.block_size}, {"scale_width", qz.scale_width}});
    log_config(err, "quantize", resolved);
    return cmd_quantize(g, qz, out);
  } catch (const InputError& e) {
    err << "radq: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ContractError& e) {
    err << "radq: error: " << e.what() << '\n';
    return kExitContract;
  } catch (const NumericalError& e) {
    err << "radq: error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "radq: error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace radq::cli
