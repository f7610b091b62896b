// Command-line front end chaining the full pipeline:
//   gen-data -> train-teacher -> cache-scores -> distill -> eval
// plus build-index, query and benchmark. Every subcommand writes its
// artifact and a JSON run manifest next to it.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "dse/checkpoint.hpp"
#include "dse/dataset.hpp"
#include "dse/distill.hpp"
#include "dse/error.hpp"
#include "dse/hash.hpp"
#include "dse/retrieval.hpp"

namespace {

using nlohmann::json;

void write_manifest(const std::string& artifact_path, const std::string& command, json config,
                    json artifacts, json metrics = json::object()) {
  json manifest{{"tool", "dse"},
                {"manifest_version", 1},
                {"command", command},
                {"config", std::move(config)},
                {"artifacts", std::move(artifacts)},
                {"metrics", std::move(metrics)}};
  const std::string path = artifact_path + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dse::IoError("cannot write manifest: " + path);
  out << manifest.dump(2) << "\n";
}

json metrics_to_json(const dse::Metrics& m) {
  json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    j[key] = v ? json(*v) : json(nullptr);
  };
  put("accuracy", m.accuracy);
  put("f1", m.f1);
  put("pearson", m.pearson);
  put("spearman", m.spearman);
  put("mse", m.mse);
  return j;
}

struct EncoderFlags {
  std::size_t layers = 4, hidden = 64, heads = 4, ffn = 256, max_len = 32, vocab = 512;

  void attach(CLI::App* cmd) {
    cmd->add_option("--layers", layers, "Encoder layers");
    cmd->add_option("--hidden", hidden, "Hidden width");
    cmd->add_option("--heads", heads, "Attention heads");
    cmd->add_option("--ffn", ffn, "FFN width");
    cmd->add_option("--max-len", max_len, "Max sequence length");
    cmd->add_option("--vocab-size", vocab, "Vocabulary size (reserved ids included)");
  }
  dse::EncoderConfig to_config() const {
    dse::EncoderConfig cfg;
    cfg.num_layers = layers;
    cfg.hidden = hidden;
    cfg.heads = heads;
    cfg.ffn = ffn;
    cfg.max_seq_len = max_len;
    cfg.vocab_size = vocab;
    return cfg;
  }
  json to_json() const { return dse::encoder_config_to_json(to_config()); }
};

dse::Metrics eval_model_on_file(const std::string& model_path, const std::string& data_path,
                                const dse::Vocabulary& vocab) {
  const auto [examples, task] = dse::parse_dataset(data_path, vocab);
  if (examples.empty()) throw dse::InputError("eval: dataset has no rows");
  std::vector<dse::Tensor> preds;
  std::vector<double> labels;
  preds.reserve(examples.size());
  const std::string kind = dse::checkpoint_kind(model_path);
  if (kind == "teacher") {
    dse::TeacherModel model = dse::load_teacher(model_path);
    if (model.task != task) throw dse::ConfigError("eval: model task does not match dataset");
    for (const auto& ex : examples) {
      preds.push_back(dse::teacher_score(model, ex.sentence_a, ex.sentence_b));
      labels.push_back(ex.label);
    }
  } else {
    dse::StudentModel model = dse::load_student(model_path);
    if (model.task != task) throw dse::ConfigError("eval: model task does not match dataset");
    for (const auto& ex : examples) {
      preds.push_back(dse::student_score(model, ex.sentence_a, ex.sentence_b));
      labels.push_back(ex.label);
    }
  }
  return dse::compute_metrics(preds, labels, task);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Distilled sentence embedding pipeline"};
  app.require_subcommand(1);

  // --- gen-data ---
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic sentence-pair dataset");
  std::string gen_task = "binary", gen_out = "data.tsv", gen_vocab_out, gen_dev_out;
  std::size_t gen_size = 4000, gen_dev_size = 0, gen_vocab_size = 512, gen_topics = 8;
  std::uint64_t gen_seed = 1;
  gen->add_option("--task", gen_task, "binary | multiclass | regression");
  gen->add_option("--size", gen_size, "Training rows")->check(CLI::Range(10, 100000000));
  gen->add_option("--dev-size", gen_dev_size, "Extra rows written to --dev-out");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output TSV path");
  gen->add_option("--dev-out", gen_dev_out, "Held-out TSV path (with --dev-size)");
  gen->add_option("--vocab-out", gen_vocab_out, "Write the synthetic vocabulary here");
  gen->add_option("--vocab-size", gen_vocab_size, "Vocabulary size");
  gen->add_option("--topics", gen_topics, "Latent topic count");

  // --- train-teacher ---
  auto* tt = app.add_subcommand("train-teacher", "Fine-tune the cross-attentive teacher");
  std::string tt_data, tt_vocab, tt_out = "teacher.ckpt", tt_trace;
  std::size_t tt_epochs = 20, tt_batch = 32;
  double tt_lr = 1e-3, tt_dev_fraction = 0.1;
  std::uint64_t tt_seed = 1;
  EncoderFlags tt_enc;
  tt->add_option("--data", tt_data, "Training TSV")->required();
  tt->add_option("--vocab", tt_vocab, "Vocabulary file")->required();
  tt->add_option("--out", tt_out, "Checkpoint path");
  tt->add_option("--trace-out", tt_trace, "Loss trace CSV path");
  tt->add_option("--epochs", tt_epochs, "Epochs");
  tt->add_option("--batch", tt_batch, "Minibatch size");
  tt->add_option("--lr", tt_lr, "Learning rate");
  tt->add_option("--dev-fraction", tt_dev_fraction, "Dev split fraction");
  tt->add_option("--seed", tt_seed, "Seed");
  tt_enc.attach(tt);

  // --- cache-scores ---
  auto* cs = app.add_subcommand("cache-scores", "Append teacher logits to a dataset");
  std::string cs_teacher, cs_data, cs_out = "scored.tsv", cs_vocab;
  cs->add_option("--teacher", cs_teacher, "Teacher checkpoint")->required();
  cs->add_option("--data", cs_data, "Dataset TSV")->required();
  cs->add_option("--vocab", cs_vocab, "Vocabulary file")->required();
  cs->add_option("--out", cs_out, "Scored TSV path");

  // --- distill ---
  auto* ds = app.add_subcommand("distill", "Train the Siamese student");
  std::string ds_data, ds_vocab, ds_out = "student.ckpt", ds_trace, ds_init_teacher;
  double ds_alpha = 0.5, ds_lr = 1e-3, ds_dev_fraction = 0.1;
  std::size_t ds_epochs = 20, ds_batch = 32, ds_head_hidden = 64;
  std::uint64_t ds_seed = 1;
  bool ds_freeze = false;
  EncoderFlags ds_enc;
  ds->add_option("--data", ds_data, "Scored TSV (teacher logits required when alpha > 0)")
      ->required();
  ds->add_option("--vocab", ds_vocab, "Vocabulary file")->required();
  ds->add_option("--out", ds_out, "Checkpoint path");
  ds->add_option("--trace-out", ds_trace, "Loss trace CSV path");
  ds->add_option("--alpha", ds_alpha, "Distillation mixing weight")
      ->check(CLI::Range(0.0, 1.0));
  ds->add_flag("--freeze-encoder", ds_freeze, "Train only the similarity head");
  ds->add_option("--epochs", ds_epochs, "Epochs");
  ds->add_option("--batch", ds_batch, "Minibatch size");
  ds->add_option("--lr", ds_lr, "Learning rate");
  ds->add_option("--dev-fraction", ds_dev_fraction, "Dev split fraction");
  ds->add_option("--head-hidden", ds_head_hidden, "Similarity head hidden width r");
  ds->add_option("--seed", ds_seed, "Seed");
  ds->add_option("--init-from-teacher", ds_init_teacher,
                 "Initialize the student encoder from this teacher checkpoint");
  ds_enc.attach(ds);

  // --- eval ---
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string ev_model, ev_data, ev_vocab, ev_out = "eval.json";
  ev->add_option("--model", ev_model, "Teacher or student checkpoint")->required();
  ev->add_option("--data", ev_data, "Dataset TSV")->required();
  ev->add_option("--vocab", ev_vocab, "Vocabulary file")->required();
  ev->add_option("--out", ev_out, "Metrics JSON path");

  // --- build-index ---
  auto* bi = app.add_subcommand("build-index", "Precompute catalog embeddings");
  std::string bi_student, bi_catalog, bi_vocab, bi_out = "catalog.dseidx";
  bi->add_option("--student", bi_student, "Student checkpoint")->required();
  bi->add_option("--catalog", bi_catalog, "Text file, one sentence per line")->required();
  bi->add_option("--vocab", bi_vocab, "Vocabulary file")->required();
  bi->add_option("--out", bi_out, "Index path");

  // --- query ---
  auto* qu = app.add_subcommand("query", "Rank a catalog against a query sentence");
  std::string qu_index, qu_student, qu_vocab, qu_text;
  std::size_t qu_k = 10;
  int qu_rank_logit = -1;
  qu->add_option("--index", qu_index, "Index file")->required();
  qu->add_option("--student", qu_student, "Student checkpoint")->required();
  qu->add_option("--vocab", qu_vocab, "Vocabulary file")->required();
  qu->add_option("--text", qu_text, "Query sentence")->required();
  qu->add_option("--k", qu_k, "Results to return");
  qu->add_option("--rank-logit", qu_rank_logit, "Scoring logit index (-1 = last)");

  // --- benchmark ---
  auto* bm = app.add_subcommand("benchmark", "Time the teacher path against the DSE path");
  std::string bm_scenario = "online", bm_teacher, bm_student, bm_out = "benchmark.json";
  std::size_t bm_n = 10000;
  std::uint64_t bm_seed = 1;
  EncoderFlags bm_enc;
  bm->add_option("--scenario", bm_scenario, "offline | online")
      ->check(CLI::IsMember({"offline", "online"}));
  bm->add_option("--n", bm_n, "Catalog size");
  bm->add_option("--seed", bm_seed, "Catalog seed");
  bm->add_option("--teacher", bm_teacher, "Teacher checkpoint (fresh init when omitted)");
  bm->add_option("--student", bm_student, "Student checkpoint (fresh init when omitted)");
  bm->add_option("--out", bm_out, "Report JSON path");
  bm_enc.attach(bm);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    dse::SyntheticConfig cfg;
    cfg.seed = gen_seed;
    cfg.size = gen_size + gen_dev_size;
    cfg.task = dse::task_from_name(gen_task);
    cfg.vocab_size = gen_vocab_size;
    cfg.topics = gen_topics;
    const dse::Vocabulary vocab = dse::Vocabulary::synthetic(gen_vocab_size);
    dse::DatasetFileContent all = dse::gen_synthetic(cfg, vocab);
    dse::DatasetFileContent train = all;
    json artifacts;
    if (gen_dev_size > 0) {
      if (gen_dev_out.empty()) throw dse::ConfigError("gen-data: --dev-size needs --dev-out");
      dse::DatasetFileContent dev = all;
      dev.rows.assign(all.rows.end() - static_cast<std::ptrdiff_t>(gen_dev_size),
                      all.rows.end());
      train.rows.resize(gen_size);
      dse::write_dataset_file(gen_dev_out, dev);
      artifacts[gen_dev_out] = dse::file_checksum(gen_dev_out);
    }
    dse::write_dataset_file(gen_out, train);
    artifacts[gen_out] = dse::file_checksum(gen_out);
    if (!gen_vocab_out.empty()) {
      vocab.save(gen_vocab_out);
      artifacts[gen_vocab_out] = dse::file_checksum(gen_vocab_out);
    }
    write_manifest(gen_out, "gen-data",
                   json{{"task", gen_task},
                        {"size", gen_size},
                        {"dev_size", gen_dev_size},
                        {"seed", gen_seed},
                        {"vocab_size", gen_vocab_size},
                        {"topics", gen_topics}},
                   artifacts);
    return 0;
  }

  if (tt->parsed()) {
    const dse::Vocabulary vocab = dse::Vocabulary::load(tt_vocab);
    const auto [examples, task] = dse::parse_dataset(tt_data, vocab);
    dse::TrainConfig cfg;
    cfg.epochs = tt_epochs;
    cfg.minibatch = tt_batch;
    cfg.learning_rate = tt_lr;
    cfg.seed = tt_seed;
    cfg.dev_fraction = tt_dev_fraction;
    dse::TeacherTrainResult result = dse::fine_tune_teacher(examples, tt_enc.to_config(), task, cfg);
    dse::save_teacher(result.model, tt_out);
    json artifacts{{tt_out, dse::file_checksum(tt_out)}};
    if (!tt_trace.empty()) {
      dse::write_loss_trace(tt_trace, result.trace);
      artifacts[tt_trace] = dse::file_checksum(tt_trace);
    }
    json metrics = json::object();
    if (!result.trace.empty()) {
      metrics["final_train_loss"] = result.trace.back().train_loss;
      metrics["final_dev_loss"] = result.trace.back().dev_loss;
      metrics["final_dev_metric"] = result.trace.back().dev_metric;
    }
    write_manifest(tt_out, "train-teacher",
                   json{{"data", tt_data},
                        {"task", dse::task_name(task)},
                        {"epochs", tt_epochs},
                        {"batch", tt_batch},
                        {"lr", tt_lr},
                        {"dev_fraction", tt_dev_fraction},
                        {"seed", tt_seed},
                        {"encoder", tt_enc.to_json()}},
                   artifacts, metrics);
    return 0;
  }

  if (cs->parsed()) {
    const dse::Vocabulary vocab = dse::Vocabulary::load(cs_vocab);
    dse::TeacherModel teacher = dse::load_teacher(cs_teacher);
    dse::DatasetFileContent content = dse::read_dataset_file(cs_data);
    content.logit_dim = teacher.output_dim();
    for (auto& row : content.rows) {
      const dse::Tensor logits = dse::teacher_score(teacher, tokenize(row.sentence_a, vocab),
                                                    tokenize(row.sentence_b, vocab));
      row.logits.assign(logits.data(), logits.data() + logits.size());
    }
    dse::write_dataset_file(cs_out, content);
    write_manifest(cs_out, "cache-scores",
                   json{{"teacher", cs_teacher}, {"data", cs_data}},
                   json{{cs_out, dse::file_checksum(cs_out)}});
    return 0;
  }

  if (ds->parsed()) {
    const dse::Vocabulary vocab = dse::Vocabulary::load(ds_vocab);
    const auto [examples, task] = dse::parse_dataset(ds_data, vocab);
    dse::StudentModel init =
        ds_init_teacher.empty()
            ? dse::init_student(ds_enc.to_config(), task, ds_head_hidden, ds_seed)
            : dse::init_student_from_teacher(dse::load_teacher(ds_init_teacher), ds_head_hidden,
                                             ds_seed);
    dse::LossConfig loss_cfg{ds_alpha, task};
    dse::TrainConfig cfg;
    cfg.epochs = ds_epochs;
    cfg.minibatch = ds_batch;
    cfg.learning_rate = ds_lr;
    cfg.seed = ds_seed;
    cfg.freeze_encoder = ds_freeze;
    cfg.dev_fraction = ds_dev_fraction;
    dse::StudentTrainResult result = dse::train_student(examples, init, loss_cfg, cfg);
    dse::save_student(result.model, ds_out);
    json artifacts{{ds_out, dse::file_checksum(ds_out)}};
    if (!ds_trace.empty()) {
      dse::write_loss_trace(ds_trace, result.trace);
      artifacts[ds_trace] = dse::file_checksum(ds_trace);
    }
    json metrics = json::object();
    if (!result.trace.empty()) {
      metrics["final_train_loss"] = result.trace.back().train_loss;
      metrics["final_dev_loss"] = result.trace.back().dev_loss;
      metrics["final_dev_metric"] = result.trace.back().dev_metric;
    }
    write_manifest(ds_out, "distill",
                   json{{"data", ds_data},
                        {"task", dse::task_name(task)},
                        {"alpha", ds_alpha},
                        {"freeze_encoder", ds_freeze},
                        {"epochs", ds_epochs},
                        {"batch", ds_batch},
                        {"lr", ds_lr},
                        {"dev_fraction", ds_dev_fraction},
                        {"head_hidden", ds_head_hidden},
                        {"seed", ds_seed},
                        {"init_from_teacher", ds_init_teacher},
                        {"encoder", ds_enc.to_json()}},
                   artifacts, metrics);
    return 0;
  }

  if (ev->parsed()) {
    const dse::Vocabulary vocab = dse::Vocabulary::load(ev_vocab);
    const dse::Metrics metrics = eval_model_on_file(ev_model, ev_data, vocab);
    const json mj = metrics_to_json(metrics);
    std::ofstream out(ev_out, std::ios::binary);
    if (!out) throw dse::IoError("cannot write metrics: " + ev_out);
    out << mj.dump(2) << "\n";
    out.close();
    std::cout << mj.dump(2) << "\n";
    write_manifest(ev_out, "eval", json{{"model", ev_model}, {"data", ev_data}},
                   json{{ev_out, dse::file_checksum(ev_out)}}, mj);
    return 0;
  }

  if (bi->parsed()) {
    const dse::Vocabulary vocab = dse::Vocabulary::load(bi_vocab);
    dse::StudentModel student = dse::load_student(bi_student);
    std::ifstream in(bi_catalog);
    if (!in) throw dse::IoError("cannot open catalog: " + bi_catalog);
    std::vector<std::vector<int>> catalog;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) catalog.push_back(tokenize(line, vocab));
    }
    const dse::EmbeddingIndex index = dse::build_index(student, catalog);
    dse::save_index(index, bi_out);
    write_manifest(bi_out, "build-index",
                   json{{"student", bi_student},
                        {"catalog", bi_catalog},
                        {"N", index.count},
                        {"d", index.dim},
                        {"fingerprint", index.fingerprint}},
                   json{{bi_out, dse::file_checksum(bi_out)}});
    return 0;
  }

  if (qu->parsed()) {
    const dse::Vocabulary vocab = dse::Vocabulary::load(qu_vocab);
    dse::StudentModel student = dse::load_student(qu_student);
    const dse::EmbeddingIndex index = dse::load_index(qu_index);
    if (index.fingerprint != dse::model_fingerprint(student)) {
      throw dse::ConfigError("query: index fingerprint does not match the student checkpoint");
    }
    const auto results =
        dse::online_query(index, student, tokenize(qu_text, vocab), qu_k, qu_rank_logit);
    for (const auto& [id, score] : results) {
      std::cout << id << "\t" << score << "\n";
    }
    return 0;
  }

  if (bm->parsed()) {
    dse::TeacherModel teacher;
    dse::StudentModel student;
    const dse::EncoderConfig enc_cfg = bm_enc.to_config();
    if (bm_teacher.empty()) {
      teacher = dse::init_teacher(enc_cfg, dse::TaskKind::kBinary, bm_seed);
    } else {
      teacher = dse::load_teacher(bm_teacher);
    }
    if (bm_student.empty()) {
      student = dse::init_student(enc_cfg, dse::TaskKind::kBinary, 64, bm_seed + 1);
    } else {
      student = dse::load_student(bm_student);
    }
    dse::BenchmarkConfig cfg;
    cfg.scenario = bm_scenario;
    cfg.n = bm_n;
    cfg.seed = bm_seed;
    const dse::BenchmarkReport report = dse::run_benchmark(cfg, teacher, student);
    const json rj = dse::report_to_json(report);
    std::ofstream out(bm_out, std::ios::binary);
    if (!out) throw dse::IoError("cannot write report: " + bm_out);
    out << rj.dump(2) << "\n";
    out.close();
    std::cout << dse::report_to_table(report);
    write_manifest(bm_out, "benchmark",
                   json{{"scenario", bm_scenario}, {"n", bm_n}, {"seed", bm_seed}},
                   json{{bm_out, dse::file_checksum(bm_out)}}, rj);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const dse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
