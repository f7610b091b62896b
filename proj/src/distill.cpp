#include "dse/distill.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dse/error.hpp"
#include "train_common.hpp"

namespace dse {

ad::Node* distill_loss_nodes(ad::Tape& tape, ad::Node* student_logits,
                             const std::optional<Tensor>& teacher_logits, double label,
                             const LossConfig& cfg) {
  cfg.validate();
  const std::size_t n = task_output_dim(cfg.task);
  if (student_logits->value.size() != n) {
    throw ShapeError("distill_loss: student logits " + student_logits->value.shape_str() +
                     " vs task dimension " + std::to_string(n));
  }

  ad::Node* dstl = nullptr;
  if (cfg.alpha > 0.0) {
    if (!teacher_logits) {
      throw ConfigError("distill_loss: alpha > 0 requires cached teacher logits");
    }
    if (teacher_logits->size() != n) {
      throw ShapeError("distill_loss: teacher logits " + teacher_logits->shape_str() +
                       " vs task dimension " + std::to_string(n));
    }
    Tensor t = *teacher_logits;
    ad::Node* diff = tape.sub(student_logits, tape.input(Tensor({1, n}, std::vector<double>(
                                                                            t.data(),
                                                                            t.data() + n))));
    dstl = tape.sum_all(tape.mul(diff, diff));
  }

  ad::Node* lbl = nullptr;
  if (cfg.alpha < 1.0) {
    if (task_is_classification(cfg.task)) {
      lbl = tape.cross_entropy(student_logits, static_cast<std::size_t>(label));
    } else {
      ad::Node* diff = tape.sub(student_logits, tape.input(Tensor::row({label})));
      lbl = tape.sum_all(tape.mul(diff, diff));
    }
  }

  if (cfg.alpha == 0.0) return lbl;
  if (cfg.alpha == 1.0) return dstl;
  return tape.add(tape.scale(dstl, cfg.alpha), tape.scale(lbl, 1.0 - cfg.alpha));
}

double distill_loss(const Tensor& student_logits, const std::optional<Tensor>& teacher_logits,
                    double label, const LossConfig& cfg) {
  ad::Tape tape;
  Tensor s({1, student_logits.size()},
           std::vector<double>(student_logits.data(), student_logits.data() + student_logits.size()));
  return distill_loss_nodes(tape, tape.input(std::move(s)), teacher_logits, label, cfg)->value[0];
}

ad::Node* student_loss_nodes(ad::Tape& tape, StudentModel& s, const TrainingExample& ex,
                             const LossConfig& cfg) {
  ad::Node* u = embed_sentence_nodes(tape, s, ex.sentence_a);
  ad::Node* v = embed_sentence_nodes(tape, s, ex.sentence_b);
  ad::Node* logits = similarity_head_nodes(tape, s, u, v);
  return distill_loss_nodes(tape, logits, ex.teacher_logits, ex.label, cfg);
}

StudentTrainResult train_student(const std::vector<TrainingExample>& dataset,
                                 const StudentModel& init, const LossConfig& loss_cfg,
                                 const TrainConfig& train_cfg) {
  loss_cfg.validate();
  train_cfg.validate();
  if (dataset.empty()) throw InputError("train_student: empty dataset");
  detail::validate_labels(dataset, loss_cfg.task);
  if (loss_cfg.alpha > 0.0) {
    for (const auto& ex : dataset) {
      if (!ex.teacher_logits) {
        throw ConfigError("train_student: alpha > 0 requires cached teacher logits");
      }
    }
  }

  StudentTrainResult result;
  result.model = init;
  StudentModel& model = result.model;
  if (train_cfg.epochs == 0) return result;

  const auto split = detail::dev_split(dataset.size(), train_cfg.dev_fraction, train_cfg.seed);
  std::vector<Parameter*> all_params;
  for (auto& [name, p] : model.named_params()) all_params.push_back(p);
  std::vector<Parameter*> trainable =
      train_cfg.freeze_encoder ? model.head_params() : all_params;
  const AdamConfig adam{train_cfg.learning_rate, 0.9, 0.999, 1e-8};

  SeededRng shuffle_rng(train_cfg.seed ^ 0xA3EC647659359ACDULL);
  StudentModel best = model;
  double best_dev = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    shuffle_rng.shuffle(order);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.minibatch) {
      const std::size_t end = std::min(order.size(), start + train_cfg.minibatch);
      for (std::size_t i = start; i < end; ++i) {
        ad::Tape tape;
        ad::Node* loss = student_loss_nodes(tape, model, dataset[order[i]], loss_cfg);
        train_loss += loss->value[0];
        tape.backward(loss);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (Parameter* p : trainable) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= inv;
        adam_step(*p, adam);
      }
      if (train_cfg.freeze_encoder) {
        for (Parameter* p : all_params) p->zero_grad();
      }
    }
    train_loss /= static_cast<double>(order.size());

    double dev_loss = std::numeric_limits<double>::quiet_NaN();
    double dev_metric = std::numeric_limits<double>::quiet_NaN();
    if (!split.dev.empty()) {
      dev_loss = 0.0;
      dev_metric = 0.0;
      for (std::size_t i : split.dev) {
        ad::Tape tape;
        ad::Node* loss = student_loss_nodes(tape, model, dataset[i], loss_cfg);
        dev_loss += loss->value[0];
        const Tensor logits =
            student_score(model, dataset[i].sentence_a, dataset[i].sentence_b);
        if (task_is_classification(loss_cfg.task)) {
          dev_metric +=
              detail::argmax_logit(logits) == static_cast<std::size_t>(dataset[i].label);
        } else {
          const double d = logits[0] - dataset[i].label;
          dev_metric += d * d;
        }
      }
      dev_loss /= static_cast<double>(split.dev.size());
      dev_metric /= static_cast<double>(split.dev.size());
    }
    result.trace.push_back({epoch, train_loss, dev_loss, dev_metric});
    // Without a held-out split, keep the final model instead of an
    // early-stopped one.
    if (split.dev.empty() || dev_loss < best_dev) {
      best_dev = dev_loss;
      best = model;
    }
  }
  result.model = best;
  return result;
}

void write_loss_trace(const std::string& path, const std::vector<EpochStats>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write loss trace: " + path);
  out << "epoch,train_loss,dev_loss,dev_metric\n";
  out.precision(17);
  for (const auto& e : trace) {
    out << e.epoch << "," << e.train_loss << "," << e.dev_loss << "," << e.dev_metric << "\n";
  }
}

namespace {

// Average ranks with ties sharing the mean rank.
std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // undefined, not 0
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

Metrics compute_metrics(const std::vector<Tensor>& predictions, const std::vector<double>& labels,
                        TaskKind task) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw InputError("compute_metrics: need equal-length nonempty sequences");
  }
  Metrics m;
  if (task_is_classification(task)) {
    std::size_t correct = 0, tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const std::size_t pred = detail::argmax_logit(predictions[i]);
      const std::size_t truth = static_cast<std::size_t>(labels[i]);
      correct += pred == truth;
      tp += pred == 1 && truth == 1;
      fp += pred == 1 && truth != 1;
      fn += pred != 1 && truth == 1;
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
    if (task == TaskKind::kBinary) {
      const double denom = static_cast<double>(2 * tp + fp + fn);
      m.f1 = denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
    }
  } else {
    std::vector<double> preds(predictions.size());
    double mse = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      preds[i] = predictions[i][0];
      const double d = preds[i] - labels[i];
      mse += d * d;
    }
    m.mse = mse / static_cast<double>(predictions.size());
    m.pearson = pearson(preds, labels);
    m.spearman = pearson(average_ranks(preds), average_ranks(labels));
  }
  return m;
}

}  // namespace dse
