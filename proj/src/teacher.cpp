#include "dse/teacher.hpp"

#include <cmath>
#include <limits>

#include "dse/error.hpp"
#include "train_common.hpp"

namespace dse {

std::vector<std::pair<std::string, Parameter*>> TeacherModel::named_params() {
  auto out = encoder.named_params();
  out.emplace_back("head.w", &head_w);
  out.emplace_back("head.b", &head_b);
  return out;
}

TeacherModel init_teacher(const EncoderConfig& cfg, TaskKind task, std::uint64_t seed) {
  SeededRng rng(seed);
  TeacherModel t;
  t.encoder = EncoderWeights::init(cfg, rng);
  t.head_w = Parameter(rng.normal_tensor({cfg.hidden, task_output_dim(task)}, cfg.init_stddev));
  t.head_b = Parameter(Tensor({1, task_output_dim(task)}));
  t.task = task;
  return t;
}

ad::Node* teacher_logits_nodes(ad::Tape& tape, TeacherModel& t, const std::vector<int>& a,
                               const std::vector<int>& b) {
  const SequenceInput input =
      trim_padding(build_pair_input(a, b, t.encoder.config.max_seq_len));
  std::vector<ad::Node*> states = encode_nodes(tape, input, t.encoder);
  ad::Node* cls = tape.slice_rows(states.back(), 0, 1);
  return tape.add_row(tape.matmul(cls, tape.leaf(t.head_w)), tape.leaf(t.head_b));
}

Tensor teacher_score(TeacherModel& t, const std::vector<int>& a, const std::vector<int>& b) {
  ad::Tape tape;
  return teacher_logits_nodes(tape, t, a, b)->value;
}

namespace {

ad::Node* teacher_loss_nodes(ad::Tape& tape, TeacherModel& t, const TrainingExample& ex) {
  ad::Node* logits = teacher_logits_nodes(tape, t, ex.sentence_a, ex.sentence_b);
  if (task_is_classification(t.task)) {
    return tape.cross_entropy(logits, static_cast<std::size_t>(ex.label));
  }
  ad::Node* diff = tape.sub(logits, tape.input(Tensor::row({ex.label})));
  return tape.sum_all(tape.mul(diff, diff));
}

}  // namespace

TeacherTrainResult fine_tune_teacher(const std::vector<TrainingExample>& dataset,
                                     const EncoderConfig& enc_cfg, TaskKind task,
                                     const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw InputError("fine_tune_teacher: empty dataset");
  detail::validate_labels(dataset, task);

  TeacherTrainResult result;
  result.model = init_teacher(enc_cfg, task, cfg.seed);
  TeacherModel& model = result.model;
  if (cfg.epochs == 0) return result;

  const auto split = detail::dev_split(dataset.size(), cfg.dev_fraction, cfg.seed);
  std::vector<Parameter*> params;
  for (auto& [name, p] : model.named_params()) params.push_back(p);
  const AdamConfig adam{cfg.learning_rate, 0.9, 0.999, 1e-8};

  SeededRng shuffle_rng(cfg.seed ^ 0xA3EC647659359ACDULL);
  TeacherModel best = model;
  double best_dev = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = split.train;
    shuffle_rng.shuffle(order);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      const std::size_t end = std::min(order.size(), start + cfg.minibatch);
      for (std::size_t i = start; i < end; ++i) {
        ad::Tape tape;
        ad::Node* loss = teacher_loss_nodes(tape, model, dataset[order[i]]);
        train_loss += loss->value[0];
        tape.backward(loss);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= inv;
        adam_step(*p, adam);
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
        ad::Node* loss = teacher_loss_nodes(tape, model, dataset[i]);
        dev_loss += loss->value[0];
        const Tensor logits = teacher_score(model, dataset[i].sentence_a, dataset[i].sentence_b);
        if (task_is_classification(task)) {
          dev_metric += detail::argmax_logit(logits) == static_cast<std::size_t>(dataset[i].label);
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

std::vector<TrainingExample> cache_teacher_scores(TeacherModel& t,
                                                  const std::vector<TrainingExample>& dataset) {
  std::vector<TrainingExample> out = dataset;
  for (auto& ex : out) {
    ex.teacher_logits = teacher_score(t, ex.sentence_a, ex.sentence_b);
  }
  return out;
}

}  // namespace dse
