#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dse/tensor.hpp"

namespace dse {

// A trainable tensor plus its gradient and Adam state.
struct Parameter {
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  std::uint64_t step_count = 0;

  Parameter() = default;
  explicit Parameter(Tensor v)
      : value(std::move(v)),
        grad(Tensor::zeros_like(value)),
        adam_m(Tensor::zeros_like(value)),
        adam_v(Tensor::zeros_like(value)) {}

  void zero_grad() { grad.fill(0.0); }
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction. Consumes p.grad (zeroed afterward)
// and increments step_count.
void adam_step(Parameter& p, const AdamConfig& cfg);

namespace ad {

// One value on the tape. Gradients are buffered per node during a
// backward() run; leaf nodes flush into their Parameter.
struct Node {
  Tensor value;
  Tensor grad;
  std::function<void(Node&)> back;
  bool needs_grad = false;
};

// Reverse-mode tape covering exactly the ops this artifact needs.
// Forward values are computed eagerly at op-construction time; each op
// records a closure that scatters its output gradient to its parents.
class Tape {
 public:
  Node* input(Tensor v);          // constant, no gradient
  Node* leaf(Parameter& p);       // gradient accumulates into p.grad

  Node* matmul(Node* a, Node* b);
  Node* transpose(Node* a);
  Node* add(Node* a, Node* b);
  Node* sub(Node* a, Node* b);
  Node* mul(Node* a, Node* b);    // Hadamard
  Node* add_row(Node* a, Node* bias);  // bias is 1 x n, broadcast over rows
  Node* relu(Node* a);
  Node* abs(Node* a);
  Node* scale(Node* a, double c);
  Node* softmax_rows(Node* a);
  Node* layer_norm(Node* x, Node* gamma, Node* beta, double eps);
  Node* slice_cols(Node* a, std::size_t start, std::size_t len);
  Node* slice_rows(Node* a, std::size_t start, std::size_t len);
  Node* concat_cols(const std::vector<Node*>& parts);
  Node* gather_rows(Node* table, std::vector<std::size_t> idx);
  Node* sum_all(Node* a);  // 1 x 1
  // Softmax cross-entropy of a 1 x n logit row against a class index,
  // computed via logsumexp; backward is softmax minus one-hot.
  Node* cross_entropy(Node* logits, std::size_t label);

  // loss must be 1 x 1. Runs the tape in reverse creation order.
  void backward(Node* loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  Node* make(Tensor v, std::initializer_list<Node*> parents, std::function<void(Node&)> back);
  std::vector<std::unique_ptr<Node>> nodes_;
};

}  // namespace ad

// Evaluates the loss; when compute_grad is set, must also leave analytic
// gradients in every checked Parameter's grad (grads are zeroed first by
// the harness).
using GradLossFn = std::function<double(bool compute_grad)>;

// Finite-difference check of analytic gradients over a seeded sample of
// 64 coordinates per tensor, using a fourth-order five-point stencil so
// the h^2 truncation term of a plain central difference cannot dominate.
// Returns the maximum relative error, falling back to absolute error
// where the numeric derivative is below 1e-4, under which rounding
// noise (~ulp(f)/h) makes relative comparison meaningless at double
// precision. Coordinates where the second- and fourth-order estimates
// disagree (a ReLU/|.| kink within the stencil reach, making the numeric
// derivative itself unreliable) are skipped; that test is independent of
// the analytic value, so it cannot mask a wrong gradient. A kink closer
// to the base point than h contaminates both estimates identically and
// is undetectable here, so callers must pick base points (weights,
// inputs) away from nondifferentiable loci.
double finite_diff_check(const GradLossFn& loss_fn, const std::vector<Parameter*>& params,
                         double h, std::uint64_t seed = 20240601);

}  // namespace dse
