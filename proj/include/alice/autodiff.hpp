#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace alice::ad {

using Shape = std::vector<int>;

int numel(const Shape& s);
std::string shape_str(const Shape& s);

/// A trainable array that outlives any single tape. Gradients are accumulated
/// into `grad` by Tape::backward for every tape the parameter was bound to.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string name, Shape shape);
  Parameter(std::string name, Shape shape, std::vector<double> init);

  int size() const { return static_cast<int>(value.size()); }
  void zero_grad();
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; values/grads live in the tape.
class Tensor {
 public:
  Tensor() = default;

  const Shape& shape() const;
  const std::vector<double>& values() const;
  /// Gradient of the last backward() loss w.r.t. this node.
  const std::vector<double>& grad() const;
  double scalar() const;  // requires numel() == 1
  int numel() const;
  int rows() const;  // rank-2 only
  int cols() const;

  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  explicit operator bool() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Define-by-run reverse-mode tape over dense double tensors. A tape is built
/// per minibatch and discarded; nodes are topologically ordered by
/// construction (inputs always precede consumers). Single-threaded during
/// construction and backward.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // --- leaves ---
  Tensor input(Shape shape, std::vector<double> values);
  Tensor input(Shape shape, const double* data);
  Tensor scalar(double v);
  /// Leaf bound to a persistent parameter; backward() accumulates into p.grad.
  Tensor param(Parameter& p);

  // --- ops ---
  Tensor matmul(Tensor a, Tensor b);
  Tensor add(Tensor a, Tensor b);  // same shape, or b an (1,n) row broadcast over a's rows
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);  // elementwise
  Tensor scale(Tensor a, double c);
  Tensor add_const(Tensor a, double c);
  Tensor neg(Tensor a) { return scale(a, -1.0); }
  Tensor tanh(Tensor a);
  Tensor relu(Tensor a);
  Tensor sigmoid(Tensor a);
  Tensor exp_(Tensor a);
  Tensor log_(Tensor a);
  Tensor square(Tensor a);
  Tensor abs_(Tensor a);
  Tensor softplus(Tensor a);
  /// log sigma(t) = -softplus(-t); finite for any representable logit.
  Tensor log_sigmoid(Tensor a);
  Tensor reduce_mean(Tensor a);  // -> shape {1}
  Tensor reduce_sum(Tensor a);   // -> shape {1}
  Tensor mean_rows(Tensor a);    // (B,n) -> (1,n)
  Tensor concat_cols(Tensor a, Tensor b);  // (B,n1),(B,n2) -> (B,n1+n2)
  /// Mean over rows of [logsumexp(row) - row[label]]; labels in [0, cols).
  Tensor cross_entropy_with_logits(Tensor logits, const std::vector<int>& labels);

  /// Reverse sweep from a scalar loss. Node gradients are recomputed from
  /// scratch (visiting each recorded op exactly once, in reverse order) and
  /// then accumulated into every bound Parameter's grad.
  void backward(const Tensor& loss);

  // --- inspection ---
  std::size_t num_nodes() const { return nodes_.size(); }
  struct NodeInfo {
    int a = -1, b = -1;        // input node ids (-1 when absent)
    const Parameter* bound = nullptr;
  };
  NodeInfo node_info(int id) const;
  /// True iff p is bound as a leaf of this tape.
  bool uses(const Parameter& p) const;

 private:
  friend class Tensor;
  enum class Op : std::uint8_t {
    Input, Param, MatMul, Add, AddRow, Sub, Mul, Scale, AddConst,
    Tanh, Relu, Sigmoid, Exp, Log, Square, Abs, Softplus, LogSigmoid,
    ReduceMean, ReduceSum, MeanRows, ConcatCols, XentLogits,
  };
  struct Node {
    Op op;
    Shape shape;
    std::vector<double> val;
    std::vector<double> grad;
    int a = -1, b = -1;
    double c = 0.0;
    Parameter* bound = nullptr;
    std::vector<int> labels;  // XentLogits only
  };

  Tensor push(Node n);
  const Node& node(int id) const { return nodes_[id]; }
  Node& node(int id) { return nodes_[id]; }
  Tensor unary(Op op, Tensor a);
  void check_same_tape(Tensor t) const;

  std::vector<Node> nodes_;
};

// Operator sugar so loss code reads like the math.
Tensor operator+(Tensor a, Tensor b);
Tensor operator-(Tensor a, Tensor b);
Tensor operator-(Tensor a);
Tensor operator*(Tensor a, Tensor b);
Tensor operator*(double c, Tensor a);
Tensor matmul(Tensor a, Tensor b);
Tensor tanh(Tensor a);
Tensor relu(Tensor a);
Tensor sigmoid(Tensor a);
Tensor log_sigmoid(Tensor a);
Tensor softplus(Tensor a);
Tensor square(Tensor a);
Tensor abs(Tensor a);
Tensor mean(Tensor a);
Tensor sum(Tensor a);
Tensor mean_rows(Tensor a);
Tensor concat_cols(Tensor a, Tensor b);

/// Adam with bias correction over a fixed set of parameters.
struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Parameter*> params, AdamConfig cfg);

  /// One update from the parameters' current grads.
  void step();
  void zero_grad();
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Slot {
    Parameter* p = nullptr;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace alice::ad
