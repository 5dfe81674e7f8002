#include "alice/autodiff.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace alice::ad {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Mat>;
using ConstMatMap = Eigen::Map<const Mat>;

double stable_sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double stable_softplus(double t) {
  // log(1 + e^t) = max(t, 0) + log1p(e^{-|t|})
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

}  // namespace

int numel(const Shape& s) {
  int n = 1;
  for (int e : s) n *= e;
  return s.empty() ? 0 : n;
}

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

Parameter::Parameter(std::string name_, Shape shape_)
    : name(std::move(name_)), shape(std::move(shape_)) {
  value.assign(numel(shape), 0.0);
  grad.assign(value.size(), 0.0);
}

Parameter::Parameter(std::string name_, Shape shape_, std::vector<double> init)
    : name(std::move(name_)), shape(std::move(shape_)), value(std::move(init)) {
  if (value.size() != static_cast<std::size_t>(numel(shape)))
    throw std::invalid_argument("Parameter " + name + ": init size " +
                                std::to_string(value.size()) + " does not match shape " +
                                shape_str(shape));
  grad.assign(value.size(), 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

// --- Tensor accessors ---

const Shape& Tensor::shape() const { return tape_->node(id_).shape; }
const std::vector<double>& Tensor::values() const { return tape_->node(id_).val; }
const std::vector<double>& Tensor::grad() const { return tape_->node(id_).grad; }
int Tensor::numel() const { return ad::numel(shape()); }

double Tensor::scalar() const {
  if (numel() != 1)
    throw std::invalid_argument("Tensor::scalar: shape " + shape_str(shape()) + " is not scalar");
  return values()[0];
}

int Tensor::rows() const {
  const Shape& s = shape();
  if (s.size() != 2) throw std::invalid_argument("Tensor::rows: shape " + shape_str(s) + " is not rank 2");
  return s[0];
}

int Tensor::cols() const {
  const Shape& s = shape();
  if (s.size() != 2) throw std::invalid_argument("Tensor::cols: shape " + shape_str(s) + " is not rank 2");
  return s[1];
}

// --- Tape: leaves ---

Tensor Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::check_same_tape(Tensor t) const {
  if (t.tape() != this) throw std::invalid_argument("Tape: tensor belongs to a different tape");
}

Tensor Tape::input(Shape shape, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(numel(shape)))
    throw std::invalid_argument("Tape::input: " + std::to_string(values.size()) +
                                " values for shape " + shape_str(shape));
  Node n;
  n.op = Op::Input;
  n.shape = std::move(shape);
  n.val = std::move(values);
  return push(std::move(n));
}

Tensor Tape::input(Shape shape, const double* data) {
  return input(std::move(shape), std::vector<double>(data, data + numel(shape)));
}

Tensor Tape::scalar(double v) { return input({1}, std::vector<double>{v}); }

Tensor Tape::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.shape = p.shape;
  n.val = p.value;
  n.bound = &p;
  return push(std::move(n));
}

// --- Tape: ops ---

Tensor Tape::matmul(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(sa) + " x " +
                                shape_str(sb));
  Node n;
  n.op = Op::MatMul;
  n.shape = {sa[0], sb[1]};
  n.a = a.id();
  n.b = b.id();
  n.val.resize(static_cast<std::size_t>(sa[0]) * sb[1]);
  ConstMatMap A(node(a.id()).val.data(), sa[0], sa[1]);
  ConstMatMap B(node(b.id()).val.data(), sb[0], sb[1]);
  MatMap C(n.val.data(), sa[0], sb[1]);
  C.noalias() = A * B;
  return push(std::move(n));
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  const auto& av = node(a.id()).val;
  const auto& bv = node(b.id()).val;
  Node n;
  n.shape = sa;
  n.a = a.id();
  n.b = b.id();
  if (sa == sb) {
    n.op = Op::Add;
    n.val.resize(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] + bv[i];
  } else if (sa.size() == 2 && sb.size() == 2 && sb[0] == 1 && sb[1] == sa[1]) {
    n.op = Op::AddRow;
    n.val.resize(av.size());
    const int c = sa[1];
    for (int r = 0; r < sa[0]; ++r)
      for (int j = 0; j < c; ++j) n.val[r * c + j] = av[r * c + j] + bv[j];
  } else {
    throw std::invalid_argument("add: incompatible shapes " + shape_str(sa) + " + " +
                                shape_str(sb));
  }
  return push(std::move(n));
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.shape() != b.shape())
    throw std::invalid_argument("sub: incompatible shapes " + shape_str(a.shape()) + " - " +
                                shape_str(b.shape()));
  Node n;
  n.op = Op::Sub;
  n.shape = a.shape();
  n.a = a.id();
  n.b = b.id();
  const auto& av = node(a.id()).val;
  const auto& bv = node(b.id()).val;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] - bv[i];
  return push(std::move(n));
}

Tensor Tape::mul(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  if (a.shape() != b.shape())
    throw std::invalid_argument("mul: incompatible shapes " + shape_str(a.shape()) + " * " +
                                shape_str(b.shape()));
  Node n;
  n.op = Op::Mul;
  n.shape = a.shape();
  n.a = a.id();
  n.b = b.id();
  const auto& av = node(a.id()).val;
  const auto& bv = node(b.id()).val;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] * bv[i];
  return push(std::move(n));
}

Tensor Tape::scale(Tensor a, double c) {
  check_same_tape(a);
  Node n;
  n.op = Op::Scale;
  n.shape = a.shape();
  n.a = a.id();
  n.c = c;
  const auto& av = node(a.id()).val;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = c * av[i];
  return push(std::move(n));
}

Tensor Tape::add_const(Tensor a, double c) {
  check_same_tape(a);
  Node n;
  n.op = Op::AddConst;
  n.shape = a.shape();
  n.a = a.id();
  n.c = c;
  const auto& av = node(a.id()).val;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] + c;
  return push(std::move(n));
}

Tensor Tape::unary(Op op, Tensor a) {
  check_same_tape(a);
  Node n;
  n.op = op;
  n.shape = a.shape();
  n.a = a.id();
  const auto& av = node(a.id()).val;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i];
    switch (op) {
      case Op::Tanh: n.val[i] = std::tanh(x); break;
      case Op::Relu: n.val[i] = x > 0.0 ? x : 0.0; break;
      case Op::Sigmoid: n.val[i] = stable_sigmoid(x); break;
      case Op::Exp: n.val[i] = std::exp(x); break;
      case Op::Log: n.val[i] = std::log(x); break;
      case Op::Square: n.val[i] = x * x; break;
      case Op::Abs: n.val[i] = std::abs(x); break;
      case Op::Softplus: n.val[i] = stable_softplus(x); break;
      case Op::LogSigmoid: n.val[i] = -stable_softplus(-x); break;
      default: throw std::logic_error("unary: bad op");
    }
  }
  return push(std::move(n));
}

Tensor Tape::tanh(Tensor a) { return unary(Op::Tanh, a); }
Tensor Tape::relu(Tensor a) { return unary(Op::Relu, a); }
Tensor Tape::sigmoid(Tensor a) { return unary(Op::Sigmoid, a); }
Tensor Tape::exp_(Tensor a) { return unary(Op::Exp, a); }
Tensor Tape::log_(Tensor a) { return unary(Op::Log, a); }
Tensor Tape::square(Tensor a) { return unary(Op::Square, a); }
Tensor Tape::abs_(Tensor a) { return unary(Op::Abs, a); }
Tensor Tape::softplus(Tensor a) { return unary(Op::Softplus, a); }
Tensor Tape::log_sigmoid(Tensor a) { return unary(Op::LogSigmoid, a); }

Tensor Tape::reduce_mean(Tensor a) {
  check_same_tape(a);
  Node n;
  n.op = Op::ReduceMean;
  n.shape = {1};
  n.a = a.id();
  const auto& av = node(a.id()).val;
  double s = 0.0;
  for (double v : av) s += v;
  n.val = {s / static_cast<double>(av.size())};
  return push(std::move(n));
}

Tensor Tape::reduce_sum(Tensor a) {
  check_same_tape(a);
  Node n;
  n.op = Op::ReduceSum;
  n.shape = {1};
  n.a = a.id();
  const auto& av = node(a.id()).val;
  double s = 0.0;
  for (double v : av) s += v;
  n.val = {s};
  return push(std::move(n));
}

Tensor Tape::mean_rows(Tensor a) {
  check_same_tape(a);
  const Shape& sa = a.shape();
  if (sa.size() != 2)
    throw std::invalid_argument("mean_rows: shape " + shape_str(sa) + " is not rank 2");
  Node n;
  n.op = Op::MeanRows;
  n.shape = {1, sa[1]};
  n.a = a.id();
  n.val.assign(sa[1], 0.0);
  const auto& av = node(a.id()).val;
  for (int r = 0; r < sa[0]; ++r)
    for (int j = 0; j < sa[1]; ++j) n.val[j] += av[r * sa[1] + j];
  for (double& v : n.val) v /= static_cast<double>(sa[0]);
  return push(std::move(n));
}

Tensor Tape::concat_cols(Tensor a, Tensor b) {
  check_same_tape(a);
  check_same_tape(b);
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[0] != sb[0])
    throw std::invalid_argument("concat_cols: incompatible shapes " + shape_str(sa) + " | " +
                                shape_str(sb));
  Node n;
  n.op = Op::ConcatCols;
  n.shape = {sa[0], sa[1] + sb[1]};
  n.a = a.id();
  n.b = b.id();
  const auto& av = node(a.id()).val;
  const auto& bv = node(b.id()).val;
  n.val.resize(static_cast<std::size_t>(sa[0]) * (sa[1] + sb[1]));
  for (int r = 0; r < sa[0]; ++r) {
    double* out = n.val.data() + static_cast<std::size_t>(r) * (sa[1] + sb[1]);
    const double* pa = av.data() + static_cast<std::size_t>(r) * sa[1];
    const double* pb = bv.data() + static_cast<std::size_t>(r) * sb[1];
    std::copy(pa, pa + sa[1], out);
    std::copy(pb, pb + sb[1], out + sa[1]);
  }
  return push(std::move(n));
}

Tensor Tape::cross_entropy_with_logits(Tensor logits, const std::vector<int>& labels) {
  check_same_tape(logits);
  const Shape& s = logits.shape();
  if (s.size() != 2)
    throw std::invalid_argument("cross_entropy_with_logits: shape " + shape_str(s) +
                                " is not rank 2");
  if (labels.size() != static_cast<std::size_t>(s[0]))
    throw std::invalid_argument("cross_entropy_with_logits: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(s[0]) + " rows");
  for (int y : labels)
    if (y < 0 || y >= s[1])
      throw std::invalid_argument("cross_entropy_with_logits: label " + std::to_string(y) +
                                  " out of range [0," + std::to_string(s[1]) + ")");
  Node n;
  n.op = Op::XentLogits;
  n.shape = {1};
  n.a = logits.id();
  n.labels = labels;
  const auto& lv = node(logits.id()).val;
  double total = 0.0;
  for (int r = 0; r < s[0]; ++r) {
    const double* row = lv.data() + static_cast<std::size_t>(r) * s[1];
    double mx = row[0];
    for (int j = 1; j < s[1]; ++j) mx = std::max(mx, row[j]);
    double lse = 0.0;
    for (int j = 0; j < s[1]; ++j) lse += std::exp(row[j] - mx);
    total += mx + std::log(lse) - row[labels[r]];
  }
  n.val = {total / static_cast<double>(s[0])};
  return push(std::move(n));
}

// --- backward ---

void Tape::backward(const Tensor& loss) {
  check_same_tape(loss);
  if (numel(node(loss.id()).shape) != 1)
    throw std::invalid_argument("backward: loss has shape " +
                                shape_str(node(loss.id()).shape) + ", expected a scalar");

  const int top = loss.id();
  for (int i = 0; i <= top; ++i) nodes_[i].grad.assign(nodes_[i].val.size(), 0.0);
  nodes_[top].grad[0] = 1.0;

  for (int i = top; i >= 0; --i) {
    Node& n = nodes_[i];
    const std::vector<double>& g = n.grad;
    switch (n.op) {
      case Op::Input:
      case Op::Param:
        break;
      case Op::MatMul: {
        Node& A = nodes_[n.a];
        Node& B = nodes_[n.b];
        const int m = A.shape[0], k = A.shape[1], p = B.shape[1];
        ConstMatMap G(g.data(), m, p);
        ConstMatMap Am(A.val.data(), m, k);
        ConstMatMap Bm(B.val.data(), k, p);
        MatMap(A.grad.data(), m, k).noalias() += G * Bm.transpose();
        MatMap(B.grad.data(), k, p).noalias() += Am.transpose() * G;
        break;
      }
      case Op::Add: {
        auto& ga = nodes_[n.a].grad;
        auto& gb = nodes_[n.b].grad;
        for (std::size_t j = 0; j < g.size(); ++j) {
          ga[j] += g[j];
          gb[j] += g[j];
        }
        break;
      }
      case Op::AddRow: {
        auto& ga = nodes_[n.a].grad;
        auto& gb = nodes_[n.b].grad;
        const int c = n.shape[1];
        for (int r = 0; r < n.shape[0]; ++r)
          for (int j = 0; j < c; ++j) {
            ga[r * c + j] += g[r * c + j];
            gb[j] += g[r * c + j];
          }
        break;
      }
      case Op::Sub: {
        auto& ga = nodes_[n.a].grad;
        auto& gb = nodes_[n.b].grad;
        for (std::size_t j = 0; j < g.size(); ++j) {
          ga[j] += g[j];
          gb[j] -= g[j];
        }
        break;
      }
      case Op::Mul: {
        auto& ga = nodes_[n.a].grad;
        auto& gb = nodes_[n.b].grad;
        const auto& av = nodes_[n.a].val;
        const auto& bv = nodes_[n.b].val;
        for (std::size_t j = 0; j < g.size(); ++j) {
          ga[j] += g[j] * bv[j];
          gb[j] += g[j] * av[j];
        }
        break;
      }
      case Op::Scale: {
        auto& ga = nodes_[n.a].grad;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += n.c * g[j];
        break;
      }
      case Op::AddConst: {
        auto& ga = nodes_[n.a].grad;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j];
        break;
      }
      case Op::Tanh: {
        auto& ga = nodes_[n.a].grad;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * (1.0 - n.val[j] * n.val[j]);
        break;
      }
      case Op::Relu: {
        auto& ga = nodes_[n.a].grad;
        const auto& av = nodes_[n.a].val;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += av[j] > 0.0 ? g[j] : 0.0;
        break;
      }
      case Op::Sigmoid: {
        auto& ga = nodes_[n.a].grad;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * n.val[j] * (1.0 - n.val[j]);
        break;
      }
      case Op::Exp: {
        auto& ga = nodes_[n.a].grad;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * n.val[j];
        break;
      }
      case Op::Log: {
        auto& ga = nodes_[n.a].grad;
        const auto& av = nodes_[n.a].val;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] / av[j];
        break;
      }
      case Op::Square: {
        auto& ga = nodes_[n.a].grad;
        const auto& av = nodes_[n.a].val;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += 2.0 * av[j] * g[j];
        break;
      }
      case Op::Abs: {
        auto& ga = nodes_[n.a].grad;
        const auto& av = nodes_[n.a].val;
        for (std::size_t j = 0; j < g.size(); ++j)
          ga[j] += av[j] > 0.0 ? g[j] : (av[j] < 0.0 ? -g[j] : 0.0);
        break;
      }
      case Op::Softplus: {
        auto& ga = nodes_[n.a].grad;
        const auto& av = nodes_[n.a].val;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * stable_sigmoid(av[j]);
        break;
      }
      case Op::LogSigmoid: {
        auto& ga = nodes_[n.a].grad;
        const auto& av = nodes_[n.a].val;
        for (std::size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * stable_sigmoid(-av[j]);
        break;
      }
      case Op::ReduceMean: {
        auto& ga = nodes_[n.a].grad;
        const double gv = g[0] / static_cast<double>(ga.size());
        for (double& v : ga) v += gv;
        break;
      }
      case Op::ReduceSum: {
        auto& ga = nodes_[n.a].grad;
        for (double& v : ga) v += g[0];
        break;
      }
      case Op::MeanRows: {
        Node& A = nodes_[n.a];
        const int rows = A.shape[0], c = A.shape[1];
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < c; ++j) A.grad[r * c + j] += g[j] / static_cast<double>(rows);
        break;
      }
      case Op::ConcatCols: {
        Node& A = nodes_[n.a];
        Node& B = nodes_[n.b];
        const int rows = n.shape[0], ca = A.shape[1], cb = B.shape[1];
        for (int r = 0; r < rows; ++r) {
          const double* gr = g.data() + static_cast<std::size_t>(r) * (ca + cb);
          for (int j = 0; j < ca; ++j) A.grad[r * ca + j] += gr[j];
          for (int j = 0; j < cb; ++j) B.grad[r * cb + j] += gr[ca + j];
        }
        break;
      }
      case Op::XentLogits: {
        Node& A = nodes_[n.a];
        const int rows = A.shape[0], c = A.shape[1];
        const double gv = g[0] / static_cast<double>(rows);
        for (int r = 0; r < rows; ++r) {
          const double* row = A.val.data() + static_cast<std::size_t>(r) * c;
          double mx = row[0];
          for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
          double lse = 0.0;
          for (int j = 0; j < c; ++j) lse += std::exp(row[j] - mx);
          for (int j = 0; j < c; ++j) {
            const double soft = std::exp(row[j] - mx) / lse;
            A.grad[r * c + j] += gv * (soft - (j == n.labels[r] ? 1.0 : 0.0));
          }
        }
        break;
      }
    }
  }

  for (int i = 0; i <= top; ++i) {
    Node& n = nodes_[i];
    if (n.op == Op::Param && n.bound != nullptr)
      for (std::size_t j = 0; j < n.grad.size(); ++j) n.bound->grad[j] += n.grad[j];
  }
}

Tape::NodeInfo Tape::node_info(int id) const {
  const Node& n = nodes_.at(id);
  return NodeInfo{n.a, n.b, n.bound};
}

bool Tape::uses(const Parameter& p) const {
  for (const Node& n : nodes_)
    if (n.bound == &p) return true;
  return false;
}

// --- operator sugar ---

Tensor operator+(Tensor a, Tensor b) { return a.tape()->add(a, b); }
Tensor operator-(Tensor a, Tensor b) { return a.tape()->sub(a, b); }
Tensor operator-(Tensor a) { return a.tape()->neg(a); }
Tensor operator*(Tensor a, Tensor b) { return a.tape()->mul(a, b); }
Tensor operator*(double c, Tensor a) { return a.tape()->scale(a, c); }
Tensor matmul(Tensor a, Tensor b) { return a.tape()->matmul(a, b); }
Tensor tanh(Tensor a) { return a.tape()->tanh(a); }
Tensor relu(Tensor a) { return a.tape()->relu(a); }
Tensor sigmoid(Tensor a) { return a.tape()->sigmoid(a); }
Tensor log_sigmoid(Tensor a) { return a.tape()->log_sigmoid(a); }
Tensor softplus(Tensor a) { return a.tape()->softplus(a); }
Tensor square(Tensor a) { return a.tape()->square(a); }
Tensor abs(Tensor a) { return a.tape()->abs_(a); }
Tensor mean(Tensor a) { return a.tape()->reduce_mean(a); }
Tensor sum(Tensor a) { return a.tape()->reduce_sum(a); }
Tensor mean_rows(Tensor a) { return a.tape()->mean_rows(a); }
Tensor concat_cols(Tensor a, Tensor b) { return a.tape()->concat_cols(a, b); }

// --- Adam ---

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : cfg_(cfg) {
  slots_.reserve(params.size());
  for (Parameter* p : params) {
    Slot s;
    s.p = p;
    s.m.assign(p->value.size(), 0.0);
    s.v.assign(p->value.size(), 0.0);
    slots_.push_back(std::move(s));
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Slot& s : slots_) {
    for (std::size_t i = 0; i < s.p->value.size(); ++i) {
      const double g = s.p->grad[i];
      s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g;
      s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = s.m[i] / bc1;
      const double vhat = s.v[i] / bc2;
      s.p->value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Slot& s : slots_) s.p->zero_grad();
}

}  // namespace alice::ad
