#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace csched {

struct NetArchitecture {
  int input_dim = 0;
  int hidden = 256;
  int heads = 3;      // one categorical per candidate
  int head_size = 0;  // placement choices + skip
  std::string activation = "tanh";

  int num_logits() const { return heads * head_size; }
  std::string describe() const;
  friend bool operator==(const NetArchitecture&, const NetArchitecture&) = default;
};

// Softmax restricted to entries where mask is true; masked entries get exactly 0.
template <typename Derived, typename Mask>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> masked_softmax(const Eigen::MatrixBase<Derived>& logits,
                                                                          const Mask& mask) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(logits.size());
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask(i)) top = std::max(top, logits(i));
  if (!std::isfinite(static_cast<double>(top))) return p;
  Scalar total(0);
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask(i)) {
      p(i) = std::exp(logits(i) - top);
      total += p(i);
    }
  return p / total;
}

template <typename Derived>
typename Derived::Scalar categorical_entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > Scalar(0)) h -= p(i) * std::log(p(i));
  return h;
}

// Two tanh hidden layers feeding `heads` categorical heads and a scalar value
// head. Parameters are plain Eigen matrices so they can be visited uniformly by
// the optimiser, the checkpoint writer and finite-difference checks.
template <typename Scalar>
class PolicyNet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Params {
    Matrix w1, w2, wp, wv;
    Vector b1, b2, bp, bv;

    template <typename F>
    void visit(F&& f) {
      f("w1", w1), f("b1", b1), f("w2", w2), f("b2", b2), f("wp", wp), f("bp", bp), f("wv", wv), f("bv", bv);
    }
    template <typename F>
    void visit(F&& f) const {
      f("w1", w1), f("b1", b1), f("w2", w2), f("b2", b2), f("wp", wp), f("bp", bp), f("wv", wv), f("bv", bv);
    }

    static Params zeros(const NetArchitecture& a) {
      Params p;
      p.w1 = Matrix::Zero(a.hidden, a.input_dim);
      p.b1 = Vector::Zero(a.hidden);
      p.w2 = Matrix::Zero(a.hidden, a.hidden);
      p.b2 = Vector::Zero(a.hidden);
      p.wp = Matrix::Zero(a.num_logits(), a.hidden);
      p.bp = Vector::Zero(a.num_logits());
      p.wv = Matrix::Zero(1, a.hidden);
      p.bv = Vector::Zero(1);
      return p;
    }
    void set_zero() {
      visit([](const char*, auto& m) { m.setZero(); });
    }
    Params& operator+=(const Params& o) {
      w1 += o.w1, b1 += o.b1, w2 += o.w2, b2 += o.b2, wp += o.wp, bp += o.bp, wv += o.wv, bv += o.bv;
      return *this;
    }
    Scalar squared_norm() const {
      Scalar s(0);
      visit([&](const char*, const auto& m) { s += m.squaredNorm(); });
      return s;
    }
    Eigen::Index count() const {
      Eigen::Index n = 0;
      visit([&](const char*, const auto& m) { n += m.size(); });
      return n;
    }
    // Flat view, in visit order, for finite differences and tests.
    Scalar& at(Eigen::Index flat_index) {
      Scalar* out = nullptr;
      visit([&](const char*, auto& m) {
        if (out == nullptr && flat_index < m.size()) out = m.data() + flat_index;
        else if (out == nullptr) flat_index -= m.size();
      });
      return *out;
    }
    friend bool operator==(const Params& a, const Params& b) {
      return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2 && a.wp == b.wp && a.bp == b.bp &&
             a.wv == b.wv && a.bv == b.bv;
    }
  };

  struct Cache {
    Vector input, h1, h2, logits;
    Scalar value{};
  };

  PolicyNet() = default;

  // Scaled-uniform (Glorot) hidden weights; small policy/value output weights so
  // the initial policy is close to uniform over unmasked choices.
  PolicyNet(NetArchitecture arch, std::uint64_t seed) : arch_(std::move(arch)), params_(Params::zeros(arch_)) {
    std::mt19937_64 rng(seed);
    auto fill = [&](Matrix& m, double bound) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Scalar(u(rng));
    };
    fill(params_.w1, std::sqrt(6.0 / (arch_.input_dim + arch_.hidden)));
    fill(params_.w2, std::sqrt(6.0 / (2.0 * arch_.hidden)));
    fill(params_.wp, 0.01 * std::sqrt(6.0 / (arch_.hidden + arch_.num_logits())));
    fill(params_.wv, 0.01 * std::sqrt(6.0 / (arch_.hidden + 1.0)));
  }

  PolicyNet(NetArchitecture arch, Params params) : arch_(std::move(arch)), params_(std::move(params)) {}

  const NetArchitecture& architecture() const { return arch_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  template <typename Derived>
  Cache forward(const Eigen::MatrixBase<Derived>& x) const {
    Cache c;
    c.input = x.template cast<Scalar>();
    c.h1 = (params_.w1 * c.input + params_.b1).array().tanh().matrix();
    c.h2 = (params_.w2 * c.h1 + params_.b2).array().tanh().matrix();
    c.logits = params_.wp * c.h2 + params_.bp;
    c.value = (params_.wv * c.h2)(0) + params_.bv(0);
    return c;
  }

  auto head_logits(const Cache& c, int head) const { return c.logits.segment(head * arch_.head_size, arch_.head_size); }

  // Accumulates d(objective)/d(params) into `grad` given the objective's
  // derivative with respect to the logits and the value output.
  void backward(const Cache& c, const Vector& d_logits, Scalar d_value, Params& grad) const {
    grad.wp.noalias() += d_logits * c.h2.transpose();
    grad.bp += d_logits;
    grad.wv.noalias() += d_value * c.h2.transpose();
    grad.bv(0) += d_value;
    Vector d_h2 = params_.wp.transpose() * d_logits + params_.wv.transpose() * d_value;
    Vector d_z2 = d_h2.array() * (Scalar(1) - c.h2.array().square());
    grad.w2.noalias() += d_z2 * c.h1.transpose();
    grad.b2 += d_z2;
    Vector d_h1 = params_.w2.transpose() * d_z2;
    Vector d_z1 = d_h1.array() * (Scalar(1) - c.h1.array().square());
    grad.w1.noalias() += d_z1 * c.input.transpose();
    grad.b1 += d_z1;
  }

  friend bool operator==(const PolicyNet& a, const PolicyNet& b) { return a.arch_ == b.arch_ && a.params_ == b.params_; }

 private:
  NetArchitecture arch_;
  Params params_;
};

using PolicyNetd = PolicyNet<double>;

// Adam with optional global-norm clipping, ascending the objective.
template <typename Scalar>
class AdamAscent {
 public:
  using Params = typename PolicyNet<Scalar>::Params;

  AdamAscent(const NetArchitecture& arch, double lr, double max_grad_norm = 0.0)
      : m_(Params::zeros(arch)), v_(Params::zeros(arch)), lr_(lr), max_norm_(max_grad_norm) {}

  void step(Params& params, Params grad) {
    ++t_;
    if (max_norm_ > 0.0) {
      const double norm = std::sqrt(static_cast<double>(grad.squared_norm()));
      if (norm > max_norm_) grad.visit([&](const char*, auto& g) { g *= Scalar(max_norm_ / norm); });
    }
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    apply(params.w1, grad.w1, m_.w1, v_.w1, c1, c2);
    apply(params.b1, grad.b1, m_.b1, v_.b1, c1, c2);
    apply(params.w2, grad.w2, m_.w2, v_.w2, c1, c2);
    apply(params.b2, grad.b2, m_.b2, v_.b2, c1, c2);
    apply(params.wp, grad.wp, m_.wp, v_.wp, c1, c2);
    apply(params.bp, grad.bp, m_.bp, v_.bp, c1, c2);
    apply(params.wv, grad.wv, m_.wv, v_.wv, c1, c2);
    apply(params.bv, grad.bv, m_.bv, v_.bv, c1, c2);
  }

  double learning_rate() const { return lr_; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  template <typename M>
  void apply(M& p, const M& g, M& m, M& v, double c1, double c2) {
    m = Scalar(kBeta1) * m + Scalar(1 - kBeta1) * g;
    v = Scalar(kBeta2) * v + Scalar(1 - kBeta2) * g.cwiseProduct(g);
    p.array() += Scalar(lr_) * (m.array() / Scalar(c1)) / ((v.array() / Scalar(c2)).sqrt() + Scalar(kEps));
  }

  Params m_, v_;
  double lr_;
  double max_norm_;
  long t_ = 0;
};

}  // namespace csched
