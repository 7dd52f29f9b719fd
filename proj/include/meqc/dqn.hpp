// Copyright 2026 The MEQC Simulator Authors
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

// Deep Q-learning for the offloading-mode choice: a dense ReLU network,
// uniform experience replay, a target network and an epsilon-greedy actor.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "meqc/environment.hpp"

namespace meqc {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Feed-forward network with ReLU hidden layers and a linear output layer.
class QNetwork {
 public:
  QNetwork() = default;

  QNetwork(int input_dim, const std::vector<int>& hidden, int output_dim, std::uint64_t seed) {
    Rng rng(seed);
    int fan_in = input_dim;
    std::vector<int> widths = hidden;
    widths.push_back(output_dim);
    for (int out : widths) {
      const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
      DenseLayer layer{Eigen::MatrixXd(out, fan_in), Eigen::VectorXd(out)};
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = uniform_real(rng, -limit, limit);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = uniform_real(rng, -limit, limit);
      layers_.push_back(std::move(layer));
      fan_in = out;
    }
  }

  int input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
  int output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  bool same_architecture(const QNetwork& o) const {
    if (layers_.size() != o.layers_.size()) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].weight.rows() != o.layers_[i].weight.rows() ||
          layers_[i].weight.cols() != o.layers_[i].weight.cols())
        return false;
    }
    return true;
  }

  /// Columns of `x` are samples; returns output_dim x batch.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Eigen::MatrixXd z = layers_[i].weight * a;
      z.colwise() += layers_[i].bias;
      a = (i + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    }
    return a;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    return forward(Eigen::MatrixXd(x)).col(0);
  }

  /// Mean over the batch of (Q(x_i, a_i) - y_i)^2 and its gradient with
  /// respect to every parameter.
  double loss_and_gradient(const Eigen::MatrixXd& x, const std::vector<int>& actions, const Eigen::VectorXd& targets,
                           std::vector<DenseLayer>& grads) const {
    const auto batch = x.cols();
    assert(static_cast<std::size_t>(batch) == actions.size() && batch == targets.size());
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(layers_.size() + 1);
    acts.push_back(x);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      Eigen::MatrixXd z = layers_[i].weight * acts.back();
      z.colwise() += layers_[i].bias;
      if (i + 1 < layers_.size()) z = z.cwiseMax(0.0);
      acts.push_back(std::move(z));
    }
    const Eigen::MatrixXd& q = acts.back();
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(q.rows(), batch);
    double loss = 0;
    for (Eigen::Index b = 0; b < batch; ++b) {
      const double err = q(actions[static_cast<std::size_t>(b)], b) - targets(b);
      loss += err * err;
      delta(actions[static_cast<std::size_t>(b)], b) = 2.0 * err / static_cast<double>(batch);
    }
    loss /= static_cast<double>(batch);

    grads.resize(layers_.size());
    for (std::size_t i = layers_.size(); i-- > 0;) {
      grads[i].weight = delta * acts[i].transpose();
      grads[i].bias = delta.rowwise().sum();
      if (i == 0) break;
      Eigen::MatrixXd back = layers_[i].weight.transpose() * delta;
      // ReLU derivative: the stored activation is positive exactly where the unit was active.
      delta = back.cwiseProduct((acts[i].array() > 0.0).cast<double>().matrix());
    }
    return loss;
  }

  void copy_from(const QNetwork& other) {
    assert(same_architecture(other) && "target_sync requires identical architectures");
    layers_ = other.layers_;
  }

  /// Writes "MEQCDQN1", the layer count, then each layer's weights
  /// (row-major) followed by its biases, all little-endian.
  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 8);
    write_u64(out, layers_.size());
    for (const auto& l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) write_f64(out, l.weight(i, j));
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) write_f64(out, l.bias(i));
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
  }

  /// Restores parameters into a network of the same architecture.
  void load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("bad checkpoint magic: " + path);
    const std::uint64_t count = read_u64(in);
    if (count != layers_.size()) throw std::runtime_error("checkpoint layer count mismatch: " + path);
    for (auto& l : layers_) {
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = read_f64(in);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = read_f64(in);
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing data in checkpoint: " + path);
  }

 private:
  static constexpr char kMagic[9] = "MEQCDQN1";

  static void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  static void write_f64(std::ostream& out, double d) { write_u64(out, std::bit_cast<std::uint64_t>(d)); }
  static std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8] = {};
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  static double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

  std::vector<DenseLayer> layers_;
};

inline void target_sync(const QNetwork& online, QNetwork& target) { target.copy_from(online); }

struct Transition {
  Eigen::VectorXd obs;
  int action = 0;
  double reward = 0;
  Eigen::VectorXd next_obs;
  bool terminal = false;
};

/// Fixed-capacity ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) { assert(capacity > 0); }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  /// Distinct indices drawn uniformly, in draw order.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    assert(batch <= items_.size());
    std::vector<std::size_t> picked;
    picked.reserve(batch);
    std::unordered_set<std::size_t> seen;
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    while (picked.size() < batch) {
      const std::size_t i = pick(rng);
      if (seen.insert(i).second) picked.push_back(i);
    }
    return picked;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

enum class OptimizerKind { kAdam, kSgd };

struct DqnHyper {
  double gamma = 0.913;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t replay_capacity = 100000;
  std::size_t target_sync_every = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_steps = 10000;
  std::vector<int> hidden = {512, 512, 512};
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::size_t train_every = 1;
  std::size_t slots_per_epoch = 20;
  bool observe_backlog = true;
  double backlog_scale = 10;

  double epsilon_at(std::size_t step) const {
    if (epsilon_decay_steps == 0 || step >= epsilon_decay_steps) return epsilon_end;
    const double frac = static_cast<double>(step) / static_cast<double>(epsilon_decay_steps);
    return epsilon_start + (epsilon_end - epsilon_start) * frac;
  }
};

/// First-moment / second-moment state for Adam, or nothing for plain SGD.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const QNetwork& net, OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {
    for (const auto& l : net.layers()) {
      m_.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
      v_.push_back(m_.back());
    }
  }

  void step(QNetwork& net, const std::vector<DenseLayer>& grads) {
    auto& layers = net.layers();
    if (kind_ == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].weight -= lr_ * grads[i].weight;
        layers[i].bias -= lr_ * grads[i].bias;
      }
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g.cwiseProduct(g);
      param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
      update(layers[i].weight, m_[i].weight, v_[i].weight, grads[i].weight);
      update(layers[i].bias, m_[i].bias, v_[i].bias, grads[i].bias);
    }
  }

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  double lr_ = 1e-3;
  std::uint64_t t_ = 0;
  std::vector<DenseLayer> m_, v_;
};

/// One gradient step on a uniformly sampled batch. Returns nothing while the
/// buffer holds fewer transitions than a batch.
inline std::optional<double> dqn_train_step(const ReplayBuffer& buffer, QNetwork& online, const QNetwork& target,
                                            const DqnHyper& hyper, Optimizer& opt, Rng& rng) {
  if (buffer.size() < hyper.batch_size || hyper.batch_size == 0) return std::nullopt;
  const auto idx = buffer.sample_indices(hyper.batch_size, rng);
  const auto in = static_cast<Eigen::Index>(online.input_dim());
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd obs(in, n), next(in, n);
  std::vector<int> actions(idx.size());
  for (Eigen::Index b = 0; b < n; ++b) {
    const Transition& t = buffer[idx[static_cast<std::size_t>(b)]];
    obs.col(b) = t.obs;
    next.col(b) = t.next_obs;
    actions[static_cast<std::size_t>(b)] = t.action;
  }
  const Eigen::MatrixXd next_q = target.forward(next);
  Eigen::VectorXd y(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const Transition& t = buffer[idx[static_cast<std::size_t>(b)]];
    y(b) = t.reward + (t.terminal ? 0.0 : hyper.gamma * next_q.col(b).maxCoeff());
  }
  std::vector<DenseLayer> grads;
  const double loss = online.loss_and_gradient(obs, actions, y, grads);
  opt.step(online, grads);
  return loss;
}

using FeasibleModes = std::array<bool, kNumModes>;

/// Epsilon-greedy choice restricted to feasible modes; ties in Q go to the
/// lowest mode index.
inline Mode dqn_act(const QNetwork& online, const Eigen::VectorXd& obs, const FeasibleModes& feasible, double epsilon,
                    Rng& rng) {
  std::vector<int> allowed;
  for (int a = 0; a < kNumModes; ++a)
    if (feasible[static_cast<std::size_t>(a)]) allowed.push_back(a);
  assert(!allowed.empty());
  if (std::generate_canonical<double, 64>(rng) < epsilon) {
    const auto k = uniform_int(rng, 0, static_cast<std::int64_t>(allowed.size()) - 1);
    return static_cast<Mode>(allowed[static_cast<std::size_t>(k)]);
  }
  const Eigen::VectorXd q = online.forward(obs);
  int best = allowed.front();
  for (int a : allowed)
    if (q(a) > q(best)) best = a;
  return static_cast<Mode>(best);
}

}  // namespace meqc
