#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdd/rng.hpp"
#include "sdd/types.hpp"

namespace sdd {

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Fully connected ReLU network with a linear output layer, trained by Adam
// on the squared error of one selected output per sample (the Q-value of the
// action actually taken). Templated on the scalar so training can run in
// float while gradient checks run in double.
template <typename T>
class Mlp {
 public:
  Mlp() = default;

  // sizes = [in, hidden..., out]; He-uniform weights, zero biases.
  Mlp(const std::vector<int>& sizes, std::uint64_t seed) : sizes_(sizes) {
    if (sizes_.size() < 2) throw config_error("mlp needs at least two layers");
    for (int n : sizes_)
      if (n < 1) throw config_error("mlp layer sizes must be positive");
    rng::Engine eng(seed);
    const int L = layer_count();
    W_.resize(L);
    b_.resize(L);
    for (int l = 0; l < L; ++l) {
      const int fan_in = sizes_[l];
      const int fan_out = sizes_[l + 1];
      const double limit = std::sqrt(6.0 / fan_in);
      W_[l].resize(fan_out, fan_in);
      for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c)
          W_[l](r, c) = static_cast<T>(rng::uniform(eng, -limit, limit));
      b_[l] = VecX<T>::Zero(fan_out);
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }

  long param_count() const {
    long n = 0;
    for (int l = 0; l < layer_count(); ++l) n += W_[l].size() + b_[l].size();
    return n;
  }

  VecX<T> forward(const VecX<T>& x) const {
    if (x.size() != input_dim())
      throw contract_error("mlp forward: bad input size");
    VecX<T> h = x;
    for (int l = 0; l < layer_count(); ++l) {
      h = (W_[l] * h + b_[l]).eval();
      if (l + 1 < layer_count()) h = h.cwiseMax(T(0));
    }
    return h;
  }

  // One sample per row.
  MatX<T> forward_batch(const MatX<T>& X) const {
    if (X.cols() != input_dim())
      throw contract_error("mlp forward: bad input size");
    MatX<T> H = X;
    for (int l = 0; l < layer_count(); ++l) {
      MatX<T> Z = H * W_[l].transpose();
      Z.rowwise() += b_[l].transpose();
      if (l + 1 < layer_count()) Z = Z.cwiseMax(T(0));
      H = std::move(Z);
    }
    return H;
  }

  // One Adam step on the batch; returns the pre-step mean squared error of
  // the selected outputs.
  T train_batch(const MatX<T>& X, const std::vector<int>& actions,
                const VecX<T>& targets, const AdamParams& opt) {
    const T loss = compute_grads(X, actions, targets);
    adam_step(opt);
    return loss;
  }

  // Central-difference check of the analytic gradient on a random batch,
  // sampled over ~`fraction` of the parameters. Returns the worst relative
  // error, |ga - gn| / max(1, |ga|, |gn|).
  double gradient_check(std::uint64_t seed, double h = 1e-5,
                        double fraction = 0.01) {
    rng::Engine eng(seed);
    const int B = 8;
    MatX<T> X(B, input_dim());
    for (int i = 0; i < B; ++i)
      for (int c = 0; c < input_dim(); ++c)
        X(i, c) = static_cast<T>(rng::uniform01(eng));
    std::vector<int> actions(B);
    VecX<T> targets(B);
    for (int i = 0; i < B; ++i) {
      actions[i] = static_cast<int>(rng::uniform_index(eng, output_dim()));
      targets[i] = static_cast<T>(rng::uniform(eng, -1.0, 1.0));
    }
    compute_grads(X, actions, targets);
    std::vector<MatX<T>> gW = gW_;
    std::vector<VecX<T>> gb = gb_;

    const long total = param_count();
    long samples = std::max<long>(1, std::lround(fraction * total));
    std::vector<long> idx(total);
    for (long i = 0; i < total; ++i) idx[i] = i;
    for (long i = 0; i < samples; ++i)
      std::swap(idx[i], idx[i + static_cast<long>(
                                    rng::uniform_index(eng, total - i))]);

    double worst = 0.0;
    for (long i = 0; i < samples; ++i) {
      T* p = param_at(idx[i]);
      const double ga = analytic_at(gW, gb, idx[i]);
      const T keep = *p;
      *p = keep + static_cast<T>(h);
      const double up = batch_loss(X, actions, targets);
      const std::vector<char> up_signs = relu_pattern(X);
      *p = keep - static_cast<T>(h);
      const double down = batch_loss(X, actions, targets);
      const std::vector<char> down_signs = relu_pattern(X);
      *p = keep;
      // The interval straddles a ReLU kink: the backward pass reports the
      // one-sided derivative there, which a central difference cannot see.
      if (up_signs != down_signs) continue;
      const double gn = (up - down) / (2.0 * h);
      const double rel =
          std::abs(ga - gn) / std::max({1.0, std::abs(ga), std::abs(gn)});
      worst = std::max(worst, rel);
    }
    return worst;
  }

  std::string to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["sizes"] = sizes_;
    nlohmann::json layers = nlohmann::json::array();
    for (int l = 0; l < layer_count(); ++l) {
      nlohmann::json layer;
      std::vector<double> w(W_[l].size());
      for (int r = 0; r < W_[l].rows(); ++r)
        for (int c = 0; c < W_[l].cols(); ++c)
          w[static_cast<size_t>(r) * W_[l].cols() + c] =
              static_cast<double>(W_[l](r, c));
      std::vector<double> b(b_[l].size());
      for (int r = 0; r < b_[l].size(); ++r)
        b[r] = static_cast<double>(b_[l][r]);
      layer["W"] = w;
      layer["b"] = b;
      layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
    return j.dump() + "\n";
  }

  static Mlp from_json(const std::string& text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("mlp json: ") + e.what());
    }
    try {
      if (j.value("schema", 0) != 1)
        throw config_error("mlp json: unsupported schema");
      Mlp net;
      net.sizes_ = j.at("sizes").get<std::vector<int>>();
      if (net.sizes_.size() < 2) throw config_error("mlp json: bad sizes");
      const int L = net.layer_count();
      if (static_cast<int>(j.at("layers").size()) != L)
        throw config_error("mlp json: layer count mismatch");
      net.W_.resize(L);
      net.b_.resize(L);
      for (int l = 0; l < L; ++l) {
        const auto& layer = j.at("layers")[l];
        const auto w = layer.at("W").get<std::vector<double>>();
        const auto b = layer.at("b").get<std::vector<double>>();
        const int rows = net.sizes_[l + 1];
        const int cols = net.sizes_[l];
        if (static_cast<int>(w.size()) != rows * cols ||
            static_cast<int>(b.size()) != rows)
          throw config_error("mlp json: layer size mismatch");
        net.W_[l].resize(rows, cols);
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c)
            net.W_[l](r, c) = static_cast<T>(w[static_cast<size_t>(r) * cols + c]);
        net.b_[l] = VecX<T>(rows);
        for (int r = 0; r < rows; ++r) net.b_[l][r] = static_cast<T>(b[r]);
      }
      return net;
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("mlp json: ") + e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write network file: " + path);
    out << to_json();
  }

  static Mlp load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open network file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
  }

 private:
  std::vector<int> sizes_;
  std::vector<MatX<T>> W_;
  std::vector<VecX<T>> b_;

  // Adam moments, allocated on first training step.
  std::vector<MatX<T>> mW_, vW_;
  std::vector<VecX<T>> mb_, vb_;
  long adam_t_ = 0;

  // Scratch reused across training steps.
  std::vector<MatX<T>> acts_;
  std::vector<MatX<T>> gW_;
  std::vector<VecX<T>> gb_;

  double batch_loss(const MatX<T>& X, const std::vector<int>& actions,
                    const VecX<T>& targets) const {
    const MatX<T> Y = forward_batch(X);
    double loss = 0.0;
    for (int i = 0; i < Y.rows(); ++i) {
      const double d =
          static_cast<double>(Y(i, actions[i])) - static_cast<double>(targets[i]);
      loss += d * d;
    }
    return loss / Y.rows();
  }

  // Hidden-unit activation signs over the batch. gradient_check uses this to
  // spot perturbations that cross a ReLU kink, where the loss is not
  // differentiable and a central difference stops being meaningful.
  std::vector<char> relu_pattern(const MatX<T>& X) const {
    std::vector<char> pattern;
    MatX<T> H = X;
    for (int l = 0; l < layer_count(); ++l) {
      MatX<T> Z = H * W_[l].transpose();
      Z.rowwise() += b_[l].transpose();
      if (l + 1 < layer_count()) {
        for (int r = 0; r < Z.rows(); ++r)
          for (int c = 0; c < Z.cols(); ++c)
            pattern.push_back(Z(r, c) > T(0) ? 1 : 0);
        Z = Z.cwiseMax(T(0));
      }
      H = std::move(Z);
    }
    return pattern;
  }

  // Fills gW_/gb_ with the gradient of the mean selected-output squared
  // error; returns the loss.
  T compute_grads(const MatX<T>& X, const std::vector<int>& actions,
                  const VecX<T>& targets) {
    const int B = static_cast<int>(X.rows());
    const int L = layer_count();
    if (X.cols() != input_dim() || static_cast<int>(actions.size()) != B ||
        targets.size() != B)
      throw contract_error("mlp train: batch shape mismatch");
    for (int i = 0; i < B; ++i)
      if (actions[i] < 0 || actions[i] >= output_dim())
        throw contract_error("mlp train: action out of range");

    acts_.resize(L + 1);
    acts_[0] = X;
    for (int l = 0; l < L; ++l) {
      acts_[l + 1].noalias() = acts_[l] * W_[l].transpose();
      acts_[l + 1].rowwise() += b_[l].transpose();
      if (l + 1 < L) acts_[l + 1] = acts_[l + 1].cwiseMax(T(0));
    }

    const MatX<T>& Y = acts_[L];
    T loss = T(0);
    MatX<T> delta = MatX<T>::Zero(B, output_dim());
    for (int i = 0; i < B; ++i) {
      const T d = Y(i, actions[i]) - targets[i];
      loss += d * d;
      delta(i, actions[i]) = T(2) * d / static_cast<T>(B);
    }
    loss /= static_cast<T>(B);

    gW_.resize(L);
    gb_.resize(L);
    for (int l = L - 1; l >= 0; --l) {
      gW_[l].noalias() = delta.transpose() * acts_[l];
      gb_[l] = delta.colwise().sum().transpose();
      if (l > 0) {
        MatX<T> prev = delta * W_[l];
        // ReLU gate: the stored activation is already rectified.
        delta = ((acts_[l].array() > T(0)).template cast<T>() * prev.array())
                    .matrix();
      }
    }
    return loss;
  }

  void adam_step(const AdamParams& opt) {
    const int L = layer_count();
    if (mW_.empty()) {
      mW_.resize(L);
      vW_.resize(L);
      mb_.resize(L);
      vb_.resize(L);
      for (int l = 0; l < L; ++l) {
        mW_[l] = MatX<T>::Zero(W_[l].rows(), W_[l].cols());
        vW_[l] = mW_[l];
        mb_[l] = VecX<T>::Zero(b_[l].size());
        vb_[l] = mb_[l];
      }
    }
    ++adam_t_;
    const T b1 = static_cast<T>(opt.beta1);
    const T b2 = static_cast<T>(opt.beta2);
    const T corr1 = T(1) - static_cast<T>(std::pow(opt.beta1, adam_t_));
    const T corr2 = T(1) - static_cast<T>(std::pow(opt.beta2, adam_t_));
    const T lr = static_cast<T>(opt.lr);
    const T eps = static_cast<T>(opt.eps);
    for (int l = 0; l < L; ++l) {
      mW_[l] = b1 * mW_[l] + (T(1) - b1) * gW_[l];
      vW_[l] = (b2 * vW_[l].array() + (T(1) - b2) * gW_[l].array().square())
                   .matrix();
      W_[l].array() -=
          lr * (mW_[l].array() / corr1) /
          ((vW_[l].array() / corr2).sqrt() + eps);
      mb_[l] = b1 * mb_[l] + (T(1) - b1) * gb_[l];
      vb_[l] = (b2 * vb_[l].array() + (T(1) - b2) * gb_[l].array().square())
                   .matrix();
      b_[l].array() -=
          lr * (mb_[l].array() / corr1) /
          ((vb_[l].array() / corr2).sqrt() + eps);
    }
  }

  T* param_at(long index) {
    for (int l = 0; l < layer_count(); ++l) {
      if (index < W_[l].size()) return W_[l].data() + index;
      index -= W_[l].size();
      if (index < b_[l].size()) return b_[l].data() + index;
      index -= b_[l].size();
    }
    throw contract_error("mlp: parameter index out of range");
  }

  double analytic_at(const std::vector<MatX<T>>& gW,
                     const std::vector<VecX<T>>& gb, long index) const {
    for (int l = 0; l < layer_count(); ++l) {
      if (index < gW[l].size())
        return static_cast<double>(*(gW[l].data() + index));
      index -= gW[l].size();
      if (index < gb[l].size())
        return static_cast<double>(gb[l][index]);
      index -= gb[l].size();
    }
    throw contract_error("mlp: parameter index out of range");
  }
};

}  // namespace sdd
