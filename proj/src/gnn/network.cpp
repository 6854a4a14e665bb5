#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gmia/error.hpp"

namespace gmia::gnn::detail {
namespace {

constexpr double kLeakySlope = 0.2;

ParamSpec glorot(std::string name, int rows, int cols, int fan_in, int fan_out) {
  return ParamSpec{std::move(name), rows, cols, ParamSpec::Init::Glorot, fan_in, fan_out, true};
}
ParamSpec bias(std::string name, int cols) {
  return ParamSpec{std::move(name), 1, cols, ParamSpec::Init::Zero, 0, 0, true};
}

RowVector col_sum(const Matrix& m) { return m.colwise().sum(); }

}  // namespace

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

}  // namespace gmia::gnn::detail

namespace gmia::gnn {

Matrix normalize_adjacency(const Graph& g) {
  const int n = g.num_nodes();
  Matrix a = Matrix::Identity(n, n);
  for (const auto& [u, v] : g.edges()) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  const Vector inv_sqrt = a.rowwise().sum().array().rsqrt().matrix();
  return inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
}

}  // namespace gmia::gnn

namespace gmia::gnn::detail {

Network::Network(const ModelConfig& config, int feature_dim, int num_classes)
    : config_(config), feature_dim_(feature_dim), num_classes_(num_classes) {
  config_.validate();
  if (feature_dim < 1) throw InvalidArgument("feature_dim must be positive");
  if (num_classes < 1) throw InvalidArgument("num_classes must be positive");

  int in = feature_dim;
  const int h = config.hidden_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    LayerSpec spec;
    spec.in = in;
    spec.first_param = static_cast<int>(params_.size());
    const std::string p = "layer" + std::to_string(l) + ".";
    switch (config.arch) {
      case Arch::GCN:
      case Arch::DeepGcnResidual:
      case Arch::MLP:
        spec.out = h;
        params_.push_back(glorot(p + "W", in, h, in, h));
        params_.push_back(bias(p + "b", h));
        spec.residual = config.arch == Arch::DeepGcnResidual && in == h;
        break;
      case Arch::SageMean:
        spec.out = h;
        params_.push_back(glorot(p + "W", 2 * in, h, 2 * in, h));
        params_.push_back(bias(p + "b", h));
        break;
      case Arch::GIN: {
        spec.out = h;
        params_.push_back(glorot(p + "W1", in, h, in, h));
        params_.push_back(bias(p + "b1", h));
        params_.push_back(glorot(p + "W2", h, h, h, h));
        params_.push_back(bias(p + "b2", h));
        ParamSpec eps{p + "eps", 1, 1, ParamSpec::Init::GinEpsilon, 0, 0, config.gin_learn_epsilon};
        params_.push_back(eps);
        break;
      }
      case Arch::GAT: {
        const int heads = config.attention_heads;
        spec.out = config.concat_heads ? h * heads : h;
        for (int k = 0; k < heads; ++k) {
          const std::string hp = p + "head" + std::to_string(k) + ".";
          params_.push_back(glorot(hp + "W", in, h, in, h));
          params_.push_back(glorot(hp + "a_src", h, 1, h, 1));
          params_.push_back(glorot(hp + "a_dst", h, 1, h, 1));
        }
        params_.push_back(bias(p + "b", spec.out));
        break;
      }
    }
    layers_.push_back(spec);
    in = spec.out;
  }
  readout_param_ = static_cast<int>(params_.size());
  params_.push_back(glorot("readout.W", in, num_classes, in, num_classes));
  params_.push_back(bias("readout.b", num_classes));
}

PreparedGraph Network::prepare(const Graph& g) const {
  if (g.feature_dim() != feature_dim_) {
    throw InvalidArgument("graph feature_dim " + std::to_string(g.feature_dim()) +
                          " does not match model feature_dim " + std::to_string(feature_dim_));
  }
  PreparedGraph pg;
  pg.graph = &g;
  const int n = g.num_nodes();
  switch (config_.arch) {
    case Arch::GCN:
    case Arch::DeepGcnResidual:
      pg.norm_adj = normalize_adjacency(g);
      break;
    case Arch::GIN:
    case Arch::GAT:
    case Arch::SageMean: {
      pg.adj = Matrix::Zero(n, n);
      for (const auto& [u, v] : g.edges()) {
        pg.adj(u, v) = 1.0;
        pg.adj(v, u) = 1.0;
      }
      if (config_.arch == Arch::SageMean) {
        pg.mean_adj = pg.adj;
        for (int i = 0; i < n; ++i) {
          const double d = pg.adj.row(i).sum();
          if (d > 0) pg.mean_adj.row(i) /= d;
        }
      }
      break;
    }
    case Arch::MLP:
      break;
  }
  return pg;
}

Matrix Network::activate(const Matrix& pre) const {
  if (config_.activation == Activation::Identity) return pre;
  return pre.cwiseMax(0.0);
}

Matrix Network::activation_grad(const Matrix& pre, const Matrix& upstream) const {
  if (config_.activation == Activation::Identity) return upstream;
  return (pre.array() > 0.0).select(upstream, 0.0);
}

Vector Network::logits(const std::vector<Matrix>& w, const PreparedGraph& pg, Tape* tape) const {
  Matrix h = pg.graph->features();
  if (tape) tape->layers.assign(layers_.size(), LayerTape{});

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = layers_[l];
    const int p = spec.first_param;
    LayerTape local;
    LayerTape& t = tape ? tape->layers[l] : local;
    t.input = h;
    Matrix out;
    switch (config_.arch) {
      case Arch::GCN:
      case Arch::DeepGcnResidual:
        t.mixed = pg.norm_adj * h;
        t.pre = (t.mixed * w[p]).rowwise() + w[p + 1].row(0);
        out = activate(t.pre);
        if (spec.residual) out += h;
        break;
      case Arch::MLP:
        t.pre = (h * w[p]).rowwise() + w[p + 1].row(0);
        out = activate(t.pre);
        break;
      case Arch::SageMean:
        t.mixed.resize(h.rows(), 2 * h.cols());
        t.mixed << h, pg.mean_adj * h;
        t.pre = (t.mixed * w[p]).rowwise() + w[p + 1].row(0);
        out = activate(t.pre);
        break;
      case Arch::GIN: {
        const double eps = w[p + 4](0, 0);
        t.mixed = (1.0 + eps) * h + pg.adj * h;
        t.hidden_pre = (t.mixed * w[p]).rowwise() + w[p + 1].row(0);
        t.hidden = t.hidden_pre.cwiseMax(0.0);
        t.pre = (t.hidden * w[p + 2]).rowwise() + w[p + 3].row(0);
        out = activate(t.pre);
        break;
      }
      case Arch::GAT: {
        const int heads = config_.attention_heads;
        const int o = config_.hidden_dim;
        const Eigen::Index n = h.rows();
        Matrix combined = Matrix::Zero(n, spec.out);
        t.head_z.resize(static_cast<std::size_t>(heads));
        t.head_raw.resize(static_cast<std::size_t>(heads));
        t.head_alpha.resize(static_cast<std::size_t>(heads));
        for (int k = 0; k < heads; ++k) {
          const int q = p + 3 * k;
          Matrix z = h * w[q];
          const Vector s = z * w[q + 1];
          const Vector d = z * w[q + 2];
          Matrix raw = s.replicate(1, n) + d.transpose().replicate(n, 1);
          Matrix alpha = Matrix::Zero(n, n);
          for (Eigen::Index i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < n; ++j) {
              if (pg.adj(i, j) == 0.0) continue;
              const double r = raw(i, j);
              const double e = r > 0 ? r : kLeakySlope * r;
              alpha(i, j) = e;
              best = std::max(best, e);
            }
            if (!std::isfinite(best)) continue;  // isolated: contributes zero
            double total = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
              if (pg.adj(i, j) == 0.0) continue;
              alpha(i, j) = std::exp(alpha(i, j) - best);
              total += alpha(i, j);
            }
            alpha.row(i) /= total;
          }
          const Matrix head_out = alpha * z;
          if (config_.concat_heads) {
            combined.middleCols(k * o, o) = head_out;
          } else {
            combined += head_out / static_cast<double>(heads);
          }
          const auto ks = static_cast<std::size_t>(k);
          t.head_z[ks] = std::move(z);
          t.head_raw[ks] = std::move(raw);
          t.head_alpha[ks] = std::move(alpha);
        }
        t.pre = combined.rowwise() + w[p + 3 * heads].row(0);
        out = activate(t.pre);
        break;
      }
    }
    h = std::move(out);
  }

  const RowVector pooled = h.colwise().mean();
  Vector scores = (pooled * w[readout_param_]).transpose() + w[readout_param_ + 1].row(0).transpose();
  if (tape) {
    tape->last = std::move(h);
    tape->pooled = pooled;
  }
  return scores;
}

void Network::backward(const std::vector<Matrix>& w, const PreparedGraph& pg, const Tape& tape,
                       const Vector& dlogits, std::vector<Matrix>& grads) const {
  const int r = readout_param_;
  grads[r] += tape.pooled.transpose() * dlogits.transpose();
  grads[r + 1] += dlogits.transpose();
  const RowVector dpooled = dlogits.transpose() * w[r].transpose();
  const auto n = tape.last.rows();
  Matrix dh = dpooled.replicate(n, 1) / static_cast<double>(n);

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const LayerSpec& spec = layers_[li];
    const LayerTape& t = tape.layers[li];
    const int p = spec.first_param;
    Matrix dpre = activation_grad(t.pre, dh);
    Matrix dinput;
    switch (config_.arch) {
      case Arch::GCN:
      case Arch::DeepGcnResidual:
        grads[p] += t.mixed.transpose() * dpre;
        grads[p + 1] += col_sum(dpre);
        dinput = pg.norm_adj.transpose() * (dpre * w[p].transpose());
        if (spec.residual) dinput += dh;
        break;
      case Arch::MLP:
        grads[p] += t.input.transpose() * dpre;
        grads[p + 1] += col_sum(dpre);
        dinput = dpre * w[p].transpose();
        break;
      case Arch::SageMean: {
        grads[p] += t.mixed.transpose() * dpre;
        grads[p + 1] += col_sum(dpre);
        const Matrix dmixed = dpre * w[p].transpose();
        const auto in = t.input.cols();
        dinput = dmixed.leftCols(in) + pg.mean_adj.transpose() * dmixed.rightCols(in);
        break;
      }
      case Arch::GIN: {
        grads[p + 2] += t.hidden.transpose() * dpre;
        grads[p + 3] += col_sum(dpre);
        const Matrix dhidden = dpre * w[p + 2].transpose();
        const Matrix dhidden_pre = (t.hidden_pre.array() > 0.0).select(dhidden, 0.0);
        grads[p] += t.mixed.transpose() * dhidden_pre;
        grads[p + 1] += col_sum(dhidden_pre);
        const Matrix dmixed = dhidden_pre * w[p].transpose();
        grads[p + 4](0, 0) += (dmixed.array() * t.input.array()).sum();
        const double eps = w[p + 4](0, 0);
        dinput = (1.0 + eps) * dmixed + pg.adj.transpose() * dmixed;
        break;
      }
      case Arch::GAT: {
        const int heads = config_.attention_heads;
        const int o = config_.hidden_dim;
        grads[p + 3 * heads] += col_sum(dpre);
        dinput = Matrix::Zero(t.input.rows(), t.input.cols());
        for (int k = 0; k < heads; ++k) {
          const int q = p + 3 * k;
          const auto ks = static_cast<std::size_t>(k);
          const Matrix& z = t.head_z[ks];
          const Matrix& alpha = t.head_alpha[ks];
          const Matrix& raw = t.head_raw[ks];
          const Matrix dout = config_.concat_heads
                                  ? Matrix(dpre.middleCols(k * o, o))
                                  : Matrix(dpre / static_cast<double>(heads));
          Matrix dz = alpha.transpose() * dout;
          const Matrix dalpha = dout * z.transpose();
          // Row-wise softmax Jacobian, then LeakyReLU slope, restricted to edges.
          const Vector row_dot = (alpha.array() * dalpha.array()).rowwise().sum();
          Matrix draw = alpha.array() * (dalpha.colwise() - row_dot).array();
          draw = (raw.array() > 0.0).select(draw, kLeakySlope * draw);
          draw = (pg.adj.array() != 0.0).select(draw, 0.0);
          const Vector ds = draw.rowwise().sum();
          const Vector dd = draw.colwise().sum().transpose();
          grads[q + 1] += z.transpose() * ds;
          grads[q + 2] += z.transpose() * dd;
          dz += ds * w[q + 1].transpose() + dd * w[q + 2].transpose();
          grads[q] += t.input.transpose() * dz;
          dinput += dz * w[q].transpose();
        }
        break;
      }
    }
    dh = std::move(dinput);
  }
}

}  // namespace gmia::gnn::detail
