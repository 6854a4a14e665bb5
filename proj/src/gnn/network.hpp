#pragma once

// Forward and reverse passes of the layer stack. Private to the engine.

#include <vector>

#include "gmia/gnn/model.hpp"

namespace gmia::gnn::detail {

/// Per-graph operators, built once per graph and reused every epoch.
struct PreparedGraph {
  const Graph* graph = nullptr;
  Matrix norm_adj;  // D^-1/2 (A + I) D^-1/2
  Matrix adj;       // binary A
  Matrix mean_adj;  // D^-1 A, zero rows for isolated nodes
};

struct LayerTape {
  Matrix input;
  Matrix mixed;   // aggregated input fed to the affine map
  Matrix pre;     // pre-activation
  Matrix hidden_pre;  // GIN inner MLP pre-activation
  Matrix hidden;      // GIN inner MLP output
  std::vector<Matrix> head_z;
  std::vector<Matrix> head_raw;
  std::vector<Matrix> head_alpha;
};

struct Tape {
  std::vector<LayerTape> layers;
  Matrix last;
  RowVector pooled;
};

class Network {
 public:
  Network(const ModelConfig& config, int feature_dim, int num_classes);

  const std::vector<ParamSpec>& params() const { return params_; }
  PreparedGraph prepare(const Graph& g) const;

  /// Class scores before softmax. Fills `tape` when non-null.
  Vector logits(const std::vector<Matrix>& w, const PreparedGraph& pg, Tape* tape) const;

  /// Accumulates d(loss)/d(weights) into `grads` given d(loss)/d(logits).
  void backward(const std::vector<Matrix>& w, const PreparedGraph& pg, const Tape& tape,
                const Vector& dlogits, std::vector<Matrix>& grads) const;

 private:
  struct LayerSpec {
    int in = 0;
    int out = 0;  // output width
    int first_param = 0;
    bool residual = false;
  };

  Matrix activate(const Matrix& pre) const;
  Matrix activation_grad(const Matrix& pre, const Matrix& upstream) const;

  ModelConfig config_;
  int feature_dim_;
  int num_classes_;
  std::vector<ParamSpec> params_;
  std::vector<LayerSpec> layers_;
  int readout_param_ = 0;
};

Vector softmax(const Vector& logits);

}  // namespace gmia::gnn::detail
