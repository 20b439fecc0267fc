#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "lrf/param.hpp"
#include "lrf/tensor.hpp"

namespace lrf {

using ValueId = std::int32_t;

/// Reverse-mode differentiation over an explicitly recorded op graph. The
/// graph is rebuilt on every forward pass: create a Tape, record operations,
/// call backward(loss) once, read gradients off the bound Params, drop the
/// tape. Recording order is a topological order, so backward simply walks the
/// nodes in reverse.
///
/// All forward ops are deterministic; see kernels.hpp for the threading
/// contract of the heavy ones.
class Tape {
 public:
  /// Non-learnable input. No gradient is tracked past it.
  ValueId constant(Tensor t);

  /// Learnable leaf; backward() accumulates into p.grad. The value is copied
  /// at record time, so a leaf sees the param as of this forward pass.
  ValueId leaf(Param& p);

  /// y[n,j] = sum_i x[n,i] w[i,j] + b[j];  x:(N,Din) w:(Din,Dout) b:(Dout)
  ValueId linear(ValueId x, ValueId w, ValueId b);

  /// Cross-correlation, stride 1, zero "same" padding, odd k.
  /// x:(B,Cin,H,W) or (Cin,H,W); w:(Cout,Cin,k,k); b:(Cout). Output keeps the
  /// input rank with Cin replaced by Cout.
  ValueId conv2d(ValueId x, ValueId w, ValueId b);

  ValueId sigmoid(ValueId x);
  ValueId relu(ValueId x);
  ValueId mul(ValueId a, ValueId b);
  ValueId add(ValueId a, ValueId b);
  ValueId sub(ValueId a, ValueId b);
  ValueId scale(ValueId a, double c);
  ValueId abs(ValueId a);

  /// (B,Ca,H,W) + (B,Cb,H,W) -> (B,Ca+Cb,H,W), a first.
  ValueId concat_channels(ValueId a, ValueId b);
  /// Channels [c0, c1) of a rank-4 tensor.
  ValueId slice_channels(ValueId a, std::int64_t c0, std::int64_t c1);
  /// (B,1,H,W) -> (B,c,H,W) by copying the single channel.
  ValueId broadcast_channels(ValueId a, std::int64_t c);
  ValueId reshape(ValueId a, std::vector<std::int64_t> shape);
  /// 2x2 average pooling, stride 2; H and W must be even.
  ValueId avg_pool2x2(ValueId a);

  ValueId sum_all(ValueId a);
  ValueId mean_all(ValueId a);

  /// out[i] = a.data[idx[i]] (flat indices).
  ValueId gather(ValueId a, std::vector<std::int64_t> idx);

  /// Scatter rows:(N,F) into a fresh tensor of out_shape:
  /// out[targets[i*F+f]] += coeff[i] * rows[i,f]. coeffs may be empty (all 1).
  ValueId scatter_add(ValueId rows, std::vector<std::int64_t> out_shape,
                      std::vector<std::int64_t> targets, std::vector<double> coeffs);

  const Tensor& val(ValueId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  /// Valid after backward().
  const Tensor& grad(ValueId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  /// Seeds d(loss)/d(loss) = 1 and accumulates into every bound Param's grad.
  /// loss must be scalar (one element), else ContractError.
  void backward(ValueId loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node;
  using BackFn = std::function<void(Tape&, const Tensor&)>;

  struct Node {
    Tensor value;
    Tensor grad;
    Param* bound = nullptr;
    BackFn back;  // adds this node's contribution into parent grads
  };

  ValueId push(Tensor value, BackFn back, Param* bound = nullptr);
  Tensor& grad_mut(ValueId id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  void check_id(ValueId id) const;

  // deque: recording new ops must not invalidate returned value references
  std::deque<Node> nodes_;
};

/// Max over params and elements of |analytic - central difference| /
/// max(1, |central difference|). build_loss must rebuild the graph from the
/// params' current values and return a scalar loss id. eps must lie in
/// [1e-6, 1e-4].
double grad_check(const std::function<ValueId(Tape&)>& build_loss,
                  const std::vector<Param*>& params, double eps);

}  // namespace lrf
