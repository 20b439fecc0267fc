#include "lrf/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "lrf/errors.hpp"
#include "lrf/kernels.hpp"

namespace lrf {

namespace {

using i64 = std::int64_t;

// (B,Cin,H,W) view of a rank-3 or rank-4 tensor.
struct ConvDims {
  i64 B, C, H, W;
};

ConvDims conv_dims(const Tensor& t, const char* op) {
  if (t.rank() == 3) return {1, t.extent(0), t.extent(1), t.extent(2)};
  if (t.rank() == 4) return {t.extent(0), t.extent(1), t.extent(2), t.extent(3)};
  throw DimError(std::string(op) + ": expected rank 3 or 4, got shape " + t.shape_str());
}

}  // namespace

ValueId Tape::push(Tensor value, BackFn back, Param* bound) {
  nodes_.push_back(Node{std::move(value), Tensor(), bound, std::move(back)});
  return static_cast<ValueId>(nodes_.size() - 1);
}

void Tape::check_id(ValueId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw ContractError("tape: value id " + std::to_string(id) + " out of range");
}

ValueId Tape::constant(Tensor t) { return push(std::move(t), nullptr); }

ValueId Tape::leaf(Param& p) { return push(p.value, nullptr, &p); }

ValueId Tape::linear(ValueId x, ValueId w, ValueId b) {
  check_id(x);
  check_id(w);
  check_id(b);
  const Tensor& xv = val(x);
  const Tensor& wv = val(w);
  const Tensor& bv = val(b);
  if (xv.rank() != 2 || wv.rank() != 2)
    throw DimError("linear: expected matrices, got " + xv.shape_str() + " and " + wv.shape_str());
  if (xv.extent(1) != wv.extent(0))
    throw DimError("linear: input shape " + xv.shape_str() + " does not match weight shape " +
                   wv.shape_str());
  const i64 N = xv.extent(0), Din = xv.extent(1), Dout = wv.extent(1);
  if (bv.numel() != Dout)
    throw DimError("linear: bias shape " + bv.shape_str() + " does not match weight shape " +
                   wv.shape_str());

  Tensor y({N, Dout});
  kernels::linear_forward(xv.data(), wv.data(), bv.data(), y.data(), N, Din, Dout);
  return push(std::move(y), [x, w, b, N, Din, Dout](Tape& t, const Tensor& g) {
    kernels::linear_backward(t.val(x).data(), t.val(w).data(), g.data(), t.grad_mut(x).data(),
                             t.grad_mut(w).data(), t.grad_mut(b).data(), N, Din, Dout);
  });
}

ValueId Tape::conv2d(ValueId x, ValueId w, ValueId b) {
  check_id(x);
  check_id(w);
  check_id(b);
  const Tensor& xv = val(x);
  const Tensor& wv = val(w);
  const Tensor& bv = val(b);
  const ConvDims d = conv_dims(xv, "conv2d");
  if (wv.rank() != 4)
    throw DimError("conv2d: kernel tensor must be rank 4, got " + wv.shape_str());
  const i64 Cout = wv.extent(0), k = wv.extent(2);
  if (k % 2 == 0) throw ConfigError("conv2d: kernel size must be odd, got " + std::to_string(k));
  if (wv.extent(3) != k)
    throw DimError("conv2d: kernels must be square, got " + wv.shape_str());
  if (wv.extent(1) != d.C)
    throw DimError("conv2d: input channels " + xv.shape_str() + " do not match kernel shape " +
                   wv.shape_str());
  if (bv.numel() != Cout)
    throw DimError("conv2d: bias shape " + bv.shape_str() + " does not match kernel shape " +
                   wv.shape_str());

  std::vector<i64> out_shape = xv.rank() == 3 ? std::vector<i64>{Cout, d.H, d.W}
                                              : std::vector<i64>{d.B, Cout, d.H, d.W};
  Tensor y(std::move(out_shape));
  kernels::conv2d_forward(xv.data(), wv.data(), bv.data(), y.data(), d.B, d.C, d.H, d.W, Cout, k);
  return push(std::move(y), [x, w, b, d, Cout, k](Tape& t, const Tensor& g) {
    kernels::conv2d_backward_input(g.data(), t.val(w).data(), t.grad_mut(x).data(), d.B, d.C, d.H,
                                   d.W, Cout, k);
    kernels::conv2d_backward_weights(t.val(x).data(), g.data(), t.grad_mut(w).data(),
                                     t.grad_mut(b).data(), d.B, d.C, d.H, d.W, Cout, k);
  });
}

ValueId Tape::sigmoid(ValueId x) {
  check_id(x);
  const Tensor& xv = val(x);
  Tensor y(xv.shape());
  kernels::sigmoid(xv.data(), y.data(), xv.numel());
  ValueId out = push(std::move(y), nullptr);
  nodes_.back().back = [x, out](Tape& t, const Tensor& g) {
    const Tensor& yv = t.val(out);
    Tensor& gx = t.grad_mut(x);
    for (i64 i = 0; i < g.numel(); ++i) gx[i] += g[i] * yv[i] * (1.0 - yv[i]);
  };
  return out;
}

ValueId Tape::relu(ValueId x) {
  check_id(x);
  const Tensor& xv = val(x);
  Tensor y(xv.shape());
  for (i64 i = 0; i < xv.numel(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return push(std::move(y), [x](Tape& t, const Tensor& g) {
    const Tensor& xin = t.val(x);
    Tensor& gx = t.grad_mut(x);
    for (i64 i = 0; i < g.numel(); ++i)
      if (xin[i] > 0.0) gx[i] += g[i];
  });
}

ValueId Tape::mul(ValueId a, ValueId b) {
  check_id(a);
  check_id(b);
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  require_same_shape(av, bv, "eltwise_mul");
  Tensor y(av.shape());
  for (i64 i = 0; i < av.numel(); ++i) y[i] = av[i] * bv[i];
  return push(std::move(y), [a, b](Tape& t, const Tensor& g) {
    const Tensor& av2 = t.val(a);
    const Tensor& bv2 = t.val(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (i64 i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * bv2[i];
      gb[i] += g[i] * av2[i];
    }
  });
}

ValueId Tape::add(ValueId a, ValueId b) {
  check_id(a);
  check_id(b);
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  require_same_shape(av, bv, "add");
  Tensor y(av.shape());
  for (i64 i = 0; i < av.numel(); ++i) y[i] = av[i] + bv[i];
  return push(std::move(y), [a, b](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (i64 i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

ValueId Tape::sub(ValueId a, ValueId b) {
  check_id(a);
  check_id(b);
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  require_same_shape(av, bv, "sub");
  Tensor y(av.shape());
  for (i64 i = 0; i < av.numel(); ++i) y[i] = av[i] - bv[i];
  return push(std::move(y), [a, b](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (i64 i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

ValueId Tape::scale(ValueId a, double c) {
  check_id(a);
  const Tensor& av = val(a);
  Tensor y(av.shape());
  for (i64 i = 0; i < av.numel(); ++i) y[i] = c * av[i];
  return push(std::move(y), [a, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 i = 0; i < g.numel(); ++i) ga[i] += c * g[i];
  });
}

ValueId Tape::abs(ValueId a) {
  check_id(a);
  const Tensor& av = val(a);
  Tensor y(av.shape());
  for (i64 i = 0; i < av.numel(); ++i) y[i] = std::fabs(av[i]);
  return push(std::move(y), [a](Tape& t, const Tensor& g) {
    const Tensor& av2 = t.val(a);
    Tensor& ga = t.grad_mut(a);
    for (i64 i = 0; i < g.numel(); ++i) {
      if (av2[i] > 0.0)
        ga[i] += g[i];
      else if (av2[i] < 0.0)
        ga[i] -= g[i];
    }
  });
}

ValueId Tape::concat_channels(ValueId a, ValueId b) {
  check_id(a);
  check_id(b);
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (av.rank() != 4 || bv.rank() != 4)
    throw DimError("concat_channels: expected rank-4 tensors, got " + av.shape_str() + " and " +
                   bv.shape_str());
  if (av.extent(0) != bv.extent(0) || av.extent(2) != bv.extent(2) ||
      av.extent(3) != bv.extent(3))
    throw DimError("concat_channels: shape mismatch " + av.shape_str() + " vs " + bv.shape_str());
  const i64 B = av.extent(0), Ca = av.extent(1), Cb = bv.extent(1);
  const i64 plane = av.extent(2) * av.extent(3);
  Tensor y({B, Ca + Cb, av.extent(2), av.extent(3)});
  for (i64 bi = 0; bi < B; ++bi) {
    double* dst = y.data() + bi * (Ca + Cb) * plane;
    const double* pa = av.data() + bi * Ca * plane;
    const double* pb = bv.data() + bi * Cb * plane;
    for (i64 i = 0; i < Ca * plane; ++i) dst[i] = pa[i];
    for (i64 i = 0; i < Cb * plane; ++i) dst[Ca * plane + i] = pb[i];
  }
  return push(std::move(y), [a, b, B, Ca, Cb, plane](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (i64 bi = 0; bi < B; ++bi) {
      const double* src = g.data() + bi * (Ca + Cb) * plane;
      double* pa = ga.data() + bi * Ca * plane;
      double* pb = gb.data() + bi * Cb * plane;
      for (i64 i = 0; i < Ca * plane; ++i) pa[i] += src[i];
      for (i64 i = 0; i < Cb * plane; ++i) pb[i] += src[Ca * plane + i];
    }
  });
}

ValueId Tape::slice_channels(ValueId a, i64 c0, i64 c1) {
  check_id(a);
  const Tensor& av = val(a);
  if (av.rank() != 4)
    throw DimError("slice_channels: expected rank-4 tensor, got " + av.shape_str());
  const i64 B = av.extent(0), C = av.extent(1);
  if (c0 < 0 || c1 <= c0 || c1 > C)
    throw ContractError("slice_channels: [" + std::to_string(c0) + "," + std::to_string(c1) +
                        ") out of range for " + av.shape_str());
  const i64 plane = av.extent(2) * av.extent(3);
  Tensor y({B, c1 - c0, av.extent(2), av.extent(3)});
  for (i64 bi = 0; bi < B; ++bi)
    for (i64 c = c0; c < c1; ++c) {
      const double* src = av.data() + (bi * C + c) * plane;
      double* dst = y.data() + (bi * (c1 - c0) + (c - c0)) * plane;
      for (i64 i = 0; i < plane; ++i) dst[i] = src[i];
    }
  return push(std::move(y), [a, c0, c1, B, C, plane](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 bi = 0; bi < B; ++bi)
      for (i64 c = c0; c < c1; ++c) {
        const double* src = g.data() + (bi * (c1 - c0) + (c - c0)) * plane;
        double* dst = ga.data() + (bi * C + c) * plane;
        for (i64 i = 0; i < plane; ++i) dst[i] += src[i];
      }
  });
}

ValueId Tape::broadcast_channels(ValueId a, i64 c) {
  check_id(a);
  const Tensor& av = val(a);
  if (av.rank() != 4 || av.extent(1) != 1)
    throw DimError("broadcast_channels: expected (B,1,H,W), got " + av.shape_str());
  const i64 B = av.extent(0), plane = av.extent(2) * av.extent(3);
  Tensor y({B, c, av.extent(2), av.extent(3)});
  for (i64 bi = 0; bi < B; ++bi) {
    const double* src = av.data() + bi * plane;
    for (i64 ci = 0; ci < c; ++ci) {
      double* dst = y.data() + (bi * c + ci) * plane;
      for (i64 i = 0; i < plane; ++i) dst[i] = src[i];
    }
  }
  return push(std::move(y), [a, c, B, plane](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 bi = 0; bi < B; ++bi) {
      double* dst = ga.data() + bi * plane;
      for (i64 ci = 0; ci < c; ++ci) {
        const double* src = g.data() + (bi * c + ci) * plane;
        for (i64 i = 0; i < plane; ++i) dst[i] += src[i];
      }
    }
  });
}

ValueId Tape::reshape(ValueId a, std::vector<i64> shape) {
  check_id(a);
  const Tensor& av = val(a);
  if (Tensor::shape_numel(shape) != av.numel())
    throw DimError("reshape: cannot view " + av.shape_str() + " as requested shape");
  Tensor y(std::move(shape), std::vector<double>(av.data(), av.data() + av.numel()));
  return push(std::move(y), [a](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 i = 0; i < g.numel(); ++i) ga[i] += g[i];
  });
}

ValueId Tape::avg_pool2x2(ValueId a) {
  check_id(a);
  const Tensor& av = val(a);
  if (av.rank() != 4) throw DimError("avg_pool2x2: expected rank-4 tensor, got " + av.shape_str());
  const i64 B = av.extent(0), C = av.extent(1), H = av.extent(2), W = av.extent(3);
  if (H % 2 != 0 || W % 2 != 0)
    throw ConfigError("avg_pool2x2: spatial dims must be even, got " + av.shape_str());
  Tensor y({B, C, H / 2, W / 2});
  for (i64 p = 0; p < B * C; ++p) {
    const double* src = av.data() + p * H * W;
    double* dst = y.data() + p * (H / 2) * (W / 2);
    for (i64 oh = 0; oh < H / 2; ++oh)
      for (i64 ow = 0; ow < W / 2; ++ow)
        dst[oh * (W / 2) + ow] = 0.25 * (src[(2 * oh) * W + 2 * ow] + src[(2 * oh) * W + 2 * ow + 1] +
                                         src[(2 * oh + 1) * W + 2 * ow] +
                                         src[(2 * oh + 1) * W + 2 * ow + 1]);
  }
  return push(std::move(y), [a, B, C, H, W](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 p = 0; p < B * C; ++p) {
      double* dst = ga.data() + p * H * W;
      const double* src = g.data() + p * (H / 2) * (W / 2);
      for (i64 oh = 0; oh < H / 2; ++oh)
        for (i64 ow = 0; ow < W / 2; ++ow) {
          const double gv = 0.25 * src[oh * (W / 2) + ow];
          dst[(2 * oh) * W + 2 * ow] += gv;
          dst[(2 * oh) * W + 2 * ow + 1] += gv;
          dst[(2 * oh + 1) * W + 2 * ow] += gv;
          dst[(2 * oh + 1) * W + 2 * ow + 1] += gv;
        }
    }
  });
}

ValueId Tape::sum_all(ValueId a) {
  check_id(a);
  const Tensor& av = val(a);
  double acc = 0.0;
  for (i64 i = 0; i < av.numel(); ++i) acc += av[i];
  return push(Tensor::scalar(acc), [a](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 i = 0; i < ga.numel(); ++i) ga[i] += g[0];
  });
}

ValueId Tape::mean_all(ValueId a) {
  check_id(a);
  const Tensor& av = val(a);
  const double inv = 1.0 / static_cast<double>(av.numel());
  double acc = 0.0;
  for (i64 i = 0; i < av.numel(); ++i) acc += av[i];
  return push(Tensor::scalar(acc * inv), [a, inv](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (i64 i = 0; i < ga.numel(); ++i) ga[i] += g[0] * inv;
  });
}

ValueId Tape::gather(ValueId a, std::vector<i64> idx) {
  check_id(a);
  const Tensor& av = val(a);
  for (i64 i : idx)
    if (i < 0 || i >= av.numel())
      throw ContractError("gather: flat index " + std::to_string(i) + " out of range for " +
                          av.shape_str());
  Tensor y({static_cast<i64>(idx.size())});
  for (std::size_t i = 0; i < idx.size(); ++i) y[static_cast<i64>(i)] = av[idx[i]];
  return push(std::move(y), [a, idx = std::move(idx)](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < idx.size(); ++i) ga[idx[i]] += g[static_cast<i64>(i)];
  });
}

ValueId Tape::scatter_add(ValueId rows, std::vector<i64> out_shape, std::vector<i64> targets,
                          std::vector<double> coeffs) {
  check_id(rows);
  const Tensor& rv = val(rows);
  if (rv.rank() != 2) throw DimError("scatter_add: rows must be rank 2, got " + rv.shape_str());
  const i64 N = rv.extent(0), F = rv.extent(1);
  if (static_cast<i64>(targets.size()) != N * F)
    throw ContractError("scatter_add: expected " + std::to_string(N * F) + " targets, got " +
                        std::to_string(targets.size()));
  if (!coeffs.empty() && static_cast<i64>(coeffs.size()) != N)
    throw ContractError("scatter_add: coeffs must have one entry per row");
  const i64 out_n = Tensor::shape_numel(out_shape);
  for (i64 tgt : targets)
    if (tgt < 0 || tgt >= out_n)
      throw ContractError("scatter_add: target " + std::to_string(tgt) + " outside output");

  Tensor y(std::move(out_shape));
  for (i64 i = 0; i < N; ++i) {
    const double c = coeffs.empty() ? 1.0 : coeffs[static_cast<std::size_t>(i)];
    for (i64 f = 0; f < F; ++f)
      y[targets[static_cast<std::size_t>(i * F + f)]] += c * rv.at(i, f);
  }
  return push(std::move(y), [rows, N, F, targets = std::move(targets),
                             coeffs = std::move(coeffs)](Tape& t, const Tensor& g) {
    Tensor& gr = t.grad_mut(rows);
    for (i64 i = 0; i < N; ++i) {
      const double c = coeffs.empty() ? 1.0 : coeffs[static_cast<std::size_t>(i)];
      for (i64 f = 0; f < F; ++f)
        gr.at(i, f) += c * g[targets[static_cast<std::size_t>(i * F + f)]];
    }
  });
}

void Tape::backward(ValueId loss) {
  check_id(loss);
  if (val(loss).numel() != 1)
    throw ContractError("backward: loss must be scalar, got shape " + val(loss).shape_str());

  for (ValueId id = 0; id <= loss; ++id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    n.grad = Tensor(n.value.shape());
  }
  grad_mut(loss)[0] = 1.0;

  for (ValueId id = loss; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.back) n.back(*this, n.grad);
  }
  for (ValueId id = 0; id <= loss; ++id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.bound) {
      for (i64 i = 0; i < n.grad.numel(); ++i) n.bound->grad[i] += n.grad[i];
    }
  }
}

double grad_check(const std::function<ValueId(Tape&)>& build_loss,
                  const std::vector<Param*>& params, double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-4))
    throw ConfigError("grad_check: eps must lie in [1e-6, 1e-4]");

  for (Param* p : params) p->zero_grad();
  std::vector<Tensor> analytic;
  {
    Tape tape;
    ValueId loss = build_loss(tape);
    tape.backward(loss);
  }
  analytic.reserve(params.size());
  for (Param* p : params) analytic.push_back(p->grad);

  auto eval_loss = [&]() {
    Tape tape;
    ValueId loss = build_loss(tape);
    return tape.val(loss)[0];
  };

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = *params[pi];
    for (i64 i = 0; i < p.value.numel(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double lp = eval_loss();
      p.value[i] = saved - eps;
      const double lm = eval_loss();
      p.value[i] = saved;
      const double fd = (lp - lm) / (2.0 * eps);
      const double rel = std::fabs(analytic[pi][i] - fd) / std::max(1.0, std::fabs(fd));
      if (rel > max_rel) max_rel = rel;
    }
  }
  return max_rel;
}

}  // namespace lrf
