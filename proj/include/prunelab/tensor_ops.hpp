#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "prunelab/tensor.hpp"
#include "prunelab/threading.hpp"

namespace prunelab {

inline Index div_ceil(Index a, Index b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
inline Index div_floor(Index a, Index b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

inline Index conv_out_extent(Index in, Index kernel, Index stride, Index pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

inline Index pool_out_extent(Index in, Index kernel, Index stride) {
  return (in - kernel) / stride + 1;
}

/// Direct 2-D convolution, zero padding. in [B,Ci,H,W], weight [Co,Ci,K,K],
/// bias [Co] -> out [B,Co,Ho,Wo]. The inner loop runs over output columns of
/// one row so stride-1 layers reduce to contiguous axpy sweeps.
template <typename Scalar>
TensorT<Scalar> conv2d_forward(const TensorT<Scalar>& in, const TensorT<Scalar>& weight,
                               const TensorT<Scalar>& bias, Index stride, Index pad) {
  require(in.rank() == 4 && weight.rank() == 4, "conv2d expects 4-d input and weight");
  const Index B = in.extent(0), Ci = in.extent(1), H = in.extent(2), W = in.extent(3);
  const Index Co = weight.extent(0), K = weight.extent(2);
  require(weight.extent(1) == Ci, "conv2d input channels mismatch");
  require(weight.extent(3) == K, "conv2d kernel must be square");
  require(bias.size() == Co, "conv2d bias size mismatch");
  const Index Ho = conv_out_extent(H, K, stride, pad);
  const Index Wo = conv_out_extent(W, K, stride, pad);
  require(Ho >= 1 && Wo >= 1, "conv2d output would be empty");

  TensorT<Scalar> out({B, Co, Ho, Wo});
  const Scalar* wp = weight.data();
  parallel_for(B * Co, [&](Index bc) {
    const Index b = bc / Co, co = bc % Co;
    Scalar* out_plane = out.data() + (b * Co + co) * Ho * Wo;
    std::fill(out_plane, out_plane + Ho * Wo, bias[co]);
    for (Index ci = 0; ci < Ci; ++ci) {
      const Scalar* in_plane = in.data() + (b * Ci + ci) * H * W;
      for (Index ky = 0; ky < K; ++ky) {
        const Index oy_lo = std::max<Index>(0, div_ceil(pad - ky, stride));
        const Index oy_hi = std::min(Ho, div_floor(H - 1 + pad - ky, stride) + 1);
        for (Index kx = 0; kx < K; ++kx) {
          const Scalar w = wp[((co * Ci + ci) * K + ky) * K + kx];
          const Index ox_lo = std::max<Index>(0, div_ceil(pad - kx, stride));
          const Index ox_hi = std::min(Wo, div_floor(W - 1 + pad - kx, stride) + 1);
          for (Index oy = oy_lo; oy < oy_hi; ++oy) {
            const Scalar* in_row = in_plane + (oy * stride - pad + ky) * W - pad + kx;
            Scalar* out_row = out_plane + oy * Wo;
            if (stride == 1) {
              for (Index ox = ox_lo; ox < ox_hi; ++ox) out_row[ox] += w * in_row[ox];
            } else {
              for (Index ox = ox_lo; ox < ox_hi; ++ox) out_row[ox] += w * in_row[ox * stride];
            }
          }
        }
      }
    }
  });
  return out;
}

/// Gradients of conv2d. d_in is accumulated per batch item, d_weight per
/// output channel; both are partitioned so parallel runs reduce in the same
/// order as serial ones.
template <typename Scalar>
void conv2d_backward(const TensorT<Scalar>& in, const TensorT<Scalar>& weight,
                     const TensorT<Scalar>& d_out, Index stride, Index pad,
                     TensorT<Scalar>* d_in, TensorT<Scalar>* d_weight, TensorT<Scalar>* d_bias) {
  const Index B = in.extent(0), Ci = in.extent(1), H = in.extent(2), W = in.extent(3);
  const Index Co = weight.extent(0), K = weight.extent(2);
  const Index Ho = d_out.extent(2), Wo = d_out.extent(3);
  const Scalar* wp = weight.data();

  if (d_in != nullptr) {
    *d_in = TensorT<Scalar>(in.shape());
    parallel_for(B, [&](Index b) {
      for (Index co = 0; co < Co; ++co) {
        const Scalar* g_plane = d_out.data() + (b * Co + co) * Ho * Wo;
        for (Index ci = 0; ci < Ci; ++ci) {
          Scalar* di_plane = d_in->data() + (b * Ci + ci) * H * W;
          for (Index ky = 0; ky < K; ++ky) {
            const Index oy_lo = std::max<Index>(0, div_ceil(pad - ky, stride));
            const Index oy_hi = std::min(Ho, div_floor(H - 1 + pad - ky, stride) + 1);
            for (Index kx = 0; kx < K; ++kx) {
              const Scalar w = wp[((co * Ci + ci) * K + ky) * K + kx];
              const Index ox_lo = std::max<Index>(0, div_ceil(pad - kx, stride));
              const Index ox_hi = std::min(Wo, div_floor(W - 1 + pad - kx, stride) + 1);
              for (Index oy = oy_lo; oy < oy_hi; ++oy) {
                Scalar* di_row = di_plane + (oy * stride - pad + ky) * W - pad + kx;
                const Scalar* g_row = g_plane + oy * Wo;
                if (stride == 1) {
                  for (Index ox = ox_lo; ox < ox_hi; ++ox) di_row[ox] += w * g_row[ox];
                } else {
                  for (Index ox = ox_lo; ox < ox_hi; ++ox) di_row[ox * stride] += w * g_row[ox];
                }
              }
            }
          }
        }
      }
    });
  }

  if (d_weight != nullptr) {
    *d_weight = TensorT<Scalar>(weight.shape());
    *d_bias = TensorT<Scalar>(std::vector<Index>{Co});
    parallel_for(Co, [&](Index co) {
      Scalar* dw = d_weight->data() + co * Ci * K * K;
      Scalar db = 0;
      for (Index b = 0; b < B; ++b) {
        const Scalar* g_plane = d_out.data() + (b * Co + co) * Ho * Wo;
        for (Index i = 0; i < Ho * Wo; ++i) db += g_plane[i];
        for (Index ci = 0; ci < Ci; ++ci) {
          const Scalar* in_plane = in.data() + (b * Ci + ci) * H * W;
          for (Index ky = 0; ky < K; ++ky) {
            const Index oy_lo = std::max<Index>(0, div_ceil(pad - ky, stride));
            const Index oy_hi = std::min(Ho, div_floor(H - 1 + pad - ky, stride) + 1);
            for (Index kx = 0; kx < K; ++kx) {
              const Index ox_lo = std::max<Index>(0, div_ceil(pad - kx, stride));
              const Index ox_hi = std::min(Wo, div_floor(W - 1 + pad - kx, stride) + 1);
              Scalar acc = 0;
              for (Index oy = oy_lo; oy < oy_hi; ++oy) {
                const Scalar* in_row = in_plane + (oy * stride - pad + ky) * W - pad + kx;
                const Scalar* g_row = g_plane + oy * Wo;
                if (stride == 1) {
                  for (Index ox = ox_lo; ox < ox_hi; ++ox) acc += in_row[ox] * g_row[ox];
                } else {
                  for (Index ox = ox_lo; ox < ox_hi; ++ox) acc += in_row[ox * stride] * g_row[ox];
                }
              }
              dw[(ci * K + ky) * K + kx] += acc;
            }
          }
        }
      }
      (*d_bias)[co] = db;
    });
  }
}

template <typename Scalar>
TensorT<Scalar> relu_forward(const TensorT<Scalar>& in) {
  TensorT<Scalar> out(in.shape());
  out.array() = in.array().max(Scalar(0));
  return out;
}

/// Gradient passes exactly where the forward output was > 0.
template <typename Scalar>
TensorT<Scalar> relu_backward(const TensorT<Scalar>& out, const TensorT<Scalar>& d_out) {
  TensorT<Scalar> d_in(out.shape());
  d_in.array() = (out.array() > Scalar(0)).select(d_out.array(), Scalar(0));
  return d_in;
}

/// Max pooling; ties broken toward the lowest linear input offset (the first
/// maximum in row-major window order). argmax stores flat offsets into `in`.
template <typename Scalar>
TensorT<Scalar> maxpool_forward(const TensorT<Scalar>& in, Index kernel, Index stride,
                                std::vector<Index>* argmax) {
  require(in.rank() == 4, "maxpool expects 4-d input");
  const Index B = in.extent(0), C = in.extent(1), H = in.extent(2), W = in.extent(3);
  const Index Ho = pool_out_extent(H, kernel, stride);
  const Index Wo = pool_out_extent(W, kernel, stride);
  require(Ho >= 1 && Wo >= 1, "maxpool output would be empty");
  TensorT<Scalar> out({B, C, Ho, Wo});
  argmax->assign(static_cast<std::size_t>(out.size()), 0);
  const Scalar* ip = in.data();
  Scalar* op = out.data();
  Index o = 0;
  for (Index bc = 0; bc < B * C; ++bc) {
    const Index plane = bc * H * W;
    for (Index oy = 0; oy < Ho; ++oy) {
      for (Index ox = 0; ox < Wo; ++ox, ++o) {
        const Index y0 = oy * stride, x0 = ox * stride;
        Index best = plane + y0 * W + x0;
        Scalar best_v = ip[best];
        for (Index ky = 0; ky < kernel; ++ky) {
          const Index row = plane + (y0 + ky) * W + x0;
          for (Index kx = 0; kx < kernel; ++kx) {
            if (ip[row + kx] > best_v) {
              best_v = ip[row + kx];
              best = row + kx;
            }
          }
        }
        op[o] = best_v;
        (*argmax)[static_cast<std::size_t>(o)] = best;
      }
    }
  }
  return out;
}

template <typename Scalar>
TensorT<Scalar> maxpool_backward(const std::vector<Index>& in_shape,
                                 const std::vector<Index>& argmax,
                                 const TensorT<Scalar>& d_out) {
  TensorT<Scalar> d_in(in_shape);
  const Scalar* gp = d_out.data();
  for (Index o = 0; o < d_out.size(); ++o) d_in[argmax[static_cast<std::size_t>(o)]] += gp[o];
  return d_in;
}

/// Fully connected layer: out = in * weight^T + bias; in [B,F], weight [O,F].
template <typename Scalar>
TensorT<Scalar> dense_forward(const TensorT<Scalar>& in, const TensorT<Scalar>& weight,
                              const TensorT<Scalar>& bias) {
  require(in.rank() == 2 && weight.rank() == 2, "dense expects 2-d input and weight");
  const Index B = in.extent(0), F = in.extent(1), O = weight.extent(0);
  require(weight.extent(1) == F, "dense in_features mismatch");
  require(bias.size() == O, "dense bias size mismatch");
  TensorT<Scalar> out({B, O});
  auto X = in.matrix(B, F);
  auto Wm = weight.matrix(O, F);
  auto Y = out.matrix(B, O);
  Y.noalias() = X * Wm.transpose();
  Y.rowwise() += bias.matrix(1, O).row(0);
  return out;
}

template <typename Scalar>
void dense_backward(const TensorT<Scalar>& in, const TensorT<Scalar>& weight,
                    const TensorT<Scalar>& d_out, TensorT<Scalar>* d_in,
                    TensorT<Scalar>* d_weight, TensorT<Scalar>* d_bias) {
  const Index B = in.extent(0), F = in.extent(1), O = weight.extent(0);
  auto X = in.matrix(B, F);
  auto Wm = weight.matrix(O, F);
  auto G = d_out.matrix(B, O);
  if (d_in != nullptr) {
    *d_in = TensorT<Scalar>(in.shape());
    d_in->matrix(B, F).noalias() = G * Wm;
  }
  if (d_weight != nullptr) {
    *d_weight = TensorT<Scalar>(weight.shape());
    d_weight->matrix(O, F).noalias() = G.transpose() * X;
    *d_bias = TensorT<Scalar>(std::vector<Index>{O});
    d_bias->matrix(1, O).row(0) = G.colwise().sum();
  }
}

/// Mean softmax cross-entropy over the batch. Returns the loss and fills
/// `probs` with the row-wise softmax (kept for the closed-form gradient).
template <typename Scalar>
Scalar softmax_cross_entropy(const TensorT<Scalar>& logits, std::span<const int> labels,
                             TensorT<Scalar>* probs) {
  const Index B = logits.extent(0), C = logits.extent(1);
  require(static_cast<Index>(labels.size()) == B, "label count must match batch size");
  *probs = TensorT<Scalar>(logits.shape());
  const Scalar* lp = logits.data();
  Scalar* pp = probs->data();
  Scalar loss = 0;
  for (Index b = 0; b < B; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    require(y >= 0 && y < C, "label out of range");
    const Scalar* row = lp + b * C;
    Scalar m = row[0];
    for (Index c = 1; c < C; ++c) m = std::max(m, row[c]);
    Scalar z = 0;
    for (Index c = 0; c < C; ++c) z += std::exp(row[c] - m);
    const Scalar lse = m + std::log(z);
    loss += lse - row[y];
    for (Index c = 0; c < C; ++c) pp[b * C + c] = std::exp(row[c] - m) / z;
  }
  return loss / static_cast<Scalar>(B);
}

/// d(loss)/d(logits) = (softmax - onehot) / B, scaled by grad_scale.
template <typename Scalar>
TensorT<Scalar> softmax_cross_entropy_backward(const TensorT<Scalar>& probs,
                                               std::span<const int> labels, Scalar grad_scale) {
  const Index B = probs.extent(0), C = probs.extent(1);
  TensorT<Scalar> d(probs.shape());
  const Scalar w = grad_scale / static_cast<Scalar>(B);
  d.array() = probs.array() * w;
  for (Index b = 0; b < B; ++b) d[b * C + labels[static_cast<std::size_t>(b)]] -= w;
  return d;
}

}  // namespace prunelab
