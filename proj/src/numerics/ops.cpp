#include "propnet/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "gemm.hpp"
#include "propnet/error.hpp"

namespace propnet::ops {

namespace {

using detail::gemm_nn;
using detail::gemm_nt;
using detail::gemm_tn;

Tape& tape_of(Var v) {
  if (!v.valid()) throw TapeError("operation on an unbound Var");
  return *v.tape();
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void require_rank(const char* op, Var v, std::size_t rank) {
  if (v.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_to_string(v.shape()));
  }
}

void accumulate(Tensor* dst, const Tensor& src) {
  if (!dst) return;
  auto d = dst->data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// Unfold input[C×H×W] into columns[(C·kh·kw) × (oh·ow)].
void im2col(const double* in, std::size_t C, std::size_t H, std::size_t W, std::size_t kh, std::size_t kw,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, double* cols) {
  const std::size_t P = oh * ow;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        double* dst = cols + ((c * kh + i) * kw + j) * P;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long y = static_cast<long>(oy * stride + i) - static_cast<long>(pad);
          double* drow = dst + oy * ow;
          if (y < 0 || y >= static_cast<long>(H)) {
            std::fill(drow, drow + ow, 0.0);
            continue;
          }
          const double* srow = in + (c * H + static_cast<std::size_t>(y)) * W;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long x = static_cast<long>(ox * stride + j) - static_cast<long>(pad);
            drow[ox] = (x < 0 || x >= static_cast<long>(W)) ? 0.0 : srow[x];
          }
        }
      }
    }
  }
}

void col2im(const double* cols, std::size_t C, std::size_t H, std::size_t W, std::size_t kh, std::size_t kw,
            std::size_t stride, std::size_t pad, std::size_t oh, std::size_t ow, double* out) {
  const std::size_t P = oh * ow;
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        const double* src = cols + ((c * kh + i) * kw + j) * P;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long y = static_cast<long>(oy * stride + i) - static_cast<long>(pad);
          if (y < 0 || y >= static_cast<long>(H)) continue;
          double* orow = out + (c * H + static_cast<std::size_t>(y)) * W;
          const double* srow = src + oy * ow;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long x = static_cast<long>(ox * stride + j) - static_cast<long>(pad);
            if (x >= 0 && x < static_cast<long>(W)) orow[x] += srow[ox];
          }
        }
      }
    }
  }
}

// Softmax over the last axis, row by row.
Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.shape());
  const std::size_t n = x.shape().back();
  const std::size_t rows = x.size() / n;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = x.raw() + r * n;
    double* dst = y.raw() + r * n;
    const double mx = *std::max_element(src, src + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      dst[j] = std::exp(src[j] - mx);
      total += dst[j];
    }
    for (std::size_t j = 0; j < n; ++j) dst[j] /= total;
  }
  return y;
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape("add", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    accumulate(t.grad_target(a), g);
    accumulate(t.grad_target(b), g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape("sub", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    accumulate(t.grad_target(a), g);
    if (Tensor* gb = t.grad_target(b)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape("mul", a, b);
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_target(a)) {
      const Tensor& bv = t.value(b.id());
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Tensor* gb = t.grad_target(b)) {
      const Tensor& av = t.value(a.id());
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return tape_of(a).record(std::move(out), {a}, [a, factor](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_target(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * factor;
    }
  });
}

Var add_constant(Var a, const Tensor& c) {
  if (a.shape() != c.shape()) {
    throw DimensionError("add_constant: shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(c.shape()));
  }
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i];
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g) { accumulate(t.grad_target(a), g); });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return tape_of(a).record(Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_target(a)) {
      for (double& v : ga->data()) v += g[0];
    }
  });
}

Var mean(Var a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return tape_of(a).record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_target(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    }
  });
}

Var matmul(Var a, Var b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as.size() != 2 || bs.size() != 2 || as[1] != bs[0]) {
    throw DimensionError("matmul: incompatible shapes " + shape_to_string(as) + " and " + shape_to_string(bs));
  }
  const std::size_t m = as[0], k = as[1], n = bs[1];
  Tensor out({m, n});
  gemm_nn(m, n, k, a.value().raw(), b.value().raw(), out.raw());
  return tape_of(a).record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_target(a)) gemm_nt(m, k, n, g.raw(), t.value(b.id()).raw(), ga->raw());
    if (Tensor* gb = t.grad_target(b)) gemm_tn(k, n, m, t.value(a.id()).raw(), g.raw(), gb->raw());
  });
}

Var transpose(Var a) {
  require_rank("transpose", a, 2);
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  Tensor out({c, r});
  const Tensor& av = a.value();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return tape_of(a).record(std::move(out), {a}, [a, r, c](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_target(a)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += g[j * r + i];
    }
  });
}

Var add_row_bias(Var x, Var bias) {
  require_rank("add_row_bias", x, 2);
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (bias.shape() != Shape{n}) {
    throw DimensionError("add_row_bias: bias " + shape_to_string(bias.shape()) + " does not fit " +
                         shape_to_string(x.shape()));
  }
  Tensor out = x.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  return tape_of(x).record(std::move(out), {x, bias}, [x, bias, m, n](Tape& t, const Tensor& g) {
    accumulate(t.grad_target(x), g);
    if (Tensor* gb = t.grad_target(bias)) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*gb)[j] += g[i * n + j];
    }
  });
}

Var add_channel_bias(Var x, Var bias) {
  require_rank("add_channel_bias", x, 3);
  const std::size_t K = x.shape()[0];
  const std::size_t P = x.shape()[1] * x.shape()[2];
  if (bias.shape() != Shape{K}) {
    throw DimensionError("add_channel_bias: bias " + shape_to_string(bias.shape()) + " does not fit " +
                         shape_to_string(x.shape()));
  }
  Tensor out = x.value();
  const Tensor& bv = bias.value();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t p = 0; p < P; ++p) out[k * P + p] += bv[k];
  return tape_of(x).record(std::move(out), {x, bias}, [x, bias, K, P](Tape& t, const Tensor& g) {
    accumulate(t.grad_target(x), g);
    if (Tensor* gb = t.grad_target(bias)) {
      for (std::size_t k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::size_t p = 0; p < P; ++p) s += g[k * P + p];
        (*gb)[k] += s;
      }
    }
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return tape_of(x).record(std::move(out), {x}, [x](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_target(x)) {
      const Tensor& xv = t.value(x.id());
      for (std::size_t i = 0; i < g.size(); ++i)
        if (xv[i] > 0.0) (*gx)[i] += g[i];
    }
  });
}

Var softmax(Var x) {
  Tensor out = softmax_rows(x.value());
  const std::size_t n = x.shape().back();
  return tape_of(x).record(std::move(out), {x}, [x, n](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_target(x);
    if (!gx) return;
    const Tensor yv = softmax_rows(t.value(x.id()));
    const std::size_t rows = g.size() / n;
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[r * n + j] * yv[r * n + j];
      for (std::size_t j = 0; j < n; ++j) (*gx)[r * n + j] += yv[r * n + j] * (g[r * n + j] - dot);
    }
  });
}

Var log_softmax(Var x) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.shape().back();
  const std::size_t rows = xv.size() / n;
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = xv.raw() + r * n;
    const double mx = *std::max_element(src, src + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += std::exp(src[j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = src[j] - lse;
  }
  return tape_of(x).record(std::move(out), {x}, [x, n, rows](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_target(x);
    if (!gx) return;
    const Tensor p = softmax_rows(t.value(x.id()));
    for (std::size_t r = 0; r < rows; ++r) {
      double gs = 0.0;
      for (std::size_t j = 0; j < n; ++j) gs += g[r * n + j];
      for (std::size_t j = 0; j < n; ++j) (*gx)[r * n + j] += g[r * n + j] - p[r * n + j] * gs;
    }
  });
}

Var cross_entropy(Var logits, std::size_t label) {
  require_rank("cross_entropy", logits, 1);
  const Tensor& z = logits.value();
  if (label >= z.size()) {
    throw DimensionError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         shape_to_string(z.shape()));
  }
  const double mx = *std::max_element(z.data().begin(), z.data().end());
  double total = 0.0;
  for (double v : z.data()) total += std::exp(v - mx);
  const double loss = mx + std::log(total) - z[label];
  return tape_of(logits).record(Tensor::scalar(loss), {logits}, [logits, label](Tape& t, const Tensor& g) {
    Tensor* gz = t.grad_target(logits);
    if (!gz) return;
    const Tensor p = softmax_rows(t.value(logits.id()));
    for (std::size_t j = 0; j < p.size(); ++j) (*gz)[j] += g[0] * (p[j] - (j == label ? 1.0 : 0.0));
  });
}

Shape conv2d_output_shape(const Shape& input, const Shape& kernels, std::size_t stride, std::size_t padding) {
  if (input.size() != 3 || kernels.size() != 4) {
    throw DimensionError("conv2d: expected input [C×H×W] and kernels [K×C×kh×kw], got " +
                         shape_to_string(input) + " and " + shape_to_string(kernels));
  }
  if (input[0] != kernels[1]) {
    throw DimensionError("conv2d: input channels " + shape_to_string(input) + " do not match kernels " +
                         shape_to_string(kernels));
  }
  if (stride == 0) throw ConfigError("conv2d: stride must be positive");
  const std::size_t ph = input[1] + 2 * padding;
  const std::size_t pw = input[2] + 2 * padding;
  if (kernels[2] > ph || kernels[3] > pw) {
    throw ConfigError("conv2d: kernel " + shape_to_string(kernels) + " larger than padded input " +
                      shape_to_string(input) + " (padding " + std::to_string(padding) +
                      ") gives a non-positive output extent");
  }
  return {kernels[0], (ph - kernels[2]) / stride + 1, (pw - kernels[3]) / stride + 1};
}

Var conv2d(Var input, Var kernels, std::size_t stride, std::size_t padding) {
  const Shape out_shape = conv2d_output_shape(input.shape(), kernels.shape(), stride, padding);
  const std::size_t C = input.shape()[0], H = input.shape()[1], W = input.shape()[2];
  const std::size_t K = kernels.shape()[0], kh = kernels.shape()[2], kw = kernels.shape()[3];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  const std::size_t rows = C * kh * kw, P = oh * ow;

  std::vector<double> cols(rows * P);
  im2col(input.value().raw(), C, H, W, kh, kw, stride, padding, oh, ow, cols.data());
  Tensor out(out_shape);
  gemm_nn(K, P, rows, kernels.value().raw(), cols.data(), out.raw());

  return tape_of(input).record(
      std::move(out), {input, kernels},
      [=](Tape& t, const Tensor& g) {
        Tensor* gk = t.grad_target(kernels);
        Tensor* gi = t.grad_target(input);
        if (gk) {
          std::vector<double> c(rows * P);
          im2col(t.value(input.id()).raw(), C, H, W, kh, kw, stride, padding, oh, ow, c.data());
          gemm_nt(K, rows, P, g.raw(), c.data(), gk->raw());
        }
        if (gi) {
          std::vector<double> dcols(rows * P, 0.0);
          gemm_tn(rows, P, K, t.value(kernels.id()).raw(), g.raw(), dcols.data());
          col2im(dcols.data(), C, H, W, kh, kw, stride, padding, oh, ow, gi->raw());
        }
      });
}

Var max_pool2d(Var x, std::size_t window) {
  require_rank("max_pool2d", x, 3);
  if (window == 0) throw ConfigError("max_pool2d: window must be positive");
  const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  const std::size_t oh = (H + window - 1) / window, ow = (W + window - 1) / window;
  Tensor out({C, oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(C * oh * ow);
  const Tensor& xv = x.value();
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (c * H + oy * window) * W + ox * window;
        for (std::size_t y = oy * window; y < std::min(H, (oy + 1) * window); ++y) {
          for (std::size_t xx = ox * window; xx < std::min(W, (ox + 1) * window); ++xx) {
            const std::size_t idx = (c * H + y) * W + xx;
            if (xv[idx] > xv[best]) best = idx;
          }
        }
        const std::size_t o = (c * oh + oy) * ow + ox;
        out[o] = xv[best];
        (*argmax)[o] = best;
      }
    }
  }
  return tape_of(x).record(std::move(out), {x}, [x, argmax](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_target(x)) {
      for (std::size_t o = 0; o < g.size(); ++o) (*gx)[(*argmax)[o]] += g[o];
    }
  });
}

Var global_avg_pool(Var x) {
  require_rank("global_avg_pool", x, 3);
  const std::size_t K = x.shape()[0];
  const std::size_t P = x.shape()[1] * x.shape()[2];
  Tensor out({K});
  const Tensor& xv = x.value();
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t p = 0; p < P; ++p) s += xv[k * P + p];
    out[k] = s / static_cast<double>(P);
  }
  return tape_of(x).record(std::move(out), {x}, [x, K, P](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_target(x)) {
      const double inv = 1.0 / static_cast<double>(P);
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t p = 0; p < P; ++p) (*gx)[k * P + p] += g[k] * inv;
    }
  });
}

Var gram_matrix(Var features) {
  require_rank("gram_matrix", features, 3);
  const std::size_t K = features.shape()[0];
  const std::size_t P = features.shape()[1] * features.shape()[2];
  const double norm = 1.0 / static_cast<double>(K * P);
  const Tensor& f = features.value();
  Tensor out({K, K});
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t j = i; j < K; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < P; ++p) s += f[i * P + p] * f[j * P + p];
      out[i * K + j] = s * norm;
      out[j * K + i] = s * norm;
    }
  }
  return tape_of(features).record(std::move(out), {features}, [features, K, P, norm](Tape& t, const Tensor& g) {
    Tensor* gf = t.grad_target(features);
    if (!gf) return;
    const Tensor& f = t.value(features.id());
    // dF = (dG + dGᵀ) F · norm
    std::vector<double> sym(K * K);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) sym[i * K + j] = (g[i * K + j] + g[j * K + i]) * norm;
    gemm_nn(K, P, K, sym.data(), f.raw(), gf->raw());
  });
}

Var upper_triangle(Var square) {
  require_rank("upper_triangle", square, 2);
  const std::size_t K = square.shape()[0];
  if (square.shape()[1] != K) throw DimensionError("upper_triangle: matrix " + shape_to_string(square.shape()) + " is not square");
  Tensor out({K * (K + 1) / 2});
  const Tensor& s = square.value();
  std::size_t o = 0;
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i; j < K; ++j) out[o++] = s[i * K + j];
  return tape_of(square).record(std::move(out), {square}, [square, K](Tape& t, const Tensor& g) {
    if (Tensor* gs = t.grad_target(square)) {
      std::size_t o = 0;
      for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = i; j < K; ++j) (*gs)[i * K + j] += g[o++];
    }
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t rows = 0;
  for (const Var& p : parts) {
    Shape pt(p.shape().begin() + 1, p.shape().end());
    if (pt != tail) {
      throw DimensionError("concat: trailing shape mismatch " + shape_to_string(parts[0].shape()) + " vs " +
                           shape_to_string(p.shape()));
    }
    rows += p.shape()[0];
  }
  Shape out_shape = parts[0].shape();
  out_shape[0] = rows;
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.data().begin(), v.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(offset));
    offset += v.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).record(std::move(out), inputs, [inputs](Tape& t, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t n = t.value(p.id()).size();
      if (Tensor* gp = t.grad_target(p)) {
        for (std::size_t i = 0; i < n; ++i) (*gp)[i] += g[offset + i];
      }
      offset += n;
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t count) {
  if (x.shape().empty() || count == 0 || begin + count > x.shape()[0]) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_to_string(x.shape()));
  }
  const std::size_t stride = x.value().size() / x.shape()[0];
  Shape s = x.shape();
  s[0] = count;
  const auto first = x.value().data().begin() + static_cast<std::ptrdiff_t>(begin * stride);
  Tensor out(s, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * stride)));
  return tape_of(x).record(std::move(out), {x}, [x, begin, stride](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_target(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[begin * stride + i] += g[i];
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  require_rank("slice_cols", x, 2);
  const std::size_t r = x.shape()[0], c = x.shape()[1];
  if (count == 0 || begin + count > c) {
    throw DimensionError("slice_cols: columns [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_to_string(x.shape()));
  }
  Tensor out({r, count});
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = xv[i * c + begin + j];
  return tape_of(x).record(std::move(out), {x}, [x, r, c, begin, count](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_target(x)) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j) (*gx)[i * c + begin + j] += g[i * count + j];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t r = parts[0].shape().at(0);
  std::size_t c = 0;
  for (const Var& p : parts) {
    if (p.shape().size() != 2 || p.shape()[0] != r) {
      throw DimensionError("concat_cols: row mismatch " + shape_to_string(parts[0].shape()) + " vs " +
                           shape_to_string(p.shape()));
    }
    c += p.shape()[1];
  }
  Tensor out({r, c});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    const std::size_t pc = v.shape()[1];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < pc; ++j) out[i * c + offset + j] = v[i * pc + j];
    offset += pc;
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).record(std::move(out), inputs, [inputs, r, c](Tape& t, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t pc = t.value(p.id()).shape()[1];
      if (Tensor* gp = t.grad_target(p)) {
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < pc; ++j) (*gp)[i * pc + j] += g[i * c + offset + j];
      }
      offset += pc;
    }
  });
}

Var row(Var x, std::size_t r) {
  require_rank("row", x, 2);
  return reshape(slice_rows(x, r, 1), Shape{x.shape()[1]});
}

Var embedding(Var table, std::span<const int> ids) {
  require_rank("embedding", table, 2);
  const std::size_t V = table.shape()[0], d = table.shape()[1];
  if (ids.empty()) throw DimensionError("embedding: empty id list");
  std::vector<int> idv(ids.begin(), ids.end());
  Tensor out({idv.size(), d});
  const Tensor& tv = table.value();
  for (std::size_t i = 0; i < idv.size(); ++i) {
    if (idv[i] < 0 || static_cast<std::size_t>(idv[i]) >= V) {
      throw DimensionError("embedding: id " + std::to_string(idv[i]) + " outside table " + shape_to_string(table.shape()));
    }
    std::copy_n(tv.raw() + static_cast<std::size_t>(idv[i]) * d, d, out.raw() + i * d);
  }
  return tape_of(table).record(std::move(out), {table}, [table, idv, d](Tape& t, const Tensor& g) {
    if (Tensor* gt = t.grad_target(table)) {
      for (std::size_t i = 0; i < idv.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) (*gt)[static_cast<std::size_t>(idv[i]) * d + j] += g[i * d + j];
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  require_rank("layer_norm", x, 2);
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw DimensionError("layer_norm: gain/bias " + shape_to_string(gain.shape()) + "/" +
                         shape_to_string(bias.shape()) + " do not fit " + shape_to_string(x.shape()));
  }
  const Tensor& xv = x.value();
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  Tensor out({n, d});
  auto xhat = std::make_shared<std::vector<double>>(n * d);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xv[i * d + j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xv[i * d + j] - mu) * (xv[i * d + j] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (xv[i * d + j] - mu) * is;
      (*xhat)[i * d + j] = h;
      out[i * d + j] = gv[j] * h + bv[j];
    }
  }
  return tape_of(x).record(std::move(out), {x, gain, bias}, [=](Tape& t, const Tensor& g) {
    if (Tensor* gg = t.grad_target(gain)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) (*gg)[j] += g[i * d + j] * (*xhat)[i * d + j];
    }
    if (Tensor* gb = t.grad_target(bias)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) (*gb)[j] += g[i * d + j];
    }
    if (Tensor* gx = t.grad_target(x)) {
      const Tensor& gv = t.value(gain.id());
      for (std::size_t i = 0; i < n; ++i) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = g[i * d + j] * gv[j];
          m1 += dh;
          m2 += dh * (*xhat)[i * d + j];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double dh = g[i * d + j] * gv[j];
          (*gx)[i * d + j] += (*inv_std)[i] * (dh - m1 - (*xhat)[i * d + j] * m2);
        }
      }
    }
  });
}

Var dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.value().size());
  Tensor out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    out[i] *= (*mask)[i];
  }
  return tape_of(x).record(std::move(out), {x}, [x, mask](Tape& t, const Tensor& g) {
    if (Tensor* gx = t.grad_target(x)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * (*mask)[i];
    }
  });
}

AttentionResult multi_head_attention(Var q, Var k, Var v, const AttentionProjections& proj, std::size_t heads,
                                     std::span<const int> key_mask) {
  require_rank("multi_head_attention", q, 2);
  require_rank("multi_head_attention", k, 2);
  require_rank("multi_head_attention", v, 2);
  const std::size_t d = q.shape()[1];
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("multi_head_attention: width " + std::to_string(d) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (k.shape() != v.shape() || k.shape()[1] != d) {
    throw DimensionError("multi_head_attention: q/k/v shapes " + shape_to_string(q.shape()) + ", " +
                         shape_to_string(k.shape()) + ", " + shape_to_string(v.shape()) + " are incompatible");
  }
  const std::size_t nq = q.shape()[0], nk = k.shape()[0];
  if (!key_mask.empty() && key_mask.size() != nk) {
    throw DimensionError("multi_head_attention: mask length " + std::to_string(key_mask.size()) +
                         " does not match " + std::to_string(nk) + " keys");
  }

  auto project = [](Var x, Var w, const std::optional<Var>& b) {
    Var y = matmul(x, w);
    return b ? add_row_bias(y, *b) : y;
  };
  Var qp = project(q, proj.wq, proj.bq);
  Var kp = project(k, proj.wk, proj.bk);
  Var vp = project(v, proj.wv, proj.bv);

  Tensor bias({nq, nk});
  if (!key_mask.empty()) {
    for (std::size_t i = 0; i < nq; ++i)
      for (std::size_t j = 0; j < nk; ++j)
        if (key_mask[j] == 0) bias[i * nk + j] = kMaskedLogit;
  }

  const std::size_t dh = d / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor weights({heads, nq, nk});
  std::vector<Var> head_out;
  head_out.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    Var qh = slice_cols(qp, h * dh, dh);
    Var kh = slice_cols(kp, h * dh, dh);
    Var vh = slice_cols(vp, h * dh, dh);
    Var scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    if (!key_mask.empty()) scores = add_constant(scores, bias);
    Var p = softmax(scores);
    const Tensor& pv = p.value();
    std::copy(pv.data().begin(), pv.data().end(),
              weights.data().begin() + static_cast<std::ptrdiff_t>(h * nq * nk));
    head_out.push_back(matmul(p, vh));
  }
  Var joined = heads == 1 ? head_out[0] : concat_cols(head_out);
  return {project(joined, proj.wo, proj.bo), std::move(weights)};
}

}  // namespace propnet::ops
