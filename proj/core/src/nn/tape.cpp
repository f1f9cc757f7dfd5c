#include "rtia/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rtia::nn {

namespace {

double sigmoid_s(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_s(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

struct ConvDims {
  int cin, h, w, cout, ho, wo;
};

ConvDims conv_dims(const Tensor& x, const Tensor& wt, int stride) {
  if (x.shape().size() != 3) throw std::invalid_argument("conv3x3: input must be [C,H,W]");
  if (wt.shape().size() != 4 || wt.shape()[2] != 3 || wt.shape()[3] != 3)
    throw std::invalid_argument("conv3x3: weight must be [Cout,Cin,3,3]");
  ConvDims d{};
  d.cin = x.shape()[0];
  d.h = x.shape()[1];
  d.w = x.shape()[2];
  d.cout = wt.shape()[0];
  if (wt.shape()[1] != d.cin) throw std::invalid_argument("conv3x3: channel mismatch");
  d.ho = (d.h + 2 - 3) / stride + 1;
  d.wo = (d.w + 2 - 3) / stride + 1;
  return d;
}

}  // namespace

const Tensor& Value::val() const { return tape->val(*this); }

int Tape::emit(Node&& n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Value Tape::input(Tensor t) {
  Node n;
  n.op = Op::kInput;
  n.out = std::move(t);
  return Value{this, emit(std::move(n))};
}

Value Tape::variable(Tensor t) {
  Node n;
  n.op = Op::kVar;
  n.needs_grad = true;
  n.out = std::move(t);
  return Value{this, emit(std::move(n))};
}

Value Tape::param(Param& p) {
  Node n;
  n.op = Op::kVar;
  n.needs_grad = true;
  n.param = &p;
  n.out = p.value;
  return Value{this, emit(std::move(n))};
}

Value Tape::frozen(const Param& p) {
  Node n;
  n.op = Op::kInput;
  n.out = p.value;
  return Value{this, emit(std::move(n))};
}

Tensor& Tape::grad_buf(int id) {
  auto& g = grads_[static_cast<std::size_t>(id)];
  if (g.empty()) g = Tensor(nodes_[static_cast<std::size_t>(id)].out.shape());
  return g;
}

Tensor Tape::grad(Value v) const {
  const auto& g = grads_[static_cast<std::size_t>(v.id)];
  if (g.empty()) return Tensor(nodes_[static_cast<std::size_t>(v.id)].out.shape());
  return g;
}

void Tape::backward(Value loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: loss from another tape");
  const Node& ln = nodes_[static_cast<std::size_t>(loss.id)];
  if (ln.out.size() != 1) throw std::invalid_argument("backward: loss node is not scalar");

  grads_.clear();
  grads_.resize(nodes_.size());
  grad_buf(loss.id)[0] = 1.0;

  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) continue;
    Tensor& g = grads_[static_cast<std::size_t>(id)];
    if (g.empty()) continue;  // node not on any path to the loss

    auto in_needs = [&](int in) {
      return in >= 0 && nodes_[static_cast<std::size_t>(in)].needs_grad;
    };
    auto val_of = [&](int in) -> const Tensor& { return nodes_[static_cast<std::size_t>(in)].out; };

    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kVar:
        if (n.param) {
          Tensor& pg = n.param->grad;
          for (int64_t i = 0; i < g.size(); ++i) pg[i] += g[i];
        }
        break;
      case Op::kAdd: {
        if (in_needs(n.in0)) {
          Tensor& a = grad_buf(n.in0);
          for (int64_t i = 0; i < g.size(); ++i) a[i] += g[i];
        }
        if (in_needs(n.in1)) {
          Tensor& b = grad_buf(n.in1);
          for (int64_t i = 0; i < g.size(); ++i) b[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        if (in_needs(n.in0)) {
          Tensor& a = grad_buf(n.in0);
          for (int64_t i = 0; i < g.size(); ++i) a[i] += g[i];
        }
        if (in_needs(n.in1)) {
          Tensor& b = grad_buf(n.in1);
          for (int64_t i = 0; i < g.size(); ++i) b[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        const Tensor& a = val_of(n.in0);
        const Tensor& b = val_of(n.in1);
        if (in_needs(n.in0)) {
          Tensor& ga = grad_buf(n.in0);
          for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
        }
        if (in_needs(n.in1)) {
          Tensor& gb = grad_buf(n.in1);
          for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
        }
        break;
      }
      case Op::kAffine: {
        if (in_needs(n.in0)) {
          Tensor& gx = grad_buf(n.in0);
          for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.fa;
        }
        break;
      }
      case Op::kLinear: {
        const Tensor& x = val_of(n.in0);
        const Tensor& w = val_of(n.in1);
        const int out_dim = w.shape()[0];
        const int in_dim = w.shape()[1];
        if (in_needs(n.in0)) {
          Tensor& gx = grad_buf(n.in0);
          for (int o = 0; o < out_dim; ++o) {
            const double go = g[o];
            const double* wrow = w.data() + static_cast<int64_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gx[i] += go * wrow[i];
          }
        }
        if (in_needs(n.in1)) {
          Tensor& gw = grad_buf(n.in1);
          for (int o = 0; o < out_dim; ++o) {
            const double go = g[o];
            double* gwrow = gw.data() + static_cast<int64_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) gwrow[i] += go * x[i];
          }
        }
        if (in_needs(n.in2)) {
          Tensor& gb = grad_buf(n.in2);
          for (int o = 0; o < out_dim; ++o) gb[o] += g[o];
        }
        break;
      }
      case Op::kConv3x3: {
        const Tensor& x = val_of(n.in0);
        const Tensor& w = val_of(n.in1);
        const int stride = n.ia;
        ConvDims d = conv_dims(x, w, stride);
        const bool need_x = in_needs(n.in0);
        const bool need_w = in_needs(n.in1);
        const bool need_b = in_needs(n.in2);
        Tensor* gx = need_x ? &grad_buf(n.in0) : nullptr;
        Tensor* gw = need_w ? &grad_buf(n.in1) : nullptr;
        Tensor* gb = need_b ? &grad_buf(n.in2) : nullptr;
        for (int oc = 0; oc < d.cout; ++oc) {
          const double* wbase = w.data() + static_cast<int64_t>(oc) * d.cin * 9;
          double* gwbase = need_w ? gw->data() + static_cast<int64_t>(oc) * d.cin * 9 : nullptr;
          for (int oy = 0; oy < d.ho; ++oy) {
            const int iy0 = oy * stride - 1;
            for (int ox = 0; ox < d.wo; ++ox) {
              const double go = g[(static_cast<int64_t>(oc) * d.ho + oy) * d.wo + ox];
              if (go == 0.0) continue;
              const int ix0 = ox * stride - 1;
              if (need_b) (*gb)[oc] += go;
              for (int ic = 0; ic < d.cin; ++ic) {
                const int64_t xoff = static_cast<int64_t>(ic) * d.h * d.w;
                const double* wo = wbase + ic * 9;
                double* gwo = need_w ? gwbase + ic * 9 : nullptr;
                for (int ky = 0; ky < 3; ++ky) {
                  const int iy = iy0 + ky;
                  if (iy < 0 || iy >= d.h) continue;
                  for (int kx = 0; kx < 3; ++kx) {
                    const int ix = ix0 + kx;
                    if (ix < 0 || ix >= d.w) continue;
                    const int64_t xi = xoff + static_cast<int64_t>(iy) * d.w + ix;
                    if (need_x) (*gx)[xi] += go * wo[ky * 3 + kx];
                    if (need_w) gwo[ky * 3 + kx] += go * x[xi];
                  }
                }
              }
            }
          }
        }
        break;
      }
      case Op::kUpsample2x: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        const int c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
        Tensor& gx = grad_buf(n.in0);
        for (int ch = 0; ch < c; ++ch)
          for (int y = 0; y < 2 * h; ++y)
            for (int xx = 0; xx < 2 * w; ++xx)
              gx[(static_cast<int64_t>(ch) * h + y / 2) * w + xx / 2] +=
                  g[(static_cast<int64_t>(ch) * 2 * h + y) * 2 * w + xx];
        break;
      }
      case Op::kConcat: {
        const int64_t na = val_of(n.in0).size();
        if (in_needs(n.in0)) {
          Tensor& ga = grad_buf(n.in0);
          for (int64_t i = 0; i < na; ++i) ga[i] += g[i];
        }
        if (in_needs(n.in1)) {
          Tensor& gb = grad_buf(n.in1);
          for (int64_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
        }
        break;
      }
      case Op::kBroadcastHW: {
        if (!in_needs(n.in0)) break;
        Tensor& gv = grad_buf(n.in0);
        const int c = static_cast<int>(gv.size());
        const int64_t hw = static_cast<int64_t>(n.ia) * n.ib;
        for (int ch = 0; ch < c; ++ch) {
          double acc = 0.0;
          const double* gp = g.data() + ch * hw;
          for (int64_t i = 0; i < hw; ++i) acc += gp[i];
          gv[ch] += acc;
        }
        break;
      }
      case Op::kConcatC: {
        const int64_t na = val_of(n.in0).size();
        if (in_needs(n.in0)) {
          Tensor& ga = grad_buf(n.in0);
          for (int64_t i = 0; i < na; ++i) ga[i] += g[i];
        }
        if (in_needs(n.in1)) {
          Tensor& gb = grad_buf(n.in1);
          for (int64_t i = 0; i < gb.size(); ++i) gb[i] += g[na + i];
        }
        break;
      }
      case Op::kSliceC: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        const int64_t hw = static_cast<int64_t>(x.shape()[1]) * x.shape()[2];
        Tensor& gx = grad_buf(n.in0);
        const int64_t off = static_cast<int64_t>(n.ia) * hw;
        for (int64_t i = 0; i < g.size(); ++i) gx[off + i] += g[i];
        break;
      }
      case Op::kRelu: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i)
          if (x[i] > 0.0) gx[i] += g[i];
        break;
      }
      case Op::kSigmoid: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i) {
          const double y = n.out[i];
          gx[i] += g[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::kTanh: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i) {
          const double y = n.out[i];
          gx[i] += g[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::kSoftplus: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * sigmoid_s(x[i]);
        break;
      }
      case Op::kSquare: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * 2.0 * x[i];
        break;
      }
      case Op::kSqrt: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i)
          gx[i] += g[i] * 0.5 / std::max(n.out[i], 1e-154);
        break;
      }
      case Op::kSum: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        const double go = g[0];
        for (int64_t i = 0; i < gx.size(); ++i) gx[i] += go;
        break;
      }
      case Op::kMean: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        const double go = g[0] / static_cast<double>(gx.size());
        for (int64_t i = 0; i < gx.size(); ++i) gx[i] += go;
        break;
      }
      case Op::kSumSquares: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        const double go = g[0];
        for (int64_t i = 0; i < gx.size(); ++i) gx[i] += go * 2.0 * x[i];
        break;
      }
      case Op::kGather: {
        if (!in_needs(n.in0)) break;
        grad_buf(n.in0)[n.ia] += g[0];
        break;
      }
      case Op::kSqErrSumConst: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        const double go = g[0];
        for (int64_t i = 0; i < gx.size(); ++i) gx[i] += go * 2.0 * (x[i] - n.aux[i]);
        break;
      }
      case Op::kMseConst: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        const double go = g[0] * 2.0 / static_cast<double>(x.size());
        for (int64_t i = 0; i < gx.size(); ++i) gx[i] += go * (x[i] - n.aux[i]);
        break;
      }
      case Op::kBceLogitsConst: {
        if (!in_needs(n.in0)) break;
        const Tensor& z = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        const double go = g[0] / static_cast<double>(z.size());
        for (int64_t i = 0; i < gx.size(); ++i) gx[i] += go * (sigmoid_s(z[i]) - n.aux[i]);
        break;
      }
      case Op::kClamp01: {
        if (!in_needs(n.in0)) break;
        const Tensor& x = val_of(n.in0);
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i)
          if (x[i] > 0.0 && x[i] < 1.0) gx[i] += g[i];
        break;
      }
      case Op::kDropout: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.aux[i];
        break;
      }
      case Op::kReshape: {
        if (!in_needs(n.in0)) break;
        Tensor& gx = grad_buf(n.in0);
        for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        break;
      }
    }
  }
}

// --- builders ---------------------------------------------------------------

namespace {

Node binary_node(Op op, Value a, Value b) {
  Node n;
  n.op = op;
  n.in0 = a.id;
  n.in1 = b.id;
  n.needs_grad = a.tape->node(a.id).needs_grad || b.tape->node(b.id).needs_grad;
  return n;
}

Node unary_node(Op op, Value x) {
  Node n;
  n.op = op;
  n.in0 = x.id;
  n.needs_grad = x.tape->node(x.id).needs_grad;
  return n;
}

void check_same_tape(Value a, Value b) {
  if (a.tape != b.tape) throw std::invalid_argument("op: values from different tapes");
}

}  // namespace

Value add(Value a, Value b) {
  check_same_tape(a, b);
  check_same_shape(a.val(), b.val(), "add");
  Node n = binary_node(Op::kAdd, a, b);
  n.out = a.val();
  for (int64_t i = 0; i < n.out.size(); ++i) n.out[i] += b.val()[i];
  return Value{a.tape, a.tape->emit(std::move(n))};
}

Value sub(Value a, Value b) {
  check_same_tape(a, b);
  check_same_shape(a.val(), b.val(), "sub");
  Node n = binary_node(Op::kSub, a, b);
  n.out = a.val();
  for (int64_t i = 0; i < n.out.size(); ++i) n.out[i] -= b.val()[i];
  return Value{a.tape, a.tape->emit(std::move(n))};
}

Value mul(Value a, Value b) {
  check_same_tape(a, b);
  check_same_shape(a.val(), b.val(), "mul");
  Node n = binary_node(Op::kMul, a, b);
  n.out = a.val();
  for (int64_t i = 0; i < n.out.size(); ++i) n.out[i] *= b.val()[i];
  return Value{a.tape, a.tape->emit(std::move(n))};
}

Value affine(Value x, double a, double b) {
  Node n = unary_node(Op::kAffine, x);
  n.fa = a;
  n.fb = b;
  n.out = x.val();
  for (int64_t i = 0; i < n.out.size(); ++i) n.out[i] = a * n.out[i] + b;
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value linear(Value x, Value w, Value b) {
  check_same_tape(x, w);
  check_same_tape(x, b);
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  const Tensor& bv = b.val();
  if (wv.shape().size() != 2) throw std::invalid_argument("linear: weight must be [out,in]");
  const int out_dim = wv.shape()[0];
  const int in_dim = wv.shape()[1];
  if (xv.size() != in_dim)
    throw std::invalid_argument("linear: input size " + std::to_string(xv.size()) +
                                " != " + std::to_string(in_dim));
  if (bv.size() != out_dim) throw std::invalid_argument("linear: bias size mismatch");
  Node n = binary_node(Op::kLinear, x, w);
  n.in2 = b.id;
  n.needs_grad = n.needs_grad || b.tape->node(b.id).needs_grad;
  n.out = Tensor({out_dim});
  for (int o = 0; o < out_dim; ++o) {
    const double* wrow = wv.data() + static_cast<int64_t>(o) * in_dim;
    double acc = bv[o];
    for (int i = 0; i < in_dim; ++i) acc += wrow[i] * xv[i];
    n.out[o] = acc;
  }
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value conv3x3(Value x, Value w, Value b, int stride) {
  check_same_tape(x, w);
  check_same_tape(x, b);
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  const Tensor& bv = b.val();
  ConvDims d = conv_dims(xv, wv, stride);
  if (bv.size() != d.cout) throw std::invalid_argument("conv3x3: bias size mismatch");
  Node n = binary_node(Op::kConv3x3, x, w);
  n.in2 = b.id;
  n.needs_grad = n.needs_grad || b.tape->node(b.id).needs_grad;
  n.ia = stride;
  n.out = Tensor({d.cout, d.ho, d.wo});
  for (int oc = 0; oc < d.cout; ++oc) {
    const double* wbase = wv.data() + static_cast<int64_t>(oc) * d.cin * 9;
    for (int oy = 0; oy < d.ho; ++oy) {
      const int iy0 = oy * stride - 1;
      for (int ox = 0; ox < d.wo; ++ox) {
        const int ix0 = ox * stride - 1;
        double acc = bv[oc];
        for (int ic = 0; ic < d.cin; ++ic) {
          const double* xc = xv.data() + static_cast<int64_t>(ic) * d.h * d.w;
          const double* wo = wbase + ic * 9;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = iy0 + ky;
            if (iy < 0 || iy >= d.h) continue;
            const double* xrow = xc + static_cast<int64_t>(iy) * d.w;
            const double* wrow = wo + ky * 3;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ix0 + kx;
              if (ix < 0 || ix >= d.w) continue;
              acc += wrow[kx] * xrow[ix];
            }
          }
        }
        n.out[(static_cast<int64_t>(oc) * d.ho + oy) * d.wo + ox] = acc;
      }
    }
  }
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value upsample2x(Value x) {
  const Tensor& xv = x.val();
  if (xv.shape().size() != 3) throw std::invalid_argument("upsample2x: input must be [C,H,W]");
  const int c = xv.shape()[0], h = xv.shape()[1], w = xv.shape()[2];
  Node n = unary_node(Op::kUpsample2x, x);
  n.out = Tensor({c, 2 * h, 2 * w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < 2 * h; ++y)
      for (int xx = 0; xx < 2 * w; ++xx)
        n.out[(static_cast<int64_t>(ch) * 2 * h + y) * 2 * w + xx] =
            xv[(static_cast<int64_t>(ch) * h + y / 2) * w + xx / 2];
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value concat(Value a, Value b) {
  check_same_tape(a, b);
  Node n = binary_node(Op::kConcat, a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  n.out = Tensor({static_cast<int>(av.size() + bv.size())});
  for (int64_t i = 0; i < av.size(); ++i) n.out[i] = av[i];
  for (int64_t i = 0; i < bv.size(); ++i) n.out[av.size() + i] = bv[i];
  return Value{a.tape, a.tape->emit(std::move(n))};
}

Value broadcast_hw(Value v, int h, int wdt) {
  const Tensor& vv = v.val();
  if (vv.shape().size() != 1) throw std::invalid_argument("broadcast_hw: input must be 1-D");
  Node n = unary_node(Op::kBroadcastHW, v);
  n.ia = h;
  n.ib = wdt;
  const int c = static_cast<int>(vv.size());
  n.out = Tensor({c, h, wdt});
  for (int ch = 0; ch < c; ++ch) {
    double* o = n.out.data() + static_cast<int64_t>(ch) * h * wdt;
    for (int64_t i = 0; i < static_cast<int64_t>(h) * wdt; ++i) o[i] = vv[ch];
  }
  return Value{v.tape, v.tape->emit(std::move(n))};
}

Value concat_channels(Value a, Value b) {
  check_same_tape(a, b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  if (av.shape().size() != 3 || bv.shape().size() != 3 || av.shape()[1] != bv.shape()[1] ||
      av.shape()[2] != bv.shape()[2])
    throw std::invalid_argument("concat_channels: spatial dims mismatch");
  Node n = binary_node(Op::kConcatC, a, b);
  n.out = Tensor({av.shape()[0] + bv.shape()[0], av.shape()[1], av.shape()[2]});
  for (int64_t i = 0; i < av.size(); ++i) n.out[i] = av[i];
  for (int64_t i = 0; i < bv.size(); ++i) n.out[av.size() + i] = bv[i];
  return Value{a.tape, a.tape->emit(std::move(n))};
}

Value slice_channels(Value x, int first, int count) {
  const Tensor& xv = x.val();
  if (xv.shape().size() != 3) throw std::invalid_argument("slice_channels: input must be [C,H,W]");
  if (first < 0 || count <= 0 || first + count > xv.shape()[0])
    throw std::invalid_argument("slice_channels: range out of bounds");
  const int h = xv.shape()[1], w = xv.shape()[2];
  Node n = unary_node(Op::kSliceC, x);
  n.ia = first;
  n.ib = count;
  n.out = Tensor({count, h, w});
  const int64_t hw = static_cast<int64_t>(h) * w;
  for (int64_t i = 0; i < n.out.size(); ++i) n.out[i] = xv[first * hw + i];
  return Value{x.tape, x.tape->emit(std::move(n))};
}

namespace {
template <typename F>
Value elementwise(Op op, Value x, F f) {
  Node n = unary_node(op, x);
  n.out = x.val();
  for (int64_t i = 0; i < n.out.size(); ++i) n.out[i] = f(n.out[i]);
  return Value{x.tape, x.tape->emit(std::move(n))};
}
}  // namespace

Value relu(Value x) {
  return elementwise(Op::kRelu, x, [](double v) { return v > 0.0 ? v : 0.0; });
}
Value sigmoid(Value x) {
  return elementwise(Op::kSigmoid, x, [](double v) { return sigmoid_s(v); });
}
Value tanh_(Value x) {
  return elementwise(Op::kTanh, x, [](double v) { return std::tanh(v); });
}
Value softplus(Value x) {
  return elementwise(Op::kSoftplus, x, [](double v) { return softplus_s(v); });
}
Value square(Value x) {
  return elementwise(Op::kSquare, x, [](double v) { return v * v; });
}
Value sqrt_(Value x) {
  return elementwise(Op::kSqrt, x, [](double v) { return std::sqrt(v); });
}
Value clamp01(Value x) {
  return elementwise(Op::kClamp01, x, [](double v) { return std::min(1.0, std::max(0.0, v)); });
}

namespace {
Value reduce(Op op, Value x, double v) {
  Node n = unary_node(op, x);
  n.out = Tensor::scalar(v);
  return Value{x.tape, x.tape->emit(std::move(n))};
}
}  // namespace

Value sum(Value x) {
  double acc = 0.0;
  const Tensor& xv = x.val();
  for (int64_t i = 0; i < xv.size(); ++i) acc += xv[i];
  return reduce(Op::kSum, x, acc);
}

Value mean(Value x) {
  double acc = 0.0;
  const Tensor& xv = x.val();
  for (int64_t i = 0; i < xv.size(); ++i) acc += xv[i];
  return reduce(Op::kMean, x, acc / static_cast<double>(xv.size()));
}

Value sum_squares(Value x) {
  double acc = 0.0;
  const Tensor& xv = x.val();
  for (int64_t i = 0; i < xv.size(); ++i) acc += xv[i] * xv[i];
  return reduce(Op::kSumSquares, x, acc);
}

Value gather(Value x, int64_t flat_index) {
  const Tensor& xv = x.val();
  if (flat_index < 0 || flat_index >= xv.size())
    throw std::invalid_argument("gather: index out of range");
  Node n = unary_node(Op::kGather, x);
  n.ia = static_cast<int>(flat_index);
  n.out = Tensor::scalar(xv[flat_index]);
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value sq_err_sum(Value x, const Tensor& target) {
  check_same_shape(x.val(), target, "sq_err_sum");
  Node n = unary_node(Op::kSqErrSumConst, x);
  n.aux = target;
  double acc = 0.0;
  const Tensor& xv = x.val();
  for (int64_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - target[i];
    acc += d * d;
  }
  n.out = Tensor::scalar(acc);
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value mse(Value x, const Tensor& target) {
  check_same_shape(x.val(), target, "mse");
  Node n = unary_node(Op::kMseConst, x);
  n.aux = target;
  double acc = 0.0;
  const Tensor& xv = x.val();
  for (int64_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - target[i];
    acc += d * d;
  }
  n.out = Tensor::scalar(acc / static_cast<double>(xv.size()));
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value bce_with_logits(Value logits, const Tensor& target) {
  check_same_shape(logits.val(), target, "bce_with_logits");
  Node n = unary_node(Op::kBceLogitsConst, logits);
  n.aux = target;
  double acc = 0.0;
  const Tensor& zv = logits.val();
  for (int64_t i = 0; i < zv.size(); ++i) {
    const double z = zv[i];
    acc += std::max(z, 0.0) - z * target[i] + std::log1p(std::exp(-std::abs(z)));
  }
  n.out = Tensor::scalar(acc / static_cast<double>(zv.size()));
  return Value{logits.tape, logits.tape->emit(std::move(n))};
}

Value dropout(Value x, double rate, RngStream& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  Node n = unary_node(Op::kDropout, x);
  const Tensor& xv = x.val();
  n.aux = Tensor(xv.shape());
  n.out = Tensor(xv.shape());
  const double keep_scale = 1.0 / (1.0 - rate);
  for (int64_t i = 0; i < xv.size(); ++i) {
    const double m = (rate > 0.0 && rng.uniform() < rate) ? 0.0 : keep_scale;
    n.aux[i] = rate > 0.0 ? m : 1.0;
    n.out[i] = xv[i] * n.aux[i];
  }
  return Value{x.tape, x.tape->emit(std::move(n))};
}

Value reshape(Value x, std::vector<int> shape) {
  Node n = unary_node(Op::kReshape, x);
  n.out = x.val().reshaped(std::move(shape));
  return Value{x.tape, x.tape->emit(std::move(n))};
}

}  // namespace rtia::nn
