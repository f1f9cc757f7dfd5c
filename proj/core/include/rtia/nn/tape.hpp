#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtia/nn/rng.hpp"
#include "rtia/nn/tensor.hpp"

namespace rtia::nn {

// A named parameter tensor with its gradient slot. Groups of these form the
// independently-stepped parameter sets.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(shape) {}

  void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; invalid once the tape is reset.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor& val() const;
};

enum class Op : uint8_t {
  kInput,       // constant leaf
  kVar,         // grad-tracked leaf (param-backed or free variable)
  kAdd,
  kSub,
  kMul,
  kAffine,      // fa * x + fb
  kLinear,      // W x + b
  kConv3x3,     // 3x3 conv, pad 1, stride ia
  kUpsample2x,  // nearest-neighbor 2x
  kConcat,      // 1-D concat
  kBroadcastHW, // [C] -> [C,H,W]
  kConcatC,     // channel concat of two [C,H,W]
  kSliceC,      // channel slice [ia, ia+ib) of [C,H,W]
  kRelu,
  kSigmoid,
  kTanh,
  kSoftplus,
  kSquare,
  kSqrt,
  kSum,
  kMean,
  kSumSquares,
  kGather,          // scalar pick at flat index ia
  kSqErrSumConst,   // sum((x - aux)^2)
  kMseConst,        // mean((x - aux)^2)
  kBceLogitsConst,  // mean BCE(sigmoid(x), aux), computed on logits
  kClamp01,
  kDropout,  // aux holds the mask
  kReshape,
};

struct Node {
  Op op = Op::kInput;
  int in0 = -1, in1 = -1, in2 = -1;
  int ia = 0, ib = 0;
  double fa = 0.0, fb = 0.0;
  bool needs_grad = false;
  Tensor out;
  Tensor aux;
  Param* param = nullptr;
};

// Define-by-run reverse-mode tape. Forward values are computed eagerly as ops
// are emitted; backward() walks the node list in reverse. One tape instance
// per thread; reset() between steps keeps allocations warm.
class Tape {
 public:
  explicit Tape(std::size_t reserve = 512) { nodes_.reserve(reserve); }

  Value input(Tensor t);
  Value variable(Tensor t);          // differentiable non-parameter leaf
  Value param(Param& p);             // gradient accumulates into p.grad
  Value frozen(const Param& p);      // constant view: no gradient tracking

  // Reverse pass from a scalar loss node. Gradients of kVar leaves backed by
  // a Param are accumulated into Param::grad; free-variable gradients are
  // readable through grad(). Throws std::invalid_argument on non-scalar loss.
  void backward(Value loss);

  const Tensor& val(Value v) const { return nodes_[static_cast<std::size_t>(v.id)].out; }
  // Gradient of a node from the last backward() (zero tensor if untouched).
  Tensor grad(Value v) const;

  void reset() {
    nodes_.clear();
    grads_.clear();
  }

  std::size_t num_nodes() const { return nodes_.size(); }

  int emit(Node&& n);  // op-builder plumbing
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

 private:
  Tensor& grad_buf(int id);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

// --- op builders -----------------------------------------------------------

Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value affine(Value x, double a, double b);  // a*x + b
Value linear(Value x, Value w, Value b);    // w: [out,in], x: [in], b: [out]
Value conv3x3(Value x, Value w, Value b, int stride);  // pad 1
Value upsample2x(Value x);
Value concat(Value a, Value b);  // 1-D
Value broadcast_hw(Value v, int h, int wdt);
Value concat_channels(Value a, Value b);
Value slice_channels(Value x, int first, int count);
Value relu(Value x);
Value sigmoid(Value x);
Value tanh_(Value x);
Value softplus(Value x);
Value square(Value x);
Value sqrt_(Value x);
Value sum(Value x);
Value mean(Value x);
Value sum_squares(Value x);
Value gather(Value x, int64_t flat_index);
Value sq_err_sum(Value x, const Tensor& target);
Value mse(Value x, const Tensor& target);
Value bce_with_logits(Value logits, const Tensor& target);
Value clamp01(Value x);
Value dropout(Value x, double rate, RngStream& rng);  // rejects rate outside [0,1)
Value reshape(Value x, std::vector<int> shape);

}  // namespace rtia::nn
