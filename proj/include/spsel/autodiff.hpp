#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "spsel/types.hpp"

namespace spsel::ad {

// Minimal reverse-mode engine over dense Eigen matrices. Values are computed
// eagerly as nodes are appended to a Tape; backward() replays the tape in
// reverse, accumulating adjoints. Scalars are 1x1 matrices.
//
// Subgradient conventions: relu and abs propagate 0 at the kink; clamp
// boundaries propagate 0.

class Tape;

struct Value {
  Tape* tape = nullptr;
  int index = -1;

  const Matrix& mat() const;
  double scalar() const;  // requires a 1x1 value
};

class Tape {
 public:
  Value input(Matrix value, std::string name);     // differentiable leaf
  Value constant(Matrix value, std::string name = "const");

  const Matrix& value(Value v) const { return nodes_[v.index].value; }
  const Matrix& grad(Value v) const { return nodes_[v.index].adjoint; }

  // Seeds the (1x1) loss with 1 and runs the tape in reverse. Throws if the
  // loss is non-finite, naming the first non-finite node on the tape.
  void backward(Value loss);

  int zero_norm_rows() const { return zero_norm_rows_; }

  // --- internal use by op builders ---
  struct Node {
    Matrix value;
    Matrix adjoint;
    std::string name;
    std::function<void(Tape&, const Node&)> pull;  // empty for leaves
    bool needs_grad = false;
  };

  Value append(Matrix value, std::string name, bool needs_grad,
               std::function<void(Tape&, const Node&)> pull);
  Node& node(int index) { return nodes_[index]; }
  const Node& node(int index) const { return nodes_[index]; }
  void accumulate(int index, const Matrix& g);
  void note_zero_norm_row() { ++zero_norm_rows_; }

 private:
  std::vector<Node> nodes_;
  int zero_norm_rows_ = 0;
};

inline const Matrix& Value::mat() const { return tape->value(*this); }
inline double Value::scalar() const { return tape->value(*this)(0, 0); }

// ---- ops ----

Value matmul(Value a, Value b);
Value transpose(Value a);
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value hadamard(Value a, Value b);
Value add_row(Value a, Value row);  // broadcast a 1xH row over every row of a
Value scale(Value a, double c);
Value add_scalar(Value a, double c);
Value relu(Value a);
Value exp(Value a);
Value log(Value a);
Value abs(Value a);
Value sigmoid(Value a);
Value clamp_min(Value a, double lo);
Value clamp(Value a, double lo, double hi);
Value sum(Value a);                               // 1x1
Value masked_sum(Value a, const Matrix& mask01);  // 1x1; mask is fixed
// Rows scaled to unit Euclidean norm; zero rows stay zero and bump the
// tape's zero-norm counter.
Value row_normalize(Value a);
Value row_norms(Value a);              // Nx1
Value row_dots(Value a, Value b);      // Nx1 of row-wise dot products
Value sub_row_mean(Value a);           // subtract the column means from every row

// Weighted row gather: output row i is the sum of weight * table.row(r) over
// taps[i]. The backward pass scatter-adds into the table.
using RowTaps = std::vector<std::vector<std::pair<int, double>>>;
Value gather_rows(Value table, const RowTaps& taps);

}  // namespace spsel::ad
