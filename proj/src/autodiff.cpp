#include "spsel/autodiff.hpp"

#include <cmath>

namespace spsel::ad {

Value Tape::input(Matrix value, std::string name) {
  return append(std::move(value), std::move(name), true, nullptr);
}

Value Tape::constant(Matrix value, std::string name) {
  return append(std::move(value), std::move(name), false, nullptr);
}

Value Tape::append(Matrix value, std::string name, bool needs_grad,
                   std::function<void(Tape&, const Node&)> pull) {
  Node node;
  node.adjoint = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.name = std::move(name);
  node.pull = std::move(pull);
  node.needs_grad = needs_grad;
  nodes_.push_back(std::move(node));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int index, const Matrix& g) {
  Node& n = nodes_[index];
  if (n.needs_grad || n.pull) n.adjoint += g;
}

void Tape::backward(Value loss) {
  const Matrix& value = nodes_[loss.index].value;
  if (value.rows() != 1 || value.cols() != 1) {
    throw std::logic_error("backward: loss must be 1x1");
  }
  if (!std::isfinite(value(0, 0))) {
    for (const Node& n : nodes_) {
      if (!n.value.allFinite()) {
        throw std::runtime_error("backward: non-finite loss; first non-finite node: " +
                                 n.name);
      }
    }
    throw std::runtime_error("backward: non-finite loss");
  }
  nodes_[loss.index].adjoint(0, 0) = 1.0;
  for (int i = loss.index; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (n.pull && !n.adjoint.isZero(0.0)) n.pull(*this, n);
  }
}

namespace {

// Marks whether a child's adjoint needs to flow at all (constants without a
// pull function never do).
bool wants(Tape& t, Value v) {
  const Tape::Node& n = t.node(v.index);
  return n.needs_grad || static_cast<bool>(n.pull);
}

}  // namespace

Value matmul(Value a, Value b) {
  Tape& t = *a.tape;
  Matrix out = a.mat() * b.mat();
  const Matrix& av = a.mat();
  const Matrix& bv = b.mat();
  return t.append(std::move(out), "matmul", false,
                  [a, b, av, bv](Tape& t, const Tape::Node& n) {
                    if (wants(t, a)) t.accumulate(a.index, n.adjoint * bv.transpose());
                    if (wants(t, b)) t.accumulate(b.index, av.transpose() * n.adjoint);
                  });
}

Value transpose(Value a) {
  Tape& t = *a.tape;
  return t.append(a.mat().transpose(), "transpose", false,
                  [a](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint.transpose());
                  });
}

Value add(Value a, Value b) {
  Tape& t = *a.tape;
  return t.append(a.mat() + b.mat(), "add", false,
                  [a, b](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint);
                    t.accumulate(b.index, n.adjoint);
                  });
}

Value sub(Value a, Value b) {
  Tape& t = *a.tape;
  return t.append(a.mat() - b.mat(), "sub", false,
                  [a, b](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint);
                    t.accumulate(b.index, -n.adjoint);
                  });
}

Value hadamard(Value a, Value b) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  const Matrix bv = b.mat();
  return t.append(av.cwiseProduct(bv), "hadamard", false,
                  [a, b, av, bv](Tape& t, const Tape::Node& n) {
                    if (wants(t, a)) t.accumulate(a.index, n.adjoint.cwiseProduct(bv));
                    if (wants(t, b)) t.accumulate(b.index, n.adjoint.cwiseProduct(av));
                  });
}

Value add_row(Value a, Value row) {
  Tape& t = *a.tape;
  Matrix out = a.mat();
  out.rowwise() += Eigen::RowVectorXd(row.mat().row(0));
  return t.append(std::move(out), "add_row", false,
                  [a, row](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint);
                    t.accumulate(row.index, n.adjoint.colwise().sum());
                  });
}

Value scale(Value a, double c) {
  Tape& t = *a.tape;
  return t.append(a.mat() * c, "scale", false,
                  [a, c](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint * c);
                  });
}

Value add_scalar(Value a, double c) {
  Tape& t = *a.tape;
  return t.append(a.mat().array() + c, "add_scalar", false,
                  [a](Tape& t, const Tape::Node& n) { t.accumulate(a.index, n.adjoint); });
}

Value relu(Value a) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  return t.append(av.cwiseMax(0.0), "relu", false,
                  [a, av](Tape& t, const Tape::Node& n) {
                    const Matrix gate = (av.array() > 0.0).cast<double>();
                    t.accumulate(a.index, n.adjoint.cwiseProduct(gate));
                  });
}

Value exp(Value a) {
  Tape& t = *a.tape;
  Matrix out = a.mat().array().exp();
  const Matrix saved = out;
  return t.append(std::move(out), "exp", false,
                  [a, saved](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint.cwiseProduct(saved));
                  });
}

Value log(Value a) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  return t.append(av.array().log(), "log", false,
                  [a, av](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, n.adjoint.cwiseQuotient(av));
                  });
}

Value abs(Value a) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  return t.append(av.cwiseAbs(), "abs", false,
                  [a, av](Tape& t, const Tape::Node& n) {
                    const Matrix sign = (av.array() > 0.0).cast<double>() -
                                        (av.array() < 0.0).cast<double>();
                    t.accumulate(a.index, n.adjoint.cwiseProduct(sign));
                  });
}

Value sigmoid(Value a) {
  Tape& t = *a.tape;
  Matrix out = (1.0 / (1.0 + (-a.mat().array()).exp())).matrix();
  const Matrix saved = out;
  return t.append(std::move(out), "sigmoid", false,
                  [a, saved](Tape& t, const Tape::Node& n) {
                    const Matrix d = saved.array() * (1.0 - saved.array());
                    t.accumulate(a.index, n.adjoint.cwiseProduct(d));
                  });
}

Value clamp_min(Value a, double lo) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  return t.append(av.cwiseMax(lo), "clamp_min", false,
                  [a, av, lo](Tape& t, const Tape::Node& n) {
                    const Matrix gate = (av.array() > lo).cast<double>();
                    t.accumulate(a.index, n.adjoint.cwiseProduct(gate));
                  });
}

Value clamp(Value a, double lo, double hi) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  return t.append(av.cwiseMax(lo).cwiseMin(hi), "clamp", false,
                  [a, av, lo, hi](Tape& t, const Tape::Node& n) {
                    const Matrix gate =
                        ((av.array() > lo) && (av.array() < hi)).cast<double>();
                    t.accumulate(a.index, n.adjoint.cwiseProduct(gate));
                  });
}

Value sum(Value a) {
  Tape& t = *a.tape;
  Matrix out(1, 1);
  out(0, 0) = a.mat().sum();
  const Eigen::Index rows = a.mat().rows(), cols = a.mat().cols();
  return t.append(std::move(out), "sum", false,
                  [a, rows, cols](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index,
                                 Matrix::Constant(rows, cols, n.adjoint(0, 0)));
                  });
}

Value masked_sum(Value a, const Matrix& mask01) {
  Tape& t = *a.tape;
  Matrix out(1, 1);
  out(0, 0) = a.mat().cwiseProduct(mask01).sum();
  return t.append(std::move(out), "masked_sum", false,
                  [a, mask01](Tape& t, const Tape::Node& n) {
                    t.accumulate(a.index, mask01 * n.adjoint(0, 0));
                  });
}

Value row_normalize(Value a) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  Matrix out = av;
  Eigen::VectorXd norms(av.rows());
  for (Eigen::Index i = 0; i < av.rows(); ++i) {
    const double norm = av.row(i).norm();
    norms(i) = norm;
    if (norm > 0.0) {
      out.row(i) /= norm;
    } else {
      out.row(i).setZero();
      t.note_zero_norm_row();
    }
  }
  const Matrix saved = out;
  return t.append(std::move(out), "row_normalize", false,
                  [a, saved, norms](Tape& t, const Tape::Node& n) {
                    Matrix g(saved.rows(), saved.cols());
                    for (Eigen::Index i = 0; i < saved.rows(); ++i) {
                      if (norms(i) > 0.0) {
                        const double along = saved.row(i).dot(n.adjoint.row(i));
                        g.row(i) = (n.adjoint.row(i) - along * saved.row(i)) / norms(i);
                      } else {
                        g.row(i).setZero();
                      }
                    }
                    t.accumulate(a.index, g);
                  });
}

Value row_norms(Value a) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  Matrix out(av.rows(), 1);
  for (Eigen::Index i = 0; i < av.rows(); ++i) out(i, 0) = av.row(i).norm();
  const Matrix saved = out;
  return t.append(std::move(out), "row_norms", false,
                  [a, av, saved](Tape& t, const Tape::Node& n) {
                    Matrix g = Matrix::Zero(av.rows(), av.cols());
                    for (Eigen::Index i = 0; i < av.rows(); ++i) {
                      if (saved(i, 0) > 0.0) {
                        g.row(i) = n.adjoint(i, 0) * av.row(i) / saved(i, 0);
                      }
                    }
                    t.accumulate(a.index, g);
                  });
}

Value row_dots(Value a, Value b) {
  Tape& t = *a.tape;
  const Matrix av = a.mat();
  const Matrix bv = b.mat();
  Matrix out(av.rows(), 1);
  for (Eigen::Index i = 0; i < av.rows(); ++i) out(i, 0) = av.row(i).dot(bv.row(i));
  return t.append(std::move(out), "row_dots", false,
                  [a, b, av, bv](Tape& t, const Tape::Node& n) {
                    if (wants(t, a)) {
                      Matrix g = bv;
                      for (Eigen::Index i = 0; i < g.rows(); ++i) g.row(i) *= n.adjoint(i, 0);
                      t.accumulate(a.index, g);
                    }
                    if (wants(t, b)) {
                      Matrix g = av;
                      for (Eigen::Index i = 0; i < g.rows(); ++i) g.row(i) *= n.adjoint(i, 0);
                      t.accumulate(b.index, g);
                    }
                  });
}

Value sub_row_mean(Value a) {
  Tape& t = *a.tape;
  const Matrix& av = a.mat();
  const Eigen::RowVectorXd mean = av.colwise().mean();
  Matrix out = av.rowwise() - mean;
  return t.append(std::move(out), "sub_row_mean", false,
                  [a](Tape& t, const Tape::Node& n) {
                    const Eigen::RowVectorXd gmean = n.adjoint.colwise().mean();
                    t.accumulate(a.index, n.adjoint.rowwise() - gmean);
                  });
}

Value gather_rows(Value table, const RowTaps& taps) {
  Tape& t = *table.tape;
  const Matrix& tab = table.mat();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(taps.size()), tab.cols());
  for (std::size_t i = 0; i < taps.size(); ++i) {
    for (const auto& [row, weight] : taps[i]) {
      out.row(static_cast<Eigen::Index>(i)) += weight * tab.row(row);
    }
  }
  const Eigen::Index rows = tab.rows(), cols = tab.cols();
  return t.append(std::move(out), "gather_rows", false,
                  [table, taps, rows, cols](Tape& t, const Tape::Node& n) {
                    Matrix g = Matrix::Zero(rows, cols);
                    for (std::size_t i = 0; i < taps.size(); ++i) {
                      for (const auto& [row, weight] : taps[i]) {
                        g.row(row) += weight * n.adjoint.row(static_cast<Eigen::Index>(i));
                      }
                    }
                    t.accumulate(table.index, g);
                  });
}

}  // namespace spsel::ad
