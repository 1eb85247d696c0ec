#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace spsel {

using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Malformed user input: bad files, infeasible parameters, violated
// preconditions. The CLI maps this to exit code 2; any other exception
// exits 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spsel
