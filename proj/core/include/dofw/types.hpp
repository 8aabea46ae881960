#pragma once

#include <Eigen/Dense>

namespace dofw {

/// Dense decision vector. Used for decisions, gradients and LMO outputs alike.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Agent indices are 0-based; round indices are 1-based (round t = 1..T).
using AgentIndex = int;
using Round = int;

}  // namespace dofw
