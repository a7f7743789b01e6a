#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace sdd {

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

using Vec2 = Eigen::Vector2d;
using VecXd = VecX<double>;
using MatXd = MatX<double>;

// All times are floating-point minutes since the start of the operating day.
// Feasibility comparisons use this tolerance.
inline constexpr double kTimeTol = 1e-6;

// Invalid configuration or malformed input file (CLI exit code 2).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated an operation contract at runtime (CLI exit code 3).
struct contract_error : std::logic_error {
  explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace sdd
