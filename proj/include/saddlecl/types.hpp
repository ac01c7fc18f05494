#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace saddlecl {

// All numerics are 64-bit; batches and weights are dense row-major.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

// Loss on a batch became non-finite, or an update was fed non-finite
// gradients. Signals divergence upstream.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Player 1's gradient vanished: the ascent rule divides by ||g||^2.
struct stationary_gradient_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed binary input (bad magic, truncated payload, ...).
struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw numeric_error(std::string(what) + ": non-finite values");
}

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw numeric_error(std::string(what) + ": non-finite values");
}

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw numeric_error(std::string(what) + ": non-finite value");
}

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace saddlecl
