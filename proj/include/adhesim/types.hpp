#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace adhesim {

using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryError : Error { using Error::Error; };
struct ModelError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct AssemblyError : Error { using Error::Error; };
struct MatrixError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct InvariantError : Error { using Error::Error; };

struct NonConvergenceError : Error {
    NonConvergenceError(const std::string& what, double last_residual)
        : Error(what), residual(last_residual) {}
    double residual;
};

}  // namespace adhesim
