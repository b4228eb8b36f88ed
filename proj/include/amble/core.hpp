#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace amble {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kGravity = 9.81;

/*!
 * Library-wide error with a machine-parsable category string such as
 * "model/cycle" or "contact/rank". The CLI maps categories to exit
 * diagnostics; tests match on them.
 */
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message) :
        std::runtime_error(category + ": " + message),
        category_(std::move(category))
    {
    }

    const std::string& category() const { return category_; }

private:
    std::string category_;
};

} // namespace amble
