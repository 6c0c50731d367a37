#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace circlelab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int n = 0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit out;
    out.n = static_cast<int>(xs.size());
    if (out.n < 2) return out;
    Eigen::Map<const Eigen::VectorXd> x(xs.data(), out.n), y(ys.data(), out.n);
    Eigen::MatrixXd A(out.n, 2);
    A.col(0) = x;
    A.col(1).setOnes();
    Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
    out.slope = beta(0);
    out.intercept = beta(1);
    double ss_res = (y - A * beta).squaredNorm();
    double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

} // namespace circlelab
