#pragma once

#include <functional>
#include <span>
#include <string>

namespace gridcpd {

// Canonical-form exponential family plugged into the generic LR detector.
// The likelihood ratio of a change at t-g reduces to
//   n1*A*(L1/n1) + n2*A*(L2/n2) - t*A*((L1+L2)/t),
// where L1, L2 are segment sums of the sufficient statistic h and
// A*(m) = sup_theta { theta^T m - A(theta) } is the convex conjugate of the
// log-partition function. Models supply h and A*; boundary cases (MLE on the
// edge of the natural parameter space) follow the 0*log(0) := 0 convention.
struct ExpFamModel {
    std::string name;
    std::size_t dim = 1;  // v, the dimension of h(y)
    std::function<void(std::span<const double>, std::span<double>)> h;
    std::function<double(std::span<const double>)> conjugate;
};

// Poisson(rate): h(y) = y, A(theta) = exp(theta), A*(m) = m log m - m.
ExpFamModel poisson_model();

// Gaussian with known variance sigma^2: h(y) = y, A*(m) = m^2 / (2 sigma^2).
ExpFamModel gaussian_mean_model(double sigma);

}  // namespace gridcpd
