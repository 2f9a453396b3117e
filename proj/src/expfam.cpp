#include "gridcpd/expfam.hpp"

#include <cmath>
#include <stdexcept>

namespace gridcpd {

ExpFamModel poisson_model() {
    ExpFamModel m;
    m.name = "poisson";
    m.dim = 1;
    m.h = [](std::span<const double> y, std::span<double> out) { out[0] = y[0]; };
    m.conjugate = [](std::span<const double> mean) {
        const double x = mean[0];
        if (x < 0.0) throw std::domain_error("poisson conjugate: negative mean");
        if (x == 0.0) return 0.0;
        return x * std::log(x) - x;
    };
    return m;
}

ExpFamModel gaussian_mean_model(double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("gaussian_mean_model: sigma must be > 0");
    ExpFamModel m;
    m.name = "gaussian_mean";
    m.dim = 1;
    m.h = [](std::span<const double> y, std::span<double> out) { out[0] = y[0]; };
    m.conjugate = [s2 = sigma * sigma](std::span<const double> mean) {
        return mean[0] * mean[0] / (2.0 * s2);
    };
    return m;
}

}  // namespace gridcpd
