#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gridcpd {

// CUSUM vector at lag g from prefix/total sums:
//   sqrt(g/(t(t-g))) * prefix - sqrt((t-g)/(tg)) * (total - prefix).
std::vector<double> cusum(std::span<const double> prefix,
                          std::span<const double> total,
                          std::int64_t t, std::int64_t g);

// Known-pre-mean variant: suffix / sqrt(g).
std::vector<double> cusum_known_mean(std::span<const double> suffix, std::int64_t g);

// Upper tail P(Z > x) of the standard normal, computed as erfc(x/sqrt(2))/2.
// std::erfc is correctly rounded to within a few ulp, far inside the 1e-14
// relative error needed on |x| <= 8.
double normal_tail(double x);

// nu_a = E[Z^2 | |Z| > a] = 1 + a*phi(a)/(1 - Phi(a)) for a > 0, 1 at a = 0.
double nu(double a);

// Truncation level a(s,t) with a^2 = 4*log(e*p*log(t)/s^2) on the sparse
// branch s <= sqrt(p log t), clamped at 0 when the log argument dips below 1
// (no thresholding), and 0 on the dense branch.
double threshold_a(std::int64_t s, std::int64_t p, std::int64_t t);
double threshold_a_ln(std::int64_t s, std::int64_t p, double ln_t);

// Rate function z(s,p,t): sqrt(p log t) on the dense branch, otherwise
// max(s*log(e*p*log(t)/s^2), log t).
double rate_z(std::int64_t s, std::int64_t p, std::int64_t t);
double rate_z_ln(std::int64_t s, std::int64_t p, double ln_t);

// Monotone variant z~(s,p,t) = s*log(1 + sqrt(p log t)/s) + log t.
double rate_z_tilde(std::int64_t s, std::int64_t p, std::int64_t t);
double rate_z_tilde_ln(std::int64_t s, std::int64_t p, double ln_t);

// Candidate sparsities: powers of two up to min(sqrt(p log t), p), plus p.
std::vector<std::int64_t> sparsity_grid(std::int64_t p, std::int64_t t);
std::vector<std::int64_t> sparsity_grid_ln(std::int64_t p, double ln_t);

// Covariance critical value lambda * max(r, sqrt(r)) with
// r = max(p, log t) / min(g, t-g).
double xi_cov(std::int64_t g, std::int64_t t, std::int64_t p, double lambda);

// Dense symmetric matrix; writes mirror across the diagonal.
class SymMatrix {
public:
    explicit SymMatrix(std::size_t p);
    // Builds (M + M^T)/2 from a row-major p*p buffer.
    static SymMatrix from_flat(std::size_t p, std::span<const double> flat);

    std::size_t dim() const { return p_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * p_ + j]; }
    void set(std::size_t i, std::size_t j, double v);

    SymMatrix& operator-=(const SymMatrix& other);
    SymMatrix& operator*=(double c);

    std::span<const double> data() const { return a_; }

private:
    std::size_t p_;
    std::vector<double> a_;
};

// Largest absolute eigenvalue. Power iteration from a deterministic near
// all-ones start, stopped once the eigenpair residual certifies 1e-9
// relative accuracy; falls back to cyclic Jacobi sweeps when power iteration
// fails to settle (e.g. matched +/- extreme eigenvalues).
double sym_opnorm(const SymMatrix& a);

// Lower-triangular Cholesky factor. Pivots below -1e-10*scale raise a domain
// error (matrix not PSD); tiny nonnegative pivots are flushed to zero so
// semidefinite inputs are accepted.
std::vector<double> cholesky_lower(const SymMatrix& a);

}  // namespace gridcpd
