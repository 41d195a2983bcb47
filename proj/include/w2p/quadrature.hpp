#ifndef W2P_QUADRATURE_HPP
#define W2P_QUADRATURE_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "error.hpp"

namespace w2p {

struct GaussRule {
    std::vector<double> x;   // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre nodes by Newton iteration on P_n.
inline GaussRule gauss_legendre_compute(int n) {
    require(n >= 1 && n <= 512, "Gauss-Legendre order out of range");
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
}

inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre_compute(n)).first;
    return it->second;
}

// Nodes and weights mapped to [a, b].
inline std::vector<std::pair<double, double>> gauss_panel(double a, double b, int n) {
    const GaussRule& g = gauss_legendre(n);
    std::vector<std::pair<double, double>> out;
    double h = 0.5 * (b - a), m = 0.5 * (b + a);
    for (int k = 0; k < n; ++k) out.emplace_back(m + h * g.x[k], h * g.w[k]);
    return out;
}

}  // namespace w2p

#endif
