#include "radflow/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace radflow {

double ipow(double x, int n) {
    double out = 1.0;
    for (int k = 0; k < n; ++k) out *= x;
    return out;
}

double RadialGrid::unit_sphere_area(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

RadialGrid::RadialGrid(int dim, double r_max, int n_cells)
    : dim_(dim), n_(n_cells), r_max_(r_max) {
    if (dim < 3) throw std::invalid_argument("RadialGrid: dim must be >= 3, got " + std::to_string(dim));
    if (!(r_max > 0.0) || !std::isfinite(r_max))
        throw std::invalid_argument("RadialGrid: r_max must be positive and finite");
    if (n_cells < 8) throw std::invalid_argument("RadialGrid: n_cells must be >= 8, got " + std::to_string(n_cells));
    dr_ = r_max_ / n_;
    sigma_ = unit_sphere_area(dim_);
    faces_.resize(n_ + 1);
    centers_.resize(n_);
    volumes_.resize(n_);
    for (int i = 0; i <= n_; ++i) faces_[i] = r_max_ * i / n_;
    faces_[n_] = r_max_;
    const double c = sigma_ / dim_;
    for (int i = 0; i < n_; ++i) {
        centers_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
        volumes_[i] = c * (ipow(faces_[i + 1], dim_) - ipow(faces_[i], dim_));
    }
}

double RadialGrid::ball_volume(double r) const {
    return sigma_ / dim_ * ipow(r, dim_);
}

}  // namespace radflow
