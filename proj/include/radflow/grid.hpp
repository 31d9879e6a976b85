#pragma once

#include <vector>

namespace radflow {

// x^n for small integer n, exact products instead of pow()
double ipow(double x, int n);

// Uniform cell-centered grid on [0, r_max] for radially symmetric fields in
// dimension d >= 3.  Faces sit at i*dr, centers at (i + 1/2)*dr, and cell
// volumes are exact spherical shell volumes (sigma_d / d) * (r_out^d - r_in^d).
class RadialGrid {
public:
    RadialGrid(int dim, double r_max, int n_cells);

    int dim() const { return dim_; }
    int n_cells() const { return n_; }
    double r_max() const { return r_max_; }
    double dr() const { return dr_; }
    double sigma() const { return sigma_; }  // surface area of the unit sphere in R^d

    double face(int i) const { return faces_[i]; }  // i in [0, n_cells]
    double center(int i) const { return centers_[i]; }
    double cell_volume(int i) const { return volumes_[i]; }
    const std::vector<double>& faces() const { return faces_; }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<double>& volumes() const { return volumes_; }

    double ball_volume(double r) const;

    bool operator==(const RadialGrid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && r_max_ == o.r_max_;
    }
    bool operator!=(const RadialGrid& o) const { return !(*this == o); }

    static double unit_sphere_area(int dim);

private:
    int dim_ = 0;
    int n_ = 0;
    double r_max_ = 0.0;
    double dr_ = 0.0;
    double sigma_ = 0.0;
    std::vector<double> faces_, centers_, volumes_;
};

}  // namespace radflow
