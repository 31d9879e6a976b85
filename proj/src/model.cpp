#include "radflow/model.hpp"

#include <cmath>
#include <stdexcept>

#include "radflow/nonlocal.hpp"

namespace radflow {

double critical_exponent(int dim) {
    if (dim < 3) throw std::invalid_argument("critical_exponent: dim must be >= 3");
    return 2.0 - 2.0 / dim;
}

bool is_critical(const ModelSpec& spec) {
    return std::abs(spec.m - critical_exponent(spec.dim)) < 1e-12;
}

void ModelSpec::validate() const {
    if (dim < 3) throw std::invalid_argument("ModelSpec: dim must be >= 3");
    if (c1 < 0.0) throw std::invalid_argument("ModelSpec: c1 must be nonnegative");
    if (c3 < 0.0) throw std::invalid_argument("ModelSpec: c3 must be nonnegative");
    if (c1 > 0.0 && m <= 1.0)
        throw std::invalid_argument("ModelSpec: m must exceed 1 when diffusion is active");
    if (c3 > 0.0 && kernel.kind == KernelSpec::Kind::none)
        throw std::invalid_argument("ModelSpec: kernel required when c3 > 0");
    if (kernel.kind == KernelSpec::Kind::power_law) {
        if (kernel.q <= 2.0 - dim || kernel.q > 2.0)
            throw std::invalid_argument("ModelSpec: kernel.q must lie in (2 - dim, 2]");
    }
    if (potential.kind == PotentialSpec::Kind::quadratic && potential.a < 0.0)
        throw std::invalid_argument("ModelSpec: potential.a must be nonnegative");
}

ModelSpec preset(const std::string& name, int dim, double q, double a) {
    ModelSpec s;
    s.dim = dim;
    if (name == "pks_original") {
        s.m = critical_exponent(dim);
        s.c1 = 1.0;
        s.c2 = 1.0;
    } else if (name == "pks_rescaled") {
        s.m = critical_exponent(dim);
        s.c1 = 1.0;
        s.c2 = 1.0;
        s.potential = PotentialSpec::quadratic(1.0 / dim);
    } else if (name == "porous_medium") {
        s.m = critical_exponent(dim);
        s.c1 = 1.0;
    } else if (name == "aggregation") {
        s.m = 1.0;
        s.c2 = -1.0;
        s.c3 = 1.0;
        s.kernel = KernelSpec::power_law(q);
    } else if (name == "fokker_planck") {
        s.m = critical_exponent(dim);
        s.c1 = 1.0;
        s.potential = PotentialSpec::quadratic(a);
    } else {
        throw std::invalid_argument("preset: unknown name '" + name + "'");
    }
    s.validate();
    return s;
}

std::vector<double> radial_velocity(const ModelSpec& spec, const RadialProfile& u) {
    spec.validate();
    if (spec.dim != u.grid.dim())
        throw std::invalid_argument("radial_velocity: grid dimension does not match model");
    const RadialGrid& g = u.grid;
    const int n = g.n_cells();
    std::vector<double> v(n + 1, 0.0);
    const MassFunction m = mass_function(u);
    const MassFunction* mt = nullptr;
    MassFunction mtilde = m;  // placeholder, replaced below when a kernel acts
    if (spec.c3 != 0.0) {
        mtilde = m_tilde(u, spec.kernel.q);
        mt = &mtilde;
    }
    for (int f = 1; f <= n; ++f) {
        const double r = g.face(f);
        const double shell = g.sigma() * ipow(r, g.dim() - 1);
        double val = spec.c2 * m.values[f] / shell;
        if (mt) val += spec.c3 * mt->values[f] / shell;
        val += spec.potential.slope(r);
        v[f] = val;
    }
    return v;
}

}  // namespace radflow
