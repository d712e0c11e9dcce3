#include "nphmm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nphmm {

GridFunction::GridFunction(int level_, std::vector<double> values_)
    : level(level_), values(std::move(values_)) {
    if (level < 0 || level > 30)
        throw std::invalid_argument("grid level out of range");
    if (values.size() != cell_count(level))
        throw std::invalid_argument("grid value count does not match level");
}

std::size_t cell_count(int level) {
    if (level < 0 || level > 30)
        throw std::invalid_argument("grid level out of range");
    return std::size_t{1} << level;
}

std::size_t cell_index(const GridFunction& f, double y) {
    if (!(y >= 0.0 && y < 1.0))
        throw std::invalid_argument("point outside [0,1)");
    auto idx = static_cast<std::size_t>(y * static_cast<double>(f.cells()));
    // guards the y*2^D == 2^D edge case from rounding
    return std::min(idx, f.cells() - 1);
}

double evaluate(const GridFunction& f, double y) {
    return f.values[cell_index(f, y)];
}

double integral(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s / static_cast<double>(f.cells());
}

double l2_inner(const GridFunction& a, const GridFunction& b) {
    const GridFunction* pa = &a;
    const GridFunction* pb = &b;
    GridFunction tmp;
    if (a.level < b.level) {
        tmp = refine(a, b.level);
        pa = &tmp;
    } else if (b.level < a.level) {
        tmp = refine(b, a.level);
        pb = &tmp;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < pa->values.size(); ++i)
        s += pa->values[i] * pb->values[i];
    return s / static_cast<double>(pa->cells());
}

double l2_norm(const GridFunction& f) {
    return std::sqrt(l2_inner(f, f));
}

double sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::fabs(v));
    return m;
}

double inf_value(const GridFunction& f) {
    double m = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) m = std::min(m, v);
    return m;
}

GridFunction refine(const GridFunction& f, int new_level) {
    if (new_level < f.level)
        throw std::invalid_argument("refine target coarser than source");
    if (new_level == f.level) return f;
    const std::size_t rep = std::size_t{1} << (new_level - f.level);
    GridFunction out;
    out.level = new_level;
    out.values.resize(cell_count(new_level));
    for (std::size_t i = 0; i < f.values.size(); ++i)
        std::fill_n(out.values.begin() + static_cast<std::ptrdiff_t>(i * rep), rep, f.values[i]);
    return out;
}

GridFunction combine(double ca, const GridFunction& a, double cb, const GridFunction& b) {
    const int lvl = std::max(a.level, b.level);
    GridFunction fa = refine(a, lvl);
    GridFunction fb = refine(b, lvl);
    for (std::size_t i = 0; i < fa.values.size(); ++i)
        fa.values[i] = ca * fa.values[i] + cb * fb.values[i];
    return fa;
}

GridFunction scale(double c, const GridFunction& f) {
    GridFunction out = f;
    for (double& v : out.values) v *= c;
    return out;
}

DensityGrid uniform_density(int level) {
    return GridFunction(level, std::vector<double>(cell_count(level), 1.0));
}

bool is_valid_density(const GridFunction& f, double mass_tol) {
    if (f.values.empty()) return false;
    for (double v : f.values)
        if (!(v >= 0.0)) return false;
    return std::fabs(integral(f) - 1.0) <= mass_tol;
}

void require_density(const GridFunction& f, double mass_tol) {
    if (!is_valid_density(f, mass_tol))
        throw std::invalid_argument("grid function is not a valid density");
}

}  // namespace nphmm
