#pragma once

#include <cstddef>
#include <vector>

namespace nphmm {

// Piecewise-constant function on [0,1): 2^level equal cells, one value per
// cell. All integrals and inner products below are exact for this class.
struct GridFunction {
    int level = 0;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(int level_, std::vector<double> values_);

    std::size_t cells() const { return values.size(); }
};

// A GridFunction that is additionally a probability density: nonnegative
// values, mean exactly 1 (so the integral over [0,1) is 1).
using DensityGrid = GridFunction;

std::size_t cell_count(int level);

// cell index containing y; y must lie in [0,1)
std::size_t cell_index(const GridFunction& f, double y);

double evaluate(const GridFunction& f, double y);

double integral(const GridFunction& f);

// Exact L2 inner product; arguments may live at different resolutions (the
// coarser one is refined internally).
double l2_inner(const GridFunction& a, const GridFunction& b);

double l2_norm(const GridFunction& f);

double sup_norm(const GridFunction& f);

double inf_value(const GridFunction& f);

// Same function represented at a finer resolution (exact). new_level >= level.
GridFunction refine(const GridFunction& f, int new_level);

// ca*a + cb*b at the common (finer) resolution.
GridFunction combine(double ca, const GridFunction& a, double cb, const GridFunction& b);

GridFunction scale(double c, const GridFunction& f);

// constant function 1 at the given resolution
DensityGrid uniform_density(int level);

// checks nonnegativity and unit mass (|mean-1| <= mass_tol)
bool is_valid_density(const GridFunction& f, double mass_tol = 1e-12);

// throws std::invalid_argument unless is_valid_density
void require_density(const GridFunction& f, double mass_tol = 1e-12);

}  // namespace nphmm
