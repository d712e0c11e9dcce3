#include "nphmm/separation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nphmm {

namespace {

std::size_t lambda_dim(int start_level, int max_mother_level) {
    std::size_t d = cell_count(start_level);
    for (int j = start_level; j <= max_mother_level; ++j) d += cell_count(j);
    return d;
}

// basis values per histogram cell: row lambda, column cell, at resolution
// max_mother_level + 1
std::vector<std::vector<double>> basis_table(int start_level, int max_mother_level,
                                             int resolution) {
    const auto indices = index_set(start_level, max_mother_level);
    std::vector<std::vector<double>> table;
    table.reserve(indices.size());
    for (const auto& idx : indices)
        table.push_back(basis_vector(idx, start_level, resolution).values);
    return table;
}

}  // namespace

GramMatrix empirical_gram(const SamplePath& path, int max_mother_level, int start_level) {
    if (max_mother_level < start_level)
        throw std::invalid_argument("empirical_gram: max mother level below start level");
    const std::size_t n = path.size();
    if (n < 2) throw std::invalid_argument("empirical_gram: need at least 2 observations");

    const int resolution = max_mother_level + 1;
    const std::size_t cells = cell_count(resolution);
    const double cells_d = static_cast<double>(cells);

    // cell occupancy and lag-one pair occupancy
    std::vector<std::size_t> cell_of(n);
    for (std::size_t t = 0; t < n; ++t) {
        auto c = static_cast<std::size_t>(path.observed[t] * cells_d);
        cell_of[t] = std::min(c, cells - 1);
    }
    std::vector<double> h1(cells, 0.0);
    for (std::size_t t = 0; t < n; ++t) h1[cell_of[t]] += 1.0;
    for (double& v : h1) v /= static_cast<double>(n);

    std::vector<double> h2(cells * cells, 0.0);
    for (std::size_t t = 0; t + 1 < n; ++t) h2[cell_of[t] * cells + cell_of[t + 1]] += 1.0;
    for (double& v : h2) v /= static_cast<double>(n - 1);

    const auto basis = basis_table(start_level, max_mother_level, resolution);
    const std::size_t dim = basis.size();

    std::vector<double> p1(dim, 0.0);
    for (std::size_t l = 0; l < dim; ++l) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cells; ++c) acc += basis[l][c] * h1[c];
        p1[l] = acc;
    }

    // W[l][b] = sum_a basis[l][a] h2[a][b], then P2 = W basis^T
    std::vector<double> w(dim * cells, 0.0);
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t a = 0; a < cells; ++a) {
            const double bla = basis[l][a];
            if (bla == 0.0) continue;
            const double* row = &h2[a * cells];
            double* wrow = &w[l * cells];
            for (std::size_t b = 0; b < cells; ++b) wrow[b] += bla * row[b];
        }
    }

    GramMatrix gram;
    gram.start_level = start_level;
    gram.max_mother_level = max_mother_level;
    gram.dim = dim;
    gram.entries.assign(dim * dim, 0.0);
    for (std::size_t l = 0; l < dim; ++l) {
        for (std::size_t m = l; m < dim; ++m) {
            double p2 = 0.0;
            const double* wrow = &w[l * cells];
            for (std::size_t b = 0; b < cells; ++b) p2 += wrow[b] * basis[m][b];
            double p2t = 0.0;
            const double* wrow_m = &w[m * cells];
            for (std::size_t b = 0; b < cells; ++b) p2t += wrow_m[b] * basis[l][b];
            const double value = 0.5 * (p2 + p2t) - p1[l] * p1[m];
            gram.at(l, m) = value;
            gram.at(m, l) = value;
        }
    }
    return gram;
}

GramMatrix gram_oracle(const ModelParams& theta, int max_mother_level, int start_level) {
    if (max_mother_level < start_level)
        throw std::invalid_argument("gram_oracle: max mother level below start level");
    const ReparamPoint rp = reparametrize(theta);

    GramMatrix gram;
    gram.start_level = start_level;
    gram.max_mother_level = max_mother_level;
    gram.dim = lambda_dim(start_level, max_mother_level);
    gram.entries.assign(gram.dim * gram.dim, 0.0);
    if (!rp.contrast_defined) return gram;

    if (max_mother_level > rp.contrast.level - 1)
        throw std::invalid_argument("gram_oracle: index set finer than the model grid");
    const CoeffTree tree = analyze(rp.contrast, max_mother_level, start_level);
    const std::vector<double> coeff = tree_to_flat(tree);
    const double r = contrast_weight(rp);
    for (std::size_t l = 0; l < gram.dim; ++l)
        for (std::size_t m = 0; m < gram.dim; ++m)
            gram.at(l, m) = r * coeff[l] * coeff[m];
    return gram;
}

EigenDecomposition jacobi_eigen(const std::vector<double>& symmetric, std::size_t dim) {
    if (symmetric.size() != dim * dim)
        throw std::invalid_argument("jacobi_eigen: size mismatch");
    std::vector<double> a = symmetric;
    std::vector<double> v(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) v[i * dim + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i + 1; j < dim; ++j) s += a[i * dim + j] * a[i * dim + j];
        return std::sqrt(2.0 * s);
    };
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::fabs(x));
    const double tol = scale > 0.0 ? 1e-15 * scale * static_cast<double>(dim) : 0.0;

    for (int sweep = 0; sweep < 100 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < dim; ++p) {
            for (std::size_t q = p + 1; q < dim; ++q) {
                const double apq = a[p * dim + q];
                if (apq == 0.0) continue;
                const double app = a[p * dim + p];
                const double aqq = a[q * dim + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < dim; ++k) {
                    const double akp = a[k * dim + p];
                    const double akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    const double apk = a[p * dim + k];
                    const double aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    const double vkp = v[k * dim + p];
                    const double vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    EigenDecomposition out;
    out.values.resize(dim);
    out.vectors.assign(dim, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < dim; ++i) {
        out.values[i] = a[i * dim + i];
        for (std::size_t k = 0; k < dim; ++k) out.vectors[i][k] = v[k * dim + i];
    }
    return out;
}

EigenPair leading_eigenvector(const GramMatrix& gram) {
    EigenPair out;
    bool all_zero = true;
    for (double x : gram.entries)
        if (x != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) {
        out.value = 0.0;
        out.vector.assign(gram.dim, 0.0);
        if (!out.vector.empty()) out.vector[0] = 1.0;
        out.degenerate = true;
        return out;
    }

    const EigenDecomposition eig = jacobi_eigen(gram.entries, gram.dim);
    std::size_t best = 0;
    for (std::size_t i = 1; i < gram.dim; ++i)
        if (std::fabs(eig.values[i]) > std::fabs(eig.values[best])) best = i;
    out.value = eig.values[best];
    out.vector = eig.vectors[best];

    double norm = 0.0;
    for (double x : out.vector) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : out.vector) x /= norm;

    std::size_t arg = 0;
    for (std::size_t i = 1; i < out.vector.size(); ++i)
        if (std::fabs(out.vector[i]) > std::fabs(out.vector[arg])) arg = i;
    if (out.vector[arg] < 0.0)
        for (double& x : out.vector) x = -x;
    return out;
}

std::vector<double> tree_to_flat(const CoeffTree& c) {
    std::vector<double> flat = c.father;
    for (const auto& lv : c.mother) flat.insert(flat.end(), lv.begin(), lv.end());
    return flat;
}

CoeffTree flat_to_tree(const std::vector<double>& flat, int start_level,
                       int max_mother_level) {
    if (flat.size() != lambda_dim(start_level, max_mother_level))
        throw std::invalid_argument("flat_to_tree: size mismatch");
    CoeffTree c = zero_tree(start_level, max_mother_level);
    std::size_t pos = 0;
    for (double& x : c.father) x = flat[pos++];
    for (auto& lv : c.mother)
        for (double& x : lv) x = flat[pos++];
    return c;
}

SeparatingDirection direction_from_gram(const GramMatrix& gram, double tau) {
    if (!(tau >= 1.0)) throw std::invalid_argument("direction_from_gram: need tau >= 1");
    const EigenPair eig = leading_eigenvector(gram);
    const CoeffTree tree = flat_to_tree(eig.vector, gram.start_level, gram.max_mother_level);
    GridFunction grid = synthesize(tree, gram.max_mother_level + 1);

    SeparatingDirection out;
    out.tau = tau;
    out.leading_eigenvalue = eig.value;
    out.degenerate = eig.degenerate;

    for (double& x : grid.values) {
        if (x > tau) {
            x = tau;
            out.clamp_active = true;
        } else if (x < -tau) {
            x = -tau;
            out.clamp_active = true;
        }
    }
    const double norm = l2_norm(grid);
    if (norm < 1e-14) {
        // a.e. zero after truncation: fall back to the first father direction
        WaveletIndex father{WaveletIndex::Kind::father, gram.start_level, 0};
        grid = basis_vector(father, gram.start_level, gram.max_mother_level + 1);
        const double fn = l2_norm(grid);
        for (double& x : grid.values) x /= fn;
        out.degenerate = true;
    } else {
        for (double& x : grid.values) x /= norm;
    }
    out.grid = std::move(grid);
    return out;
}

SeparatingDirection psi_tilde_from_path(const SamplePath& train, int max_mother_level,
                                        double tau, int start_level) {
    return direction_from_gram(empirical_gram(train, max_mother_level, start_level), tau);
}

bool direction_level_sufficient(int max_mother_level, double s_star, double zeta,
                                double radius) {
    const double lhs = std::pow(2.0, -max_mother_level * s_star);
    const double rhs =
        zeta * std::sqrt(std::pow(2.0, 2.0 * s_star) - 1.0) / (4.0 * radius);
    return lhs <= rhs;
}

}  // namespace nphmm
