#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "linearization.hpp"

namespace swlab {

enum class IndexOperator { dbar, star_d, star_dbar, dirac, full };

inline std::string to_string(IndexOperator op) {
    switch (op) {
        case IndexOperator::dbar: return "dbar";
        case IndexOperator::star_d: return "star-d";
        case IndexOperator::star_dbar: return "star-dbar";
        case IndexOperator::dirac: return "dirac";
        case IndexOperator::full: return "full";
    }
    return "?";
}

inline IndexOperator parse_index_operator(const std::string& s) {
    if (s == "dbar") return IndexOperator::dbar;
    if (s == "star-d") return IndexOperator::star_d;
    if (s == "star-dbar" || s == "star-dbar-on-1-forms") return IndexOperator::star_dbar;
    if (s == "dirac") return IndexOperator::dirac;
    if (s == "full") return IndexOperator::full;
    throw std::invalid_argument("unknown operator '" + s + "'");
}

struct AmbiguousGap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Describes how the real coordinates of a domain or codomain are laid out, so that the covariant
// roughness of a vector can be measured. A pair slot is a charged complex number (or half a
// quaternion) rotated by e^{i w theta} along links; a scalar slot is uncharged.
struct SlotMap {
    struct Slot {
        int s;
        int first;  // coordinate index
        bool pair;
        double weight;
    };
    std::vector<Slot> slots;
    int size = 0;

    void scalar(int s, int k) { slots.push_back({s, k, false, 0.0}); }
    void pair(int s, int k, double w) { slots.push_back({s, k, true, w}); }
};

// forward covariant differences of every slot, stacked
inline Eigen::MatrixXd roughness_operator(const Configuration& q, const SlotMap& M) {
    const auto& L = q.lat;
    // slots at a given site sharing a role are matched by their offset from the site's first slot
    std::vector<std::vector<int>> at_site(static_cast<std::size_t>(L.size()));
    for (std::size_t t = 0; t < M.slots.size(); ++t) at_site[static_cast<std::size_t>(M.slots[t].s)].push_back(static_cast<int>(t));
    int rows = 0;
    for (const auto& sl : M.slots) rows += sl.pair ? 4 : 2;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(rows, M.size);
    int r = 0;
    for (std::size_t t = 0; t < M.slots.size(); ++t) {
        const auto& sl = M.slots[t];
        const auto& here = at_site[static_cast<std::size_t>(sl.s)];
        const int rank = static_cast<int>(std::find(here.begin(), here.end(), static_cast<int>(t)) - here.begin());
        for (int dir = 0; dir < 2; ++dir) {
            const int nb = dir == 0 ? L.xp(sl.s) : L.yp(sl.s);
            const double h = dir == 0 ? L.hx() : L.hy();
            const auto& there = at_site[static_cast<std::size_t>(nb)];
            const auto& ns = M.slots[static_cast<std::size_t>(there[static_cast<std::size_t>(rank)])];
            if (!sl.pair) {
                G(r, ns.first) += 1.0 / h;
                G(r, sl.first) -= 1.0 / h;
                ++r;
                continue;
            }
            const double th = sl.weight * (dir == 0 ? q.theta_x(sl.s) : q.theta_y(sl.s) + q.y_cocycle(sl.s));
            const double c = std::cos(th), sn = std::sin(th);
            G(r, ns.first) += c / h;
            G(r, ns.first + 1) -= sn / h;
            G(r + 1, ns.first) += sn / h;
            G(r + 1, ns.first + 1) += c / h;
            G(r, sl.first) -= 1.0 / h;
            G(r + 1, sl.first + 1) -= 1.0 / h;
            r += 2;
        }
    }
    return G;
}

struct DiscreteOperator {
    Eigen::MatrixXd A;
    SlotMap domain, codomain;
    int real_per_unit = 1;  // 2 when the natural index counts complex dimensions
};

namespace detail {


inline DiscreteOperator make_dbar(const Configuration& q) {
    const auto& L = q.lat;
    const int N = L.size();
    DiscreteOperator D;
    D.A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    D.real_per_unit = 2;
    auto add = [&](int row, int col, cplx z) {
        // row/col are complex indices; z multiplies
        D.A(2 * row, 2 * col) += z.real();
        D.A(2 * row, 2 * col + 1) -= z.imag();
        D.A(2 * row + 1, 2 * col) += z.imag();
        D.A(2 * row + 1, 2 * col + 1) += z.real();
    };
    const cplx I(0, 1);
    for (int s = 0; s < N; ++s) {
        add(s, L.xp(s), std::polar(1.0, q.theta_x(s)) / L.hx());
        add(s, s, -1.0 / L.hx());
        add(s, L.yp(s), I * std::polar(1.0, q.theta_y(s) + q.y_cocycle(s)) / L.hy());
        add(s, s, -I / L.hy());
        D.domain.pair(s, 2 * s, 1.0);
        D.codomain.pair(s, 2 * s, 1.0);
    }
    D.domain.size = D.codomain.size = 2 * N;
    return D;
}

inline DiscreteOperator make_star_d(const Configuration& q) {
    const auto& L = q.lat;
    const int N = L.size();
    DiscreteOperator D;
    D.A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (int s = 0; s < N; ++s) {
        // curl row
        D.A(2 * s, 2 * L.xp(s) + 1) += 1.0 / L.hx();
        D.A(2 * s, 2 * s + 1) -= 1.0 / L.hx();
        D.A(2 * s, 2 * L.yp(s)) -= 1.0 / L.hy();
        D.A(2 * s, 2 * s) += 1.0 / L.hy();
        // div row
        D.A(2 * s + 1, 2 * s) += 1.0 / L.hx();
        D.A(2 * s + 1, 2 * L.xm(s)) -= 1.0 / L.hx();
        D.A(2 * s + 1, 2 * s + 1) += 1.0 / L.hy();
        D.A(2 * s + 1, 2 * L.ym(s) + 1) -= 1.0 / L.hy();
        for (int k = 0; k < 2; ++k) {
            D.domain.scalar(s, 2 * s + k);
            D.codomain.scalar(s, 2 * s + k);
        }
    }
    D.domain.size = D.codomain.size = 2 * N;
    return D;
}

inline DiscreteOperator make_star_dbar(const Configuration& q) {
    const auto& L = q.lat;
    const int N = L.size();
    DiscreteOperator D;
    D.A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (int s = 0; s < N; ++s) {
        // Re: d_x Re - d_y Im ; Im: d_x Im + d_y Re
        D.A(2 * s, 2 * L.xp(s)) += 1.0 / L.hx();
        D.A(2 * s, 2 * s) -= 1.0 / L.hx();
        D.A(2 * s, 2 * L.yp(s) + 1) -= 1.0 / L.hy();
        D.A(2 * s, 2 * s + 1) += 1.0 / L.hy();
        D.A(2 * s + 1, 2 * L.xp(s) + 1) += 1.0 / L.hx();
        D.A(2 * s + 1, 2 * s + 1) -= 1.0 / L.hx();
        D.A(2 * s + 1, 2 * L.yp(s)) += 1.0 / L.hy();
        D.A(2 * s + 1, 2 * s) -= 1.0 / L.hy();
        for (int k = 0; k < 2; ++k) {
            D.domain.scalar(s, 2 * s + k);
            D.codomain.scalar(s, 2 * s + k);
        }
    }
    D.domain.size = D.codomain.size = 2 * N;
    return D;
}

// The deformation operator (D_q, d1^*) in coordinates orthonormal for the tangent, residual and Lie pairings.
inline Eigen::MatrixXd weighted_full(const Configuration& q) {
    const Layout Lo = layout_of(q);
    const Vec wt = tangent_weights(q).cwiseSqrt(), wr = residual_weights(q).cwiseSqrt(), wl = lie_weights(q).cwiseSqrt();
    const Eigen::MatrixXd J = Eigen::MatrixXd(jacobian(q));
    const Eigen::MatrixXd Dt = Eigen::MatrixXd(SpMat(d1_matrix(q).transpose()));
    Eigen::MatrixXd A(Lo.rows() + Lo.N, Lo.dofs());
    A.topRows(Lo.rows()) = wr.asDiagonal() * J * wt.cwiseInverse().asDiagonal();
    A.bottomRows(Lo.N) = wl.cwiseInverse().asDiagonal() * Dt * wt.asDiagonal();
    return A;
}

// Column and row selections of the full operator: alpha block, spinor block, Higgs block.
struct BlockSelection {
    std::vector<int> cols, rows;
};

inline BlockSelection block_selection(const Configuration& q, IndexOperator op) {
    const Layout Lo = layout_of(q);
    BlockSelection b;
    for (int s = 0; s < Lo.N; ++s) {
        if (op == IndexOperator::star_d || op == IndexOperator::full) {
            b.cols.push_back(Lo.ax(s));
            b.cols.push_back(Lo.ay(s));
            b.rows.push_back(Lo.r1(s));
            b.rows.push_back(Lo.rows() + s);
        }
        if (op == IndexOperator::dirac || op == IndexOperator::full) {
            for (int a = 0; a < Lo.n; ++a)
                for (int c = 0; c < 4; ++c) {
                    b.cols.push_back(Lo.xi(s, a, c));
                    b.rows.push_back(Lo.r2(s, a, c));
                }
        }
        if (op == IndexOperator::star_dbar || op == IndexOperator::full) {
            b.cols.push_back(Lo.eta_re(s));
            b.cols.push_back(Lo.eta_im(s));
            b.rows.push_back(Lo.r3_re(s));
            b.rows.push_back(Lo.r3_im(s));
        }
    }
    return b;
}

// slot description of a selection of tangent coordinates (domain) or residual/Lie rows (codomain)
inline SlotMap tangent_slots(const Configuration& q, const std::vector<int>& cols) {
    const Layout Lo = layout_of(q);
    std::vector<int> pos(static_cast<std::size_t>(Lo.dofs()), -1);
    for (std::size_t k = 0; k < cols.size(); ++k) pos[static_cast<std::size_t>(cols[k])] = static_cast<int>(k);
    SlotMap M;
    M.size = static_cast<int>(cols.size());
    for (int s = 0; s < Lo.N; ++s) {
        for (int c : {Lo.ax(s), Lo.ay(s), Lo.eta_re(s), Lo.eta_im(s)})
            if (pos[c] >= 0) M.scalar(s, pos[c]);
        for (int a = 0; a < Lo.n; ++a)
            if (pos[Lo.xi(s, a, 0)] >= 0) {
                M.pair(s, pos[Lo.xi(s, a, 0)], q.target.weight(a));
                M.pair(s, pos[Lo.xi(s, a, 2)], q.target.weight(a));
            }
    }
    return M;
}

inline SlotMap residual_slots(const Configuration& q, const std::vector<int>& rows) {
    const Layout Lo = layout_of(q);
    std::vector<int> pos(static_cast<std::size_t>(Lo.rows() + Lo.N), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) pos[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);
    SlotMap M;
    M.size = static_cast<int>(rows.size());
    for (int s = 0; s < Lo.N; ++s) {
        for (int c : {Lo.r1(s), Lo.rows() + s, Lo.r3_re(s), Lo.r3_im(s)})
            if (pos[c] >= 0) M.scalar(s, pos[c]);
        for (int a = 0; a < Lo.n; ++a)
            if (pos[Lo.r2(s, a, 0)] >= 0) {
                M.pair(s, pos[Lo.r2(s, a, 0)], q.target.weight(a));
                M.pair(s, pos[Lo.r2(s, a, 2)], q.target.weight(a));
            }
    }
    return M;
}

inline DiscreteOperator make_block(const Configuration& q, IndexOperator op) {
    const BlockSelection b = block_selection(q, op);
    const Eigen::MatrixXd F = weighted_full(q);
    DiscreteOperator D;
    D.A.resize(static_cast<Eigen::Index>(b.rows.size()), static_cast<Eigen::Index>(b.cols.size()));
    for (std::size_t i = 0; i < b.rows.size(); ++i)
        for (std::size_t j = 0; j < b.cols.size(); ++j) D.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = F(b.rows[i], b.cols[j]);
    D.domain = tangent_slots(q, b.cols);
    D.codomain = residual_slots(q, b.rows);
    return D;
}

}  // namespace detail

inline DiscreteOperator build_index_operator(const Configuration& q, IndexOperator op) {
    switch (op) {
        case IndexOperator::dbar: return detail::make_dbar(q);
        case IndexOperator::star_dbar: return detail::make_star_dbar(q);
        case IndexOperator::star_d: return detail::make_star_d(q);
        case IndexOperator::dirac:
        case IndexOperator::full: return detail::make_block(q, op);
    }
    throw std::invalid_argument("unknown operator");
}

struct IndexResult {
    std::string op;
    int degree = 0;
    int Nx = 0, Ny = 0;
    int dim_ker = 0, dim_coker = 0;              // raw numerical kernel and cokernel
    int smooth_ker = 0, smooth_coker = 0;        // after removing lattice doublers
    int index = 0;                               // smooth_ker - smooth_coker, in natural units
    int real_per_unit = 1;
    double sigma_gap = 0;                        // smallest nonzero over largest zero singular value
    double sigma_max = 0;
    std::vector<double> ker_roughness, coker_roughness;
};

struct IndexOptions {
    double zero_cap = 1e-2;       // only singular values below zero_cap * sigma_max may count as zero modes
    double min_gap = 1e3;         // required separation of the zero cluster
    double rough_threshold = 0.5; // normalized roughness separating doublers
};

namespace detail {

inline std::vector<double> subspace_roughness(const Eigen::MatrixXd& G, const Eigen::MatrixXd& V, double scale) {
    if (V.cols() == 0) return {};
    const Eigen::MatrixXd GV = G * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(GV.transpose() * GV);
    std::vector<double> r(static_cast<std::size_t>(V.cols()));
    for (Eigen::Index k = 0; k < V.cols(); ++k) r[static_cast<std::size_t>(k)] = es.eigenvalues()[k] / scale;
    return r;
}

}  // namespace detail

inline IndexResult numerical_index(const Configuration& q, IndexOperator op, const IndexOptions& opt = {}) {
    const auto& L = q.lat;
    if (L.Nx > 32 || L.Ny > 32) throw std::invalid_argument("numerical index needs a lattice of at most 32 x 32");
    const DiscreteOperator D = build_index_operator(q, op);
    const Eigen::Index m = D.A.rows(), n = D.A.cols();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(D.A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const Eigen::Index p = sv.size();
    IndexResult res;
    res.op = to_string(op);
    res.degree = q.bundle.degree;
    res.Nx = L.Nx;
    res.Ny = L.Ny;
    res.real_per_unit = D.real_per_unit;
    res.sigma_max = p ? sv[0] : 0.0;
    // near-zero modes split off exponentially in the lattice size; cut at the first clear gap
    // below the cap, scanning down from the top of the spectrum
    const double floor = 1e-14 * res.sigma_max;
    auto at = [&](Eigen::Index k) { return std::max(sv[k], floor); };
    Eigen::Index first = 0;
    while (first < p && sv[first] >= opt.zero_cap * res.sigma_max) ++first;
    Eigen::Index rank = p;
    res.sigma_gap = std::numeric_limits<double>::infinity();
    if (first == 0 && p > 0) {
        rank = 0;
    } else if (first < p) {
        double best = 0;
        Eigen::Index best_at = first;
        for (Eigen::Index j = first; j < p; ++j) {
            const double ratio = at(j - 1) / at(j);
            if (ratio >= opt.min_gap) {
                best = ratio;
                best_at = j;
                break;
            }
            if (ratio > best) {
                best = ratio;
                best_at = j;
            }
        }
        rank = best_at;
        res.sigma_gap = best;
    }
    const double smallest_nonzero = rank > 0 ? sv[rank - 1] : 0.0;
    const double largest_zero = rank < p ? sv[rank] : 0.0;
    if (res.sigma_gap < opt.min_gap)
        throw AmbiguousGap("no clear spectral gap for " + res.op + ": smallest kept singular value " +
                           std::to_string(smallest_nonzero) + ", largest discarded " + std::to_string(largest_zero));
    const Eigen::MatrixXd K = svd.matrixV().rightCols(n - rank);
    const Eigen::MatrixXd C = svd.matrixU().rightCols(m - rank);
    res.dim_ker = static_cast<int>(n - rank);
    res.dim_coker = static_cast<int>(m - rank);
    const double scale = 2.0 / (L.hx() * L.hx()) + 2.0 / (L.hy() * L.hy());
    res.ker_roughness = detail::subspace_roughness(roughness_operator(q, D.domain), K, scale);
    res.coker_roughness = detail::subspace_roughness(roughness_operator(q, D.codomain), C, scale);
    for (double r : res.ker_roughness) res.smooth_ker += r < opt.rough_threshold;
    for (double r : res.coker_roughness) res.smooth_coker += r < opt.rough_threshold;
    const int real_index = res.smooth_ker - res.smooth_coker;
    if (real_index % D.real_per_unit != 0) throw AmbiguousGap("smooth mode count is not a multiple of the complex rank");
    res.index = real_index / D.real_per_unit;
    return res;
}

// Sum of the weights of the circle action on the holomorphic tangent space (T, I1) of the target.
inline double equivariant_weight_sum(const Target& t) {
    const int d = 4 * t.n;
    Eigen::MatrixXcd I1 = Eigen::MatrixXcd::Zero(d, d), Gen = Eigen::MatrixXcd::Zero(d, d);
    for (int a = 0; a < t.n; ++a)
        for (int m = 0; m < 4; ++m) {
            Quaternion e;
            e[m] = 1.0;
            const Quaternion ie = apply_I(1, e), ge = t.weight(a) * (Quaternion::I() * e);
            for (int c = 0; c < 4; ++c) {
                I1(4 * a + c, 4 * a + m) = ie[c];
                Gen(4 * a + c, 4 * a + m) = ge[c];
            }
        }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(I1);
    std::vector<int> keep;
    for (int k = 0; k < d; ++k)
        if (std::abs(es.eigenvalues()[k] - cplx(0, 1)) < 1e-8) keep.push_back(k);
    Eigen::MatrixXcd P(d, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) P.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
    const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(P).householderQ() * Eigen::MatrixXcd::Identity(d, P.cols());
    return (Q.adjoint() * Gen * Q).trace().imag();
}

// Expected indices: the dbar operator counts complex dimensions, the others real ones.
inline int expected_index(const Configuration& q, IndexOperator op) {
    const int d = q.bundle.degree;
    const int spinor = static_cast<int>(std::lround(-2.0 * d * equivariant_weight_sum(q.target)));
    switch (op) {
        case IndexOperator::dbar: return d;
        case IndexOperator::star_d: return 0;
        case IndexOperator::star_dbar: return 0;
        case IndexOperator::dirac: return spinor;
        case IndexOperator::full: return spinor;
    }
    return 0;
}

struct SurjectivityReport {
    double sigma_min = 0, sigma_max = 0;
    double relative = 0;  // sigma_min / sigma_max of the weighted adjoint
};

// D_q is onto iff its weighted adjoint is injective: smallest of the residual-count singular values
inline SurjectivityReport surjectivity_margin(const Configuration& q) {
    const Layout Lo = layout_of(q);
    const Vec wt = tangent_weights(q).cwiseSqrt(), wr = residual_weights(q).cwiseSqrt();
    const Eigen::MatrixXd A = wr.asDiagonal() * Eigen::MatrixXd(jacobian(q)) * wt.cwiseInverse().asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    const Vec& s = svd.singularValues();
    SurjectivityReport r;
    r.sigma_max = s[0];
    r.sigma_min = s[std::min<Eigen::Index>(Lo.rows(), Lo.dofs()) - 1];
    r.relative = r.sigma_min / r.sigma_max;
    return r;
}

}  // namespace swlab
