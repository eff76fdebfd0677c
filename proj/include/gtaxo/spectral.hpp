#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"

namespace gtaxo::spectral {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr Eigen::Index default_dense_limit = 3000;

// GTAXO_DENSE_LIMIT overrides the largest n handled by the dense eigensolver.
inline Eigen::Index dense_limit() {
    if (const char* env = std::getenv("GTAXO_DENSE_LIMIT")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<Eigen::Index>(v);
    }
    return default_dense_limit;
}

enum class LaplacianKind { combinatorial, normalized };

// D^{-1/2} with the pseudo-inverse convention: isolated nodes get 0.
inline Eigen::VectorXd inv_sqrt_degrees(const Graph& g) {
    Eigen::VectorXd s(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const int d = g.degree(v);
        s[v] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
    }
    return s;
}

// L = D - M
inline Eigen::MatrixXd laplacian(const Graph& g) {
    Eigen::MatrixXd l = -g.adjacency_dense();
    for (NodeId v = 0; v < g.num_nodes(); ++v) l(v, v) = g.degree(v);
    return l;
}

// N = I - D^{-1/2} M D^{-1/2}; rows/columns of isolated nodes are zero.
inline Eigen::MatrixXd normalized_laplacian(const Graph& g) {
    const auto s = inv_sqrt_degrees(g);
    Eigen::MatrixXd n = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (g.degree(v) > 0) n(v, v) = 1.0;
    for (auto [u, v] : g.edges()) n(u, v) = n(v, u) = -s[u] * s[v];
    return n;
}

// D^{-1/2} M D^{-1/2} as a sparse matrix.
inline SparseMatrix normalized_adjacency(const Graph& g) {
    const auto s = inv_sqrt_degrees(g);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * g.num_edges());
    for (auto [u, v] : g.edges()) {
        const double w = s[u] * s[v];
        t.emplace_back(u, v, w);
        t.emplace_back(v, u, w);
    }
    SparseMatrix a(g.num_nodes(), g.num_nodes());
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

// T = (I + D^{-1/2} M D^{-1/2}) / 2, eigenvalues h(lambda) = 1 - lambda/2.
inline SparseMatrix diffusion_operator(const Graph& g) {
    SparseMatrix t = normalized_adjacency(g);
    SparseMatrix id(g.num_nodes(), g.num_nodes());
    id.setIdentity();
    t = 0.5 * (t + id);
    t.makeCompressed();
    return t;
}

struct SpectralDecomposition {
    LaplacianKind kind = LaplacianKind::normalized;
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues[i]

    Eigen::Index size() const noexcept { return eigenvalues.size(); }
};

// Flips each eigenvector so its first component with |x| > 1e-12 is positive.
inline void canonicalize_signs(Eigen::MatrixXd& vecs) {
    for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
        for (Eigen::Index r = 0; r < vecs.rows(); ++r) {
            if (std::abs(vecs(r, c)) > 1e-12) {
                if (vecs(r, c) < 0) vecs.col(c) *= -1.0;
                break;
            }
        }
    }
}

inline SpectralDecomposition eigendecompose(const Eigen::MatrixXd& m, LaplacianKind kind,
                                            Eigen::Index limit = dense_limit()) {
    if (m.rows() != m.cols()) throw InputError("eigendecompose: matrix is not square");
    if (m.rows() > limit)
        throw ResourceError("eigendecompose: n = " + std::to_string(m.rows()) + " exceeds dense limit " +
                            std::to_string(limit) + "; use the wavelet path");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InputError("eigendecompose: matrix is not symmetric");
    SpectralDecomposition dec;
    dec.kind = kind;
    if (m.rows() == 0) return dec;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw InputError("eigendecompose: solver did not converge");
    dec.eigenvalues = solver.eigenvalues();
    dec.eigenvectors = solver.eigenvectors();
    canonicalize_signs(dec.eigenvectors);
    return dec;
}

inline SpectralDecomposition decompose(const Graph& g, LaplacianKind kind, Eigen::Index limit = dense_limit()) {
    if (g.num_nodes() > limit)
        throw ResourceError("graph with " + std::to_string(g.num_nodes()) + " nodes exceeds dense limit " +
                            std::to_string(limit));
    return eigendecompose(kind == LaplacianKind::normalized ? normalized_laplacian(g) : laplacian(g), kind, limit);
}

enum class Band { low, mid, high };

inline std::string to_string(Band b) {
    switch (b) {
        case Band::low: return "low";
        case Band::mid: return "mid";
        case Band::high: return "high";
    }
    return "?";
}

// Half-open eigen-index interval.
struct IndexRange {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
    Eigen::Index size() const noexcept { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Ceiling rule: low = [0, ceil(n/3)), mid = [ceil(n/3), ceil(2n/3)), high = rest.
inline std::array<IndexRange, 3> band_partition(Eigen::Index n) {
    if (n < 1) throw InputError("band_partition: n must be >= 1");
    const Eigen::Index a = (n + 2) / 3;
    const Eigen::Index b = (2 * n + 2) / 3;
    return {IndexRange{0, a}, IndexRange{a, b}, IndexRange{b, n}};
}

inline IndexRange band_range(Eigen::Index n, Band band) { return band_partition(n)[static_cast<int>(band)]; }

// Orthogonal projection of every column of x onto the span of the band's
// eigenvectors: Phi I_band Phi^T x.
inline Eigen::MatrixXd hard_bandpass(const Eigen::MatrixXd& x, const SpectralDecomposition& dec, Band band) {
    if (x.rows() != dec.size())
        throw InputError("hard_bandpass: feature matrix has " + std::to_string(x.rows()) + " rows, spectrum has " +
                         std::to_string(dec.size()));
    if (x.rows() == 0) return x;
    const auto r = band_range(dec.size(), band);
    if (r.size() == 0) return Eigen::MatrixXd::Zero(x.rows(), x.cols());
    const auto basis = dec.eigenvectors.middleCols(r.begin, r.size());
    return basis * (basis.transpose() * x);
}

inline Eigen::MatrixXd band_projector(const SpectralDecomposition& dec, Band band) {
    const auto r = band_range(dec.size(), band);
    const auto basis = dec.eigenvectors.middleCols(r.begin, r.size());
    return basis * basis.transpose();
}

// Frequency responses of the K = 1 diffusion wavelet bank as functions of an
// eigenvalue of N.
inline double wavelet_response(Band band, double lambda) {
    const double t = 1.0 - lambda / 2.0;
    switch (band) {
        case Band::low: return t * t;
        case Band::mid: return t - t * t;
        case Band::high: return lambda / 2.0;
    }
    return 0.0;
}

struct WaveletBands {
    Eigen::MatrixXd low, mid, high;
};

// X_low = T^2 X, X_mid = (T - T^2) X, X_high = (I - T) X using two sparse
// products only.
inline WaveletBands wavelet_bank(const Eigen::MatrixXd& x, const Graph& g) {
    if (x.rows() != g.num_nodes()) throw InputError("wavelet_filter: feature rows do not match node count");
    const SparseMatrix t = diffusion_operator(g);
    Eigen::MatrixXd tx = t * x;
    Eigen::MatrixXd ttx = t * tx;
    WaveletBands out;
    out.mid = tx - ttx;
    out.high = x - tx;
    out.low = std::move(ttx);
    return out;
}

inline Eigen::MatrixXd wavelet_filter(const Eigen::MatrixXd& x, const Graph& g, Band band) {
    auto b = wavelet_bank(x, g);
    switch (band) {
        case Band::low: return std::move(b.low);
        case Band::mid: return std::move(b.mid);
        case Band::high: return std::move(b.high);
    }
    return {};
}

// Phi h(Lambda) Phi^T x for an arbitrary response h; used to cross-check the
// wavelet path against the spectrum.
template <class Response>
Eigen::MatrixXd spectral_filter(const Eigen::MatrixXd& x, const SpectralDecomposition& dec, Response&& h) {
    Eigen::VectorXd resp(dec.size());
    for (Eigen::Index i = 0; i < dec.size(); ++i) resp[i] = h(dec.eigenvalues[i]);
    return dec.eigenvectors * resp.asDiagonal() * (dec.eigenvectors.transpose() * x);
}

}  // namespace gtaxo::spectral
