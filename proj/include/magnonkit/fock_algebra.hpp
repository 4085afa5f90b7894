#pragma once

// Dense operator algebra on truncated multi-mode Fock spaces: ladder and
// number operators, identity embedding, tensor products. All Hamiltonians
// in this library are assembled from these primitives.

#include <Eigen/Dense>

#include <complex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace magnonkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// Ordered truncation dimensions and names of the subsystems making up the
// tensor-product Hilbert space. The first label is the slowest-varying
// tensor index.
struct ModeLayout {
    std::vector<int> dims;
    std::vector<std::string> labels;

    ModeLayout() = default;
    ModeLayout(std::vector<int> d, std::vector<std::string> l)
        : dims(std::move(d)), labels(std::move(l))
    {
        if (dims.size() != labels.size())
            throw std::invalid_argument("ModeLayout: dims/labels size mismatch");
        for (int dim : dims)
            if (dim < 2)
                throw std::invalid_argument("ModeLayout: every dim must be >= 2");
        for (std::size_t i = 0; i < labels.size(); ++i)
            for (std::size_t j = i + 1; j < labels.size(); ++j)
                if (labels[i] == labels[j])
                    throw std::invalid_argument("ModeLayout: duplicate label " + labels[i]);
    }

    std::size_t n_modes() const { return dims.size(); }

    int total_dim() const
    {
        return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
    }

    std::size_t index_of(const std::string& label) const
    {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return i;
        throw std::invalid_argument("ModeLayout: unknown mode label '" + label + "'");
    }

    bool has(const std::string& label) const
    {
        for (const auto& l : labels)
            if (l == label) return true;
        return false;
    }

    // Basis index of the product state with the given per-mode occupations.
    int flatten(std::span<const int> occ) const
    {
        if (occ.size() != dims.size())
            throw std::invalid_argument("ModeLayout::flatten: occupation size mismatch");
        int idx = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (occ[k] < 0 || occ[k] >= dims[k])
                throw std::invalid_argument("ModeLayout::flatten: occupation out of range");
            idx = idx * dims[k] + occ[k];
        }
        return idx;
    }

    std::vector<int> unflatten(int idx) const
    {
        std::vector<int> occ(dims.size());
        for (std::size_t k = dims.size(); k-- > 0;) {
            occ[k] = idx % dims[k];
            idx /= dims[k];
        }
        return occ;
    }
};

inline bool is_hermitian(const Matrix& m, double rel_tol = 1e-12)
{
    double scale = m.norm();
    if (scale == 0.0) return true;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

// Single-mode annihilation operator a[n-1, n] = sqrt(n).
inline Matrix single_mode_annihilation(int dim)
{
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

// Kronecker product of the given per-mode matrices in layout order with
// identities on unspecified modes.
inline Matrix tensor_embed(const std::vector<std::pair<std::string, Matrix>>& ops,
                           const ModeLayout& layout)
{
    std::vector<const Matrix*> factor(layout.n_modes(), nullptr);
    for (const auto& [label, op] : ops) {
        std::size_t k = layout.index_of(label);
        if (factor[k] != nullptr)
            throw std::invalid_argument("tensor_embed: repeated label '" + label + "'");
        if (op.rows() != layout.dims[k] || op.cols() != layout.dims[k])
            throw std::invalid_argument("tensor_embed: shape mismatch for mode '" + label + "'");
        factor[k] = &op;
    }

    Matrix result = Matrix::Identity(1, 1);
    for (std::size_t k = 0; k < layout.n_modes(); ++k) {
        const Matrix local = factor[k] != nullptr
            ? *factor[k]
            : Matrix(Matrix::Identity(layout.dims[k], layout.dims[k]));
        Matrix next(result.rows() * local.rows(), result.cols() * local.cols());
        for (Eigen::Index i = 0; i < result.rows(); ++i)
            for (Eigen::Index j = 0; j < result.cols(); ++j)
                next.block(i * local.rows(), j * local.cols(), local.rows(), local.cols()) =
                    result(i, j) * local;
        result = std::move(next);
    }
    return result;
}

inline Matrix annihilation(const ModeLayout& layout, const std::string& mode)
{
    std::size_t k = layout.index_of(mode);
    return tensor_embed({{mode, single_mode_annihilation(layout.dims[k])}}, layout);
}

inline Matrix number_op(const ModeLayout& layout, const std::string& mode)
{
    std::size_t k = layout.index_of(mode);
    int d = layout.dims[k];
    Matrix n = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
        n(i, i) = static_cast<double>(i);
    return tensor_embed({{mode, n}}, layout);
}

}  // namespace magnonkit
