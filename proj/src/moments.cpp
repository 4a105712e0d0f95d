#include "nrqb/moments.hpp"

#include "nrqb/error.hpp"

namespace nrqb {

MomentState MomentState::vacuum(std::size_t modes) {
    const auto n = static_cast<Eigen::Index>(modes);
    return {Eigen::VectorXcd::Zero(n), Eigen::MatrixXcd::Zero(n, n)};
}

MomentState MomentState::coherent(const Eigen::VectorXcd& amplitudes) {
    return {amplitudes, amplitudes.conjugate() * amplitudes.transpose()};
}

Eigen::VectorXcd MomentState::flatten() const {
    const Eigen::Index n = first.size();
    Eigen::VectorXcd y(n + n * n);
    y.head(n) = first;
    y.tail(n * n) = Eigen::Map<const Eigen::VectorXcd>(second.data(), n * n);
    return y;
}

MomentState MomentState::unflatten(const Eigen::VectorXcd& y, std::size_t modes) {
    const auto n = static_cast<Eigen::Index>(modes);
    if (y.size() != n + n * n) throw DimensionMismatch("flat moment vector has wrong length");
    MomentState s;
    s.first = y.head(n);
    s.second = Eigen::Map<const Eigen::MatrixXcd>(y.data() + n, n, n);
    return s;
}

void MomentState::symmetrize() {
    const Eigen::MatrixXcd h = 0.5 * (second + second.adjoint());
    second = h;
}

bool MomentState::satisfies_invariants(double tol) const {
    if (second.rows() != first.size() || second.cols() != first.size()) return false;
    if ((second - second.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    for (Eigen::Index i = 0; i < second.rows(); ++i) {
        if (std::abs(second(i, i).imag()) > tol || second(i, i).real() < -tol) return false;
    }
    return true;
}

double MomentState::factorization_defect() const {
    return (second - first.conjugate() * first.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace nrqb
