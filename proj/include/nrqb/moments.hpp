#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace nrqb {

/// First moments ⟨x_i⟩ and normally ordered second moments N_ij = ⟨x_i† x_j⟩
/// over the mode list (a, b) or (a, b, c). ⟨x_j x_i†⟩ for i ≠ j is conj(N_ij).
struct MomentState {
    Eigen::VectorXcd first;
    Eigen::MatrixXcd second;

    static MomentState vacuum(std::size_t modes);
    /// Coherent (pure, factorized) state with N = conj(v) vᵀ.
    static MomentState coherent(const Eigen::VectorXcd& amplitudes);

    std::size_t modes() const { return static_cast<std::size_t>(first.size()); }

    /// Packs into [first, vec(second)] (column-major).
    Eigen::VectorXcd flatten() const;
    static MomentState unflatten(const Eigen::VectorXcd& y, std::size_t modes);

    /// N ← (N + N†)/2.
    void symmetrize();

    /// Hermitian within `tol` and diagonal real and ≥ −tol.
    bool satisfies_invariants(double tol = 1e-10) const;

    /// ‖N − conj(v) vᵀ‖∞ (max-abs entry).
    double factorization_defect() const;
};

}  // namespace nrqb
