#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "flexsat/exosystem.h"
#include "flexsat/inertia.h"

namespace flexsat {

// Hurwitz observer pair for one axis internal model of order r. M is in
// companion form (superdiagonal ones), N is the last unit column, which makes
// (M, N) controllable by construction; both properties are still verified
// numerically at synthesis time.
struct MNPair {
    Eigen::MatrixXd M;
    Eigen::VectorXd N;
};

// Default poles: the pair -1 +- i sqrt(2) (characteristic lambda^2 + 2 lambda
// + 3) for r >= 2, padded with real poles at -2; r = 1 uses the single pole
// -2. Custom pole sets must be conjugate-closed and strictly stable.
MNPair choose_MN(int r, const std::vector<std::complex<double>>& poles = {});

// Solve T Phi - M T = N Psi by the vectorized dense method
// (Phi^T kron I - I kron M) vec(T) = vec(N Psi). Requires disjoint spectra of
// Phi and M; a residual above 1e-10 (Frobenius) is reported as an error.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& M,
                                const Eigen::MatrixXd& N, const Eigen::MatrixXd& Psi);

// Basis functions of the squared unknown frequencies:
// Omega^j(sigma) = prod_k (sigma_k^2)^(exponents[j][k]). The constant
// function is implicit (the E0 slot), so every exponent row must be nonzero.
struct OmegaBasis {
    int n_sigma = 0;
    std::vector<std::vector<int>> exponents;

    int ell() const { return static_cast<int>(exponents.size()); }
    Eigen::VectorXd eval(const Eigen::VectorXd& sigma) const;
    void validate() const;
};

// Marks tone `tone` of axis `axis` (0-based) as frequency-unknown. Its sigma
// component index is the position in DesignConfig::unknown.
struct UnknownFreq {
    int axis = 0;
    int tone = 0;
};

struct DesignConfig {
    std::vector<UnknownFreq> unknown;
    OmegaBasis basis;
    Eigen::VectorXd nominal_sigma;
    Eigen::VectorXd assumed_sigma;  // stand-ins while adaptation is off
    Eigen::VectorXd assumed_mu;
    Eigen::VectorXd grid_min;
    Eigen::VectorXd grid_max;
    int grid_points = 13;  // per sigma component
    // Optional per-axis observer poles; empty uses the default pattern.
    std::array<std::vector<std::complex<double>>, 3> m_poles{};
};

struct ParamFit {
    Eigen::MatrixXd E0;                   // 3 x r
    std::vector<Eigen::MatrixXd> blocks;  // ell entries, each 3 x r
    double residual = 0.0;                // worst held-out grid error
};

// Frozen synthesis output. Everything the controller needs is (M, N, E0,
// E_blocks); T and the axis structure are kept for analysis and export.
struct InternalModelDesign {
    struct AxisStructure {
        bool bias = false;
        std::vector<double> freqs;    // known values; unknown slots hold the nominal
        std::vector<int> sigma_slot;  // -1 = known, else sigma component index
    };

    std::array<AxisStructure, 3> axes;
    std::array<int, 3> r_axis{};
    std::array<MNPair, 3> mn;
    int r = 0;
    int n_mu = 0;
    Eigen::MatrixXd M;          // r x r blockdiag
    Eigen::MatrixXd N;          // r x 3, block columns
    Eigen::MatrixXd Psi;        // 3 x r, block rows
    Eigen::MatrixXd T_nominal;  // r x r blockdiag
    Eigen::MatrixXd E0;         // 3 x r
    std::vector<Eigen::MatrixXd> E_blocks;
    OmegaBasis basis;
    Eigen::VectorXd nominal_sigma;
    double sylvester_residual = 0.0;
    double fit_residual = 0.0;

    int ell() const { return basis.ell(); }
    // Length of the uncertainty vector R = [mu; Omega kron mu; Omega].
    int n_R() const { return n_mu + ell() * n_mu + ell(); }

    Eigen::MatrixXd Phi_at(const Eigen::VectorXd& sigma) const;
    Eigen::MatrixXd T_at(const Eigen::VectorXd& sigma) const;
    // Exact Psi T^{-1}(sigma) via per-axis solves (analysis route).
    Eigen::MatrixXd PsiTinv_at(const Eigen::VectorXd& sigma) const;
    // Fitted E0 + sum_j E_j Omega^j(sigma) (controller route).
    Eigen::MatrixXd PsiTinv_fit(const Eigen::VectorXd& sigma) const;
};

// Least-squares fit of Psi T^{-1}(sigma) = E0 + sum_j E^j Omega^j(sigma) over
// a tensor grid, validated on the shifted midpoint grid. Axes without unknown
// frequencies are folded into E0 with exactly zero E^j rows.
ParamFit fit_parameterization(const std::array<InternalModelDesign::AxisStructure, 3>& axes,
                              const std::array<MNPair, 3>& mn, const OmegaBasis& basis,
                              const Eigen::VectorXd& grid_min, const Eigen::VectorXd& grid_max,
                              int grid_points);

InternalModelDesign synthesize_design(const DisturbanceModel& model, const DesignConfig& cfg,
                                      int n_mu);

// Horizontal block product [E^1 B, ..., E^ell B]. Satisfies
// (E o B)(Omega kron c) = sum_j Omega_j E^j B c.
Eigen::MatrixXd block_row_product(const std::vector<Eigen::MatrixXd>& blocks,
                                  const Eigen::MatrixXd& B);

// Regressor in measured signals, rho = [rho1 rho2 rho3]:
//   rho1 = F1(w) + E0 (N L1(w) + zeta)
//   rho2 = E o (zeta + N L1(w))
//   rho3 = E o (N L0(w) - v)
Eigen::MatrixXd regressor_rho(const Eigen::Vector3d& omega_e, const Eigen::MatrixXd& zeta,
                              const Eigen::VectorXd& v, const InternalModelDesign& d,
                              const InertiaBasis& basis);

// True uncertainty vector R(sigma, mu) = [mu; Omega(sigma) kron mu; Omega(sigma)].
Eigen::VectorXd true_R(const Eigen::VectorXd& sigma, const Eigen::VectorXd& mu,
                       const InternalModelDesign& d);

// Internal model state equation: v' = M v + N u + N F0(w) - M N L0(w).
Eigen::VectorXd internal_model_rhs(const Eigen::VectorXd& v, const Eigen::Vector3d& u,
                                   const Eigen::Vector3d& omega_e, const InternalModelDesign& d,
                                   const InertiaBasis& basis);

// Dynamic compensator: zeta' = M zeta + (M N L1(w) - N F1(w)).
Eigen::MatrixXd compensator_rhs(const Eigen::MatrixXd& zeta, const Eigen::Vector3d& omega_e,
                                const InternalModelDesign& d, const InertiaBasis& basis);

}  // namespace flexsat
