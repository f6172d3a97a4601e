#include "flexsat/internal_model.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flexsat {

namespace {

// Monic real polynomial from a conjugate-closed pole set, lowest degree first.
std::vector<double> poly_from_poles(const std::vector<std::complex<double>>& poles) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& p : poles) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= p * c[i];
        }
        c = next;
    }
    std::vector<double> out(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        if (std::abs(c[i].imag()) > 1e-9) {
            throw std::invalid_argument("choose_MN: pole set is not conjugate-closed");
        }
        out[i] = c[i].real();
    }
    return out;
}

}  // namespace

MNPair choose_MN(int r, const std::vector<std::complex<double>>& poles) {
    if (r < 1) throw std::invalid_argument("choose_MN: order must be >= 1");
    std::vector<std::complex<double>> p = poles;
    if (p.empty()) {
        if (r == 1) {
            p = {-2.0};
        } else {
            p = {{-1.0, std::sqrt(2.0)}, {-1.0, -std::sqrt(2.0)}};
            for (int i = 2; i < r; ++i) p.push_back(-2.0);
        }
    }
    if (static_cast<int>(p.size()) != r) {
        throw std::invalid_argument("choose_MN: pole count does not match order");
    }
    for (const auto& pole : p) {
        if (!(pole.real() < 0.0)) {
            throw std::invalid_argument("choose_MN: poles must have strictly negative real part");
        }
    }
    const std::vector<double> coeff = poly_from_poles(p);  // coeff[k] multiplies lambda^k
    MNPair mn;
    mn.M = Eigen::MatrixXd::Zero(r, r);
    for (int i = 0; i + 1 < r; ++i) mn.M(i, i + 1) = 1.0;
    for (int k = 0; k < r; ++k) mn.M(r - 1, k) = -coeff[k];
    mn.N = Eigen::VectorXd::Zero(r);
    mn.N(r - 1) = 1.0;
    return mn;
}

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& M,
                                const Eigen::MatrixXd& N, const Eigen::MatrixXd& Psi) {
    const int rc = static_cast<int>(Phi.rows());
    const int rr = static_cast<int>(M.rows());
    if (Phi.cols() != rc || M.cols() != rr) {
        throw std::invalid_argument("solve_sylvester: Phi and M must be square");
    }
    if (N.rows() != rr || Psi.cols() != rc || N.cols() != Psi.rows()) {
        throw std::invalid_argument("solve_sylvester: N Psi does not conform to T");
    }
    const Eigen::MatrixXd rhs = N * Psi;  // rr x rc
    // vec is column-major: vec(T Phi) = (Phi^T kron I) vec T, vec(M T) = (I kron M) vec T.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rr * rc, rr * rc);
    for (int j = 0; j < rc; ++j) {
        for (int i = 0; i < rc; ++i) {
            // block (j, i) of (Phi^T kron I) is Phi(i, j) I.
            for (int k = 0; k < rr; ++k) A(j * rr + k, i * rr + k) += Phi(i, j);
        }
        A.block(j * rr, j * rr, rr, rr) -= M;
    }
    Eigen::VectorXd b(rr * rc);
    for (int j = 0; j < rc; ++j) b.segment(j * rr, rr) = rhs.col(j);
    const Eigen::VectorXd tvec = A.partialPivLu().solve(b);
    Eigen::MatrixXd T(rr, rc);
    for (int j = 0; j < rc; ++j) T.col(j) = tvec.segment(j * rr, rr);
    const double resid = (T * Phi - M * T - rhs).norm();
    if (!std::isfinite(resid) || resid > 1e-10) {
        std::ostringstream os;
        os << "solve_sylvester: residual " << resid
           << " exceeds 1e-10 (spectra of Phi and M likely intersect)";
        throw std::runtime_error(os.str());
    }
    return T;
}

Eigen::VectorXd OmegaBasis::eval(const Eigen::VectorXd& sigma) const {
    if (sigma.size() != n_sigma) {
        throw std::invalid_argument("OmegaBasis::eval: sigma size mismatch");
    }
    Eigen::VectorXd out(ell());
    for (int j = 0; j < ell(); ++j) {
        double val = 1.0;
        for (int k = 0; k < n_sigma; ++k) {
            val *= std::pow(sigma(k) * sigma(k), exponents[j][k]);
        }
        out(j) = val;
    }
    return out;
}

void OmegaBasis::validate() const {
    for (const auto& e : exponents) {
        if (static_cast<int>(e.size()) != n_sigma) {
            throw std::invalid_argument("OmegaBasis: exponent row size must equal n_sigma");
        }
        bool nonzero = false;
        for (int x : e) {
            if (x < 0) throw std::invalid_argument("OmegaBasis: exponents must be >= 0");
            nonzero = nonzero || x > 0;
        }
        if (!nonzero) {
            throw std::invalid_argument("OmegaBasis: constant basis function belongs to E0");
        }
    }
    for (size_t a = 0; a < exponents.size(); ++a) {
        for (size_t b = a + 1; b < exponents.size(); ++b) {
            if (exponents[a] == exponents[b]) {
                throw std::invalid_argument("OmegaBasis: duplicate basis function");
            }
        }
    }
}

namespace {

using AxisStructure = InternalModelDesign::AxisStructure;

Eigen::MatrixXd phi_axis_at(const AxisStructure& ax, const Eigen::VectorXd& sigma) {
    std::vector<double> freqs = ax.freqs;
    for (size_t k = 0; k < freqs.size(); ++k) {
        if (ax.sigma_slot[k] >= 0) freqs[k] = sigma(ax.sigma_slot[k]);
    }
    return companion_axis(freqs, ax.bias).Phi;
}

Eigen::RowVectorXd psi_row(int r) {
    Eigen::RowVectorXd psi = Eigen::RowVectorXd::Zero(r);
    psi(0) = 1.0;
    return psi;
}

// Psi_i T_i^{-1} with the conditioning gate from the module contract.
// Psi_i = e_1^T, so the result is row 1 of T^{-1}: the solution of T^T x = e_1.
Eigen::RowVectorXd psi_tinv(const Eigen::MatrixXd& T) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-9) {
        throw std::runtime_error("internal model: T(sigma) is numerically singular");
    }
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(T.rows());
    e1(0) = 1.0;
    const Eigen::VectorXd x = T.transpose().partialPivLu().solve(e1);
    return x.transpose();
}

bool axis_has_unknown(const AxisStructure& ax) {
    for (int s : ax.sigma_slot) {
        if (s >= 0) return true;
    }
    return false;
}

}  // namespace

ParamFit fit_parameterization(const std::array<AxisStructure, 3>& axes,
                              const std::array<MNPair, 3>& mn, const OmegaBasis& basis,
                              const Eigen::VectorXd& grid_min, const Eigen::VectorXd& grid_max,
                              int grid_points) {
    basis.validate();
    const int ns = basis.n_sigma;
    const int ell = basis.ell();
    if (grid_min.size() != ns || grid_max.size() != ns) {
        throw std::invalid_argument("fit_parameterization: grid bounds must have n_sigma entries");
    }
    if (ns > 0 && grid_points < 2 * (ell + 1)) {
        throw std::invalid_argument(
            "fit_parameterization: grid needs at least 2(ell+1) points per unknown frequency");
    }

    ParamFit fit;
    int r_total = 0;
    std::array<int, 3> r_axis{};
    for (int i = 0; i < 3; ++i) {
        r_axis[i] = static_cast<int>(mn[i].M.rows());
        r_total += r_axis[i];
    }
    fit.E0 = Eigen::MatrixXd::Zero(3, r_total);
    fit.blocks.assign(ell, Eigen::MatrixXd::Zero(3, r_total));
    fit.residual = 0.0;

    // Tensor grids: training at the nodes, validation at cell midpoints.
    auto make_grid = [&](bool midpoints) {
        std::vector<Eigen::VectorXd> pts;
        const int per_dim = midpoints ? grid_points - 1 : grid_points;
        if (ns == 0) {
            pts.emplace_back(Eigen::VectorXd(0));
            return pts;
        }
        std::vector<int> idx(ns, 0);
        while (true) {
            Eigen::VectorXd s(ns);
            for (int k = 0; k < ns; ++k) {
                const double step = (grid_max(k) - grid_min(k)) / (grid_points - 1);
                s(k) = grid_min(k) + step * (idx[k] + (midpoints ? 0.5 : 0.0));
            }
            pts.push_back(s);
            int k = 0;
            while (k < ns && ++idx[k] == per_dim) idx[k++] = 0;
            if (k == ns) break;
        }
        return pts;
    };
    const std::vector<Eigen::VectorXd> train = make_grid(false);
    const std::vector<Eigen::VectorXd> holdout = make_grid(true);

    int at = 0;
    for (int i = 0; i < 3; ++i) {
        const int r = r_axis[i];
        const Eigen::RowVectorXd psi = psi_row(r);
        auto row_at = [&](const Eigen::VectorXd& sigma) -> Eigen::RowVectorXd {
            const Eigen::MatrixXd T =
                solve_sylvester(phi_axis_at(axes[i], sigma), mn[i].M, mn[i].N, psi);
            return psi_tinv(T);
        };
        if (!axis_has_unknown(axes[i]) || ell == 0) {
            // Frequency-independent axis: constant row, folded into E0.
            fit.E0.block(i, at, 1, r) = row_at(Eigen::VectorXd::Zero(ns));
            at += r;
            continue;
        }
        const int nfeat = ell + 1;
        Eigen::MatrixXd G(train.size(), nfeat);
        Eigen::MatrixXd Y(train.size(), r);
        for (size_t g = 0; g < train.size(); ++g) {
            G(g, 0) = 1.0;
            G.row(g).tail(ell) = basis.eval(train[g]).transpose();
            Y.row(g) = row_at(train[g]);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
        if (qr.rank() < nfeat) {
            throw std::invalid_argument(
                "fit_parameterization: Omega basis is linearly dependent on the grid");
        }
        const Eigen::MatrixXd coef = qr.solve(Y);  // nfeat x r
        fit.E0.block(i, at, 1, r) = coef.row(0);
        for (int j = 0; j < ell; ++j) fit.blocks[j].block(i, at, 1, r) = coef.row(j + 1);

        double worst = 0.0;
        Eigen::VectorXd worst_pt;
        for (const auto& s : holdout) {
            Eigen::RowVectorXd pred = coef.row(0);
            const Eigen::VectorXd om = basis.eval(s);
            for (int j = 0; j < ell; ++j) pred += om(j) * coef.row(j + 1);
            const double err = (pred - row_at(s)).cwiseAbs().maxCoeff();
            if (err > worst) {
                worst = err;
                worst_pt = s;
            }
        }
        if (worst > 1e-8) {
            std::ostringstream os;
            os << "fit_parameterization: Omega basis cannot represent Psi T^{-1}(sigma) on axis "
               << (i + 1) << "; held-out error " << worst << " at sigma = [";
            for (int k = 0; k < worst_pt.size(); ++k) os << (k ? ", " : "") << worst_pt(k);
            os << "]";
            throw std::runtime_error(os.str());
        }
        fit.residual = std::max(fit.residual, worst);
        at += r;
    }
    return fit;
}

Eigen::MatrixXd InternalModelDesign::Phi_at(const Eigen::VectorXd& sigma) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
    int at = 0;
    for (int i = 0; i < 3; ++i) {
        out.block(at, at, r_axis[i], r_axis[i]) = phi_axis_at(axes[i], sigma);
        at += r_axis[i];
    }
    return out;
}

Eigen::MatrixXd InternalModelDesign::T_at(const Eigen::VectorXd& sigma) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, r);
    int at = 0;
    for (int i = 0; i < 3; ++i) {
        const int ri = r_axis[i];
        out.block(at, at, ri, ri) =
            solve_sylvester(phi_axis_at(axes[i], sigma), mn[i].M, mn[i].N, psi_row(ri));
        at += ri;
    }
    return out;
}

Eigen::MatrixXd InternalModelDesign::PsiTinv_at(const Eigen::VectorXd& sigma) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, r);
    int at = 0;
    for (int i = 0; i < 3; ++i) {
        const int ri = r_axis[i];
        const Eigen::MatrixXd T =
            solve_sylvester(phi_axis_at(axes[i], sigma), mn[i].M, mn[i].N, psi_row(ri));
        out.block(i, at, 1, ri) = psi_tinv(T);
        at += ri;
    }
    return out;
}

Eigen::MatrixXd InternalModelDesign::PsiTinv_fit(const Eigen::VectorXd& sigma) const {
    Eigen::MatrixXd out = E0;
    const Eigen::VectorXd om = basis.eval(sigma);
    for (int j = 0; j < ell(); ++j) out += om(j) * E_blocks[j];
    return out;
}

InternalModelDesign synthesize_design(const DisturbanceModel& model, const DesignConfig& cfg,
                                      int n_mu) {
    model.validate();
    const int ns = static_cast<int>(cfg.unknown.size());
    if (cfg.basis.n_sigma != ns) {
        throw std::invalid_argument("synthesize_design: basis n_sigma must match unknown count");
    }
    cfg.basis.validate();
    if (cfg.nominal_sigma.size() != ns) {
        throw std::invalid_argument("synthesize_design: nominal_sigma must have one entry per "
                                    "unknown frequency");
    }
    // The assumed vectors matter only for the estimate pin while adaptation
    // is off; empty is fine here and rejected downstream when actually used.
    if (cfg.assumed_sigma.size() != 0 && cfg.assumed_sigma.size() != ns) {
        throw std::invalid_argument("synthesize_design: assumed_sigma must be empty or have one "
                                    "entry per unknown frequency");
    }
    if (cfg.assumed_mu.size() != 0 && cfg.assumed_mu.size() != n_mu) {
        throw std::invalid_argument("synthesize_design: assumed_mu must be empty or have n_mu "
                                    "entries");
    }

    InternalModelDesign d;
    d.n_mu = n_mu;
    d.basis = cfg.basis;
    d.nominal_sigma = cfg.nominal_sigma;

    // Axis structures: tone frequencies with unknown slots marked.
    for (int i = 0; i < 3; ++i) {
        auto& ax = d.axes[i];
        ax.bias = model.axes[i].bias != 0.0;
        for (const Tone& t : model.axes[i].tones) {
            ax.freqs.push_back(t.frequency);
            ax.sigma_slot.push_back(-1);
        }
    }
    for (int k = 0; k < ns; ++k) {
        const UnknownFreq& u = cfg.unknown[k];
        if (u.axis < 0 || u.axis > 2 ||
            u.tone < 0 || u.tone >= static_cast<int>(d.axes[u.axis].freqs.size())) {
            throw std::invalid_argument("synthesize_design: unknown frequency reference out of range");
        }
        if (d.axes[u.axis].sigma_slot[u.tone] != -1) {
            throw std::invalid_argument("synthesize_design: tone marked unknown twice");
        }
        d.axes[u.axis].sigma_slot[u.tone] = k;
        d.axes[u.axis].freqs[u.tone] = cfg.nominal_sigma(k);
    }

    // Known tones must be valid on their own; unknown slots range over the grid.
    for (int i = 0; i < 3; ++i) {
        const auto& ax = d.axes[i];
        for (size_t a = 0; a < ax.freqs.size(); ++a) {
            if (ax.sigma_slot[a] == -1 && !(ax.freqs[a] > 0.0)) {
                throw std::invalid_argument("synthesize_design: known tone frequency must be positive on axis " +
                                            std::to_string(i + 1));
            }
        }
        if (ax.freqs.empty() && !ax.bias) {
            throw std::invalid_argument("synthesize_design: axis " + std::to_string(i + 1) +
                                        " has no disturbance generator");
        }
    }

    d.r = 0;
    for (int i = 0; i < 3; ++i) {
        d.r_axis[i] = 2 * static_cast<int>(d.axes[i].freqs.size()) + (d.axes[i].bias ? 1 : 0);
        d.r += d.r_axis[i];
        d.mn[i] = choose_MN(d.r_axis[i], cfg.m_poles[i]);

        // Controllability of (M, N): guaranteed by the companion structure,
        // verified anyway per the synthesis contract.
        const int ri = d.r_axis[i];
        Eigen::MatrixXd ctrb(ri, ri);
        Eigen::VectorXd col = d.mn[i].N;
        for (int k = 0; k < ri; ++k) {
            ctrb.col(k) = col;
            col = d.mn[i].M * col;
        }
        if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(ctrb).rank() < ri) {
            throw std::runtime_error("synthesize_design: (M, N) pair is not controllable");
        }
        // Observability of (Psi, Phi) at the nominal sigma.
        const Eigen::MatrixXd phi = phi_axis_at(d.axes[i], cfg.nominal_sigma);
        Eigen::MatrixXd obsv(ri, ri);
        Eigen::RowVectorXd row = psi_row(ri);
        for (int k = 0; k < ri; ++k) {
            obsv.row(k) = row;
            row = row * phi;
        }
        if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(obsv).rank() < ri) {
            throw std::runtime_error("synthesize_design: (Psi, Phi) pair is not observable");
        }
    }

    d.M = Eigen::MatrixXd::Zero(d.r, d.r);
    d.N = Eigen::MatrixXd::Zero(d.r, 3);
    d.Psi = Eigen::MatrixXd::Zero(3, d.r);
    int at = 0;
    for (int i = 0; i < 3; ++i) {
        d.M.block(at, at, d.r_axis[i], d.r_axis[i]) = d.mn[i].M;
        d.N.block(at, i, d.r_axis[i], 1) = d.mn[i].N;
        d.Psi.block(i, at, 1, d.r_axis[i]) = psi_row(d.r_axis[i]);
        at += d.r_axis[i];
    }

    d.T_nominal = d.T_at(cfg.nominal_sigma);
    d.sylvester_residual =
        (d.T_nominal * d.Phi_at(cfg.nominal_sigma) - d.M * d.T_nominal - d.N * d.Psi).norm();

    const ParamFit fit = fit_parameterization(d.axes, d.mn, d.basis, cfg.grid_min, cfg.grid_max,
                                              cfg.grid_points);
    d.E0 = fit.E0;
    d.E_blocks = fit.blocks;
    d.fit_residual = fit.residual;
    return d;
}

Eigen::MatrixXd block_row_product(const std::vector<Eigen::MatrixXd>& blocks,
                                  const Eigen::MatrixXd& B) {
    const int ell = static_cast<int>(blocks.size());
    if (ell == 0) return Eigen::MatrixXd(3, 0);
    const int m = static_cast<int>(B.cols());
    Eigen::MatrixXd out(blocks[0].rows(), ell * m);
    for (int j = 0; j < ell; ++j) {
        if (blocks[j].cols() != B.rows()) {
            throw std::invalid_argument("block_row_product: block and B dimensions mismatch");
        }
        out.middleCols(j * m, m) = blocks[j] * B;
    }
    return out;
}

Eigen::MatrixXd regressor_rho(const Eigen::Vector3d& omega_e, const Eigen::MatrixXd& zeta,
                              const Eigen::VectorXd& v, const InternalModelDesign& d,
                              const InertiaBasis& basis) {
    if (zeta.rows() != d.r || zeta.cols() != d.n_mu || v.size() != d.r) {
        throw std::invalid_argument("regressor_rho: state dimensions do not match design");
    }
    Eigen::MatrixXd F1, L1;
    Eigen::Vector3d F0, L0;
    F_terms(omega_e, basis, F1, F0);
    split_L(omega_e, basis, L1, L0);
    const Eigen::MatrixXd NL1 = d.N * L1;          // r x n_mu
    const Eigen::VectorXd NL0 = d.N * L0;          // r
    const int ell = d.ell();
    Eigen::MatrixXd rho(3, d.n_R());
    rho.leftCols(d.n_mu) = F1 + d.E0 * (NL1 + zeta);
    rho.middleCols(d.n_mu, ell * d.n_mu) = block_row_product(d.E_blocks, zeta + NL1);
    rho.rightCols(ell) = block_row_product(d.E_blocks, NL0 - v);
    return rho;
}

Eigen::VectorXd true_R(const Eigen::VectorXd& sigma, const Eigen::VectorXd& mu,
                       const InternalModelDesign& d) {
    if (mu.size() != d.n_mu) {
        throw std::invalid_argument("true_R: mu must have n_mu entries");
    }
    const Eigen::VectorXd om = d.basis.eval(sigma);
    const int ell = d.ell();
    Eigen::VectorXd R(d.n_R());
    R.head(d.n_mu) = mu;
    for (int j = 0; j < ell; ++j) R.segment(d.n_mu + j * d.n_mu, d.n_mu) = om(j) * mu;
    R.tail(ell) = om;
    return R;
}

Eigen::VectorXd internal_model_rhs(const Eigen::VectorXd& v, const Eigen::Vector3d& u,
                                   const Eigen::Vector3d& omega_e, const InternalModelDesign& d,
                                   const InertiaBasis& basis) {
    Eigen::MatrixXd L1;
    Eigen::Vector3d L0;
    split_L(omega_e, basis, L1, L0);
    Eigen::MatrixXd F1;
    Eigen::Vector3d F0;
    F_terms(omega_e, basis, F1, F0);
    return d.M * v + d.N * (u + F0) - d.M * (d.N * L0);
}

Eigen::MatrixXd compensator_rhs(const Eigen::MatrixXd& zeta, const Eigen::Vector3d& omega_e,
                                const InternalModelDesign& d, const InertiaBasis& basis) {
    Eigen::MatrixXd F1, L1;
    Eigen::Vector3d F0, L0;
    F_terms(omega_e, basis, F1, F0);
    split_L(omega_e, basis, L1, L0);
    return d.M * zeta + d.M * (d.N * L1) - d.N * F1;
}

}  // namespace flexsat
