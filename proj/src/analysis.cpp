#include "flexsat/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexsat {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

double spectral_norm(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("expm: matrix must be square");
    const Eigen::Index n = A.rows();
    if (n == 0) return Eigen::MatrixXd(0, 0);

    // Degree-13 Pade coefficients; theta is the 1-norm bound below which the
    // approximant reaches double precision without scaling.
    static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    const double theta13 = 5.371920351148152;

    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    }
    const Eigen::MatrixXd As = A / std::pow(2.0, squarings);

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd A2 = As * As;
    const Eigen::MatrixXd A4 = A2 * A2;
    const Eigen::MatrixXd A6 = A2 * A4;
    const Eigen::MatrixXd U =
        As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
              b[1] * I);
    const Eigen::MatrixXd V =
        A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

    Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
    for (int i = 0; i < squarings; ++i) R = R * R;
    return R;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, double c) {
    if (A.rows() != A.cols()) throw std::invalid_argument("solve_lyapunov: matrix must be square");
    const Eigen::Index n = A.rows();
    if (n == 0) return Eigen::MatrixXd(0, 0);

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    // vec(A^T P) = (I kron A^T) vec(P), vec(P A) = (A^T kron I) vec(P).
    const Eigen::MatrixXd lhs = kron(I, A.transpose()) + kron(A.transpose(), I);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i * n + i) = -c;

    const Eigen::VectorXd vecP = lhs.partialPivLu().solve(rhs);
    Eigen::MatrixXd P(n, n);
    for (Eigen::Index j = 0; j < n; ++j) P.col(j) = vecP.segment(j * n, n);
    P = 0.5 * (P + P.transpose()).eval();

    const double resid = (A.transpose() * P + P * A + c * I).norm();
    if (!(resid <= 1e-8 * std::max(1.0, std::abs(c)))) {
        throw std::runtime_error("solve_lyapunov: residual too large, spectra not separated");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::runtime_error("solve_lyapunov: solution not positive definite (A not Hurwitz)");
    }
    return P;
}

Eigen::MatrixXd auxiliary_A(const SpacecraftParams& par) {
    const int n = par.n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    if (n == 0) return A;
    A.topRightCorner(n, n).setIdentity();
    A.bottomLeftCorner(n, n) = -par.K;
    A.bottomRightCorner(n, n) = -par.C;
    return A;
}

Eigen::VectorXd auxiliary_rhs(const Eigen::VectorXd& z, const Eigen::Vector3d& omega_e,
                              const SpacecraftParams& par) {
    const int n = par.n;
    if (z.size() != 2 * n) throw std::invalid_argument("auxiliary_rhs: bad state size");
    Eigen::VectorXd dz(2 * n);
    if (n == 0) return dz;
    dz.head(n) = z.tail(n);
    dz.tail(n) = -par.K * z.head(n) - par.C * z.tail(n) - par.delta.transpose() * omega_e;
    return dz;
}

Eigen::VectorXd auxiliary_initial_z(const Eigen::VectorXd& eta, const Eigen::VectorXd& eta_dot,
                                    const Eigen::Vector3d& omega_e, const SpacecraftParams& par) {
    const int n = par.n;
    if (eta.size() != n || eta_dot.size() != n) {
        throw std::invalid_argument("auxiliary_initial_z: bad modal state size");
    }
    Eigen::VectorXd z(2 * n);
    if (n == 0) return z;
    // With z2(0) = eta(0) and this z1(0), z2 tracks eta exactly (the
    // difference obeys the homogeneous, asymptotically stable modal system
    // from identically zero initial error).
    z.head(n) = -par.K.llt().solve(eta_dot + par.C * eta + par.delta.transpose() * omega_e);
    z.tail(n) = eta;
    return z;
}

LyapunovCertificate make_certificate(const SpacecraftParams& par, const InternalModelDesign& d,
                                     double p, double s, const std::array<double, 8>& eps) {
    if (!(p > 0.0) || !(s > 0.0)) {
        throw std::invalid_argument("make_certificate: p and s must be positive");
    }
    for (double e : eps) {
        if (!(e > 0.0)) throw std::invalid_argument("make_certificate: epsilons must be positive");
    }
    LyapunovCertificate cert;
    cert.p = p;
    cert.s = s;
    cert.P = solve_lyapunov(auxiliary_A(par), p);
    cert.S = solve_lyapunov(d.M, s);
    cert.eps = eps;
    return cert;
}

namespace {

struct AlphaTerms {
    double a = 0.0;   // |PsiTinv N delta delta^T|
    double a1 = 0.0;  // |delta (C^2 - K) + PsiTinv N delta C|
    double a2 = 0.0;  // |delta C K + PsiTinv N delta K|
    double a3 = 0.0;  // |PsiTinv|
    double a4 = 0.0;  // |S M N delta K|
    double a5 = 0.0;  // |S M N delta C|
    double a6 = 0.0;  // |S M N delta delta^T|
};

AlphaTerms alpha_terms(const Eigen::MatrixXd& S, const SpacecraftParams& par,
                       const InternalModelDesign& d, const Eigen::VectorXd& sigma_true) {
    const Eigen::MatrixXd PsiTinv = d.PsiTinv_at(sigma_true);
    const Eigen::MatrixXd& delta = par.delta;
    AlphaTerms t;
    t.a = spectral_norm(PsiTinv * d.N * delta * delta.transpose());
    t.a1 = spectral_norm(delta * (par.C * par.C - par.K) + PsiTinv * d.N * delta * par.C);
    t.a2 = spectral_norm(delta * par.C * par.K + PsiTinv * d.N * delta * par.K);
    t.a3 = spectral_norm(PsiTinv);
    t.a4 = spectral_norm(S * d.M * d.N * delta * par.K);
    t.a5 = spectral_norm(S * d.M * d.N * delta * par.C);
    t.a6 = spectral_norm(S * d.M * d.N * delta * delta.transpose());
    return t;
}

double p_required_of(const std::array<double, 8>& e) {
    return std::max(1.0 / e[0] + 1.0 / e[2] + 1.0 / e[5], 1.0 / e[0] + 1.0 / e[3] + 1.0 / e[6]) +
           1.0;
}

double k2_required_of(const AlphaTerms& t, const std::array<double, 8>& e, double beta2,
                      double delta_norm) {
    return 1.0 / e[1] + 0.25 * t.a * t.a * e[1] + 0.25 * t.a1 * t.a1 * e[2] +
           0.25 * t.a2 * t.a2 * e[3] + 0.25 * t.a3 * t.a3 * e[4] + 1.0 / e[7] +
           e[0] * beta2 * beta2 * delta_norm * delta_norm + 1.0;
}

// Quadratic coefficient of the s self-consistency bound, computed with the
// unit-scale solution S1 (S = s S1):  s >= a1q s^2 + (2/eps5 + 1).
double s_quad_coeff(const AlphaTerms& t1, const std::array<double, 8>& e) {
    return 0.5 * (t1.a4 * t1.a4 * e[6] + t1.a5 * t1.a5 * e[5] + t1.a6 * t1.a6 * e[7]);
}

}  // namespace

GainCheckReport check_gain_conditions(const LyapunovCertificate& cert, const Gains& g,
                                      const SpacecraftParams& par, const InternalModelDesign& d,
                                      const Eigen::VectorXd& sigma_true) {
    GainCheckReport rep;
    rep.eps = cert.eps;
    rep.p = cert.p;
    rep.s = cert.s;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.P);
    rep.beta1 = cert.P.size() == 0 ? 0.0 : es.eigenvalues().minCoeff();
    rep.beta2 = cert.P.size() == 0 ? 0.0 : es.eigenvalues().maxCoeff();

    const AlphaTerms t = alpha_terms(cert.S, par, d, sigma_true);
    const std::array<double, 8>& e = cert.eps;

    rep.p_required = p_required_of(e);
    rep.k2_required = k2_required_of(t, e, rep.beta2, spectral_norm(par.delta));

    const double s_rhs = 2.0 / e[4] + 0.5 * (t.a4 * t.a4 * e[6] + t.a5 * t.a5 * e[5] +
                                             t.a6 * t.a6 * e[7]) +
                         1.0;
    rep.margin_s = cert.s - s_rhs;

    // Smallest feasible s of the quadratic bound, for reporting.
    const AlphaTerms t1 = alpha_terms(cert.S / cert.s, par, d, sigma_true);
    const double aq = s_quad_coeff(t1, e);
    const double bq = 2.0 / e[4] + 1.0;
    if (aq <= 0.0) {
        rep.s_required = bq;
    } else {
        const double disc = 1.0 - 4.0 * aq * bq;
        rep.s_required = disc >= 0.0 ? (1.0 - std::sqrt(disc)) / (2.0 * aq)
                                     : std::numeric_limits<double>::infinity();
    }

    rep.margin_k1 = g.k1 - 1.0;
    rep.margin_k2 = g.k2 - rep.k2_required;
    rep.margin_p = cert.p - rep.p_required;
    rep.satisfied = rep.margin_k1 >= 0.0 && rep.margin_k2 >= 0.0 && rep.margin_p >= 0.0 &&
                    rep.margin_s >= 0.0;
    return rep;
}

LyapunovCertificate optimize_epsilons(const SpacecraftParams& par, const InternalModelDesign& d,
                                      const Gains& g, const Eigen::VectorXd& sigma_true) {
    (void)g;  // the search minimizes required k2; actual gains are judged later
    const Eigen::MatrixXd P1 = solve_lyapunov(auxiliary_A(par), 1.0);
    const Eigen::MatrixXd S1 = solve_lyapunov(d.M, 1.0);
    const double lamP1 =
        P1.size() == 0 ? 0.0
                       : Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(P1).eigenvalues().maxCoeff();
    const AlphaTerms t1 = alpha_terms(S1, par, d, sigma_true);
    const double dn = spectral_norm(par.delta);

    // Outside the region where the s bound admits a solution (4 aq bq > 1) the
    // objective becomes a penalty proportional to the violation, so descent is
    // steered toward feasibility instead of stalling on a flat infinity.
    auto objective = [&](const std::array<double, 8>& e) {
        const double aq = s_quad_coeff(t1, e);
        const double bq = 2.0 / e[4] + 1.0;
        if (aq > 0.0 && 4.0 * aq * bq > 1.0) {
            return 1e18 * (4.0 * aq * bq);
        }
        const double p = p_required_of(e);
        return k2_required_of(t1, e, p * lamP1, dn);
    };

    std::array<double, 8> eps{1, 1, 1, 1, 1, 1, 1, 1};
    double best = objective(eps);
    const double factors[] = {8.0, 4.0, 2.0, 1.4, 1.0 / 1.4, 0.5, 0.25, 0.125};
    for (int pass = 0; pass < 200; ++pass) {
        double before = best;
        for (int i = 0; i < 8; ++i) {
            for (double f : factors) {
                std::array<double, 8> trial = eps;
                trial[i] *= f;
                const double val = objective(trial);
                if (val < best) {
                    best = val;
                    eps = trial;
                }
            }
        }
        if (before - best < 1e-10 * std::max(1.0, best)) break;
    }
    // Even when no epsilon assignment makes the s bound solvable the best
    // candidate is returned; the shortfall surfaces as negative margins in
    // check_gain_conditions rather than as a hard failure here.

    const double p = p_required_of(eps);
    const double aq = s_quad_coeff(t1, eps);
    // Vertex of the feasibility parabola maximizes the s margin; fall back to
    // the plain bound when the quadratic term vanishes (delta = 0).
    const double s = aq > 0.0 ? 1.0 / (2.0 * aq) : (2.0 / eps[4] + 1.0) + 1.0;
    return make_certificate(par, d, p, s, eps);
}

Eigen::MatrixXd lyapunov_T_true(const InternalModelDesign& d, const TruthContext& truth) {
    return d.T_at(truth.sigma);
}

LyapunovValues lyapunov_eval(const ClosedLoopState& s, double t, const LyapunovCertificate& cert,
                             const TruthContext& truth, const Eigen::MatrixXd& T_true,
                             const SpacecraftParams& par, const InternalModelDesign& d,
                             const InertiaBasis& basis, const Gains& g) {
    LyapunovValues out;
    out.V1 = s.z.size() == 0 ? 0.0 : s.z.dot(cert.P * s.z);

    const Eigen::VectorXd R = true_R(truth.sigma, truth.mu, d);
    const Eigen::VectorXd R_tilde = s.R_hat - R;
    const double qe4m1 = s.q_e.w - 1.0;
    out.V2 = g.k1 * (qe4m1 * qe4m1 + s.q_e.v.squaredNorm()) +
             0.5 * s.omega_e.dot(par.Jmb * s.omega_e) + R_tilde.squaredNorm() / (2.0 * g.k);

    const Eigen::VectorXd rho_exo = exosystem_state(truth.model, t);
    const Eigen::Matrix3d J = basis.J_of(truth.mu);
    Eigen::VectorXd v_hat = s.v + T_true * rho_exo - d.N * (J * s.omega_e);
    if (par.n > 0) v_hat -= d.N * (par.delta * s.eta_dot);
    v_hat -= s.zeta * truth.mu;
    out.V3 = 0.5 * v_hat.dot(cert.S * v_hat);

    out.V = out.V1 + out.V2 + out.V3;
    return out;
}

PEReport pe_check(const std::vector<Eigen::MatrixXd>& samples, double sample_dt,
                  const PESignalConfig& cfg) {
    if (samples.size() < 2) throw std::invalid_argument("pe_check: need at least two samples");
    if (!(sample_dt > 0.0)) throw std::invalid_argument("pe_check: sample step must be positive");
    const Eigen::Index rows = samples[0].rows();
    const Eigen::Index cols = samples[0].cols();
    for (const auto& W : samples) {
        if (W.rows() != rows || W.cols() != cols) {
            throw std::invalid_argument("pe_check: inconsistent sample shapes");
        }
    }

    PEReport rep;
    // Direction of largest average excitation: dominant right-singular vector
    // of the stacked samples. For a vector signal this is +-1.
    Eigen::MatrixXd stacked(rows * static_cast<Eigen::Index>(samples.size()), cols);
    for (size_t k = 0; k < samples.size(); ++k) {
        stacked.middleRows(static_cast<Eigen::Index>(k) * rows, rows) = samples[k];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinV);
    rep.b = svd.matrixV().col(0);

    const int N = static_cast<int>(samples.size());
    const int L = std::max(1, static_cast<int>(std::lround(cfg.T0 / sample_dt)));
    if (L > N - 1) {
        throw std::invalid_argument("pe_check: window longer than the sampled signal");
    }

    // Prefix trapezoid sums of g g^T with g = W b.
    std::vector<Eigen::MatrixXd> G(static_cast<size_t>(N));
    for (int k = 0; k < N; ++k) {
        const Eigen::VectorXd gk = samples[static_cast<size_t>(k)] * rep.b;
        G[static_cast<size_t>(k)] = gk * gk.transpose();
    }
    std::vector<Eigen::MatrixXd> prefix(static_cast<size_t>(N));
    prefix[0] = Eigen::MatrixXd::Zero(rows, rows);
    for (int k = 1; k < N; ++k) {
        prefix[static_cast<size_t>(k)] =
            prefix[static_cast<size_t>(k - 1)] +
            0.5 * sample_dt * (G[static_cast<size_t>(k - 1)] + G[static_cast<size_t>(k)]);
    }

    double min_eig = std::numeric_limits<double>::infinity();
    const double span = L * sample_dt;
    for (int i = 0; i + L < N; ++i) {
        const Eigen::MatrixXd gram =
            (prefix[static_cast<size_t>(i + L)] - prefix[static_cast<size_t>(i)]) / span;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        ++rep.windows;
    }
    rep.min_gram_eig = min_eig;
    rep.is_pe = min_eig >= cfg.theta * cfg.theta;
    return rep;
}

Eigen::MatrixXd y_signal(double t, const Eigen::MatrixXd& A0, const InternalModelDesign& d,
                         const TruthContext& truth, const Eigen::MatrixXd& T_true) {
    if (A0.rows() != d.r || A0.cols() != d.n_mu) {
        throw std::invalid_argument("y_signal: filter initial condition has wrong shape");
    }
    const Eigen::MatrixXd At = expm(d.M * t) * A0;
    const Eigen::VectorXd rho_exo = exosystem_state(truth.model, t);
    Eigen::MatrixXd y(3, d.n_R());
    y.leftCols(d.n_mu) = d.E0 * At;
    y.middleCols(d.n_mu, d.ell() * d.n_mu) = block_row_product(d.E_blocks, At);
    y.rightCols(d.ell()) = block_row_product(d.E_blocks, T_true * rho_exo - At * truth.mu);
    return y;
}

ConvergenceReport estimate_convergence_report(const std::vector<TelemetryRecord>& traj,
                                              const InternalModelDesign& d,
                                              const InertiaBasis& basis,
                                              const TruthContext& truth, double window_start,
                                              double window_end, const PESignalConfig& pe_cfg) {
    std::vector<const TelemetryRecord*> win;
    for (const auto& rec : traj) {
        if (rec.t >= window_start - 1e-12 && rec.t <= window_end + 1e-12) win.push_back(&rec);
    }
    if (win.size() < 4) {
        throw std::invalid_argument("estimate_convergence_report: window holds too few samples");
    }

    ConvergenceReport rep;
    rep.window_start = window_start;
    rep.window_end = window_end;
    rep.tail_start = window_end - 0.1 * (window_end - window_start);
    rep.R_true = true_R(truth.sigma, truth.mu, d);

    const Eigen::MatrixXd T_true = lyapunov_T_true(d, truth);
    const int n_R = d.n_R();
    Eigen::VectorXd hat_sum = Eigen::VectorXd::Zero(n_R);
    Eigen::VectorXd tilde_max = Eigen::VectorXd::Zero(n_R);
    double resid_sum = 0.0, az_sum = 0.0, tr_sum = 0.0, yr_sum = 0.0;
    int tail_count = 0;

    std::vector<Eigen::MatrixXd> y_samples;
    double sample_dt = win[1]->t - win[0]->t;

    for (const auto* rec : win) {
        const Eigen::MatrixXd y = y_signal(rec->t, pe_cfg.A0, d, truth, T_true);
        y_samples.push_back(y);
        if (rec->t < rep.tail_start) continue;
        ++tail_count;
        hat_sum += rec->R_hat;
        tilde_max = tilde_max.cwiseMax((rec->R_hat - rep.R_true).cwiseAbs());

        const Eigen::MatrixXd rho = regressor_rho(rec->omega_e, rec->zeta, rec->v, d, basis);
        resid_sum += (rho * (rec->R_hat - rep.R_true)).norm();
        const Eigen::MatrixXd At = expm(d.M * rec->t) * pe_cfg.A0;
        az_sum += (At - rec->zeta).norm();
        const Eigen::VectorXd rho_exo = exosystem_state(truth.model, rec->t);
        tr_sum += (T_true * rho_exo - At * truth.mu + rec->v).norm();
        yr_sum += (y - rho).norm();
    }
    if (tail_count == 0) {
        throw std::invalid_argument("estimate_convergence_report: empty tail window");
    }

    rep.R_hat_tail_mean = hat_sum / tail_count;
    rep.R_tilde_tail_max = tilde_max;
    rep.converged.resize(static_cast<size_t>(n_R));
    for (int i = 0; i < n_R; ++i) {
        const double tol = std::max(0.05 * std::abs(rep.R_true(i)), 0.05);
        rep.converged[static_cast<size_t>(i)] = tilde_max(i) <= tol;
    }

    // sqrt of the tail-mean estimate for every basis entry that is a single
    // squared frequency; other sigma components stay NaN.
    rep.sigma_hat.assign(static_cast<size_t>(d.basis.n_sigma),
                         std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < d.ell(); ++j) {
        const auto& expo = d.basis.exponents[static_cast<size_t>(j)];
        int nonzero = -1;
        bool pure = true;
        for (size_t k = 0; k < expo.size(); ++k) {
            if (expo[k] == 0) continue;
            if (expo[k] != 1 || nonzero >= 0) {
                pure = false;
                break;
            }
            nonzero = static_cast<int>(k);
        }
        if (!pure || nonzero < 0) continue;
        const double est = rep.R_hat_tail_mean(d.n_mu + d.ell() * d.n_mu + j);
        rep.sigma_hat[static_cast<size_t>(nonzero)] = std::sqrt(std::max(0.0, est));
    }

    rep.residual_tail = resid_sum / tail_count;
    rep.lim_A_zeta = az_sum / tail_count;
    rep.lim_T_rho = tr_sum / tail_count;
    rep.lim_y_rho = yr_sum / tail_count;
    rep.pe = pe_check(y_samples, sample_dt, pe_cfg);
    return rep;
}

}  // namespace flexsat
