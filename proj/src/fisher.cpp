#include "qmetro/fisher.hpp"

#include <cmath>
#include <stdexcept>

namespace qmetro {

namespace {

Eigen::Matrix3d fisher_from_jacobian(const Eigen::VectorXd& p, const Eigen::MatrixXd& jac) {
    Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
    for (Eigen::Index x = 0; x < p.size(); ++x) {
        if (!(p(x) > kFisherProbabilityFloor)) continue;
        if (!std::isfinite(p(x))) throw std::domain_error("fi_matrix: non-finite probability");
        f += (jac.row(x).transpose() * jac.row(x)) / p(x);
    }
    return 0.5 * (f + f.transpose());
}

}  // namespace

Eigen::Matrix3d fi_matrix(const PhaseLikelihoodFn& likelihood, const Eigen::Vector3d& phases,
                          double step) {
    const Eigen::VectorXd p0 = likelihood(phases);
    Eigen::MatrixXd jac(p0.size(), 3);
    for (int j = 0; j < 3; ++j) {
        Eigen::Vector3d hi = phases, lo = phases;
        hi(j) += step;
        lo(j) -= step;
        jac.col(j) = (likelihood(hi) - likelihood(lo)) / (2.0 * step);
    }
    return fisher_from_jacobian(p0, jac);
}

Eigen::Matrix3d fi_matrix_analytic(const DeviceLikelihood& engine, const Eigen::Vector3d& phases) {
    Vector10 p;
    Matrix10x3 jac;
    engine.probabilities_and_jacobian(phases, p, jac);
    return fisher_from_jacobian(p, jac);
}

double fi_inv_trace(const Eigen::Matrix3d& fi) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(fi);
    double trace = 0.0;
    for (int i = 0; i < 3; ++i) trace += 1.0 / std::max(eig.eigenvalues()(i), 1e-12);
    return trace;
}

Eigen::MatrixXd qfi_pure_general(const PureState& probe, const std::vector<int>& generator_modes) {
    const int d = static_cast<int>(generator_modes.size());
    const Eigen::VectorXd p = probe.amplitudes.cwiseAbs2();

    Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t s = 0; s < probe.basis.size(); ++s) {
        const auto& occ = probe.basis.states[s].occ;
        for (int i = 0; i < d; ++i) {
            const double ni = occ[generator_modes[i]];
            first(i) += p(static_cast<Eigen::Index>(s)) * ni;
            for (int j = 0; j < d; ++j)
                second(i, j) += p(static_cast<Eigen::Index>(s)) * ni * occ[generator_modes[j]];
        }
    }
    return 4.0 * (second - first * first.transpose());
}

Eigen::Matrix3d qfi_pure(const PureState& probe) {
    if (probe.basis.modes != 4)
        throw std::invalid_argument("qfi_pure: probe must live on 4 modes");
    return qfi_pure_general(probe, {3, 2, 0});
}

FisherReport fisher_report(const DeviceLikelihood& engine, const Eigen::Vector3d& phases) {
    FisherReport report;
    report.phases = phases;
    report.fi = fi_matrix([&](const Eigen::Vector3d& t) { return engine.probabilities(t); }, phases);
    report.fi_inv_trace = fi_inv_trace(report.fi);
    report.qfi = qfi_pure(engine.probe());
    report.qcrb_trace = report.qfi->inverse().trace();
    return report;
}

}  // namespace qmetro
