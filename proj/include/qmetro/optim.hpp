// Small derivative-free optimizers used by the bound searches and the
// calibration fit.
#pragma once

#include <Eigen/Dense>
#include <functional>

namespace qmetro {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
    int max_iterations = 2000;
    double x_tolerance = 1e-9;
    double f_tolerance = 1e-12;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const ObjectiveFn& objective, const Eigen::VectorXd& start,
                             const NelderMeadOptions& options = {});

/// Golden-section minimizer for a unimodal objective on [lo, hi]; returns
/// the argmin.
double golden_section_min(const std::function<double(double)>& objective, double lo, double hi,
                          double tolerance = 1e-10);

}  // namespace qmetro
