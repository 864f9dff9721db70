#include "qmetro/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qmetro {

NelderMeadResult nelder_mead(const ObjectiveFn& objective, const Eigen::VectorXd& start,
                             const NelderMeadOptions& options) {
    const int n = static_cast<int>(start.size());
    const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;

    std::vector<Eigen::VectorXd> simplex(n + 1, start);
    for (int i = 0; i < n; ++i) simplex[i + 1](i) += options.initial_step;
    std::vector<double> value(n + 1);
    for (int i = 0; i <= n; ++i) value[i] = objective(simplex[i]);

    std::vector<int> order(n + 1);
    NelderMeadResult result;
    for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return value[a] < value[b]; });
        const int best = order[0], worst = order[n], second_worst = order[n - 1];

        double spread = 0.0;
        for (int i = 1; i <= n; ++i)
            spread = std::max(spread, (simplex[order[i]] - simplex[best]).cwiseAbs().maxCoeff());
        if (spread < options.x_tolerance &&
            std::abs(value[worst] - value[best]) < options.f_tolerance) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += simplex[i];
        centroid /= n;

        const Eigen::VectorXd reflected = centroid + reflect * (centroid - simplex[worst]);
        const double f_reflected = objective(reflected);

        if (f_reflected < value[best]) {
            const Eigen::VectorXd expanded = centroid + expand * (reflected - centroid);
            const double f_expanded = objective(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                value[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                value[worst] = f_reflected;
            }
        } else if (f_reflected < value[second_worst]) {
            simplex[worst] = reflected;
            value[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < value[worst];
            const Eigen::VectorXd contracted =
                outside ? (centroid + contract * (reflected - centroid)).eval()
                        : (centroid + contract * (simplex[worst] - centroid)).eval();
            const double f_contracted = objective(contracted);
            if (f_contracted < std::min(f_reflected, value[worst])) {
                simplex[worst] = contracted;
                value[worst] = f_contracted;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
                    value[i] = objective(simplex[i]);
                }
            }
        }
    }

    const int best = static_cast<int>(
        std::min_element(value.begin(), value.end()) - value.begin());
    result.x = simplex[best];
    result.value = value[best];
    return result;
}

double golden_section_min(const std::function<double(double)>& objective, double lo, double hi,
                          double tolerance) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c), fd = objective(d);
    while (b - a > tolerance) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace qmetro
