#include "latsteer/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "latsteer/error.hpp"

namespace latsteer {
namespace {

double evaluate(const ScalarFn& f, const Params& theta) {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& e : theta) leaves.push_back(g.constant(e.value));
    Var out = f(g, leaves);
    if (out.value().size() != 1) throw ValidationError("grad_check: function must return a scalar");
    return out.value()[0];
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, Params& theta, double h, double tol) {
    if (!(h > 0.0)) throw ValidationError("grad_check: step h must be > 0");

    std::vector<Tensor> analytic;
    {
        Graph g;
        std::vector<Var> leaves;
        for (const auto& e : theta) leaves.push_back(g.parameter(e.value));
        Var out = f(g, leaves);
        if (!std::isfinite(out.value()[0])) throw NumericalError("grad_check: f is non-finite at theta");
        g.backward(out);
        for (const Var& v : leaves) analytic.push_back(v.grad());
    }

    GradCheckReport report;
    for (std::size_t p = 0; p < theta.size(); ++p) {
        Tensor& t = theta[p].value;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double saved = t[i];
            double plus, minus;
            try {
                t[i] = saved + h;
                plus = evaluate(f, theta);
                t[i] = saved - h;
                minus = evaluate(f, theta);
            } catch (const NumericalError& e) {
                t[i] = saved;
                throw NumericalError("grad_check: non-finite f at " + theta[p].name + "[" + std::to_string(i) +
                                     "]: " + e.what());
            }
            t[i] = saved;
            if (!std::isfinite(plus) || !std::isfinite(minus)) {
                throw NumericalError("grad_check: non-finite f at " + theta[p].name + "[" + std::to_string(i) + "]");
            }
            const double numeric = (plus - minus) / (2.0 * h);
            const double a = analytic[p][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
            const double rel = std::abs(a - numeric) / denom;
            ++report.coordinates;
            if (rel > report.max_rel_err || report.coordinates == 1) {
                report.max_rel_err = rel;
                report.worst_param = theta[p].name;
                report.worst_index = i;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

}  // namespace latsteer
