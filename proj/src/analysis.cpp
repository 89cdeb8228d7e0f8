#include "pxp/analysis.hpp"

#include <cmath>

namespace pxp {

double escape_time(double h_ks, double delta_theta0) {
    if (!(h_ks > 0)) throw DomainError("escape_time: h_ks must be positive");
    if (!(delta_theta0 > 0 && delta_theta0 < 1))
        throw DomainError("escape_time: delta_theta0 must be in (0, 1)");
    return std::log(1.0 / delta_theta0) / h_ks;
}

double escape_rate(double h_ks, double delta_theta0) {
    return 1.0 / escape_time(h_ks, delta_theta0);
}

EscapeReport build_report(double h_ks, double lambda_max, double delta_theta0,
                          const std::map<std::string, RateEntry>& quantum_rates) {
    for (const char* key : {"density", "entropy", "echo"})
        if (quantum_rates.find(key) == quantum_rates.end())
            throw MissingInput(std::string("build_report: missing rate '") + key + "'");

    EscapeReport r;
    r.h_ks = h_ks;
    r.delta_theta0 = delta_theta0;
    r.lambda = escape_rate(h_ks, delta_theta0);
    r.t_star = 1.0 / r.lambda;
    r.lambda_max_line = lambda_max / std::log(1.0 / delta_theta0);
    r.rates = quantum_rates;
    double mx = 0;
    for (const auto& [k, v] : quantum_rates) mx = std::max(mx, v.value);
    r.ratio = mx / r.lambda;
    r.pass = r.ratio >= 5.0;
    return r;
}

} // namespace pxp
