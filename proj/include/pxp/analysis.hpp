#pragma once
#include <map>
#include <string>
#include "pxp/errors.hpp"

// Escape-rate arithmetic and the headline comparison between the
// semiclassical prediction and the exact-quantum decay rates.

namespace pxp {

struct RateEntry {
    double value = 0;
    double stderr_ = 0;
};

struct EscapeReport {
    double h_ks = 0;
    double delta_theta0 = 0;
    double t_star = 0;       // 1/Lambda
    double lambda = 0;       // h_ks / ln(1/delta_theta0)
    double lambda_max_line = 0; // sensitivity: leading exponent / ln(1/delta_theta0)
    std::map<std::string, RateEntry> rates; // density, entropy, echo
    double ratio = 0;        // max quantum rate / lambda
    bool pass = false;       // ratio >= 5
};

double escape_time(double h_ks, double delta_theta0);
double escape_rate(double h_ks, double delta_theta0);

// Assembles the report; requires all three rate entries.
EscapeReport build_report(double h_ks, double lambda_max, double delta_theta0,
                          const std::map<std::string, RateEntry>& quantum_rates);

} // namespace pxp
