#pragma once

#include <string>
#include <vector>

namespace kgscat {

// Time series of a nonnegative integrand with its running integral against dt/t
// (trapezoid rule in ln t). dt_weight[i] is the quadrature weight of sample i in the
// full integral, so sum(dt_weight * integrand) equals the last running value.
struct DiagnosticSeries {
    std::string name;
    std::vector<double> t;
    std::vector<double> integrand;
    std::vector<double> running;
    std::vector<double> dt_weight;

    void push(double time, double value);
    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    double total() const { return running.empty() ? 0.0 : running.back(); }
    // Running integral at an arbitrary time, linear in ln t between samples.
    double running_at(double time) const;
    // Share of the total accumulated over [T / 10, T].
    double tail_fraction() const;
    // Least-squares slope of ln(integrand) against ln(t) over samples with t in [t_lo, t_hi]
    // and integrand above `floor`.
    double loglog_slope(double t_lo, double t_hi, double floor = 0.0) const;
    // Same fit over the final decade of the series.
    double last_decade_slope(double floor = 0.0) const;
};

DiagnosticSeries make_series(std::string name, const std::vector<double>& t, const std::vector<double>& values);

}  // namespace kgscat
