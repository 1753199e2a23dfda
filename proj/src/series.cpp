#include "kgscat/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kgscat {

void DiagnosticSeries::push(double time, double value)
{
    if (!(time > 0.0)) throw std::invalid_argument("series times must be positive");
    if (!t.empty() && !(time > t.back())) throw std::invalid_argument("series times must increase");
    if (t.empty()) {
        running.push_back(0.0);
        dt_weight.push_back(0.0);
    } else {
        const double h = std::log(time) - std::log(t.back());
        running.push_back(running.back() + 0.5 * h * (value + integrand.back()));
        dt_weight.back() += 0.5 * h;
        dt_weight.push_back(0.5 * h);
    }
    t.push_back(time);
    integrand.push_back(value);
}

double DiagnosticSeries::running_at(double time) const
{
    if (t.empty()) return 0.0;
    if (time <= t.front()) return running.front();
    if (time >= t.back()) return running.back();
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const auto i = static_cast<std::size_t>(it - t.begin());
    const double a = std::log(t[i - 1]), b = std::log(t[i]);
    const double w = (std::log(time) - a) / (b - a);
    return running[i - 1] + w * (running[i] - running[i - 1]);
}

double DiagnosticSeries::tail_fraction() const
{
    const double tot = total();
    if (!(tot > 0.0)) return 0.0;
    return std::clamp((tot - running_at(t.back() / 10.0)) / tot, 0.0, 1.0);
}

double DiagnosticSeries::loglog_slope(double t_lo, double t_hi, double floor) const
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || !(integrand[i] > floor)) continue;
        const double x = std::log(t[i]), y = std::log(integrand[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double den = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / den;
}

double DiagnosticSeries::last_decade_slope(double floor) const
{
    if (t.empty()) return std::numeric_limits<double>::quiet_NaN();
    return loglog_slope(t.back() / 10.0 * (1 - 1e-12), t.back(), floor);
}

DiagnosticSeries make_series(std::string name, const std::vector<double>& t, const std::vector<double>& values)
{
    if (t.size() != values.size()) throw std::invalid_argument("series length mismatch");
    DiagnosticSeries s;
    s.name = std::move(name);
    for (std::size_t i = 0; i < t.size(); ++i) s.push(t[i], values[i]);
    return s;
}

}  // namespace kgscat
