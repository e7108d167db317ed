#include "swarmnet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "swarmnet/errors.hpp"

namespace swarmnet {

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SummaryStats summarize(std::vector<double> values) {
    SummaryStats s;
    if (values.empty()) return s;
    s.median = median_of(values);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    s.stddev = std::sqrt(var);
    return s;
}

double step_flock_speed(std::span<const Vec2> velocities, Vec2 leader_direction) {
    if (velocities.empty()) return 0.0;
    double sum = 0.0;
    for (const Vec2& v : velocities) sum += dot(v, leader_direction);
    return sum / static_cast<double>(velocities.size());
}

double flock_speed(std::span<const StepMetrics> steps, std::int64_t after_asn) {
    double sum = 0.0;
    std::int64_t count = 0;
    for (const StepMetrics& s : steps) {
        if (s.asn <= after_asn) continue;
        sum += s.mean_velocity_along_leader;
        ++count;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

std::optional<std::int64_t> convergence_time(std::span<const double> max_speed_per_step,
                                             double epsilon, int hold_steps) {
    int run = 0;
    for (std::size_t t = 0; t < max_speed_per_step.size(); ++t) {
        if (max_speed_per_step[t] < epsilon) {
            ++run;
            if (run >= hold_steps) {
                return static_cast<std::int64_t>(t) - (hold_steps - 1);
            }
        } else {
            run = 0;
        }
    }
    return std::nullopt;
}

OlsFit ols_fit_y_on_x(std::span<const Vec2> points) {
    const auto n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0;
    for (const Vec2& p : points) {
        sx += p.x;
        sy += p.y;
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const Vec2& p : points) {
        sxx += (p.x - mx) * (p.x - mx);
        sxy += (p.x - mx) * (p.y - my);
    }
    OlsFit fit;
    fit.a1 = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.a0 = my - fit.a1 * mx;
    return fit;
}

ResidualError residual_error(std::span<const Vec2> points, double floor) {
    if (points.size() < 2)
        throw ConfigError("residual_error: needs at least two points");

    bool all_x_equal = true;
    for (const Vec2& p : points) {
        if (p.x != points[0].x) {
            all_x_equal = false;
            break;
        }
    }

    ResidualError out;
    std::vector<Vec2> working;
    std::span<const Vec2> pts = points;
    if (all_x_equal) {
        // Vertical line: y-on-x is degenerate; fit with axes swapped and flag.
        working.reserve(points.size());
        for (const Vec2& p : points) working.push_back({p.y, p.x});
        pts = working;
        out.swapped_axes = true;
    }

    const OlsFit fit = ols_fit_y_on_x(pts);
    double sse = 0.0;
    for (const Vec2& p : pts) {
        const double r = p.y - (fit.a0 + fit.a1 * p.x);
        sse += r * r;
    }
    out.log_sse = std::log(std::max(sse, floor));
    return out;
}

void DeliveryStats::record(const Delivery& d) {
    ++attempts_;
    if (d.success) ++successes_;
    if (d.collision) ++collisions_;
    if (keep_per_pair_) {
        PairStats& p = per_pair_[{d.src, d.dst}];
        ++p.attempts;
        if (d.success) ++p.successes;
    }
}

void DeliveryStats::record_after(const Delivery& d, std::int64_t min_asn_exclusive) {
    if (d.asn <= min_asn_exclusive) return;
    record(d);
}

NetworkStats network_stats(std::span<const Delivery> log, std::int64_t formation_asn) {
    NetworkStats out;
    out.formation_asn = formation_asn;
    for (const Delivery& d : log) {
        PairStats& p = out.per_pair[{d.src, d.dst}];
        ++p.attempts;
        if (d.success) ++p.successes;
        if (d.collision) ++out.collisions;
    }
    return out;
}

}  // namespace swarmnet
