#include "freqstab/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace freqstab {

namespace {

std::span<const double> checked_frequency(const FrequencyTrace& trace, AreaId area) {
    if (trace.empty()) {
        throw MetricsError("empty trace");
    }
    auto f = trace.frequency(area);
    if (f.size() != trace.size()) {
        throw MetricsError("frequency channel length does not match the time axis");
    }
    return f;
}

}  // namespace

NadirResult nadir(const FrequencyTrace& trace, AreaId area) {
    auto f = checked_frequency(trace, area);
    std::size_t best = 0;
    for (std::size_t k = 1; k < f.size(); ++k) {
        if (f[k] < f[best]) {
            best = k;
        }
    }
    return {f[best], trace.t[best]};
}

double rocof_sliding(const FrequencyTrace& trace, AreaId area, std::chrono::milliseconds window) {
    auto f = checked_frequency(trace, area);
    const double w = std::chrono::duration<double>(window).count();
    if (!(trace.sample_dt > 0.0)) {
        throw MetricsError("trace sampling interval must be positive");
    }
    const double ratio = w / trace.sample_dt;
    const double lag_d = std::round(ratio);
    if (lag_d < 1.0 || std::abs(ratio - lag_d) > 1e-9 * std::max(1.0, ratio)) {
        throw MetricsError(fmt::format("window of {} ms is not a positive multiple of the {} s sampling interval",
                                       window.count(), trace.sample_dt));
    }
    const auto lag = static_cast<std::size_t>(lag_d);
    if (lag >= f.size()) {
        throw MetricsError(fmt::format("window of {} ms is longer than the trace", window.count()));
    }
    double worst = 0.0;
    for (std::size_t k = 0; k + lag < f.size(); ++k) {
        worst = std::max(worst, std::abs(f[k + lag] - f[k]));
    }
    return worst / w;
}

double steady_state(const FrequencyTrace& trace, AreaId area, std::chrono::duration<double> tail) {
    auto f = checked_frequency(trace, area);
    const double span = trace.t.back() - trace.t.front();
    const double len = tail.count();
    if (len < 0.0 || len > span + 1e-9) {
        throw MetricsError(fmt::format("tail of {} s exceeds the {} s trace", len, span));
    }
    const double from = trace.t.back() - len - 1e-9;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = f.size(); k-- > 0 && trace.t[k] >= from;) {
        sum += f[k];
        ++count;
    }
    return sum / static_cast<double>(count);
}

MetricsReport compute_metrics(const FrequencyTrace& trace, AreaId area, const MetricsOptions& options) {
    MetricsReport r;
    r.area = area;
    const NadirResult n = nadir(trace, area);
    r.nadir_hz = n.nadir_hz;
    r.t_nadir = n.t_nadir;
    for (auto w : options.windows) {
        r.rocof[static_cast<int>(w.count())] = rocof_sliding(trace, area, w);
    }
    const double span = trace.t.back() - trace.t.front();
    r.f_ss = steady_state(trace, area, std::chrono::duration<double>(std::min(options.tail.count(), span)));
    return r;
}

}  // namespace freqstab
