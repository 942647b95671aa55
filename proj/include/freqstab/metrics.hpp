#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <vector>

#include "freqstab/simulator.hpp"

namespace freqstab {

class MetricsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct NadirResult {
    double nadir_hz = 0.0;
    double t_nadir = 0.0;
};

/// Sampled global minimum and the first time it is attained.
[[nodiscard]] NadirResult nadir(const FrequencyTrace& trace, AreaId area);

/// Largest |f(t_k + W) - f(t_k)| / W over every window inside the trace.
/// W must be a whole number of sampling intervals.
[[nodiscard]] double rocof_sliding(const FrequencyTrace& trace, AreaId area, std::chrono::milliseconds window);

/// Mean frequency over the final `tail` of the trace.
[[nodiscard]] double steady_state(const FrequencyTrace& trace, AreaId area, std::chrono::duration<double> tail);

struct MetricsReport {
    AreaId area = AreaId::IP;
    double nadir_hz = 0.0;
    double t_nadir = 0.0;
    std::map<int, double> rocof;  // window length in ms -> Hz/s
    double f_ss = 0.0;
};

struct MetricsOptions {
    std::vector<std::chrono::milliseconds> windows{std::chrono::milliseconds(100), std::chrono::milliseconds(500)};
    std::chrono::duration<double> tail{10.0};
};

[[nodiscard]] MetricsReport compute_metrics(const FrequencyTrace& trace, AreaId area,
                                            const MetricsOptions& options = {});

}  // namespace freqstab
