#pragma once

// CSV, event ingestion, run manifests and SVG charts.

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "freqstab/estimation.hpp"
#include "freqstab/metrics.hpp"
#include "freqstab/scenarios.hpp"
#include "freqstab/simulator.hpp"

namespace freqstab {

/// Nine significant digits.
[[nodiscard]] std::string format_number(double value);
/// Shortest text that parses back to the same double.
[[nodiscard]] std::string format_exact(double value);

class CsvError : public std::runtime_error {
public:
    CsvError(std::string where, const std::string& message)
        : std::runtime_error(where + ": " + message), where_(std::move(where)) {}
    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const;
};

[[nodiscard]] CsvTable read_csv(std::istream& in, const std::string& source);
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);
[[nodiscard]] double parse_number(const std::string& cell, const std::string& where);

// Traces: t,f_ip,f_ce,p_tie
void write_trace_csv(std::ostream& out, const FrequencyTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const FrequencyTrace& trace);
[[nodiscard]] FrequencyTrace read_trace_csv(const std::filesystem::path& path, double f0 = 50.0);

// Metrics: scenario_id,area,nadir_hz,t_nadir,rocof100,rocof500,f_ss[,status]
struct MetricsRow {
    std::string scenario_id;
    AreaId area = AreaId::IP;
    std::optional<MetricsReport> report;  // empty on failure
    std::string status = "ok";
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, bool with_status);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows, bool with_status);
[[nodiscard]] std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Two rows (IP, CE) per sweep point.
[[nodiscard]] std::vector<MetricsRow> metrics_rows(const std::vector<SweepRow>& sweep);

/// year,month,h_ip,nadir_hz,rocof100,rocof500 for the IP area.
void write_sweep_plot_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

// Cost history: iter,best_cost
void write_cost_log(const std::filesystem::path& path, const std::vector<double>& history);
[[nodiscard]] std::vector<double> read_cost_log(const std::filesystem::path& path);

/// Named parameters in the same layout as a model file, plus a `fit` section.
void write_estimate(const std::filesystem::path& path, const TwoAreaSystem& system, const EstimationResult& result);

// Recorded events

/// Sidecar: {"area": "IP", "mw": 1000, "t_start": 1.0, "mix": {"ip": ..., "ce": ...}}
struct EventSidecar {
    AreaId area = AreaId::IP;
    double mw = 0.0;
    double t_start = 0.0;
    DispatchPair mix;
};

[[nodiscard]] EventSidecar load_sidecar(const std::filesystem::path& path);

/// Linear interpolation of an arbitrary uniform recording onto multiples of
/// `sample_dt` inside the recorded span.
[[nodiscard]] FrequencyTrace resample(const std::vector<double>& t, const std::vector<double>& f_ip,
                                      const std::vector<double>& f_ce, double sample_dt, double f0 = 50.0);

/// CSV `t,f_ip,f_ce` plus sidecar. The sidecar defaults to the CSV path with a
/// `.json` extension.
[[nodiscard]] RecordedEvent load_event(const std::filesystem::path& csv, const std::optional<std::filesystem::path>& sidecar,
                                       const SystemBase& base, double sample_dt = 0.01);

void write_event(const std::filesystem::path& csv, const FrequencyTrace& trace, const EventSidecar& sidecar);

// Run manifests

[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    std::vector<std::filesystem::path> inputs;
    nlohmann::json seeds = nlohmann::json::object();
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> outputs;
    double wall_clock_s = 0.0;
};

[[nodiscard]] std::string tool_version();
/// Writes `manifest.json` into `dir`, replacing any previous one.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

// SVG

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<SvgSeries> series;
    std::optional<double> threshold;  // horizontal reference line
};

[[nodiscard]] std::string render_svg(const SvgChart& chart);
void write_svg(const std::filesystem::path& path, const SvgChart& chart);

}  // namespace freqstab
