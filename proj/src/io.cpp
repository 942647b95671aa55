#include "freqstab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#ifndef FREQSTAB_VERSION
#define FREQSTAB_VERSION "0.0.0"
#endif

namespace freqstab {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("{}: cannot write file", path.string()));
    }
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    for (auto& s : cells) {
        const auto first = s.find_first_not_of(" \t");
        const auto last = s.find_last_not_of(" \t");
        s = first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
    }
    return cells;
}

std::string csv_safe(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

std::string optional_cell(const std::map<int, double>& m, int key) {
    auto it = m.find(key);
    return it == m.end() ? std::string{} : format_number(it->second);
}

}  // namespace

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";  // folds -0
    }
    return fmt::format("{:.9g}", value);
}

std::string format_exact(double value) {
    if (value == 0.0) {
        return "0";
    }
    return fmt::format("{}", value);
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw CsvError("header", fmt::format("missing column '{}'", name));
}

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line.front() == '#') {
            continue;
        }
        auto cells = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw CsvError(fmt::format("{}:{}", source, line_no),
                           fmt::format("expected {} columns, found {}", table.header.size(), cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) {
        throw CsvError(source, "empty file");
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw CsvError(path.string(), "cannot open file");
    }
    try {
        return read_csv(in, path.string());
    } catch (const CsvError& e) {
        if (e.where().starts_with(path.string())) {
            throw;
        }
        throw CsvError(path.string() + ":" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
    }
}

double parse_number(const std::string& cell, const std::string& where) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        throw CsvError(where, fmt::format("'{}' is not a number", cell));
    }
    return value;
}

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace) {
    const bool has_tie = trace.p_tie.size() == trace.size();
    out << "t,f_ip,f_ce,p_tie\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        out << format_number(trace.t[k]) << ',' << format_exact(trace.f_ip[k]) << ','
            << format_exact(trace.f_ce[k]) << ',' << (has_tie ? format_exact(trace.p_tie[k]) : std::string{})
            << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const FrequencyTrace& trace) {
    auto out = open_out(path);
    write_trace_csv(out, trace);
}

FrequencyTrace read_trace_csv(const std::filesystem::path& path, double f0) {
    const CsvTable table = read_csv(path);
    const std::size_t ct = table.column("t");
    const std::size_t cip = table.column("f_ip");
    const std::size_t cce = table.column("f_ce");
    std::optional<std::size_t> ctie;
    if (std::find(table.header.begin(), table.header.end(), "p_tie") != table.header.end()) {
        ctie = table.column("p_tie");
    }
    FrequencyTrace trace;
    trace.f0 = f0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = fmt::format("{}: row {}", path.string(), r + 1);
        trace.t.push_back(parse_number(row[ct], where));
        trace.f_ip.push_back(parse_number(row[cip], where));
        trace.f_ce.push_back(parse_number(row[cce], where));
        if (ctie && !row[*ctie].empty()) {
            trace.p_tie.push_back(parse_number(row[*ctie], where));
        }
    }
    if (trace.p_tie.size() != trace.size()) {
        trace.p_tie.clear();
    }
    if (trace.size() >= 2) {
        const double raw = (trace.t.back() - trace.t.front()) / static_cast<double>(trace.size() - 1);
        trace.sample_dt = std::stod(fmt::format("{:.9g}", raw));
    }
    return trace;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, bool with_status) {
    out << "scenario_id,area,nadir_hz,t_nadir,rocof100,rocof500,f_ss" << (with_status ? ",status" : "") << '\n';
    for (const auto& row : rows) {
        out << csv_safe(row.scenario_id) << ',' << to_string(row.area);
        if (row.report) {
            const MetricsReport& m = *row.report;
            out << ',' << format_number(m.nadir_hz) << ',' << format_number(m.t_nadir) << ','
                << optional_cell(m.rocof, 100) << ',' << optional_cell(m.rocof, 500) << ',' << format_number(m.f_ss);
        } else {
            out << ",,,,,";
        }
        if (with_status) {
            out << ',' << csv_safe(row.status);
        }
        out << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows, bool with_status) {
    auto out = open_out(path);
    write_metrics_csv(out, rows, with_status);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::size_t cid = table.column("scenario_id");
    const std::size_t carea = table.column("area");
    const std::size_t cn = table.column("nadir_hz");
    const std::size_t ctn = table.column("t_nadir");
    const std::size_t c100 = table.column("rocof100");
    const std::size_t c500 = table.column("rocof500");
    const std::size_t css = table.column("f_ss");
    const bool has_status = std::find(table.header.begin(), table.header.end(), "status") != table.header.end();

    std::vector<MetricsRow> rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const std::string where = fmt::format("{}: row {}", path.string(), r + 1);
        MetricsRow row;
        row.scenario_id = cells[cid];
        try {
            row.area = parse_area(cells[carea]);
        } catch (const std::invalid_argument& e) {
            throw CsvError(where, e.what());
        }
        if (has_status) {
            row.status = cells[table.column("status")];
        }
        if (!cells[cn].empty()) {
            MetricsReport m;
            m.area = row.area;
            m.nadir_hz = parse_number(cells[cn], where);
            m.t_nadir = parse_number(cells[ctn], where);
            if (!cells[c100].empty()) m.rocof[100] = parse_number(cells[c100], where);
            if (!cells[c500].empty()) m.rocof[500] = parse_number(cells[c500], where);
            m.f_ss = parse_number(cells[css], where);
            row.report = m;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<MetricsRow> metrics_rows(const std::vector<SweepRow>& sweep) {
    std::vector<MetricsRow> rows;
    rows.reserve(2 * sweep.size());
    for (const auto& s : sweep) {
        rows.push_back({s.scenario_id, AreaId::IP, s.ip, s.status});
        rows.push_back({s.scenario_id, AreaId::CE, s.ce, s.status});
    }
    return rows;
}

void write_sweep_plot_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "year,month,h_ip,nadir_hz,rocof100,rocof500\n";
    for (const auto& r : rows) {
        out << r.year << ',' << (r.month ? std::to_string(*r.month) : std::string{}) << ',' << format_number(r.h_ip);
        if (r.ip) {
            out << ',' << format_number(r.ip->nadir_hz) << ',' << optional_cell(r.ip->rocof, 100) << ','
                << optional_cell(r.ip->rocof, 500);
        } else {
            out << ",,,";
        }
        out << '\n';
    }
}

void write_cost_log(const std::filesystem::path& path, const std::vector<double>& history) {
    auto out = open_out(path);
    out << "iter,best_cost\n";
    for (std::size_t k = 0; k < history.size(); ++k) {
        out << k << ',' << format_number(history[k]) << '\n';
    }
}

std::vector<double> read_cost_log(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const std::size_t c = table.column("best_cost");
    std::vector<double> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out.push_back(parse_number(table.rows[r][c], fmt::format("{}: row {}", path.string(), r + 1)));
    }
    return out;
}

void write_estimate(const std::filesystem::path& path, const TwoAreaSystem& system, const EstimationResult& result) {
    nlohmann::json j = to_json(system);
    nlohmann::json params = nlohmann::json::object();
    for (std::size_t i = 0; i < result.best_params.size(); ++i) {
        params[result.best_params.names[i]] = result.best_params.values[i];
    }
    j["fit"] = {{"parameters", params},
                {"best_cost", result.best_cost},
                {"active_penalties", result.active_penalties},
                {"unidentifiable", result.unidentifiable},
                {"rng_seed", result.rng_seed},
                {"chaos_seed", result.chaos_seed},
                {"evaluations", result.evaluations}};
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

EventSidecar load_sidecar(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    const std::string prefix = path.string() + ":";
    if (!j.is_object()) {
        throw ConfigError(path.string(), "expected an object");
    }
    EventSidecar s;
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) {
            throw ConfigError(prefix + key, "missing required field");
        }
        return j.at(key).get<double>();
    };
    if (!j.contains("area") || !j.at("area").is_string()) {
        throw ConfigError(prefix + "area", "missing required field");
    }
    try {
        s.area = parse_area(j.at("area").get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(prefix + "area", e.what());
    }
    s.mw = number("mw");
    s.t_start = number("t_start");
    if (!j.contains("mix")) {
        throw ConfigError(prefix + "mix", "missing required field");
    }
    try {
        s.mix = parse_dispatch_pair(j.at("mix"), "event", "mix");
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.field(), e.message());
    }
    return s;
}

FrequencyTrace resample(const std::vector<double>& t, const std::vector<double>& f_ip, const std::vector<double>& f_ce,
                        double sample_dt, double f0) {
    if (t.size() < 2 || f_ip.size() != t.size() || f_ce.size() != t.size()) {
        throw std::invalid_argument("recording needs at least two samples in every column");
    }
    if (!(sample_dt > 0.0)) {
        throw std::invalid_argument("sampling interval must be positive");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k] > t[k - 1])) {
            throw std::invalid_argument(fmt::format("time must increase strictly (row {})", k + 1));
        }
    }
    FrequencyTrace out;
    out.f0 = f0;
    out.sample_dt = sample_dt;
    const auto first = static_cast<long long>(std::ceil(t.front() / sample_dt - 1e-9));
    const auto last = static_cast<long long>(std::floor(t.back() / sample_dt + 1e-9));
    std::size_t j = 0;
    for (long long k = first; k <= last; ++k) {
        const double tk = static_cast<double>(k) * sample_dt;
        while (j + 2 < t.size() && t[j + 1] < tk) {
            ++j;
        }
        const double w = std::clamp((tk - t[j]) / (t[j + 1] - t[j]), 0.0, 1.0);
        out.t.push_back(tk);
        out.f_ip.push_back(f_ip[j] + w * (f_ip[j + 1] - f_ip[j]));
        out.f_ce.push_back(f_ce[j] + w * (f_ce[j + 1] - f_ce[j]));
    }
    return out;
}

RecordedEvent load_event(const std::filesystem::path& csv, const std::optional<std::filesystem::path>& sidecar,
                         const SystemBase& base, double sample_dt) {
    std::filesystem::path side = sidecar ? *sidecar : std::filesystem::path(csv).replace_extension(".json");
    if (!std::filesystem::exists(side)) {
        throw ConfigError(side.string(), "event sidecar file not found");
    }
    const EventSidecar s = load_sidecar(side);

    const CsvTable table = read_csv(csv);
    const std::size_t ct = table.column("t");
    const std::size_t cip = table.column("f_ip");
    const std::size_t cce = table.column("f_ce");
    std::vector<double> t, f_ip, f_ce;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string where = fmt::format("{}: row {}", csv.string(), r + 1);
        t.push_back(parse_number(table.rows[r][ct], where));
        f_ip.push_back(parse_number(table.rows[r][cip], where));
        f_ce.push_back(parse_number(table.rows[r][cce], where));
    }
    RecordedEvent event;
    try {
        event.trace = resample(t, f_ip, f_ce, sample_dt, base.f0);
    } catch (const std::invalid_argument& e) {
        throw CsvError(csv.string(), e.what());
    }
    event.dist.area = s.area;
    event.dist.dp = s.mw / 1000.0 / base.s_base;
    event.dist.t_start = s.t_start;
    event.mix = s.mix;
    return event;
}

void write_event(const std::filesystem::path& csv, const FrequencyTrace& trace, const EventSidecar& sidecar) {
    {
        auto out = open_out(csv);
        out << "t,f_ip,f_ce\n";
        for (std::size_t k = 0; k < trace.size(); ++k) {
            out << format_number(trace.t[k]) << ',' << format_exact(trace.f_ip[k]) << ','
                << format_exact(trace.f_ce[k]) << '\n';
        }
    }
    nlohmann::json j = {{"area", to_string(sidecar.area)},
                        {"mw", sidecar.mw},
                        {"t_start", sidecar.t_start},
                        {"mix", {{"ip", to_json(sidecar.mix.ip)}, {"ce", to_json(sidecar.mix.ce)}}}};
    auto out = open_out(std::filesystem::path(csv).replace_extension(".json"));
    out << j.dump(2) << '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(fmt::format("{}: cannot open file", path.string()));
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 unavailable");
    }
    std::vector<char> buffer(1 << 16);
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        EVP_DigestUpdate(ctx, buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

std::string tool_version() { return FREQSTAB_VERSION; }

void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& p : manifest.inputs) {
        inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
    }
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& name : manifest.outputs) {
        const auto p = dir / name;
        outputs.push_back({{"path", name}, {"sha256", std::filesystem::exists(p) ? sha256_file(p) : std::string{}}});
    }
    const nlohmann::json j = {{"command", manifest.command},         {"version", tool_version()},
                              {"inputs", inputs},                   {"outputs", outputs},
                              {"seeds", manifest.seeds},            {"config", manifest.config},
                              {"wall_clock_s", manifest.wall_clock_s}};
    auto out = open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

std::string render_svg(const SvgChart& chart) {
    constexpr double width = 720.0;
    constexpr double height = 420.0;
    constexpr double left = 70.0;
    constexpr double right = 160.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;
    static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (chart.threshold) {
        y0 = std::min(y0, *chart.threshold);
        y1 = std::max(y1, *chart.threshold);
    }
    if (!std::isfinite(x0)) {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" font-size=\"15\">{3}</text>\n"
        "<rect x=\"{4}\" y=\"{5}\" width=\"{6}\" height=\"{7}\" fill=\"none\" stroke=\"#444\"/>\n",
        width, height, left, chart.title, left, top, pw, ph);
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double yv = y0 + (y1 - y0) * i / 4.0;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.6g}</text>\n", px(xv),
                           top + ph + 18, xv);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", left - 6,
                           py(yv) + 4, yv);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                       height - 10, chart.x_label);
    svg += fmt::format(
        "<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
        top + ph / 2, top + ph / 2, chart.y_label);
    if (chart.threshold) {
        svg += fmt::format(
            "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#888\" stroke-dasharray=\"6 4\"/>\n",
            left, py(*chart.threshold), left + pw, py(*chart.threshold));
    }
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& series = chart.series[s];
        const char* colour = palette[s % std::size(palette)];
        std::string points;
        for (std::size_t i = 0; i < std::min(series.x.size(), series.y.size()); ++i) {
            if (!std::isfinite(series.x[i]) || !std::isfinite(series.y[i])) continue;
            points += fmt::format("{:.1f},{:.1f} ", px(series.x[i]), py(series.y[i]));
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", colour,
                           points);
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                           "stroke-width=\"2\"/>\n<text x=\"{4:.1f}\" y=\"{5:.1f}\">{6}</text>\n",
                           left + pw + 12, ly, left + pw + 36, colour, left + pw + 42, ly + 4, series.label);
    }
    svg += "</svg>\n";
    return svg;
}

void write_svg(const std::filesystem::path& path, const SvgChart& chart) {
    auto out = open_out(path);
    out << render_svg(chart);
}

}  // namespace freqstab
