#include "cqed/io.hpp"

#include "cqed/errors.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace cqed::io {

namespace {
constexpr const char* kModule = "cli";

[[noreturn]] void parse_fail(const char* op, std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::input, kModule, op, "line " + std::to_string(line) + ": " + msg);
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, const char* op, std::size_t line,
                    const std::string& column) {
    if (cell.empty()) parse_fail(op, line, "empty value in column '" + column + "'");
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) {
        parse_fail(op, line, "cannot parse '" + cell + "' in column '" + column + "'");
    }
    if (!std::isfinite(v)) parse_fail(op, line, "non-finite value in column '" + column + "'");
    return v;
}

struct Table {
    std::vector<double> first;
    std::vector<double> second;
    std::vector<std::size_t> lines;
    std::map<std::string, std::string> meta;
};

Table parse_table(std::istream& in, const std::string& col_a, const std::string& col_b,
                  const char* op, std::vector<std::string>* warnings) {
    Table t;
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t ia = 0;
    std::size_t ib = 0;
    std::size_t ncols = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string::npos) t.meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
            continue;
        }
        const auto cells = split(line);
        if (!have_header) {
            std::optional<std::size_t> fa;
            std::optional<std::size_t> fb;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == col_a) fa = i;
                else if (cells[i] == col_b) fb = i;
                else if (warnings) warnings->push_back("line " + std::to_string(line_no) +
                                                       ": ignoring unknown column '" + cells[i] + "'");
            }
            if (!fa) parse_fail(op, line_no, "missing column '" + col_a + "'");
            if (!fb) parse_fail(op, line_no, "missing column '" + col_b + "'");
            ia = *fa;
            ib = *fb;
            ncols = cells.size();
            have_header = true;
            continue;
        }
        if (cells.size() != ncols) {
            parse_fail(op, line_no, "expected " + std::to_string(ncols) + " columns, found " +
                                        std::to_string(cells.size()));
        }
        t.first.push_back(parse_number(cells[ia], op, line_no, col_a));
        t.second.push_back(parse_number(cells[ib], op, line_no, col_b));
        t.lines.push_back(line_no);
    }
    if (!have_header) parse_fail(op, line_no, "missing header '" + col_a + "," + col_b + "'");
    return t;
}

std::ifstream open_input(const std::filesystem::path& path, const char* op) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, kModule, op, "cannot open " + path.string());
    return in;
}
} // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_spectrum_csv(const Spectrum& spectrum) {
    spectrum.validate();
    std::string out;
    out += std::string("# frame=") + (spectrum.frame == Frame::absolute ? "absolute" : "detuning") + "\n";
    out += std::string("# provenance=") +
           (spectrum.provenance == Provenance::simulated ? "simulated" : "measured") + "\n";
    if (spectrum.seed) out += "# seed=" + std::to_string(*spectrum.seed) + "\n";
    out += spectrum_header;
    out += '\n';
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out += format_double(spectrum.frequencies[i]);
        out += ',';
        out += format_double(spectrum.values[i]);
        out += '\n';
    }
    return out;
}

Spectrum parse_spectrum_csv(std::istream& in, std::vector<std::string>* warnings) {
    const char* op = "read_spectrum_csv";
    Table t = parse_table(in, "frequency_ghz", "transmission", op, warnings);
    for (std::size_t i = 1; i < t.first.size(); ++i) {
        if (!(t.first[i] > t.first[i - 1])) {
            parse_fail(op, t.lines[i], "frequency not strictly increasing");
        }
    }
    Spectrum s;
    s.frequencies = std::move(t.first);
    s.values = std::move(t.second);
    s.provenance = Provenance::measured;
    if (auto it = t.meta.find("frame"); it != t.meta.end()) {
        if (it->second == "absolute") s.frame = Frame::absolute;
        else if (it->second == "detuning") s.frame = Frame::detuning;
        else parse_fail(op, 0, "unknown frame '" + it->second + "'");
    }
    if (auto it = t.meta.find("provenance"); it != t.meta.end()) {
        if (it->second == "simulated") s.provenance = Provenance::simulated;
        else if (it->second == "measured") s.provenance = Provenance::measured;
        else parse_fail(op, 0, "unknown provenance '" + it->second + "'");
    }
    if (auto it = t.meta.find("seed"); it != t.meta.end()) {
        std::uint64_t seed = 0;
        const auto& v = it->second;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
        if (ec != std::errc() || ptr != v.data() + v.size()) parse_fail(op, 0, "bad seed '" + v + "'");
        s.seed = seed;
    }
    return s;
}

Spectrum read_spectrum_csv(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    auto in = open_input(path, "read_spectrum_csv");
    return parse_spectrum_csv(in, warnings);
}

void write_spectrum_csv(const Spectrum& spectrum, const std::filesystem::path& path) {
    write_text_atomic(path, format_spectrum_csv(spectrum));
}

std::string format_histogram_csv(const DecayHistogram& hist) {
    hist.validate();
    std::string out = std::string(histogram_header) + "\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out += format_double(hist.bin_times[i]) + "," + format_double(hist.counts[i]) + "\n";
    }
    return out;
}

DecayHistogram parse_histogram_csv(std::istream& in, std::vector<std::string>* warnings) {
    const char* op = "read_histogram_csv";
    Table t = parse_table(in, "time_ns", "counts", op, warnings);
    if (t.first.size() < 2) parse_fail(op, t.lines.empty() ? 0 : t.lines.back(), "need at least two bins");
    DecayHistogram h;
    h.bin_width = t.first[1] - t.first[0];
    for (std::size_t i = 1; i < t.first.size(); ++i) {
        if (!(t.first[i] > t.first[i - 1])) parse_fail(op, t.lines[i], "time not strictly increasing");
    }
    for (std::size_t i = 0; i < t.second.size(); ++i) {
        if (t.second[i] < 0.0) parse_fail(op, t.lines[i], "negative count");
    }
    h.bin_times = std::move(t.first);
    h.counts = std::move(t.second);
    h.validate();
    return h;
}

DecayHistogram read_histogram_csv(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    auto in = open_input(path, "read_histogram_csv");
    return parse_histogram_csv(in, warnings);
}

json fit_result_json(const FitResult& result) {
    json params = json::object();
    json errs = json::object();
    for (std::size_t i = 0; i < result.names.size(); ++i) {
        params[result.names[i]] = result.values[static_cast<Eigen::Index>(i)];
        errs[result.names[i]] = result.stderr_of(result.names[i]);
    }
    json j;
    j["parameters"] = params;
    j["stderr"] = errs;
    j["residual_norm"] = result.residual_norm;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    return j;
}

json collective_json(const CollectiveRates& rates, const DressedModes* modes) {
    auto matrix = [](const Eigen::MatrixXd& m) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
            rows.push_back(row);
        }
        return rows;
    };
    json j;
    j["delta_mc"] = rates.delta_mc;
    j["j"] = matrix(rates.j);
    j["gamma"] = matrix(rates.gamma);
    if (modes) {
        json arr = json::array();
        for (std::size_t k = 0; k < modes->eigenvalues.size(); ++k) {
            json m;
            m["frequency"] = modes->eigenvalues[k].real();
            m["linewidth"] = modes->linewidth(k);
            json vec = json::array();
            for (Eigen::Index i = 0; i < modes->eigenvectors[k].size(); ++i) {
                const auto c = modes->eigenvectors[k][i];
                vec.push_back(json::array({c.real(), c.imag()}));
            }
            m["vector"] = vec;
            arr.push_back(m);
        }
        j["dressed_modes"] = arr;
    }
    return j;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const char* op = "write";
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, kModule, op, "cannot write " + tmp.string());
        out << content;
        if (!out) throw Error(ErrorKind::io, kModule, op, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::io, kModule, op, "cannot rename onto " + path.string());
    }
}

} // namespace cqed::io
