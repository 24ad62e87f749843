#ifndef PAIRSIM_DATA_IO_HPP
#define PAIRSIM_DATA_IO_HPP

// CSV and manifest serialization. Writers are byte-deterministic: doubles use
// 17 significant digits, '.' decimal separator, LF line endings, and
// manifests are compact JSON with sorted keys.

#include <pairsim/spectral_core.hpp>

#include <Eigen/Dense>
#include <json.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pairsim
{
inline constexpr const char* tool_version = "pairsim 1.0.0";

struct CsvParseError : std::runtime_error
{
    CsvParseError(std::size_t line_number, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what), line(line_number)
    {
    }
    std::size_t line;
};

inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

namespace detail
{
inline std::string csv_escape(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (s.empty())
        return std::nullopt;
    if (s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace detail

// ---------------------------------------------------------------------------
// Writers

using CsvCell = std::variant<std::string, double>;

// Header plus rows of text or numeric cells.
class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<CsvCell> row)
    {
        if (row.size() != header_.size())
            throw std::invalid_argument("CsvTable: row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::string str() const
    {
        std::string out;
        append_line(out, header_);
        for (const auto& row : rows_) {
            std::vector<std::string> cells;
            cells.reserve(row.size());
            for (const auto& c : row)
                cells.push_back(std::holds_alternative<double>(c) ? format_double(std::get<double>(c))
                                                                  : std::get<std::string>(c));
            append_line(out, cells);
        }
        return out;
    }

    void write(const std::filesystem::path& path) const { detail::write_text(path, str()); }

private:
    static void append_line(std::string& out, const std::vector<std::string>& cells)
    {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k)
                out += ',';
            out += detail::csv_escape(cells[k]);
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<CsvCell>> rows_;
};

inline std::string curve_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns)
{
    if (names.size() != columns.size() || columns.empty())
        throw std::invalid_argument("write_curve_csv: one name per column required");
    const std::size_t rows = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows)
            throw std::invalid_argument("write_curve_csv: columns must have equal length");
    CsvTable table(names);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<CsvCell> row;
        row.reserve(columns.size());
        for (const auto& c : columns)
            row.emplace_back(c[r]);
        table.add_row(std::move(row));
    }
    return table.str();
}

inline void write_curve_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns)
{
    detail::write_text(path, curve_csv(names, columns));
}

// No header; row index = signal index.
inline std::string matrix_csv(const Eigen::MatrixXd& m)
{
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c)
                out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

inline void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m)
{
    detail::write_text(path, matrix_csv(m));
}

// ---------------------------------------------------------------------------
// Readers

struct CsvColumns
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

// Numeric CSV with one header row.
inline CsvColumns read_curve_csv(const std::filesystem::path& path)
{
    const std::string text = detail::read_text(path);
    std::istringstream in(text);
    std::string line;
    CsvColumns out;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty())
            continue;
        const auto fields = detail::split_commas(line);
        if (out.header.empty()) {
            for (auto f : fields)
                out.header.emplace_back(detail::trim(f));
            out.columns.resize(out.header.size());
            continue;
        }
        if (fields.size() != out.header.size())
            throw CsvParseError(line_number, "expected " + std::to_string(out.header.size()) + " fields");
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const auto v = detail::parse_double(fields[k]);
            if (!v)
                throw CsvParseError(line_number, "non-numeric field '" + std::string(fields[k]) + "'");
            out.columns[k].push_back(*v);
        }
    }
    return out;
}

namespace detail
{
inline std::size_t next_pow2_plus1(std::size_t n)
{
    std::size_t m = 3;
    while (m < n)
        m = 2 * (m - 1) + 1;
    return m;
}
} // namespace detail

// Two-column (frequency, intensity) CSV, optional header row. Resampled by
// linear interpolation onto a uniform grid of 2^k + 1 points covering the
// input range.
inline IntensitySpectrum read_spectrum_csv(const std::filesystem::path& path)
{
    const std::string text = detail::read_text(path);
    std::istringstream in(text);
    std::string line;
    std::vector<double> freq, value;
    std::size_t line_number = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty())
            continue;
        const auto fields = detail::split_commas(line);
        const bool was_first = first;
        first = false;
        std::optional<double> f, v;
        if (fields.size() == 2) {
            f = detail::parse_double(fields[0]);
            v = detail::parse_double(fields[1]);
        }
        if (!f || !v) {
            if (was_first)
                continue; // header
            throw CsvParseError(line_number, "expected two numeric fields");
        }
        if (!std::isfinite(*f) || !std::isfinite(*v))
            throw CsvParseError(line_number, "non-finite value");
        if (*v < 0.0)
            throw CsvParseError(line_number, "negative intensity");
        if (!freq.empty() && !(*f > freq.back()))
            throw CsvParseError(line_number, "frequency column is not strictly increasing");
        freq.push_back(*f);
        value.push_back(*v);
    }
    if (freq.size() < 2)
        throw std::runtime_error(path.string() + ": need at least two data rows");

    const std::size_t count = detail::next_pow2_plus1(freq.size());
    const FrequencyGrid grid(0.5 * (freq.front() + freq.back()), freq.back() - freq.front(), count);
    std::vector<double> out(count);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double w = std::clamp(grid[k], freq.front(), freq.back());
        while (seg + 2 < freq.size() && w > freq[seg + 1])
            ++seg;
        const double width = freq[seg + 1] - freq[seg];
        double t = (w - freq[seg]) / width;
        if (std::abs(t) <= 1e-9)
            t = 0.0;
        else if (std::abs(t - 1.0) <= 1e-9)
            t = 1.0;
        out[k] = t == 0.0 ? value[seg] : t == 1.0 ? value[seg + 1] : value[seg] * (1.0 - t) + value[seg + 1] * t;
    }
    return {grid, std::move(out)};
}

// ---------------------------------------------------------------------------
// Hashing and manifests

inline std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xf];
    }
    return out;
}

inline std::string sha256_file(const std::filesystem::path& path)
{
    return sha256_hex(detail::read_text(path));
}

struct RunManifest
{
    std::string scenario;
    nlohmann::json parameters = nlohmann::json::object(); // flat key -> value
    std::string version = tool_version;
    std::map<std::string, std::string> outputs; // file name -> sha256
    bool complete = false;

    nlohmann::json to_json() const
    {
        return {{"scenario", scenario},
                {"parameters", parameters},
                {"tool_version", version},
                {"outputs", outputs},
                {"status", complete ? "complete" : "incomplete"}};
    }

    static RunManifest from_json(const nlohmann::json& j)
    {
        RunManifest m;
        m.scenario = j.value("scenario", "");
        m.parameters = j.value("parameters", nlohmann::json::object());
        m.version = j.value("tool_version", tool_version);
        m.outputs = j.value("outputs", std::map<std::string, std::string>{});
        m.complete = j.value("status", "") == "complete";
        return m;
    }
};

// Canonical form: sorted keys, no insignificant whitespace, trailing LF.
inline std::string canonical_json(const nlohmann::json& j)
{
    return j.dump() + "\n";
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m)
{
    detail::write_text(path, canonical_json(m.to_json()));
}

inline RunManifest read_manifest(const std::filesystem::path& path)
{
    return RunManifest::from_json(nlohmann::json::parse(detail::read_text(path)));
}

} // namespace pairsim

#endif // PAIRSIM_DATA_IO_HPP
