#include "evolvebm/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace evolvebm {

std::string format_double(double x) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

namespace {

double parse_double(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        std::ostringstream os;
        os << "CSV line " << line_no << ": cannot parse number '" << std::string(s) << "'";
        throw IoError(os.str());
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (!line.empty()) {
            const auto cells = split(line);
            if (table.header.empty()) {
                for (auto c : cells) table.header.emplace_back(c);
            } else {
                if (cells.size() != table.header.size()) {
                    std::ostringstream os;
                    os << "CSV line " << line_no << ": expected " << table.header.size()
                       << " fields, got " << cells.size();
                    throw IoError(os.str());
                }
                std::vector<double> row;
                row.reserve(cells.size());
                for (auto c : cells) row.push_back(parse_double(c, line_no));
                table.rows.push_back(std::move(row));
            }
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
    if (table.header.empty()) throw IoError("CSV is empty");
    if (table.rows.size() < 2) throw IoError("CSV needs at least two data rows");
    return table;
}

void check_header(const CsvTable& table, const std::string& prefix, std::size_t extra) {
    // expected: t, <prefix>1..<prefix>d [, E11..Edd]
    if (table.header.empty() || table.header[0] != "t") {
        throw IoError("CSV header must start with 't'");
    }
    const std::size_t cols = table.header.size();
    std::size_t d = 0;
    while (1 + d < cols) {
        const std::string want = prefix + std::to_string(d + 1);
        if (table.header[1 + d] == want) ++d;
        else break;
    }
    if (d == 0) throw IoError("CSV header missing coordinate columns '" + prefix + "1..'");
    const std::size_t expected = 1 + d + (extra ? d * d : 0);
    if (cols != expected) {
        std::ostringstream os;
        os << "CSV header has " << cols << " columns, expected " << expected;
        throw IoError(os.str());
    }
    if (extra) {
        std::size_t idx = 1 + d;
        for (std::size_t i = 1; i <= d; ++i) {
            for (std::size_t j = 1; j <= d; ++j) {
                const std::string want = "E" + std::to_string(i) + std::to_string(j);
                if (table.header[idx] != want) {
                    throw IoError("CSV header: expected column '" + want + "', got '" +
                                  table.header[idx] + "'");
                }
                ++idx;
            }
        }
    }
}

void check_grid(const CsvTable& table) {
    const std::size_t n = table.rows.size() - 1;
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const double expect = static_cast<double>(k) / static_cast<double>(n);
        if (std::abs(table.rows[k][0] - expect) > 1e-9) {
            std::ostringstream os;
            os << "CSV row " << k + 2 << ": time " << table.rows[k][0]
               << " is not on the uniform grid k/" << n;
            throw IoError(os.str());
        }
    }
}

}  // namespace

std::string path_to_csv(const Path& p) {
    const int d = p.dim();
    std::string out = "t";
    for (int i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
    out += "\n";
    for (std::size_t k = 0; k < p.points.size(); ++k) {
        out += format_double(p.time(k));
        for (int i = 0; i < d; ++i) out += "," + format_double(p.points[k][i]);
        out += "\n";
    }
    return out;
}

std::string control_to_csv(const ControlPath& w) {
    const int d = w.dim();
    std::string out = "t";
    for (int i = 1; i <= d; ++i) out += ",w" + std::to_string(i);
    out += "\n";
    for (std::size_t k = 0; k < w.values.size(); ++k) {
        out += format_double(w.time(k));
        for (int i = 0; i < d; ++i) out += "," + format_double(w.values[k][i]);
        out += "\n";
    }
    return out;
}

std::string frames_to_csv(const FramePath& fp) {
    const int d = fp.frames.empty() ? 0 : static_cast<int>(fp.frames.front().base.size());
    std::string out = "t";
    for (int i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
    for (int i = 1; i <= d; ++i) {
        for (int j = 1; j <= d; ++j) out += ",E" + std::to_string(i) + std::to_string(j);
    }
    out += "\n";
    for (std::size_t k = 0; k < fp.frames.size(); ++k) {
        const Frame& f = fp.frames[k];
        out += format_double(f.time);
        for (int i = 0; i < d; ++i) out += "," + format_double(f.base[i]);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) out += "," + format_double(f.basis(i, j));
        }
        out += "\n";
    }
    return out;
}

Path path_from_csv(const std::string& text) {
    const CsvTable table = parse_csv(text);
    check_header(table, "x", 0);
    check_grid(table);
    const std::size_t d = table.header.size() - 1;
    Path p;
    p.points.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Eigen::VectorXd v(d);
        for (std::size_t i = 0; i < d; ++i) v[static_cast<int>(i)] = row[1 + i];
        p.points.push_back(std::move(v));
    }
    return p;
}

ControlPath control_from_csv(const std::string& text) {
    const CsvTable table = parse_csv(text);
    check_header(table, "w", 0);
    check_grid(table);
    const std::size_t d = table.header.size() - 1;
    ControlPath w;
    w.values.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Eigen::VectorXd v(d);
        for (std::size_t i = 0; i < d; ++i) v[static_cast<int>(i)] = row[1 + i];
        w.values.push_back(std::move(v));
    }
    return w;
}

FramePath frames_from_csv(const std::string& text) {
    const CsvTable table = parse_csv(text);
    // infer d from column count: 1 + d + d^2
    std::size_t d = 0;
    while (1 + d + d * d < table.header.size()) ++d;
    if (1 + d + d * d != table.header.size()) {
        throw IoError("frame CSV column count is not 1 + d + d^2");
    }
    check_header(table, "x", d);
    check_grid(table);
    FramePath fp;
    fp.frames.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Frame f;
        f.time = row[0];
        f.base.resize(static_cast<int>(d));
        for (std::size_t i = 0; i < d; ++i) f.base[static_cast<int>(i)] = row[1 + i];
        f.basis.resize(static_cast<int>(d), static_cast<int>(d));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                f.basis(static_cast<int>(i), static_cast<int>(j)) = row[1 + d + i * d + j];
            }
        }
        fp.frames.push_back(std::move(f));
    }
    return fp;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return os.str();
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.parent_path().empty() ? fs::path(".") : target.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);  // best effort; the open below reports failures

    fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open temporary file '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("error while writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename temporary file onto '" + path + "'");
    }
}

}  // namespace evolvebm
