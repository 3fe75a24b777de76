#include "dimest/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace dimest {

void save_csv(const std::string& path, const Matrix& X) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_csv: cannot open " + path);
    for (Eigen::Index c = 0; c < X.cols(); ++c) f << (c ? ",x" : "x") << c;
    f << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, X(i, c));
            if (c) f << ',';
            f.write(buf, p - buf);
        }
        f << '\n';
    }
    if (!f) throw std::runtime_error("save_csv: write failed for " + path);
}

Matrix load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_csv: cannot open " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            // header row: skip if the first field does not parse as a number
            double v;
            auto r = std::from_chars(line.data(), line.data() + line.size(), v);
            if (r.ec != std::errc{}) continue;
        }
        std::vector<double> row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            double v;
            auto r = std::from_chars(p, end, v);
            if (r.ec != std::errc{})
                throw std::runtime_error("load_csv: bad number in " + path + ": " + line);
            row.push_back(v);
            p = r.ptr;
            if (p < end && *p == ',') ++p;
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::runtime_error("load_csv: ragged row in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: no data in " + path);
    Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < width; ++c) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    return X;
}

} // namespace dimest
