#include "dtsim/seed_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace dtsim {

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_seed_csv(std::ostream& out, const CovarianceSeed<double>& seed) {
    out << "j,r0,r1\n";
    for (int j = 0; j < seed.size(); ++j)
        out << j << ',' << format_real(seed.r0[j]) << ','
            << format_real(seed.r1[j]) << '\n';
}

void write_seed_csv(const std::string& path, const CovarianceSeed<double>& seed) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_seed_csv(out, seed);
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return fields;
}

double parse_real(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DomainError("seed CSV line " + std::to_string(line_no) +
                          ": not a number: '" + s + "'");
    }
}

} // namespace

CovarianceSeed<double> read_seed_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    }
    if (split_fields(line) != std::vector<std::string>{"j", "r0", "r1"})
        throw DomainError("seed CSV must start with header j,r0,r1");

    std::map<long, std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_fields(line);
        if (f.size() != 3)
            throw DomainError("seed CSV line " + std::to_string(line_no) +
                              ": expected 3 fields");
        const double j = parse_real(f[0], line_no);
        if (j != static_cast<long>(j) || j < 0)
            throw DomainError("seed CSV line " + std::to_string(line_no) +
                              ": j must be a nonnegative integer");
        if (!rows.emplace(static_cast<long>(j),
                          std::pair{parse_real(f[1], line_no),
                                    parse_real(f[2], line_no)})
                 .second)
            throw DomainError("seed CSV: duplicate row j=" + f[0]);
    }
    const long T = static_cast<long>(rows.size());
    if (T == 0) throw DomainError("seed CSV has no data rows");
    CovarianceSeed<double> seed{Vec<double>(T), Vec<double>(T)};
    for (const auto& [j, v] : rows) {
        if (j >= T) throw DomainError("seed CSV rows must be j = 0..T-1");
        seed.r0[j] = v.first;
        seed.r1[j] = v.second;
    }
    return seed;
}

CovarianceSeed<double> read_seed_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_seed_csv(in);
}

} // namespace dtsim
