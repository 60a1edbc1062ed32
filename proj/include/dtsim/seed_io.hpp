#pragma once

#include <iosfwd>
#include <string>

#include "dtsim/core.hpp"

namespace dtsim {

/// Shortest form that round-trips: 17 significant digits.
std::string format_real(double x);

/// CSV with header `j,r0,r1` and one row per j = 0..T-1.
void write_seed_csv(std::ostream& out, const CovarianceSeed<double>& seed);
void write_seed_csv(const std::string& path, const CovarianceSeed<double>& seed);

/// Throws DomainError on malformed content, IoError if the file is unreadable.
CovarianceSeed<double> read_seed_csv(std::istream& in);
CovarianceSeed<double> read_seed_csv(const std::string& path);

} // namespace dtsim
