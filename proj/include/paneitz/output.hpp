#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "paneitz/bifurcation.hpp"

namespace paneitz {

/// Shortest form that round-trips: 17 significant digits, '.' decimal point.
std::string csv_number(double x);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(long x);
    CsvWriter& operator<<(int x) { return *this << long(x); }
    CsvWriter& operator<<(const std::string& s);
    void end_row();

private:
    void separator();
    std::ofstream out_;
    bool fresh_ = true;
};

/// Self-contained SVG: x = s, y = u(0); the trivial line, one polyline per
/// branch and a marker at every bifurcation point.
std::string bifurcation_svg(const std::vector<BifurcationPoint>& points,
                            const std::vector<Branch>& branches, double s_lo, double s_hi);

}  // namespace paneitz
