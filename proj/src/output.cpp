#include "paneitz/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace paneitz {

std::string csv_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path)
{
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
}

void CsvWriter::separator()
{
    if (!fresh_) out_ << ',';
    fresh_ = false;
}

CsvWriter& CsvWriter::operator<<(double x)
{
    separator();
    out_ << csv_number(x);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long x)
{
    separator();
    out_ << x;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s)
{
    separator();
    out_ << s;
    return *this;
}

void CsvWriter::end_row()
{
    out_ << '\n';
    fresh_ = true;
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

std::string bifurcation_svg(const std::vector<BifurcationPoint>& points,
                            const std::vector<Branch>& branches, double s_lo, double s_hi)
{
    const double W = 720, Hh = 480, left = 70, right = 20, top = 20, bottom = 50;
    double a_lo = 1.0, a_hi = 1.0;
    for (const auto& br : branches)
        for (const auto& pt : br.points) {
            a_lo = std::min(a_lo, pt.a);
            a_hi = std::max(a_hi, pt.a);
        }
    double pad = 0.05 * std::max(a_hi - a_lo, 0.1);
    a_lo -= pad;
    a_hi += pad;
    if (!(s_hi > s_lo)) s_hi = s_lo + 1.0;

    auto X = [&](double s) { return left + (s - s_lo) / (s_hi - s_lo) * (W - left - right); };
    auto Y = [&](double a) { return top + (a_hi - a) / (a_hi - a_lo) * (Hh - top - bottom); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh
      << "\" viewBox=\"0 0 " << W << ' ' << Hh << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << Hh << "\" fill=\"white\"/>\n";
    // axes
    o << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    o << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(W - left - right)
      << "\" height=\"" << fmt(Hh - top - bottom) << "\"/>\n";
    o << "</g>\n";
    o << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int k = 0; k <= 5; ++k) {
        double s = s_lo + k * (s_hi - s_lo) / 5, a = a_lo + k * (a_hi - a_lo) / 5;
        o << "<text x=\"" << fmt(X(s)) << "\" y=\"" << fmt(Hh - bottom + 16)
          << "\" text-anchor=\"middle\">" << fmt(s) << "</text>\n";
        o << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(Y(a) + 4)
          << "\" text-anchor=\"end\">" << fmt(a) << "</text>\n";
    }
    o << "<text x=\"" << fmt((left + W - right) / 2) << "\" y=\"" << fmt(Hh - 12)
      << "\" text-anchor=\"middle\">s</text>\n";
    o << "<text x=\"16\" y=\"" << fmt((top + Hh - bottom) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << fmt((top + Hh - bottom) / 2)
      << ")\">u(0)</text>\n";
    o << "</g>\n";

    o << "<line id=\"trivial\" x1=\"" << fmt(X(s_lo)) << "\" y1=\"" << fmt(Y(1.0)) << "\" x2=\""
      << fmt(X(s_hi)) << "\" y2=\"" << fmt(Y(1.0))
      << "\" stroke=\"gray\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";

    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& br = branches[k];
        o << "<polyline class=\"branch\" data-index=\"" << br.origin.index << "\" fill=\"none\" stroke=\""
          << kColors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& pt : br.points) {
            if (pt.s < s_lo || pt.s > s_hi) continue;
            o << (first ? "" : " ") << fmt(X(pt.s)) << ',' << fmt(Y(pt.a));
            first = false;
        }
        o << "\"/>\n";
    }

    for (const auto& bp : points) {
        if (bp.s < s_lo || bp.s > s_hi) continue;
        o << "<circle class=\"bifurcation\" cx=\"" << fmt(X(bp.s)) << "\" cy=\"" << fmt(Y(1.0))
          << "\" r=\"4\" fill=\"black\"/>\n";
        o << "<text x=\"" << fmt(X(bp.s)) << "\" y=\"" << fmt(Y(1.0) + 16)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">s" << bp.index
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace paneitz
