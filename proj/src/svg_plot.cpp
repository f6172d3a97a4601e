#include "flexsat/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace flexsat {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Round tick spacing to 1/2/5 times a power of ten.
double nice_step(double span, int target_ticks) {
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double nice = 10.0;
    if (frac <= 1.0) nice = 1.0;
    else if (frac <= 2.0) nice = 2.0;
    else if (frac <= 5.0) nice = 5.0;
    return nice * mag;
}

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series) {
    if (series.empty()) throw std::invalid_argument("write_svg_chart: no series");
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty()) {
            throw std::invalid_argument("write_svg_chart: series '" + s.label +
                                        "' has mismatched or empty data");
        }
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    // Pad the value range so curves do not sit on the frame.
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double W = 960, H = 540;
    const double ml = 80, mr = 30, mt = 50, mb = 60;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const size_t ncolors = sizeof(colors) / sizeof(colors[0]);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    // Grid and ticks.
    const double xstep = nice_step(xmax - xmin, 8);
    const double ystep = nice_step(ymax - ymin, 6);
    out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
        const double px = X(x);
        out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(mt + ph + 18)
            << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
    }
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep) {
        const double py = Y(y);
        out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(ml + pw)
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
    }
    out << "</g>\n";

    out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        out << "<polyline fill=\"none\" stroke=\"" << colors[i % ncolors]
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t k = 0; k < s.x.size(); ++k) {
            if (k) out << ' ';
            out << fmt(X(s.x[k])) << ',' << fmt(Y(s.y[k]));
        }
        out << "\"/>\n";
    }

    out << "<text x=\"" << fmt(W / 2) << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\" fill=\"#111\">" << escape_xml(title)
        << "</text>\n";
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(H - 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#111\">"
        << escape_xml(x_label) << "</text>\n";
    out << "<text x=\"20\" y=\"" << fmt(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#111\" "
        << "transform=\"rotate(-90 20 " << fmt(mt + ph / 2) << ")\">" << escape_xml(y_label)
        << "</text>\n";

    double ly = mt + 12;
    for (size_t i = 0; i < series.size(); ++i) {
        out << "<line x1=\"" << fmt(ml + pw - 150) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << fmt(ml + pw - 125) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\""
            << colors[i % ncolors] << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(ml + pw - 118) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#111\">"
            << escape_xml(series[i].label) << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace flexsat
