#include "fdrkit/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <vector>

#include "fdrkit/error.hpp"

namespace fdrkit {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    (void)ec;
    return std::string(buf, ptr);
}

struct Scale {
    double lo, hi, pix_lo, pix_hi;
    double operator()(double v) const {
        double t = hi == lo ? 0.5 : (v - lo) / (hi - lo);
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

std::string header(const std::string& title) {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
    return s;
}

std::string axes(const Scale& sx, const Scale& sy, const std::string& xlabel,
                 const std::string& ylabel) {
    std::string s;
    double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y0) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y1) +
         "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        double t = i / 4.0;
        double vx = sx.lo + t * (sx.hi - sx.lo);
        double vy = sy.lo + t * (sy.hi - sy.lo);
        double px = sx(vx), py = sy(vy);
        s += "<line x1=\"" + num(px) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(px) + "\" y2=\"" +
             num(y0 + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(px) + "\" y=\"" + num(y0 + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(vx) +
             "</text>\n";
        s += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(x0) + "\" y2=\"" +
             num(py) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(x0 - 8) + "\" y=\"" + num(py + 3) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(vy) +
             "</text>\n";
    }
    s += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xlabel +
         "</text>\n";
    s += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num((y0 + y1) / 2) + ")\">" + ylabel + "</text>\n";
    return s;
}

void check(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw Error(Errc::length_mismatch, "plot needs equal non-empty series");
}

} // namespace

std::string scatter_svg(std::span<const double> y_true, std::span<const double> y_pred,
                        const std::string& title) {
    check(y_true, y_pred);
    double lo = y_true[0], hi = y_true[0];
    for (double v : y_true) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : y_pred) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    Scale sx{lo, hi, kLeft, kWidth - kRight};
    Scale sy{lo, hi, kHeight - kBottom, kTop};

    std::string s = header(title);
    s += axes(sx, sy, "true value", "predicted value");
    s += "<line x1=\"" + num(sx(lo)) + "\" y1=\"" + num(sy(lo)) + "\" x2=\"" + num(sx(hi)) +
         "\" y2=\"" + num(sy(hi)) + "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    for (size_t i = 0; i < y_true.size(); ++i)
        s += "<circle cx=\"" + num(sx(y_true[i])) + "\" cy=\"" + num(sy(y_pred[i])) +
             "\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";
    s += "</svg>\n";
    return s;
}

std::string sorted_overlay_svg(std::span<const double> y_true, std::span<const double> y_pred,
                               const std::string& title) {
    check(y_true, y_pred);
    std::vector<size_t> order(y_true.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return y_true[a] < y_true[b]; });

    double lo = y_true[order.front()], hi = y_true[order.back()];
    for (double v : y_pred) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    Scale sx{0.0, static_cast<double>(y_true.size() - 1), kLeft, kWidth - kRight};
    Scale sy{lo, hi, kHeight - kBottom, kTop};

    std::string s = header(title);
    s += axes(sx, sy, "test sample (sorted by true value)", "value");

    std::string line = "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < order.size(); ++i)
        line += num(sx(static_cast<double>(i))) + "," + num(sy(y_true[order[i]])) + " ";
    line += "\"/>\n";
    s += line;
    for (size_t i = 0; i < order.size(); ++i)
        s += "<circle cx=\"" + num(sx(static_cast<double>(i))) + "\" cy=\"" +
             num(sy(y_pred[order[i]])) + "\" r=\"2.5\" fill=\"#1f77b4\" fill-opacity=\"0.7\"/>\n";
    s += "<text x=\"" + num(kWidth - kRight) + "\" y=\"" + num(kTop - 6) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">line: true, dots: "
         "predicted</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace fdrkit
