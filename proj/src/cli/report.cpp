#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mafrg/cli.hpp"

namespace mafrg::cli {

namespace {

constexpr std::array<std::string_view, 5> kNaiveOrder{"GT", "B_Random", "B_Mime", "B_MeanSeq", "B_MeanFr"};

std::optional<double> value_of(const eval::LeaderboardRow& r, std::string_view metric) {
  if (metric == "FRCorr") return r.fr_corr;
  if (metric == "FRDist") return r.fr_dist;
  if (metric == "FRDiv") return r.fr_div;
  if (metric == "FRVar") return r.fr_var;
  if (metric == "FRDvs") return r.fr_dvs;
  if (metric == "FRRea") return r.fr_rea;
  if (metric == "FRSyn") return r.fr_syn;
  return std::nullopt;
}

std::string xml_escape(std::string_view s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::vector<eval::LeaderboardRow> order_rows(std::vector<eval::LeaderboardRow> rows) {
  auto rank = [](const std::string& m) {
    auto it = std::find(kNaiveOrder.begin(), kNaiveOrder.end(), m);
    return static_cast<std::size_t>(it - kNaiveOrder.begin());
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return rank(a.method) < rank(b.method); });
  return rows;
}

std::optional<std::string> bar_chart_svg(std::string_view metric, std::span<const eval::LeaderboardRow> rows) {
  std::vector<std::pair<std::string, double>> bars;
  for (const auto& r : rows)
    if (auto v = value_of(r, metric)) bars.emplace_back(r.method, *v);
  if (bars.empty()) return std::nullopt;

  const double width = 120.0 + 90.0 * static_cast<double>(bars.size());
  const double height = 360.0;
  const double left = 80.0, right = 20.0, top = 40.0, bottom = 70.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double lo = 0.0, hi = 0.0;
  for (const auto& [m, v] : bars) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(metric)
     << "</text>\n";
  // axes
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
     << num(top + plot_h) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(left) << "\" y1=\"" << num(y_of(0.0)) << "\" x2=\"" << num(left + plot_w) << "\" y2=\""
     << num(y_of(0.0)) << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const double y = y_of(v);
    os << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\"" << num(y)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(left - 7) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
       << eval::format_metric(metric, v) << "</text>\n";
  }
  os << "<text transform=\"translate(18 " << num(top + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << xml_escape(metric) << "</text>\n";
  os << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 12)
     << "\" text-anchor=\"middle\">Method</text>\n";

  const double slot = plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& [method, v] = bars[i];
    const double x = left + slot * static_cast<double>(i) + slot * 0.15;
    const double y0 = y_of(std::max(v, 0.0));
    const double y1 = y_of(std::min(v, 0.0));
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y0) << "\" width=\"" << num(slot * 0.7) << "\" height=\""
       << num(y1 - y0) << "\" fill=\"#4878a8\"><title>" << xml_escape(method) << ": "
       << eval::format_metric(metric, v) << "</title></rect>\n";
    os << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(y0 - 4) << "\" text-anchor=\"middle\">"
       << eval::format_metric(metric, v) << "</text>\n";
    os << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(top + plot_h + 18)
       << "\" text-anchor=\"middle\">" << xml_escape(method) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mafrg::cli
