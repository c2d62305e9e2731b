#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "eiffel/bench/bench.hpp"
#include "eiffel/errors.hpp"

namespace eiffel::bench {
namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::ptrdiff_t col(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                        " fields, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ConfigError("'" + path + "' is empty");
  if (t.rows.empty()) throw ConfigError("'" + path + "' has no data rows");
  return t;
}

double number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("non-numeric " + what + " value '" + s + "'");
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(4) << v;
  return o.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void emit_plot(const std::string& csv_path, const std::string& svg_path, const PlotOptions& opts) {
  const Table t = read_csv(csv_path);
  PlotOptions o = opts;
  const bool bench_csv = t.col("mops") >= 0;
  if (o.x.empty()) o.x = bench_csv ? "fill_value" : "occupancy";
  if (o.y.empty()) o.y = bench_csv ? std::vector<std::string>{"mops"}
                                   : std::vector<std::string>{"mean_abs_err", "mean_search_len"};
  if (o.series.empty()) o.series = bench_csv ? "queue" : "pattern";
  const auto xc = t.col(o.x);
  if (xc < 0) throw ConfigError("CSV has no column '" + o.x + "'");
  const auto sc = t.col(o.series);
  std::vector<std::ptrdiff_t> ycs;
  for (const std::string& y : o.y) {
    const auto c = t.col(y);
    if (c < 0) throw ConfigError("CSV has no column '" + y + "'");
    ycs.push_back(c);
  }

  // series -> x -> (sum, n) per panel
  using Points = std::map<std::string, std::map<double, std::pair<double, unsigned>>>;
  std::vector<Points> panels(ycs.size());
  for (const auto& row : t.rows) {
    const double x = number(row[xc], o.x);
    const std::string s = sc >= 0 ? row[sc] : "all";
    for (std::size_t p = 0; p < ycs.size(); ++p) {
      auto& [sum, n] = panels[p][s][x];
      sum += number(row[ycs[p]], o.y[p]);
      ++n;
    }
  }

  const double W = 720, H = 300, ml = 70, mr = 170, mt = 36, mb = 48;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H * panels.size()
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double top = H * static_cast<double>(p);
    double x0 = 1e300, x1 = -1e300, y0 = 0.0, y1 = -1e300;
    for (const auto& [s, pts] : panels[p]) {
      for (const auto& [x, v] : pts) {
        const double y = v.first / v.second;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + mt + ph - (y - y0) / (y1 - y0) * ph; };

    std::string title = o.title.empty() ? o.y[p] + " vs " + o.x : o.title + ": " + o.y[p];
    svg << "<text x=\"" << ml << "\" y=\"" << top + 22 << "\" font-size=\"14\">" << escape(title) << "</text>\n";
    svg << "<rect x=\"" << ml << "\" y=\"" << top + mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = x0 + (x1 - x0) * k / 4.0;
      const double yv = y0 + (y1 - y0) * k / 4.0;
      svg << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + mt << "\" x2=\"" << sx(xv) << "\" y2=\"" << top + mt + ph
          << "\" stroke=\"#eee\"/>\n";
      svg << "<line x1=\"" << ml << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml + pw << "\" y2=\"" << sy(yv)
          << "\" stroke=\"#eee\"/>\n";
      svg << "<text x=\"" << sx(xv) << "\" y=\"" << top + mt + ph + 16 << "\" text-anchor=\"middle\">" << fmt(xv)
          << "</text>\n";
      svg << "<text x=\"" << ml - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
          << "</text>\n";
    }
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << top + H - 10 << "\" text-anchor=\"middle\">" << escape(o.x)
        << "</text>\n";

    std::size_t si = 0;
    for (const auto& [s, pts] : panels[p]) {
      const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, v] : pts) svg << sx(x) << ',' << sy(v.first / v.second) << ' ';
      svg << "\"/>\n";
      for (const auto& [x, v] : pts) {
        svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(v.first / v.second) << "\" r=\"3\" fill=\"" << color
            << "\"/>\n";
      }
      const double ly = top + mt + 14 + 18 * static_cast<double>(si);
      svg << "<rect x=\"" << ml + pw + 14 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\"" << color
          << "\"/>\n";
      svg << "<text x=\"" << ml + pw + 32 << "\" y=\"" << ly + 1 << "\">" << escape(s) << "</text>\n";
      ++si;
    }
  }
  svg << "</svg>\n";

  std::ofstream out(svg_path);
  if (!out) throw std::runtime_error("cannot write '" + svg_path + "'");
  out << svg.str();
  if (!out) throw std::runtime_error("write to '" + svg_path + "' failed");
}

}  // namespace eiffel::bench
