#include "steerbandit/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "steerbandit/errors.hpp"

namespace steerbandit {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw IoError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::string format_integer(std::uint64_t value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

template <class Int>
Int parse_integer(std::string_view text) {
  Int value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw IoError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string header(std::size_t arm_count) {
  std::string h = "t,J";
  for (std::size_t i = 1; i <= arm_count; ++i) h += ",pi_" + std::to_string(i);
  return h + ",gamma_t,delta_t,cond2_ok";
}

void append_record(std::string& out, const TrajectoryRecord& r, std::size_t arm_count) {
  if (r.probs.size() != arm_count) throw DimensionMismatch("record has the wrong number of arms");
  out += std::to_string(r.t);
  out += ',';
  out += format_number(r.J);
  for (double p : r.probs) {
    out += ',';
    out += format_number(p);
  }
  out += ',';
  if (r.gamma_t) out += format_number(*r.gamma_t);
  out += ',';
  if (r.delta_t) out += format_number(*r.delta_t);
  out += ',';
  if (r.cond2_ok) out += *r.cond2_ok ? "1" : "0";
}

}  // namespace

std::string trajectory_csv(std::span<const TrajectoryRecord> records, std::size_t arm_count) {
  std::string out = header(arm_count) + '\n';
  for (const auto& r : records) {
    append_record(out, r, arm_count);
    out += '\n';
  }
  return out;
}

ParsedTrajectory parse_trajectory_csv(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  if (lines.empty()) throw IoError("empty trajectory CSV");

  const auto head = split(lines.front(), ',');
  if (head.size() < 5) throw IoError("trajectory CSV header is too short");
  ParsedTrajectory parsed;
  parsed.arm_count = head.size() - 5;
  if (std::string(lines.front()) != header(parsed.arm_count)) {
    throw IoError("unexpected trajectory CSV header: " + std::string(lines.front()));
  }
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = split(lines[n], ',');
    if (f.size() != head.size()) {
      throw IoError("line " + std::to_string(n + 1) + ": expected " + std::to_string(head.size()) +
                    " fields");
    }
    TrajectoryRecord r;
    r.t = parse_integer<int>(f[0]);
    r.J = parse_number(f[1]);
    for (std::size_t i = 0; i < parsed.arm_count; ++i) r.probs.push_back(parse_number(f[2 + i]));
    const std::size_t base = 2 + parsed.arm_count;
    if (!f[base].empty()) r.gamma_t = parse_number(f[base]);
    if (!f[base + 1].empty()) r.delta_t = parse_number(f[base + 1]);
    if (f[base + 2] == "1") {
      r.cond2_ok = true;
    } else if (f[base + 2] == "0") {
      r.cond2_ok = false;
    } else if (!f[base + 2].empty()) {
      throw IoError("line " + std::to_string(n + 1) + ": cond2_ok must be 0, 1 or empty");
    }
    parsed.records.push_back(std::move(r));
  }
  return parsed;
}

std::string replications_csv(const EmpiricalRun& run, std::size_t arm_count) {
  std::string out = "replication,seed," + header(arm_count) + ",group_seed\n";
  for (const auto& rep : run.replications) {
    for (const auto& r : rep.records) {
      out += std::to_string(rep.replication);
      out += ',';
      out += format_integer(rep.seed);
      out += ',';
      append_record(out, r, arm_count);
      out += ',';
      if (r.group_seed) out += format_integer(*r.group_seed);
      out += '\n';
    }
  }
  return out;
}

std::string summary_csv(std::span<const QuantileRow> rows) {
  std::string out = "t,q25,median,q75\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t) + ',' + format_number(r.q25) + ',' + format_number(r.median) + ',' +
           format_number(r.q75) + '\n';
  }
  return out;
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + '\n'; }

// --- SVG --------------------------------------------------------------------

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 260.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 30.0;
constexpr double kGapFloor = 1e-16;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

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

std::string fixed(double v, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

struct Panel {
  double top;
  double x0, x1, y0, y1;
  double plot_w() const { return kWidth - kLeft - kRight; }
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * plot_w(); }
  double py(double y) const { return top + kPanelHeight - (y - y0) / (y1 - y0) * kPanelHeight; }
};

void frame(std::ostringstream& svg, const Panel& p, const std::string& title, const std::string& ylabel,
           bool log_axis) {
  svg << "<g class=\"panel\">\n";
  svg << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(p.top) << "\" width=\"" << fixed(p.plot_w())
      << "\" height=\"" << fixed(kPanelHeight) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << fixed(kLeft) << "\" y=\"" << fixed(p.top - 8) << "\" font-size=\"13\">"
      << xml_escape(title) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << fixed(p.top + kPanelHeight / 2) << "\" font-size=\"11\" transform=\"rotate(-90 14 "
      << fixed(p.top + kPanelHeight / 2) << ")\">" << xml_escape(ylabel) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = p.y0 + (p.y1 - p.y0) * k / 4.0;
    const double y = p.py(v);
    svg << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(y + 4)
        << "\" font-size=\"10\" text-anchor=\"end\">" << (log_axis ? "1e" + tick_label(v) : tick_label(v))
        << "</text>\n";
    const double tx = p.x0 + (p.x1 - p.x0) * k / 4.0;
    svg << "<text x=\"" << fixed(p.px(tx)) << "\" y=\"" << fixed(p.top + kPanelHeight + 14)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << tick_label(tx) << "</text>\n";
  }
  svg << "</g>\n";
}

void polyline(std::ostringstream& svg, const Panel& p, const std::vector<std::pair<double, double>>& pts,
              const char* color, const std::string& label) {
  if (pts.empty()) return;
  svg << "<polyline class=\"series\" data-label=\"" << xml_escape(label) << "\" fill=\"none\" stroke=\""
      << color << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t n = 0; n < pts.size(); ++n) {
    if (n) svg << ' ';
    svg << fixed(p.px(pts[n].first)) << ',' << fixed(p.py(pts[n].second));
  }
  svg << "\"/>\n";
}

}  // namespace

PlotSeries series_from_records(std::string label, std::span<const TrajectoryRecord> records) {
  PlotSeries s;
  s.label = std::move(label);
  for (const auto& r : records) {
    s.t.push_back(r.t);
    s.J.push_back(r.J);
  }
  return s;
}

std::string convergence_svg(std::span<const PlotSeries> series, std::optional<double> optimum) {
  double tmin = 0.0, tmax = 1.0, jmin = 0.0, jmax = 1.0;
  bool any = false;
  for (const auto& s : series) {
    if (s.t.size() != s.J.size()) throw DimensionMismatch("series t and J lengths differ");
    for (std::size_t n = 0; n < s.t.size(); ++n) {
      if (!std::isfinite(s.J[n])) continue;
      if (!any) {
        tmin = tmax = s.t[n];
        jmin = jmax = s.J[n];
        any = true;
      }
      tmin = std::min(tmin, s.t[n]);
      tmax = std::max(tmax, s.t[n]);
      jmin = std::min(jmin, s.J[n]);
      jmax = std::max(jmax, s.J[n]);
    }
  }
  const double best = optimum.value_or(jmax);
  if (optimum) {
    jmin = std::min(jmin, best);
    jmax = std::max(jmax, best);
  }
  if (tmax <= tmin) tmax = tmin + 1.0;
  if (jmax <= jmin) {
    jmax += 0.5;
    jmin -= 0.5;
  }
  const double pad = 0.05 * (jmax - jmin);

  double gmin = 0.0, gmax = 0.0;
  bool any_gap = false;
  for (const auto& s : series) {
    for (double j : s.J) {
      if (!std::isfinite(j)) continue;
      const double g = std::log10(std::max(best - j, kGapFloor));
      if (!any_gap) gmin = gmax = g, any_gap = true;
      gmin = std::min(gmin, g);
      gmax = std::max(gmax, g);
    }
  }
  gmin = std::floor(gmin);
  gmax = std::ceil(gmax);
  if (gmax <= gmin) gmax = gmin + 1.0;

  const Panel top{kTop, tmin, tmax, jmin - pad, jmax + pad};
  const Panel bottom{kTop + kPanelHeight + 60.0, tmin, tmax, gmin, gmax};
  const double height = bottom.top + kPanelHeight + 40.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
      << fixed(height, 0) << "\" viewBox=\"0 0 " << fixed(kWidth, 0) << ' ' << fixed(height, 0) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  frame(svg, top, "Expected reward J(t)", "J", false);
  frame(svg, bottom, "Optimality gap (log scale)", "log10(r* - J)", true);
  if (optimum) {
    svg << "<line class=\"optimum\" x1=\"" << fixed(kLeft) << "\" x2=\"" << fixed(kLeft + top.plot_w())
        << "\" y1=\"" << fixed(top.py(best)) << "\" y2=\"" << fixed(top.py(best))
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::vector<std::pair<double, double>> jpts, gpts;
    for (std::size_t n = 0; n < s.t.size(); ++n) {
      if (!std::isfinite(s.J[n])) continue;
      jpts.emplace_back(s.t[n], s.J[n]);
      gpts.emplace_back(s.t[n], std::log10(std::max(best - s.J[n], kGapFloor)));
    }
    svg << "<g class=\"method\" id=\"series-" << k << "\">\n";
    polyline(svg, top, jpts, color, s.label);
    polyline(svg, bottom, gpts, color, s.label);
    const double ly = kTop + 16.0 * static_cast<double>(k) + 10.0;
    const double lx = kWidth - kRight + 12.0;
    svg << "<line x1=\"" << fixed(lx) << "\" x2=\"" << fixed(lx + 18) << "\" y1=\"" << fixed(ly - 4)
        << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << fixed(lx + 24) << "\" y=\"" << fixed(ly)
        << "\" font-size=\"11\">" << xml_escape(s.label) << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

// --- files ------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace steerbandit
