#include "trajpred/eval/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "trajpred/core/error.hpp"

namespace trajpred::eval {

double metric_value(const MetricReport& r, std::string_view name) {
  if (name == "ADE") return r.ade;
  if (name == "FDE") return r.fde;
  if (name == "MR") return r.mr;
  if (name == "APDE") return r.apde;
  if (name == "CR") return r.cr;
  throw InvalidInput("unknown metric '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw SchemaError(where + ": not a number: '" + s + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  auto out = open_out(path);
  out << "method,dataset,ADE,FDE,MR,APDE,CR\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.method, r.dataset, r.metrics.ade, r.metrics.fde, r.metrics.mr,
                       r.metrics.apde, r.metrics.cr);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ReportRow> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty report");
  const auto header = split_csv(line);
  const std::vector<std::string> expected = {"method", "dataset", "ADE", "FDE", "MR", "APDE", "CR"};
  if (header != expected) throw SchemaError(path.string() + ": unexpected report header");
  std::vector<ReportRow> rows;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    const std::string where = fmt::format("{}: row {}", path.string(), n);
    if (f.size() != expected.size()) throw SchemaError(where + ": expected 7 fields");
    ReportRow r;
    r.method = f[0];
    r.dataset = f[1];
    r.metrics.ade = parse_double(f[2], where);
    r.metrics.fde = parse_double(f[3], where);
    r.metrics.mr = parse_double(f[4], where);
    r.metrics.apde = parse_double(f[5], where);
    r.metrics.cr = parse_double(f[6], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

CsaInput csa_input(const std::vector<ReportRow>& known, const std::vector<ReportRow>& unknown,
                   std::vector<std::string> metrics, double alpha, double beta) {
  CsaInput in;
  in.metrics = std::move(metrics);
  in.alpha = alpha;
  in.beta = beta;
  std::map<std::string, const ReportRow*> unk;
  for (const auto& r : unknown) unk[r.method] = &r;
  if (unk.size() != unknown.size() || known.size() != unknown.size()) {
    throw InvalidInput("known and unknown reports must list the same methods once each");
  }
  for (const auto& r : known) {
    auto it = unk.find(r.method);
    if (it == unk.end()) throw InvalidInput("method '" + r.method + "' missing from the unknown-scenario report");
    in.methods.push_back(r.method);
    std::vector<double> k, u;
    for (const auto& m : in.metrics) {
      k.push_back(metric_value(r.metrics, m));
      u.push_back(metric_value(it->second->metrics, m));
    }
    in.known.push_back(std::move(k));
    in.unknown.push_back(std::move(u));
  }
  return in;
}

CsaScore csa_score(const CsaInput& in, const std::string& method, const std::vector<std::size_t>& metric_idx) {
  auto it = std::find(in.methods.begin(), in.methods.end(), method);
  if (it == in.methods.end()) throw InvalidInput("unknown method '" + method + "'");
  const auto row = static_cast<std::size_t>(it - in.methods.begin());
  std::vector<std::size_t> idx = metric_idx;
  if (idx.empty()) {
    for (std::size_t k = 0; k < in.metrics.size(); ++k) idx.push_back(k);
  }
  auto normalised = [&](const std::vector<std::vector<double>>& table, std::size_t k) {
    double lo = table[0][k], hi = table[0][k];
    for (const auto& r : table) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
    }
    if (hi == lo) throw DegenerateNormalization("all methods tie on " + in.metrics[k]);
    return 1.0 - (table[row][k] - lo) / (hi - lo);
  };
  CsaScore s;
  for (std::size_t k : idx) {
    if (k >= in.metrics.size()) throw InvalidInput("metric index out of range");
    s.known += normalised(in.known, k);
    s.unknown += normalised(in.unknown, k);
    const double base = in.known[row][k];
    if (base == 0.0) throw DegenerateNormalization("zero known value for " + in.metrics[k]);
    s.degradation += (in.unknown[row][k] - base) / std::abs(base);
  }
  const double n = static_cast<double>(idx.size());
  s.known /= n;
  s.unknown /= n;
  s.degradation /= n;
  s.csa = in.alpha * s.known + s.unknown - in.beta * s.degradation;
  return s;
}

std::vector<CsaRow> csa_table(const CsaInput& in) {
  std::vector<CsaRow> rows;
  for (const auto& m : in.methods) {
    for (std::size_t k = 0; k < in.metrics.size(); ++k) rows.push_back({m, in.metrics[k], csa_score(in, m, {k})});
    rows.push_back({m, "all", csa_score(in, m)});
  }
  return rows;
}

void write_csa_csv(const std::filesystem::path& path, const std::vector<CsaRow>& rows) {
  auto out = open_out(path);
  out << "method,metric,M_known,M_unknown,D,CSA\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.method, r.metric, r.score.known, r.score.unknown,
                       r.score.degradation, r.score.csa);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::string radar_chart_svg(const std::vector<CsaRow>& rows, const std::vector<std::string>& metrics) {
  if (metrics.size() < 3) throw InvalidInput("radar chart needs at least 3 metrics");
  constexpr double cx = 260, cy = 250, radius = 170;
  const std::array<const char*, 6> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const auto n = metrics.size();
  auto angle = [&](std::size_t k) { return -std::numbers::pi / 2 + 2 * std::numbers::pi * k / n; };

  // Radial scale covers every plotted value.
  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    if (r.metric == "all") continue;
    lo = std::min(lo, r.score.csa);
    hi = std::max(hi, r.score.csa);
  }
  if (hi <= lo) hi = lo + 1.0;
  auto rad = [&](double v) { return radius * (v - lo) / (hi - lo); };

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width="560" height="540" font-family="sans-serif">)" << '\n';
  for (int ring = 1; ring <= 4; ++ring) {
    svg << fmt::format(R"(<circle cx="{}" cy="{}" r="{:.2f}" fill="none" stroke="#ccc"/>)", cx, cy,
                       radius * ring / 4.0)
        << '\n';
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double x = cx + radius * std::cos(angle(k));
    const double y = cy + radius * std::sin(angle(k));
    svg << fmt::format(R"(<line class="axis" x1="{}" y1="{}" x2="{:.2f}" y2="{:.2f}" stroke="#888"/>)", cx, cy, x,
                       y)
        << '\n';
    svg << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle">{}</text>)",
                       cx + (radius + 22) * std::cos(angle(k)), cy + (radius + 22) * std::sin(angle(k)) + 5,
                       metrics[k])
        << '\n';
  }
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::string pts;
    for (std::size_t k = 0; k < n; ++k) {
      auto it = std::find_if(rows.begin(), rows.end(),
                             [&](const CsaRow& r) { return r.method == methods[m] && r.metric == metrics[k]; });
      const double v = it == rows.end() ? lo : it->score.csa;
      pts += fmt::format("{:.2f},{:.2f} ", cx + rad(v) * std::cos(angle(k)), cy + rad(v) * std::sin(angle(k)));
    }
    const char* colour = palette[m % palette.size()];
    svg << fmt::format(R"(<polygon points="{}" fill="{}" fill-opacity="0.15" stroke="{}" stroke-width="2"/>)", pts,
                       colour, colour)
        << '\n';
    svg << fmt::format(R"(<text x="20" y="{}" fill="{}">{}</text>)", 470 + 18 * m, colour, methods[m]) << '\n';
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace trajpred::eval
