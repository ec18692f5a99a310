#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trajpred/eval/metrics.hpp"

namespace trajpred::eval {

inline constexpr std::array<std::string_view, 5> kMetricNames = {"ADE", "FDE", "MR", "APDE", "CR"};

double metric_value(const MetricReport& r, std::string_view name);

struct ReportRow {
  std::string method;
  std::string dataset;
  MetricReport metrics;
};

/// CSV columns: method,dataset,ADE,FDE,MR,APDE,CR. Throws IoError when the
/// file cannot be written or read, SchemaError on a malformed file.
void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Per-method metric values on a known and an unknown scenario.
struct CsaInput {
  std::vector<std::string> methods;
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> known;    // [method][metric]
  std::vector<std::vector<double>> unknown;  // [method][metric]
  double alpha = 1.0;
  double beta = 1.0;
};

/// Pairs the rows of two reports by method. Throws InvalidInput when the
/// method sets differ.
CsaInput csa_input(const std::vector<ReportRow>& known, const std::vector<ReportRow>& unknown,
                   std::vector<std::string> metrics, double alpha, double beta);

struct CsaScore {
  double known = 0.0;    // mean of (1 - min-max normalised value) on the known scenario
  double unknown = 0.0;  // same on the unknown scenario
  double degradation = 0.0;  // mean relative increase unknown vs known
  double csa = 0.0;          // alpha * known + unknown - beta * degradation
};

/// CSA of `method` over the metric indices in `metric_idx` (all when empty).
/// Throws DegenerateNormalization when all methods tie on a metric.
CsaScore csa_score(const CsaInput& in, const std::string& method, const std::vector<std::size_t>& metric_idx = {});

struct CsaRow {
  std::string method;
  std::string metric;  // one metric name, or "all"
  CsaScore score;
};

/// One row per method and metric, plus an "all" row per method.
std::vector<CsaRow> csa_table(const CsaInput& in);
void write_csa_csv(const std::filesystem::path& path, const std::vector<CsaRow>& rows);

/// SVG radar chart with one axis per metric and one polygon per method.
std::string radar_chart_svg(const std::vector<CsaRow>& rows, const std::vector<std::string>& metrics);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace trajpred::eval
