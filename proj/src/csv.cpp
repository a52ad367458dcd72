#include "d2d/csv.hpp"

#include <charconv>
#include <cmath>

#include "d2d/errors.hpp"

namespace d2d {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : out_(path, std::ios::trunc) {
  if (!out_) throw IoError("cannot open for writing: " + path.string());
  for (auto h : header) field(h);
  end_row();
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_double(v))); }

CsvWriter& CsvWriter::field(long v) { return field(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::field(std::string_view v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  out_.flush();
  first_ = true;
}

void write_metrics_row(CsvWriter& w, const MetricsRecord& r) {
  w.field(r.iteration)
      .field(r.cost_total)
      .field(r.mean_eta)
      .field(r.ct_p)
      .field(r.ct_if)
      .field(r.pmax_violation_rate)
      .field(r.q_exceed_rate)
      .end_row();
}

void write_timing_row(CsvWriter& w, const MetricsRecord& r) {
  w.field(r.iteration).field(r.wall_ms).end_row();
}

CsvWriter open_metrics_csv(const std::filesystem::path& path) {
  return CsvWriter(path, {"iteration", "cost_total", "mean_eta", "ct_p", "ct_if",
                          "pmax_violation_rate", "q_exceed_rate"});
}

CsvWriter open_timing_csv(const std::filesystem::path& path) {
  return CsvWriter(path, {"iteration", "wall_ms"});
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows) {
  CsvWriter w = open_metrics_csv(path);
  for (const auto& r : rows) write_metrics_row(w, r);
}

void write_timing_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows) {
  CsvWriter w = open_timing_csv(path);
  for (const auto& r : rows) write_timing_row(w, r);
}

void write_eval_report(const std::filesystem::path& text_path,
                       const std::filesystem::path& csv_path, const EvalReport& report) {
  std::ofstream txt(text_path, std::ios::trunc);
  if (!txt) throw IoError("cannot open for writing: " + text_path.string());
  txt << "mean_eta = " << format_double(report.mean_eta) << '\n'
      << "eta_std = " << format_double(report.eta_std) << '\n'
      << "mean_total_power_per_tx = " << format_double(report.mean_total_power_per_tx) << '\n'
      << "pmax_violation_rate = " << format_double(report.pmax_violation_rate) << '\n'
      << "q_exceed_rate = " << format_double(report.q_exceed_rate) << '\n'
      << "n_drops = " << report.n_drops << '\n';

  CsvWriter w(csv_path, {"mean_eta", "eta_std", "mean_total_power_per_tx", "pmax_violation_rate",
                         "q_exceed_rate", "n_drops"});
  w.field(report.mean_eta)
      .field(report.eta_std)
      .field(report.mean_total_power_per_tx)
      .field(report.pmax_violation_rate)
      .field(report.q_exceed_rate)
      .field(report.n_drops)
      .end_row();
}

void write_raster_csv(const std::filesystem::path& path, const PowerMapRaster& raster) {
  CsvWriter w(path, {"x", "y", "mean_dbm"});
  for (const auto& p : raster.points) w.field(p.x).field(p.y).field(p.mean_dbm).end_row();
}

}  // namespace d2d
