#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/evaluation.hpp"
#include "d2d/training.hpp"

namespace d2d {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Incremental CSV writer; the header is written on construction.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  CsvWriter& field(double v);
  CsvWriter& field(long v);
  CsvWriter& field(std::string_view v);
  void end_row();

 private:
  std::ofstream out_;
  bool first_ = true;
};

// Metrics files carry every MetricsRecord column except wall_ms, the only
// non-deterministic field, which goes to the timing file instead.
CsvWriter open_metrics_csv(const std::filesystem::path& path);
CsvWriter open_timing_csv(const std::filesystem::path& path);
void write_metrics_row(CsvWriter& w, const MetricsRecord& r);
void write_timing_row(CsvWriter& w, const MetricsRecord& r);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows);
void write_timing_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows);

void write_eval_report(const std::filesystem::path& text_path,
                       const std::filesystem::path& csv_path, const EvalReport& report);

void write_raster_csv(const std::filesystem::path& path, const PowerMapRaster& raster);

}  // namespace d2d
