// CSV tables and the run manifest. Numbers are written with 17 significant
// digits so that identical runs give identical bytes.
#pragma once

#include "gbattery/cycles.hpp"
#include "gbattery/oracle.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gb {

inline constexpr const char* kVersion = "0.1.0";

std::string format_number(double v);
std::string format_number(const std::optional<double>& v);  // empty when missing
// RFC 4180 quoting when needed
std::string csv_field(const std::string& s);

// Small row-oriented CSV writer with a fixed header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& add_row(std::vector<std::string> fields);
  const std::vector<std::string>& header() const noexcept { return header_; }
  size_t rows() const noexcept { return rows_.size(); }
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

const std::vector<std::string>& sweep_columns();
const std::vector<std::string>& trace_columns();

CsvTable sweep_table(const std::vector<SweepCell>& cells);
CsvTable extrema_table(const std::vector<ThetaExtrema>& extrema);
CsvTable trace_table(const ChargingTrace& trace, double mf_q2, double mf_p2);
// lambda(t) on `samples` points per t_d
CsvTable protocol_table(const std::vector<double>& td, int exponent, int samples);
CsvTable bath_table(const ModelSpec& spec, const BathSample& bath);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace gb
