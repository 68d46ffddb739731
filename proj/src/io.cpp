#include "gbattery/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gb {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
  rows_.push_back(std::move(fields));
  return *this;
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&](const std::vector<std::string>& f) {
    for (size_t i = 0; i < f.size(); ++i) {
      if (i) os << ',';
      os << csv_field(f[i]);
    }
    os << "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols{
      "scenario", "t_d", "theta", "W_d", "W_c", "ergotropy", "W_diss", "Q", "Sigma", "eta", "I_td",
      "dE_B_disc", "dE_B_charge", "first_law_residual", "second_law_value",
      "interaction_identity_residual", "flags"};
  return cols;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols{"t", "sigma_S_11", "sigma_S_22", "sigma_S_12",
                                             "mf_q2_ref", "mf_p2_ref"};
  return cols;
}

namespace {
std::string join_flags(const std::vector<std::string>& f) {
  std::string s;
  for (size_t i = 0; i < f.size(); ++i) {
    if (i) s += ';';
    s += f[i];
  }
  return s;
}
}  // namespace

CsvTable sweep_table(const std::vector<SweepCell>& cells) {
  CsvTable t(sweep_columns());
  for (const SweepCell& c : cells) {
    std::vector<std::string> row{to_string(c.scenario), format_number(c.t_d), format_number(c.theta)};
    if (c.report) {
      const CycleReport& r = *c.report;
      for (double v : {r.W_d, r.W_c, r.ergotropy, r.W_diss, r.Q, r.Sigma}) row.push_back(format_number(v));
      row.push_back(format_number(r.eta));
      for (double v : {r.I_td, r.dE_B_disc, r.dE_B_charge, r.first_law_residual, r.second_law_value,
                       r.interaction_identity_residual}) {
        row.push_back(format_number(v));
      }
      row.push_back(join_flags(r.flags));
    } else {
      for (int i = 0; i < 13; ++i) row.emplace_back();
      row.push_back("error: " + c.error);
    }
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable extrema_table(const std::vector<ThetaExtrema>& extrema) {
  CsvTable t({"t_d", "theta_low", "eta_max", "W_diss_min", "theta_high", "eta_min", "W_diss_max"});
  for (const ThetaExtrema& e : extrema) {
    t.add_row({format_number(e.t_d), format_number(e.theta_low), format_number(e.eta_max),
               format_number(e.W_diss_min), format_number(e.theta_high), format_number(e.eta_min),
               format_number(e.W_diss_max)});
  }
  return t;
}

CsvTable trace_table(const ChargingTrace& trace, double mf_q2, double mf_p2) {
  CsvTable t(trace_columns());
  for (size_t i = 0; i < trace.t.size(); ++i) {
    const Matrix& s = trace.sigma_S[i];
    t.add_row({format_number(trace.t[i]), format_number(s(0, 0)), format_number(s(1, 1)),
               format_number(s(0, 1)), format_number(mf_q2), format_number(mf_p2)});
  }
  return t;
}

CsvTable protocol_table(const std::vector<double>& td, int exponent, int samples) {
  CsvTable t({"t_d", "t", "lambda"});
  for (double d : td) {
    if (d <= 0.0) continue;
    Protocol p{d, exponent};
    for (int i = 0; i < samples; ++i) {
      double tt = d * i / (samples - 1);
      t.add_row({format_number(d), format_number(tt), format_number(protocol_value(p, tt))});
    }
  }
  return t;
}

CsvTable bath_table(const ModelSpec& spec, const BathSample& bath) {
  CsvTable t({"k", "omega", "delta", "g", "mass"});
  for (int k = 0; k < spec.N; ++k) {
    t.add_row({std::to_string(k + 1), format_number(bath.omegas[k]), format_number(bath.deltas[k]),
               format_number(bath.couplings[k]), format_number(spec.mass(k))});
  }
  return t;
}

}  // namespace gb
