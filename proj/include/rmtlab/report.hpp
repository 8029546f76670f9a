#ifndef RMTLAB_REPORT_HPP
#define RMTLAB_REPORT_HPP

#include <complex>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace rmtlab {

// All reals carry 17 significant digits so double values round-trip exactly;
// complex numbers serialize as "re,im" pairs.
inline std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_complex(std::complex<double> v) {
  return fmt_real(v.real()) + "," + fmt_real(v.imag());
}

struct ReportValue {
  bool is_complex = false;
  std::complex<double> value{0.0, 0.0};

  ReportValue() = default;
  ReportValue(double v) : is_complex(false), value(v, 0.0) {}         // NOLINT
  ReportValue(std::complex<double> v) : is_complex(true), value(v) {} // NOLINT

  std::string text() const {
    return is_complex ? fmt_complex(value) : fmt_real(value.real());
  }
};

struct ReportRow {
  std::string key_name;   // "z", "phi", "x", "N", ...
  std::string key_value;
  ReportValue predicted;
  ReportValue estimate;
  double stderr_value = 0.0;
  std::vector<ReportValue> residuals;
  std::string verdict;  // "pass" | "fail" | "degenerate"
  std::vector<std::pair<std::string, double>> details;  // ordered extras
};

struct Report {
  std::string command;
  int n = 0;
  int m = 0;
  std::string dist_name;
  double kappa4 = 0.0;
  int replicas = 0;
  std::uint64_t seed = 0;
  std::optional<double> truncation_t;
  std::vector<ReportRow> rows;
  double runtime_seconds = 0.0;

  bool all_pass() const {
    for (const auto& r : rows)
      if (r.verdict == "fail") return false;
    return true;
  }
};

namespace detail {

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace detail

// Fixed key order and fixed number formatting keep emission byte-stable.
inline void emit_json(const Report& rep, std::ostream& os) {
  os << "{\n";
  os << "  \"command\": \"" << detail::json_escape(rep.command) << "\",\n";
  os << "  \"config\": {";
  os << "\"n\": " << rep.n << ", \"m\": " << rep.m;
  os << ", \"dist\": \"" << detail::json_escape(rep.dist_name) << "\"";
  os << ", \"kappa4\": " << fmt_real(rep.kappa4);
  os << ", \"replicas\": " << rep.replicas;
  os << ", \"seed\": " << rep.seed;
  os << ", \"truncation_t\": ";
  if (rep.truncation_t) os << fmt_real(*rep.truncation_t);
  else os << "null";
  os << "},\n";
  os << "  \"results\": [";
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const ReportRow& r = rep.rows[i];
    os << (i ? ",\n    " : "\n    ");
    os << "{\"" << detail::json_escape(r.key_name) << "\": \""
       << detail::json_escape(r.key_value) << "\"";
    os << ", \"predicted\": ";
    if (r.predicted.is_complex) os << '"' << r.predicted.text() << '"';
    else os << r.predicted.text();
    os << ", \"estimate\": ";
    if (r.estimate.is_complex) os << '"' << r.estimate.text() << '"';
    else os << r.estimate.text();
    os << ", \"stderr\": " << fmt_real(r.stderr_value);
    os << ", \"residuals\": [";
    for (std::size_t k = 0; k < r.residuals.size(); ++k) {
      if (k) os << ", ";
      if (r.residuals[k].is_complex) os << '"' << r.residuals[k].text() << '"';
      else os << r.residuals[k].text();
    }
    os << "], \"verdict\": \"" << detail::json_escape(r.verdict) << "\"";
    if (!r.details.empty()) {
      os << ", \"details\": {";
      for (std::size_t k = 0; k < r.details.size(); ++k) {
        if (k) os << ", ";
        os << "\"" << detail::json_escape(r.details[k].first)
           << "\": " << fmt_real(r.details[k].second);
      }
      os << "}";
    }
    os << "}";
  }
  os << (rep.rows.empty() ? "],\n" : "\n  ],\n");
  os << "  \"runtime_seconds\": " << fmt_real(rep.runtime_seconds) << "\n";
  os << "}\n";
}

inline void emit_csv(const Report& rep, std::ostream& os) {
  os << "command,n,m,dist,kappa4,replicas,seed,truncation_t,key,predicted,"
        "estimate,stderr,residuals,verdict";
  if (!rep.rows.empty())
    for (const auto& d : rep.rows.front().details)
      os << "," << detail::csv_field(d.first);
  os << "\n";
  for (const ReportRow& r : rep.rows) {
    os << rep.command << "," << rep.n << "," << rep.m << ","
       << detail::csv_field(rep.dist_name) << "," << fmt_real(rep.kappa4)
       << "," << rep.replicas << "," << rep.seed << ",";
    if (rep.truncation_t) os << fmt_real(*rep.truncation_t);
    os << "," << detail::csv_field(r.key_name + "=" + r.key_value);
    os << "," << detail::csv_field(r.predicted.text());
    os << "," << detail::csv_field(r.estimate.text());
    os << "," << fmt_real(r.stderr_value);
    std::string res;
    for (std::size_t k = 0; k < r.residuals.size(); ++k) {
      if (k) res += ";";
      res += r.residuals[k].text();
    }
    os << "," << detail::csv_field(res);
    os << "," << r.verdict;
    for (const auto& d : r.details) os << "," << fmt_real(d.second);
    os << "\n";
  }
}

}  // namespace rmtlab

#endif
