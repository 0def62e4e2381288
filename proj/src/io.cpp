#include "bmf/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unistd.h>

namespace bmf {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num(double x) { return format_double(x); }
std::string num(std::size_t x) { return std::to_string(x); }

CsvText::CsvText(const std::vector<std::string>& header) : columns_(header.size()) { row(header); }

CsvText& CsvText::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::logic_error("CsvText: wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += fields[i];
  }
  text_ += '\n';
  return *this;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string indicators_csv(const std::vector<IndicatorSample>& rows) {
  CsvText c({"t", "N", "rep", "i_hat", "r_trace"});
  for (const auto& r : rows) c.row({num(r.t), num(r.n_particles), num(r.repetition), num(r.i_hat), num(r.r_trace)});
  return c.str();
}

std::string indicator_summary_csv(const std::vector<IndicatorSummary>& rows) {
  CsvText c({"t", "N", "samples", "mean_i_hat", "se_i_hat", "mean_r_trace", "se_r_trace"});
  for (const auto& r : rows)
    c.row({num(r.t), num(r.n_particles), num(r.i_hat.n), num(r.i_hat.mean), num(r.i_hat.standard_error),
           num(r.r_trace.mean), num(r.r_trace.standard_error)});
  return c.str();
}

std::string pair_csv(const std::vector<PairSample>& rows) {
  CsvText c({"t", "N", "rep", "i_pair", "i_first", "i_second"});
  for (const auto& r : rows)
    c.row({num(r.t), num(r.n_particles), num(r.repetition), num(r.i_pair), num(r.i_first), num(r.i_second)});
  return c.str();
}

std::string convergence_drift_csv(const std::vector<DriftRecord>& rows) {
  CsvText c({"N", "rep", "nbody_max_drift", "meanfield_max_drift"});
  for (const auto& r : rows) c.row({num(r.n_particles), num(r.repetition), num(r.nbody), num(r.meanfield)});
  return c.str();
}

std::string delta_csv(const std::vector<DeltaStats>& rows, const std::vector<std::size_t>& reps) {
  if (reps.size() != rows.size()) throw std::logic_error("delta_csv: one repetition index per row");
  CsvText c({"t", "N", "rep", "l1_norm", "l2_norm"});
  for (std::size_t i = 0; i < rows.size(); ++i)
    c.row({num(rows[i].t), num(rows[i].n_particles), num(reps[i]), num(rows[i].l1_norm), num(rows[i].l2_norm)});
  return c.str();
}

std::string delta_summary_csv(const std::vector<DeltaSummary>& rows) {
  CsvText c({"t", "N", "samples", "mean_l1", "se_l1", "mean_l2", "se_l2"});
  for (const auto& r : rows)
    c.row({num(r.t), num(r.n_particles), num(r.l1.n), num(r.l1.mean), num(r.l1.standard_error), num(r.l2.mean),
           num(r.l2.standard_error)});
  return c.str();
}

std::string h1_moments_csv(const std::vector<double>& t, int p, const std::vector<double>& moments) {
  CsvText c({"t", "p", "moment"});
  for (std::size_t i = 0; i < t.size(); ++i) c.row({num(t[i]), std::to_string(p), num(moments[i])});
  return c.str();
}

std::string picard_csv(const std::vector<double>& residuals) {
  CsvText c({"iteration", "residual"});
  for (std::size_t i = 0; i < residuals.size(); ++i) c.row({num(i + 1), num(residuals[i])});
  return c.str();
}

nlohmann::json proptest_report(const std::vector<CheckReport>& reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j{{"check_name", r.check_name},
                     {"samples", r.samples},
                     {"failures", r.failures},
                     {"worst_ratio", r.worst_ratio}};
    if (r.sharp_constant) j["sharp_constant"] = *r.sharp_constant;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace bmf
