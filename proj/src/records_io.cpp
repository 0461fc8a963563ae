#include <charconv>
#include <limits>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hslab/errors.hpp"
#include "hslab/stability.hpp"

namespace hslab {

namespace {

constexpr const char* kRecordHeader = "pair_id,kind,t,delta_R,delta_F,phi,delta_finite,flags";

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::size_t line) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::IoError, "line " + std::to_string(line) + ": bad number '" + field + "'");
  return v;
}

}  // namespace

void write_records_csv(std::span<const StabilityRecord> records, std::ostream& out,
                       const std::string& header_comment) {
  if (!header_comment.empty()) out << header_comment << '\n';
  out << kRecordHeader << '\n';
  for (const auto& r : records) {
    out << r.pair_id << ',' << pair_kind_name(r.kind) << ',' << format_double(r.t) << ','
        << format_double(r.delta_R) << ',' << format_double(r.delta_F) << ',' << format_double(r.phi) << ','
        << format_double(r.delta_finite) << ',' << r.flags << '\n';
  }
}

std::vector<StabilityRecord> read_records_csv(std::istream& in) {
  std::vector<StabilityRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kRecordHeader)
        fail(ErrorCode::IoError, "line " + std::to_string(lineno) + ": expected header '" + kRecordHeader + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 8)
      fail(ErrorCode::IoError, "line " + std::to_string(lineno) + ": expected 8 fields, got " +
                                   std::to_string(f.size()));
    StabilityRecord r;
    const double id = parse_double(f[0], lineno);
    if (!(id >= 0.0) || id != std::floor(id)) fail(ErrorCode::IoError, "line " + std::to_string(lineno) + ": bad pair_id");
    r.pair_id = static_cast<std::size_t>(id);
    try {
      r.kind = parse_pair_kind(f[1]);
    } catch (const Error&) {
      fail(ErrorCode::IoError, "line " + std::to_string(lineno) + ": unknown kind '" + f[1] + "'");
    }
    r.t = parse_double(f[2], lineno);
    r.delta_R = parse_double(f[3], lineno);
    r.delta_F = parse_double(f[4], lineno);
    r.phi = parse_double(f[5], lineno);
    r.delta_finite = parse_double(f[6], lineno);
    r.flags = f[7];
    out.push_back(std::move(r));
  }
  if (!header_seen) fail(ErrorCode::IoError, "records file has no header");
  return out;
}

}  // namespace hslab
