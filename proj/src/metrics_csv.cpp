#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "adfsdca/errors.hpp"
#include "adfsdca/metrics.hpp"

namespace adfsdca {

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(const std::vector<RunRecord> &records, std::ostream &out) {
  out << kRecordCsvHeader << '\n';
  for (const auto &r : records) {
    out << format_real(r.epoch) << ',' << format_real(r.primal) << ','
        << format_real(r.dual) << ',' << format_real(r.gap) << ','
        << format_real(r.residual_sq_norm) << ',' << format_real(r.theta_used) << ','
        << format_real(r.wall_ms) << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing metrics CSV");
}

std::vector<RunRecord> read_csv(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordCsvHeader) {
    throw ParseError(1, "missing metrics CSV header");
  }
  std::vector<RunRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double fields[7];
    const char *p = line.data();
    const char *end = line.data() + line.size();
    for (int k = 0; k < 7; ++k) {
      const auto res = std::from_chars(p, end, fields[k]);
      if (res.ec != std::errc()) throw ParseError(lineno, "bad number in metrics CSV");
      p = res.ptr;
      if (k < 6) {
        if (p == end || *p != ',') throw ParseError(lineno, "expected 7 columns");
        ++p;
      }
    }
    if (p != end) throw ParseError(lineno, "trailing data in metrics CSV");
    out.push_back({fields[0], fields[1], fields[2], fields[3], fields[4], fields[5], fields[6]});
  }
  return out;
}

}  // namespace adfsdca
