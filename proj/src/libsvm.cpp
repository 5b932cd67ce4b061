#include "adfsdca/libsvm.hpp"

#include <zlib.h>

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

namespace adfsdca {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::string_view next_token(std::string_view &rest) {
  std::size_t b = 0;
  while (b < rest.size() && is_space(rest[b])) ++b;
  std::size_t e = b;
  while (e < rest.size() && !is_space(rest[e])) ++e;
  std::string_view tok = rest.substr(b, e - b);
  rest.remove_prefix(e);
  return tok;
}

double parse_real(std::string_view tok, std::size_t line, const char *what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return value;
}

Eigen::Index parse_index(std::string_view tok, std::size_t line) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, "bad feature index '" + std::string(tok) + "'");
  }
  if (value < 1) throw IndexError(line, "feature index must be >= 1");
  return static_cast<Eigen::Index>(value);
}

std::string read_gzip(const std::string &path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoError("cannot open '" + path + "'");
  std::string out;
  std::vector<char> buf(1 << 16);
  int got = 0;
  while ((got = gzread(file, buf.data(), static_cast<unsigned>(buf.size()))) > 0) {
    out.append(buf.data(), static_cast<std::size_t>(got));
  }
  int err = 0;
  const char *msg = gzerror(file, &err);
  const bool failed = got < 0 || (err != Z_OK && err != Z_STREAM_END);
  const std::string detail = failed && msg != nullptr ? msg : "";
  gzclose(file);
  if (failed) throw IoError("error reading '" + path + "': " + detail);
  return out;
}

}  // namespace

Dataset<double> parse_libsvm(std::istream &in, const LibsvmOptions &opts) {
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  Eigen::Index max_index = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest(line);
    const std::string_view label_tok = next_token(rest);
    if (label_tok.empty()) continue;
    const auto row = static_cast<Eigen::Index>(labels.size());
    labels.push_back(parse_real(label_tok, lineno, "label"));

    Eigen::Index prev = 0;
    for (std::string_view tok = next_token(rest); !tok.empty();
         tok = next_token(rest)) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(lineno, "expected idx:val, got '" + std::string(tok) + "'");
      }
      const Eigen::Index idx = parse_index(tok.substr(0, colon), lineno);
      const double val = parse_real(tok.substr(colon + 1), lineno, "feature value");
      if (idx == prev) {
        throw ParseError(lineno, "duplicate feature index " + std::to_string(idx));
      }
      if (idx < prev) {
        throw IndexError(lineno, "feature indices not increasing (" +
                                     std::to_string(prev) + " then " +
                                     std::to_string(idx) + ")");
      }
      prev = idx;
      max_index = std::max(max_index, idx);
      if (val != 0.0) triplets.emplace_back(row, idx - 1, val);
    }
  }
  if (in.bad()) throw IoError("read error");
  if (labels.empty()) throw ParseError("empty input");

  Eigen::Index d = max_index;
  if (opts.features) {
    if (*opts.features < max_index) {
      throw IndexError(0, "feature index " + std::to_string(max_index) +
                              " exceeds configured feature count " +
                              std::to_string(*opts.features));
    }
    d = *opts.features;
  }
  if (d == 0) throw ParseError("no features in input");

  Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(labels.data(),
                                                  static_cast<Eigen::Index>(labels.size()));
  if (opts.normalize_binary_labels) {
    const std::set<double> distinct(labels.begin(), labels.end());
    if (distinct == std::set<double>{0.0, 1.0}) {
      y = (y.array() == 0.0).select(-1.0, y);
    } else if (distinct == std::set<double>{1.0, 2.0}) {
      y = (y.array() == 1.0).select(-1.0, Eigen::VectorXd::Ones(y.size()));
    }
  }

  Dataset<double>::RowMatrix rows(static_cast<Eigen::Index>(labels.size()), d);
  rows.setFromTriplets(triplets.begin(), triplets.end());
  return Dataset<double>(std::move(rows), std::move(y));
}

Dataset<double> load_libsvm(const std::string &path, const LibsvmOptions &opts) {
  const bool gz = path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) {
    std::istringstream in(read_gzip(path));
    return parse_libsvm(in, opts);
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_libsvm(in, opts);
}

void write_libsvm(std::ostream &out, const Dataset<double> &ds) {
  char buf[64];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.write(buf, res.ptr - buf);
  };
  const auto &rows = ds.rows();
  for (Eigen::Index i = 0; i < ds.samples(); ++i) {
    put(ds.labels()[i]);
    for (Dataset<double>::RowMatrix::InnerIterator it(rows, i); it; ++it) {
      out << ' ' << (it.col() + 1) << ':';
      put(it.value());
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed");
}

}  // namespace adfsdca
