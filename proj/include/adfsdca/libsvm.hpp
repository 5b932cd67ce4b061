#ifndef ADFSDCA_LIBSVM_HPP
#define ADFSDCA_LIBSVM_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "adfsdca/dataset.hpp"

namespace adfsdca {

struct LibsvmOptions {
  /// Feature count; defaults to the largest index seen. Must not be smaller.
  std::optional<Eigen::Index> features;
  /// Map a label set of exactly {0,1} or {1,2} onto {-1,+1}.
  bool normalize_binary_labels = true;
};

/// Parses `label idx:val idx:val ...` lines with 1-based, strictly
/// increasing feature indices. Blank lines are skipped.
///
/// Throws ParseError on malformed tokens, duplicate indices or empty input,
/// and IndexError on decreasing or out-of-range indices.
Dataset<double> parse_libsvm(std::istream &in, const LibsvmOptions &opts = {});

/// Reads a LIBSVM file; names ending in ".gz" are decompressed on the fly.
Dataset<double> load_libsvm(const std::string &path,
                            const LibsvmOptions &opts = {});

/// Writes shortest round-trip decimal forms, so parse(write(ds)) is exact.
void write_libsvm(std::ostream &out, const Dataset<double> &ds);

}  // namespace adfsdca

#endif  // ADFSDCA_LIBSVM_HPP
