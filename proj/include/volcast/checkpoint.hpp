#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "volcast/tensor.hpp"

namespace volcast::ad {

/// Ordered (name, tensor) registry; names are unique.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, Matrix value);
  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  bool contains(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  Eigen::Index scalar_count() const;
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<Tensor> tensors() const;

  /// Snapshot of all values, in registration order.
  std::vector<Matrix> values() const;
  void assign(const std::vector<Matrix>& values);
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Text checkpoint:
///   volcast-checkpoint v1
///   count <n>
///   then per parameter a line `<name> <rows> <cols>` followed by one line of row-major values
///   in shortest round-trip decimal form.
void write_checkpoint(std::ostream& out, const ParameterSet& params);
/// Loads values into existing parameters by name; throws ShapeMismatch or MalformedRecord.
void read_checkpoint(std::istream& in, ParameterSet& params);
void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
void load_checkpoint(const std::filesystem::path& path, ParameterSet& params);

}  // namespace volcast::ad
