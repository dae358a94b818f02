#include "volcast/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast::ad {

Tensor& ParameterSet::add(const std::string& name, Matrix value) {
  if (contains(name)) throw Error(ErrorCode::InvalidConfig, "duplicate parameter " + name);
  entries_.emplace_back(name, Tensor::parameter(std::move(value)));
  return entries_.back().second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw Error(ErrorCode::InvalidConfig, "unknown parameter " + name);
}

Tensor& ParameterSet::at(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ParameterSet&>(*this).at(name));
}

bool ParameterSet::contains(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.first == name) return true;
  return false;
}

Eigen::Index ParameterSet::scalar_count() const {
  Eigen::Index n = 0;
  for (const auto& e : entries_) n += e.second.value().size();
  return n;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  for (const auto& e : entries_) out.push_back(e.second);
  return out;
}

std::vector<Matrix> ParameterSet::values() const {
  std::vector<Matrix> out;
  for (const auto& e : entries_) out.push_back(e.second.value());
  return out;
}

void ParameterSet::assign(const std::vector<Matrix>& values) {
  if (values.size() != entries_.size()) throw Error(ErrorCode::ShapeMismatch, "parameter count differs");
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& t = entries_[i].second;
    if (values[i].rows() != t.rows() || values[i].cols() != t.cols())
      throw Error(ErrorCode::ShapeMismatch, "shape differs for " + entries_[i].first);
    t.mutable_value() = values[i];
  }
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.second.zero_grad();
}

void write_checkpoint(std::ostream& out, const ParameterSet& params) {
  out << "volcast-checkpoint v1\n";
  out << "count " << params.size() << '\n';
  for (const auto& [name, t] : params.entries()) {
    out << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    const auto& v = t.value();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) out << ' ';
      out << csv::format_double(v.data()[i]);
    }
    out << '\n';
  }
}

void read_checkpoint(std::istream& in, ParameterSet& params) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != "volcast-checkpoint v1")
    throw Error(ErrorCode::MalformedRecord, "not a volcast checkpoint");
  std::string word;
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "count") throw Error(ErrorCode::MalformedRecord, "missing count");
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols)) throw Error(ErrorCode::MalformedRecord, "truncated checkpoint");
    auto& t = params.at(name);
    if (rows != t.rows() || cols != t.cols())
      throw Error(ErrorCode::ShapeMismatch, "checkpoint shape for " + name + " differs from model");
    Matrix v(rows, cols);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!(in >> word)) throw Error(ErrorCode::MalformedRecord, "truncated values for " + name);
      auto d = csv::parse_double(word);
      if (!d) throw Error(ErrorCode::MalformedRecord, "bad value for " + name);
      v.data()[i] = *d;
    }
    // Each value line is newline-terminated; a missing terminator means the last number may be cut short.
    char end = 0;
    while (in.get(end) && (end == ' ' || end == '\r')) {
    }
    if (!in || end != '\n') throw Error(ErrorCode::MalformedRecord, "truncated values for " + name);
    t.mutable_value() = std::move(v);
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  write_checkpoint(out, params);
}

void load_checkpoint(const std::filesystem::path& path, ParameterSet& params) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  read_checkpoint(in, params);
}

}  // namespace volcast::ad
