#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curv/network.hpp"

namespace curv {

struct Dataset {
  std::vector<Eigen::VectorXd> images;  // pixels in [0, 1]
  std::vector<int> labels;
  int dim = 0;
  int class_count = 0;
  std::size_t size() const { return images.size(); }
};

enum class DataErrorKind {
  FileAccess,
  BadMagic,
  Truncated,
  CountMismatch,
  UnknownActivation,
  DimensionMismatch,
  VersionMismatch,
  Malformed,
};

class DataError : public std::runtime_error {
 public:
  DataError(DataErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  DataErrorKind kind() const { return kind_; }

 private:
  DataErrorKind kind_;
};

// IDX container (big-endian, magic 0x803 for images / 0x801 for labels);
// pixels are scaled by 1/255 on load.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);
void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path);

struct ModelMeta {
  double gamma = 0;
  std::string mode = "standard";
  std::uint64_t seed = 0;
  std::string pixel_scale = "1/255";
  std::string init = "uniform(+-sqrt(6/(fan_in+fan_out)))";
};

// Versioned JSON manifest; weights stored as decimal text with round-trip
// precision, so load(save(net)) is bit-exact.
void save_model(const Mlp& net, const std::string& path, const ModelMeta& meta = {});
struct LoadedModel {
  Mlp net;
  ModelMeta meta;
};
LoadedModel load_model(const std::string& path);

// One certify/attack outcome; `flag` is tight (certify) or on_boundary
// (attack).
struct CertificateRecord {
  int id = 0;
  int label = 0;
  int target = 0;
  double radius = 0;
  double eta = 0;
  double margin = 0;
  bool flag = false;
  double wall_ms = 0;
};

enum class ReportFormat { Csv, JsonLines };

using ReportHeader = std::vector<std::pair<std::string, std::string>>;

void write_certificate_records(const std::vector<CertificateRecord>& records, std::ostream& out,
                               ReportFormat format, const ReportHeader& header);

struct EvalReport;
void write_eval_report(const EvalReport& report, std::ostream& out, ReportFormat format,
                       const ReportHeader& header);

// Deterministic 10-class 28x28 image set; stands in for MNIST where the
// real files are unavailable.
Dataset synthetic_digits(int count, std::uint64_t seed);

// Fixed-width float formatting used by all report writers (6 significant
// digits).
std::string format_float(double value);

}  // namespace curv
