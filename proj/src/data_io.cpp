#include "curv/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "curv/rng.hpp"
#include "curv/training.hpp"

namespace curv {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr int kModelFormatVersion = 1;

std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw DataError(DataErrorKind::Truncated, "truncated " + what);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw DataError(DataErrorKind::FileAccess, "cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError(DataErrorKind::FileAccess, "cannot open " + labels_path);

  if (read_u32_be(img, "image header") != kImageMagic)
    throw DataError(DataErrorKind::BadMagic, "bad image magic in " + images_path);
  std::uint32_t n_images = read_u32_be(img, "image header");
  std::uint32_t rows = read_u32_be(img, "image header");
  std::uint32_t cols = read_u32_be(img, "image header");

  if (read_u32_be(lab, "label header") != kLabelMagic)
    throw DataError(DataErrorKind::BadMagic, "bad label magic in " + labels_path);
  std::uint32_t n_labels = read_u32_be(lab, "label header");

  if (n_images != n_labels)
    throw DataError(DataErrorKind::CountMismatch,
                    "image/label count mismatch: " + std::to_string(n_images) + " vs " +
                        std::to_string(n_labels));

  const std::size_t dim = std::size_t(rows) * std::size_t(cols);
  Dataset data;
  data.dim = static_cast<int>(dim);
  data.images.reserve(n_images);
  data.labels.reserve(n_images);

  std::vector<unsigned char> pixel_buf(dim);
  int max_label = -1;
  for (std::uint32_t i = 0; i < n_images; ++i) {
    img.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(dim));
    if (!img) throw DataError(DataErrorKind::Truncated, "truncated image payload");
    unsigned char label = 0;
    lab.read(reinterpret_cast<char*>(&label), 1);
    if (!lab) throw DataError(DataErrorKind::Truncated, "truncated label payload");
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t p = 0; p < dim; ++p) v[static_cast<Eigen::Index>(p)] = pixel_buf[p] / 255.0;
    data.images.push_back(std::move(v));
    data.labels.push_back(label);
    max_label = std::max(max_label, static_cast<int>(label));
  }
  data.class_count = max_label + 1;
  return data;
}

void save_idx(const Dataset& data, const std::string& images_path,
              const std::string& labels_path) {
  if (data.images.size() != data.labels.size())
    throw DataError(DataErrorKind::CountMismatch, "dataset images/labels length mismatch");
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw DataError(DataErrorKind::FileAccess, "cannot write " + images_path);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw DataError(DataErrorKind::FileAccess, "cannot write " + labels_path);

  // Square side when possible (28x28 for MNIST-shaped data), else 1 x dim.
  std::uint32_t rows = 1, cols = static_cast<std::uint32_t>(data.dim);
  std::uint32_t side = static_cast<std::uint32_t>(std::lround(std::sqrt(double(data.dim))));
  if (side * side == static_cast<std::uint32_t>(data.dim)) {
    rows = side;
    cols = side;
  }

  write_u32_be(img, kImageMagic);
  write_u32_be(img, static_cast<std::uint32_t>(data.images.size()));
  write_u32_be(img, rows);
  write_u32_be(img, cols);
  write_u32_be(lab, kLabelMagic);
  write_u32_be(lab, static_cast<std::uint32_t>(data.labels.size()));

  std::vector<unsigned char> pixel_buf(static_cast<std::size_t>(data.dim));
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const Eigen::VectorXd& v = data.images[i];
    for (int p = 0; p < data.dim; ++p) {
      double scaled = std::lround(std::clamp(v[p], 0.0, 1.0) * 255.0);
      pixel_buf[static_cast<std::size_t>(p)] = static_cast<unsigned char>(scaled);
    }
    img.write(reinterpret_cast<const char*>(pixel_buf.data()), data.dim);
    unsigned char label = static_cast<unsigned char>(data.labels[i]);
    lab.write(reinterpret_cast<const char*>(&label), 1);
  }
}

void save_model(const Mlp& net, const std::string& path, const ModelMeta& meta) {
  nlohmann::json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["activation"] = to_string(net.activation());
  doc["dims"] = net.dims();
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& l : net.layers()) {
    nlohmann::json jl;
    std::vector<double> w(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
        w[static_cast<std::size_t>(r * l.weight.cols() + c)] = l.weight(r, c);
    jl["weight"] = w;
    jl["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back(std::move(jl));
  }
  doc["layers"] = std::move(layers);
  doc["metadata"] = {{"gamma", meta.gamma},
                     {"mode", meta.mode},
                     {"seed", meta.seed},
                     {"pixel_scale", meta.pixel_scale},
                     {"init", meta.init}};

  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::FileAccess, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::FileAccess, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorKind::Malformed, "model parse error: " + std::string(e.what()));
  }

  if (!doc.contains("format_version") || doc["format_version"].get<int>() != kModelFormatVersion)
    throw DataError(DataErrorKind::VersionMismatch, "unsupported model format version");

  ActivationKind kind;
  try {
    kind = activation_from_string(doc.at("activation").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw DataError(DataErrorKind::UnknownActivation, e.what());
  }

  std::vector<int> dims = doc.at("dims").get<std::vector<int>>();
  if (dims.size() < 3) throw DataError(DataErrorKind::Malformed, "model needs at least 2 layers");
  const nlohmann::json& layers = doc.at("layers");
  if (layers.size() + 1 != dims.size())
    throw DataError(DataErrorKind::DimensionMismatch, "layer count does not match dims");

  std::vector<DenseLayer> built;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Eigen::Index rows = dims[i + 1];
    const Eigen::Index cols = dims[i];
    std::vector<double> w = layers[i].at("weight").get<std::vector<double>>();
    std::vector<double> b = layers[i].at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(rows * cols) ||
        b.size() != static_cast<std::size_t>(rows))
      throw DataError(DataErrorKind::DimensionMismatch,
                      "layer " + std::to_string(i + 1) + " does not match the dimension chain");
    DenseLayer layer;
    layer.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    layer.bias = Eigen::Map<Eigen::VectorXd>(b.data(), rows);
    built.push_back(std::move(layer));
  }

  ModelMeta meta;
  if (doc.contains("metadata")) {
    const nlohmann::json& md = doc["metadata"];
    meta.gamma = md.value("gamma", 0.0);
    meta.mode = md.value("mode", std::string("standard"));
    meta.seed = md.value("seed", std::uint64_t{0});
    meta.pixel_scale = md.value("pixel_scale", std::string("1/255"));
    meta.init = md.value("init", std::string());
  }

  try {
    return {Mlp(std::move(built), kind), meta};
  } catch (const std::invalid_argument& e) {
    throw DataError(DataErrorKind::DimensionMismatch, e.what());
  }
}

std::string format_float(double value) {
  if (value == 0.0) value = 0.0;  // no negative zero in reports
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

namespace {

void write_header(std::ostream& out, ReportFormat format, const ReportHeader& header) {
  if (format == ReportFormat::Csv) {
    for (const auto& [key, value] : header) out << "# " << key << "=" << value << "\n";
  } else {
    nlohmann::json h;
    for (const auto& [key, value] : header) h[key] = value;
    out << nlohmann::json{{"header", h}}.dump() << "\n";
  }
}

}  // namespace

void write_certificate_records(const std::vector<CertificateRecord>& records, std::ostream& out,
                               ReportFormat format, const ReportHeader& header) {
  write_header(out, format, header);
  if (format == ReportFormat::Csv) {
    out << "id,label,target,radius,eta,margin,flag,wall_ms\n";
    for (const CertificateRecord& r : records) {
      out << r.id << ',' << r.label << ',' << r.target << ',' << format_float(r.radius) << ','
          << format_float(r.eta) << ',' << format_float(r.margin) << ',' << (r.flag ? 1 : 0) << ','
          << format_float(r.wall_ms) << "\n";
    }
  } else {
    for (const CertificateRecord& r : records) {
      nlohmann::json j{{"id", r.id},
                       {"label", r.label},
                       {"target", r.target},
                       {"radius", format_float(r.radius)},
                       {"eta", format_float(r.eta)},
                       {"margin", format_float(r.margin)},
                       {"flag", r.flag},
                       {"wall_ms", format_float(r.wall_ms)}};
      out << j.dump() << "\n";
    }
  }
}

void write_eval_report(const EvalReport& report, std::ostream& out, ReportFormat format,
                       const ReportHeader& header) {
  write_header(out, format, header);
  const std::pair<const char*, double> fields[] = {
      {"standard_accuracy", report.standard_accuracy},
      {"empirical_robust_accuracy", report.empirical_robust_accuracy},
      {"certified_robust_accuracy", report.certified_robust_accuracy},
      {"attack_success_rate", report.attack_success_rate},
      {"certificate_success_rate", report.certificate_success_rate},
      {"k_lb", report.k_lb},
      {"k_ub", report.k_ub},
      {"mean_crc", report.mean_crc},
  };
  if (format == ReportFormat::Csv) {
    bool first = true;
    for (const auto& [name, _] : fields) {
      out << (first ? "" : ",") << name;
      first = false;
    }
    out << "\n";
    first = true;
    for (const auto& [_, value] : fields) {
      out << (first ? "" : ",") << format_float(value);
      first = false;
    }
    out << "\n";
  } else {
    nlohmann::json j;
    for (const auto& [name, value] : fields) j[name] = format_float(value);
    j["sample_count"] = report.sample_count;
    j["rho"] = format_float(report.rho);
    out << j.dump() << "\n";
  }
}

Dataset synthetic_digits(int count, std::uint64_t seed) {
  constexpr int kSide = 28;
  constexpr int kClasses = 10;
  Rng rng(seed);
  Dataset data;
  data.dim = kSide * kSide;
  data.class_count = kClasses;
  data.images.reserve(static_cast<std::size_t>(count));
  data.labels.reserve(static_cast<std::size_t>(count));

  // Each class is a pair of Gaussian bumps at class-specific positions plus
  // a class-specific diagonal grating; noise keeps the task non-trivial.
  struct ClassShape {
    double cx1, cy1, cx2, cy2, freq, phase;
  };
  std::vector<ClassShape> shapes;
  Rng shape_rng(0xc1a55e5ull);
  for (int c = 0; c < kClasses; ++c) {
    ClassShape s;
    s.cx1 = 4.0 + 20.0 * shape_rng.uniform01();
    s.cy1 = 4.0 + 20.0 * shape_rng.uniform01();
    s.cx2 = 4.0 + 20.0 * shape_rng.uniform01();
    s.cy2 = 4.0 + 20.0 * shape_rng.uniform01();
    s.freq = 0.25 + 0.5 * shape_rng.uniform01();
    s.phase = 2.0 * M_PI * shape_rng.uniform01();
    shapes.push_back(s);
  }

  for (int i = 0; i < count; ++i) {
    int label = static_cast<int>(rng.below(kClasses));
    const ClassShape& s = shapes[static_cast<std::size_t>(label)];
    double jx = 4.0 * (rng.uniform01() - 0.5);
    double jy = 4.0 * (rng.uniform01() - 0.5);
    double amp = 0.55 + 0.45 * rng.uniform01();
    Eigen::VectorXd img(data.dim);
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        double d1 = (x - s.cx1 - jx) * (x - s.cx1 - jx) + (y - s.cy1 - jy) * (y - s.cy1 - jy);
        double d2 = (x - s.cx2 - jx) * (x - s.cx2 - jx) + (y - s.cy2 - jy) * (y - s.cy2 - jy);
        double v = amp * (std::exp(-d1 / 18.0) + std::exp(-d2 / 18.0));
        v += 0.12 * (0.5 + 0.5 * std::sin(s.freq * (x + y) + s.phase));
        v += 0.25 * rng.normal();
        img[y * kSide + x] = std::clamp(v, 0.0, 1.0);
      }
    }
    data.images.push_back(std::move(img));
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace curv
