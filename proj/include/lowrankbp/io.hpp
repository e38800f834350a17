#ifndef LOWRANKBP_IO_HPP
#define LOWRANKBP_IO_HPP

#include "lowrankbp/gen.hpp"
#include "lowrankbp/pipeline.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

namespace lowrankbp::io {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// One named matrix inside a sidecar: `rows*cols` doubles starting at element `offset`.
struct Block {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;
};

namespace detail {

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

inline void put_double(std::ostream& out, double x) {
  const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(x));
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.write(buf, 8);
}

inline Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector json_vector(const Json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

inline Matrix json_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::ParseError, "matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = json_vector(j[static_cast<std::size_t>(i)]);
    if (r.size() != cols) throw Error(ErrorKind::ParseError, "ragged matrix rows");
    m.row(i) = r.transpose();
  }
  return m;
}

template <class Fn>
auto parse_guard(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, what + ": " + e.what());
  }
}

}  // namespace detail

/// Writes matrices back to back, each row-major, as little-endian IEEE-754 doubles.
/// Returns the block table describing the layout.
inline std::vector<Block> write_sidecar(const std::filesystem::path& path,
                                        const std::vector<std::pair<std::string, const Matrix*>>& parts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
  std::vector<Block> blocks;
  Eigen::Index offset = 0;
  for (const auto& [name, m] : parts) {
    blocks.push_back({name, m->rows(), m->cols(), offset});
    for (Eigen::Index i = 0; i < m->rows(); ++i)
      for (Eigen::Index j = 0; j < m->cols(); ++j) detail::put_double(out, (*m)(i, j));
    offset += m->size();
  }
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed: " + path.string());
  return blocks;
}

inline Matrix read_block(const std::filesystem::path& path, const Block& block) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open sidecar " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<Eigen::Index>(in.tellg());
  const Eigen::Index need = (block.offset + block.rows * block.cols) * 8;
  if (block.rows < 0 || block.cols < 0 || block.offset < 0 || bytes < need) {
    throw Error(ErrorKind::ParseError, "sidecar " + path.string() + " too short for block '" + block.name + "'");
  }
  in.seekg(block.offset * 8);
  Matrix m(block.rows, block.cols);
  char buf[8];
  for (Eigen::Index i = 0; i < block.rows; ++i) {
    for (Eigen::Index j = 0; j < block.cols; ++j) {
      in.read(buf, 8);
      std::uint64_t bits = 0;
      std::memcpy(&bits, buf, 8);
      m(i, j) = std::bit_cast<double>(detail::to_le(bits));
    }
  }
  return m;
}

inline Json blocks_json(const std::string& file, const std::vector<Block>& blocks) {
  Json list = Json::array();
  for (const auto& b : blocks) list.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  return {{"file", file}, {"encoding", "f64-le-row-major"}, {"blocks", list}};
}

inline Block find_block(const Json& sidecar, const std::string& name) {
  for (const auto& b : sidecar.at("blocks")) {
    if (b.at("name") == name) {
      return {name, b.at("rows").get<Eigen::Index>(), b.at("cols").get<Eigen::Index>(),
              b.at("offset").get<Eigen::Index>()};
    }
  }
  throw Error(ErrorKind::ParseError, "sidecar has no block '" + name + "'");
}

/// `<stem>.json` holds the model, adversary and seed; `<stem>.bin` holds the clean and corrupted matrices.
inline void save_instance(const std::filesystem::path& json_path, const gen::ProblemInstance& inst) {
  auto bin_path = json_path;
  bin_path.replace_extension(".bin");
  const auto blocks = write_sidecar(bin_path, {{"clean", &inst.clean}, {"corrupted", &inst.corrupted}});
  Json adv = {{"kind", gen::to_string(inst.adversary.kind)}, {"magnitude", inst.adversary.magnitude}};
  if (inst.adversary.direction.size() > 0) adv["direction"] = detail::vector_json(inst.adversary.direction);
  const Json doc = {
      {"format", "lowrankbp-instance"},
      {"version", kFormatVersion},
      {"d", inst.d()},
      {"k", inst.model.rank()},
      {"n", inst.n()},
      {"s", inst.s},
      {"seed", inst.seed},
      {"span_mean", inst.subspace.dim() > inst.model.rank()},
      {"adversary", adv},
      {"model", {{"mean", detail::vector_json(inst.model.mean())}, {"factor", detail::matrix_json(inst.model.factor())}}},
      {"sidecar", blocks_json(bin_path.filename().string(), blocks)},
  };
  std::ofstream out(json_path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + json_path.string() + " for writing");
  out << std::setw(2) << doc << '\n';
}

/// Replays the instance from its seed and checks it against the sidecar bit for bit.
inline gen::ProblemInstance load_instance(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + json_path.string());
  return detail::parse_guard(json_path.string(), [&] {
    const Json doc = Json::parse(in);
    if (doc.at("format") != "lowrankbp-instance") throw Error(ErrorKind::ParseError, "not an instance file");
    if (doc.at("version").get<int>() != kFormatVersion) throw Error(ErrorKind::ParseError, "unsupported version");
    const auto& m = doc.at("model");
    GaussianModel model(detail::json_vector(m.at("mean")), detail::json_matrix(m.at("factor")));
    const auto& a = doc.at("adversary");
    gen::Adversary adv{gen::parse_adversary_kind(a.at("kind").get<std::string>()), a.at("magnitude").get<double>(),
                       a.contains("direction") ? detail::json_vector(a.at("direction")) : Vector()};
    gen::ProblemInstance inst = gen::sample_instance(model, doc.at("n").get<int>(), doc.at("s").get<int>(), adv,
                                                     doc.at("seed").get<std::uint64_t>(), doc.at("span_mean").get<bool>());
    const auto bin_path = json_path.parent_path() / doc.at("sidecar").at("file").get<std::string>();
    if (read_block(bin_path, find_block(doc.at("sidecar"), "clean")) != inst.clean ||
        read_block(bin_path, find_block(doc.at("sidecar"), "corrupted")) != inst.corrupted) {
      throw Error(ErrorKind::ParseError, "sidecar does not match the replayed instance");
    }
    return inst;
  });
}

/// `<stem>.json` holds the scalars and the mean estimate; `<stem>.bin` holds estimates, the subspace
/// basis and the per-point vectors.
inline void save_report(const std::filesystem::path& json_path, const pipeline::RecoveryReport& report) {
  auto bin_path = json_path;
  bin_path.replace_extension(".bin");
  const Matrix objective = report.per_point_objective;
  const Matrix l1 = report.per_point_l1 ? Matrix(*report.per_point_l1) : Matrix();
  std::vector<std::pair<std::string, const Matrix*>> parts = {
      {"estimates", &report.estimates}, {"subspace_basis", &report.subspace_used.basis()}, {"per_point_objective", &objective}};
  if (report.per_point_l1) parts.emplace_back("per_point_l1", &l1);
  const auto blocks = write_sidecar(bin_path, parts);
  Json doc = {
      {"format", "lowrankbp-report"},
      {"version", kFormatVersion},
      {"n", report.estimates.rows()},
      {"d", report.estimates.cols()},
      {"subspace_dim", report.subspace_used.dim()},
      {"scale", report.scale},
      {"clip_radius", report.clip_radius},
      {"clipped_entries", report.clipped_entries},
      {"mean_estimate", detail::vector_json(report.mean_estimate)},
      {"mean_l1_error", report.mean_l1_error ? Json(*report.mean_l1_error) : Json(nullptr)},
      {"sidecar", blocks_json(bin_path.filename().string(), blocks)},
  };
  std::ofstream out(json_path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + json_path.string() + " for writing");
  out << std::setw(2) << doc << '\n';
}

inline pipeline::RecoveryReport load_report(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + json_path.string());
  return detail::parse_guard(json_path.string(), [&] {
    const Json doc = Json::parse(in);
    if (doc.at("format") != "lowrankbp-report") throw Error(ErrorKind::ParseError, "not a report file");
    const auto bin_path = json_path.parent_path() / doc.at("sidecar").at("file").get<std::string>();
    const Json& side = doc.at("sidecar");
    pipeline::RecoveryReport r{read_block(bin_path, find_block(side, "estimates")),
                               read_block(bin_path, find_block(side, "per_point_objective")).col(0),
                               std::nullopt,
                               detail::json_vector(doc.at("mean_estimate")),
                               std::nullopt,
                               Subspace(read_block(bin_path, find_block(side, "subspace_basis"))),
                               doc.at("scale").get<double>(),
                               doc.at("clip_radius").get<double>(),
                               doc.at("clipped_entries").get<long>()};
    for (const auto& b : side.at("blocks")) {
      if (b.at("name") == "per_point_l1") r.per_point_l1 = read_block(bin_path, find_block(side, "per_point_l1")).col(0);
    }
    if (!doc.at("mean_l1_error").is_null()) r.mean_l1_error = doc.at("mean_l1_error").get<double>();
    return r;
  });
}

/// Minimal CSV writer: fixed header, numbers at round-trip precision.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), width_(header.size()) {
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    if (sizeof...(Ts) != width_) throw Error(ErrorKind::InternalInvariant, "CSV row width differs from header");
    std::size_t i = 0;
    ((out_ << (i++ ? "," : ""), put(values)), ...);
    out_ << '\n';
  }

 private:
  void put(double v) {
    if (std::isnan(v)) {
      out_ << "nan";
    } else {
      out_ << v;
    }
  }
  void put(const std::string& v) { out_ << v; }
  void put(const char* v) { out_ << v; }
  template <class T>
  void put(const T& v) {
    out_ << v;
  }

  std::ostream& out_;
  std::size_t width_;
};

}  // namespace lowrankbp::io

#endif  // LOWRANKBP_IO_HPP
