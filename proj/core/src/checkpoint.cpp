#include "relsum/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "relsum/checksum.hpp"
#include "relsum/error.hpp"

namespace relsum {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xffU));
}

void put_string(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

std::string tensor_payload(const Eigen::MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i])));
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::string string() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCategory::parse, "checkpoint is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

// Shapes only; values are overwritten by the loader.
SummarizerModel empty_model(std::size_t dim, std::vector<std::size_t> widths,
                            std::vector<std::string> vocabulary) {
  Rng rng(0);
  return SummarizerModel::initialize(dim, std::move(widths), std::move(vocabulary), rng);
}

}  // namespace

std::string serialize_checkpoint(const SummarizerModel& model) {
  std::string out = "RSCK";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(model.dim));
  put_u32(out, static_cast<std::uint32_t>(model.widths.size()));
  for (std::size_t q : model.widths) put_u32(out, static_cast<std::uint32_t>(q));
  put_u32(out, static_cast<std::uint32_t>(model.vocabulary.size()));
  for (const auto& w : model.vocabulary) put_string(out, w);
  const auto tensors = model.tensors();
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_string(out, t.name);
    put_u32(out, static_cast<std::uint32_t>(t.value->rows()));
    put_u32(out, static_cast<std::uint32_t>(t.value->cols()));
    out += tensor_payload(*t.value);
  }
  return out;
}

SummarizerModel deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.raw(4) != "RSCK") throw Error(ErrorCategory::parse, "not a checkpoint file");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion)
    throw Error(ErrorCategory::parse, "unsupported checkpoint version " + std::to_string(version));
  const std::size_t dim = in.u32();
  std::vector<std::size_t> widths(in.u32());
  for (auto& q : widths) q = in.u32();
  std::vector<std::string> vocabulary(in.u32());
  for (auto& w : vocabulary) w = in.string();
  if (vocabulary.empty() || vocabulary.front() != kUnknownToken)
    throw Error(ErrorCategory::parse, "checkpoint vocabulary must start with the unknown token");
  SummarizerModel model = empty_model(dim, widths, vocabulary);
  auto tensors = model.tensors();
  if (in.u32() != tensors.size()) throw Error(ErrorCategory::parse, "checkpoint tensor count mismatch");
  for (auto& t : tensors) {
    const std::string name = in.string();
    const std::uint32_t rows = in.u32();
    const std::uint32_t cols = in.u32();
    if (name != t.name || rows != t.value->rows() || cols != t.value->cols())
      throw Error(ErrorCategory::parse, "unexpected tensor " + name + " in checkpoint");
    for (Eigen::Index i = 0; i < t.value->size(); ++i)
      t.value->data()[i] = std::bit_cast<float>(in.u32());
  }
  if (!in.done()) throw Error(ErrorCategory::parse, "trailing bytes in checkpoint");
  for (const auto& t : tensors)
    if (!t.value->allFinite()) throw Error(ErrorCategory::non_finite, "tensor " + t.name + " is not finite");
  return model;
}

std::string checkpoint_manifest(const SummarizerModel& model) {
  std::ostringstream out;
  for (const auto& t : model.tensors())
    out << t.name << ' ' << t.value->rows() << ' ' << t.value->cols() << ' '
        << to_hex(fnv1a64(tensor_payload(*t.value))) << '\n';
  return out.str();
}

void save_checkpoint(const SummarizerModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(model));
  write_file_atomic(path.string() + ".manifest", checkpoint_manifest(model));
}

SummarizerModel load_checkpoint(const std::filesystem::path& path) {
  SummarizerModel model = deserialize_checkpoint(read_file(path));
  const std::string expected = read_file(path.string() + ".manifest");
  if (checkpoint_manifest(model) != expected)
    throw Error(ErrorCategory::parse, "checkpoint " + path.string() + " does not match its manifest");
  return model;
}

SummarizerModel round_to_float(SummarizerModel model) {
  for (auto& t : model.tensors()) *t.value = t.value->cast<float>().cast<double>();
  return model;
}

}  // namespace relsum
