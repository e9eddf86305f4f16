#include "sparta/model.hpp"

#include <cstring>
#include <stdexcept>

#include "sparta/binary_io.hpp"
#include "sparta/rng.hpp"

namespace sparta {

Model init_model(Vocabulary vocab, std::size_t dim, std::uint32_t window,
                 std::uint64_t seed, bool trainable_embeddings) {
  Rng rng(seed);
  Model m;
  m.vocab = std::move(vocab);
  m.encoder = init_encoder_params(m.vocab.size(), dim, window, rng);
  m.query_table.embeddings = m.encoder.token_table;
  m.query_table.bias = 0.0;
  m.query_table.trainable_embeddings = trainable_embeddings;
  return m;
}

namespace {

constexpr char kModelMagic[4] = {'S', 'P', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

void write_matrix_f32(BinaryWriter& w, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      w.write_f32(static_cast<float>(m(r, c)));
    }
  }
}

Mat read_matrix_f32(BinaryReader& r, Eigen::Index rows, Eigen::Index cols,
                    const char* field) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = static_cast<double>(r.read_f32(field));
    }
  }
  return m;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
  BinaryWriter w;
  w.write_bytes(kModelMagic, sizeof(kModelMagic));
  w.write_u32(kModelVersion);
  w.write_u32(static_cast<std::uint32_t>(model.vocab.size()));
  for (const std::string& t : model.vocab.terms()) w.write_string(t);
  w.write_u32(static_cast<std::uint32_t>(model.dim()));
  w.write_f64(model.query_table.bias);
  write_matrix_f32(w, model.query_table.embeddings);
  write_matrix_f32(w, model.encoder.token_table);
  write_matrix_f32(w, model.encoder.segment_table);
  write_matrix_f32(w, model.encoder.proj);
  write_matrix_f32(w, model.encoder.proj_bias);
  w.write_u32(model.encoder.window);
  w.save(path);
}

Model load_model(const std::filesystem::path& path) {
  BinaryReader r = BinaryReader::from_file(path);
  char magic[4];
  r.read_bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + ": bad magic at offset 0");
  }
  const std::uint32_t version = r.read_u32("version");
  if (version != kModelVersion) {
    throw std::runtime_error(path.string() + ": unsupported version " +
                             std::to_string(version) + " at offset 4");
  }
  const std::uint32_t term_count = r.read_u32("term_count");
  std::vector<std::string> terms;
  terms.reserve(term_count);
  for (std::uint32_t i = 0; i < term_count; ++i) {
    terms.push_back(r.read_string("term"));
  }
  Model m;
  m.vocab = Vocabulary::from_terms(std::move(terms));
  const auto v = static_cast<Eigen::Index>(term_count);
  const auto d = static_cast<Eigen::Index>(r.read_u32("d"));
  m.query_table.bias = r.read_f64("bias");
  m.query_table.embeddings = read_matrix_f32(r, v, d, "query embeddings");
  m.encoder.token_table = read_matrix_f32(r, v, d, "token_table");
  m.encoder.segment_table = read_matrix_f32(r, 2, d, "segment_table");
  m.encoder.proj = read_matrix_f32(r, d, d, "proj");
  m.encoder.proj_bias = read_matrix_f32(r, d, 1, "proj_bias");
  m.encoder.window = r.read_u32("window");
  if (r.remaining() != 0) {
    throw std::runtime_error(path.string() + ": trailing bytes at offset " +
                             std::to_string(r.offset()));
  }
  return m;
}

}  // namespace sparta
