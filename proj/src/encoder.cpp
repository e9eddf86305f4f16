#include "sparta/encoder.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sparta/rng.hpp"

namespace sparta {

namespace {

Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev,
                  Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = rng.next_normal(0.0, stddev);
    }
  }
  return m;
}

struct WindowSpan {
  Eigen::Index begin;
  Eigen::Index end;  // exclusive
  Eigen::Index count() const { return end - begin; }
};

WindowSpan window_span(Eigen::Index pos, Eigen::Index len, std::uint32_t window) {
  const auto w = static_cast<Eigen::Index>(window);
  return {std::max<Eigen::Index>(0, pos - w), std::min(len, pos + w + 1)};
}

}  // namespace

ToyEncoderParams init_encoder_params(std::size_t vocab_size, std::size_t dim,
                                     std::uint32_t window, Rng& rng) {
  const auto v = static_cast<Eigen::Index>(vocab_size);
  const auto d = static_cast<Eigen::Index>(dim);
  ToyEncoderParams p;
  p.token_table = normal_matrix(v, d, 0.02, rng);
  p.segment_table = Mat::Zero(2, d);
  p.proj = normal_matrix(d, d, 0.02, rng);
  p.proj_bias = Vec::Zero(d);
  p.window = window;
  return p;
}

AnswerEncoding encode(const AnswerCandidate& candidate,
                      const ToyEncoderParams& params) {
  const std::vector<TermId> tokens = candidate.full_tokens();
  const std::vector<std::uint8_t> labels = candidate.segment_labels();
  const auto len = static_cast<Eigen::Index>(tokens.size());
  const Eigen::Index d = params.dim();

  for (const TermId t : tokens) {
    if (t >= params.vocab_size()) {
      throw std::out_of_range("token out of vocabulary range: " +
                              std::to_string(t));
    }
  }

  AnswerEncoding enc;
  enc.answer_id = candidate.id;
  enc.answer_begin = static_cast<Eigen::Index>(candidate.context_left_tokens.size());
  enc.answer_end = enc.answer_begin +
                   static_cast<Eigen::Index>(candidate.answer_tokens.size());
  enc.vectors.resize(d, len);

  for (Eigen::Index j = 0; j < len; ++j) {
    const WindowSpan span = window_span(j, len, params.window);
    Vec h = Vec::Zero(d);
    for (Eigen::Index p = span.begin; p < span.end; ++p) {
      h += params.token_table.row(static_cast<Eigen::Index>(tokens[p])).transpose();
    }
    h /= static_cast<double>(span.count());
    h += params.segment_table.row(labels[j]).transpose();
    enc.vectors.col(j) = ((params.proj * h) + params.proj_bias).array().tanh();
  }
  return enc;
}

EncoderGradients zero_encoder_gradients(const ToyEncoderParams& params) {
  EncoderGradients g;
  g.token_table = Mat::Zero(params.token_table.rows(), params.token_table.cols());
  g.segment_table = Mat::Zero(2, params.dim());
  g.proj = Mat::Zero(params.dim(), params.dim());
  g.proj_bias = Vec::Zero(params.dim());
  return g;
}

void encode_backward(const AnswerCandidate& candidate,
                     const ToyEncoderParams& params,
                     const AnswerEncoding& encoding, const Mat& grad_vectors,
                     EncoderGradients& out) {
  const std::vector<TermId> tokens = candidate.full_tokens();
  const std::vector<std::uint8_t> labels = candidate.segment_labels();
  const auto len = static_cast<Eigen::Index>(tokens.size());

  for (Eigen::Index j = 0; j < len; ++j) {
    if (grad_vectors.col(j).isZero(0.0)) continue;
    const Vec s = encoding.vectors.col(j);
    const Vec grad_z =
        (1.0 - s.array().square()).matrix().cwiseProduct(grad_vectors.col(j));

    const WindowSpan span = window_span(j, len, params.window);
    Vec h = Vec::Zero(params.dim());
    for (Eigen::Index p = span.begin; p < span.end; ++p) {
      h += params.token_table.row(static_cast<Eigen::Index>(tokens[p])).transpose();
    }
    h /= static_cast<double>(span.count());
    h += params.segment_table.row(labels[j]).transpose();

    out.proj += grad_z * h.transpose();
    out.proj_bias += grad_z;

    const Vec grad_h = params.proj.transpose() * grad_z;
    out.segment_table.row(labels[j]) += grad_h.transpose();
    const double inv_count = 1.0 / static_cast<double>(span.count());
    for (Eigen::Index p = span.begin; p < span.end; ++p) {
      out.token_table.row(static_cast<Eigen::Index>(tokens[p])) +=
          inv_count * grad_h.transpose();
    }
  }
}

std::map<std::uint32_t, AnswerEncoding> import_encodings(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::map<std::uint32_t, AnswerEncoding> out;
  Eigen::Index dim = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
    const auto id = j.at("id").get<std::uint32_t>();
    const auto& rows = j.at("vectors");
    AnswerEncoding enc;
    enc.answer_id = id;
    const auto cols = static_cast<Eigen::Index>(rows.size());
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto vec = rows[static_cast<std::size_t>(c)]
                           .get<std::vector<double>>();
      const auto d = static_cast<Eigen::Index>(vec.size());
      if (dim < 0) dim = d;
      if (d != dim) {
        throw std::runtime_error("inconsistent embedding dim in " +
                                 path.string() + ":" + std::to_string(line_no) +
                                 " (got " + std::to_string(d) + ", expected " +
                                 std::to_string(dim) + ")");
      }
      if (c == 0) enc.vectors.resize(dim, cols);
      enc.vectors.col(c) = Eigen::Map<const Vec>(vec.data(), d);
    }
    enc.answer_begin = 0;
    enc.answer_end = cols;
    if (!out.emplace(id, std::move(enc)).second) {
      throw std::runtime_error("duplicate answer id " + std::to_string(id) +
                               " in " + path.string());
    }
  }
  return out;
}

}  // namespace sparta
