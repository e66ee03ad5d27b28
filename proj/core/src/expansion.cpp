#include "nusavocab/expansion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#include "nusavocab/error.hpp"
#include "nusavocab/io.hpp"
#include "nusavocab/parallel.hpp"

namespace nusavocab {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (cols_ == 0) throw DataError("embedding matrix must have at least one column");
  if (data_.size() != rows_ * cols_) {
    throw DataError("embedding data has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(rows_ * cols_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw DataError("non-finite embedding value at row " + std::to_string(i / cols_) + ", column " +
                      std::to_string(i % cols_));
    }
  }
}

namespace {

constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::string serialize_embeddings(const EmbeddingMatrix& matrix) {
  if (matrix.rows() > std::numeric_limits<std::uint32_t>::max() ||
      matrix.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("embedding matrix too large for EMB1");
  }
  std::string out(kEmbeddingMagic, 4);
  put(out, static_cast<std::uint32_t>(matrix.rows()));
  put(out, static_cast<std::uint32_t>(matrix.cols()));
  const auto values = matrix.data();
  out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(float));
  return out;
}

EmbeddingMatrix deserialize_embeddings(std::string_view bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw DataError("not an EMB1 embedding file");
  }
  const auto rows = get<std::uint32_t>(bytes, 4);
  const auto cols = get<std::uint32_t>(bytes, 8);
  const std::size_t count = std::size_t{rows} * cols;
  if (bytes.size() != 12 + count * sizeof(float)) {
    throw DataError("EMB1 payload is " + std::to_string(bytes.size() - 12) + " bytes, expected " +
                    std::to_string(count * sizeof(float)));
  }
  std::vector<float> data(count);
  std::memcpy(data.data(), bytes.data() + 12, count * sizeof(float));
  return EmbeddingMatrix(rows, cols, std::move(data));
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  return deserialize_embeddings(read_file(path));
}

std::vector<std::string> diff_vocabulary(const Vocabulary& base, const Vocabulary& candidate) {
  std::vector<std::string> fresh;
  for (const std::string& token : candidate.tokens()) {
    if (candidate.specials().contains(token) || base.specials().contains(token)) continue;
    if (!base.contains(token)) fresh.push_back(token);
  }
  return fresh;
}

Vocabulary extend_vocabulary(const Vocabulary& base, std::span<const std::string> new_tokens) {
  std::vector<std::string> tokens(base.tokens().begin(), base.tokens().end());
  std::unordered_set<std::string_view> seen;
  for (const std::string& token : new_tokens) {
    if (base.contains(token)) throw DataError("token '" + token + "' already exists in the base vocabulary");
    if (!seen.insert(token).second) throw DataError("token '" + token + "' appears twice in the new tokens");
    tokens.push_back(token);
  }
  return Vocabulary(std::move(tokens), base.specials(), base.continuation_prefix());
}

ExpansionReport plan_expansion(const Vocabulary& base, const Vocabulary& candidate) {
  ExpansionReport report;
  report.base_size = base.size();
  report.candidate_size = candidate.size();
  report.new_tokens = diff_vocabulary(base, candidate);
  report.extended_size = base.size() + report.new_tokens.size();
  return report;
}

EmbeddingMatrix extend_embeddings(const EmbeddingMatrix& matrix, std::size_t new_count,
                                  std::span<const TokenId> excluded_rows) {
  if (matrix.rows() == 0) throw DataError("cannot take the mean of an embedding matrix with zero rows");
  std::vector<bool> excluded(matrix.rows(), false);
  for (TokenId r : excluded_rows) {
    if (r < matrix.rows()) excluded[r] = true;
  }
  const std::size_t cols = matrix.cols();
  std::vector<double> sum(cols, 0.0);
  std::size_t contributing = 0;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (excluded[r]) continue;
    const auto row = matrix.row(r);
    for (std::size_t c = 0; c < cols; ++c) sum[c] += static_cast<double>(row[c]);
    ++contributing;
  }
  if (contributing == 0) throw DataError("every embedding row is excluded from the mean");

  std::vector<float> mean(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    mean[c] = static_cast<float>(sum[c] / static_cast<double>(contributing));
  }
  std::vector<float> data(matrix.data().begin(), matrix.data().end());
  data.reserve(data.size() + new_count * cols);
  for (std::size_t i = 0; i < new_count; ++i) data.insert(data.end(), mean.begin(), mean.end());
  return EmbeddingMatrix(matrix.rows() + new_count, cols, std::move(data));
}

bool is_prefix_extension(const Vocabulary& base, const Vocabulary& extended) {
  if (extended.size() < base.size()) return false;
  if (!(base.specials() == extended.specials())) return false;
  if (base.continuation_prefix() != extended.continuation_prefix()) return false;
  return std::equal(base.tokens().begin(), base.tokens().end(), extended.tokens().begin());
}

NewTokenProportion proportion_new_tokens(std::span<const Document> documents,
                                         const TokenizerModel& base_model,
                                         const TokenizerModel& extended_model) {
  if (!is_prefix_extension(base_model.vocab(), extended_model.vocab())) {
    throw DataError("extended vocabulary does not preserve the base vocabulary ids");
  }
  const TokenId base_size = static_cast<TokenId>(base_model.vocab().size());
  std::vector<std::uint64_t> fresh(documents.size());
  std::vector<std::uint64_t> total(documents.size());
  parallel_for(documents.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ids = extended_model.encode(documents[i].text, /*add_specials=*/false);
      total[i] = ids.size();
      fresh[i] = static_cast<std::uint64_t>(
          std::count_if(ids.begin(), ids.end(), [&](TokenId id) { return id >= base_size; }));
    }
  });
  NewTokenProportion out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    out.new_tokens += fresh[i];
    out.total_tokens += total[i];
  }
  if (out.total_tokens > 0) {
    out.ratio = static_cast<double>(out.new_tokens) / static_cast<double>(out.total_tokens);
  }
  return out;
}

}  // namespace nusavocab
