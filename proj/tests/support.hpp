#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nusavocab/document.hpp"
#include "nusavocab/io.hpp"
#include "nusavocab/vocabulary.hpp"

namespace testing_support {

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("nusavocab-test-" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    nusavocab::write_file_atomic(p, content);
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline nusavocab::Vocabulary make_vocab(std::vector<std::string> body) {
  std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  tokens.insert(tokens.end(), body.begin(), body.end());
  return nusavocab::Vocabulary(std::move(tokens));
}

// Random lowercase words over a small alphabet, so merges actually happen.
inline std::string random_word(std::mt19937_64& gen, std::size_t max_len, const std::string& alphabet = "abcde") {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string w;
  const std::size_t n = len(gen);
  for (std::size_t i = 0; i < n; ++i) w += alphabet[pick(gen)];
  return w;
}

inline std::string random_sentence(std::mt19937_64& gen, std::size_t words, const std::string& alphabet = "abcde") {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += random_word(gen, 6, alphabet);
  }
  return s;
}

inline std::string doc_line(const std::string& id, const std::string& lang, const std::string& source,
                            const std::string& text) {
  return R"({"id":")" + id + R"(","lang":")" + lang + R"(","source":")" + source + R"(","text":")" + text +
         "\"}";
}

}  // namespace testing_support
