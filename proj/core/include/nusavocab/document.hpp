#pragma once

#include <string>

namespace nusavocab {

/// Language-tagged unit of text flowing through the corpus pipeline.
struct Document {
  std::string id;
  std::string lang;    // ISO 639-3
  std::string source;  // provenance tag, e.g. "wikipedia"
  std::string text;

  friend bool operator==(const Document&, const Document&) = default;
};

}  // namespace nusavocab
