#pragma once

#include <string>
#include <vector>

namespace rdf {

// Built-in battery of valid formulas exercising the whole language; the same
// texts are checked in as fixtures under corpus/.
struct CorpusEntry {
  std::string name;
  std::string text;
};

const std::vector<CorpusEntry>& corpus();

}  // namespace rdf
