#pragma once

#include <stdexcept>
#include <string>

namespace citesum {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// corpus
struct MalformedJson : Error { using Error::Error; };
struct MissingUid : Error { using Error::Error; };
struct EmptyResult : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct UnknownSplit : Error { using Error::Error; };

// citegraph
struct DanglingEdge : Error { using Error::Error; };
struct UnknownSeed : Error { using Error::Error; };

// tokenizer
struct CorpusTooSmall : Error { using Error::Error; };
struct UnknownId : Error { using Error::Error; };

// model
struct NoCitations : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct PrefixTooLong : Error { using Error::Error; };
struct Divergence : Error { using Error::Error; };

// baselines
struct EmptyDocument : Error { using Error::Error; };
struct EmptyReference : Error { using Error::Error; };

// metrics
struct MissingReference : Error { using Error::Error; };
struct EmptyText : Error { using Error::Error; };

// I/O (maps to CLI exit code 2)
struct IoError : Error { using Error::Error; };

}  // namespace citesum
