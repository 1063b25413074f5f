#include "merkit/error.hpp"

namespace merkit {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kDimension:
      return "dimension error";
    case ErrorKind::kData:
      return "data error";
    case ErrorKind::kParameter:
      return "parameter error";
    case ErrorKind::kSingularity:
      return "singularity error";
    case ErrorKind::kParse:
      return "parse error";
    case ErrorKind::kFixture:
      return "fixture integrity error";
    case ErrorKind::kCapacity:
      return "capacity error";
    case ErrorKind::kTraining:
      return "training error";
  }
  return "error";
}

}  // namespace merkit
