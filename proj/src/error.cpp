#include "albird/error.hpp"

namespace albird {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::BadFormat: return "BadFormat";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::BadLabelIndex: return "BadLabelIndex";
    case Errc::DuplicateIndex: return "DuplicateIndex";
    case Errc::NonFiniteEmbedding: return "NonFiniteEmbedding";
    case Errc::UnassignedDay: return "UnassignedDay";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::EmptyLabeledSet: return "EmptyLabeledSet";
    case Errc::NoPositives: return "NoPositives";
    case Errc::AllClassesEmpty: return "AllClassesEmpty";
    case Errc::NoEligibleClass: return "NoEligibleClass";
    case Errc::NoLabeledInstances: return "NoLabeledInstances";
    case Errc::IndexNotInPool: return "IndexNotInPool";
    case Errc::PoolExhausted: return "PoolExhausted";
    case Errc::BaselineMissing: return "BaselineMissing";
    case Errc::UnknownStrategy: return "UnknownStrategy";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile:
    case Errc::BadFormat:
    case Errc::SizeMismatch:
    case Errc::BadLabelIndex:
    case Errc::DuplicateIndex:
    case Errc::NonFiniteEmbedding:
    case Errc::UnassignedDay:
    case Errc::EmptySplit:
    case Errc::InvalidConfig:
    case Errc::UnknownStrategy:
    case Errc::BaselineMissing:
    case Errc::PoolExhausted:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

}  // namespace albird
