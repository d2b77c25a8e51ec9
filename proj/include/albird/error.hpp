#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace albird {

enum class Errc {
  MissingFile,
  BadFormat,
  SizeMismatch,
  BadLabelIndex,
  DuplicateIndex,
  NonFiniteEmbedding,
  UnassignedDay,
  EmptySplit,
  InvalidConfig,
  ShapeMismatch,
  NonFiniteGradient,
  EmptyLabeledSet,
  NoPositives,
  AllClassesEmpty,
  NoEligibleClass,
  NoLabeledInstances,
  IndexNotInPool,
  PoolExhausted,
  BaselineMissing,
  UnknownStrategy,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

// Validation and configuration failures map to CLI exit code 1, the rest to 2.
bool is_validation_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace albird
