// Copyright 2026 The class-atlas Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace class_atlas {

enum class ErrorCode {
  // ingest
  RaggedRow,
  NonNumericCell,
  NonFiniteValue,
  DuplicateClassName,
  RowSumViolation,
  BadMagic,
  TruncatedPayload,
  JSONSchemaError,
  EmptyLabelSet,
  MalformedRow,
  DuplicateLeaf,
  Io,
  // similarity
  WrongKind,
  TooFewSamples,
  UnknownLabel,
  UnknownSample,
  MultiLabelInput,
  EmptyInput,
  // seriation
  AsymmetricInput,
  NonZeroDiagonal,
  TooFewClasses,
  LeafMismatch,
  SizeMismatch,
  KOutOfRange,
  NonContiguousPartition,
  // groups
  BadClusterCount,
  BadFuzzifier,
  SingleBlock,
  // render
  OrderingMismatch,
  EmptyReport,
  BadRenderSpec,
  // cli
  ConfigInvalid,
  Internal,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateClassName: return "DuplicateClassName";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::JSONSchemaError: return "JSONSchemaError";
    case ErrorCode::EmptyLabelSet: return "EmptyLabelSet";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateLeaf: return "DuplicateLeaf";
    case ErrorCode::Io: return "Io";
    case ErrorCode::WrongKind: return "WrongKind";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownSample: return "UnknownSample";
    case ErrorCode::MultiLabelInput: return "MultiLabelInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::NonZeroDiagonal: return "NonZeroDiagonal";
    case ErrorCode::TooFewClasses: return "TooFewClasses";
    case ErrorCode::LeafMismatch: return "LeafMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::NonContiguousPartition: return "NonContiguousPartition";
    case ErrorCode::BadClusterCount: return "BadClusterCount";
    case ErrorCode::BadFuzzifier: return "BadFuzzifier";
    case ErrorCode::SingleBlock: return "SingleBlock";
    case ErrorCode::OrderingMismatch: return "OrderingMismatch";
    case ErrorCode::EmptyReport: return "EmptyReport";
    case ErrorCode::BadRenderSpec: return "BadRenderSpec";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

// Process exit codes used by the command line tool.
enum class ErrorCategory { Input = 2, Config = 3, Internal = 4 };

constexpr ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::WrongKind:
    case ErrorCode::BadClusterCount:
    case ErrorCode::BadFuzzifier:
    case ErrorCode::KOutOfRange:
    case ErrorCode::BadRenderSpec:
    case ErrorCode::ConfigInvalid:
      return ErrorCategory::Config;
    case ErrorCode::Internal:
      return ErrorCategory::Internal;
    default:
      return ErrorCategory::Input;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace class_atlas
